#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace horizon {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Overflow-safe Euclidean norm: rescale by the largest magnitude before
// squaring (values like e^500 show up routinely in asymptotic sampling).
inline double norm2(const Vec& a) {
  double mx = 0.0;
  for (double v : a) mx = std::max(mx, std::fabs(v));
  if (mx == 0.0) return 0.0;
  if (std::isinf(mx)) return mx;
  if (mx < 1e150 && mx > 1e-150) return std::sqrt(dot(a, a));
  double s = 0.0;
  for (double v : a) {
    const double t = v / mx;
    s += t * t;
  }
  return mx * std::sqrt(s);
}

inline double dist2(const Vec& a, const Vec& b) {
  double mx = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mx = std::max(mx, std::fabs(a[i] - b[i]));
  if (mx == 0.0) return 0.0;
  if (std::isinf(mx)) return mx;
  if (mx < 1e150) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      s += d * d;
    }
    return std::sqrt(s);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = (a[i] - b[i]) / mx;
    s += t * t;
  }
  return mx * std::sqrt(s);
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scaled(const Vec& a, double t) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = t * a[i];
  return r;
}

// y += t*x
inline void axpy(double t, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += t * x[i];
}

// Overflow-safe normalization: rescale by the largest magnitude first; infs
// dominate (their direction survives, finite entries vanish).
inline Vec normalized(const Vec& a) {
  double mx = 0.0;
  bool has_inf = false;
  for (double v : a) {
    if (std::isinf(v)) has_inf = true;
    mx = std::max(mx, std::fabs(v));
  }
  if (mx == 0.0) return a;
  Vec r(a.size());
  if (has_inf) {
    for (std::size_t i = 0; i < a.size(); ++i)
      r[i] = std::isinf(a[i]) ? (a[i] > 0 ? 1.0 : -1.0) : 0.0;
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] / mx;
  }
  const double n = norm2(r);
  return n > 0 ? scaled(r, 1.0 / n) : r;
}

inline bool all_finite(const Vec& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline Vec unit(std::size_t n, std::size_t i, double sign = 1.0) {
  Vec r(n, 0.0);
  r[i] = sign;
  return r;
}

// Angular distance between directions (both assumed unit): 1 - <a,b> is
// monotone in the angle and cheap; we use the chord metric ||a-b|| instead so
// tolerances read as Euclidean distances on the unit sphere.
inline double chord_dist(const Vec& a, const Vec& b) { return dist2(a, b); }

// Lexicographic comparison with tolerance-free semantics; used to fix the
// output ordering of points/rays so that equal-seed runs are byte-identical.
inline bool lex_less(const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

// Distance from x to the ray {base + t*dir : t >= 0}; dir need not be unit.
inline double dist_to_ray(const Vec& x, const Vec& base, const Vec& dir) {
  const Vec d = sub(x, base);
  const double dd = dot(dir, dir);
  if (dd <= 0) return norm2(d);
  const double t = std::max(0.0, dot(d, dir) / dd);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = d[i] - t * dir[i];
    s += e * e;
  }
  return std::sqrt(s);
}

// Distance from x to the segment [a, b].
inline double dist_to_segment(const Vec& x, const Vec& a, const Vec& b) {
  const Vec ab = sub(b, a);
  const double dd = dot(ab, ab);
  if (dd <= 0) return dist2(x, a);
  const double t = std::clamp(dot(sub(x, a), ab) / dd, 0.0, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = x[i] - a[i] - t * ab[i];
    s += e * e;
  }
  return std::sqrt(s);
}

}  // namespace horizon
