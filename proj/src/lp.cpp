#include "horizon/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace horizon {

std::optional<Vec> lin_solve(std::vector<Vec> A, Vec b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
    if (std::fabs(A[piv][col]) < 1e-12) return std::nullopt;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= A[r][c] * x[c];
    x[r] = s / A[r][r];
  }
  return x;
}

namespace {

// Residual r = sum_j lambda_j g_j - y.
Vec combo_residual(const std::vector<Vec>& gens, const Vec& lambda, const Vec& y) {
  Vec r = scaled(y, -1.0);
  for (std::size_t j = 0; j < gens.size(); ++j) axpy(lambda[j], gens[j], r);
  return r;
}

// Solve the unconstrained least squares min ||G_P lambda - y|| restricted to
// the passive set P; returns the full-length solution with zeros elsewhere.
std::optional<Vec> ls_on_support(const std::vector<Vec>& gens, const std::vector<int>& support,
                                 const Vec& y) {
  const int k = static_cast<int>(support.size());
  if (k == 0) return Vec(gens.size(), 0.0);
  std::vector<Vec> M(k, Vec(k, 0.0));
  Vec rhs(k, 0.0);
  for (int a = 0; a < k; ++a) {
    rhs[a] = dot(gens[support[a]], y);
    for (int b = 0; b < k; ++b) M[a][b] = dot(gens[support[a]], gens[support[b]]);
    M[a][a] += 1e-12;  // tiny ridge keeps degenerate generator pairs solvable
  }
  auto z = lin_solve(M, rhs);
  if (!z) return std::nullopt;
  Vec full(gens.size(), 0.0);
  for (int a = 0; a < k; ++a) full[support[a]] = (*z)[a];
  return full;
}

}  // namespace

Vec nnls(const std::vector<Vec>& gens, const Vec& y, int max_iter) {
  const int m = static_cast<int>(gens.size());
  Vec lambda(m, 0.0);
  if (m == 0) return lambda;
  std::vector<int> passive;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Vec r = combo_residual(gens, lambda, y);
    // w_j = -g_j . r is the negative gradient; pick the most improving index.
    int best = -1;
    double best_w = 1e-10;
    for (int j = 0; j < m; ++j) {
      if (std::find(passive.begin(), passive.end(), j) != passive.end()) continue;
      const double w = -dot(gens[j], r);
      if (w > best_w) {
        best_w = w;
        best = j;
      }
    }
    if (best < 0) break;
    passive.push_back(best);
    // Inner loop: keep the passive-set solution feasible.
    for (;;) {
      auto z = ls_on_support(gens, passive, y);
      if (!z) {
        passive.pop_back();
        break;
      }
      bool ok = true;
      double alpha = 1.0;
      for (int j : passive)
        if ((*z)[j] <= 0) ok = false;
      if (ok) {
        lambda = *z;
        break;
      }
      for (int j : passive) {
        if ((*z)[j] <= 0 && lambda[j] - (*z)[j] > 1e-15)
          alpha = std::min(alpha, lambda[j] / (lambda[j] - (*z)[j]));
      }
      for (int j = 0; j < m; ++j) lambda[j] += alpha * ((*z)[j] - lambda[j]);
      std::vector<int> next;
      for (int j : passive)
        if (lambda[j] > 1e-12) next.push_back(j);
      passive = next;
      if (passive.empty()) break;
    }
  }
  return lambda;
}

Vec project_simplex(Vec y) {
  const int n = static_cast<int>(y.size());
  Vec u = y;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  for (auto& v : y) v = std::max(0.0, v - theta);
  return y;
}

namespace {

// FISTA on f(c) = 0.5*||G c - x||^2 with projection `proj`; G column list.
Vec fista_min(const std::vector<Vec>& gens, const Vec& x, Vec c0, const auto& proj,
              int iters) {
  double lip = 1e-12;
  for (const auto& g : gens) lip += dot(g, g);
  Vec c = proj(c0), z = c;
  double t = 1.0;
  for (int k = 0; k < iters; ++k) {
    const Vec r = combo_residual(gens, z, x);
    Vec grad(gens.size());
    for (std::size_t j = 0; j < gens.size(); ++j) grad[j] = dot(gens[j], r);
    Vec cn(gens.size());
    for (std::size_t j = 0; j < gens.size(); ++j) cn[j] = z[j] - grad[j] / lip;
    cn = proj(cn);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t j = 0; j < gens.size(); ++j)
      z[j] = cn[j] + (t - 1.0) / tn * (cn[j] - c[j]);
    c = cn;
    t = tn;
  }
  return c;
}

}  // namespace

double dist_to_convex_hull(const std::vector<Vec>& points, const Vec& x, Vec* coeffs_out) {
  if (points.empty()) return std::numeric_limits<double>::infinity();
  if (points.size() == 1) {
    if (coeffs_out) *coeffs_out = Vec{1.0};
    return dist2(points[0], x);
  }
  Vec c0(points.size(), 1.0 / points.size());
  Vec c = fista_min(points, x, c0, [](Vec v) { return project_simplex(std::move(v)); }, 4000);
  // Polish: equality-constrained LS on the detected support, kept only if the
  // coefficients stay inside the simplex.
  std::vector<int> support;
  for (std::size_t j = 0; j < c.size(); ++j)
    if (c[j] > 1e-9) support.push_back(static_cast<int>(j));
  const int k = static_cast<int>(support.size());
  if (k >= 1) {
    std::vector<Vec> M(k + 1, Vec(k + 1, 0.0));
    Vec rhs(k + 1, 0.0);
    for (int a = 0; a < k; ++a) {
      rhs[a] = dot(points[support[a]], x);
      for (int b = 0; b < k; ++b) M[a][b] = dot(points[support[a]], points[support[b]]);
      M[a][k] = 1.0;
      M[k][a] = 1.0;
    }
    rhs[k] = 1.0;
    if (auto z = lin_solve(M, rhs)) {
      bool ok = true;
      for (int a = 0; a < k; ++a)
        if ((*z)[a] < -1e-12) ok = false;
      if (ok) {
        Vec polished(points.size(), 0.0);
        for (int a = 0; a < k; ++a) polished[support[a]] = std::max(0.0, (*z)[a]);
        const double before = norm2(combo_residual(points, c, x));
        const double after = norm2(combo_residual(points, polished, x));
        if (after <= before) c = polished;
      }
    }
  }
  if (coeffs_out) *coeffs_out = c;
  return norm2(combo_residual(points, c, x));
}

double dist_to_conic_hull(const std::vector<Vec>& rays, const Vec& x) {
  if (rays.empty()) return norm2(x);
  const Vec lambda = nnls(rays, x);
  return norm2(combo_residual(rays, lambda, x));
}

double dist_to_hull_sum(const std::vector<Vec>& points, const std::vector<Vec>& rays,
                        const Vec& x) {
  if (points.empty()) return dist_to_conic_hull(rays, x);
  if (rays.empty()) return dist_to_convex_hull(points, x);
  const std::size_t np = points.size();
  std::vector<Vec> gens = points;
  gens.insert(gens.end(), rays.begin(), rays.end());
  auto proj = [np](Vec v) {
    Vec head(v.begin(), v.begin() + np);
    head = project_simplex(std::move(head));
    for (std::size_t j = 0; j < v.size(); ++j)
      v[j] = j < np ? head[j] : std::max(0.0, v[j]);
    return v;
  };
  Vec c0(gens.size(), 0.0);
  for (std::size_t j = 0; j < np; ++j) c0[j] = 1.0 / np;
  const Vec c = fista_min(gens, x, c0, proj, 6000);
  return norm2(combo_residual(gens, c, x));
}

std::optional<double> simplex_max(const Vec& c, const std::vector<Vec>& W, const Vec& v) {
  const int m = static_cast<int>(W.size());
  const int n = static_cast<int>(c.size());
  // Tableau with slack basis; v >= 0 makes it primal feasible immediately.
  std::vector<Vec> T(m + 1, Vec(n + m + 1, 0.0));
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) T[i][j] = W[i][j];
    T[i][n + i] = 1.0;
    T[i][n + m] = v[i];
    basis[i] = n + i;
  }
  for (int j = 0; j < n; ++j) T[m][j] = -c[j];
  for (int iter = 0; iter < 2000; ++iter) {
    int col = -1;  // Bland's rule: first negative reduced cost
    for (int j = 0; j < n + m; ++j)
      if (T[m][j] < -1e-10) {
        col = j;
        break;
      }
    if (col < 0) return T[m][n + m];
    int row = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (T[i][col] > 1e-10) {
        const double ratio = T[i][n + m] / T[i][col];
        if (row < 0 || ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && basis[i] < basis[row])) {
          row = i;
          best = ratio;
        }
      }
    }
    if (row < 0) return std::nullopt;  // unbounded
    const double piv = T[row][col];
    for (auto& t : T[row]) t /= piv;
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      const double f = T[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j <= n + m; ++j) T[i][j] -= f * T[row][j];
    }
    basis[row] = col;
  }
  return std::nullopt;
}

bool recession_cone_nontrivial(const std::vector<Vec>& A, int n) {
  // d = diag(s) u with u in [0,1]^n per sign orthant; any positive optimum of
  // max sum(u) certifies a nonzero recession direction.
  const int orthants = 1 << n;
  for (int mask = 0; mask < orthants; ++mask) {
    std::vector<Vec> W;
    Vec v;
    for (const auto& row : A) {
      Vec w(n);
      for (int j = 0; j < n; ++j) w[j] = row[j] * ((mask >> j) & 1 ? -1.0 : 1.0);
      W.push_back(w);
      v.push_back(0.0);
    }
    for (int j = 0; j < n; ++j) {
      W.push_back(unit(n, j));
      v.push_back(1.0);
    }
    const Vec c(n, 1.0);
    const auto opt = simplex_max(c, W, v);
    if (opt && *opt > 1e-7) return true;
  }
  return false;
}

double least_norm_two_rays(const Vec& p, const Vec& rp, const Vec& q, const Vec& rq) {
  const std::size_t n = std::max(p.size(), q.size());
  Vec base(n, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) base[i] += p[i];
  for (std::size_t i = 0; i < q.size(); ++i) base[i] += q[i];
  std::vector<Vec> rays;
  if (!rp.empty()) rays.push_back(rp);
  if (!rq.empty()) rays.push_back(rq);
  if (rays.empty()) return norm2(base);
  // min ||base + R t||, t >= 0: enumerate active sets of the 2x2 KKT system.
  double best = norm2(base);
  const int k = static_cast<int>(rays.size());
  for (int mask = 1; mask < (1 << k); ++mask) {
    std::vector<int> act;
    for (int j = 0; j < k; ++j)
      if (mask >> j & 1) act.push_back(j);
    const int ka = static_cast<int>(act.size());
    std::vector<Vec> M(ka, Vec(ka));
    Vec rhs(ka);
    for (int a = 0; a < ka; ++a) {
      rhs[a] = -dot(rays[act[a]], base);
      for (int b = 0; b < ka; ++b) M[a][b] = dot(rays[act[a]], rays[act[b]]);
      M[a][a] += 1e-14;
    }
    auto t = lin_solve(M, rhs);
    if (!t) continue;
    bool ok = true;
    for (double tv : *t)
      if (tv < 0) ok = false;
    if (!ok) continue;
    Vec r = base;
    for (int a = 0; a < ka; ++a) axpy((*t)[a], rays[act[a]], r);
    best = std::min(best, norm2(r));
  }
  return best;
}

}  // namespace horizon
