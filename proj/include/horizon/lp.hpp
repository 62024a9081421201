#pragma once

#include <optional>
#include <vector>

#include "horizon/vec.hpp"

namespace horizon {

// Small dense numerical kernels shared by the geometry and calculus modules.
// Everything here is deterministic and sized for problems with a handful of
// variables and generators; no sparse or large-scale paths.

// Solve A x = b by Gaussian elimination with partial pivoting.
// Returns nullopt on (near-)singular systems.
std::optional<Vec> lin_solve(std::vector<Vec> A, Vec b);

// min ||sum_j lambda_j g_j - y||  s.t. lambda >= 0   (Lawson-Hanson NNLS).
// Returns the optimal lambda; the residual norm is available via eval.
Vec nnls(const std::vector<Vec>& gens, const Vec& y, int max_iter = 200);

// Euclidean projection of y onto the probability simplex {a >= 0, sum a = 1}.
Vec project_simplex(Vec y);

// dist(x, co{points}) together with the optimal convex coefficients.
// Accurate to ~1e-9 on the small instances this library produces.
double dist_to_convex_hull(const std::vector<Vec>& points, const Vec& x,
                           Vec* coeffs_out = nullptr);

// dist(x, pos{rays}) (conic hull through the origin).
double dist_to_conic_hull(const std::vector<Vec>& rays, const Vec& x);

// dist(x, co{points} + pos{rays}); either generator list may be empty
// (empty points means the base is the origin).
double dist_to_hull_sum(const std::vector<Vec>& points, const std::vector<Vec>& rays,
                        const Vec& x);

// maximize c.u  s.t.  W u <= v, u >= 0, assuming v >= 0 (slack basis feasible).
// Returns the optimal value, or nullopt if the LP is unbounded.
std::optional<double> simplex_max(const Vec& c, const std::vector<Vec>& W, const Vec& v);

// Does {d != 0 : A d <= 0} have a solution?  Exact linear-feasibility test via
// orthant enumeration + simplex; `n` is the ambient dimension of d.
bool recession_cone_nontrivial(const std::vector<Vec>& A, int n);

// min ||p + t*r_p + q + s*r_q|| over t,s >= 0 where either ray may be absent
// (pass empty Vec).  Exact via active-set enumeration of the 2x2 KKT system.
double least_norm_two_rays(const Vec& p, const Vec& rp, const Vec& q, const Vec& rq);

}  // namespace horizon
