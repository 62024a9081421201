#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "horizon/errors.hpp"
#include "horizon/vec.hpp"

namespace horizon {

// Radial sampling schedule shared by all outer-limit estimators.
struct SamplingPlan {
  double r0 = 4.0;          // initial radius
  double rho = 2.0;         // growth factor
  int levels = 10;          // K
  int dirs_per_level = 64;
  double cluster_tol = 0.02;     // delta: angular/cluster tolerance
  double divergence_tau = 8.0;   // tau: divergence threshold vs level median
  int window = 3;                // m: stability window
  unsigned seed = 0;
  double trunc_radius = 2.0;     // T used for set comparisons
  int adaptive_seeds = 6;        // near-critical search seeds per level

  double radius(int level) const;
  void validate() const;
  SamplingPlan refined() const;  // one refinement step: more levels + dirs
};

struct IndexSet {
  std::vector<int> indices;  // 0-based, sorted, unique

  static IndexSet full(int dim);
  static IndexSet of(std::vector<int> one_based, int dim);
};

enum class Verdict { kHolds, kFails, kInconclusive };

const char* verdict_name(Verdict v);

struct Certificate {
  Verdict verdict = Verdict::kInconclusive;
  double margin = 0.0;
  std::vector<Vec> witnesses;
  std::vector<std::string> trace;

  bool holds() const { return verdict == Verdict::kHolds; }
};

// Finite representation of an asymptotic limit set: bounded limit points plus
// unit ray directions.  Denotes a closed subset of R^dim:
//   base B   = points                (co(points) if convex; unit sphere if sphere)
//   cone C   = union of R+ * ray     (pos(rays) if convex); 0 in C when is_cone
//   set      = B u C                 (default)
//            = { p + t*r : p in B, r in rays, t >= 0 } u B   (affine_rays)
struct LimitSet {
  int dim = 0;
  std::vector<Vec> points;
  std::vector<Vec> rays;  // unit norm
  bool is_cone = false;
  bool affine_rays = false;
  bool convex = false;
  bool sphere = false;
  double trunc_radius = 2.0;

  static LimitSet zero_cone(int dim);
  static LimitSet empty_set(int dim);

  bool empty() const { return points.empty() && rays.empty() && !is_cone && !sphere; }
  // {0} as a cone: no rays and no point farther than tol from the origin.
  bool is_zero_cone(double tol = 1e-7) const;
  void normalize();  // dedupe at 1e-7, re-unit rays, lexicographic order
};

double dist_to(const LimitSet& L, const Vec& x);
std::vector<Vec> sample_within(const LimitSet& L, double T, double spacing);
double hausdorff_trunc(const LimitSet& A, const LimitSet& B, double T, double spacing = 0.025);
// Every sample of A inside B_T lies within tol of B.
bool subset_within(const LimitSet& A, const LimitSet& B, double T, double tol,
                   Vec* witness = nullptr);

LimitSet scale_limit_set(const LimitSet& L, double lambda);
LimitSet negate_limit_set(const LimitSet& L);
LimitSet union_limit_sets(const LimitSet& A, const LimitSet& B);
LimitSet minkowski_sum(const LimitSet& A, const LimitSet& B);
LimitSet convex_hull_of(const LimitSet& L);

// dist(x, A + B) honoring each operand's union/hull semantics.
double dist_to_sum(const LimitSet& A, const LimitSet& B, const Vec& x);

nlohmann::json to_json(const LimitSet& L);
LimitSet limit_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Certificate& c);

// --- deterministic sampling helpers ----------------------------------------

// Unit directions in R^dim: the 2*dim axis directions first, then a
// low-discrepancy spiral (seed only perturbs the spiral offset).
std::vector<Vec> sphere_directions(int dim, int count, unsigned seed, int level);

// Recurrence bookkeeping across radius levels: a representative is accepted
// when it reappears (within tol) at every one of the last `window` levels.
class RecurrenceTracker {
 public:
  RecurrenceTracker(double tol, bool scale_aware) : tol_(tol), scale_aware_(scale_aware) {}

  void add(int level, const Vec& v);
  // Representatives present in all of levels [last-window+1, last].
  std::vector<Vec> accepted(int last_level, int window) const;
  bool empty() const { return levels_.empty(); }

 private:
  double tol_at(const Vec& v) const;
  struct Cluster {
    Vec rep;
    int count = 0;
  };
  double tol_;
  bool scale_aware_;
  std::vector<std::vector<Cluster>> levels_;  // indexed by level
};

}  // namespace horizon
