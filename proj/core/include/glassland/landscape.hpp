#pragma once

#include <optional>
#include <vector>

#include "glassland/dyson.hpp"
#include "glassland/hamiltonian.hpp"

namespace glassland {

struct CriticalPointResult {
  Vec sigma;
  double grad_norm = 0.0;  // |grad_sp H| / sqrt N
  double energy = 0.0;     // H / N
  Vec radial;
  Vec g1_overlap;
  Vec spectrum;  // ascending eigenvalues of the Riemannian Hessian
  int index = 0;  // positive eigenvalues
  double min_abs_eig = 0.0;
  bool ill_conditioned = false;  // some |eigenvalue| < 1e-8
  bool pinv_used = false;
  int iterations = 0;
  std::optional<Signs> delta;
};

struct NewtonOptions {
  int max_iters = 50;
  double tol = 1e-10;
  double t = 1.0;  // homotopy parameter passed to local_data
};

CriticalPointResult newton_refine(const HamiltonianInstance& h, const Vec& sigma0,
                                  const NewtonOptions& opt = {});

// Fills energy, radial, overlap and spectrum for a point (no iteration).
CriticalPointResult describe_point(const HamiltonianInstance& h, const Vec& sigma, double t = 1.0);

// sigma_s = Delta_s sqrt(N_s) v_s / |v_s|, optionally scaled by sqrt(q_s).
Vec scale_by_species(const Partition& part, const Vec& v, const Signs& delta, const Vec& q);

CriticalPointResult follow_critical_point(const HamiltonianInstance& h, const Signs& delta, int steps = 40);
// One followed point per sign pattern, in all_sign_patterns order.
std::vector<CriticalPointResult> follow_all(const HamiltonianInstance& h, int steps = 40);

struct ComparisonReport {
  double w2 = 0.0;
  double hausdorff = 0.0;
  double gap_at_zero = 0.0;
};

// W2 through a 10^4-node quantile coupling and Hausdorff distance between
// the eigenvalue set and the support intervals.
ComparisonReport spectrum_compare(const Vec& spectrum, const SpectralMeasure& mu);
// Empirical spectrum against itself as a point mass collection.
ComparisonReport spectrum_compare(const Vec& spectrum, const Vec& reference);

// Finite-N spectral prediction at radial derivative x, with lambda° weights.
SpectralMeasure finite_measure(const HamiltonianInstance& h, const Vec& x);

struct Classification {
  std::optional<Signs> delta;
  double radial_error = 0.0;  // to the nearest prediction, infinity norm
  bool energy_typical = false;
  bool overlap_typical = false;
  bool bulk_typical = false;
  ComparisonReport bulk;
};

// predicted energy and 1-spin overlap given the radial derivative
double conditional_energy(const MixtureStats& st, const Vec& x);
Vec conditional_overlap(const MixtureStats& st, const Vec& x);

Classification classify_point(const HamiltonianInstance& h, const std::vector<CriticalPrediction>& predictions,
                              const CriticalPointResult& p, double eps = 0.15, bool check_bulk = true);

struct BandState {
  int k = 0;
  Vec R_k;
  Vec m;
  Mat U;  // N x dim, species-aligned orthonormal columns
  Vec g;
};

std::vector<BandState> recursive_bands(const HamiltonianInstance& h, const Signs& delta, int k_max);

// Distance from sigma to S_N intersected with m + U^perp.
double band_distance(const HamiltonianInstance& h, const BandState& b, const Vec& sigma);

struct SurveyReport {
  int starts = 0;
  int eps_critical = 0;
  int unclassified = 0;
  std::vector<int> counts;  // per sign pattern, all_sign_patterns order
  int distinct_exact = 0;
  double max_distance_to_followed = 0.0;  // in units of sqrt N
  // Newton-converged points only, to the nearest followed point
  double max_exact_distance_to_followed = 0.0;
};

// Gauss-Newton minimization of |grad_sp H| from n_starts points. The first
// 2 |followed| starts jitter the followed points, the rest are uniform.
SurveyReport survey_approx_crits(const HamiltonianInstance& h, const std::vector<CriticalPrediction>& predictions,
                                 int n_starts, double eps, std::uint64_t seed,
                                 const std::vector<CriticalPointResult>& followed = {},
                                 double classify_eps = 0.15);

}  // namespace glassland
