#pragma once

#include <string>
#include <vector>

#include "glassland/types.hpp"

namespace glassland {

// One stored representative of a symmetric coefficient tensor orbit.
// `index` holds 0-based species labels in nondecreasing order.
struct Coefficient {
  std::vector<int> index;
  double gamma = 0.0;
};

class MixtureSpec {
 public:
  static constexpr int kMaxDegree = 6;

  MixtureSpec() = default;
  MixtureSpec(Vec lambda, std::vector<Coefficient> coeffs);

  int r() const { return static_cast<int>(lambda_.size()); }
  const Vec& lambda() const { return lambda_; }
  const std::vector<Coefficient>& coeffs() const { return coeffs_; }
  int max_degree() const;

  // Coefficient for an arbitrary species tuple (order does not matter).
  double gamma(std::vector<int> index) const;
  Vec gamma1() const;
  bool has_degree(int k) const;

  // Every entry of the degree 1, 2 and 3 tensors strictly positive.
  bool nondegenerate() const;

  // Same mixture with every gamma multiplied by c (so xi scales by c^2).
  MixtureSpec scaled(double c) const;

  // Same coefficients on different species weights.
  MixtureSpec with_lambda(const Vec& lambda) const;

 private:
  Vec lambda_;
  std::vector<Coefficient> coeffs_;
};

// Block sizes N_s summing to N, proportional to lambda by largest remainder.
std::vector<int> species_sizes(const Vec& lambda, int N);

// Number of distinct orderings of a nondecreasing multi-index.
double orbit_size(const std::vector<int>& index);

MixtureSpec mixture_from_json(const std::string& text);
MixtureSpec load_mixture(const std::string& path);
std::string mixture_to_json(const MixtureSpec& spec);

struct XiEval {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

XiEval eval_xi(const MixtureSpec& spec, const Vec& x, int order = 2);

struct MixtureStats {
  int r = 0;
  Vec lambda;
  double xi_one = 0.0;
  Vec xi_prime;
  Mat xi_dprime;
  Vec xi_species;
  Mat A;
  Vec gamma1;  // degree-1 coefficients, zero when not known
};

MixtureStats stats(const MixtureSpec& spec);

// Builds stats directly from derivative data; gamma1 is inferred only when
// the caller supplies it.
MixtureStats stats_from_derivatives(const Vec& lambda, double xi_one, const Vec& xi_prime,
                                    const Mat& xi_dprime, const Vec& gamma1 = Vec());

enum class Solvability { StrictlySuper, Solvable, StrictlySub };

const char* solvability_name(Solvability s);

struct SolvabilityReport {
  Solvability label = Solvability::Solvable;
  double min_eig = 0.0;
  double tol = 1e-9;
};

SolvabilityReport classify_solvability(const MixtureStats& st, double tol = 1e-9);

struct CriticalPrediction {
  Signs delta;
  double energy = 0.0;
  Vec overlap;
  Vec radial;
  Vec v;
  Vec u;
};

CriticalPrediction ideal_stats(const MixtureStats& st, const Signs& delta);
std::vector<CriticalPrediction> all_predictions(const MixtureStats& st);

// R^0..R^{k_max} for R^{k+1} = grad xi(R^k) / grad xi(1).
std::vector<Vec> recursion_radii(const MixtureSpec& spec, int k_max);

// Shifted mixture seen from the k-th band center.
class BandMixture {
 public:
  BandMixture(const MixtureSpec& spec, const std::vector<Vec>& radii, int k);

  XiEval eval(const Vec& x, int order = 2) const;
  const Vec& endpoint_grad() const { return grad_one_; }
  const Mat& endpoint_hess() const { return hess_one_; }
  double constant() const { return constant_; }
  MixtureStats endpoint_stats() const;

 private:
  MixtureSpec spec_;
  Vec R_k_;
  Vec grad_prev_;
  double constant_ = 0.0;
  Vec grad_one_;
  Mat hess_one_;
};

BandMixture band_mixture(const MixtureSpec& spec, const std::vector<Vec>& radii, int k);

Vec v_star(const MixtureStats& st, const Vec& phi_prime);

}  // namespace glassland
