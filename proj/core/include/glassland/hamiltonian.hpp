#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "glassland/mixture.hpp"

namespace glassland {

struct Partition {
  int N = 0;
  std::vector<int> sizes;
  std::vector<int> offsets;
  std::vector<int> species_of;

  Partition() = default;
  Partition(std::vector<int> sizes);
  int r() const { return static_cast<int>(sizes.size()); }
  // Finite-N proportions N_s / N.
  Vec lambda_N() const;
  // (N_s - 1) / (N - r), the weights used for finite-N spectral predictions.
  Vec lambda_circ() const;
};

class HamiltonianInstance {
 public:
  static constexpr int kMaxDegree = 3;
  static constexpr int kMaxCubicN = 400;

  const MixtureSpec& mixture() const { return mixture_; }
  int N() const { return part_.N; }
  const Partition& partition() const { return part_; }
  std::uint64_t seed() const { return seed_; }
  bool has_degree(int k) const { return !raw_[k - 1].empty(); }
  // Raw i.i.d. standard normal tensor, row-major with shape N^k; empty when
  // the mixture has no positive coefficient of that degree.
  const std::vector<double>& raw(int k) const { return raw_[k - 1]; }
  // G^(1) as an N-vector (zero if absent).
  Vec g1() const;

  // Value, Euclidean gradient and (optionally) Euclidean Hessian. Degrees
  // 2 and 3 are multiplied by t.
  double evaluate(const Vec& sigma, Vec* grad, Mat* hess = nullptr, double t = 1.0) const;

 private:
  friend HamiltonianInstance sample(const MixtureSpec&, int, std::uint64_t);
  friend HamiltonianInstance load_instance(const std::string&);
  void build();

  MixtureSpec mixture_;
  Partition part_;
  std::uint64_t seed_ = 0;
  std::vector<double> raw_[3];

  Vec c1_;
  Mat c2_;  // symmetric, degree-2 part is sigma' c2 sigma
  std::vector<double> c3_;  // monomial coefficients for i <= j <= k
  std::vector<std::size_t> row3_;  // offset of row (i, j) at i * N + j
};

// Entries [0, len) of row `row` of the degree-k tensor drawn with `seed`.
// Rows of G^(k) are indexed by the leading k-1 indices in row-major order.
void tensor_row(std::uint64_t seed, int k, std::uint64_t row, int len, double* out);

HamiltonianInstance sample(const MixtureSpec& mixture, int N, std::uint64_t seed);

void save_instance(const HamiltonianInstance& h, const std::string& path);
HamiltonianInstance load_instance(const std::string& path);

struct LocalData {
  double value = 0.0;
  Vec egrad;
  Vec rgrad;
  Vec radial;
  Vec curvature;
  Mat rhess;  // (N - r) x (N - r) in tangent_basis order; empty unless requested
};

void check_on_manifold(const Partition& part, const Vec& sigma, double rel_tol = 1e-8);

LocalData local_data(const HamiltonianInstance& h, const Vec& sigma, bool want_hessian,
                     double t = 1.0);

// Orthonormal basis of the tangent space, species blocks in order. Each block
// comes from the Householder reflector exchanging e_1 and sigma_s / |sigma_s|.
Mat tangent_basis(const Partition& part, const Vec& sigma);

// Renormalizes each species block to radius sqrt(N_s).
Vec retract(const Partition& part, const Vec& x);
Vec random_point(const Partition& part, std::mt19937_64& rng);
// sigma_{first index of s} = sqrt(N_s), zero elsewhere.
Vec north_pole(const Partition& part);

Vec overlap(const Vec& sigma, const Vec& rho, const Partition& part);

// H and the Euclidean gradient entries on the first two coordinates of each
// species at the north pole, computed from only the tensor rows they depend on.
struct NorthPoleFiber {
  std::vector<int> indices;  // first and second index of each species
  double value = 0.0;
  Vec grad;  // matches indices
  Vec g1;    // G^(1) on indices
};

NorthPoleFiber north_pole_fiber(const MixtureSpec& mixture, int N, std::uint64_t seed);

struct CovarianceCheck {
  std::string name;
  double analytic = 0.0;
  double empirical = 0.0;
  double z = 0.0;
};

struct CovarianceReport {
  int N = 0;
  int trials = 0;
  std::vector<CovarianceCheck> checks;
  double max_abs_z = 0.0;
  double energy_variance_ratio = 0.0;  // Var[H] / (N xi(1))
  bool pass = false;
};

CovarianceReport covariance_selftest(const MixtureSpec& mixture, int N, int trials,
                                     std::uint64_t seed);

}  // namespace glassland
