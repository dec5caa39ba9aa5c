#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "glassland/mixture.hpp"

namespace glassland {

// Block-structured self-consistent equation
//   m_s = -1 / (z + shift_s + sum_t S_st c_t m_t),
// with S symmetric and c the block proportions (also the aggregation
// weights of the spectral measure).
struct DysonSystem {
  Vec shift;
  Mat S;
  Vec c;

  int r() const { return static_cast<int>(shift.size()); }
  Mat coupling() const { return S * c.asDiagonal(); }
  // diag(1/m^2) - C^{1/2} S C^{1/2}; congruent to diag(lambda/u^2) - xi''.
  Mat stability_real(const Vec& m) const;
  Mat stability_abs(const CVec& m) const;
};

// Asymptotic system at radial derivative x: shift x_s/sqrt(lambda_s),
// S = xi''/(lambda lambda^T), c = lambda.
DysonSystem asymptotic_system(const MixtureStats& st, const Vec& x);

// Finite-N system for a block matrix with blocks of size N_s - 1 and entry
// variances xi''_st / (N lambda_s lambda_t); c = (N_s - 1)/(N - r).
DysonSystem finite_system(const MixtureStats& st, const Vec& x, const std::vector<int>& sizes);

struct DysonSolution {
  cplx z;
  Vec x;
  CVec m;
  double residual = 0.0;
  int iterations = 0;
};

struct DysonOptions {
  double eta_floor = 1e-9;
  int max_iters = 100000;
  double tol = 1e-12;
};

DysonSolution solve_dyson(const DysonSystem& sys, cplx z, const CVec* warm = nullptr,
                          const DysonOptions& opt = {});
DysonSolution solve_dyson(const MixtureStats& st, const Vec& x, cplx z,
                          const CVec* warm = nullptr, const DysonOptions& opt = {});

double dyson_residual(const DysonSystem& sys, cplx z, const CVec& m);

struct BoundaryValue {
  CVec m;
  // True when an eta = 0 solution was certified by the feasibility
  // conditions; false at edges and cusps, where the smallest-eta
  // continuation value is returned.
  bool exact = false;
  double last_step = 0.0;  // |m(eta_K) - m(eta_{K-1})|
};

// Boundary value lim_{eta -> 0} m(gamma + i eta) by eta continuation.
BoundaryValue boundary_m(const DysonSystem& sys, double gamma);

// u(v) = lim m(i eta; Lambda^{-1/2} v) for the asymptotic system.
BoundaryValue boundary_u_full(const MixtureStats& st, const Vec& v);
CVec boundary_u(const MixtureStats& st, const Vec& v);

constexpr double kRealnessThreshold = 1e-5;
bool is_real(const CVec& u, double thr = kRealnessThreshold);

struct GridSpec {
  int points = 2001;
  double lo = 0.0;
  double hi = 0.0;  // lo == hi selects the automatic range
};

using Interval = std::pair<double, double>;

struct SpectralMeasure {
  Vec grid;
  std::vector<Vec> density_s;
  Vec density;
  std::vector<Interval> support;
  Vec mass_s;
  Vec weights;
  double support_threshold = 1e-4;
  // Interior local minima of the density (cusps, near-gaps); quadrature splits here.
  std::vector<double> kinks;
};

SpectralMeasure spectral_measure(const DysonSystem& sys, const GridSpec& grid = {});
SpectralMeasure spectral_measure(const MixtureStats& st, const Vec& x, const GridSpec& grid = {});

// Automatic grid half-width: max |shift| + 2 sqrt(max row sum of coupling) + 1.
double spectral_bound(const DysonSystem& sys);

// Integral of f against the aggregate measure, using edge-clustered
// quadrature on each support interval (split at any requested breakpoints).
double integrate_measure(const DysonSystem& sys, const SpectralMeasure& mu,
                         const std::function<double(double)>& f,
                         const std::vector<double>& breakpoints = {}, int species = -1);

enum class PsiMode { ClosedForm, Quadrature };
double psi(const MixtureStats& st, const Vec& x, PsiMode mode = PsiMode::ClosedForm);
double psi_from_u(const MixtureStats& st, const CVec& u);

struct StabilityMatrices {
  CMat M;
  Mat Mbar;
  Mat Mhat;
};

StabilityMatrices stability_matrices(const MixtureStats& st, const CVec& u);

enum class FeasibilityCase { Interior, BoundaryReal, BoundaryImag, Infeasible };
const char* feasibility_name(FeasibilityCase c);

struct FeasibilityReport {
  FeasibilityCase fcase = FeasibilityCase::Infeasible;
  double min_eig_Mbar = 0.0;
  Vec Mbar_times_Im_u;
  double min_eig_M_real = 0.0;
};

FeasibilityReport feasibility(const MixtureStats& st, const CVec& u, double tol = 1e-8);

enum class BoundaryKind { LeftEdge, RightEdge, Cusp, Nonsingular };
const char* boundary_kind_name(BoundaryKind k);

struct EdgeProbeOptions {
  double tol = 1e-6;
  double gamma0 = 1e-2;
  std::optional<Vec> second_chi;
};

// Real boundary value u(v) polished by Newton on the real equations, or
// nullopt when u(v) is not real.
std::optional<Vec> real_boundary_u(const MixtureStats& st, const Vec& v);

BoundaryKind classify_boundary_point(const MixtureStats& st, const Vec& x, const Vec& chi,
                                     const EdgeProbeOptions& opt = {});

// Symmetric (N - r) x (N - r) block matrix with the tangential Hessian law,
// minus the species-wise shift x_s / sqrt(lambda_s).
Mat sample_block_matrix(const MixtureStats& st, const Vec& x, int N, std::uint64_t seed);

}  // namespace glassland
