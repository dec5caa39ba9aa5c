#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "glassland/dyson.hpp"
#include "glassland/presets.hpp"

using namespace glassland;

namespace {

const cplx I(0.0, 1.0);

// r = 1, lambda = 1, xi'' = 1: the plain semicircle case.
MixtureStats unit_semicircle() {
  return stats_from_derivatives(Vec::Ones(1), 1.0, Vec::Constant(1, 2.0), Mat::Constant(1, 1, 1.0));
}

Vec vec(std::initializer_list<double> v) {
  Vec out(v.size());
  int i = 0;
  for (double e : v) out[i++] = e;
  return out;
}

}  // namespace

TEST(SolveDyson, ScalarExamples) {
  MixtureStats st = unit_semicircle();
  DysonSolution a = solve_dyson(st, Vec::Zero(1), cplx(0.0, 1e-9));
  EXPECT_LT(std::abs(a.m[0] - I), 1e-8);
  DysonSolution b = solve_dyson(st, Vec::Zero(1), cplx(1.0, 1e-9));
  EXPECT_LT(std::abs(b.m[0] - cplx(-0.5, std::sqrt(3.0) / 2)), 1e-8);
  EXPECT_LE(b.residual, 1e-12);
}

TEST(SolveDyson, UpperHalfPlaneAndResidual) {
  MixtureStats st = stats(presets::skewed_pair());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-4, 4);
  for (int i = 0; i < 30; ++i) {
    Vec x = vec({U(rng), U(rng)});
    cplx z(U(rng), std::pow(10.0, -U(rng) / 2 - 2));
    DysonSolution s = solve_dyson(st, x, z);
    EXPECT_LE(s.residual, 1e-12);
    EXPECT_GT(s.m.imag().minCoeff(), 0.0);
  }
}

TEST(SolveDyson, RealAxisNeedsWarmStart) {
  EXPECT_THROW(solve_dyson(unit_semicircle(), Vec::Zero(1), cplx(0.0, 0.0)), Error);
}

TEST(BoundaryU, Examples) {
  MixtureStats lq = stats(presets::linear_quadratic());
  BoundaryValue b = boundary_u_full(lq, Vec::Constant(1, 4.0 / std::sqrt(3.0)));
  EXPECT_TRUE(b.exact);
  EXPECT_NEAR(b.m[0].real(), -1.0 / std::sqrt(3.0), 1e-10);
  EXPECT_EQ(b.m[0].imag(), 0.0);

  MixtureStats p3 = stats(presets::pure(3));
  CVec u0 = boundary_u(p3, Vec::Zero(1));
  EXPECT_NEAR(u0[0].real(), 0.0, 1e-10);
  EXPECT_NEAR(u0[0].imag(), 1.0 / std::sqrt(6.0), 1e-10);

  CVec ue = boundary_u(p3, Vec::Constant(1, 2 * std::sqrt(6.0)));
  EXPECT_NEAR(ue[0].real(), -1.0 / std::sqrt(6.0), 1e-3);
  EXPECT_LT(ue[0].imag(), 1e-3);
}

TEST(BoundaryU, IdealPointsSolveTheEquation) {
  for (const MixtureSpec& spec : {presets::cubic_pair(), presets::skewed_pair(), presets::symmetric_pair()}) {
    MixtureStats st = stats(spec);
    for (const auto& p : all_predictions(st)) {
      CVec u = boundary_u(st, p.v);
      EXPECT_LT((u.real() - p.u).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LT(u.imag().cwiseAbs().maxCoeff(), 1e-12);
      // M(u(Delta)) = diag(xi') - xi''.
      StabilityMatrices sm = stability_matrices(st, u);
      Mat expect = Mat(st.xi_prime.asDiagonal()) - st.xi_dprime;
      EXPECT_LT((sm.M.real() - expect).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(BoundaryU, HoelderRatioBounded) {
  MixtureStats st = stats(presets::symmetric_pair());
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-5, 5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vec v = vec({U(rng), U(rng)});
    Vec w = v + 0.05 * vec({U(rng), U(rng)});
    double num = (boundary_u(st, v) - boundary_u(st, w)).cwiseAbs().maxCoeff();
    double den = std::cbrt((v - w).norm());
    worst = std::max(worst, num / den);
  }
  EXPECT_LT(worst, 10.0);
}

TEST(BoundaryU, JacobianIsInverseM) {
  MixtureStats st = stats(presets::cubic_pair());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-5, 5);
  int checked = 0;
  for (int i = 0; i < 200 && checked < 20; ++i) {
    Vec v = vec({U(rng), U(rng)});
    CVec u = boundary_u(st, v);
    StabilityMatrices sm = stability_matrices(st, u);
    Eigen::ComplexEigenSolver<CMat> es(sm.M);
    if (es.eigenvalues().cwiseAbs().minCoeff() <= 1e-3) continue;
    CMat Minv = sm.M.inverse();
    const double h = 1e-6;
    for (int t = 0; t < 2; ++t) {
      Vec vp = v, vm = v;
      vp[t] += h;
      vm[t] -= h;
      CVec d = (boundary_u(st, vp) - boundary_u(st, vm)) / (2 * h);
      for (int s = 0; s < 2; ++s)
        EXPECT_LT(std::abs(d[s] - Minv(s, t)), 1e-4 * (1 + std::abs(Minv(s, t))));
    }
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(SpectralMeasure, Semicircle) {
  MixtureStats st = unit_semicircle();
  SpectralMeasure mu = spectral_measure(st, Vec::Zero(1));
  ASSERT_EQ(mu.support.size(), 1u);
  EXPECT_NEAR(mu.support[0].first, -2.0, 1e-3);
  EXPECT_NEAR(mu.support[0].second, 2.0, 1e-3);
  double err = 0.0;
  for (int j = 0; j < mu.grid.size(); ++j) {
    double g = mu.grid[j];
    if (std::abs(g) > 1.9) continue;
    err = std::max(err, std::abs(mu.density[j] - std::sqrt(4 - g * g) / (2 * M_PI)));
  }
  EXPECT_LT(err, 1e-3);
  EXPECT_NEAR(mu.mass_s[0], 1.0, 1e-4);
}

TEST(SpectralMeasure, ShiftedSemicircleAvoidsZero) {
  MixtureStats st = stats(presets::linear_quadratic());
  SpectralMeasure mu = spectral_measure(st, Vec::Constant(1, 4.0 / std::sqrt(3.0)));
  ASSERT_EQ(mu.support.size(), 1u);
  EXPECT_NEAR(mu.support[0].first, -4.0 / std::sqrt(3.0) - 2, 1e-3);
  EXPECT_NEAR(mu.support[0].second, -4.0 / std::sqrt(3.0) + 2, 1e-3);
  EXPECT_LT(mu.support[0].second, 0.0);
}

TEST(SpectralMeasure, PureThreeSpinAtVStarTouchesZero) {
  MixtureStats st = stats(presets::pure(3));
  SpectralMeasure mu = spectral_measure(st, Vec::Constant(1, 2 * std::sqrt(6.0)));
  EXPECT_NEAR(mu.support.back().second, 0.0, 1e-3);
}

TEST(SpectralMeasure, SpeciesSupportsAgree) {
  MixtureStats st = stats(presets::skewed_pair());
  SpectralMeasure mu = spectral_measure(st, vec({0.7, -1.3}));
  const double h = mu.grid[1] - mu.grid[0];
  for (int j = 0; j < mu.grid.size(); ++j) {
    bool a = mu.density_s[0][j] > 1e-3, b = mu.density_s[1][j] > 1e-3;
    if (a != b) {
      // Only allowed right at an edge.
      bool near_edge = false;
      for (auto [lo, hi] : mu.support)
        near_edge |= std::abs(mu.grid[j] - lo) < 2 * h || std::abs(mu.grid[j] - hi) < 2 * h;
      EXPECT_TRUE(near_edge) << mu.grid[j];
    }
  }
  for (int s = 0; s < 2; ++s) EXPECT_NEAR(mu.mass_s[s], 1.0, 1e-4);
}

TEST(SpectralMeasure, StieltjesConsistency) {
  MixtureStats st = stats(presets::cubic_pair());
  Vec x = vec({0.4, -0.9});
  DysonSystem sys = asymptotic_system(st, x);
  SpectralMeasure mu = spectral_measure(sys);
  for (cplx z : {cplx(0.3, 0.5), cplx(-1.0, 1.0), cplx(2.0, 0.7)}) {
    DysonSolution sol = solve_dyson(sys, z);
    for (int s = 0; s < 2; ++s) {
      double re = integrate_measure(sys, mu, [&](double g) { return (1.0 / (g - z)).real(); }, {}, s);
      double im = integrate_measure(sys, mu, [&](double g) { return (1.0 / (g - z)).imag(); }, {}, s);
      EXPECT_LT(std::abs(cplx(re, im) - sol.m[s]), 1e-3);
    }
  }
}

TEST(Psi, ClosedFormExamples) {
  EXPECT_NEAR(psi(stats(presets::linear_quadratic()), Vec::Constant(1, 4.0 / std::sqrt(3.0))),
              1.0 / 6.0 + 0.5 * std::log(3.0), 1e-10);
  EXPECT_NEAR(psi(stats(presets::pure(3)), Vec::Zero(1)), -0.5 + 0.5 * std::log(6.0), 1e-10);
  EXPECT_NEAR(psi(unit_semicircle(), Vec::Zero(1)), -0.5, 1e-10);
  EXPECT_NEAR(psi(unit_semicircle(), Vec::Zero(1), PsiMode::Quadrature), -0.5, 1e-4);
}

TEST(Psi, ModesAgree) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-4, 4);
  for (const MixtureSpec& spec : {presets::skewed_pair(), presets::half_quadratic_half_cubic()}) {
    MixtureStats st = stats(spec);
    for (int i = 0; i < 5; ++i) {
      Vec x(st.r);
      for (int s = 0; s < st.r; ++s) x[s] = U(rng);
      EXPECT_NEAR(psi(st, x), psi(st, x, PsiMode::Quadrature), 1e-4);
    }
  }
}

TEST(Psi, DegenerateU) {
  MixtureStats st = unit_semicircle();
  CVec u = CVec::Constant(1, cplx(1e-9, 0.0));
  EXPECT_THROW(psi_from_u(st, u), Error);
}

TEST(Stability, Examples) {
  StabilityMatrices a =
      stability_matrices(stats(presets::linear_quadratic()), CVec::Constant(1, -1.0 / std::sqrt(3.0)));
  EXPECT_NEAR(a.M(0, 0).real(), 2.0, 1e-12);
  EXPECT_NEAR(a.Mbar(0, 0), 2.0, 1e-12);
  StabilityMatrices b = stability_matrices(stats(presets::pure(3)), CVec::Constant(1, I / std::sqrt(6.0)));
  EXPECT_NEAR(b.M(0, 0).real(), -12.0, 1e-12);
  EXPECT_NEAR(b.Mbar(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(b.Mhat(0, 0), 12.0, 1e-12);
  EXPECT_THROW(stability_matrices(unit_semicircle(), CVec::Zero(1)), Error);
}

TEST(Stability, MhatPositiveWhenMbarIs) {
  MixtureStats st = stats(presets::skewed_pair());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-5, 5);
  for (int i = 0; i < 50; ++i) {
    CVec u = boundary_u(st, vec({U(rng), U(rng)}));
    StabilityMatrices sm = stability_matrices(st, u);
    Eigen::SelfAdjointEigenSolver<Mat> eb(sm.Mbar), eh(sm.Mhat);
    if (eb.eigenvalues().minCoeff() >= -1e-9) EXPECT_GT(eh.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Feasibility, Cases) {
  EXPECT_EQ(feasibility(stats(presets::linear_quadratic()), CVec::Constant(1, -1.0 / std::sqrt(3.0))).fcase,
            FeasibilityCase::BoundaryReal);
  EXPECT_EQ(feasibility(stats(presets::pure(3)), CVec::Constant(1, I / std::sqrt(6.0))).fcase,
            FeasibilityCase::BoundaryImag);
  FeasibilityReport rep = feasibility(unit_semicircle(), CVec::Constant(1, 0.5 * I));
  EXPECT_EQ(rep.fcase, FeasibilityCase::Interior);
  EXPECT_NEAR(rep.min_eig_Mbar, 3.0, 1e-12);
  EXPECT_NEAR(rep.Mbar_times_Im_u[0], 1.5, 1e-12);
  EXPECT_EQ(feasibility(unit_semicircle(), CVec::Constant(1, 2.0 * I)).fcase, FeasibilityCase::Infeasible);
}

TEST(Feasibility, BoundaryValuesAreBoundaryCases) {
  MixtureStats st = stats(presets::cubic_pair());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-5, 5);
  for (int i = 0; i < 40; ++i) {
    BoundaryValue b = boundary_u_full(st, vec({U(rng), U(rng)}));
    if (!b.exact) continue;
    FeasibilityCase c = feasibility(st, b.m, 1e-7).fcase;
    EXPECT_TRUE(c == FeasibilityCase::BoundaryReal || c == FeasibilityCase::BoundaryImag);
  }
}

TEST(EdgeCusp, ScalarEdges) {
  MixtureStats st = unit_semicircle();
  Vec chi = Vec::Ones(1);
  EXPECT_EQ(classify_boundary_point(st, Vec::Constant(1, 2.0), chi), BoundaryKind::RightEdge);
  EXPECT_EQ(classify_boundary_point(st, Vec::Constant(1, -2.0), chi), BoundaryKind::LeftEdge);
  EXPECT_EQ(classify_boundary_point(st, Vec::Constant(1, 3.0), chi), BoundaryKind::Nonsingular);
  EXPECT_EQ(classify_boundary_point(st, Vec::Constant(1, -3.0), chi), BoundaryKind::Nonsingular);
  EXPECT_EQ(classify_boundary_point(st, Vec::Constant(1, 0.5), chi), BoundaryKind::Nonsingular);
}

TEST(EdgeCusp, RejectsBadChi) {
  EXPECT_THROW(classify_boundary_point(unit_semicircle(), Vec::Constant(1, 2.0), Vec::Constant(1, 0.5)), Error);
}

TEST(SampleBlockMatrix, DiagonalShiftAndDeterminism) {
  MixtureStats st = stats(presets::cubic_pair());
  Vec x = vec({1.0, -2.0});
  Mat a = sample_block_matrix(st, x, 200, 4), b = sample_block_matrix(st, x, 200, 4);
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.rows(), 198);
  EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  // Block means: the deterministic part is exactly -x_s / sqrt(lambda_s).
  double m0 = a.diagonal().head(99).mean(), m1 = a.diagonal().tail(99).mean();
  EXPECT_NEAR(m0, -x[0] / std::sqrt(0.5), 0.05);
  EXPECT_NEAR(m1, -x[1] / std::sqrt(0.5), 0.05);
  Mat z = sample_block_matrix(st, Vec::Zero(2), 200, 4);
  EXPECT_NEAR((a - z).diagonal()[0], -x[0] / std::sqrt(0.5), 1e-14);
  EXPECT_NEAR((a - z).diagonal()[150], -x[1] / std::sqrt(0.5), 1e-14);
}

TEST(EdgeCusp, SymmetricPairAntidiagonalCusp) {
  MixtureStats st = stats(presets::symmetric_pair());
  auto real_at = [&](double t) { return is_real(boundary_u(st, vec({t, -t}) * std::sqrt(0.5))); };
  double lo = 0.5, hi = 3.0;
  ASSERT_FALSE(real_at(lo));
  ASSERT_TRUE(real_at(hi));
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    (real_at(mid) ? hi : lo) = mid;
  }
  // Real branch u = (-w, w) becomes infeasible once w^2 > 1/3, i.e. below t = 4/sqrt(6).
  EXPECT_NEAR(hi, 4.0 / std::sqrt(6.0), 1e-6);
  EdgeProbeOptions opt;
  opt.second_chi = vec({0.25, 0.75});
  EXPECT_EQ(classify_boundary_point(st, vec({hi, -hi}), vec({0.5, 0.5}), opt), BoundaryKind::Cusp);
}
