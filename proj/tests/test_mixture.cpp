#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glassland/mixture.hpp"
#include "glassland/presets.hpp"

using namespace glassland;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(v.size());
  int i = 0;
  for (double e : v) out[i++] = e;
  return out;
}

}  // namespace

TEST(EvalXi, LinearQuadraticAtOne) {
  XiEval e = eval_xi(presets::linear_quadratic(), Vec::Ones(1), 2);
  EXPECT_NEAR(e.value, 2.5, 1e-14);
  EXPECT_NEAR(e.grad[0], 3.0, 1e-14);
  EXPECT_NEAR(e.hess(0, 0), 1.0, 1e-14);
}

TEST(EvalXi, OriginKeepsDegreeOneAndTwoOnly) {
  MixtureSpec spec = presets::cubic_pair();
  XiEval e = eval_xi(spec, Vec::Zero(2), 2);
  EXPECT_EQ(e.value, 0.0);
  EXPECT_NEAR(e.grad[0], 0.5, 1e-15);
  EXPECT_NEAR(e.grad[1], 0.5, 1e-15);
  // xi = S/2 + S^2/4 + S^3/200, S = x1 + x2: hessian at 0 is 1/2 everywhere.
  EXPECT_NEAR(e.hess(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(e.hess(0, 0), 0.5, 1e-15);
}

TEST(EvalXi, CubicPairAtOne) {
  MixtureStats st = stats(presets::cubic_pair());
  EXPECT_NEAR(st.xi_prime[0], 1.56, 1e-12);
  EXPECT_NEAR(st.xi_prime[1], 1.56, 1e-12);
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t) EXPECT_NEAR(st.xi_dprime(s, t), 0.56, 1e-12);
  EXPECT_NEAR(st.xi_species[0], 3.12, 1e-12);
  EXPECT_NEAR(st.A(0, 0), 2.12, 1e-12);
  EXPECT_NEAR(st.A(0, 1), 0.56, 1e-12);
}

TEST(EvalXi, FiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  for (const MixtureSpec& spec :
       {presets::cubic_pair(), presets::skewed_pair(), presets::half_quadratic_half_cubic()}) {
    const int r = spec.r();
    for (int trial = 0; trial < 20; ++trial) {
      Vec x(r);
      for (int s = 0; s < r; ++s) x[s] = U(rng);
      XiEval e = eval_xi(spec, x, 2);
      const double h = 1e-5;
      for (int s = 0; s < r; ++s) {
        Vec xp = x, xm = x;
        xp[s] += h;
        xm[s] -= h;
        XiEval ep = eval_xi(spec, xp, 1), em = eval_xi(spec, xm, 1);
        double g = (ep.value - em.value) / (2 * h);
        EXPECT_NEAR(g, e.grad[s], 1e-6 * (1 + std::abs(e.grad[s])));
        for (int t = 0; t < r; ++t) {
          double hst = (ep.grad[t] - em.grad[t]) / (2 * h);
          EXPECT_NEAR(hst, e.hess(s, t), 1e-6 * (1 + std::abs(e.hess(s, t))));
        }
      }
    }
  }
}

TEST(Stats, SpeciesIdentityAndPureThreeSpin) {
  MixtureStats st = stats(presets::pure(3));
  EXPECT_NEAR(st.xi_prime[0], 3.0, 1e-14);
  EXPECT_NEAR(st.xi_dprime(0, 0), 6.0, 1e-14);
  EXPECT_NEAR(st.A(0, 0), 9.0, 1e-14);
  MixtureStats sk = stats(presets::skewed_pair());
  for (int s = 0; s < 2; ++s) EXPECT_DOUBLE_EQ(sk.xi_species[s] * sk.lambda[s], sk.xi_prime[s]);
}

TEST(Presets, PairDerivativeData) {
  MixtureStats sym = stats(presets::symmetric_pair());
  EXPECT_NEAR(sym.xi_prime[0], 4.0, 1e-12);
  EXPECT_NEAR(sym.xi_dprime(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(sym.xi_dprime(0, 1), 0.5, 1e-12);
  MixtureStats sk = stats(presets::skewed_pair());
  EXPECT_NEAR(sk.xi_prime[0], 4.5, 1e-12);
  EXPECT_NEAR(sk.xi_prime[1], 4.5, 1e-12);
  EXPECT_NEAR(sk.xi_dprime(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(sk.xi_dprime(1, 1), 1.0, 1e-12);
  EXPECT_NEAR(sk.xi_dprime(0, 1), 2.4, 1e-12);
}

TEST(Solvability, Labels) {
  EXPECT_EQ(classify_solvability(stats(presets::linear_quadratic())).label, Solvability::StrictlySuper);
  SolvabilityReport sym = classify_solvability(stats(presets::symmetric_pair()));
  EXPECT_EQ(sym.label, Solvability::StrictlySuper);
  EXPECT_NEAR(sym.min_eig, 2.5, 1e-12);
  EXPECT_EQ(classify_solvability(stats(presets::pure(3))).label, Solvability::StrictlySub);
  EXPECT_NEAR(classify_solvability(stats(presets::pure(3))).min_eig, -3.0, 1e-12);
  EXPECT_EQ(classify_solvability(stats(presets::single_species({2, 1, 1}))).label,
            Solvability::StrictlySuper);
  EXPECT_EQ(classify_solvability(stats(presets::single_species({1, 1, 1}))).label,
            Solvability::StrictlySub);
  EXPECT_EQ(classify_solvability(stats(presets::pure(2))).label, Solvability::Solvable);
}

TEST(IdealStats, LinearQuadratic) {
  CriticalPrediction p = ideal_stats(stats(presets::linear_quadratic()), {1});
  EXPECT_NEAR(p.energy, std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(p.radial[0], 4.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(p.overlap[0], std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(p.u[0], -1.0 / std::sqrt(3.0), 1e-12);
}

TEST(IdealStats, CubicPair) {
  MixtureStats st = stats(presets::cubic_pair());
  CriticalPrediction pp = ideal_stats(st, {1, 1});
  EXPECT_NEAR(pp.energy, 2 * std::sqrt(0.78), 1e-12);
  EXPECT_NEAR(pp.radial[0], 2.145718, 1e-6);
  EXPECT_NEAR(pp.radial[1], 2.145718, 1e-6);
  CriticalPrediction pm = ideal_stats(st, {1, -1});
  EXPECT_NEAR(pm.energy, 0.0, 1e-14);
  EXPECT_NEAR(pm.radial[0], 1.249000, 1e-6);
  EXPECT_NEAR(pm.radial[1], -1.249000, 1e-6);
}

TEST(IdealStats, PatternIdentities) {
  for (const MixtureSpec& spec : {presets::cubic_pair(), presets::skewed_pair(), presets::symmetric_pair()}) {
    MixtureStats st = stats(spec);
    auto preds = all_predictions(st);
    double emax = preds.front().energy;
    for (const auto& p : preds) {
      EXPECT_LT((p.v + st.A * p.u).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((p.v - p.radial.cwiseProduct(st.lambda.cwiseSqrt())).cwiseAbs().maxCoeff(), 1e-12);
      Signs neg = p.delta;
      for (int& d : neg) d = -d;
      EXPECT_NEAR(ideal_stats(st, neg).energy, -p.energy, 1e-12);
      EXPECT_LE(p.energy, emax + 1e-12);
    }
  }
}

TEST(IdealStats, SpeciesPermutation) {
  MixtureStats a = stats(presets::skewed_pair());
  // Same mixture with the two species swapped.
  MixtureSpec swapped(vec({0.7, 0.3}), {{{0}, std::sqrt(11.0 / 7.0)},
                                        {{1}, std::sqrt(11.0 / 3.0)},
                                        {{0, 0}, std::sqrt(50.0 / 49.0)},
                                        {{1, 1}, std::sqrt(50.0 / 9.0)},
                                        {{0, 1}, std::sqrt(40.0 / 7.0)}});
  MixtureStats b = stats(swapped);
  CriticalPrediction pa = ideal_stats(a, {1, -1});
  CriticalPrediction pb = ideal_stats(b, {-1, 1});
  EXPECT_NEAR(pa.energy, pb.energy, 1e-12);
  EXPECT_NEAR(pa.radial[0], pb.radial[1], 1e-12);
  EXPECT_NEAR(pa.overlap[1], pb.overlap[0], 1e-12);
}

TEST(Recursion, LinearQuadraticClosedForm) {
  auto R = recursion_radii(presets::linear_quadratic(), 20);
  for (int k = 0; k <= 20; ++k) EXPECT_NEAR(R[k][0], 1.0 - std::pow(3.0, -k), 1e-12);
}

TEST(Recursion, NoFieldStaysAtZero) {
  auto R = recursion_radii(presets::pure(3), 10);
  for (const auto& r : R) EXPECT_EQ(r[0], 0.0);
}

TEST(Recursion, CubicPairMonotoneAndConvergent) {
  auto R = recursion_radii(presets::cubic_pair(), 200);
  for (int k = 1; k <= 50; ++k)
    for (int s = 0; s < 2; ++s) EXPECT_GT(R[k][s], R[k - 1][s]);
  for (int s = 0; s < 2; ++s) {
    EXPECT_LE(1.0 - R[50][s], 1e-3);
    EXPECT_LE(1.0 - R[200][s], 1e-6);
  }
}

TEST(BandMixture, EndpointDerivatives) {
  MixtureSpec spec = presets::cubic_pair();
  auto R = recursion_radii(spec, 6);
  MixtureStats st = stats(spec);
  for (int k = 1; k <= 5; ++k) {
    BandMixture b(spec, R, k);
    Vec om = Vec::Ones(2) - R[k];
    Vec g = om.cwiseProduct(om).cwiseProduct(st.xi_prime);
    Mat h = (om * om.transpose()).cwiseProduct(st.xi_dprime);
    EXPECT_LT((b.endpoint_grad() - g).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((b.endpoint_hess() - h).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(classify_solvability(b.endpoint_stats()).label, Solvability::StrictlySuper);
  }
  EXPECT_EQ(BandMixture(spec, R, 1).constant(), 0.0);
}

TEST(BandMixture, RejectsUnitRadius) {
  std::vector<Vec> R{Vec::Zero(1), Vec::Ones(1)};
  EXPECT_THROW(BandMixture(presets::linear_quadratic(), R, 1), Error);
}

TEST(VStar, Examples) {
  Vec v = v_star(stats(presets::pure(3)), Vec::Ones(1));
  EXPECT_NEAR(v[0], 2 * std::sqrt(6.0), 1e-12);
  MixtureStats lq = stats(presets::linear_quadratic());
  EXPECT_NEAR(v_star(lq, Vec::Ones(1))[0], 2.0 * std::sqrt(lq.xi_dprime(0, 0)), 1e-12);
  Vec vc = v_star(stats(presets::cubic_pair()), Vec::Ones(2));
  EXPECT_NEAR(vc[0], vc[1], 1e-14);
  EXPECT_THROW(v_star(stats(presets::pure(3)), vec({2.0})), Error);
}

TEST(Json, RoundTripAndValidation) {
  MixtureSpec spec = presets::skewed_pair();
  MixtureSpec back = mixture_from_json(mixture_to_json(spec));
  MixtureStats a = stats(spec), b = stats(back);
  EXPECT_LT((a.xi_prime - b.xi_prime).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.xi_dprime - b.xi_dprime).cwiseAbs().maxCoeff(), 1e-12);

  EXPECT_THROW(mixture_from_json(R"({"r":1,"lambda":[1.0],"gammas":[
      {"degree":1,"index":[1],"gamma":1.0},{"degree":1,"index":[1],"gamma":2.0}]})"),
               Error);
  EXPECT_THROW(mixture_from_json(R"({"r":2,"lambda":[0.6,0.6],"gammas":[]})"), Error);
  EXPECT_THROW(mixture_from_json(R"({"r":1,"lambda":[1.0],"gammas":[
      {"degree":7,"index":[1,1,1,1,1,1,1],"gamma":1.0}]})"),
               Error);
  MixtureSpec sq = mixture_from_json(R"({"r":1,"lambda":[1.0],"gammas":[
      {"degree":1,"index":[1],"gamma_sq":2.0},{"degree":2,"index":[1,1],"gamma_sq":0.5}]})");
  EXPECT_NEAR(stats(sq).xi_prime[0], 3.0, 1e-12);
}

TEST(Json, FixturesLoad) {
  for (const char* name : {"linear_quadratic", "symmetric_pair", "skewed_pair", "cubic_pair", "pure_three_spin"}) {
    MixtureSpec spec = load_mixture(std::string(GLASSLAND_DATA_DIR) + "/mixtures/" + name + ".json");
    EXPECT_GE(spec.r(), 1) << name;
  }
}

TEST(SpeciesSizes, LargestRemainder) {
  auto s = species_sizes(vec({0.3, 0.7}), 150);
  EXPECT_EQ(s[0], 45);
  EXPECT_EQ(s[1], 105);
  auto t = species_sizes(vec({1.0 / 3, 1.0 / 3, 1.0 / 3}), 100);
  EXPECT_EQ(t[0] + t[1] + t[2], 100);
}
