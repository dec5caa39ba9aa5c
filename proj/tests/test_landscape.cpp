#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glassland/landscape.hpp"
#include "glassland/presets.hpp"

using namespace glassland;

namespace {

struct CubicPairFixture : ::testing::Test {
  static void SetUpTestSuite() {
    inst = new HamiltonianInstance(sample(presets::cubic_pair(), 100, 2));
    followed = new std::vector<CriticalPointResult>(follow_all(*inst));
    preds = new std::vector<CriticalPrediction>(all_predictions(stats(presets::cubic_pair())));
  }
  static void TearDownTestSuite() {
    delete inst;
    delete followed;
    delete preds;
  }
  static HamiltonianInstance* inst;
  static std::vector<CriticalPointResult>* followed;
  static std::vector<CriticalPrediction>* preds;
};

HamiltonianInstance* CubicPairFixture::inst = nullptr;
std::vector<CriticalPointResult>* CubicPairFixture::followed = nullptr;
std::vector<CriticalPrediction>* CubicPairFixture::preds = nullptr;

// Classification tolerance at N = 100.
constexpr double kEps = 0.25;

const CriticalPointResult& by_signs(const std::vector<CriticalPointResult>& pts, const Signs& d) {
  for (const auto& p : pts)
    if (p.delta && *p.delta == d) return p;
  throw std::runtime_error("pattern missing");
}

}  // namespace

TEST(ScaleBySpecies, RadiiAndSigns) {
  Partition part({3, 5});
  Vec v = Vec::LinSpaced(8, 1.0, 8.0);
  Vec q(2);
  q << 0.25, 1.0;
  Vec s = scale_by_species(part, v, Signs{-1, 1}, q);
  EXPECT_NEAR(s.head(3).norm(), std::sqrt(3.0 * 0.25), 1e-14);
  EXPECT_NEAR(s.tail(5).norm(), std::sqrt(5.0), 1e-14);
  EXPECT_LT(s[0], 0.0);
  EXPECT_GT(s[7], 0.0);
}

TEST_F(CubicPairFixture, FollowsOnePointPerPattern) {
  ASSERT_EQ(followed->size(), 4u);
  const double sqN = std::sqrt(100.0);
  for (std::size_t i = 0; i < followed->size(); ++i) {
    const auto& p = (*followed)[i];
    ASSERT_TRUE(p.delta.has_value());
    EXPECT_LE(p.grad_norm, 1e-10);
    EXPECT_EQ(p.spectrum.size(), 98);
    for (std::size_t j = 0; j < i; ++j) EXPECT_GE((p.sigma - (*followed)[j].sigma).norm(), 0.5 * sqN);
  }
}

TEST_F(CubicPairFixture, IndexCountsFlippedSpeciesDirections) {
  const auto& part = inst->partition();
  for (const auto& p : *followed) {
    int expected = 0;
    for (int s = 0; s < part.r(); ++s)
      if ((*p.delta)[s] < 0) expected += part.sizes[s] - 1;
    EXPECT_EQ(p.index, expected);
    int negative = 0;
    for (int i = 0; i < p.spectrum.size(); ++i) negative += p.spectrum[i] < 0;
    EXPECT_EQ(p.index + negative, inst->N() - part.r());
    EXPECT_FALSE(p.ill_conditioned);
  }
}

TEST_F(CubicPairFixture, NewtonAtCriticalPointDoesNotMove) {
  const auto& p = by_signs(*followed, Signs{1, 1});
  CriticalPointResult q = newton_refine(*inst, p.sigma);
  EXPECT_LE(q.iterations, 1);
  EXPECT_LE((q.sigma - p.sigma).norm(), 1e-8);
}

TEST_F(CubicPairFixture, NewtonRetractsItsStart) {
  const auto& p = (*followed)[0];
  CriticalPointResult q = newton_refine(*inst, 1.1 * p.sigma);
  EXPECT_LE((q.sigma - p.sigma).norm(), 1e-8);
}

TEST_F(CubicPairFixture, ClassifiesFollowedPoints) {
  for (const auto& p : *followed) {
    Classification c = classify_point(*inst, *preds, p, kEps, false);
    ASSERT_TRUE(c.delta.has_value());
    EXPECT_EQ(*c.delta, *p.delta);
    EXPECT_TRUE(c.energy_typical);
    EXPECT_TRUE(c.overlap_typical);
  }
}

TEST_F(CubicPairFixture, RandomPointIsUnclassified) {
  std::mt19937_64 rng(11);
  CriticalPointResult p = describe_point(*inst, random_point(inst->partition(), rng));
  EXPECT_FALSE(classify_point(*inst, *preds, p, kEps, false).delta.has_value());
}

TEST_F(CubicPairFixture, TopPointBulkMatchesFiniteMeasure) {
  const auto& p = by_signs(*followed, Signs{1, 1});
  Classification c = classify_point(*inst, *preds, p, kEps, true);
  EXPECT_LT(c.bulk.w2, 0.1);
  EXPECT_LT(c.bulk.hausdorff, 0.35);
  EXPECT_GT(c.bulk.gap_at_zero, 0.0);
}

TEST(ConditionalLaws, ReproduceIdealStatistics) {
  for (const auto& mix : {presets::cubic_pair(), presets::symmetric_pair(), presets::skewed_pair()}) {
    const MixtureStats st = stats(mix);
    for (const auto& pr : all_predictions(st)) {
      EXPECT_NEAR(conditional_energy(st, pr.radial), pr.energy, 1e-10);
      EXPECT_LE((conditional_overlap(st, pr.radial) - pr.overlap).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(SpectrumCompare, IdenticalSpectraAreAtDistanceZero) {
  Vec s = Vec::LinSpaced(50, -3.0, -0.5);
  ComparisonReport rep = spectrum_compare(s, s);
  EXPECT_NEAR(rep.w2, 0.0, 1e-12);
  EXPECT_NEAR(rep.hausdorff, 0.0, 1e-12);
}

TEST(SpectrumCompare, ShiftIsDetected) {
  Vec s = Vec::LinSpaced(50, -3.0, -0.5);
  Vec t = s.array() + 0.2;
  ComparisonReport rep = spectrum_compare(s, t);
  EXPECT_NEAR(rep.w2, 0.2, 1e-3);
  EXPECT_NEAR(rep.hausdorff, 0.2, 1e-12);
}

TEST_F(CubicPairFixture, BandStateInvariants) {
  const auto& part = inst->partition();
  const int N = inst->N();
  auto bands = recursive_bands(*inst, Signs{1, 1}, 20);
  ASSERT_EQ(bands.size(), 21u);
  for (std::size_t k = 1; k < bands.size(); ++k) {
    const auto& b = bands[k];
    Vec R = overlap(b.m, b.m, part);
    EXPECT_LE((R - b.R_k).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((b.U.transpose() * b.g).cwiseAbs().maxCoeff(), 1e-8 * N);
    const Vec step = b.m - bands[k - 1].m;
    for (std::size_t j = 1; j < k; ++j) EXPECT_LE(std::abs(step.dot(bands[j].m)), 1e-8 * N);
    EXPECT_LE((b.U.transpose() * b.U - Mat::Identity(b.U.cols(), b.U.cols())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST_F(CubicPairFixture, BandDistanceGrowsWithNesting) {
  const auto& p = by_signs(*followed, Signs{1, 1});
  auto bands = recursive_bands(*inst, Signs{1, 1}, 10);
  const double sqN = std::sqrt(double(inst->N()));
  double prev = 0.0;
  for (std::size_t k = 1; k < bands.size(); ++k) {
    const double d = band_distance(*inst, bands[k], p.sigma);
    EXPECT_GE(d, prev - 1e-9);
    prev = d;
  }
  EXPECT_LT(band_distance(*inst, bands[1], p.sigma), 0.5 * sqN);
  // A point of the band lies at distance zero.
  const auto& part = inst->partition();
  const auto& b = bands[3];
  std::mt19937_64 rng(4);
  Vec w = random_point(part, rng);
  w -= b.U * (b.U.transpose() * w);
  Vec on = b.m;
  for (int s = 0; s < part.r(); ++s) {
    auto ws = w.segment(part.offsets[s], part.sizes[s]);
    const double rho = std::sqrt(part.sizes[s] - b.m.segment(part.offsets[s], part.sizes[s]).squaredNorm());
    on.segment(part.offsets[s], part.sizes[s]) += rho * ws / ws.norm();
  }
  EXPECT_NEAR(band_distance(*inst, b, on), 0.0, 1e-8);
}

TEST_F(CubicPairFixture, BandValidation) {
  EXPECT_THROW(recursive_bands(*inst, Signs{1, 1}, 0), Error);
  EXPECT_THROW(recursive_bands(*inst, Signs{1, 1}, 31), Error);
  EXPECT_THROW(recursive_bands(*inst, Signs{1}, 3), Error);
}

TEST_F(CubicPairFixture, SurveyFindsOnlyClassifiablePoints) {
  SurveyReport rep = survey_approx_crits(*inst, *preds, 12, 0.05, 5, *followed, kEps);
  EXPECT_EQ(rep.starts, 12);
  EXPECT_GE(rep.eps_critical, 8);
  EXPECT_EQ(rep.unclassified, 0);
  EXPECT_GE(rep.distinct_exact, 4);
  EXPECT_LE(rep.max_exact_distance_to_followed, 1e-6);
}

TEST_F(CubicPairFixture, SurveyWithZeroEpsCountsOnlyConvergedPoints) {
  SurveyReport rep = survey_approx_crits(*inst, *preds, 8, 0.0, 5, *followed);
  EXPECT_EQ(rep.eps_critical, 8);
  EXPECT_EQ(rep.distinct_exact, 4);
}
