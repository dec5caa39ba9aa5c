#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "glassland/dynamics.hpp"
#include "glassland/landscape.hpp"
#include "glassland/presets.hpp"

using namespace glassland;

namespace {

HamiltonianInstance small_instance() { return sample(presets::cubic_pair(), 40, 9); }

Vec start_point(const HamiltonianInstance& h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_point(h.partition(), rng);
}

}  // namespace

TEST(Langevin, Validation) {
  const auto h = small_instance();
  const Vec x0 = start_point(h, 1);
  LangevinConfig c;
  c.dt = 2e-2;
  EXPECT_THROW(simulate(h, x0, c), Error);
  c = {};
  c.beta = -1.0;
  EXPECT_THROW(simulate(h, x0, c), Error);
  c = {};
  c.record_every = 0.0;
  EXPECT_THROW(simulate(h, x0, c), Error);
  c = {};
  c.T = 1e6;
  c.dt = 1e-8;
  EXPECT_THROW(simulate(h, x0, c), Error);
  try {
    simulate(h, 1.2 * x0, LangevinConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OffManifold);
  }
}

TEST(Langevin, DeterministicGivenSeed) {
  const auto h = small_instance();
  LangevinConfig c;
  c.beta = 5.0;
  c.T = 0.5;
  c.seed = 3;
  const auto a = simulate(h, start_point(h, 2), c);
  const auto b = simulate(h, start_point(h, 2), c);
  EXPECT_EQ(a.energies, b.energies);
  c.seed = 4;
  const auto d = simulate(h, start_point(h, 2), c);
  EXPECT_NE(a.energies, d.energies);
}

TEST(Langevin, StaysOnProductOfSpheres) {
  const auto h = small_instance();
  LangevinConfig c;
  c.beta = 10.0;
  c.T = 1.0;
  c.dt = 5e-3;
  const auto tr = simulate(h, start_point(h, 5), c);
  const auto& part = h.partition();
  for (int s = 0; s < part.r(); ++s)
    EXPECT_NEAR(tr.final_state.segment(part.offsets[s], part.sizes[s]).squaredNorm(), part.sizes[s],
                1e-10 * part.sizes[s]);
  EXPECT_NO_THROW(check_on_manifold(part, tr.final_state));
}

TEST(Langevin, RecordingGrid) {
  const auto h = small_instance();
  LangevinConfig c;
  c.T = 1.0;
  c.dt = 1e-3;
  c.record_every = 0.25;
  const Vec x0 = start_point(h, 6);
  const auto tr = simulate(h, x0, c, {x0});
  ASSERT_EQ(tr.times.size(), 5u);
  EXPECT_NEAR(tr.times.back(), 1.0, 1e-12);
  EXPECT_EQ(tr.radials.front().size(), 2);
  EXPECT_NEAR(tr.energies.front(), h.evaluate(x0, nullptr) / h.N(), 1e-14);
  EXPECT_EQ(tr.dist_to_targets.front()[0], 0.0);
  const auto csv = trajectory_csv(tr);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,energy,radial_1,radial_2,dist_1");
}

TEST(Langevin, HittingAtStartWithInfiniteRadius) {
  const auto h = small_instance();
  const Vec x0 = start_point(h, 7);
  LangevinConfig c;
  c.T = 0.1;
  const auto tr = simulate(h, x0, c, {x0, -x0});
  const auto hit = hitting_stats(tr, std::numeric_limits<double>::infinity());
  ASSERT_EQ(hit.size(), 2u);
  ASSERT_TRUE(hit[0].has_value());
  EXPECT_EQ(*hit[0], 0.0);
  EXPECT_EQ(*hit[1], 0.0);
  EXPECT_FALSE(hitting_stats(tr, 0.5)[1].has_value());
  const auto occ = occupation_fractions(tr, 0.5, 0.0);
  EXPECT_EQ(occ[1], 0.0);
}

TEST(Langevin, NoiselessRunRestsAtCriticalPoint) {
  const auto h = sample(presets::cubic_pair(), 100, 2);
  const auto top = follow_critical_point(h, Signs{1, 1});
  LangevinConfig c;
  c.beta = 30.0;
  c.T = 1.0;
  c.dt = 1e-3;
  c.suppress_noise = true;
  const auto tr = simulate(h, top.sigma, c);
  EXPECT_LE((tr.final_state - top.sigma).norm(), 1e-6 * std::sqrt(100.0));
}

TEST(Langevin, NoiselessRunAscends) {
  const auto h = small_instance();
  LangevinConfig c;
  c.beta = 1.0;
  c.T = 2.0;
  c.dt = 1e-3;
  c.suppress_noise = true;
  const auto tr = simulate(h, start_point(h, 8), c);
  for (std::size_t i = 1; i < tr.energies.size(); ++i) EXPECT_GE(tr.energies[i], tr.energies[i - 1] - 1e-9);
}

TEST(Langevin, InfiniteTemperatureAverageMatchesUniformMeasure) {
  const auto h = sample(presets::cubic_pair(), 150, 4);
  std::mt19937_64 rng(77);
  double uniform = 0.0;
  const int samples = 4000;
  for (int i = 0; i < samples; ++i) uniform += h.evaluate(random_point(h.partition(), rng), nullptr) / h.N();
  uniform /= samples;

  std::vector<double> averages;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    LangevinConfig c;
    c.beta = 0.0;
    c.T = 50.0;
    c.dt = 1e-2;
    c.record_every = 0.5;
    c.seed = seed;
    const auto tr = simulate(h, start_point(h, 100 + seed), c);
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      if (tr.times[i] >= 5.0) {
        sum += tr.energies[i];
        ++n;
      }
    averages.push_back(sum / n);
  }
  const double mean = std::accumulate(averages.begin(), averages.end(), 0.0) / averages.size();
  double var = 0.0;
  for (double a : averages) var += (a - mean) * (a - mean);
  var /= averages.size() - 1;
  const double se = std::sqrt(var / averages.size());
  EXPECT_LE(std::abs(mean - uniform), 3.0 * se);
}
