#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glassland/hamiltonian.hpp"

namespace glassland {

struct LangevinConfig {
  double beta = 1.0;
  double dt = 1e-3;
  double T = 1.0;
  double record_every = 0.1;
  std::uint64_t seed = 0;
  bool suppress_noise = false;  // testing hook: drop the Brownian increment
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> energies;  // H / N
  std::vector<Vec> radials;
  std::vector<std::vector<double>> dist_to_targets;  // [sample][target], units of sqrt N
  Vec final_state;
};

// Euler-Maruyama with per-species renormalization after every step.
// Throws Blowup when a species norm drifts more than 10% within one step.
Trajectory simulate(const HamiltonianInstance& h, const Vec& x0, const LangevinConfig& cfg,
                    const std::vector<Vec>& targets = {});

// First recorded time inside the ball of the given radius (units of sqrt N), per target.
std::vector<std::optional<double>> hitting_stats(const Trajectory& traj, double radius);

// Fraction of samples with t >= t_min inside each target ball.
std::vector<double> occupation_fractions(const Trajectory& traj, double radius, double t_min);

std::string trajectory_csv(const Trajectory& traj);

}  // namespace glassland
