#include "glassland/dynamics.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace glassland {

namespace {

void validate(const HamiltonianInstance& h, const Vec& x0, const LangevinConfig& cfg, const std::vector<Vec>& targets) {
  if (!(cfg.beta >= 0.0)) throw Error(Errc::Validation, "beta must be nonnegative");
  if (!(cfg.dt > 0.0) || cfg.dt > 1e-2) throw Error(Errc::Validation, "dt must lie in (0, 1e-2]");
  if (!(cfg.T > 0.0) || cfg.T / cfg.dt > 1e8) throw Error(Errc::Validation, "T must be positive with T/dt <= 1e8");
  if (!(cfg.record_every > 0.0)) throw Error(Errc::Validation, "record_every must be positive");
  if (x0.size() != h.N()) throw Error(Errc::Validation, "initial state has the wrong dimension");
  for (const auto& t : targets)
    if (t.size() != h.N()) throw Error(Errc::Validation, "target has the wrong dimension");
  check_on_manifold(h.partition(), x0);
}

}  // namespace

Trajectory simulate(const HamiltonianInstance& h, const Vec& x0, const LangevinConfig& cfg,
                    const std::vector<Vec>& targets) {
  validate(h, x0, cfg, targets);
  const Partition& part = h.partition();
  const int N = h.N(), r = part.r();
  const double sqN = std::sqrt(static_cast<double>(N));
  const long steps = std::lround(cfg.T / cfg.dt);
  const long every = std::max(1L, std::lround(cfg.record_every / cfg.dt));
  Vec curv(r);
  for (int s = 0; s < r; ++s) curv[s] = (part.sizes[s] - 1.0) / (2.0 * part.sizes[s]);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> nd;
  Trajectory traj;
  Vec x = x0, g(N), xi(N);

  auto record = [&](long step, double value) {
    traj.times.push_back(step * cfg.dt);
    traj.energies.push_back(value / N);
    Vec rad(r);
    for (int s = 0; s < r; ++s)
      rad[s] = x.segment(part.offsets[s], part.sizes[s]).dot(g.segment(part.offsets[s], part.sizes[s])) /
               (std::sqrt(double(part.sizes[s])) * sqN);
    traj.radials.push_back(rad);
    std::vector<double> d;
    d.reserve(targets.size());
    for (const auto& t : targets) d.push_back((x - t).norm() / sqN);
    traj.dist_to_targets.push_back(std::move(d));
  };

  const double noise = cfg.suppress_noise ? 0.0 : std::sqrt(2.0 * cfg.dt);
  for (long step = 0;; ++step) {
    const double value = h.evaluate(x, &g);
    if (step % every == 0 || step == steps) record(step, value);
    if (step == steps) break;
    for (int i = 0; i < N; ++i) xi[i] = noise > 0.0 ? nd(rng) : 0.0;
    for (int s = 0; s < r; ++s) {
      const int off = part.offsets[s], n = part.sizes[s];
      auto xs = x.segment(off, n);
      auto gs = g.segment(off, n);
      auto zs = xi.segment(off, n);
      const double ns = static_cast<double>(n);
      gs -= (xs.dot(gs) / ns) * xs;
      zs -= (xs.dot(zs) / ns) * xs;
      xs += cfg.dt * (cfg.beta * gs - curv[s] * xs) + noise * zs;
      const double rel = xs.norm() / std::sqrt(ns);
      if (std::abs(rel - 1.0) > 0.1) throw Error(Errc::Blowup, "species norm left the 10% band; reduce dt");
      xs /= rel;
    }
  }
  traj.final_state = x;
  return traj;
}

std::vector<std::optional<double>> hitting_stats(const Trajectory& traj, double radius) {
  const std::size_t m = traj.dist_to_targets.empty() ? 0 : traj.dist_to_targets.front().size();
  std::vector<std::optional<double>> out(m);
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (!out[j] && traj.dist_to_targets[i][j] <= radius) out[j] = traj.times[i];
  return out;
}

std::vector<double> occupation_fractions(const Trajectory& traj, double radius, double t_min) {
  const std::size_t m = traj.dist_to_targets.empty() ? 0 : traj.dist_to_targets.front().size();
  std::vector<double> out(m, 0.0);
  int count = 0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] < t_min) continue;
    ++count;
    for (std::size_t j = 0; j < m; ++j) out[j] += traj.dist_to_targets[i][j] <= radius;
  }
  if (count > 0)
    for (auto& v : out) v /= count;
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os.precision(10);
  const std::size_t r = traj.radials.empty() ? 0 : traj.radials.front().size();
  const std::size_t m = traj.dist_to_targets.empty() ? 0 : traj.dist_to_targets.front().size();
  os << "t,energy";
  for (std::size_t s = 0; s < r; ++s) os << ",radial_" << s + 1;
  for (std::size_t j = 0; j < m; ++j) os << ",dist_" << j + 1;
  os << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i] << ',' << traj.energies[i];
    for (std::size_t s = 0; s < r; ++s) os << ',' << traj.radials[i][s];
    for (std::size_t j = 0; j < m; ++j) os << ',' << traj.dist_to_targets[i][j];
    os << '\n';
  }
  return os.str();
}

}  // namespace glassland
