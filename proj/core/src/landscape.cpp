#include "glassland/landscape.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "glassland/parallel.hpp"

namespace glassland {

namespace {

constexpr double kZeroEig = 1e-8;
constexpr double kSingular = 1e-6;

double grad_norm_of(const LocalData& d, int N) { return d.rgrad.norm() / std::sqrt(static_cast<double>(N)); }

Vec g1_overlap(const HamiltonianInstance& h, const Vec& sigma) { return overlap(h.g1(), sigma, h.partition()); }

Signs sign_pattern(const Vec& v) {
  Signs s(v.size());
  for (int i = 0; i < v.size(); ++i) s[i] = v[i] >= 0 ? 1 : -1;
  return s;
}

MixtureStats finite_stats(const HamiltonianInstance& h) {
  return stats(h.mixture().with_lambda(h.partition().lambda_N()));
}

}  // namespace

CriticalPointResult describe_point(const HamiltonianInstance& h, const Vec& sigma, double t) {
  const int N = h.N();
  LocalData d = local_data(h, sigma, true, t);
  CriticalPointResult p;
  p.sigma = sigma;
  p.grad_norm = grad_norm_of(d, N);
  p.energy = d.value / N;
  p.radial = d.radial;
  p.g1_overlap = g1_overlap(h, sigma);
  Eigen::SelfAdjointEigenSolver<Mat> es(d.rhess, Eigen::EigenvaluesOnly);
  p.spectrum = es.eigenvalues();
  p.index = 0;
  p.min_abs_eig = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.spectrum.size(); ++i) {
    const double e = p.spectrum[i];
    p.min_abs_eig = std::min(p.min_abs_eig, std::abs(e));
    if (std::abs(e) < kZeroEig)
      p.ill_conditioned = true;
    else if (e > 0)
      ++p.index;
  }
  return p;
}

CriticalPointResult newton_refine(const HamiltonianInstance& h, const Vec& sigma0, const NewtonOptions& opt) {
  const Partition& part = h.partition();
  const int N = h.N();
  Vec sigma = retract(part, sigma0);
  bool pinv = false;
  int it = 0;
  for (;; ++it) {
    LocalData d = local_data(h, sigma, true, opt.t);
    double gn = grad_norm_of(d, N);
    if (gn <= opt.tol) break;
    if (it >= opt.max_iters) throw Error(Errc::MaxIters, "Newton did not reach the gradient tolerance");
    const Mat B = tangent_basis(part, sigma);
    const Vec gc = B.transpose() * d.rgrad;
    Eigen::SelfAdjointEigenSolver<Mat> es(d.rhess);
    const Vec& ev = es.eigenvalues();
    const Mat& V = es.eigenvectors();
    Vec proj = V.transpose() * gc;
    for (int i = 0; i < ev.size(); ++i) {
      if (std::abs(ev[i]) < kSingular) {
        proj[i] = 0.0;
        pinv = true;
      } else {
        proj[i] = -proj[i] / ev[i];
      }
    }
    const Vec step = B * (V * proj);
    double alpha = 1.0;
    Vec best = sigma;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      Vec trial = retract(part, sigma + alpha * step);
      LocalData dt = local_data(h, trial, false, opt.t);
      if (grad_norm_of(dt, N) < gn) {
        best = trial;
        break;
      }
      if (ls == 29) best = trial;
    }
    sigma = best;
  }
  CriticalPointResult p = describe_point(h, sigma, opt.t);
  p.iterations = it;
  p.pinv_used = pinv;
  if (pinv && p.min_abs_eig < kSingular) throw Error(Errc::SingularHessian, "converged to a singular critical point");
  return p;
}

Vec scale_by_species(const Partition& part, const Vec& v, const Signs& delta, const Vec& q) {
  Vec out = Vec::Zero(part.N);
  for (int s = 0; s < part.r(); ++s) {
    auto vs = v.segment(part.offsets[s], part.sizes[s]);
    const double n = vs.norm();
    if (!(n > 1e-10)) throw Error(Errc::DegenerateGradient, "species block of the direction vanishes");
    out.segment(part.offsets[s], part.sizes[s]) = delta[s] * std::sqrt(q[s] * part.sizes[s]) / n * vs;
  }
  return out;
}

namespace {

CriticalPointResult follow_once(const HamiltonianInstance& h, const Signs& delta, int steps) {
  const Partition& part = h.partition();
  Vec g1 = h.g1();
  Vec sigma = scale_by_species(part, g1, delta, Vec::Ones(part.r()));
  CriticalPointResult p;
  for (int k = 1; k <= steps; ++k) {
    NewtonOptions opt;
    opt.t = static_cast<double>(k) / steps;
    try {
      p = newton_refine(h, sigma, opt);
    } catch (const Error& e) {
      throw Error(Errc::LostTrack, std::string("homotopy step failed: ") + e.what());
    }
    if (sign_pattern(p.g1_overlap) != delta) throw Error(Errc::LostTrack, "1-spin overlap changed sign");
    sigma = p.sigma;
  }
  return p;
}

}  // namespace

CriticalPointResult follow_critical_point(const HamiltonianInstance& h, const Signs& delta, int steps) {
  if (static_cast<int>(delta.size()) != h.partition().r()) throw Error(Errc::Validation, "sign pattern length");
  if (steps < 1) throw Error(Errc::Validation, "steps must be positive");
  if (!h.has_degree(1)) throw Error(Errc::Validation, "homotopy needs an external field");
  CriticalPointResult p;
  try {
    p = follow_once(h, delta, steps);
  } catch (const Error& e) {
    if (e.code() != Errc::LostTrack) throw;
    p = follow_once(h, delta, 4 * steps);
  }
  p.delta = delta;
  return p;
}

std::vector<CriticalPointResult> follow_all(const HamiltonianInstance& h, int steps) {
  const auto patterns = all_sign_patterns(h.partition().r());
  std::vector<CriticalPointResult> out(patterns.size());
  parallel_for(patterns.size(), [&](std::size_t i) { out[i] = follow_critical_point(h, patterns[i], steps); });
  return out;
}

namespace {

double hausdorff_to_intervals(const Vec& pts, const std::vector<Interval>& S) {
  if (S.empty() || pts.size() == 0) return std::numeric_limits<double>::infinity();
  double d1 = 0.0;
  for (int i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : S) best = std::min(best, pts[i] < a ? a - pts[i] : (pts[i] > b ? pts[i] - b : 0.0));
    d1 = std::max(d1, best);
  }
  // Farthest point of the support from the (sorted) spectrum: interval ends
  // and midpoints of spectral gaps.
  auto dist_to_pts = [&](double y) {
    const double* lo = std::lower_bound(pts.data(), pts.data() + pts.size(), y);
    double best = std::numeric_limits<double>::infinity();
    if (lo != pts.data() + pts.size()) best = *lo - y;
    if (lo != pts.data()) best = std::min(best, y - *(lo - 1));
    return best;
  };
  double d2 = 0.0;
  for (const auto& [a, b] : S) {
    d2 = std::max({d2, dist_to_pts(a), dist_to_pts(b)});
    for (int i = 0; i + 1 < pts.size(); ++i) {
      const double mid = 0.5 * (pts[i] + pts[i + 1]);
      if (mid > a && mid < b) d2 = std::max(d2, dist_to_pts(mid));
    }
  }
  return std::max(d1, d2);
}

Vec sorted(const Vec& v) {
  Vec s = v;
  std::sort(s.data(), s.data() + s.size());
  return s;
}

constexpr int kQuantileNodes = 10000;

}  // namespace

ComparisonReport spectrum_compare(const Vec& spectrum, const SpectralMeasure& mu) {
  const Vec e = sorted(spectrum);
  const int m = static_cast<int>(e.size());
  if (m == 0) throw Error(Errc::Validation, "empty spectrum");
  const int G = static_cast<int>(mu.grid.size());
  Vec cdf(G);
  cdf[0] = 0.0;
  for (int j = 1; j < G; ++j)
    cdf[j] = cdf[j - 1] + 0.5 * (mu.density[j] + mu.density[j - 1]) * (mu.grid[j] - mu.grid[j - 1]);
  if (!(cdf[G - 1] > 0)) throw Error(Errc::MassDeficit, "spectral density has no mass");
  cdf /= cdf[G - 1];
  ComparisonReport rep;
  double acc = 0.0;
  int j = 0;
  for (int i = 0; i < kQuantileNodes; ++i) {
    const double u = (i + 0.5) / kQuantileNodes;
    while (j + 1 < G - 1 && cdf[j + 1] < u) ++j;
    const double span = cdf[j + 1] - cdf[j];
    const double q = span > 0 ? mu.grid[j] + (u - cdf[j]) / span * (mu.grid[j + 1] - mu.grid[j]) : mu.grid[j];
    const double qe = e[std::min(m - 1, static_cast<int>(u * m))];
    acc += (q - qe) * (q - qe);
  }
  rep.w2 = std::sqrt(acc / kQuantileNodes);
  rep.hausdorff = hausdorff_to_intervals(e, mu.support);
  rep.gap_at_zero = e.cwiseAbs().minCoeff();
  return rep;
}

ComparisonReport spectrum_compare(const Vec& spectrum, const Vec& reference) {
  const Vec a = sorted(spectrum), b = sorted(reference);
  if (a.size() == 0 || b.size() == 0) throw Error(Errc::Validation, "empty spectrum");
  ComparisonReport rep;
  double acc = 0.0;
  for (int i = 0; i < kQuantileNodes; ++i) {
    const double u = (i + 0.5) / kQuantileNodes;
    const double d = a[std::min<int>(a.size() - 1, u * a.size())] - b[std::min<int>(b.size() - 1, u * b.size())];
    acc += d * d;
  }
  rep.w2 = std::sqrt(acc / kQuantileNodes);
  auto one_side = [](const Vec& p, const Vec& q) {
    double d = 0.0;
    for (int i = 0; i < p.size(); ++i) d = std::max(d, (q.array() - p[i]).abs().minCoeff());
    return d;
  };
  rep.hausdorff = std::max(one_side(a, b), one_side(b, a));
  rep.gap_at_zero = a.cwiseAbs().minCoeff();
  return rep;
}

SpectralMeasure finite_measure(const HamiltonianInstance& h, const Vec& x) {
  return spectral_measure(finite_system(finite_stats(h), x, h.partition().sizes));
}

double conditional_energy(const MixtureStats& st, const Vec& x) {
  const Vec lx = st.lambda.cwiseSqrt().cwiseProduct(x);
  return st.xi_prime.dot(st.A.ldlt().solve(lx));
}

Vec conditional_overlap(const MixtureStats& st, const Vec& x) {
  const Vec lx = st.lambda.cwiseSqrt().cwiseProduct(x);
  return st.gamma1.cwiseProduct(st.A.ldlt().solve(lx));
}

Classification classify_point(const HamiltonianInstance& h, const std::vector<CriticalPrediction>& predictions,
                              const CriticalPointResult& p, double eps, bool check_bulk) {
  Classification c;
  c.radial_error = std::numeric_limits<double>::infinity();
  for (const auto& pr : predictions) {
    const double err = (p.radial - pr.radial).cwiseAbs().maxCoeff();
    if (err < c.radial_error) {
      c.radial_error = err;
      if (err <= eps) c.delta = pr.delta;
    }
  }
  if (c.radial_error > eps) c.delta.reset();
  const MixtureStats st = finite_stats(h);
  c.energy_typical = std::abs(p.energy - conditional_energy(st, p.radial)) <= eps;
  c.overlap_typical = (p.g1_overlap - conditional_overlap(st, p.radial)).cwiseAbs().maxCoeff() <= eps;
  if (check_bulk && p.spectrum.size() > 0) {
    c.bulk = spectrum_compare(p.spectrum, finite_measure(h, p.radial));
    c.bulk_typical = c.bulk.w2 <= eps && c.bulk.hausdorff <= eps;
  }
  return c;
}

std::vector<BandState> recursive_bands(const HamiltonianInstance& h, const Signs& delta, int k_max) {
  const Partition& part = h.partition();
  const int r = part.r(), N = h.N();
  if (k_max < 1 || k_max > 30) throw Error(Errc::Validation, "k_max must lie in [1, 30]");
  if (static_cast<int>(delta.size()) != r) throw Error(Errc::Validation, "sign pattern length");
  const auto radii = recursion_radii(h.mixture().with_lambda(part.lambda_N()), k_max);
  std::vector<BandState> out;
  BandState b;
  b.k = 0;
  b.R_k = Vec::Zero(r);
  b.m = Vec::Zero(N);
  b.U = Mat(N, 0);
  h.evaluate(b.m, &b.g);
  out.push_back(b);
  for (int k = 1; k <= k_max; ++k) {
    const BandState& prev = out.back();
    for (int s = 0; s < r; ++s)
      if (prev.g.segment(part.offsets[s], part.sizes[s]).norm() < 1e-10)
        throw Error(Errc::DegenerateGradient, "projected gradient vanishes on a species block");
    BandState nb;
    nb.k = k;
    nb.R_k = radii[k];
    nb.m = prev.m + scale_by_species(part, prev.g, delta, radii[k] - radii[k - 1]);
    // Extend U by the species components of m^k, orthonormalized twice.
    nb.U = Mat(N, prev.U.cols() + r);
    nb.U.leftCols(prev.U.cols()) = prev.U;
    for (int s = 0; s < r; ++s) {
      Vec col = Vec::Zero(N);
      col.segment(part.offsets[s], part.sizes[s]) = nb.m.segment(part.offsets[s], part.sizes[s]);
      const int c = prev.U.cols() + s;
      for (int pass = 0; pass < 2; ++pass) col -= nb.U.leftCols(c) * (nb.U.leftCols(c).transpose() * col);
      const double n = col.norm();
      if (n < 1e-12) throw Error(Errc::DegenerateGradient, "band center adds no new direction");
      nb.U.col(c) = col / n;
    }
    Vec grad;
    h.evaluate(nb.m, &grad);
    nb.g = grad - nb.U * (nb.U.transpose() * grad);
    out.push_back(std::move(nb));
  }
  return out;
}

double band_distance(const HamiltonianInstance& h, const BandState& b, const Vec& sigma) {
  const Partition& part = h.partition();
  const Vec inU = b.U * (b.U.transpose() * sigma);
  const Vec perp = sigma - inU;
  double d2 = 0.0;
  for (int s = 0; s < part.r(); ++s) {
    const int off = part.offsets[s], n = part.sizes[s];
    d2 += (inU.segment(off, n) - b.m.segment(off, n)).squaredNorm();
    const double rho = std::sqrt(std::max(0.0, n - b.m.segment(off, n).squaredNorm()));
    const double pn = perp.segment(off, n).norm();
    d2 += (pn - rho) * (pn - rho);
  }
  return std::sqrt(d2);
}

namespace {

// Levenberg-Marquardt on |grad_sp H|^2. Records the first iterate below eps.
struct LmOutcome {
  std::optional<Vec> eps_point;
  std::optional<Vec> exact;
};

LmOutcome minimize_grad_norm(const HamiltonianInstance& h, Vec sigma, double eps, int max_iters) {
  const Partition& part = h.partition();
  const int N = h.N();
  LmOutcome out;
  double mu = -1.0;
  std::vector<double> history;
  for (int it = 0; it < max_iters; ++it) {
    LocalData d = local_data(h, sigma, true);
    const double gn = grad_norm_of(d, N);
    if (gn <= eps) {
      out.eps_point = sigma;
      try {
        CriticalPointResult p = newton_refine(h, sigma);
        out.exact = p.sigma;
      } catch (const Error&) {
      }
      return out;
    }
    const Mat B = tangent_basis(part, sigma);
    const Vec gc = B.transpose() * d.rgrad;
    Eigen::SelfAdjointEigenSolver<Mat> es(d.rhess);
    const Vec& ev = es.eigenvalues();
    const Vec proj = es.eigenvectors().transpose() * gc;
    if (mu < 0) mu = 1e-2 * ev.cwiseAbs2().maxCoeff();
    bool moved = false;
    for (int tries = 0; tries < 25; ++tries) {
      Vec a(ev.size());
      for (int i = 0; i < ev.size(); ++i) a[i] = -ev[i] * proj[i] / (ev[i] * ev[i] + mu);
      Vec trial = retract(part, sigma + B * (es.eigenvectors() * a));
      LocalData dt = local_data(h, trial, false);
      if (grad_norm_of(dt, N) < gn) {
        sigma = trial;
        mu = std::max(mu / 4.0, 1e-300);
        moved = true;
        break;
      }
      mu *= 4.0;
    }
    if (!moved) break;
    history.push_back(gn);
    const std::size_t n = history.size();
    if (n > 10 && history[n - 11] - gn < 1e-3 * gn) break;
  }
  return out;
}

}  // namespace

SurveyReport survey_approx_crits(const HamiltonianInstance& h, const std::vector<CriticalPrediction>& predictions,
                                 int n_starts, double eps, std::uint64_t seed,
                                 const std::vector<CriticalPointResult>& followed, double classify_eps) {
  const Partition& part = h.partition();
  const double sqN = std::sqrt(static_cast<double>(h.N()));
  const auto patterns = all_sign_patterns(part.r());
  std::vector<LmOutcome> runs(n_starts);
  parallel_for(n_starts, [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    Vec start;
    if (i < 2 * followed.size()) {
      // jitter a followed point by 0.1 sqrt(N) in a random direction
      Vec noise = random_point(part, rng);
      start = retract(part, followed[i % followed.size()].sigma + 0.1 * noise);
    } else {
      start = random_point(part, rng);
    }
    runs[i] = minimize_grad_norm(h, start, std::max(eps, 1e-10), 200);
  });

  SurveyReport rep;
  rep.starts = n_starts;
  rep.counts.assign(patterns.size(), 0);
  std::vector<Vec> exact;
  for (const auto& run : runs) {
    if (!run.eps_point) continue;
    ++rep.eps_critical;
    CriticalPointResult p = describe_point(h, *run.eps_point);
    Classification c = classify_point(h, predictions, p, classify_eps, false);
    if (!c.delta) {
      ++rep.unclassified;
    } else {
      const auto idx = std::find(patterns.begin(), patterns.end(), *c.delta) - patterns.begin();
      ++rep.counts[idx];
      for (const auto& f : followed)
        if (f.delta && *f.delta == *c.delta)
          rep.max_distance_to_followed = std::max(rep.max_distance_to_followed, (f.sigma - p.sigma).norm() / sqN);
    }
    if (run.exact) {
      if (!followed.empty()) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& f : followed) nearest = std::min(nearest, (f.sigma - *run.exact).norm() / sqN);
        rep.max_exact_distance_to_followed = std::max(rep.max_exact_distance_to_followed, nearest);
      }
      bool dup = false;
      for (const auto& e : exact) dup |= (e - *run.exact).norm() <= 1e-4 * sqN;
      if (!dup) exact.push_back(*run.exact);
    }
  }
  rep.distinct_exact = static_cast<int>(exact.size());
  return rep;
}

}  // namespace glassland
