#include "glassland/dyson.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <map>
#include <random>

#include "glassland/parallel.hpp"

namespace glassland {

namespace {

const cplx I(0.0, 1.0);

double min_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_abs(const CVec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

CVec residual_vec(const DysonSystem& sys, const Mat& K, cplx z, const CVec& m) {
  CVec w = (K.cast<cplx>() * m).array() + sys.shift.cast<cplx>().array() + z;
  return (w.array() * m.array() + 1.0).matrix();
}

CVec fixed_point_step(const DysonSystem& sys, const Mat& K, cplx z, const CVec& m) {
  CVec w = (K.cast<cplx>() * m).array() + sys.shift.cast<cplx>().array() + z;
  return (-w.array().inverse()).matrix();
}

bool in_upper(const CVec& m) { return (m.imag().array() > 0.0).all(); }

struct NewtonOut {
  CVec m;
  double res;
  int iters;
  bool ok;
};

NewtonOut newton(const DysonSystem& sys, const Mat& K, cplx z, CVec m, double tol, int max_it) {
  const int r = sys.r();
  const CMat Kc = K.cast<cplx>();
  CVec F = residual_vec(sys, K, z, m);
  double res = max_abs(F);
  int it = 0;
  for (; it < max_it && res > tol; ++it) {
    CVec w = (Kc * m).array() + sys.shift.cast<cplx>().array() + z;
    CMat J = m.asDiagonal() * Kc;
    for (int s = 0; s < r; ++s) J(s, s) += w[s];
    CVec step = J.partialPivLu().solve(-F);
    if (!step.allFinite()) break;
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt, t *= 0.5) {
      CVec trial = m + t * step;
      CVec Ft = residual_vec(sys, K, z, trial);
      double rt = max_abs(Ft);
      if (std::isfinite(rt) && rt < res) {
        m = trial;
        F = Ft;
        res = rt;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return {m, res, it, res <= tol};
}

double matrix_tol(const Mat& m) { return 1e-8 * (1.0 + m.cwiseAbs().maxCoeff()); }

}  // namespace

Mat DysonSystem::stability_real(const Vec& m) const {
  Vec sc = c.cwiseSqrt();
  Mat out = -(sc.asDiagonal() * S * sc.asDiagonal());
  for (int s = 0; s < r(); ++s) out(s, s) += 1.0 / (m[s] * m[s]);
  return out;
}

Mat DysonSystem::stability_abs(const CVec& m) const {
  Vec sc = c.cwiseSqrt();
  Mat out = -(sc.asDiagonal() * S * sc.asDiagonal());
  for (int s = 0; s < r(); ++s) out(s, s) += 1.0 / std::norm(m[s]);
  return out;
}

DysonSystem asymptotic_system(const MixtureStats& st, const Vec& x) {
  if (x.size() != st.r) throw Error(Errc::Validation, "x has wrong length");
  DysonSystem sys;
  sys.shift = x.cwiseQuotient(st.lambda.cwiseSqrt());
  sys.S = st.xi_dprime.cwiseQuotient(st.lambda * st.lambda.transpose());
  sys.c = st.lambda;
  return sys;
}

DysonSystem finite_system(const MixtureStats& st, const Vec& x, const std::vector<int>& sizes) {
  if (static_cast<int>(sizes.size()) != st.r) throw Error(Errc::Validation, "sizes has wrong length");
  int N = 0;
  for (int n : sizes) N += n;
  const int r = st.r;
  DysonSystem sys = asymptotic_system(st, x);
  sys.S *= static_cast<double>(N - r) / N;
  for (int s = 0; s < r; ++s) sys.c[s] = static_cast<double>(sizes[s] - 1) / (N - r);
  return sys;
}

double dyson_residual(const DysonSystem& sys, cplx z, const CVec& m) {
  return max_abs(residual_vec(sys, sys.coupling(), z, m));
}

DysonSolution solve_dyson(const DysonSystem& sys, cplx z, const CVec* warm, const DysonOptions& opt) {
  const int r = sys.r();
  const Mat K = sys.coupling();
  const bool upper = z.imag() > 0.0;
  if (z.imag() < opt.eta_floor && !warm)
    throw Error(Errc::Validation, "solve_dyson needs Im z >= eta_floor or a warm start");

  DysonSolution out;
  out.z = z;
  auto accept = [&](const NewtonOut& n) {
    return n.ok && n.m.allFinite() && (!upper || in_upper(n.m));
  };

  if (warm) {
    NewtonOut n = newton(sys, K, z, *warm, opt.tol, 60);
    if (accept(n)) {
      out.m = n.m;
      out.residual = n.res;
      out.iterations = n.iters;
      return out;
    }
    if (!upper) throw Error(Errc::NonConvergence, "Newton failed on the real axis");
  }

  CVec m = (warm && in_upper(*warm)) ? *warm : CVec::Constant(r, I);
  double alpha = 0.5;
  double res = max_abs(residual_vec(sys, K, z, m));
  double switch_tol = 1e-4;
  for (int it = 1; it <= opt.max_iters; ++it) {
    CVec next = (1.0 - alpha) * m + alpha * fixed_point_step(sys, K, z, m);
    double rn = max_abs(residual_vec(sys, K, z, next));
    if (rn > res) {
      alpha = std::max(alpha * 0.5, 1e-3);
    }
    m = next;
    res = rn;
    if (res < switch_tol) {
      NewtonOut n = newton(sys, K, z, m, opt.tol, 60);
      if (accept(n)) {
        out.m = n.m;
        out.residual = n.res;
        out.iterations = it + n.iters;
        return out;
      }
      switch_tol *= 0.01;
    }
  }
  throw Error(Errc::NonConvergence, "Dyson iteration did not converge");
}

DysonSolution solve_dyson(const MixtureStats& st, const Vec& x, cplx z, const CVec* warm,
                          const DysonOptions& opt) {
  DysonSolution sol = solve_dyson(asymptotic_system(st, x), z, warm, opt);
  sol.x = x;
  return sol;
}

BoundaryValue boundary_m(const DysonSystem& sys, double gamma) {
  const Mat K = sys.coupling();
  BoundaryValue out;
  CVec m, prev;
  bool have = false;
  double eta = 1.0;
  for (int k = 0; k <= 7; ++k, eta *= 0.1) {
    DysonSolution sol = solve_dyson(sys, cplx(gamma, eta), have ? &m : nullptr);
    prev = m;
    m = sol.m;
    have = true;
  }
  out.last_step = max_abs(m - prev);
  if (out.last_step > 10.0 * std::cbrt(1e-6))
    throw Error(Errc::NonConvergence, "eta continuation unstable near the real axis");

  const cplx z(gamma, 0.0);
  auto try_real = [&]() -> bool {
    for (double shrink : {0.0, 0.01, 0.1}) {
      CVec start = ((1.0 - shrink) * m.real()).cast<cplx>();
      NewtonOut n = newton(sys, K, z, start, 1e-12, 100);
      if (!n.ok) continue;
      Vec mr = n.m.real();
      Mat Mr = sys.stability_real(mr);
      if (min_eig(Mr) >= -matrix_tol(Mr)) {
        out.m = mr.cast<cplx>();
        out.exact = true;
        return true;
      }
    }
    return false;
  };
  auto try_complex = [&]() -> bool {
    NewtonOut n = newton(sys, K, z, m, 1e-12, 100);
    if (!n.ok || !in_upper(n.m)) return false;
    Mat Mb = sys.stability_abs(n.m);
    if (min_eig(Mb) < -matrix_tol(Mb)) return false;
    out.m = n.m;
    out.exact = true;
    return true;
  };
  const bool looks_real = m.imag().maxCoeff() < 1e-3;
  if (looks_real ? (try_real() || try_complex()) : (try_complex() || try_real())) return out;
  out.m = m;
  out.exact = false;
  return out;
}

BoundaryValue boundary_u_full(const MixtureStats& st, const Vec& v) {
  Vec x = v.cwiseQuotient(st.lambda.cwiseSqrt());
  return boundary_m(asymptotic_system(st, x), 0.0);
}

CVec boundary_u(const MixtureStats& st, const Vec& v) { return boundary_u_full(st, v).m; }

bool is_real(const CVec& u, double thr) { return u.imag().cwiseAbs().maxCoeff() <= thr; }

double spectral_bound(const DysonSystem& sys) {
  double row = sys.coupling().cwiseAbs().rowwise().sum().maxCoeff();
  return sys.shift.cwiseAbs().maxCoeff() + 2.0 * std::sqrt(row) + 1.0;
}

namespace {

// Aggregate (species < 0) or per-species density at gamma.
double density_at(const DysonSystem& sys, double gamma, int species) {
  CVec m = boundary_m(sys, gamma).m;
  if (species >= 0) return std::max(m[species].imag(), 0.0) / M_PI;
  double rho = 0.0;
  for (int s = 0; s < sys.r(); ++s) rho += sys.c[s] * std::max(m[s].imag(), 0.0);
  return rho / M_PI;
}

bool nonreal_at(const DysonSystem& sys, double gamma) {
  return boundary_m(sys, gamma).m.imag().maxCoeff() > 1e-10;
}

// Locates the real/nonreal transition between `out` (real) and `in` (nonreal).
double bisect_edge(const DysonSystem& sys, double out, double in) {
  for (int it = 0; it < 60 && std::abs(in - out) > 1e-13 * (1.0 + std::abs(in)); ++it) {
    double mid = 0.5 * (out + in);
    if (nonreal_at(sys, mid))
      in = mid;
    else
      out = mid;
  }
  return 0.5 * (out + in);
}

// Golden-section search for a local minimum of the density on [lo, hi].
double refine_minimum(const DysonSystem& sys, double lo, double hi) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
  double fc = density_at(sys, c, -1), fd = density_at(sys, d, -1);
  for (int it = 0; it < 40 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - phi * (hi - lo);
      fc = density_at(sys, c, -1);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + phi * (hi - lo);
      fd = density_at(sys, d, -1);
    }
  }
  return 0.5 * (lo + hi);
}

struct GridPass {
  SpectralMeasure mu;
  bool touches_end = false;
};

GridPass grid_pass(const DysonSystem& sys, double lo, double hi, int points) {
  const int r = sys.r();
  GridPass gp;
  SpectralMeasure& mu = gp.mu;
  mu.grid = Vec::LinSpaced(points, lo, hi);
  mu.weights = sys.c;
  std::vector<CVec> ms(points);
  parallel_for(points, [&](std::size_t j) { ms[j] = boundary_m(sys, mu.grid[j]).m; });
  mu.density_s.assign(r, Vec::Zero(points));
  mu.density = Vec::Zero(points);
  for (int j = 0; j < points; ++j)
    for (int s = 0; s < r; ++s) {
      double rho = std::max(ms[j][s].imag(), 0.0) / M_PI;
      mu.density_s[s][j] = rho;
      mu.density[j] += sys.c[s] * rho;
    }

  std::vector<std::pair<int, int>> runs;
  for (int j = 0; j < points;) {
    if (mu.density[j] <= mu.support_threshold) {
      ++j;
      continue;
    }
    int k = j;
    while (k + 1 < points && mu.density[k + 1] > mu.support_threshold) ++k;
    if (!runs.empty() && j - runs.back().second <= 2)
      runs.back().second = k;
    else
      runs.push_back({j, k});
    j = k + 1;
  }
  for (const auto& [a, b] : runs) {
    if (a == 0 || b == points - 1) gp.touches_end = true;
    double left = a == 0 ? mu.grid[0] : bisect_edge(sys, mu.grid[a - 1], mu.grid[a]);
    const double right = b == points - 1 ? mu.grid[points - 1] : bisect_edge(sys, mu.grid[b + 1], mu.grid[b]);
    for (int j = a + 1; j < b; ++j) {
      if (!(mu.density[j] < mu.density[j - 1] && mu.density[j] <= mu.density[j + 1])) continue;
      const double g = refine_minimum(sys, mu.grid[j - 1], mu.grid[j + 1]);
      if (nonreal_at(sys, g)) {
        mu.kinks.push_back(g);
        continue;
      }
      // a gap narrower than the grid spacing
      int jl = j - 1, jr = j + 1;
      while (jl > a && mu.density[jl] <= mu.support_threshold) --jl;
      while (jr < b && mu.density[jr] <= mu.support_threshold) ++jr;
      mu.support.push_back({left, bisect_edge(sys, g, mu.grid[jl])});
      left = bisect_edge(sys, g, mu.grid[jr]);
    }
    mu.support.push_back({left, right});
  }
  return gp;
}

}  // namespace

double integrate_measure(const DysonSystem& sys, const SpectralMeasure& mu,
                         const std::function<double(double)>& f,
                         const std::vector<double>& breakpoints, int species) {
  boost::math::quadrature::tanh_sinh<double> ts;
  std::map<double, double> cache;
  auto rho = [&](double g) {
    auto it = cache.find(g);
    if (it != cache.end()) return it->second;
    double v = density_at(sys, g, species);
    cache.emplace(g, v);
    return v;
  };
  double total = 0.0;
  for (const auto& [a, b] : mu.support) {
    std::vector<double> cuts{a};
    for (double p : breakpoints)
      if (p > a && p < b) cuts.push_back(p);
    for (double p : mu.kinks)
      if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] - cuts[i] <= 0.0) continue;
      total += ts.integrate([&](double g) { return f(g) * rho(g); }, cuts[i], cuts[i + 1], 1e-10);
    }
  }
  return total;
}

SpectralMeasure spectral_measure(const DysonSystem& sys, const GridSpec& grid) {
  if (grid.points < 3) throw Error(Errc::Validation, "grid needs at least 3 points");
  double lo = grid.lo, hi = grid.hi;
  const bool automatic = lo == hi;
  if (automatic) {
    hi = spectral_bound(sys);
    lo = -hi;
  }
  const int r = sys.r();
  for (int attempt = 0; attempt <= 5; ++attempt) {
    GridPass gp = grid_pass(sys, lo, hi, grid.points);
    SpectralMeasure& mu = gp.mu;
    mu.mass_s = Vec::Zero(r);
    for (int s = 0; s < r; ++s)
      mu.mass_s[s] = integrate_measure(sys, mu, [](double) { return 1.0; }, {}, s);
    bool deficit = gp.touches_end || (mu.mass_s.array() < 1.0 - 1e-4).any();
    if (!deficit || !automatic) {
      if (deficit) throw Error(Errc::MassDeficit, "spectral grid does not capture the full mass");
      return mu;
    }
    lo *= 1.5;
    hi *= 1.5;
  }
  throw Error(Errc::MassDeficit, "spectral grid does not capture the full mass");
}

SpectralMeasure spectral_measure(const MixtureStats& st, const Vec& x, const GridSpec& grid) {
  return spectral_measure(asymptotic_system(st, x), grid);
}

double psi_from_u(const MixtureStats& st, const CVec& u) {
  if ((u.cwiseAbs().array() < 1e-8).any()) throw Error(Errc::DegenerateU, "|u_s| below 1e-8");
  cplx quad = (u.transpose() * st.xi_dprime.cast<cplx>() * u)(0, 0);
  double out = 0.5 * quad.real();
  for (int s = 0; s < st.r; ++s) out -= st.lambda[s] * std::log(std::abs(u[s]));
  return out;
}

double psi(const MixtureStats& st, const Vec& x, PsiMode mode) {
  if (mode == PsiMode::ClosedForm) {
    Vec v = x.cwiseProduct(st.lambda.cwiseSqrt());
    return psi_from_u(st, boundary_u(st, v));
  }
  DysonSystem sys = asymptotic_system(st, x);
  SpectralMeasure mu = spectral_measure(sys);
  return integrate_measure(sys, mu, [](double g) { return std::log(std::abs(g)); }, {0.0});
}

StabilityMatrices stability_matrices(const MixtureStats& st, const CVec& u) {
  if ((u.cwiseAbs().array() == 0.0).any()) throw Error(Errc::ZeroComponent, "u has a zero entry");
  StabilityMatrices out;
  out.M = -st.xi_dprime.cast<cplx>();
  out.Mbar = -st.xi_dprime;
  out.Mhat = st.xi_dprime;
  for (int s = 0; s < st.r; ++s) {
    out.M(s, s) += st.lambda[s] / (u[s] * u[s]);
    out.Mbar(s, s) += st.lambda[s] / std::norm(u[s]);
    out.Mhat(s, s) += st.lambda[s] / std::norm(u[s]);
  }
  return out;
}

const char* feasibility_name(FeasibilityCase c) {
  switch (c) {
    case FeasibilityCase::Interior: return "interior";
    case FeasibilityCase::BoundaryReal: return "boundary_real";
    case FeasibilityCase::BoundaryImag: return "boundary_imag";
    case FeasibilityCase::Infeasible: return "infeasible";
  }
  return "?";
}

FeasibilityReport feasibility(const MixtureStats& st, const CVec& u, double tol) {
  FeasibilityReport rep;
  StabilityMatrices sm = stability_matrices(st, u);
  rep.min_eig_Mbar = min_eig(sm.Mbar);
  Vec y = u.imag();
  rep.Mbar_times_Im_u = sm.Mbar * y;
  const bool real = y.cwiseAbs().maxCoeff() <= tol;
  if (real) {
    rep.min_eig_M_real = min_eig(sm.M.real());
    rep.fcase = rep.min_eig_M_real >= -tol ? FeasibilityCase::BoundaryReal : FeasibilityCase::Infeasible;
    return rep;
  }
  rep.min_eig_M_real = std::nan("");
  if (rep.min_eig_Mbar < -tol || (rep.Mbar_times_Im_u.array() < -tol).any()) {
    rep.fcase = FeasibilityCase::Infeasible;
    return rep;
  }
  const bool all_upper = (y.array() > tol).all();
  if (all_upper && rep.Mbar_times_Im_u.cwiseAbs().maxCoeff() <= tol)
    rep.fcase = FeasibilityCase::BoundaryImag;
  else
    rep.fcase = FeasibilityCase::Interior;
  return rep;
}

const char* boundary_kind_name(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::LeftEdge: return "left_edge";
    case BoundaryKind::RightEdge: return "right_edge";
    case BoundaryKind::Cusp: return "cusp";
    case BoundaryKind::Nonsingular: return "nonsingular";
  }
  return "?";
}

std::optional<Vec> real_boundary_u(const MixtureStats& st, const Vec& v) {
  BoundaryValue b = boundary_u_full(st, v);
  if (b.exact && !is_real(b.m)) return std::nullopt;
  if (!b.exact && b.m.imag().maxCoeff() > 1e-2) return std::nullopt;
  Vec x = v.cwiseQuotient(st.lambda.cwiseSqrt());
  DysonSystem sys = asymptotic_system(st, x);
  // Iterate to machine precision: at edges and cusps the root is multiple and
  // the residual tolerance alone leaves the iterate far from it.
  NewtonOut n = newton(sys, sys.coupling(), cplx(0.0, 0.0), b.m.real().cast<cplx>(), 0.0, 200);
  if (n.res > 1e-12) return b.exact ? std::optional<Vec>(b.m.real()) : std::nullopt;
  Vec ur = n.m.real();
  StabilityMatrices sm = stability_matrices(st, ur.cast<cplx>());
  if (min_eig(sm.M.real()) < -1e-6) return b.exact ? std::optional<Vec>(b.m.real()) : std::nullopt;
  return ur;
}

namespace {

// +1 when every probe on that side is real, -1 when every probe is nonreal.
int probe_side(const MixtureStats& st, const Vec& v, const Vec& chi, double sign, double g0) {
  int real = 0, nonreal = 0;
  for (double g : {g0 / 8, g0 / 4, g0 / 2, g0}) {
    CVec u = boundary_u(st, v + sign * g * chi);
    if (is_real(u))
      ++real;
    else
      ++nonreal;
  }
  if (real == 4) return 1;
  if (nonreal == 4) return -1;
  return 0;
}

BoundaryKind probe(const MixtureStats& st, const Vec& v, const Vec& chi, double g0) {
  int plus = probe_side(st, v, chi, 1.0, g0);
  int minus = probe_side(st, v, chi, -1.0, g0);
  if (plus == 1 && minus == -1) return BoundaryKind::RightEdge;
  if (plus == -1 && minus == 1) return BoundaryKind::LeftEdge;
  if (plus == -1 && minus == -1) return BoundaryKind::Cusp;
  throw Error(Errc::InconsistentProbes, "edge probes disagree across scales");
}

void check_chi(const Vec& chi, int r) {
  if (chi.size() != r || (chi.array() <= 0.0).any() || std::abs(chi.sum() - 1.0) > 1e-9)
    throw Error(Errc::Validation, "chi must be a positive vector with unit l1 norm");
}

}  // namespace

BoundaryKind classify_boundary_point(const MixtureStats& st, const Vec& x, const Vec& chi,
                                     const EdgeProbeOptions& opt) {
  check_chi(chi, st.r);
  Vec v = x.cwiseProduct(st.lambda.cwiseSqrt());
  std::optional<Vec> u = real_boundary_u(st, v);
  if (!u) return BoundaryKind::Nonsingular;
  StabilityMatrices sm = stability_matrices(st, u->cast<cplx>());
  Eigen::SelfAdjointEigenSolver<Mat> es(sm.M.real(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().cwiseAbs().minCoeff() > opt.tol) return BoundaryKind::Nonsingular;
  BoundaryKind kind = probe(st, v, chi, opt.gamma0);
  if (opt.second_chi) {
    check_chi(*opt.second_chi, st.r);
    if (probe(st, v, *opt.second_chi, opt.gamma0) != kind)
      throw Error(Errc::InconsistentProbes, "edge classification depends on chi");
  }
  return kind;
}

Mat sample_block_matrix(const MixtureStats& st, const Vec& x, int N, std::uint64_t seed) {
  const int r = st.r;
  if (N < 10 * r) throw Error(Errc::Validation, "sample_block_matrix needs N >= 10 r");
  std::vector<int> sizes = species_sizes(st.lambda, N);
  std::vector<int> label;
  for (int s = 0; s < r; ++s) label.insert(label.end(), sizes[s] - 1, s);
  const int n = static_cast<int>(label.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Mat W(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int s = label[i], t = label[j];
      double var = st.xi_dprime(s, t) / (N * st.lambda[s] * st.lambda[t]);
      if (i == j) var *= 2.0;
      W(i, j) = W(j, i) = std::sqrt(var) * normal(rng);
    }
    W(i, i) -= x[label[i]] / std::sqrt(st.lambda[label[i]]);
  }
  return W;
}

}  // namespace glassland
