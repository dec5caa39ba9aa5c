#include "glassland/complexity.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "glassland/parallel.hpp"

namespace glassland {

namespace {

Vec to_v(const MixtureStats& st, const Vec& x) { return x.cwiseProduct(st.lambda.cwiseSqrt()); }
Vec to_x(const MixtureStats& st, const Vec& v) { return v.cwiseQuotient(st.lambda.cwiseSqrt()); }

double log_species_term(const MixtureStats& st) {
  double acc = 0.0;
  for (int s = 0; s < st.r; ++s) acc += st.lambda[s] * std::log(st.xi_species[s]);
  return acc;
}

double min_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

ComplexityPoint F_point(const MixtureStats& st, const Vec& x) {
  if (x.size() != st.r) throw Error(Errc::Validation, "x has wrong length");
  ComplexityPoint p;
  p.x = x;
  p.v = to_v(st, x);
  p.u = boundary_u(st, p.v);
  p.u_real = is_real(p.u);
  Vec Ainv_v = st.A.ldlt().solve(p.v);
  p.F = 0.5 * (1.0 - log_species_term(st) - p.v.dot(Ainv_v)) + psi_from_u(st, p.u);
  p.grad_v = -Ainv_v - p.u.real();
  p.grad_x = p.grad_v.cwiseProduct(st.lambda.cwiseSqrt());
  return p;
}

double F_value(const MixtureStats& st, const Vec& x) { return F_point(st, x).F; }

Mat F_hessian_v(const MixtureStats& st, const ComplexityPoint& p) {
  StabilityMatrices sm = stability_matrices(st, p.u);
  CMat Minv = sm.M.inverse();
  Mat H = -st.A.inverse() - Mat(Minv.real());
  return 0.5 * (H + H.transpose());
}

double F_extended(const MixtureStats& st, const Vec& x, double E) {
  Vec Ainv_xi = st.A.ldlt().solve(st.xi_prime);
  const double var = st.xi_one - st.xi_prime.dot(Ainv_xi);
  if (var <= 1e-12) throw Error(Errc::DegenerateVariance, "conditional energy variance vanishes");
  const double mean = Ainv_xi.dot(to_v(st, x));
  return F_value(st, x) - (E - mean) * (E - mean) / (2.0 * var);
}

const char* pattern_name(SpeciesPattern p) {
  switch (p) {
    case SpeciesPattern::Plus: return "plus";
    case SpeciesPattern::Minus: return "minus";
    case SpeciesPattern::Imag: return "imag";
  }
  return "?";
}

namespace {

// Positive solutions y of the reduced imaginary-part system for a fixed set
// of imaginary species.
std::vector<Vec> solve_imag_parts(const MixtureStats& st, const std::vector<bool>& imag) {
  const int r = st.r;
  auto G = [&](const Vec& y) {
    Vec out = -st.xi_dprime * y;
    for (int s = 0; s < r; ++s) out[s] += imag[s] ? st.lambda[s] / y[s] : st.xi_prime[s] * y[s];
    return out;
  };
  std::vector<Vec> seeds;
  for (double scale : {1.0, 0.3, 3.0, 0.1}) {
    Vec y(r), z(r);
    for (int s = 0; s < r; ++s) {
      double rho = std::sqrt(st.lambda[s] / st.xi_prime[s]);
      double w = st.xi_dprime(s, s) > 0 ? std::sqrt(st.lambda[s] / st.xi_dprime(s, s)) : 1.0;
      y[s] = imag[s] ? w : 0.5 * rho * scale;
      z[s] = imag[s] ? w * scale : 0.5 * rho * scale;
    }
    seeds.push_back(y);
    seeds.push_back(z);
  }
  std::vector<Vec> sols;
  for (Vec y : seeds) {
    Vec g = G(y);
    double res = g.cwiseAbs().maxCoeff();
    for (int it = 0; it < 100 && res > 1e-14; ++it) {
      Mat J = -st.xi_dprime;
      for (int s = 0; s < r; ++s) J(s, s) += imag[s] ? -st.lambda[s] / (y[s] * y[s]) : st.xi_prime[s];
      Vec step = J.fullPivLu().solve(-g);
      double t = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
        Vec trial = y + t * step;
        if ((trial.array() <= 0.0).any()) continue;
        Vec gt = G(trial);
        double rt = gt.cwiseAbs().maxCoeff();
        if (rt < res) {
          y = trial;
          g = gt;
          res = rt;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (res > 1e-11 || (y.array() <= 0.0).any()) continue;
    bool dup = false;
    for (const Vec& o : sols) dup |= (o - y).norm() < 1e-8;
    if (!dup) sols.push_back(y);
  }
  return sols;
}

}  // namespace

std::vector<StationaryPoint> find_stationary_points(const MixtureStats& st, double tol) {
  const int r = st.r;
  if (r > 6) throw Error(Errc::Validation, "stationary census supports r <= 6");
  const Vec rho = st.lambda.cwiseQuotient(st.xi_prime).cwiseSqrt();
  std::vector<StationaryPoint> out;

  auto add = [&](const CVec& u, std::vector<SpeciesPattern> pattern) {
    Vec a = u.real();
    Vec v(r);
    for (int s = 0; s < r; ++s) v[s] = -st.lambda[s] * a[s] / std::norm(u[s]);
    v -= st.xi_dprime * a;
    for (const auto& o : out)
      if ((o.v - v).norm() < 1e-6) return;
    StabilityMatrices sm = stability_matrices(st, u);
    if (min_eig(sm.Mbar) < -1e-7) return;
    ComplexityPoint p = F_point(st, to_x(st, v));
    if ((p.u - u).cwiseAbs().maxCoeff() > 1e-6) return;
    StationaryPoint sp;
    sp.v = v;
    sp.pattern = std::move(pattern);
    sp.u = p.u;
    sp.F = p.F;
    sp.residual = p.grad_v.norm();
    if (sp.residual > std::max(tol, 1e-8) * 1e3) return;
    out.push_back(sp);
  };

  // Real boundary values: u = u(Delta), feasible iff diag(xi') - xi'' is PSD.
  if (min_eig(Mat(st.xi_prime.asDiagonal()) - st.xi_dprime) >= -tol) {
    for (const Signs& d : all_sign_patterns(r)) {
      CVec u(r);
      std::vector<SpeciesPattern> pat(r);
      for (int s = 0; s < r; ++s) {
        u[s] = -d[s] * rho[s];
        pat[s] = d[s] > 0 ? SpeciesPattern::Plus : SpeciesPattern::Minus;
      }
      add(u, pat);
    }
  }

  // Nonreal boundary values: every species has Im u_s = y_s > 0.
  for (int mask = 1; mask < (1 << r); ++mask) {
    std::vector<bool> imag(r);
    std::vector<int> pm;
    for (int s = 0; s < r; ++s) {
      imag[s] = (mask >> s) & 1;
      if (!imag[s]) pm.push_back(s);
    }
    for (const Vec& y : solve_imag_parts(st, imag)) {
      bool ok = true;
      for (int s : pm) ok &= y[s] < rho[s] - 1e-12;
      if (!ok) continue;
      const int npm = static_cast<int>(pm.size());
      for (const Signs& d : all_sign_patterns(std::max(npm, 1))) {
        if (npm == 0 && d[0] < 0) continue;
        CVec u(r);
        std::vector<SpeciesPattern> pat(r, SpeciesPattern::Imag);
        for (int s = 0; s < r; ++s) u[s] = cplx(0.0, y[s]);
        for (int k = 0; k < npm; ++k) {
          const int s = pm[k];
          u[s] = cplx(-d[k] * std::sqrt(rho[s] * rho[s] - y[s] * y[s]), y[s]);
          pat[s] = d[k] > 0 ? SpeciesPattern::Plus : SpeciesPattern::Minus;
        }
        add(u, pat);
      }
    }
  }

  double fmax = -INFINITY;
  for (const auto& p : out) fmax = std::max(fmax, p.F);
  for (auto& p : out) p.is_global_max = p.F >= fmax - 1e-8;
  return out;
}

double auto_region(const MixtureStats& st) {
  if ((st.xi_prime.array() <= 0.0).any()) return 10.0;
  CriticalPrediction top = ideal_stats(st, Signs(st.r, 1));
  return 2.0 * top.radial.cwiseAbs().maxCoeff() + 4.0;
}

namespace {

struct Ascent {
  double F;
  Vec v;
};

Ascent ascend(const MixtureStats& st, Vec v, const Vec& vmax) {
  auto clamp = [&](Vec w) { return w.cwiseMax(-vmax).cwiseMin(vmax); };
  v = clamp(v);
  ComplexityPoint p = F_point(st, to_x(st, v));
  for (int it = 0; it < 400 && p.grad_v.norm() > 1e-10; ++it) {
    Vec g = p.grad_v;
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
      Vec trial = clamp(p.v + t * g);
      ComplexityPoint q = F_point(st, to_x(st, trial));
      if (q.F >= p.F + 1e-4 * g.dot(trial - p.v)) {
        moved = (trial - p.v).norm() > 0.0;
        p = q;
        break;
      }
    }
    if (!moved) break;
  }
  // Newton polish where the Hessian is negative definite.
  for (int it = 0; it < 20 && p.grad_v.norm() > 1e-13; ++it) {
    StabilityMatrices sm = stability_matrices(st, p.u);
    Eigen::ComplexEigenSolver<CMat> ce(sm.M, false);
    if (ce.eigenvalues().cwiseAbs().minCoeff() < 1e-8) break;
    Mat H = F_hessian_v(st, p);
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() >= 0.0) break;
    Vec trial = clamp(p.v - H.ldlt().solve(p.grad_v));
    ComplexityPoint q = F_point(st, to_x(st, trial));
    if (q.grad_v.norm() >= p.grad_v.norm() && q.F <= p.F) break;
    p = q;
  }
  return {p.F, p.v};
}

}  // namespace

SupResult sup_F(const MixtureStats& st, std::optional<double> region, int random_starts,
                std::uint64_t seed) {
  const int r = st.r;
  const double R = region ? *region : auto_region(st);
  const Vec vmax = R * st.lambda.cwiseSqrt();
  std::vector<Vec> starts;
  if ((st.xi_prime.array() > 0.0).all())
    for (const auto& p : all_predictions(st)) starts.push_back(p.v);
  starts.push_back(Vec::Zero(r));
  for (const auto& sp : find_stationary_points(st)) starts.push_back(sp.v);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < random_starts; ++i) {
    Vec w(r);
    for (int s = 0; s < r; ++s) w[s] = U(rng) * vmax[s];
    starts.push_back(w);
  }
  std::vector<Ascent> res(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { res[i] = ascend(st, starts[i], vmax); });
  auto best = std::max_element(res.begin(), res.end(),
                               [](const Ascent& a, const Ascent& b) { return a.F < b.F; });
  return {best->F, to_x(st, best->v)};
}

ScanResult scan(const MixtureStats& st, const ScanSpec& spec) {
  const int r = st.r;
  if (r > 3) throw Error(Errc::Validation, "tensor scans support r <= 3");
  if (spec.n < 2 || !(spec.hi > spec.lo)) throw Error(Errc::Validation, "bad scan grid");
  std::size_t total = 1;
  for (int s = 0; s < r; ++s) total *= spec.n;
  ScanResult out;
  out.points.resize(total);
  out.F = Vec(total);
  std::vector<char> nonreal(total);
  const double h = (spec.hi - spec.lo) / (spec.n - 1);
  parallel_for(total, [&](std::size_t i) {
    Vec x(r);
    std::size_t rem = i;
    for (int s = r - 1; s >= 0; --s) {
      x[s] = spec.lo + h * static_cast<double>(rem % spec.n);
      rem /= spec.n;
    }
    ComplexityPoint p = F_point(st, x);
    out.points[i] = x;
    out.F[i] = p.F;
    nonreal[i] = !p.u_real;
  });
  out.nonreal.assign(nonreal.begin(), nonreal.end());
  return out;
}

}  // namespace glassland
