#include "glassland/mixture.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace glassland {

namespace {

using json = nlohmann::json;

void validate(const Vec& lambda, const std::vector<Coefficient>& coeffs) {
  const int r = static_cast<int>(lambda.size());
  if (r < 1) throw Error(Errc::Validation, "mixture needs at least one species");
  double sum = 0.0;
  for (int s = 0; s < r; ++s) {
    if (!(lambda[s] > 0.0) || !std::isfinite(lambda[s]))
      throw Error(Errc::Validation, "lambda entries must be positive and finite");
    sum += lambda[s];
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(Errc::Validation, "lambda must sum to 1");
  std::set<std::vector<int>> seen;
  for (const auto& c : coeffs) {
    const int k = static_cast<int>(c.index.size());
    if (k < 1) throw Error(Errc::Validation, "coefficient with empty index");
    if (k > MixtureSpec::kMaxDegree)
      throw Error(Errc::DegreeTooHigh, "degree " + std::to_string(k) + " exceeds cap 6");
    for (int j = 0; j < k; ++j) {
      if (c.index[j] < 0 || c.index[j] >= r)
        throw Error(Errc::Validation, "species index out of range");
      if (j > 0 && c.index[j] < c.index[j - 1])
        throw Error(Errc::Validation, "coefficient index must be nondecreasing");
    }
    if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma))
      throw Error(Errc::Validation, "gamma must be nonnegative and finite");
    if (!seen.insert(c.index).second)
      throw Error(Errc::Validation, "duplicate coefficient entry");
  }
}

double ipow(double y, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= y;
  return out;
}

}  // namespace

MixtureSpec::MixtureSpec(Vec lambda, std::vector<Coefficient> coeffs)
    : lambda_(std::move(lambda)), coeffs_(std::move(coeffs)) {
  validate(lambda_, coeffs_);
  std::sort(coeffs_.begin(), coeffs_.end(), [](const Coefficient& a, const Coefficient& b) {
    if (a.index.size() != b.index.size()) return a.index.size() < b.index.size();
    return a.index < b.index;
  });
}

int MixtureSpec::max_degree() const {
  int p = 0;
  for (const auto& c : coeffs_)
    if (c.gamma > 0.0) p = std::max(p, static_cast<int>(c.index.size()));
  return p;
}

double MixtureSpec::gamma(std::vector<int> index) const {
  std::sort(index.begin(), index.end());
  for (const auto& c : coeffs_)
    if (c.index == index) return c.gamma;
  return 0.0;
}

Vec MixtureSpec::gamma1() const {
  Vec g = Vec::Zero(r());
  for (const auto& c : coeffs_)
    if (c.index.size() == 1) g[c.index[0]] = c.gamma;
  return g;
}

bool MixtureSpec::has_degree(int k) const {
  for (const auto& c : coeffs_)
    if (static_cast<int>(c.index.size()) == k && c.gamma > 0.0) return true;
  return false;
}

bool MixtureSpec::nondegenerate() const {
  const int n = r();
  for (int s = 0; s < n; ++s) {
    if (!(gamma({s}) > 0.0)) return false;
    for (int t = s; t < n; ++t) {
      if (!(gamma({s, t}) > 0.0)) return false;
      for (int u = t; u < n; ++u)
        if (!(gamma({s, t, u}) > 0.0)) return false;
    }
  }
  return true;
}

MixtureSpec MixtureSpec::scaled(double c) const {
  std::vector<Coefficient> out = coeffs_;
  for (auto& e : out) e.gamma *= c;
  return MixtureSpec(lambda_, out);
}

MixtureSpec MixtureSpec::with_lambda(const Vec& lambda) const {
  return MixtureSpec(lambda, coeffs_);
}

std::vector<int> species_sizes(const Vec& lambda, int N) {
  const int r = static_cast<int>(lambda.size());
  if (N < 2 * r) throw Error(Errc::Validation, "N too small for the species count");
  std::vector<int> sizes(r);
  std::vector<std::pair<double, int>> rem;
  int used = 0;
  for (int s = 0; s < r; ++s) {
    const double exact = lambda[s] * N;
    sizes[s] = static_cast<int>(std::floor(exact));
    used += sizes[s];
    rem.push_back({exact - sizes[s], s});
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
  for (int i = 0; used < N; ++i, ++used) ++sizes[rem[i % r].second];
  for (int s = 0; s < r; ++s)
    if (sizes[s] < 2) throw Error(Errc::Validation, "every species needs at least 2 coordinates");
  return sizes;
}

double orbit_size(const std::vector<int>& index) {
  double num = std::tgamma(static_cast<double>(index.size()) + 1.0);
  std::map<int, int> counts;
  for (int s : index) ++counts[s];
  for (const auto& [s, c] : counts) num /= std::tgamma(static_cast<double>(c) + 1.0);
  return std::round(num);
}

MixtureSpec mixture_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::Validation, std::string("malformed mixture JSON: ") + e.what());
  }
  try {
    const int r = j.at("r").get<int>();
    const auto lam = j.at("lambda").get<std::vector<double>>();
    if (static_cast<int>(lam.size()) != r)
      throw Error(Errc::Validation, "lambda length does not match r");
    Vec lambda = Eigen::Map<const Vec>(lam.data(), r);
    std::vector<Coefficient> coeffs;
    for (const auto& e : j.at("gammas")) {
      Coefficient c;
      const int degree = e.at("degree").get<int>();
      for (int s : e.at("index").get<std::vector<int>>()) c.index.push_back(s - 1);
      if (static_cast<int>(c.index.size()) != degree)
        throw Error(Errc::Validation, "index length does not match degree");
      const bool has_g = e.contains("gamma");
      const bool has_g2 = e.contains("gamma_sq");
      if (has_g == has_g2)
        throw Error(Errc::Validation, "each entry needs exactly one of gamma, gamma_sq");
      if (has_g) {
        c.gamma = e.at("gamma").get<double>();
      } else {
        const double g2 = e.at("gamma_sq").get<double>();
        if (!(g2 >= 0.0)) throw Error(Errc::Validation, "gamma_sq must be nonnegative");
        c.gamma = std::sqrt(g2);
      }
      coeffs.push_back(std::move(c));
    }
    return MixtureSpec(lambda, coeffs);
  } catch (const json::exception& e) {
    throw Error(Errc::Validation, std::string("mixture JSON schema: ") + e.what());
  }
}

MixtureSpec load_mixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Validation, "cannot open mixture file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return mixture_from_json(buf.str());
}

std::string mixture_to_json(const MixtureSpec& spec) {
  json j;
  j["r"] = spec.r();
  j["lambda"] = std::vector<double>(spec.lambda().data(), spec.lambda().data() + spec.r());
  j["gammas"] = json::array();
  for (const auto& c : spec.coeffs()) {
    std::vector<int> idx;
    for (int s : c.index) idx.push_back(s + 1);
    j["gammas"].push_back({{"degree", c.index.size()}, {"index", idx}, {"gamma", c.gamma}});
  }
  return j.dump(2);
}

XiEval eval_xi(const MixtureSpec& spec, const Vec& x, int order) {
  const int r = spec.r();
  if (x.size() != r) throw Error(Errc::Validation, "eval_xi: dimension mismatch");
  XiEval out;
  out.grad = Vec::Zero(r);
  out.hess = Mat::Zero(r, r);
  const Vec y = spec.lambda().cwiseProduct(x);
  const Vec& lam = spec.lambda();
  std::vector<int> cnt(r);
  for (const auto& c : spec.coeffs()) {
    if (c.gamma == 0.0) continue;
    std::fill(cnt.begin(), cnt.end(), 0);
    for (int s : c.index) ++cnt[s];
    const double w = orbit_size(c.index) * c.gamma * c.gamma;
    double mono = w;
    for (int s = 0; s < r; ++s) mono *= ipow(y[s], cnt[s]);
    out.value += mono;
    if (order < 1) continue;
    for (int s = 0; s < r; ++s) {
      if (cnt[s] == 0) continue;
      double g = w * cnt[s] * lam[s] * ipow(y[s], cnt[s] - 1);
      for (int t = 0; t < r; ++t)
        if (t != s) g *= ipow(y[t], cnt[t]);
      out.grad[s] += g;
      if (order < 2) continue;
      for (int t = 0; t < r; ++t) {
        double h;
        if (t == s) {
          if (cnt[s] < 2) continue;
          h = w * cnt[s] * (cnt[s] - 1) * lam[s] * lam[s] * ipow(y[s], cnt[s] - 2);
          for (int q = 0; q < r; ++q)
            if (q != s) h *= ipow(y[q], cnt[q]);
        } else {
          if (cnt[t] == 0) continue;
          h = w * cnt[s] * cnt[t] * lam[s] * lam[t] * ipow(y[s], cnt[s] - 1) *
              ipow(y[t], cnt[t] - 1);
          for (int q = 0; q < r; ++q)
            if (q != s && q != t) h *= ipow(y[q], cnt[q]);
        }
        out.hess(s, t) += h;
      }
    }
  }
  return out;
}

MixtureStats stats_from_derivatives(const Vec& lambda, double xi_one, const Vec& xi_prime,
                                    const Mat& xi_dprime, const Vec& gamma1) {
  MixtureStats st;
  st.r = static_cast<int>(lambda.size());
  st.lambda = lambda;
  st.xi_one = xi_one;
  st.xi_prime = xi_prime;
  st.xi_dprime = 0.5 * (xi_dprime + xi_dprime.transpose());
  st.xi_species = xi_prime.cwiseQuotient(lambda);
  st.A = Mat(xi_prime.asDiagonal()) + st.xi_dprime;
  st.gamma1 = gamma1.size() == st.r ? gamma1 : Vec(Vec::Zero(st.r));
  return st;
}

MixtureStats stats(const MixtureSpec& spec) {
  const XiEval e = eval_xi(spec, Vec::Ones(spec.r()), 2);
  return stats_from_derivatives(spec.lambda(), e.value, e.grad, e.hess, spec.gamma1());
}

const char* solvability_name(Solvability s) {
  switch (s) {
    case Solvability::StrictlySuper: return "strictly_super_solvable";
    case Solvability::Solvable: return "solvable";
    case Solvability::StrictlySub: return "strictly_sub_solvable";
  }
  return "unknown";
}

SolvabilityReport classify_solvability(const MixtureStats& st, double tol) {
  if (!(tol > 0.0)) throw Error(Errc::Validation, "tolerance must be positive");
  const Mat D = Mat(st.xi_prime.asDiagonal()) - st.xi_dprime;
  Eigen::SelfAdjointEigenSolver<Mat> es(D, Eigen::EigenvaluesOnly);
  SolvabilityReport rep;
  rep.min_eig = es.eigenvalues().minCoeff();
  rep.tol = tol;
  if (rep.min_eig > tol)
    rep.label = Solvability::StrictlySuper;
  else if (rep.min_eig < -tol)
    rep.label = Solvability::StrictlySub;
  else
    rep.label = Solvability::Solvable;
  return rep;
}

CriticalPrediction ideal_stats(const MixtureStats& st, const Signs& delta) {
  const int r = st.r;
  if (static_cast<int>(delta.size()) != r) throw Error(Errc::Validation, "sign pattern length");
  for (int d : delta)
    if (d != 1 && d != -1) throw Error(Errc::Validation, "sign pattern entries must be +-1");
  for (int s = 0; s < r; ++s)
    if (!(st.xi_prime[s] > 0.0)) throw Error(Errc::Validation, "xi'_s must be positive");
  CriticalPrediction p;
  p.delta = delta;
  p.overlap = Vec(r);
  p.radial = Vec(r);
  p.u = Vec(r);
  for (int s = 0; s < r; ++s) {
    const double sp = std::sqrt(st.xi_prime[s]);
    p.energy += delta[s] * std::sqrt(st.lambda[s] * st.xi_prime[s]);
    p.overlap[s] = delta[s] * st.gamma1[s] * std::sqrt(st.lambda[s]) / sp;
    double x = delta[s] * sp;
    for (int t = 0; t < r; ++t)
      x += delta[t] * std::sqrt(st.lambda[t] / st.lambda[s]) * st.xi_dprime(s, t) /
           std::sqrt(st.xi_prime[t]);
    p.radial[s] = x;
    p.u[s] = -delta[s] / std::sqrt(st.xi_species[s]);
  }
  p.v = -st.A * p.u;
  return p;
}

std::vector<CriticalPrediction> all_predictions(const MixtureStats& st) {
  std::vector<CriticalPrediction> out;
  for (const auto& d : all_sign_patterns(st.r)) out.push_back(ideal_stats(st, d));
  return out;
}

std::vector<Vec> recursion_radii(const MixtureSpec& spec, int k_max) {
  if (k_max < 0) throw Error(Errc::Validation, "k_max must be nonnegative");
  const Vec g1 = eval_xi(spec, Vec::Ones(spec.r()), 1).grad;
  std::vector<Vec> R;
  R.push_back(Vec::Zero(spec.r()));
  for (int k = 0; k < k_max; ++k) {
    Vec next = eval_xi(spec, R.back(), 1).grad.cwiseQuotient(g1);
    R.push_back(next.cwiseMin(1.0));
  }
  return R;
}

BandMixture::BandMixture(const MixtureSpec& spec, const std::vector<Vec>& radii, int k)
    : spec_(spec) {
  if (k < 1 || k >= static_cast<int>(radii.size()))
    throw Error(Errc::Validation, "band index outside supplied radii");
  R_k_ = radii[k];
  const Vec& R_prev = radii[k - 1];
  for (int s = 0; s < spec.r(); ++s) {
    if (R_k_[s] >= 1.0) throw Error(Errc::Validation, "band radius must be below 1");
    if (R_prev[s] < 0.0 || R_prev[s] > R_k_[s] + 1e-15)
      throw Error(Errc::Validation, "radii must satisfy 0 <= R_prev <= R_k");
  }
  grad_prev_ = eval_xi(spec, R_prev, 1).grad;
  constant_ = 0.0;
  for (int i = 1; i < k; ++i) {
    const Vec gi = eval_xi(spec, radii[i], 1).grad;
    const Vec gim = eval_xi(spec, radii[i - 1], 1).grad;
    constant_ += (gi - gim).dot(radii[i]);
  }
  const XiEval at_one = eval(Vec::Ones(spec.r()), 2);
  grad_one_ = at_one.grad;
  hess_one_ = at_one.hess;
}

XiEval BandMixture::eval(const Vec& x, int order) const {
  const Vec one_minus = Vec::Ones(spec_.r()) - R_k_;
  const Vec y = one_minus.cwiseProduct(x) + R_k_;
  XiEval base = eval_xi(spec_, y, order);
  XiEval out;
  out.value = base.value - grad_prev_.dot(y) + constant_;
  out.grad = one_minus.cwiseProduct(base.grad - grad_prev_);
  out.hess = one_minus.asDiagonal() * base.hess * one_minus.asDiagonal();
  return out;
}

MixtureStats BandMixture::endpoint_stats() const {
  const XiEval e = eval(Vec::Ones(spec_.r()), 2);
  return stats_from_derivatives(spec_.lambda(), e.value, e.grad, e.hess);
}

BandMixture band_mixture(const MixtureSpec& spec, const std::vector<Vec>& radii, int k) {
  return BandMixture(spec, radii, k);
}

Vec v_star(const MixtureStats& st, const Vec& phi_prime) {
  const int r = st.r;
  if (phi_prime.size() != r) throw Error(Errc::Validation, "phi' dimension mismatch");
  if ((phi_prime.array() <= 0.0).any()) throw Error(Errc::Validation, "phi' must be positive");
  if (std::abs(st.lambda.dot(phi_prime) - 1.0) > 1e-9)
    throw Error(Errc::Validation, "<lambda, phi'> must equal 1");
  Vec f(r);
  for (int s = 0; s < r; ++s) {
    const double rate = st.xi_dprime.row(s).dot(phi_prime) / st.lambda[s];
    if (!(rate > 0.0)) throw Error(Errc::NegativeRadicand, "v_star radicand not positive");
    f[s] = std::sqrt(phi_prime[s] / rate);
  }
  Vec v(r);
  for (int s = 0; s < r; ++s) v[s] = st.lambda[s] / f[s] + st.xi_dprime.row(s).dot(f);
  return v;
}

}  // namespace glassland
