#include "glassland/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "glassland/parallel.hpp"
#include "json.hpp"

namespace glassland {

Partition::Partition(std::vector<int> sz) : sizes(std::move(sz)) {
  N = 0;
  for (int n : sizes) {
    offsets.push_back(N);
    N += n;
  }
  species_of.resize(N);
  for (int s = 0; s < r(); ++s)
    for (int i = 0; i < sizes[s]; ++i) species_of[offsets[s] + i] = s;
}

Vec Partition::lambda_N() const {
  Vec out(r());
  for (int s = 0; s < r(); ++s) out[s] = static_cast<double>(sizes[s]) / N;
  return out;
}

Vec Partition::lambda_circ() const {
  Vec out(r());
  for (int s = 0; s < r(); ++s) out[s] = static_cast<double>(sizes[s] - 1) / (N - r());
  return out;
}

void tensor_row(std::uint64_t seed, int k, std::uint64_t row, int len, double* out) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(row),
                    static_cast<std::uint32_t>(row >> 32)};
  std::mt19937_64 eng(seq);
  std::normal_distribution<double> nd;
  for (int i = 0; i < len; ++i) out[i] = nd(eng);
}

namespace {

bool degree_present(const MixtureSpec& m, int k) {
  for (const auto& c : m.coeffs())
    if (static_cast<int>(c.index.size()) == k && c.gamma > 0.0) return true;
  return false;
}

std::size_t ipow_size(int N, int k) {
  std::size_t out = 1;
  for (int i = 0; i < k; ++i) out *= static_cast<std::size_t>(N);
  return out;
}

void check_limits(const MixtureSpec& mixture, int N) {
  if (mixture.max_degree() > HamiltonianInstance::kMaxDegree)
    throw Error(Errc::DegreeTooHigh, "dense sampling supports degrees up to 3");
  if (degree_present(mixture, 3) && N > HamiltonianInstance::kMaxCubicN)
    throw Error(Errc::TooLarge, "degree-3 tensors are limited to N <= 400");
}

}  // namespace

Vec HamiltonianInstance::g1() const {
  if (raw_[0].empty()) return Vec::Zero(N());
  return Eigen::Map<const Vec>(raw_[0].data(), N());
}

void HamiltonianInstance::build() {
  const int N = part_.N;
  const int r = part_.r();
  const auto& sp = part_.species_of;
  c1_ = Vec::Zero(N);
  if (has_degree(1))
    for (int i = 0; i < N; ++i) c1_[i] = mixture_.gamma({sp[i]}) * raw_[0][i];

  c2_.resize(0, 0);
  if (has_degree(2)) {
    Mat g2(r, r);
    for (int s = 0; s < r; ++s)
      for (int t = 0; t < r; ++t) g2(s, t) = mixture_.gamma({s, t});
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    Mat T(N, N);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) T(a, b) = scale * g2(sp[a], sp[b]) * raw_[1][static_cast<std::size_t>(a) * N + b];
    c2_ = 0.5 * (T + T.transpose());
  }

  c3_.clear();
  row3_.clear();
  if (has_degree(3)) {
    std::vector<double> g3(r * r * r);
    for (int s = 0; s < r; ++s)
      for (int t = 0; t < r; ++t)
        for (int u = 0; u < r; ++u) g3[(s * r + t) * r + u] = mixture_.gamma({s, t, u});
    row3_.assign(static_cast<std::size_t>(N) * N, 0);
    std::size_t off = 0;
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) {
        row3_[static_cast<std::size_t>(i) * N + j] = off;
        off += N - j;
      }
    c3_.assign(off, 0.0);
    const double scale = 1.0 / N;
    const double* G = raw_[2].data();
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        const double* row = G + (static_cast<std::size_t>(a) * N + b) * N;
        for (int c = 0; c < N; ++c) {
          int idx[3] = {a, b, c};
          std::sort(idx, idx + 3);
          c3_[row3_[static_cast<std::size_t>(idx[0]) * N + idx[1]] + (idx[2] - idx[1])] +=
              scale * g3[(sp[a] * r + sp[b]) * r + sp[c]] * row[c];
        }
      }
  }
}

HamiltonianInstance sample(const MixtureSpec& mixture, int N, std::uint64_t seed) {
  check_limits(mixture, N);
  HamiltonianInstance h;
  h.mixture_ = mixture;
  h.part_ = Partition(species_sizes(mixture.lambda(), N));
  h.seed_ = seed;
  for (int k = 1; k <= 3; ++k) {
    if (!degree_present(mixture, k)) continue;
    const std::size_t rows = ipow_size(N, k - 1);
    auto& buf = h.raw_[k - 1];
    buf.resize(rows * N);
    parallel_for(rows, [&](std::size_t row) { tensor_row(seed, k, row, N, buf.data() + row * N); });
  }
  h.build();
  return h;
}

double HamiltonianInstance::evaluate(const Vec& sigma, Vec* grad, Mat* hess, double t) const {
  const int N = part_.N;
  if (sigma.size() != N) throw Error(Errc::Validation, "state dimension does not match N");
  double value = c1_.dot(sigma);
  if (grad) *grad = c1_;
  if (hess) *hess = Mat::Zero(N, N);
  if (c2_.size() > 0) {
    const Vec c2s = c2_ * sigma;
    value += t * sigma.dot(c2s);
    if (grad) *grad += 2.0 * t * c2s;
    if (hess) *hess += 2.0 * t * c2_;
  }
  if (!c3_.empty()) {
    double v3 = 0.0;
    Vec g3 = Vec::Zero(N);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> A;
    if (hess) A = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(N, N);
    for (int i = 0; i < N; ++i) {
      const double si = sigma[i];
      for (int j = i; j < N; ++j) {
        const double sj = sigma[j];
        const int len = N - j;
        const double* __restrict row = c3_.data() + row3_[static_cast<std::size_t>(i) * N + j];
        const double* __restrict x = sigma.data() + j;
        double* __restrict g = g3.data() + j;
        const double sij = si * sj;
        double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
        int k = 0;
        if (grad) {
          for (; k + 4 <= len; k += 4) {
            d0 += row[k] * x[k];
            d1 += row[k + 1] * x[k + 1];
            d2 += row[k + 2] * x[k + 2];
            d3 += row[k + 3] * x[k + 3];
            g[k] += sij * row[k];
            g[k + 1] += sij * row[k + 1];
            g[k + 2] += sij * row[k + 2];
            g[k + 3] += sij * row[k + 3];
          }
          for (; k < len; ++k) {
            d0 += row[k] * x[k];
            g[k] += sij * row[k];
          }
        } else {
          for (; k + 4 <= len; k += 4) {
            d0 += row[k] * x[k];
            d1 += row[k + 1] * x[k + 1];
            d2 += row[k + 2] * x[k + 2];
            d3 += row[k + 3] * x[k + 3];
          }
          for (; k < len; ++k) d0 += row[k] * x[k];
        }
        const double dot = (d0 + d1) + (d2 + d3);
        v3 += sij * dot;
        g3[i] += sj * dot;
        g3[j] += si * dot;
        if (hess) {
          Eigen::Map<const Vec> rv(row, len);
          A(i, j) += dot;
          A.row(i).segment(j, len) += sj * rv.transpose();
          A.row(j).segment(j, len) += si * rv.transpose();
        }
      }
    }
    value += t * v3;
    if (grad) *grad += t * g3;
    if (hess) *hess += t * (A + A.transpose());
  }
  return value;
}

void save_instance(const HamiltonianInstance& h, const std::string& path) {
  nlohmann::json head;
  head["format"] = "glassland-hamiltonian";
  head["version"] = 1;
  head["mixture"] = nlohmann::json::parse(mixture_to_json(h.mixture()));
  head["N"] = h.N();
  head["sizes"] = h.partition().sizes;
  head["seed"] = h.seed();
  nlohmann::json blobs = nlohmann::json::array();
  for (int k = 1; k <= 3; ++k)
    if (h.has_degree(k)) blobs.push_back({{"degree", k}, {"count", h.raw(k).size()}});
  head["tensors"] = blobs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Validation, "cannot write " + path);
  out << head.dump() << '\n';
  for (int k = 1; k <= 3; ++k)
    if (h.has_degree(k))
      out.write(reinterpret_cast<const char*>(h.raw(k).data()),
                static_cast<std::streamsize>(h.raw(k).size() * sizeof(double)));
  if (!out) throw Error(Errc::Validation, "failed writing " + path);
}

HamiltonianInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Validation, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  nlohmann::json head;
  try {
    head = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    throw Error(Errc::Validation, std::string("bad instance header: ") + e.what());
  }
  if (head.value("format", "") != "glassland-hamiltonian")
    throw Error(Errc::Validation, "not a glassland instance file");
  HamiltonianInstance h;
  h.mixture_ = mixture_from_json(head["mixture"].dump());
  h.part_ = Partition(head["sizes"].get<std::vector<int>>());
  if (h.part_.N != head["N"].get<int>()) throw Error(Errc::Validation, "partition does not sum to N");
  check_limits(h.mixture_, h.part_.N);
  h.seed_ = head["seed"].get<std::uint64_t>();
  for (const auto& b : head["tensors"]) {
    const int k = b["degree"].get<int>();
    const std::size_t count = b["count"].get<std::size_t>();
    if (k < 1 || k > 3 || count != ipow_size(h.part_.N, k))
      throw Error(Errc::Validation, "tensor blob has the wrong shape");
    h.raw_[k - 1].resize(count);
    in.read(reinterpret_cast<char*>(h.raw_[k - 1].data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw Error(Errc::Validation, "truncated tensor blob");
  }
  for (int k = 1; k <= 3; ++k)
    if (degree_present(h.mixture_, k) != h.has_degree(k))
      throw Error(Errc::Validation, "tensor blobs do not match the mixture degrees");
  h.build();
  return h;
}

void check_on_manifold(const Partition& part, const Vec& sigma, double rel_tol) {
  if (sigma.size() != part.N) throw Error(Errc::OffManifold, "state has the wrong dimension");
  for (int s = 0; s < part.r(); ++s) {
    const double n2 = sigma.segment(part.offsets[s], part.sizes[s]).squaredNorm();
    if (std::abs(n2 - part.sizes[s]) > rel_tol * part.sizes[s])
      throw Error(Errc::OffManifold, "species " + std::to_string(s) + " is off its sphere");
  }
}

Mat tangent_basis(const Partition& part, const Vec& sigma) {
  const int N = part.N, r = part.r();
  Mat B = Mat::Zero(N, N - r);
  int col = 0;
  for (int s = 0; s < r; ++s) {
    const int n = part.sizes[s], off = part.offsets[s];
    Vec u = sigma.segment(off, n);
    const double nu = u.norm();
    if (nu == 0.0) throw Error(Errc::OffManifold, "zero species block");
    u /= nu;
    Vec w = -u;
    if (u[0] >= 0.0) w = u;
    w[0] += 1.0;
    const double c = 2.0 / w.squaredNorm();
    for (int k = 1; k < n; ++k) {
      auto dst = B.col(col++).segment(off, n);
      dst = -c * w[k] * w;
      dst[k] += 1.0;
    }
  }
  return B;
}

LocalData local_data(const HamiltonianInstance& h, const Vec& sigma, bool want_hessian, double t) {
  const Partition& part = h.partition();
  check_on_manifold(part, sigma);
  const int r = part.r();
  LocalData d;
  Mat H;
  d.value = h.evaluate(sigma, &d.egrad, want_hessian ? &H : nullptr, t);
  d.rgrad = d.egrad;
  d.radial = Vec(r);
  d.curvature = Vec(r);
  const double sqN = std::sqrt(static_cast<double>(part.N));
  for (int s = 0; s < r; ++s) {
    const int n = part.sizes[s], off = part.offsets[s];
    const double dot = sigma.segment(off, n).dot(d.egrad.segment(off, n));
    d.curvature[s] = dot / n;
    d.radial[s] = dot / (std::sqrt(static_cast<double>(n)) * sqN);
    d.rgrad.segment(off, n) -= d.curvature[s] * sigma.segment(off, n);
  }
  if (want_hessian) {
    const Mat B = tangent_basis(part, sigma);
    d.rhess = B.transpose() * H * B;
    int col = 0;
    for (int s = 0; s < r; ++s)
      for (int k = 1; k < part.sizes[s]; ++k, ++col) d.rhess(col, col) -= d.curvature[s];
    d.rhess = 0.5 * (d.rhess + d.rhess.transpose()).eval();
  }
  return d;
}

Vec retract(const Partition& part, const Vec& x) {
  Vec out = x;
  for (int s = 0; s < part.r(); ++s) {
    auto seg = out.segment(part.offsets[s], part.sizes[s]);
    const double n = seg.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw Error(Errc::OffManifold, "cannot retract a zero block");
    seg *= std::sqrt(static_cast<double>(part.sizes[s])) / n;
  }
  return out;
}

Vec random_point(const Partition& part, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec x(part.N);
  for (int i = 0; i < part.N; ++i) x[i] = nd(rng);
  return retract(part, x);
}

Vec north_pole(const Partition& part) {
  Vec x = Vec::Zero(part.N);
  for (int s = 0; s < part.r(); ++s) x[part.offsets[s]] = std::sqrt(static_cast<double>(part.sizes[s]));
  return x;
}

Vec overlap(const Vec& sigma, const Vec& rho, const Partition& part) {
  if (sigma.size() != part.N || rho.size() != part.N)
    throw Error(Errc::Validation, "overlap: dimension mismatch");
  Vec R(part.r());
  for (int s = 0; s < part.r(); ++s)
    R[s] = sigma.segment(part.offsets[s], part.sizes[s]).dot(rho.segment(part.offsets[s], part.sizes[s])) /
           part.sizes[s];
  return R;
}

NorthPoleFiber north_pole_fiber(const MixtureSpec& mixture, int N, std::uint64_t seed) {
  check_limits(mixture, N);
  const Partition part(species_sizes(mixture.lambda(), N));
  const int r = part.r();
  NorthPoleFiber f;
  for (int s = 0; s < r; ++s) {
    f.indices.push_back(part.offsets[s]);
    f.indices.push_back(part.offsets[s] + 1);
  }
  const int K = static_cast<int>(f.indices.size());
  const int len = *std::max_element(f.indices.begin(), f.indices.end()) + 1;
  Vec sig = Vec::Zero(K);
  std::vector<int> spk(K);
  for (int a = 0; a < K; ++a) {
    spk[a] = part.species_of[f.indices[a]];
    if (f.indices[a] == part.offsets[spk[a]]) sig[a] = std::sqrt(static_cast<double>(part.sizes[spk[a]]));
  }
  f.grad = Vec::Zero(K);
  f.g1 = Vec::Zero(K);
  std::vector<double> row(len);

  if (degree_present(mixture, 1)) {
    tensor_row(seed, 1, 0, len, row.data());
    for (int a = 0; a < K; ++a) {
      const double c = mixture.gamma({spk[a]}) * row[f.indices[a]];
      f.g1[a] = row[f.indices[a]];
      f.value += c * sig[a];
      f.grad[a] += c;
    }
  }
  if (degree_present(mixture, 2)) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (int a = 0; a < K; ++a) {
      tensor_row(seed, 2, f.indices[a], len, row.data());
      for (int b = 0; b < K; ++b) {
        const double c = scale * mixture.gamma({spk[a], spk[b]}) * row[f.indices[b]];
        f.value += c * sig[a] * sig[b];
        f.grad[a] += c * sig[b];
        f.grad[b] += c * sig[a];
      }
    }
  }
  if (degree_present(mixture, 3)) {
    const double scale = 1.0 / N;
    for (int a = 0; a < K; ++a)
      for (int b = 0; b < K; ++b) {
        tensor_row(seed, 3, static_cast<std::uint64_t>(f.indices[a]) * N + f.indices[b], len, row.data());
        for (int c = 0; c < K; ++c) {
          const double w = scale * mixture.gamma({spk[a], spk[b], spk[c]}) * row[f.indices[c]];
          f.value += w * sig[a] * sig[b] * sig[c];
          f.grad[a] += w * sig[b] * sig[c];
          f.grad[b] += w * sig[a] * sig[c];
          f.grad[c] += w * sig[a] * sig[b];
        }
      }
  }
  return f;
}

CovarianceReport covariance_selftest(const MixtureSpec& mixture, int N, int trials, std::uint64_t seed) {
  if (trials < 1000) throw Error(Errc::Validation, "covariance self-test needs at least 1000 trials");
  check_limits(mixture, N);
  const Partition part(species_sizes(mixture.lambda(), N));
  const int r = part.r();
  const Vec lam = part.lambda_N();
  const MixtureStats st = stats(mixture.with_lambda(lam));
  const double sqN = std::sqrt(static_cast<double>(N));

  // Per trial: H, R_s, rad_s, tangential derivative of species s.
  const int width = 1 + 3 * r;
  std::vector<double> rows(static_cast<std::size_t>(trials) * width);
  parallel_for(trials, [&](std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), 0x5eedu};
    std::mt19937_64 eng(seq);
    const NorthPoleFiber f = north_pole_fiber(mixture, N, eng());
    double* out = rows.data() + t * width;
    out[0] = f.value;
    for (int s = 0; s < r; ++s) {
      out[1 + s] = f.g1[2 * s] / std::sqrt(static_cast<double>(part.sizes[s]));
      out[1 + r + s] = f.grad[2 * s] / sqN;
      out[1 + 2 * r + s] = f.grad[2 * s + 1];
    }
  });

  CovarianceReport rep;
  rep.N = N;
  rep.trials = trials;
  auto col = [&](int c, std::size_t t) { return rows[t * width + c]; };
  auto check = [&](const std::string& name, int a, int b, double scale, double analytic) {
    double mean = 0.0, m2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      const double p = col(a, t) * col(b, t) * scale;
      mean += p;
      m2 += p * p;
    }
    mean /= trials;
    const double var = std::max(m2 / trials - mean * mean, 0.0);
    const double se = std::sqrt(var / trials);
    CovarianceCheck c{name, analytic, mean, se > 0 ? (mean - analytic) / se : 0.0};
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(c.z));
    rep.checks.push_back(c);
  };
  const int H = 0;
  auto R = [&](int s) { return 1 + s; };
  auto rad = [&](int s) { return 1 + r + s; };
  auto tan = [&](int s) { return 1 + 2 * r + s; };
  const std::string sfx[] = {"1", "2", "3", "4", "5", "6", "7", "8"};
  auto nm = [&](int s) { return s < 8 ? sfx[s] : std::to_string(s + 1); };

  check("E[H^2]/N", H, H, 1.0 / N, st.xi_one);
  for (int s = 0; s < r; ++s) {
    const double g = st.gamma1.size() ? st.gamma1[s] : 0.0;
    check("E[R_" + nm(s) + " H]", R(s), H, 1.0, g);
    check("E[H rad_" + nm(s) + "]", H, rad(s), 1.0, st.xi_prime[s] / std::sqrt(lam[s]));
    check("E[tan_" + nm(s) + "^2]", tan(s), tan(s), 1.0, st.xi_species[s]);
    check("E[tan_" + nm(s) + " H]", tan(s), H, 1.0, 0.0);
    for (int u = 0; u < r; ++u) {
      const std::string p = nm(s) + "," + nm(u);
      if (u >= s) {
        check("N E[R_" + nm(s) + " R_" + nm(u) + "]", R(s), R(u), N, s == u ? 1.0 / lam[s] : 0.0);
        check("N E[rad_" + nm(s) + " rad_" + nm(u) + "]", rad(s), rad(u), N,
              st.A(s, u) / std::sqrt(lam[s] * lam[u]));
      }
      check("N E[R_" + nm(s) + " rad_" + nm(u) + "]", R(s), rad(u), N,
            s == u ? g / std::sqrt(lam[s]) : 0.0);
      check("E[tan_" + nm(s) + " rad_" + nm(u) + "]", tan(s), rad(u), 1.0, 0.0);
      if (u > s) check("E[tan_" + p + "]", tan(s), tan(u), 1.0, 0.0);
    }
  }
  rep.energy_variance_ratio = rep.checks.front().empirical / st.xi_one;
  rep.pass = rep.max_abs_z <= 4.0 && std::abs(rep.energy_variance_ratio - 1.0) <= 0.05;
  return rep;
}

}  // namespace glassland
