#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "acceptance.hpp"
#include "glassland/complexity.hpp"
#include "glassland/dynamics.hpp"
#include "glassland/dyson.hpp"
#include "glassland/hamiltonian.hpp"
#include "glassland/landscape.hpp"
#include "glassland/mixture.hpp"
#include "glassland/parallel.hpp"
#include "glassland/singlespecies.hpp"

using namespace glassland;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string mixture;
  std::string output;
  std::string format = "json";
  bool no_meta = false;
  int threads = 0;
  std::string command;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), v.size()); }

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

class Output {
 public:
  explicit Output(const Common& c) : c_(c) {}

  void csv(const std::string& body) {
    std::string text;
    if (!c_.no_meta) text = "# glassland " + std::string(kVersion) + " " + c_.command + " " + timestamp() + "\n";
    write(text + body);
  }

  void json_doc(json doc) {
    if (!c_.no_meta) doc["meta"] = {{"tool", "glassland"}, {"version", kVersion}, {"command", c_.command},
                                    {"timestamp", timestamp()}};
    write(doc.dump(2) + "\n");
  }

 private:
  void write(const std::string& text) {
    if (c_.output.empty() || c_.output == "-") {
      std::cout << text;
      return;
    }
    std::ofstream f(c_.output);
    if (!f) throw Error(Errc::Validation, "cannot open output file " + c_.output);
    f << text;
  }
  const Common& c_;
};

MixtureSpec need_mixture(const Common& c) {
  if (c.mixture.empty()) throw Error(Errc::Validation, "--mixture is required");
  return load_mixture(c.mixture);
}

Vec need_x(const std::vector<double>& x, int r) {
  if (static_cast<int>(x.size()) != r) throw Error(Errc::Validation, "--x needs one value per species");
  return to_vec(x);
}

Signs parse_signs(const std::vector<int>& d, int r) {
  if (static_cast<int>(d.size()) != r) throw Error(Errc::Validation, "--delta needs one sign per species");
  for (int s : d)
    if (s != 1 && s != -1) throw Error(Errc::Validation, "--delta entries must be +1 or -1");
  return d;
}

json critical_json(const CriticalPointResult& p) {
  json j = {{"energy", p.energy},         {"radial", to_json(p.radial)},   {"overlap", to_json(p.g1_overlap)},
            {"index", p.index},           {"grad_norm", p.grad_norm},      {"min_abs_eig", p.min_abs_eig},
            {"ill_conditioned", p.ill_conditioned}};
  if (p.delta) j["delta"] = *p.delta;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landscape and spectral tools for multi-species spherical spin glasses"};
  app.require_subcommand(1);
  Common c;
  app.add_flag("--no-meta", c.no_meta, "Omit the timestamp header line");
  app.add_option("--threads", c.threads, "Worker threads (GLASSLAND_THREADS overrides)")->check(CLI::NonNegativeNumber);

  auto with_mixture = [&](CLI::App* sub, bool required = true) {
    auto* o = sub->add_option("-m,--mixture", c.mixture, "Mixture JSON file");
    if (required) o->required();
    sub->add_option("-o,--output", c.output, "Output file (default stdout)");
  };

  std::vector<double> x;
  std::vector<double> range{-6.0, 6.0};
  std::vector<int> delta;
  int n = 301, points = 2001, N = 200, finite_N = 0, steps = 40, k_max = 20, starts = 50;
  std::uint64_t seed = 1;
  double eps = 0.05, classify_eps = 0.15, beta = 30.0, dt = 5e-4, T = 30.0, record_every = 0.1;
  std::string mode = "closed", targets = "top", spectra_path;
  std::vector<int> criteria;

  auto* classify = app.add_subcommand("classify", "Solvability label and min eigenvalue");
  with_mixture(classify);
  auto* predict = app.add_subcommand("predict", "Ideal critical-point statistics per sign pattern");
  with_mixture(predict);
  predict->add_option("--format", c.format)->check(CLI::IsMember({"csv", "json"}));
  auto* density = app.add_subcommand("dyson-density", "Spectral density of the Dyson equation at x");
  with_mixture(density);
  density->add_option("--x", x)->delimiter(',')->required();
  density->add_option("--points", points)->check(CLI::Range(11, 1000000));
  density->add_option("--finite-N", finite_N, "Use the finite-N weights for this N");
  density->add_option("--format", c.format)->check(CLI::IsMember({"csv", "json"}));
  auto* psi_cmd = app.add_subcommand("psi", "Log-determinant functional at x");
  with_mixture(psi_cmd);
  psi_cmd->add_option("--x", x)->delimiter(',')->required();
  psi_cmd->add_option("--mode", mode)->check(CLI::IsMember({"closed", "quadrature"}));
  auto* scan_cmd = app.add_subcommand("complexity-scan", "Complexity on a grid of radial derivatives");
  with_mixture(scan_cmd);
  scan_cmd->add_option("--range", range)->expected(2);
  scan_cmd->add_option("--n", n)->check(CLI::Range(2, 100000));
  auto* stationary = app.add_subcommand("stationary", "Stationary points of the complexity");
  with_mixture(stationary);
  auto* einf = app.add_subcommand("einf", "Single-species energy thresholds and ellipse data");
  with_mixture(einf);
  auto* sample_cmd = app.add_subcommand("sample-spectrum", "Eigenvalues of a sampled block matrix at x");
  with_mixture(sample_cmd);
  sample_cmd->add_option("--x", x)->delimiter(',')->required();
  sample_cmd->add_option("--N", N)->check(CLI::Range(4, 20000));
  sample_cmd->add_option("--seed", seed);
  sample_cmd->add_option("--format", c.format)->check(CLI::IsMember({"csv", "json"}));
  auto* follow = app.add_subcommand("follow", "Homotopy-followed critical points of a sampled instance");
  with_mixture(follow);
  follow->add_option("--N", N)->check(CLI::Range(4, HamiltonianInstance::kMaxCubicN));
  follow->add_option("--seed", seed);
  follow->add_option("--steps", steps)->check(CLI::Range(1, 100000));
  follow->add_option("--spectra", spectra_path, "Write Hessian spectra as CSV");
  auto* bands = app.add_subcommand("bands", "Recursive band construction");
  with_mixture(bands);
  bands->add_option("--N", N)->check(CLI::Range(4, HamiltonianInstance::kMaxCubicN));
  bands->add_option("--seed", seed);
  bands->add_option("--delta", delta)->delimiter(',')->required();
  bands->add_option("--k", k_max)->check(CLI::Range(1, 30));
  auto* survey = app.add_subcommand("survey", "Gradient-norm minimization from random starts");
  with_mixture(survey);
  survey->add_option("--N", N)->check(CLI::Range(4, HamiltonianInstance::kMaxCubicN));
  survey->add_option("--seed", seed);
  survey->add_option("--starts", starts)->check(CLI::Range(1, 100000));
  survey->add_option("--eps", eps)->check(CLI::NonNegativeNumber);
  survey->add_option("--classify-eps", classify_eps)->check(CLI::PositiveNumber);
  auto* langevin = app.add_subcommand("langevin", "Langevin trajectory from a random start");
  with_mixture(langevin);
  langevin->add_option("--N", N)->check(CLI::Range(4, HamiltonianInstance::kMaxCubicN));
  langevin->add_option("--seed", seed);
  langevin->add_option("--beta", beta);
  langevin->add_option("--dt", dt);
  langevin->add_option("--T", T);
  langevin->add_option("--record-every", record_every);
  langevin->add_option("--targets", targets)->check(CLI::IsMember({"none", "top", "all"}));
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
  selftest->add_option("--criteria", criteria, "Subset of criterion ids")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (const char* env = std::getenv("GLASSLAND_THREADS")) c.threads = std::atoi(env);
  if (c.threads > 0) set_thread_count(c.threads);
  c.command = app.get_subcommands().front()->get_name();
  Output out(c);

  try {
    if (*classify) {
      const auto rep = classify_solvability(stats(need_mixture(c)));
      out.json_doc({{"label", solvability_name(rep.label)}, {"min_eig", rep.min_eig}});
    } else if (*predict) {
      const MixtureStats st = stats(need_mixture(c));
      const auto preds = all_predictions(st);
      if (c.format == "csv") {
        std::ostringstream os;
        os << "delta,energy";
        for (int s = 0; s < st.r; ++s) os << ",x_" << s + 1;
        for (int s = 0; s < st.r; ++s) os << ",R_" << s + 1;
        os << ",F\n";
        for (const auto& p : preds) {
          os << signs_to_string(p.delta) << ',' << num(p.energy);
          for (int s = 0; s < st.r; ++s) os << ',' << num(p.radial[s]);
          for (int s = 0; s < st.r; ++s) os << ',' << num(p.overlap[s]);
          os << ',' << num(F_value(st, p.radial)) << '\n';
        }
        out.csv(os.str());
      } else {
        json rows = json::array();
        for (const auto& p : preds)
          rows.push_back({{"delta", p.delta},
                          {"energy", p.energy},
                          {"radial", to_json(p.radial)},
                          {"overlap", to_json(p.overlap)},
                          {"F", F_value(st, p.radial)}});
        out.json_doc({{"predictions", rows}});
      }
    } else if (*density) {
      const MixtureStats st = stats(need_mixture(c));
      const Vec xv = need_x(x, st.r);
      GridSpec grid;
      grid.points = points;
      const DysonSystem sys = finite_N > 0 ? finite_system(st, xv, species_sizes(st.lambda, finite_N))
                                           : asymptotic_system(st, xv);
      const SpectralMeasure mu = spectral_measure(sys, grid);
      if (c.format == "csv") {
        std::ostringstream os;
        os << "gamma,density";
        for (int s = 0; s < st.r; ++s) os << ",density_" << s + 1;
        os << '\n';
        for (int j = 0; j < mu.grid.size(); ++j) {
          os << num(mu.grid[j]) << ',' << num(mu.density[j]);
          for (int s = 0; s < st.r; ++s) os << ',' << num(mu.density_s[s][j]);
          os << '\n';
        }
        out.csv(os.str());
      } else {
        json support = json::array();
        for (const auto& [lo, hi] : mu.support) support.push_back({lo, hi});
        out.json_doc({{"support", support},
                      {"mass", to_json(mu.mass_s)},
                      {"grid", to_json(mu.grid)},
                      {"density", to_json(mu.density)}});
      }
    } else if (*psi_cmd) {
      const MixtureStats st = stats(need_mixture(c));
      const double v = psi(st, need_x(x, st.r), mode == "closed" ? PsiMode::ClosedForm : PsiMode::Quadrature);
      out.json_doc({{"psi", v}, {"mode", mode}});
    } else if (*scan_cmd) {
      const MixtureStats st = stats(need_mixture(c));
      const ScanResult sc = scan(st, {range[0], range[1], n});
      std::ostringstream os;
      for (int s = 0; s < st.r; ++s) os << "x_" << s + 1 << ',';
      os << "F,nonreal\n";
      for (std::size_t i = 0; i < sc.points.size(); ++i) {
        for (int s = 0; s < st.r; ++s) os << num(sc.points[i][s]) << ',';
        os << num(sc.F[i]) << ',' << (sc.nonreal[i] ? 1 : 0) << '\n';
      }
      out.csv(os.str());
    } else if (*stationary) {
      const MixtureStats st = stats(need_mixture(c));
      json rows = json::array();
      for (const auto& p : find_stationary_points(st)) {
        std::vector<std::string> pattern;
        for (auto t : p.pattern) pattern.push_back(pattern_name(t));
        rows.push_back({{"v", to_json(p.v)},
                        {"pattern", pattern},
                        {"F", p.F},
                        {"global_max", p.is_global_max},
                        {"residual", p.residual}});
      }
      out.json_doc({{"stationary_points", rows}});
    } else if (*einf) {
      const auto t = single::thresholds(need_mixture(c));
      json doc = {{"xi_prime", t.xi_prime},       {"xi_dprime", t.xi_dprime},   {"alpha_sq", t.alpha_sq},
                  {"E_inf_minus", t.E_inf_minus}, {"E_inf_plus", t.E_inf_plus},
                  {"case", single::einf_case_name(single::classify_Einf_case(t))}};
      if (!t.pure()) {
        const auto e = single::ellipse(t);
        doc["ellipse"] = {{"a_ss", e.a_ss},
                          {"a_sy", e.a_sy},
                          {"a_yy", e.a_yy},
                          {"discriminant", e.discriminant},
                          {"major_axis_angle", e.major_axis_angle},
                          {"tangent_slope_at_Eplus", e.tangent_slope_at_Eplus},
                          {"tangent_slope_at_Eminus", e.tangent_slope_at_Eminus}};
      }
      out.json_doc(doc);
    } else if (*sample_cmd) {
      const MixtureStats st = stats(need_mixture(c));
      const Vec xv = need_x(x, st.r);
      Eigen::SelfAdjointEigenSolver<Mat> es(sample_block_matrix(st, xv, N, seed), Eigen::EigenvaluesOnly);
      const Vec& ev = es.eigenvalues();
      if (c.format == "csv") {
        std::ostringstream os;
        os << "eigenvalue\n";
        for (int i = 0; i < ev.size(); ++i) os << num(ev[i]) << '\n';
        out.csv(os.str());
      } else {
        const auto mu = spectral_measure(finite_system(st, xv, species_sizes(st.lambda, N)));
        const auto rep = spectrum_compare(ev, mu);
        out.json_doc({{"N", N},
                      {"seed", seed},
                      {"w2", rep.w2},
                      {"hausdorff", rep.hausdorff},
                      {"gap_at_zero", rep.gap_at_zero},
                      {"eigenvalues", to_json(ev)}});
      }
    } else if (*follow) {
      const MixtureSpec spec = need_mixture(c);
      const HamiltonianInstance h = sample(spec, N, seed);
      const auto pts = follow_all(h, steps);
      json rows = json::array();
      for (const auto& p : pts) {
        json j = critical_json(p);
        const auto rep = spectrum_compare(p.spectrum, finite_measure(h, p.radial));
        j["gap"] = rep.gap_at_zero;
        j["w2"] = rep.w2;
        j["hausdorff"] = rep.hausdorff;
        rows.push_back(j);
      }
      if (!spectra_path.empty()) {
        std::ofstream f(spectra_path);
        if (!f) throw Error(Errc::Validation, "cannot open " + spectra_path);
        f << "delta,eigenvalue\n";
        for (const auto& p : pts)
          for (int i = 0; i < p.spectrum.size(); ++i) f << signs_to_string(*p.delta) << ',' << num(p.spectrum[i]) << '\n';
      }
      out.json_doc({{"N", N}, {"seed", seed}, {"critical_points", rows}});
    } else if (*bands) {
      const MixtureSpec spec = need_mixture(c);
      const HamiltonianInstance h = sample(spec, N, seed);
      const Signs d = parse_signs(delta, spec.r());
      const auto bs = recursive_bands(h, d, k_max);
      std::optional<CriticalPointResult> crit;
      try {
        crit = follow_critical_point(h, d);
      } catch (const Error&) {
      }
      std::ostringstream os;
      os << "k";
      for (int s = 0; s < spec.r(); ++s) os << ",R_" << s + 1;
      os << ",nesting_residual,distance\n";
      const double sqN = std::sqrt(static_cast<double>(N));
      for (std::size_t k = 1; k < bs.size(); ++k) {
        double resid = 0.0;
        const Vec step = bs[k].m - bs[k - 1].m;
        for (std::size_t j = 1; j < k; ++j) resid = std::max(resid, std::abs(step.dot(bs[j].m)));
        os << k;
        for (int s = 0; s < spec.r(); ++s) os << ',' << num(bs[k].R_k[s]);
        os << ',' << num(resid) << ',' << (crit ? num(band_distance(h, bs[k], crit->sigma) / sqN) : "nan") << '\n';
      }
      out.csv(os.str());
    } else if (*survey) {
      const MixtureSpec spec = need_mixture(c);
      const HamiltonianInstance h = sample(spec, N, seed);
      const auto preds = all_predictions(stats(spec.with_lambda(h.partition().lambda_N())));
      const auto pts = follow_all(h);
      const auto rep = survey_approx_crits(h, preds, starts, eps, seed, pts, classify_eps);
      json counts = json::object();
      const auto patterns = all_sign_patterns(spec.r());
      for (std::size_t i = 0; i < patterns.size(); ++i) counts[signs_to_string(patterns[i])] = rep.counts[i];
      out.json_doc({{"starts", rep.starts},
                    {"eps", eps},
                    {"eps_critical", rep.eps_critical},
                    {"unclassified", rep.unclassified},
                    {"counts", counts},
                    {"distinct_exact", rep.distinct_exact},
                    {"max_distance_to_followed", rep.max_distance_to_followed},
                    {"max_exact_distance_to_followed", rep.max_exact_distance_to_followed}});
    } else if (*langevin) {
      const MixtureSpec spec = need_mixture(c);
      const HamiltonianInstance h = sample(spec, N, seed);
      std::vector<Vec> tv;
      if (targets == "top") tv.push_back(follow_critical_point(h, Signs(spec.r(), 1)).sigma);
      if (targets == "all")
        for (const auto& p : follow_all(h)) tv.push_back(p.sigma);
      std::seed_seq start_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5a17u};
      std::mt19937_64 rng(start_seq);
      LangevinConfig cfg;
      cfg.beta = beta;
      cfg.dt = dt;
      cfg.T = T;
      cfg.record_every = record_every;
      cfg.seed = seed;
      out.csv(trajectory_csv(simulate(h, random_point(h.partition(), rng), cfg, tv)));
    } else if (*selftest) {
      const auto results = acceptance::run_suite(criteria, [](const acceptance::CriterionResult& r) {
        std::cout << acceptance::format_line(r) << std::endl;
      });
      return acceptance::suite_exit_code(results) == 0 ? 0 : 2;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_validation() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
