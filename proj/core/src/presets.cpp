#include "glassland/presets.hpp"

#include <cmath>

namespace glassland::presets {

namespace {
Coefficient c(std::vector<int> idx, double gamma_sq) { return {std::move(idx), std::sqrt(gamma_sq)}; }
}  // namespace

MixtureSpec linear_quadratic() {
  return MixtureSpec(Vec::Ones(1), {c({0}, 2.0), c({0, 0}, 0.5)});
}

MixtureSpec symmetric_pair() {
  Vec lam(2);
  lam << 0.5, 0.5;
  return MixtureSpec(lam, {c({0}, 5.0), c({1}, 5.0), c({0, 0}, 2.0), c({1, 1}, 2.0),
                           c({0, 1}, 1.0)});
}

MixtureSpec skewed_pair() {
  Vec lam(2);
  lam << 0.3, 0.7;
  // xi''_ss = 2 gamma_ss^2 lambda_s^2, xi''_12 = 2 gamma_12^2 lambda_1 lambda_2,
  // xi'_s = lambda_s gamma_s^2 + xi''_s1 + xi''_s2.
  return MixtureSpec(lam, {c({0}, 11.0 / 3.0), c({1}, 11.0 / 7.0), c({0, 0}, 50.0 / 9.0),
                           c({1, 1}, 50.0 / 49.0), c({0, 1}, 40.0 / 7.0)});
}

MixtureSpec cubic_pair() {
  Vec lam(2);
  lam << 0.5, 0.5;
  std::vector<Coefficient> co;
  for (int s = 0; s < 2; ++s) co.push_back({{s}, 1.0});
  co.push_back({{0, 0}, 1.0});
  co.push_back({{0, 1}, 1.0});
  co.push_back({{1, 1}, 1.0});
  co.push_back({{0, 0, 0}, 0.2});
  co.push_back({{0, 0, 1}, 0.2});
  co.push_back({{0, 1, 1}, 0.2});
  co.push_back({{1, 1, 1}, 0.2});
  return MixtureSpec(lam, co);
}

MixtureSpec pure(int p) {
  return MixtureSpec(Vec::Ones(1), {Coefficient{std::vector<int>(p, 0), 1.0}});
}

MixtureSpec single_species(const std::vector<double>& gammas) {
  std::vector<Coefficient> co;
  for (std::size_t k = 0; k < gammas.size(); ++k)
    co.push_back({std::vector<int>(k + 1, 0), gammas[k]});
  return MixtureSpec(Vec::Ones(1), co);
}

MixtureSpec half_quadratic_half_cubic() {
  return MixtureSpec(Vec::Ones(1), {c({0, 0}, 0.5), c({0, 0, 0}, 0.5)});
}

}  // namespace glassland::presets
