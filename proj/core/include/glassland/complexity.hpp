#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "glassland/dyson.hpp"

namespace glassland {

struct ComplexityPoint {
  Vec x;
  Vec v;
  double F = 0.0;
  Vec grad_v;  // -A^{-1} v - Re u
  Vec grad_x;
  CVec u;
  bool u_real = false;
};

ComplexityPoint F_point(const MixtureStats& st, const Vec& x);
double F_value(const MixtureStats& st, const Vec& x);

// Hessian in v-coordinates, -A^{-1} - Re M(u)^{-1}; only meaningful where
// M(u) is invertible.
Mat F_hessian_v(const MixtureStats& st, const ComplexityPoint& p);

double F_extended(const MixtureStats& st, const Vec& x, double E);

enum class SpeciesPattern { Plus, Minus, Imag };
const char* pattern_name(SpeciesPattern p);

struct StationaryPoint {
  Vec v;
  std::vector<SpeciesPattern> pattern;
  CVec u;
  double F = 0.0;
  bool is_global_max = false;
  double residual = 0.0;
};

std::vector<StationaryPoint> find_stationary_points(const MixtureStats& st, double tol = 1e-8);

// Half-width of the default search box, in x-coordinates.
double auto_region(const MixtureStats& st);

struct SupResult {
  double value = 0.0;
  Vec argmax;  // x-coordinates
};

SupResult sup_F(const MixtureStats& st, std::optional<double> region = std::nullopt,
                int random_starts = 12, std::uint64_t seed = 1);

struct ScanSpec {
  double lo = -6.0;
  double hi = 6.0;
  int n = 301;
};

struct ScanResult {
  std::vector<Vec> points;  // x-coordinates, last coordinate fastest
  Vec F;
  std::vector<bool> nonreal;
};

ScanResult scan(const MixtureStats& st, const ScanSpec& spec);

}  // namespace glassland
