#pragma once

#include "glassland/mixture.hpp"

namespace glassland::single {

// Thresholds for one species without external field, normalized so xi(1) = 1.
struct ScalarThresholds {
  double xi_prime = 0.0;
  double xi_dprime = 0.0;
  double alpha_sq = 0.0;
  double E_inf_minus = 0.0;
  double E_inf_plus = 0.0;

  bool pure() const { return alpha_sq <= 1e-12; }
};

ScalarThresholds thresholds(double xi_prime, double xi_dprime);

// Checks r = 1, no degree-1 term and xi(1) = 1 within 1e-10.
ScalarThresholds thresholds(const MixtureSpec& spec);

double theta(double s);

// Complexity at (rescaled radial derivative s, energy y). The tilde variant
// drops the Theta term.
double F_sy(const ScalarThresholds& t, double s, double y, bool tilde = false);

// Quadratic part Q(s, y) = a_ss s^2 + 2 a_sy s y + a_yy y^2, so that
// F~ = (log(xi''/xi') + Q) / 2.
struct EllipseParams {
  double a_ss = 0.0;
  double a_sy = 0.0;
  double a_yy = 0.0;
  double discriminant = 0.0;  // a_ss a_yy - a_sy^2
  double major_axis_angle = 0.0;  // in the (y, s) plane, radians in [0, pi)
  double tangent_slope_at_Eplus = 0.0;  // ds/dy on the boundary at (E+, sqrt 2)
  double tangent_slope_at_Eminus = 0.0;
};

EllipseParams ellipse(const ScalarThresholds& t);

enum class EinfCase { EdgeBoundHolds, RequiresGSComparison };
const char* einf_case_name(EinfCase c);

EinfCase classify_Einf_case(const ScalarThresholds& t);

// s_gamma in (-sqrt 2, sqrt 2) with gamma = (1/pi) int_{-sqrt 2}^{-s} sqrt(2 - x^2) dx.
double semicircle_quantile(double gamma);
double semicircle_tail(double s);

}  // namespace glassland::single
