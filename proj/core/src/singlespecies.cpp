#include "glassland/singlespecies.hpp"

#include <cmath>
#include <limits>

namespace glassland::single {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

ScalarThresholds thresholds(double xp, double xpp) {
  if (!(xp > 0.0) || !(xpp >= xp))
    throw Error(Errc::Validation, "single-species thresholds need xi'' >= xi' > 0");
  ScalarThresholds t;
  t.xi_prime = xp;
  t.xi_dprime = xpp;
  t.alpha_sq = std::max(xpp + xp - xp * xp, 0.0);
  const double rad = 4.0 * xpp * xp * xp -
                     (xpp + xp) * (2.0 * (xpp - xp + xp * xp) - t.alpha_sq * std::log(xpp / xp));
  if (rad < -1e-12) throw Error(Errc::NegativeRadicand, "E_inf radicand is negative");
  const double root = std::sqrt(std::max(rad, 0.0));
  t.E_inf_minus = (2.0 * xp * std::sqrt(xpp) - root) / (xp + xpp);
  t.E_inf_plus = (2.0 * xp * std::sqrt(xpp) + root) / (xp + xpp);
  return t;
}

ScalarThresholds thresholds(const MixtureSpec& spec) {
  if (spec.r() != 1) throw Error(Errc::Validation, "single-species module needs r = 1");
  if (spec.gamma({0}) != 0.0) throw Error(Errc::Validation, "single-species module assumes no external field");
  MixtureStats st = stats(spec);
  if (std::abs(st.xi_one - 1.0) > 1e-10) throw Error(Errc::Validation, "single-species module needs xi(1) = 1");
  return thresholds(st.xi_prime[0], st.xi_dprime(0, 0));
}

double theta(double s) {
  const double a = std::abs(s);
  if (a < kSqrt2) return 0.0;
  const double q = std::sqrt(std::max(a * a - 2.0, 0.0));
  return -a * q / 2.0 + std::log((a + q) / kSqrt2);
}

double F_sy(const ScalarThresholds& t, double s, double y, bool tilde) {
  const double xp = t.xi_prime, xpp = t.xi_dprime;
  const double dev = s - y * xp / std::sqrt(2.0 * xpp);
  double penalty;
  if (t.pure()) {
    if (std::abs(dev) > 1e-12) return -std::numeric_limits<double>::infinity();
    penalty = 0.0;
  } else {
    penalty = 2.0 * xpp / t.alpha_sq * dev * dev;
  }
  double out = 0.5 * (std::log(xpp / xp) + s * s - y * y - penalty);
  if (!tilde) out += theta(s);
  return out;
}

EllipseParams ellipse(const ScalarThresholds& t) {
  if (t.pure()) throw Error(Errc::Degenerate, "pure mixture: S is a line segment");
  const double k = 2.0 * t.xi_dprime / t.alpha_sq;
  const double c = t.xi_prime / std::sqrt(2.0 * t.xi_dprime);
  EllipseParams e;
  e.a_ss = 1.0 - k;
  e.a_sy = k * c;
  e.a_yy = -(1.0 + k * c * c);
  e.discriminant = e.a_ss * e.a_yy - e.a_sy * e.a_sy;

  // Major axis: eigenvector of [[a_yy, a_sy], [a_sy, a_ss]] (in (y, s) order)
  // for the eigenvalue of smallest magnitude.
  const double tr = e.a_yy + e.a_ss;
  const double gap = std::sqrt((e.a_yy - e.a_ss) * (e.a_yy - e.a_ss) + 4.0 * e.a_sy * e.a_sy);
  const double mu = 0.5 * (tr + gap);  // closest to zero when negative definite
  double dy = e.a_sy, ds = mu - e.a_yy;
  if (std::abs(dy) + std::abs(ds) < 1e-300) {
    dy = 1.0;
    ds = 0.0;
  }
  double ang = std::atan2(ds, dy);
  if (ang < 0) ang += M_PI;
  if (ang >= M_PI) ang -= M_PI;
  e.major_axis_angle = ang;

  auto slope = [&](double y) {
    const double s = kSqrt2;
    const double dQ_ds = 2.0 * e.a_ss * s + 2.0 * e.a_sy * y;
    const double dQ_dy = 2.0 * e.a_sy * s + 2.0 * e.a_yy * y;
    return -dQ_dy / dQ_ds;
  };
  e.tangent_slope_at_Eplus = slope(t.E_inf_plus);
  e.tangent_slope_at_Eminus = slope(t.E_inf_minus);
  return e;
}

const char* einf_case_name(EinfCase c) {
  return c == EinfCase::EdgeBoundHolds ? "edge_bound_holds" : "requires_GS_comparison";
}

EinfCase classify_Einf_case(const ScalarThresholds& t) {
  EllipseParams e = ellipse(t);
  return e.tangent_slope_at_Eplus >= 0.0 ? EinfCase::EdgeBoundHolds : EinfCase::RequiresGSComparison;
}

double semicircle_tail(double s) {
  const double a = std::clamp(-s, -kSqrt2, kSqrt2);
  const double prim = a * std::sqrt(std::max(2.0 - a * a, 0.0)) / 2.0 + std::asin(a / kSqrt2);
  return (prim + M_PI / 2.0) / M_PI;
}

double semicircle_quantile(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(Errc::Validation, "quantile level must lie in (0,1)");
  double lo = -kSqrt2, hi = kSqrt2;  // tail decreases in s
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (semicircle_tail(mid) > gamma)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace glassland::single
