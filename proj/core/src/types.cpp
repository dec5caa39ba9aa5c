#include "glassland/types.hpp"

namespace glassland {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Validation: return "Validation";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::MassDeficit: return "MassDeficit";
    case Errc::DegenerateU: return "DegenerateU";
    case Errc::ZeroComponent: return "ZeroComponent";
    case Errc::InconsistentProbes: return "InconsistentProbes";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::NegativeRadicand: return "NegativeRadicand";
    case Errc::Degenerate: return "Degenerate";
    case Errc::DegreeTooHigh: return "DegreeTooHigh";
    case Errc::TooLarge: return "TooLarge";
    case Errc::OffManifold: return "OffManifold";
    case Errc::MaxIters: return "MaxIters";
    case Errc::SingularHessian: return "SingularHessian";
    case Errc::LostTrack: return "LostTrack";
    case Errc::DegenerateGradient: return "DegenerateGradient";
    case Errc::Blowup: return "Blowup";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

bool Error::is_validation() const noexcept {
  switch (code_) {
    case Errc::Validation:
    case Errc::DegreeTooHigh:
    case Errc::TooLarge:
    case Errc::OffManifold:
      return true;
    default:
      return false;
  }
}

std::vector<Signs> all_sign_patterns(int r) {
  std::vector<Signs> out;
  const int total = 1 << r;
  out.reserve(total);
  for (int mask = 0; mask < total; ++mask) {
    Signs d(r);
    for (int s = 0; s < r; ++s) d[s] = (mask >> (r - 1 - s)) & 1 ? -1 : 1;
    out.push_back(d);
  }
  return out;
}

std::string signs_to_string(const Signs& d) {
  std::string s = "(";
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) s += ",";
    s += d[i] > 0 ? "+1" : "-1";
  }
  return s + ")";
}

}  // namespace glassland
