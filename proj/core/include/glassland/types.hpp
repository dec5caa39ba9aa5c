#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace glassland {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using cplx = std::complex<double>;
using Signs = std::vector<int>;

enum class Errc {
  Validation,
  NonConvergence,
  MassDeficit,
  DegenerateU,
  ZeroComponent,
  InconsistentProbes,
  DegenerateVariance,
  NegativeRadicand,
  Degenerate,
  DegreeTooHigh,
  TooLarge,
  OffManifold,
  MaxIters,
  SingularHessian,
  LostTrack,
  DegenerateGradient,
  Blowup,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }
  // Input problems map to CLI exit code 1, numerical failures to 2.
  bool is_validation() const noexcept;

 private:
  Errc code_;
};

// All 2^r sign patterns, ordered with +1 before -1 in each coordinate,
// so the first pattern is (1,...,1).
std::vector<Signs> all_sign_patterns(int r);

std::string signs_to_string(const Signs& d);

}  // namespace glassland
