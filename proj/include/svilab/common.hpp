#ifndef SVILAB_COMMON_HPP
#define SVILAB_COMMON_HPP

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace svilab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Tolerance on constraint residuals when deciding membership in D(phi).
inline constexpr double kDomainTolerance = 1e-12;

/// Bad input: dimension mismatches, out-of-range arguments, malformed configs.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Requested operation is not defined for this operator kind.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

}  // namespace svilab

#endif  // SVILAB_COMMON_HPP
