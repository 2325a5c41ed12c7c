#ifndef FLR_ERRORS_HPP
#define FLR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace flr {

/// Eigen-iteration (or other numeric routine) did not converge.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, double residual_norm)
      : std::runtime_error(what), residual_norm_(residual_norm) {}
  double residual_norm() const { return residual_norm_; }

 private:
  double residual_norm_;
};

/// Requested cut-off would divide by a numerically zero eigenvalue.
class IllConditionedComponent : public std::runtime_error {
 public:
  IllConditionedComponent(const std::string& what, int component)
      : std::runtime_error(what), component_(component) {}
  int component() const { return component_; }

 private:
  int component_;
};

/// Lower-bound construction: 2*V_n >= sigma^2, the chi-squared distance
/// diverges (n is too small for the requested regime).
class DivergentDistance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV input; carries the 1-based line number.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace flr

#endif  // FLR_ERRORS_HPP
