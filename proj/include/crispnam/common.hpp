#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace crispnam {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Bad user input (malformed file, precondition violation). CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant. CLI maps this to exit code 2.
class InternalError : public std::logic_error {
  public:
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

// Training produced non-finite values (diverging step); recoverable by a search harness.
class TrainingDiverged : public std::runtime_error {
  public:
    explicit TrainingDiverged(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

} // namespace crispnam
