#ifndef BLJES_TYPES_HPP
#define BLJES_TYPES_HPP

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bljes {

// Joint input (x, theta) in the scaled unit hypercube.
struct QueryPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd theta;

  Eigen::VectorXd joint() const {
    Eigen::VectorXd z(x.size() + theta.size());
    z << x, theta;
    return z;
  }
};

struct ObservationRecord {
  QueryPoint point;
  std::optional<double> y_f;
  std::optional<double> y_g;
  Eigen::VectorXd y_cu;  // empty when the problem has no upper constraints
  Eigen::VectorXd y_cl;
};

// Real observations plus, separately, optimum records appended for the
// acquisition-internal augmented dataset. Hyperparameter fitting reads
// only `records`; model construction over the augmented dataset treats
// `augmented` entries as noiseless (small jitter for factorization).
struct Dataset {
  std::vector<ObservationRecord> records;
  std::size_t n0 = 0;
  std::vector<ObservationRecord> augmented;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateConditioning : NumericError {
  using NumericError::NumericError;
};

}  // namespace bljes

#endif  // BLJES_TYPES_HPP
