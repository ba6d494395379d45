#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace calib {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Error taxonomy shared by all modules.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidInput : Error { using Error::Error; };
struct InsufficientReplicates : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct DegenerateResidual : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct ScenarioUnstable : Error { using Error::Error; };

// Strictly positive n x p abundance matrix (raw or contaminated counts).
// Zero counts must be imputed upstream; the numeric core is total on its domain.
struct CountMatrix {
  MatrixXd values;

  CountMatrix() = default;
  explicit CountMatrix(MatrixXd v);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// Rows on the open simplex: positive entries, each row sums to one (tol 1e-12).
struct CompositionMatrix {
  MatrixXd values;

  CompositionMatrix() = default;
  explicit CompositionMatrix(MatrixXd v);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// n x (p-1) matrix of log-ratios against a reference component.
// Column order preserves the original component order with the reference removed.
struct LogContrastMatrix {
  MatrixXd values;
  int reference_index = 0;  // 1-based column index in the parent composition
  bool centered = false;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// Length-n response; centered flag records mean removal.
struct ResponseVector {
  VectorXd values;
  bool centered = false;

  Eigen::Index size() const { return values.size(); }
};

}  // namespace calib
