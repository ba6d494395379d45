#include "calib/composition.hpp"

#include <cmath>

namespace calib {

namespace {

void check_positive(const MatrixXd& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!(m(i, j) > 0.0))
        throw InvalidInput(std::string(what) + ": nonpositive entry at row " +
                           std::to_string(i + 1) + ", column " + std::to_string(j + 1));
}

}  // namespace

CountMatrix::CountMatrix(MatrixXd v) : values(std::move(v)) {
  if (values.rows() < 1 || values.cols() < 2)
    throw InvalidInput("CountMatrix: need at least 1 row and 2 columns");
  check_positive(values, "CountMatrix");
}

CompositionMatrix::CompositionMatrix(MatrixXd v) : values(std::move(v)) {
  if (values.rows() < 1 || values.cols() < 2)
    throw InvalidInput("CompositionMatrix: need at least 1 row and 2 columns");
  check_positive(values, "CompositionMatrix");
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    if (std::abs(values.row(i).sum() - 1.0) > 1e-12)
      throw InvalidInput("CompositionMatrix: row " + std::to_string(i + 1) +
                         " does not sum to 1");
}

CompositionMatrix close(const CountMatrix& counts) {
  MatrixXd out = counts.values;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double s = out.row(i).sum();
    out.row(i) /= s;
    // renormalize residual roundoff so the row-sum invariant holds exactly enough
    out.row(i) /= out.row(i).sum();
  }
  CompositionMatrix comp;
  comp.values = std::move(out);
  return comp;
}

LogContrastMatrix log_contrast(const CompositionMatrix& comp, int reference_index) {
  const Eigen::Index n = comp.rows(), p = comp.cols();
  if (reference_index < 1 || reference_index > p)
    throw InvalidInput("log_contrast: reference_index " + std::to_string(reference_index) +
                       " outside [1," + std::to_string(p) + "]");
  const Eigen::Index ref = reference_index - 1;
  LogContrastMatrix out;
  out.values.resize(n, p - 1);
  out.reference_index = reference_index;
  out.centered = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lref = std::log(comp.values(i, ref));
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j == ref) continue;
      out.values(i, c++) = std::log(comp.values(i, j)) - lref;
    }
  }
  return out;
}

std::pair<LogContrastMatrix, ResponseVector> center(const LogContrastMatrix& design,
                                                    const ResponseVector& response) {
  LogContrastMatrix d = design;
  d.values.rowwise() -= design.values.colwise().mean();
  d.centered = true;
  ResponseVector r = response;
  r.values.array() -= response.values.mean();
  r.centered = true;
  return {std::move(d), std::move(r)};
}

}  // namespace calib
