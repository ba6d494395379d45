#pragma once

#include <utility>

#include "calib/types.hpp"

namespace calib {

// Row-normalize positive abundances onto the simplex.
CompositionMatrix close(const CountMatrix& counts);

// Log-ratio design log(z_ij / z_i,ref), reference column removed.
// reference_index is 1-based; defaults to the last component at call sites.
LogContrastMatrix log_contrast(const CompositionMatrix& comp, int reference_index);

// Remove column means from the design and the mean from the response.
std::pair<LogContrastMatrix, ResponseVector> center(const LogContrastMatrix& design,
                                                    const ResponseVector& response);

}  // namespace calib
