#pragma once

#include "densereg/core.hpp"

namespace densereg {

struct FilterReport {
  std::size_t input_count = 0;
  std::size_t kept_after_ic = 0;
  std::size_t kept_after_residual = 0;
  double ic_threshold = 0.0;
  double residual_threshold = 0.0;
  std::optional<Transform> fitted_global;
};

/// Rejects active pairs with ||p - p''|| > threshold; distance == threshold
/// is kept. Every correspondence must carry back_pt.
CorrespondenceSet inverse_consistency_filter(CorrespondenceSet corrs, double threshold);

struct ResidualFilterResult {
  CorrespondenceSet correspondences;
  Transform global;
};

/// Fits `fit_kind` by least squares to all active pairs, then rejects pairs
/// with ||phi(p) - p'|| >= threshold. With iterations > 1 the fit-and-cut
/// pass repeats on the survivors.
///
/// Throws InsufficientCorrespondences when too few active pairs remain.
ResidualFilterResult transform_residual_filter(CorrespondenceSet corrs, TransformKind fit_kind,
                                               double threshold, int iterations = 1);

}  // namespace densereg
