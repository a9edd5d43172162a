#include "densereg/outlier_filter.hpp"

#include "densereg/transforms.hpp"

namespace densereg {

CorrespondenceSet inverse_consistency_filter(CorrespondenceSet corrs, double threshold) {
  if (!(threshold > 0.0)) throw ContractError("inverse_consistency_filter: threshold must be > 0");
  for (auto& c : corrs) {
    if (!c.back_pt) throw ContractError("inverse_consistency_filter: correspondence lacks back_pt");
    if (c.active() && distance(c.fixed_pt, *c.back_pt) > threshold) c.status = CorrespondenceStatus::rejected_ic;
  }
  return corrs;
}

ResidualFilterResult transform_residual_filter(CorrespondenceSet corrs, TransformKind fit_kind,
                                               double threshold, int iterations) {
  if (!(threshold > 0.0)) throw ContractError("transform_residual_filter: threshold must be > 0");
  if (iterations < 1) throw ContractError("transform_residual_filter: iterations must be >= 1");
  const std::size_t need = min_correspondences(fit_kind);
  Transform phi;
  for (int it = 0; it < iterations; ++it) {
    const std::size_t active = count_active(corrs);
    if (active < need)
      throw InsufficientCorrespondences("residual filter: " + std::to_string(active) + " active pairs, " +
                                        std::string(to_string(fit_kind)) + " needs " + std::to_string(need));
    phi = fit_transform(fit_kind, corrs);
    std::size_t rejected = 0;
    for (auto& c : corrs) {
      if (!c.active()) continue;
      const auto mapped = try_apply(phi, c.fixed_pt);
      if (!mapped || distance(*mapped, c.moving_pt) >= threshold) {
        c.status = CorrespondenceStatus::rejected_residual;
        ++rejected;
      }
    }
    if (rejected == 0) break;
  }
  return {std::move(corrs), std::move(phi)};
}

}  // namespace densereg
