#pragma once

#include <optional>
#include <span>
#include <vector>

#include "densereg/core.hpp"

namespace densereg {

/// Exponents (x, y) of the monomial basis, in storage order.
struct Monomial {
  int x_power;
  int y_power;
};
std::span<const Monomial> monomial_basis(TransformKind kind);

/// Least-squares fit of `kind` mapping from[i] -> to[i].
///
/// Polynomial kinds solve per output coordinate with column-pivoted QR on
/// inputs mapped to [-1,1]^2; the normalization is folded back into the
/// stored coefficients. Homographies use the normalized DLT: both point sets
/// are centred and scaled to mean distance sqrt(2), the 2n x 9 system is
/// solved through its SVD null vector, then denormalized to h33 = 1.
///
/// Throws InsufficientCorrespondences below the kind's minimum count and
/// DegenerateConfiguration for collinear or rank-deficient input.
Transform fit_transform(TransformKind kind, std::span<const Point2> from, std::span<const Point2> to);

/// Fits on the active correspondences only (fixed_pt -> moving_pt).
Transform fit_transform(TransformKind kind, std::span<const Correspondence> corrs);

/// Throws PointAtInfinity when a homography denominator vanishes.
Point2 apply_transform(const Transform& t, Point2 p);
std::vector<Point2> apply_transform(const Transform& t, std::span<const Point2> pts);
/// Non-throwing variant; nullopt where the projective denominator vanishes.
std::optional<Point2> try_apply(const Transform& t, Point2 p);

Point2 apply_chain(const TransformChain& chain, Point2 p);
std::optional<Point2> try_apply_chain(const TransformChain& chain, Point2 p);

/// Composite evaluating outer(inner(p)).
TransformChain compose(const TransformChain& outer, const TransformChain& inner);
/// Closed-form product of two affine maps, outer(inner(p)).
Transform compose_affine(const Transform& outer, const Transform& inner);

/// Re-expresses `t` between new frame sizes: result(u) = R(t(D^-1 u)) with D
/// and R the diagonal scalings new_domain/t.domain and new_range/t.range.
Transform rescale_transform(const Transform& t, Extent new_domain, Extent new_range);

/// Pull-back warp: out(u) = bilinear sample of moving at chain(u), zero
/// outside the moving image.
ImageBuffer warp_image(const ImageBuffer& moving, const TransformChain& chain, int out_w, int out_h);

/// Two-channel visualization: fixed in green, warped moving in magenta.
ImageBuffer overlay_images(const ImageBuffer& fixed, const ImageBuffer& warped);

}  // namespace densereg
