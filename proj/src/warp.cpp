#include <algorithm>

#include "densereg/kernels.hpp"
#include "densereg/transforms.hpp"

namespace densereg {

ImageBuffer warp_image(const ImageBuffer& moving, const TransformChain& chain, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw ContractError("warp_image: output dimensions must be >= 1");
  return kernels::warp_image(moving, [&chain](Point2 u) { return try_apply_chain(chain, u); }, out_w, out_h);
}

ImageBuffer overlay_images(const ImageBuffer& fixed, const ImageBuffer& warped) {
  const ImageBuffer f = to_grayscale(fixed);
  const ImageBuffer m = to_grayscale(warped);
  if (f.width != m.width || f.height != m.height) throw ContractError("overlay_images: size mismatch");
  ImageBuffer out(f.width, f.height, 3);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      out.at(x, y, 0) = m.at(x, y);
      out.at(x, y, 1) = f.at(x, y);
      out.at(x, y, 2) = m.at(x, y);
    }
  return out;
}

}  // namespace densereg
