#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "densereg/core.hpp"

namespace densereg {

// FMAP layout (little-endian):
//   "FMAP" | version u8 = 1 | dtype u8 = 1 (f32) | ndim u8 = 3 | C u32 | H u32 | W u32
//   followed by C*H*W f32 values, channel-major.
inline constexpr std::size_t kFmapHeaderSize = 4 + 3 + 3 * 4;

std::vector<std::uint8_t> encode_fmap(const FeatureMap& fm);
FeatureMap decode_fmap(const std::vector<std::uint8_t>& bytes);

FeatureMap read_fmap(const std::string& path);
void write_fmap(const FeatureMap& fm, const std::string& path);

/// 8-bit PNG or binary PGM/PPM (P5/P6). Samples are scaled to [0,1]; alpha
/// is dropped, gray+alpha becomes gray.
ImageBuffer load_image(const std::string& path);
/// 8-bit PNG; samples are clamped to [0,1] and rounded.
void save_png(const ImageBuffer& img, const std::string& path);
void save_pnm(const ImageBuffer& img, const std::string& path);

/// Bilinear, edge-clamped, align-corners resampling.
ImageBuffer resample_image(const ImageBuffer& img, int out_w, int out_h);

/// Per-channel align-corners bilinear upsampling. Clears `normalized`.
FeatureMap upsample_featuremap(const FeatureMap& fm, int out_h, int out_w);

/// Scales every pixel vector to unit L2 norm; zero vectors stay zero.
FeatureMap l2_normalize_channels(FeatureMap fm);

/// Largest | ||v|| - 1 | over nonzero pixel vectors.
double max_norm_deviation(const FeatureMap& fm);

}  // namespace densereg
