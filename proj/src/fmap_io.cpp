#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "densereg/tensor_io.hpp"

namespace densereg {

namespace {

constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 1;
constexpr std::uint8_t kNdim = 3;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_fmap(const FeatureMap& fm) {
  fm.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kFmapHeaderSize + 4 * fm.data.size());
  out.insert(out.end(), {'F', 'M', 'A', 'P', kVersion, kDtypeF32, kNdim});
  put_u32(out, static_cast<std::uint32_t>(fm.channels));
  put_u32(out, static_cast<std::uint32_t>(fm.height));
  put_u32(out, static_cast<std::uint32_t>(fm.width));
  for (float v : fm.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureMap decode_fmap(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kFmapHeaderSize) throw LengthError("FMAP: truncated header");
  if (std::memcmp(bytes.data(), "FMAP", 4) != 0) throw FormatError("FMAP: bad magic");
  if (bytes[4] != kVersion) throw FormatError("FMAP: unsupported version " + std::to_string(bytes[4]));
  if (bytes[5] != kDtypeF32) throw FormatError("FMAP: unsupported dtype " + std::to_string(bytes[5]));
  if (bytes[6] != kNdim) throw FormatError("FMAP: expected ndim 3, got " + std::to_string(bytes[6]));
  const std::uint32_t c = get_u32(&bytes[7]);
  const std::uint32_t h = get_u32(&bytes[11]);
  const std::uint32_t w = get_u32(&bytes[15]);
  if (c == 0 || h == 0 || w == 0) throw FormatError("FMAP: zero dimension");
  const std::uint64_t count = std::uint64_t(c) * h * w;
  if (count > (1ull << 34)) throw FormatError("FMAP: tensor too large");
  if (bytes.size() != kFmapHeaderSize + 4 * count)
    throw LengthError("FMAP: payload is " + std::to_string(bytes.size() - kFmapHeaderSize) +
                      " bytes, header implies " + std::to_string(4 * count));
  FeatureMap fm;
  fm.channels = static_cast<int>(c);
  fm.height = static_cast<int>(h);
  fm.width = static_cast<int>(w);
  fm.data.resize(count);
  const std::uint8_t* p = bytes.data() + kFmapHeaderSize;
  for (std::size_t i = 0; i < count; ++i, p += 4) fm.data[i] = std::bit_cast<float>(get_u32(p));
  return fm;
}

FeatureMap read_fmap(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open feature map '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_fmap(bytes);
}

void write_fmap(const FeatureMap& fm, const std::string& path) {
  const auto bytes = encode_fmap(fm);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing '" + path + "'");
}

}  // namespace densereg
