#include "pointpose/grid_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace pointpose {

namespace {

constexpr std::array<unsigned char, 4> kMagic = {0x53, 0x50, 0x4C, 0x47};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;
constexpr std::uint8_t kRank = 3;
constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 1 + 3 * 4;

void put_u16(unsigned char* p, std::uint16_t v) {
  p[0] = static_cast<unsigned char>(v & 0xFF);
  p[1] = static_cast<unsigned char>(v >> 8);
}

void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

// Reads up to n bytes; returns how many were read.
std::size_t read_bytes(std::istream& in, unsigned char* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount());
}

}  // namespace

const char* to_string(GridFormatError::Kind kind) {
  using K = GridFormatError::Kind;
  switch (kind) {
    case K::BadMagic: return "bad magic";
    case K::UnsupportedVersion: return "unsupported version";
    case K::UnsupportedDtype: return "unsupported dtype";
    case K::BadRank: return "bad rank";
    case K::DimsOverflow: return "dims overflow";
    case K::TruncatedPayload: return "truncated payload";
    case K::TrailingBytes: return "trailing bytes";
    case K::NonFiniteValue: return "non-finite value";
  }
  return "unknown";
}

void write_grid(const Grid& g, std::ostream& out) {
  std::array<unsigned char, kHeaderBytes> header{};
  std::memcpy(header.data(), kMagic.data(), 4);
  put_u16(header.data() + 4, kVersion);
  header[6] = kDtypeF32;
  header[7] = kRank;
  put_u32(header.data() + 8, static_cast<std::uint32_t>(g.height()));
  put_u32(header.data() + 12, static_cast<std::uint32_t>(g.width()));
  put_u32(header.data() + 16, static_cast<std::uint32_t>(g.channels()));
  out.write(reinterpret_cast<const char*>(header.data()), header.size());

  auto values = g.values();
  std::vector<unsigned char> payload(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    put_u32(payload.data() + 4 * i, std::bit_cast<std::uint32_t>(values[i]));
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("write_grid: stream write failed");
}

Grid read_grid(std::istream& in) {
  using K = GridFormatError::Kind;
  std::array<unsigned char, kHeaderBytes> header{};
  const std::size_t got = read_bytes(in, header.data(), header.size());
  if (got < 4 || std::memcmp(header.data(), kMagic.data(), 4) != 0) {
    throw GridFormatError(K::BadMagic, "SPLG: bad magic");
  }
  if (got < header.size()) throw GridFormatError(K::TruncatedPayload, "SPLG: truncated header");
  if (get_u16(header.data() + 4) != kVersion) {
    throw GridFormatError(K::UnsupportedVersion, "SPLG: unsupported version");
  }
  if (header[6] != kDtypeF32) throw GridFormatError(K::UnsupportedDtype, "SPLG: unsupported dtype");
  if (header[7] != kRank) throw GridFormatError(K::BadRank, "SPLG: rank must be 3");

  const std::uint64_t h = get_u32(header.data() + 8);
  const std::uint64_t w = get_u32(header.data() + 12);
  const std::uint64_t c = get_u32(header.data() + 16);
  constexpr std::uint64_t kMaxDim = std::numeric_limits<int>::max();
  // 2^31 elements (8 GiB payload) is far beyond any heatmap this library handles.
  constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;
  if (h == 0 || w == 0 || c == 0 || h > kMaxDim || w > kMaxDim || c > kMaxDim ||
      h * w > kMaxElements || h * w * c > kMaxElements) {
    throw GridFormatError(K::DimsOverflow, "SPLG: invalid dims " + std::to_string(h) + "x" +
                                               std::to_string(w) + "x" + std::to_string(c));
  }

  const std::size_t n = static_cast<std::size_t>(h * w * c);
  // Read in bounded chunks so a short stream with a huge header fails early.
  std::vector<float> values;
  values.reserve(std::min<std::size_t>(n, 1 << 18));
  std::vector<unsigned char> chunk;
  while (values.size() < n) {
    const std::size_t count = std::min<std::size_t>(n - values.size(), 1 << 18);
    chunk.resize(count * 4);
    if (read_bytes(in, chunk.data(), chunk.size()) != chunk.size()) {
      throw GridFormatError(K::TruncatedPayload, "SPLG: payload shorter than declared dims");
    }
    for (std::size_t i = 0; i < count; ++i) {
      const float v = std::bit_cast<float>(get_u32(chunk.data() + 4 * i));
      if (!std::isfinite(v)) {
        throw GridFormatError(K::NonFiniteValue, "SPLG: non-finite value at element " +
                                                     std::to_string(values.size()));
      }
      values.push_back(v);
    }
  }
  return Grid(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(values));
}

void write_grid_file(const Grid& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_grid(g, out);
}

Grid read_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Grid g = read_grid(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw GridFormatError(GridFormatError::Kind::TrailingBytes,
                          "SPLG: trailing bytes after payload in " + path.string());
  }
  return g;
}

}  // namespace pointpose
