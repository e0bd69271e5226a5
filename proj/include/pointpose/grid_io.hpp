#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "pointpose/grid.hpp"

namespace pointpose {

// SPLG v1, little-endian:
//   "SPLG" | u16 version = 1 | u8 dtype (0 = f32le) | u8 rank = 3
//   | u32 height | u32 width | u32 channels | height*width*channels f32 values
// Values are row-major, channel-last.

class GridFormatError : public std::runtime_error {
 public:
  enum class Kind {
    BadMagic,
    UnsupportedVersion,
    UnsupportedDtype,
    BadRank,
    DimsOverflow,
    TruncatedPayload,
    TrailingBytes,
    NonFiniteValue,
  };

  GridFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(GridFormatError::Kind kind);

void write_grid(const Grid& g, std::ostream& out);

/// Reads exactly one grid from the stream, leaving the stream positioned after
/// the payload so several grids can be read back to back.
Grid read_grid(std::istream& in);

void write_grid_file(const Grid& g, const std::filesystem::path& path);

/// Like read_grid, but the file must contain exactly one grid.
Grid read_grid_file(const std::filesystem::path& path);

}  // namespace pointpose
