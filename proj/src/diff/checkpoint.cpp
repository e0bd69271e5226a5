#include "pointpose/diff/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "pointpose/grid_io.hpp"

namespace pointpose::diff {

void write_checkpoint(const std::vector<NamedGrid>& sections, std::ostream& out) {
  for (const auto& [name, grid] : sections) {
    if (name.empty() || name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("checkpoint: section name must be 1..65535 bytes");
    }
    const auto n = static_cast<std::uint16_t>(name.size());
    const char len[2] = {static_cast<char>(n & 0xFF), static_cast<char>(n >> 8)};
    out.write(len, 2);
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_grid(grid, out);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

std::vector<NamedGrid> read_checkpoint(std::istream& in) {
  std::vector<NamedGrid> sections;
  while (in.peek() != std::char_traits<char>::eof()) {
    unsigned char len[2];
    in.read(reinterpret_cast<char*>(len), 2);
    if (in.gcount() != 2) throw std::runtime_error("checkpoint: truncated section header");
    const std::size_t n = len[0] | (len[1] << 8);
    std::string name(n, '\0');
    in.read(name.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n || n == 0) {
      throw std::runtime_error("checkpoint: truncated or empty section name");
    }
    sections.emplace_back(std::move(name), read_grid(in));
  }
  return sections;
}

void write_checkpoint_file(const std::vector<NamedGrid>& sections,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(sections, out);
}

std::vector<NamedGrid> read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace pointpose::diff
