#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pointpose/grid.hpp"

namespace pointpose::diff {

// Checkpoint container: a sequence of named sections until end of stream.
//   u16 name_length (LE) | name_length bytes UTF-8 name | one SPLG grid
// Parameters are stored as f32 grids.

using NamedGrid = std::pair<std::string, Grid>;

void write_checkpoint(const std::vector<NamedGrid>& sections, std::ostream& out);
std::vector<NamedGrid> read_checkpoint(std::istream& in);

void write_checkpoint_file(const std::vector<NamedGrid>& sections,
                           const std::filesystem::path& path);
std::vector<NamedGrid> read_checkpoint_file(const std::filesystem::path& path);

}  // namespace pointpose::diff
