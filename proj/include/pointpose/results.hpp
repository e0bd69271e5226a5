#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pointpose/decode.hpp"

namespace pointpose {

/// Per person {"bbox": [x1,y1,x2,y2], "score": s, "keypoints": [x,y,v, ...]}
/// with v = 2 for present keypoints and 0 (and x = y = 0) otherwise.
/// Keypoint scores are not part of the layout.
std::string results_to_json(const std::vector<PersonPose>& persons);
std::vector<PersonPose> results_from_json(const std::string& text);

/// A bundle directory holds pose.splg, center.splg, top_left.splg,
/// bottom_right.splg and bundle.json ({"stride": s}).
void write_bundle(const HeatmapBundle& bundle, const std::filesystem::path& dir);
HeatmapBundle read_bundle(const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` lines; `#` starts a comment; blank lines ignored.
/// Duplicate keys and lines without `=` raise ConfigError with the line number.
std::map<std::string, std::string> parse_config(const std::string& text);

}  // namespace pointpose
