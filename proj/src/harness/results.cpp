#include "pointpose/results.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pointpose/grid_io.hpp"

namespace pointpose {

using nlohmann::json;

std::string results_to_json(const std::vector<PersonPose>& persons) {
  json out = json::array();
  for (const PersonPose& p : persons) {
    json kps = json::array();
    for (const Keypoint& k : p.keypoints) {
      kps.push_back(k.present ? k.x : 0.0);
      kps.push_back(k.present ? k.y : 0.0);
      kps.push_back(k.present ? 2 : 0);
    }
    out.push_back({{"bbox", {p.box.x1, p.box.y1, p.box.x2, p.box.y2}},
                   {"score", p.box.score},
                   {"keypoints", kps}});
  }
  return out.dump(2) + "\n";
}

std::vector<PersonPose> results_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_array()) throw std::invalid_argument("results JSON: expected an array of persons");
  std::vector<PersonPose> persons;
  for (const json& p : j) {
    const json& bb = p.at("bbox");
    if (bb.size() != 4) throw std::invalid_argument("results JSON: bbox needs 4 numbers");
    PersonPose person{{bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                       bb[3].get<double>(), p.at("score").get<double>()},
                      {}};
    const json& kps = p.at("keypoints");
    if (kps.size() % 3 != 0) throw std::invalid_argument("results JSON: keypoints must be triplets");
    for (std::size_t i = 0; i < kps.size(); i += 3) {
      Keypoint k;
      k.present = kps[i + 2].get<double>() > 0;
      if (k.present) {
        k.x = kps[i].get<double>();
        k.y = kps[i + 1].get<double>();
      }
      person.keypoints.push_back(k);
    }
    persons.push_back(std::move(person));
  }
  return persons;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

void write_bundle(const HeatmapBundle& bundle, const std::filesystem::path& dir) {
  bundle.validate();
  std::filesystem::create_directories(dir);
  write_grid_file(bundle.pose, dir / "pose.splg");
  write_grid_file(bundle.center, dir / "center.splg");
  write_grid_file(bundle.top_left, dir / "top_left.splg");
  write_grid_file(bundle.bottom_right, dir / "bottom_right.splg");
  write_text_file(dir / "bundle.json", json{{"stride", bundle.stride}}.dump() + "\n");
}

HeatmapBundle read_bundle(const std::filesystem::path& dir) {
  HeatmapBundle b{read_grid_file(dir / "pose.splg"), read_grid_file(dir / "center.splg"),
                  read_grid_file(dir / "top_left.splg"), read_grid_file(dir / "bottom_right.splg")};
  b.stride = json::parse(read_text_file(dir / "bundle.json")).at("stride").get<double>();
  b.validate();
  return b;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

}  // namespace pointpose
