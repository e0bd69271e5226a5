#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "pointpose/diff/checkpoint.hpp"
#include "pointpose/grid_io.hpp"
#include "support.hpp"

using namespace pointpose;
using Kind = GridFormatError::Kind;

namespace {

std::string encode(const Grid& g) {
  std::ostringstream out;
  write_grid(g, out);
  return out.str();
}

Kind error_kind(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_grid(in);
  } catch (const GridFormatError& e) {
    return e.kind();
  }
  FAIL("stream was accepted");
  return Kind::BadMagic;
}

}  // namespace

TEST_CASE("SPLG header layout") {
  const std::string bytes = encode(Grid(2, 3, 4, 1.5f));
  REQUIRE(bytes.size() == 20 + 2 * 3 * 4 * 4);
  CHECK(bytes.substr(0, 4) == "SPLG");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 0);
  CHECK(bytes[7] == 3);
  std::uint32_t dims[3];
  std::memcpy(dims, bytes.data() + 8, 12);
  CHECK(dims[0] == 2);
  CHECK(dims[1] == 3);
  CHECK(dims[2] == 4);
  float first;
  std::memcpy(&first, bytes.data() + 20, 4);
  CHECK(first == 1.5f);
}

TEST_CASE("SPLG round trip is bitwise") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    Grid g(support::uniform_int(rng, 1, 6), support::uniform_int(rng, 1, 6), support::uniform_int(rng, 1, 3));
    for (float& v : g.values()) {
      float f;
      do f = std::bit_cast<float>(static_cast<std::uint32_t>(rng())); while (!std::isfinite(f));
      v = f;
    }
    std::istringstream in(encode(g));
    const Grid back = read_grid(in);
    REQUIRE(back.same_shape(g));
    REQUIRE(std::memcmp(back.values().data(), g.values().data(), g.size() * 4) == 0);
  }
}

TEST_CASE("SPLG malformed streams") {
  const std::string good = encode(Grid(2, 2, 1, 0.25f));
  std::string s = good;
  s[0] = 'Q';
  CHECK(error_kind(s) == Kind::BadMagic);
  CHECK(error_kind(good.substr(0, 3)) == Kind::BadMagic);
  CHECK(error_kind(good.substr(0, good.size() - 1)) == Kind::TruncatedPayload);
  CHECK(error_kind(good.substr(0, 12)) == Kind::TruncatedPayload);
  s = good;
  s[4] = 7;
  CHECK(error_kind(s) == Kind::UnsupportedVersion);
  s = good;
  s[6] = 2;
  CHECK(error_kind(s) == Kind::UnsupportedDtype);
  s = good;
  s[7] = 4;
  CHECK(error_kind(s) == Kind::BadRank);
  s = good;
  std::memset(s.data() + 8, 0xFF, 12);
  CHECK(error_kind(s) == Kind::DimsOverflow);
  s = good;
  std::memset(s.data() + 8, 0, 4);
  CHECK(error_kind(s) == Kind::DimsOverflow);
}

TEST_CASE("SPLG rejects non-finite values and trailing bytes in files") {
  std::string s = encode(Grid(1, 2, 1));
  const float inf = std::numeric_limits<float>::infinity();
  std::memcpy(s.data() + 24, &inf, 4);
  CHECK(error_kind(s) == Kind::NonFiniteValue);

  const auto dir = std::filesystem::temp_directory_path() / "pointpose_unit_grid_io";
  std::filesystem::create_directories(dir);
  const Grid g(3, 1, 2, 0.5f);
  write_grid_file(g, dir / "ok.splg");
  CHECK(read_grid_file(dir / "ok.splg").at(2, 0, 1) == 0.5f);
  {
    std::ofstream out(dir / "extra.splg", std::ios::binary);
    out << encode(g) << 'x';
  }
  try {
    read_grid_file(dir / "extra.splg");
    FAIL("trailing bytes accepted");
  } catch (const GridFormatError& e) {
    CHECK(e.kind() == Kind::TrailingBytes);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(5);
  std::vector<diff::NamedGrid> sections{{"a.weight", support::random_grid(rng, 3, 3, 4)},
                                        {"residual", support::random_grid(rng, 16, 16, 17)}};
  std::stringstream ss;
  diff::write_checkpoint(sections, ss);
  const auto back = diff::read_checkpoint(ss);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].first == sections[i].first);
    REQUIRE(back[i].second.same_shape(sections[i].second));
    CHECK(std::memcmp(back[i].second.values().data(), sections[i].second.values().data(),
                      sections[i].second.size() * 4) == 0);
  }
}
