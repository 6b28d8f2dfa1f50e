#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <sstream>

#include "moyal/errors.hpp"
#include "moyal/io.hpp"

using namespace moyal;

TEST_CASE("grid function file layout") {
  const GridSpec s{2, 3.0, 4};
  GridFunction f(s, Domain::position);
  for (std::int64_t m = 0; m < s.size(); ++m) f.values[m] = {double(m), -0.5 * m};
  std::stringstream ss;
  io::write_grid_function(ss, f);
  const std::string bytes = ss.str();
  const auto nl = bytes.find('\n');
  REQUIRE(nl != std::string::npos);
  const auto header = nlohmann::json::parse(bytes.substr(0, nl));
  CHECK(header["n"] == 2);
  CHECK(header["L"] == 3.0);
  CHECK(header["N"] == 4);
  CHECK(bytes.size() == nl + 1 + 16 * 8);
  // sample 1 is (1, -0.5): float32 little endian 0x3f800000, 0xbf000000
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + nl + 1 + 8;
  CHECK(p[0] == 0x00);
  CHECK(p[3] == 0x3f);
  CHECK(p[2] == 0x80);
  CHECK(p[7] == 0xbf);

  const auto back = io::read_grid_function(ss);
  CHECK(back.spec == s);
  CHECK(max_abs_diff(back, f) == 0.0);  // small integers and halves are exact in float32
}

TEST_CASE("grid function round trip is single precision") {
  const GridSpec s{1, 5.0, 64};
  const auto g = make_gaussian(s, Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, 0.9));
  const auto path = (std::filesystem::temp_directory_path() / "moyal_io_test.bin").string();
  io::save_grid_function(path, g);
  const auto back = io::load_grid_function(path);
  std::filesystem::remove(path);
  CHECK(max_abs_diff(back, g) < 1e-7);
  CHECK(max_abs_diff(back, g) > 0.0);

  std::stringstream truncated;
  io::write_grid_function(truncated, g);
  std::string t = truncated.str();
  t.resize(t.size() - 3);
  std::stringstream ts(t);
  CHECK_THROWS_AS(io::read_grid_function(ts), ArgumentError);
  std::stringstream junk("not json\n");
  CHECK_THROWS_AS(io::read_grid_function(junk), ArgumentError);
  CHECK_THROWS_AS(io::load_grid_function("/nonexistent/x.bin"), ArgumentError);
}

TEST_CASE("json descriptions") {
  const auto pvs = PoissonVectorSpace::plane(0.25);
  const auto back = PoissonVectorSpace::from_json(nlohmann::json::parse(pvs.to_json().dump()));
  CHECK(back.sigma() == pvs.sigma());

  PlaneWaveSum f(2);
  f.add({1.5, -2.0}, Eigen::Vector2d(0.5, 1.0));
  f.add({0.0, 1.0}, Eigen::Vector2d(-1.0, 0.0));
  const auto fb = PlaneWaveSum::from_json(nlohmann::json::parse(f.to_json().dump()));
  CHECK(identical(fb, f));

  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(1.0) == "1");
  CHECK(std::stod(io::format_double(2.0 / 3.0)) == 2.0 / 3.0);

  const nlohmann::json j = {{"a", 0.1}, {"b", {1, 2.5}}, {"c", "x"}, {"d", nlohmann::json::object()}};
  CHECK(io::dump_json(j) == "{\n  \"a\": 0.10000000000000001,\n  \"b\": [\n    1,\n    2.5\n  ],\n  \"c\": \"x\",\n  \"d\": {}\n}");
  CHECK(nlohmann::json::parse(io::dump_json(j)) == j);
  CHECK(io::dump_json(nlohmann::json(std::nan(""))) == "null");
}
