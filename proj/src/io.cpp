#include "moyal/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "moyal/errors.hpp"

namespace moyal::io {

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

void put_float(std::ostream& os, double v) {
  const auto u = to_le(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  os.write(reinterpret_cast<const char*>(&u), 4);
}

float get_float(std::istream& is) {
  std::uint32_t u;
  if (!is.read(reinterpret_cast<char*>(&u), 4)) throw ArgumentError("grid function file is truncated");
  return std::bit_cast<float>(to_le(u));
}

}  // namespace

void write_grid_function(std::ostream& os, const GridFunction& f) {
  if (f.domain != Domain::position) throw ArgumentError("only position samples are serialized");
  const nlohmann::json header = {{"n", f.spec.n}, {"L", f.spec.L}, {"N", f.spec.N}};
  os << header.dump() << '\n';
  for (const auto& v : f.values) {
    put_float(os, v.real());
    put_float(os, v.imag());
  }
}

GridFunction read_grid_function(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ArgumentError("grid function file has no header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("bad grid function header: ") + e.what());
  }
  GridSpec s{h.at("n").get<int>(), h.at("L").get<double>(), h.at("N").get<int>()};
  s.validate();
  GridFunction f(s, Domain::position);
  for (auto& v : f.values) {
    const float re = get_float(is);
    const float im = get_float(is);
    v = {re, im};
  }
  return f;
}

void save_grid_function(const std::string& path, const GridFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgumentError("cannot open " + path + " for writing");
  write_grid_function(os, f);
}

GridFunction load_grid_function(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArgumentError("cannot open " + path);
  return read_grid_function(is);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ArgumentError("cannot open " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw ArgumentError("cannot open " + path + " for writing");
  os << dump_json(j) << '\n';
}

namespace {

void dump_rec(std::string& out, const nlohmann::json& j, int indent, int depth) {
  const std::string pad(static_cast<size_t>(indent * (depth + 1)), ' '), close(static_cast<size_t>(indent * depth), ' ');
  if (j.is_object() || j.is_array()) {
    const bool obj = j.is_object();
    if (j.empty()) {
      out += obj ? "{}" : "[]";
      return;
    }
    out += obj ? "{\n" : "[\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad;
      if (obj) out += nlohmann::json(it.key()).dump() + ": ";
      dump_rec(out, *it, indent, depth + 1);
    }
    out += "\n" + close + (obj ? "}" : "]");
  } else if (j.is_number_float()) {
    const double v = j.get<double>();
    out += std::isfinite(v) ? format_double(v) : "null";
  } else {
    out += j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump_rec(out, j, indent, 0);
  return out;
}

PoissonVectorSpace load_poisson(const std::string& path) { return PoissonVectorSpace::from_json(read_json_file(path)); }

PlaneWaveSum load_planewave(const std::string& path) { return PlaneWaveSum::from_json(read_json_file(path)); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace moyal::io
