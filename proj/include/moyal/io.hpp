#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "moyal/grid.hpp"
#include "moyal/planewave.hpp"
#include "moyal/poisson.hpp"

namespace moyal::io {

/// One JSON header line {"n","L","N"}, a newline, then N^n little-endian
/// complex64 samples (float32 re, float32 im), row-major with axis 0 slowest.
void write_grid_function(std::ostream& os, const GridFunction& f);
GridFunction read_grid_function(std::istream& is);
void save_grid_function(const std::string& path, const GridFunction& f);
GridFunction load_grid_function(const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

PoissonVectorSpace load_poisson(const std::string& path);
PlaneWaveSum load_planewave(const std::string& path);

/// Shortest round-trip-safe decimal with 17 significant digits.
std::string format_double(double v);
/// Indented JSON with every float written by format_double; non-finite floats become null.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace moyal::io
