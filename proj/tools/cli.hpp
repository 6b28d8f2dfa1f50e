#pragma once

// Plumbing shared by the subcommands: checked config access, CSV tables and the report.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "moyal/grid.hpp"
#include "moyal/poisson.hpp"
#include "moyal/weyl.hpp"

namespace moyal::cli {

/// Bad flags, unreadable inputs or unknown keys: exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A JSON object whose keys must all be consumed; finish() rejects the leftovers.
class Params {
 public:
  Params(nlohmann::json j, std::string where);

  bool has(const std::string& key) const;
  double num(const std::string& key, double def);
  int integer(const std::string& key, int def);
  std::string str(const std::string& key, const std::string& def);
  std::vector<int> ints(const std::string& key, std::vector<int> def);
  /// Nested object (empty when absent).
  Params sub(const std::string& key);
  const nlohmann::json& raw(const std::string& key);

  void finish() const;

 private:
  nlohmann::json j_;
  std::string where_;
  std::set<std::string> used_;
};

struct Run {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 1;
  std::filesystem::path out = ".";
  std::map<std::string, double> tol_override;

  /// Tolerance `key` with default `def`; overrides win. Every tolerance group must be
  /// declared with all of its keys before finish_tolerances().
  double tol(const std::string& key, double def);
  void finish_tolerances() const;
  std::map<std::string, double> tolerances;  // effective values, for the report

 private:
  std::set<std::string> known_;
};

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  Table& row();
  Table& operator<<(double v);
  Table& operator<<(int v);
  Table& operator<<(std::int64_t v);
  Table& operator<<(bool v);
  Table& operator<<(const std::string& v);
  Table& operator<<(const char* v) { return *this << std::string(v); }
  std::string str() const;
  size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Outcome {
  Table results{{}};
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> failures;
  std::map<std::string, nlohmann::json> fixtures;   // fixtures/<name>.json
  std::map<std::string, std::string> extra_files;   // relative path -> contents
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

/// {"n","L","N"} or {"n","N","commensurate": quantum}.
GridSpec grid_from(Params p, const GridSpec& def);
nlohmann::json grid_json(const GridSpec& s);
/// "poisson": path, else "sigma12" for n = 2, else sigma = 0.
PoissonVectorSpace poisson_from(Params& p, int n, double default_sigma12);
NormOptions norm_from(Params p, const NormOptions& def);

Outcome run_star(Run& run);
Outcome run_norms(Run& run);
Outcome run_estimates(Run& run);
Outcome run_approx_id(Run& run);
Outcome run_bundle(Run& run, const std::string& bundle_file);
Outcome run_orbit(Run& run, const std::string& sigma0_file, int samples, const std::string& emit);

/// Writes results.csv, report.json, fixtures/ and extra files; returns the exit status.
int write_outcome(const Run& run, const Outcome& o);
/// report.json for a run that stopped on an error.
void write_error_report(const Run& run, const std::string& status, const std::string& message,
                        const nlohmann::json& extra = nlohmann::json::object());

}  // namespace moyal::cli
