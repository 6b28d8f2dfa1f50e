#include "cli.hpp"

#include <fstream>

#include "moyal/errors.hpp"
#include "moyal/io.hpp"

namespace moyal::cli {

namespace fs = std::filesystem;

Params::Params(nlohmann::json j, std::string where) : j_(std::move(j)), where_(std::move(where)) {
  if (j_.is_null()) j_ = nlohmann::json::object();
  if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
}

bool Params::has(const std::string& key) const { return j_.contains(key); }

double Params::num(const std::string& key, double def) {
  used_.insert(key);
  if (!has(key)) return def;
  if (!j_[key].is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
  return j_[key].get<double>();
}

int Params::integer(const std::string& key, int def) {
  used_.insert(key);
  if (!has(key)) return def;
  if (!j_[key].is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an integer");
  return j_[key].get<int>();
}

std::string Params::str(const std::string& key, const std::string& def) {
  used_.insert(key);
  if (!has(key)) return def;
  if (!j_[key].is_string()) throw ConfigError(where_ + "." + key + ": expected a string");
  return j_[key].get<std::string>();
}

std::vector<int> Params::ints(const std::string& key, std::vector<int> def) {
  used_.insert(key);
  if (!has(key)) return def;
  std::vector<int> out;
  if (!j_[key].is_array()) throw ConfigError(where_ + "." + key + ": expected an array of integers");
  for (const auto& v : j_[key]) {
    if (!v.is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an array of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

Params Params::sub(const std::string& key) {
  used_.insert(key);
  return Params(has(key) ? j_[key] : nlohmann::json::object(), where_ + "." + key);
}

const nlohmann::json& Params::raw(const std::string& key) {
  used_.insert(key);
  return j_[key];
}

void Params::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!used_.count(it.key())) throw ConfigError(where_ + ": unknown key \"" + it.key() + "\"");
}

double Run::tol(const std::string& key, double def) {
  known_.insert(key);
  double v = def;
  if (config.contains("tol") && config["tol"].contains(key)) {
    if (!config["tol"][key].is_number()) throw ConfigError("tol." + key + ": expected a number");
    v = config["tol"][key].get<double>();
  }
  if (auto it = tol_override.find(key); it != tol_override.end()) v = it->second;
  if (!(v > 0.0)) throw ConfigError("tolerance " + key + " must be positive");
  tolerances[key] = v;
  return v;
}

void Run::finish_tolerances() const {
  for (const auto& [k, v] : tol_override)
    if (!known_.count(k)) throw ConfigError("--tol-override: unknown tolerance \"" + k + "\" for " + command);
  if (config.contains("tol")) {
    if (!config["tol"].is_object()) throw ConfigError("tol: expected an object");
    for (auto it = config["tol"].begin(); it != config["tol"].end(); ++it)
      if (!known_.count(it.key())) throw ConfigError("tol: unknown tolerance \"" + it.key() + "\" for " + command);
  }
}

Table& Table::row() {
  rows_.emplace_back();
  return *this;
}

Table& Table::operator<<(double v) { return *this << io::format_double(v); }
Table& Table::operator<<(int v) { return *this << std::to_string(v); }
Table& Table::operator<<(std::int64_t v) { return *this << std::to_string(v); }
Table& Table::operator<<(bool v) { return *this << std::string(v ? "1" : "0"); }

Table& Table::operator<<(const std::string& v) {
  if (rows_.empty()) rows_.emplace_back();
  // quote only when needed
  if (v.find_first_of(",\"\n") == std::string::npos) {
    rows_.back().push_back(v);
  } else {
    std::string q = "\"";
    for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    rows_.back().push_back(q + "\"");
  }
  return *this;
}

std::string Table::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

GridSpec grid_from(Params p, const GridSpec& def) {
  const int n = p.integer("n", def.n);
  const int N = p.integer("N", def.N);
  GridSpec s;
  if (p.has("commensurate")) {
    if (p.has("L")) throw ConfigError("grid: give either L or commensurate, not both");
    const double q = p.num("commensurate", 1.0);
    if (!(q > 0)) throw ConfigError("grid.commensurate must be positive");
    s = GridSpec::commensurate(n, N, q);
  } else {
    s = GridSpec{n, p.num("L", def.L), N};
  }
  p.finish();
  try {
    s.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  return s;
}

nlohmann::json grid_json(const GridSpec& s) { return {{"n", s.n}, {"L", s.L}, {"N", s.N}}; }

PoissonVectorSpace poisson_from(Params& p, int n, double default_sigma12) {
  if (p.has("poisson")) {
    if (p.has("sigma12")) throw ConfigError("give either poisson or sigma12, not both");
    const auto pvs = io::load_poisson(p.str("poisson", ""));
    if (pvs.dim() != n) throw ConfigError("poisson: dimension does not match the grid");
    return pvs;
  }
  const double s = p.num("sigma12", default_sigma12);
  if (n == 2) return PoissonVectorSpace::plane(s);
  if (s != 0.0 && p.has("sigma12")) throw ConfigError("sigma12 needs n = 2");
  return PoissonVectorSpace::trivial(n);
}

NormOptions norm_from(Params p, const NormOptions& def) {
  NormOptions o = def;
  o.rel_tol = p.num("rel_tol", def.rel_tol);
  o.max_iter = p.integer("max_iter", def.max_iter);
  o.min_iter = p.integer("min_iter", def.min_iter);
  p.finish();
  if (!(o.rel_tol > 0) || o.max_iter < 1) throw ConfigError("norm: rel_tol and max_iter must be positive");
  return o;
}

namespace {

void write_text(const fs::path& path, const std::string& s) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << s;
}

nlohmann::json report_head(const Run& run) {
  nlohmann::json j;
  j["command"] = run.command;
  j["seed"] = run.seed;
  j["config"] = run.config;
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [k, v] : run.tolerances) t[k] = v;
  j["tolerances"] = t;
  return j;
}

}  // namespace

int write_outcome(const Run& run, const Outcome& o) {
  fs::create_directories(run.out);
  write_text(run.out / "results.csv", o.results.str());
  for (const auto& [name, j] : o.fixtures) write_text(run.out / "fixtures" / (name + ".json"), io::dump_json(j) + "\n");
  for (const auto& [name, s] : o.extra_files) write_text(run.out / name, s);
  nlohmann::json rep = report_head(run);
  rep["status"] = o.failures.empty() ? "pass" : "fail";
  rep["failures"] = o.failures;
  rep["summary"] = o.summary;
  write_text(run.out / "report.json", io::dump_json(rep) + "\n");
  return o.failures.empty() ? 0 : 1;
}

void write_error_report(const Run& run, const std::string& status, const std::string& message,
                        const nlohmann::json& extra) {
  try {
    fs::create_directories(run.out);
    nlohmann::json rep = report_head(run);
    rep["status"] = status;
    rep["error"] = message;
    for (auto it = extra.begin(); it != extra.end(); ++it) rep[it.key()] = *it;
    write_text(run.out / "report.json", io::dump_json(rep) + "\n");
  } catch (const std::exception&) {
    // the diagnostic on stderr is all we can give
  }
}

}  // namespace moyal::cli
