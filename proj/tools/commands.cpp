#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "moyal/bundle.hpp"
#include "moyal/errors.hpp"
#include "moyal/experiments.hpp"
#include "moyal/io.hpp"
#include "moyal/orbit.hpp"
#include "moyal/star.hpp"

namespace moyal::cli {

namespace ex = moyal::experiments;

namespace {

// the subcommand's own keys; "tol" belongs to Run
Params params_of(Run& run) {
  Params p(run.config, "config");
  p.sub("tol");
  return p;
}

bool is_json_path(const std::string& path) { return path.size() > 5 && path.ends_with(".json"); }

double rel(const GridFunction& a, const GridFunction& b) { return max_abs_diff(a, b) / std::max(1.0, b.max_abs()); }

void add_check(Outcome& o, const std::string& name, double value, double tol) {
  const bool ok = value < tol;
  o.results.row() << name << value << tol << ok;
  o.check(ok, name + " residual " + io::format_double(value) + " above " + io::format_double(tol));
}

}  // namespace

Outcome run_star(Run& run) {
  Params p = params_of(run);
  const std::string fpath = p.str("f", ""), gpath = p.str("g", "");
  const GridSpec spec = grid_from(p.sub("grid"), GridSpec::commensurate(2, 64, 1.0));
  const double tol = run.tol("residual", 1e-8);
  run.finish_tolerances();
  if (fpath.empty() != gpath.empty()) throw ConfigError("star: give both f and g, or neither");

  Outcome o;
  o.results = Table({"check", "value", "tolerance", "pass"});
  const bool exact = !fpath.empty() && is_json_path(fpath) && is_json_path(gpath);

  if (exact) {
    const PlaneWaveSum f = io::load_planewave(fpath), g = io::load_planewave(gpath);
    if (f.dim() != g.dim()) throw ConfigError("star: operands of different dimension");
    const StarContext ctx(poisson_from(p, f.dim(), 1.0));
    p.finish();
    const auto fg = star_exact(ctx, f, g);
    add_check(o, "flip", max_coeff_diff(star_exact(ctx, g, f), star_exact(ctx.flipped(), f, g)), tol);
    add_check(o, "involution", max_coeff_diff(fg.conjugate(), star_exact(ctx, g.conjugate(), f.conjugate())), tol);
    if (ctx.pvs.rank() == 0) {
      // sigma = 0: the product of phases is the pointwise product
      PlaneWaveSum pw(f.dim());
      for (const auto& a : f.terms())
        for (const auto& b : g.terms()) pw.add(a.coeff * b.coeff, a.freq + b.freq);
      add_check(o, "pointwise", max_coeff_diff(fg, pw), tol);
    }
    o.fixtures["product"] = fg.sorted().to_json();
    o.summary["backend"] = "exact_planewave";
    o.summary["terms"] = fg.size();
    return o;
  }

  // grid operands; a plane-wave operand is sampled on the other one's grid
  GridFunction f, g;
  if (fpath.empty()) {
    const auto corpus = ex::grid_corpus(spec, run.seed);
    f = corpus[0].f;
    g = corpus[1].f;
  } else {
    const bool fj = is_json_path(fpath), gj = is_json_path(gpath);
    if (!fj) f = io::load_grid_function(fpath);
    if (!gj) g = io::load_grid_function(gpath);
    if (fj) f = sample_planewave(io::load_planewave(fpath), g.spec);
    if (gj) g = sample_planewave(io::load_planewave(gpath), f.spec);
    if (!(f.spec == g.spec)) throw ConfigError("star: operands live on different grids");
  }
  const StarContext ctx(poisson_from(p, f.spec.n, 1.0), f.spec);
  p.finish();
  const auto fg = star_grid(ctx, f, g);
  add_check(o, "routes", rel(fg, star_twisted(ctx, f, g)), tol);
  add_check(o, "flip", rel(star_grid(ctx, g, f), star_grid(ctx.flipped(), f, g)), tol);
  add_check(o, "involution", rel(conjugate(fg), star_grid(ctx, conjugate(g), conjugate(f))), tol);
  if (ctx.pvs.rank() == 0) add_check(o, "pointwise", rel(fg, pointwise_product(f, g)), tol);

  std::ostringstream bin;
  io::write_grid_function(bin, fg);
  o.extra_files["product.bin"] = bin.str();
  o.summary["backend"] = "grid";
  o.summary["grid"] = grid_json(f.spec);
  o.summary["product_max_abs"] = fg.max_abs();
  return o;
}

Outcome run_norms(Run& run) {
  Params p = params_of(run);
  const GridSpec spec = grid_from(p.sub("grid"), GridSpec::commensurate(2, 32, 1.0));
  const auto pvs = poisson_from(p, spec.n, 1.0);
  const int planewaves = p.integer("planewaves", 8), gaussians = p.integer("gaussians", 8);
  NormOptions nd;
  nd.rel_tol = 1e-6;
  const NormOptions opt = norm_from(p.sub("norm"), nd);
  p.finish();
  const double tol = run.tol("chain", 1e-12);
  run.finish_tolerances();
  if (planewaves < 0 || gaussians < 0) throw ConfigError("norms: counts must be nonnegative");

  Outcome o;
  o.results = Table({"id", "kind", "op_norm", "op_upper", "l1_bound", "seminorm_bound", "eps_disc", "slack",
                     "slack_l1", "iterations"});
  int violations = 0;
  for (const auto& r : ex::norms_sweep(pvs, spec, run.seed, planewaves, gaussians, opt)) {
    o.results.row() << r.name << r.kind << r.op_norm << r.upper << r.l1 << r.seminorm_bound << r.eps << r.slack()
                    << r.slack_l1() << r.iterations;
    if (r.op_norm > r.l1 * (1.0 + tol)) {
      ++violations;
      o.failures.push_back(r.name + ": operator norm above the L1 bound");
    }
    if (r.slack_l1() < 0) {
      ++violations;
      o.failures.push_back(r.name + ": L1 bound above the seminorm bound");
    }
  }
  o.summary["grid"] = grid_json(spec);
  o.summary["violations"] = violations;
  return o;
}

Outcome run_estimates(Run& run) {
  Params p = params_of(run);
  ex::EstimatesConfig cfg;
  cfg.seed = run.seed;
  cfg.sigma12 = p.num("sigma12", cfg.sigma12);
  cfg.grid1 = grid_from(p.sub("grid1"), cfg.grid1);
  cfg.grid2 = grid_from(p.sub("grid2"), cfg.grid2);
  cfg.extra = p.integer("extra", cfg.extra);
  cfg.max_pq = p.integer("max_pq", cfg.max_pq);
  cfg.dims = p.ints("dims", cfg.dims);
  NormOptions nd;
  nd.rel_tol = 1e-6;
  cfg.norm = norm_from(p.sub("norm"), nd);
  const std::string cpath = p.str("constants", "");
  const double margin = p.num("margin", 2.0);
  p.finish();
  const double tol = run.tol("chain", 1e-12);
  run.finish_tolerances();
  if (cfg.extra < 0 || cfg.max_pq < 0 || !(margin >= 1.0)) throw ConfigError("estimates: bad extra, max_pq or margin");
  if (!cpath.empty()) {
    const auto j = io::read_json_file(cpath);
    if (!j.contains("constants") || !j["constants"].is_object()) throw ConfigError(cpath + ": no constants object");
    for (auto it = j["constants"].begin(); it != j["constants"].end(); ++it) cfg.constants[it.key()] = it->get<double>();
  }

  const auto rows = ex::estimates_sweep(cfg);
  Outcome o;
  o.results = Table({"name", "n", "p", "q", "op_norm", "l1", "seminorm_bound", "eps_disc", "product", "product_scale",
                     "ratio", "constant", "slack_norm", "slack_l1", "slack_product"});
  int violations = 0;
  for (const auto& r : rows) {
    o.results.row() << r.name << r.n << r.p << r.q << r.op_norm << r.l1 << r.seminorm_bound << r.eps << r.product
                    << r.product_scale << r.ratio << r.constant << r.slack_norm() << r.slack_l1() << r.slack_product();
    const std::string id = r.name + " (n=" + std::to_string(r.n) + ", p=" + std::to_string(r.p) +
                           ", q=" + std::to_string(r.q) + ")";
    auto fail = [&](const std::string& what) {
      ++violations;
      o.failures.push_back(id + ": " + what);
    };
    if (r.slack_norm() < -tol * r.l1) fail("operator norm above the L1 bound");
    if (r.slack_l1() < 0) fail("L1 bound above the seminorm bound");
    if (r.constant > 0 && r.slack_product() < 0) fail("product seminorm above C times the scale");
  }
  nlohmann::json c = nlohmann::json::object();
  for (const auto& [k, v] : ex::fit_constants(rows, margin)) c[k] = v;
  o.fixtures["seminorm_constants"] = {{"margin", margin}, {"seed", run.seed}, {"sigma12", cfg.sigma12},
                                      {"grid1", grid_json(cfg.grid1)}, {"grid2", grid_json(cfg.grid2)},
                                      {"constants", c}};
  o.summary["rows"] = rows.size();
  o.summary["violations"] = violations;
  o.summary["constants_checked"] = !cfg.constants.empty();
  return o;
}

Outcome run_approx_id(Run& run) {
  Params p = params_of(run);
  const GridSpec spec = grid_from(p.sub("grid"), GridSpec::commensurate(2, 80, 1.0));
  const auto pvs = poisson_from(p, spec.n, 1.0);
  const double shell = p.num("shell", 1.45);
  const int kmax = p.integer("kmax", 5), count = p.integer("count", 10), extra = p.integer("extra", 2);
  p.finish();
  const double final_tol = run.tol("final", 1e-3);
  run.finish_tolerances();
  if (kmax < 1 || count < 1 || extra < 0) throw ConfigError("approx-id: kmax and count must be positive");

  auto fs = ex::grid_corpus(spec, run.seed, extra);
  if (static_cast<int>(fs.size()) < count) throw ConfigError("approx-id: corpus has fewer than count members");
  fs.resize(count);
  const auto rows = ex::approx_identity_table(pvs, spec, fs, kmax, shell);
  Outcome o;
  o.results = Table({"name", "k", "residual"});
  double worst = 0;
  for (const auto& r : rows) {
    o.results.row() << r.name << r.k << r.residual;
    if (r.k == kmax) worst = std::max(worst, r.residual);
  }
  std::string why;
  o.check(ex::approx_identity_ok(rows, final_tol, &why), why);
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) table.push_back({{"name", r.name}, {"k", r.k}, {"residual", r.residual}});
  o.fixtures["approx_identity"] = {{"grid", grid_json(spec)}, {"sigma", pvs.to_json()}, {"shell", shell},
                                   {"seed", run.seed}, {"extra", extra}, {"final_tol", final_tol},
                                   {"rows", table}};
  o.summary["grid"] = grid_json(spec);
  o.summary["worst_final_residual"] = worst;
  return o;
}

Outcome run_bundle(Run& run, const std::string& bundle_file) {
  Params p = params_of(run);
  ex::BundleSweepConfig cfg;
  cfg.seed = run.seed;
  cfg.algebras = p.integer("algebras", cfg.algebras);
  cfg.max_points = p.integer("max_points", cfg.max_points);
  cfg.max_blocks = p.integer("max_blocks", cfg.max_blocks);
  cfg.max_dim = p.integer("max_dim", cfg.max_dim);
  cfg.targets = p.integer("targets", cfg.targets);
  const std::string path = bundle_file.empty() ? p.str("bundle", "") : bundle_file;
  if (!bundle_file.empty()) p.str("bundle", "");
  const int sections = p.integer("sections", 5);
  p.finish();
  cfg.tol = run.tol("defect", 1e-12);
  run.finish_tolerances();

  Outcome o;
  o.results = Table({"trial", "check", "points", "dim", "dim_fibers", "defect", "pass", "note"});
  if (!path.empty()) {
    auto B = std::make_shared<const PoissonBundle>(PoissonBundle::from_json(io::read_json_file(path)));
    cfg.base = B->base();
    // fiberwise product of random phase sections against the per-point exact product
    std::mt19937_64 rng(run.seed);
    std::normal_distribution<double> g;
    auto pw = [&](int) {
      PlaneWaveSum f(B->n());
      for (int t = 0; t < 3; ++t) {
        Eigen::VectorXd xi(B->n());
        for (auto& v : xi) v = g(rng);
        f.add({g(rng), g(rng)}, xi);
      }
      return FiberValue(f);
    };
    for (int s = 0; s < sections; ++s) {
      const auto phi = SectionOverBase::from_function(B, pw), psi = SectionOverBase::from_function(B, pw);
      const auto prod = fiber_star(phi, psi);
      double d = 0;
      for (int i = 0; i < B->size(); ++i) {
        const StarContext ctx(B->fiber(i));
        d = std::max(d, max_coeff_diff(star_exact(ctx, std::get<PlaneWaveSum>(phi.values[i]),
                                                  std::get<PlaneWaveSum>(psi.values[i])),
                                       std::get<PlaneWaveSum>(prod.values[i])));
      }
      const bool ok = d < cfg.tol;
      o.results.row() << s << "fiber_star" << B->size() << B->n() << B->n() << d << ok << "";
      o.check(ok, "fiber_star section " + std::to_string(s));
    }
  }
  int failed = 0;
  for (const auto& r : ex::bundle_sweep(cfg)) {
    o.results.row() << r.trial << r.check << r.points << r.dim << r.dim_fibers << r.defect << r.ok << r.note;
    if (!r.ok) {
      ++failed;
      o.failures.push_back(r.check + " trial " + std::to_string(r.trial) + (r.note.empty() ? "" : ": " + r.note));
    }
  }
  o.summary["algebras"] = cfg.algebras;
  o.summary["failed"] = failed;
  return o;
}

Outcome run_orbit(Run& run, const std::string& sigma0_file, int samples, const std::string& emit) {
  Params p = params_of(run);
  const std::string path = sigma0_file.empty() ? p.str("sigma0", "") : sigma0_file;
  if (!sigma0_file.empty()) p.str("sigma0", "");
  const int k = samples > 0 ? samples : p.integer("samples", 200);
  if (samples > 0) p.integer("samples", 0);
  const double scale = p.num("scale", 1.0);
  p.finish();
  const double eq_tol = run.tol("equivariance", 1e-10), inv_tol = run.tol("invariant", 1e-9);
  run.finish_tolerances();

  const Eigen::MatrixXd s0 = path.empty() ? dfr_sigma0() : io::load_poisson(path).sigma();
  if (s0.rows() < 2) throw ConfigError("orbit: sigma0 must be at least 2x2");
  ex::OrbitSummary sum;
  const auto rows = ex::orbit_sweep(s0, k, run.seed, scale, &sum);

  Table inv({"index", "rank", "quadratic", "pfaffian", "equivariance", "scale"});
  for (const auto& r : rows) inv.row() << r.index << r.rank << r.quadratic << r.pfaffian << r.equivariance << r.scale;
  Outcome o;
  o.extra_files[emit] = inv.str();
  o.results = Table({"check", "value", "expected", "pass"});
  auto add = [&](const std::string& name, double value, double expected, bool ok) {
    o.results.row() << name << value << expected << ok;
    o.check(ok, name);
  };
  add("rank_constant", sum.rank_constant ? 1.0 : 0.0, 1.0, sum.rank_constant);
  add("stabilizer_plus_orbit_dim", sum.stabilizer_dim + sum.orbit_dim, sum.group_dim,
      sum.stabilizer_dim + sum.orbit_dim == sum.group_dim);
  add("max_equivariance", sum.max_equivariance, eq_tol, sum.max_equivariance < eq_tol);
  add("max_quadratic_drift", sum.max_quadratic_drift, inv_tol, sum.max_quadratic_drift < inv_tol);
  if (s0.rows() == 4) add("max_pfaffian_drift", sum.max_pfaffian_drift, inv_tol, sum.max_pfaffian_drift < inv_tol);
  o.summary["rank"] = sum.rank0;
  o.summary["stabilizer_dim"] = sum.stabilizer_dim;
  o.summary["orbit_dim"] = sum.orbit_dim;
  o.summary["samples"] = k;
  o.summary["emit"] = emit;
  return o;
}

}  // namespace moyal::cli
