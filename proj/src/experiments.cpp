#include "moyal/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "moyal/errors.hpp"
#include "moyal/orbit.hpp"
#include "moyal/star.hpp"

namespace moyal::experiments {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct WidthRange {
  double lo, hi;
};

WidthRange widths_for(const GridSpec& s) {
  const WidthRange w{std::max(0.5, 6.0 * s.spacing() / std::numbers::pi), s.L / 6.2};
  if (w.lo > w.hi) throw ArgumentError("grid too coarse for the corpus: no resolvable Gaussian width");
  return w;
}

GridFunction modulate(const GridFunction& f, const Eigen::VectorXd& label) {
  const auto pw = PlaneWaveSum::phase(label * f.spec.dual_step());
  return pointwise_product(f, sample_planewave(pw, f.spec));
}

}  // namespace

std::vector<NamedFunction> grid_corpus(const GridSpec& spec, std::uint64_t seed, int extra) {
  const int n = spec.n;
  const auto w = widths_for(spec);
  const double mid = std::clamp(1.0, w.lo, w.hi);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  auto gauss = [&](const Eigen::VectorXd& c, const Eigen::VectorXd& wd) { return make_gaussian(spec, c, wd); };
  auto iso = [&](double x) { return Eigen::VectorXd::Constant(n, x); };

  std::vector<NamedFunction> out;
  out.push_back({"gauss", gauss(zero, iso(mid))});
  Eigen::VectorXd off(n);
  for (int a = 0; a < n; ++a) off(a) = (a % 2 ? -0.15 : 0.15) * spec.L;
  out.push_back({"gauss_offset", gauss(off, iso(mid))});
  out.push_back({"gauss_narrow", gauss(zero, iso(w.lo))});
  out.push_back({"gauss_wide", gauss(zero, iso(w.hi))});
  Eigen::VectorXd lab = Eigen::VectorXd::Ones(n);
  lab(0) = 2;
  out.push_back({"modulated", modulate(gauss(zero, iso(mid)), lab)});
  {
    auto h = gauss(zero, iso(mid));
    for (std::int64_t m = 0; m < spec.size(); ++m) h.values[m] *= spec.point(m)(0);
    out.push_back({"hermite", h});
  }
  {
    Eigen::VectorXd c = zero;
    c(0) = 0.1 * spec.L;
    auto t = gauss(c, iso(mid));
    t += cplx(0.0, 0.5) * gauss(-c, iso(mid));
    out.push_back({"two_bumps", t});
  }
  if (n >= 2) {
    Eigen::VectorXd wd = iso(w.hi);
    wd(0) = w.lo;
    out.push_back({"anisotropic", gauss(zero, wd)});
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uc(-0.1 * spec.L, 0.1 * spec.L), uw(w.lo, w.hi), uphi(0.0, kTwoPi);
  std::uniform_int_distribution<int> uk(-2, 2);
  for (int e = 0; e < extra; ++e) {
    Eigen::VectorXd c(n), wd(n), k(n);
    for (int a = 0; a < n; ++a) {
      c(a) = uc(rng);
      wd(a) = uw(rng);
      k(a) = uk(rng);
    }
    const double phi = uphi(rng);
    out.push_back({"random" + std::to_string(e), std::polar(1.0, phi) * modulate(gauss(c, wd), k)});
  }
  return out;
}

std::vector<std::pair<std::string, PlaneWaveSum>> planewave_corpus(const GridSpec& spec, std::uint64_t seed,
                                                                   int count, int kmax) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> uk(-kmax, kmax);
  const double distinct = std::pow(2.0 * kmax + 1.0, spec.n);
  if (count > distinct) throw ArgumentError("planewave_corpus: more waves than labels with |k| <= kmax");
  std::vector<std::pair<std::string, PlaneWaveSum>> out;
  std::set<std::string> seen;
  while (static_cast<int>(out.size()) < count) {
    Eigen::VectorXd k(spec.n);
    std::string name = "e";
    for (int a = 0; a < spec.n; ++a) {
      k(a) = out.empty() ? 0 : uk(rng);
      name += (a ? "_" : "") + std::to_string(static_cast<int>(k(a)));
    }
    if (seen.insert(name).second) out.emplace_back(name, PlaneWaveSum::phase(k * spec.dual_step()));
  }
  return out;
}

double eps_disc(const GridFunction& f) {
  const GridSpec& s = f.spec;
  const GridFunction fc = fourier_inverse(f);
  std::vector<int> idx(s.n);
  double tail = 0.0, edge = 0.0;
  for (std::int64_t m = 0; m < s.size(); ++m) {
    s.unflatten(m, idx);
    const bool outer = std::any_of(idx.begin(), idx.end(), [&](int j) { return j < 2 || j >= s.N - 2; });
    if (!outer) continue;
    // index j of the centred spectrum is label j - N/2, so the same test picks the top shells
    tail += std::abs(fc.values[m]);
    edge = std::max(edge, std::abs(f.values[m]));
  }
  return tail * s.dual_cell_volume() + std::pow(kTwoPi, s.n) * edge;
}

std::string constant_key(int n, int p, int q) {
  return std::to_string(n) + ":" + std::to_string(p) + ":" + std::to_string(q);
}

std::vector<EstimateRow> estimates_sweep(const EstimatesConfig& cfg) {
  std::vector<EstimateRow> rows;
  for (int n : cfg.dims) {
    if (n != 1 && n != 2) throw ArgumentError("estimates: dimensions 1 and 2 only");
    const GridSpec& spec = n == 1 ? cfg.grid1 : cfg.grid2;
    if (spec.n != n) throw ArgumentError("estimates: grid dimension mismatch");
    const PoissonVectorSpace pvs = n == 1 ? PoissonVectorSpace::trivial(1) : PoissonVectorSpace::plane(cfg.sigma12);
    const StarContext ctx(pvs, spec);
    const auto corpus = grid_corpus(spec, cfg.seed + static_cast<std::uint64_t>(n), cfg.extra);
    for (size_t i = 0; i < corpus.size(); ++i) {
      const auto& f = corpus[i].f;
      const auto& g = corpus[(i + 1) % corpus.size()].f;
      EstimateRow base;
      base.name = corpus[i].name;
      base.n = n;
      base.op_norm = operator_norm(left_translation(ctx, f), cfg.norm).lower;
      base.l1 = norm_bound_l1(ctx, f);
      base.seminorm_bound = std::pow(kTwoPi, n) * seminorm(f, 2 * n, 2 * n);
      base.eps = eps_disc(f);
      const GridFunction fg = star_grid(ctx, f, g);
      for (int p = 0; p <= cfg.max_pq; ++p)
        for (int q = 0; q <= cfg.max_pq; ++q) {
          EstimateRow r = base;
          r.p = p;
          r.q = q;
          r.product = seminorm(fg, p, q);
          r.product_scale = seminorm(f, 0, p + q) * seminorm(g, p + 2 * n, q + 2 * n);
          r.ratio = r.product / r.product_scale;
          const auto it = cfg.constants.find(constant_key(n, p, q));
          r.constant = it == cfg.constants.end() ? 0.0 : it->second;
          rows.push_back(r);
        }
    }
  }
  return rows;
}

std::map<std::string, double> fit_constants(const std::vector<EstimateRow>& rows, double margin) {
  std::map<std::string, double> c;
  for (const auto& r : rows) {
    auto& v = c[constant_key(r.n, r.p, r.q)];
    v = std::max(v, r.ratio * margin);
  }
  return c;
}

std::vector<NormRow> norms_sweep(const PoissonVectorSpace& pvs, const GridSpec& spec, std::uint64_t seed,
                                 int planewaves, int gaussians, const NormOptions& opt) {
  const StarContext ctx(pvs, spec);
  std::vector<NormRow> out;
  auto measure = [&](const std::string& name, const std::string& kind, const GridFunction& f) {
    const auto r = operator_norm(left_translation(ctx, f), opt);
    NormRow row{name, kind, r.lower, r.upper, norm_bound_l1(ctx, f)};
    row.seminorm_bound = std::pow(kTwoPi, spec.n) * seminorm(f, 2 * spec.n, 2 * spec.n);
    row.eps = eps_disc(f);
    row.iterations = r.iterations;
    out.push_back(row);
  };
  for (const auto& [name, pw] : planewave_corpus(spec, seed, planewaves)) measure(name, "planewave", sample_planewave(pw, spec));
  if (gaussians > 0) {
    auto corpus = grid_corpus(spec, seed, std::max(0, gaussians - 8));
    corpus.resize(std::min<size_t>(corpus.size(), gaussians));
    for (const auto& c : corpus) measure(c.name, "grid", c.f);
  }
  return out;
}

std::vector<ApproxRow> approx_identity_table(const PoissonVectorSpace& pvs, const GridSpec& spec,
                                             const std::vector<NamedFunction>& fs, int kmax, double shell) {
  const StarContext ctx(pvs, spec);
  std::vector<GridFunction> chis;
  for (int k = 1; k <= kmax; ++k) chis.push_back(approx_identity(spec, k, shell));
  std::vector<ApproxRow> out;
  for (const auto& nf : fs)
    for (int k = 1; k <= kmax; ++k) {
      const GridFunction d = star_grid(ctx, chis[k - 1], nf.f) - nf.f;
      out.push_back({nf.name, k, seminorm(d, 0, 0)});
    }
  return out;
}

bool approx_identity_ok(const std::vector<ApproxRow>& rows, double final_tol, std::string* why) {
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const bool last = i + 1 == rows.size() || rows[i + 1].name != r.name;
    if (i > 0 && rows[i - 1].name == r.name && !(r.residual < rows[i - 1].residual)) {
      if (why) *why = r.name + ": residual not decreasing at k=" + std::to_string(r.k);
      return false;
    }
    if (last && !(r.residual < final_tol)) {
      if (why) *why = r.name + ": residual at k=" + std::to_string(r.k) + " above tolerance";
      return false;
    }
  }
  return true;
}

FiniteCStarModuleAlgebra random_finite_algebra(std::mt19937_64& rng, const BaseSpace& base, int max_blocks,
                                               int max_dim) {
  if (base.size() == 0 || max_blocks < 1 || max_dim < 1) throw ArgumentError("random_finite_algebra: empty range");
  std::uniform_int_distribution<int> nblk(0, max_blocks), dim(1, max_dim), pt(0, base.size() - 1);
  std::vector<std::vector<int>> fibers(base.size());
  int total = 0;
  for (auto& f : fibers)
    for (int b = nblk(rng); b > 0; --b, ++total) f.push_back(dim(rng));
  if (total == 0) fibers[pt(rng)].push_back(dim(rng));
  return FiniteCStarModuleAlgebra::pointwise(base, fibers);
}

std::vector<BundleRow> bundle_sweep(const BundleSweepConfig& cfg) {
  if (cfg.algebras < 0 || cfg.max_points < 1 || cfg.targets < 1) throw ArgumentError("bundle sweep: bad sizes");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> npts(1, cfg.max_points), tgt(0, cfg.targets - 1);
  std::vector<std::string> tids;
  for (int t = 0; t < cfg.targets; ++t) tids.push_back("t" + std::to_string(t));
  const BaseSpace target = BaseSpace::named(tids);

  std::vector<BundleRow> rows;
  for (int trial = 0; trial < cfg.algebras; ++trial) {
    BaseSpace base;
    if (cfg.base) {
      base = *cfg.base;
    } else {
      std::vector<std::string> ids;
      for (int i = npts(rng); i > 0; --i) ids.push_back("p" + std::to_string(ids.size()));
      base = BaseSpace::named(ids);
    }
    const auto A = random_finite_algebra(rng, base, cfg.max_blocks, cfg.max_dim);

    const auto r = sectional_roundtrip(A, cfg.seed + static_cast<std::uint64_t>(trial));
    BundleRow rt;
    rt.trial = trial;
    rt.check = "roundtrip";
    rt.points = base.size();
    rt.dim = r.dim_algebra;
    rt.dim_fibers = r.dim_sections;
    rt.defect = std::max({r.multiplication_defect, r.involution_defect, r.isometry_defect});
    rt.ok = r.ok() && r.bijective && r.dim_sections == r.dim_algebra && rt.defect < cfg.tol;
    rt.note = r.failure;
    rows.push_back(rt);

    std::vector<int> f(base.size());
    for (auto& v : f) v = tgt(rng);
    BundleRow ff;
    ff.trial = trial;
    ff.check = "fiber_formula";
    ff.points = base.size();
    ff.ok = true;
    for (const auto& rep : fiber_formula_check(f, target, A)) {
      ff.dim += rep.dim_pushed;
      ff.dim_fibers += rep.dim_preimage;
      ff.defect = std::max(ff.defect, rep.map_defect);
      if (!rep.ok) {
        ff.ok = false;
        ff.note = "fiber over " + tids[rep.point] + " differs";
      }
    }
    ff.ok = ff.ok && ff.dim == ff.dim_fibers && ff.defect < cfg.tol;
    rows.push_back(ff);
  }
  return rows;
}

std::vector<OrbitRow> orbit_sweep(const Eigen::MatrixXd& sigma0, int samples, std::uint64_t seed, double scale,
                                  OrbitSummary* summary) {
  if (samples < 2) throw ArgumentError("orbit sweep: need at least two samples");
  const int n = static_cast<int>(sigma0.rows());
  const auto orbit = sample_orbit(sigma0, samples, seed, scale);
  OrbitSummary sum;
  sum.rank0 = numeric_rank(sigma0);
  sum.stabilizer_dim = stabilizer_algebra_dim(sigma0);
  sum.orbit_dim = orbit_local_dim(sigma0);
  sum.group_dim = n * (n - 1) / 2;
  const double q0 = quadratic_invariant(sigma0), p0 = n == 4 ? pfaffian_magnitude(sigma0) : 0.0;

  std::vector<OrbitRow> rows;
  for (int i = 0; i < samples; ++i) {
    const Eigen::MatrixXd& p = orbit.points[i];
    OrbitRow r{i, numeric_rank(p), quadratic_invariant(p), n == 4 ? pfaffian_magnitude(p) : 0.0};
    r.scale = p.cwiseAbs().maxCoeff();
    // the last point pairs with the first
    const auto& g1 = orbit.elements[i];
    const auto& g2 = orbit.elements[(i + 1) % samples];
    const Eigen::MatrixXd lhs = orbit_point(g1 * g2, sigma0), rhs = orbit_point(g1, orbit_point(g2, sigma0));
    r.equivariance = (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff());
    const double sc = std::max(1.0, r.scale * r.scale);
    sum.max_equivariance = std::max(sum.max_equivariance, r.equivariance);
    sum.max_quadratic_drift = std::max(sum.max_quadratic_drift, std::abs(r.quadratic - q0) / sc);
    sum.max_pfaffian_drift = std::max(sum.max_pfaffian_drift, std::abs(r.pfaffian - p0) / sc);
    sum.rank_constant = sum.rank_constant && r.rank == sum.rank0;
    rows.push_back(r);
  }
  if (summary) *summary = sum;
  return rows;
}

}  // namespace moyal::experiments
