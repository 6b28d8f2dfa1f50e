#include "moyal/weyl.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "moyal/errors.hpp"
#include "moyal/kernels.hpp"

namespace moyal {

namespace {

constexpr double kPi = std::numbers::pi;

double norm2(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

// Per-axis phase tables for e^{i s <xi, x_j>} with xi = (pi/L) k on the dual lattice:
// e^{i pi k (-1 + 2 j / N)} = (-1)^k exp(2 pi i k j / N).
struct AxisPhases {
  int n = 0, N = 0;
  std::vector<cplx> table;  // n * N
  cplx at(int a, int j) const { return table[static_cast<size_t>(a) * N + j]; }
};

AxisPhases lattice_phases(const GridSpec& s, const Eigen::VectorXi& k, int sign) {
  AxisPhases p{s.n, s.N, std::vector<cplx>(static_cast<size_t>(s.n) * s.N)};
  for (int a = 0; a < s.n; ++a) {
    const double parity = (k(a) % 2 == 0) ? 1.0 : -1.0;
    for (int j = 0; j < s.N; ++j) {
      const long kj = ((static_cast<long>(k(a)) * j) % s.N + s.N) % s.N;
      p.table[static_cast<size_t>(a) * s.N + j] = parity * std::polar(1.0, sign * 2.0 * kPi * kj / s.N);
    }
  }
  return p;
}

// out[j] = c * prod_a phase_a(j_a) * in[j - steps]  (cyclic)
void phase_roll(const GridSpec& s, const AxisPhases& ph, const Eigen::VectorXi& steps, cplx c,
                std::span<const cplx> in, std::span<cplx> out) {
  const int n = s.n, N = s.N;
  std::vector<int> idx(n, 0), src(n);
  const std::int64_t total = s.size();
  for (int a = 0; a < n; ++a) src[a] = ((-steps(a)) % N + N) % N;
  for (std::int64_t m = 0; m < total; ++m) {
    cplx f = c;
    std::int64_t from = 0;
    for (int a = 0; a < n; ++a) {
      f *= ph.at(a, idx[a]);
      from = from * N + src[a];
    }
    out[m] = f * in[from];
    // increment multi-index (axis n-1 fastest)
    for (int a = n - 1; a >= 0; --a) {
      ++idx[a];
      src[a] = (src[a] + 1 == N) ? 0 : src[a] + 1;
      if (idx[a] < N) break;
      idx[a] = 0;
    }
  }
}

Eigen::VectorXi require_dual(const GridSpec& s, const Eigen::VectorXd& xi, const char* what) {
  Eigen::VectorXi k;
  if (!s.on_dual_lattice_any(xi, &k)) throw CommensurabilityError(std::string(what) + ": covector off the dual lattice");
  return k;
}

Eigen::VectorXi require_position(const GridSpec& s, const Eigen::VectorXd& x, const char* what) {
  Eigen::VectorXi st;
  if (!s.on_position_lattice(x, &st))
    throw CommensurabilityError(std::string(what) + ": shift is not a multiple of the grid spacing");
  return st;
}

}  // namespace

std::vector<cplx> LinearOperator::operator()(std::span<const cplx> x) const {
  std::vector<cplx> y(static_cast<size_t>(dim));
  apply(x, y);
  return y;
}

double OperatorMatrix::unitarity_defect() const {
  const Eigen::MatrixXcd d = entries.adjoint() * entries - Eigen::MatrixXcd::Identity(dim(), dim());
  return d.cwiseAbs().maxCoeff();
}

OperatorMatrix to_matrix(const LinearOperator& op, bool parallel) {
  if (op.dim > OperatorMatrix::kMaxDim)
    throw ArgumentError("carrier dimension " + std::to_string(op.dim) + " exceeds the dense cap");
  return {parallel ? kernels::assemble_columns_omp(op.dim, op.apply)
                   : kernels::assemble_columns_serial(op.dim, op.apply)};
}

LinearOperator as_operator(const OperatorMatrix& m) {
  auto e = std::make_shared<Eigen::MatrixXcd>(m.entries);
  const std::int64_t d = m.dim();
  return {d,
          [e, d](std::span<const cplx> x, std::span<cplx> y) {
            Eigen::Map<const Eigen::VectorXcd> xv(x.data(), d);
            Eigen::Map<Eigen::VectorXcd>(y.data(), d) = (*e) * xv;
          },
          [e, d](std::span<const cplx> x, std::span<cplx> y) {
            Eigen::Map<const Eigen::VectorXcd> xv(x.data(), d);
            Eigen::Map<Eigen::VectorXcd>(y.data(), d) = e->adjoint() * xv;
          }};
}

LinearOperator compose(const LinearOperator& a, const LinearOperator& b) {
  if (a.dim != b.dim) throw ArgumentError("compose: dimension mismatch");
  const std::int64_t d = a.dim;
  return {d,
          [a, b, d](std::span<const cplx> x, std::span<cplx> y) {
            std::vector<cplx> t(static_cast<size_t>(d));
            b.apply(x, t);
            a.apply(t, y);
          },
          [a, b, d](std::span<const cplx> x, std::span<cplx> y) {
            std::vector<cplx> t(static_cast<size_t>(d));
            a.apply_adjoint(x, t);
            b.apply_adjoint(t, y);
          }};
}

LinearOperator linear_combination(std::vector<cplx> coeffs, std::vector<LinearOperator> ops) {
  if (coeffs.size() != ops.size() || ops.empty()) throw ArgumentError("linear_combination: bad arguments");
  const std::int64_t d = ops.front().dim;
  for (const auto& o : ops)
    if (o.dim != d) throw ArgumentError("linear_combination: dimension mismatch");
  auto c = std::make_shared<std::vector<cplx>>(std::move(coeffs));
  auto o = std::make_shared<std::vector<LinearOperator>>(std::move(ops));
  auto run = [c, o, d](bool adjoint, std::span<const cplx> x, std::span<cplx> y) {
    std::fill(y.begin(), y.end(), cplx{0.0, 0.0});
    std::vector<cplx> t(static_cast<size_t>(d));
    for (size_t j = 0; j < o->size(); ++j) {
      const cplx cj = adjoint ? std::conj((*c)[j]) : (*c)[j];
      if (cj == cplx{0.0, 0.0}) continue;
      if (adjoint)
        (*o)[j].apply_adjoint(x, t);
      else
        (*o)[j].apply(x, t);
      for (std::int64_t i = 0; i < d; ++i) y[i] += cj * t[i];
    }
  };
  return {d, [run](std::span<const cplx> x, std::span<cplx> y) { run(false, x, y); },
          [run](std::span<const cplx> x, std::span<cplx> y) { run(true, x, y); }};
}

LinearOperator identity_operator(std::int64_t dim) {
  auto id = [](std::span<const cplx> x, std::span<cplx> y) { std::copy(x.begin(), x.end(), y.begin()); };
  return {dim, id, id};
}

LinearOperator zero_operator(std::int64_t dim) {
  auto z = [](std::span<const cplx>, std::span<cplx> y) { std::fill(y.begin(), y.end(), cplx{0.0, 0.0}); };
  return {dim, z, z};
}

NormResult operator_norm(const LinearOperator& a, const NormOptions& opt) {
  const auto d = static_cast<size_t>(a.dim);
  if (d == 0) return {};
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::vector<cplx> v(d), w(d), z(d);
  for (auto& x : v) x = {gauss(rng), gauss(rng)};
  double nv = norm2(v);
  for (auto& x : v) x /= nv;

  NormResult res;
  double prev = -1.0;
  int stable = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    a.apply(v, w);
    const double mu = std::pow(norm2(w), 2);
    a.apply_adjoint(w, z);
    double rr = 0.0;
    for (size_t i = 0; i < d; ++i) rr += std::norm(z[i] - mu * v[i]);
    const double resid = std::sqrt(rr);
    res = {std::sqrt(mu), std::sqrt(mu), std::sqrt(mu + resid), it};
    if (mu <= opt.abs_floor) return res;
    // near-degenerate top clusters never shrink the residual, so only the quotient is watched
    stable = (prev >= 0.0 && std::abs(mu - prev) <= opt.rel_tol * mu) ? stable + 1 : 0;
    if (it >= opt.min_iter && stable >= 3) return res;
    prev = mu;
    const double nz = norm2(z);
    if (nz == 0.0) return res;
    for (size_t i = 0; i < d; ++i) v[i] = z[i] / nz;
  }
  throw NumericError("power iteration did not converge", res.lower, res.upper);
}

NormResult operator_norm(const OperatorMatrix& a, const NormOptions& opt) {
  NormResult r = operator_norm(as_operator(a), opt);
  const double fro = a.entries.norm();
  const double col = a.entries.cwiseAbs().colwise().sum().maxCoeff();
  const double row = a.entries.cwiseAbs().rowwise().sum().maxCoeff();
  r.upper = std::min({r.upper, fro, std::sqrt(col * row)});
  r.upper = std::max(r.upper, r.lower);
  return r;
}

LinearOperator regular_rep_op(const RepSpec& rep, const Eigen::VectorXd& xi) {
  const GridSpec s = rep.spec;
  if (rep.pvs.dim() != s.n) throw ArgumentError("regular_rep: Poisson space and grid differ in dimension");
  const Eigen::VectorXi k = require_dual(s, xi, "regular_rep");
  const Eigen::VectorXd shift = 0.5 * musical_sharp(rep.pvs, xi);
  Eigen::VectorXi steps;
  const bool exact = s.on_position_lattice(shift, &steps);
  auto fwd = std::make_shared<AxisPhases>(lattice_phases(s, k, +1));
  auto bwd = std::make_shared<AxisPhases>(lattice_phases(s, k, -1));
  const std::int64_t d = s.size();
  if (exact) {
    // pi(xi)* = pi(-xi): psi(x) -> e^{-i<xi,x>} psi(x + shift)
    return {d,
            [s, fwd, steps](std::span<const cplx> x, std::span<cplx> y) { phase_roll(s, *fwd, steps, 1.0, x, y); },
            [s, bwd, steps](std::span<const cplx> x, std::span<cplx> y) {
              phase_roll(s, *bwd, Eigen::VectorXi(-steps), 1.0, x, y);
            }};
  }
  const Eigen::VectorXi zero = Eigen::VectorXi::Zero(s.n);
  auto shifted = [s](std::span<const cplx> x, const Eigen::VectorXd& a) {
    return translate(GridFunction(s, Domain::position, std::vector<cplx>(x.begin(), x.end())), a).values;
  };
  return {d,
          [s, fwd, shift, zero, shifted](std::span<const cplx> x, std::span<cplx> y) {
            const auto t = shifted(x, shift);
            phase_roll(s, *fwd, zero, 1.0, t, y);
          },
          [s, bwd, shift, zero, shifted](std::span<const cplx> x, std::span<cplx> y) {
            std::vector<cplx> t(x.size());
            phase_roll(s, *bwd, zero, 1.0, x, t);
            const auto u = shifted(t, Eigen::VectorXd(-shift));
            std::copy(u.begin(), u.end(), y.begin());
          }};
}

OperatorMatrix regular_rep(const RepSpec& rep, const Eigen::VectorXd& xi) {
  return to_matrix(regular_rep_op(rep, xi));
}

LinearOperator combine_elements(const Representation& pi, const std::vector<cplx>& c,
                                const std::vector<Eigen::VectorXd>& xis) {
  if (c.empty()) return zero_operator(pi.dim);
  std::vector<LinearOperator> ops;
  ops.reserve(xis.size());
  for (const auto& xi : xis) ops.push_back(pi.element(xi));
  return linear_combination(c, std::move(ops));
}

namespace {

std::optional<LinearOperator> lattice_combination(const RepSpec& rep, const std::vector<cplx>& c,
                                                  const std::vector<Eigen::VectorXd>& xis) {
  const GridSpec& s = rep.spec;
  std::vector<kernels::LatticeWeyl::Term> fwd, adj;
  fwd.reserve(c.size());
  adj.reserve(c.size());
  for (size_t j = 0; j < c.size(); ++j) {
    const Eigen::VectorXi k = require_dual(s, xis[j], "regular_rep");
    Eigen::VectorXi steps;
    if (!s.on_position_lattice(0.5 * musical_sharp(rep.pvs, xis[j]), &steps)) return std::nullopt;
    fwd.push_back({c[j], k, steps});
    adj.push_back({std::conj(c[j]), Eigen::VectorXi(-k), Eigen::VectorXi(-steps)});
  }
  auto F = std::make_shared<kernels::LatticeWeyl>(s, std::move(fwd));
  auto A = std::make_shared<kernels::LatticeWeyl>(s, std::move(adj));
  return LinearOperator{s.size(), [F](std::span<const cplx> x, std::span<cplx> y) { F->apply_omp(x, y); },
                        [A](std::span<const cplx> x, std::span<cplx> y) { A->apply_omp(x, y); }};
}

}  // namespace

Representation regular_representation(const RepSpec& rep) {
  Representation r{rep.spec.size(), rep.spec.n, [rep](const Eigen::VectorXd& xi) { return regular_rep_op(rep, xi); },
                   {}};
  r.combine = [rep, element = r.element, dim = r.dim, n = r.n](const std::vector<cplx>& c,
                                                               const std::vector<Eigen::VectorXd>& xis) {
    if (c.empty()) return zero_operator(dim);
    if (auto op = lattice_combination(rep, c, xis)) return *op;
    return combine_elements(Representation{dim, n, element, {}}, c, xis);
  };
  return r;
}

LinearOperator weyl_quantize(const Representation& pi, const PlaneWaveSum& f) {
  if (f.dim() != pi.n) throw ArgumentError("weyl_quantize: dimension mismatch");
  std::vector<cplx> c;
  std::vector<Eigen::VectorXd> xis;
  for (const auto& t : f.terms()) {
    c.push_back(t.coeff);
    xis.push_back(t.freq);
  }
  return pi.combine ? pi.combine(c, xis) : combine_elements(pi, c, xis);
}

LinearOperator weyl_quantize(const Representation& pi, const GridFunction& f, double floor) {
  if (f.spec.n != pi.n) throw ArgumentError("weyl_quantize: dimension mismatch");
  const GridFunction fc = fourier_inverse(f);
  const auto idx = retained_frequencies(fc, floor);
  const double cell = f.spec.dual_cell_volume();
  std::vector<cplx> c;
  std::vector<Eigen::VectorXd> xis;
  for (auto m : idx) {
    c.push_back(fc.values[m] * cell);
    xis.push_back(f.spec.frequency(m));
  }
  return pi.combine ? pi.combine(c, xis) : combine_elements(pi, c, xis);
}

namespace {

LinearOperator translation(const StarContext& ctx, const GridFunction& f, bool left) {
  const GridSpec& s = ctx.grid();
  if (!(f.spec == s)) throw ArgumentError("translation operator: grid mismatch");
  // the symbol's spectrum is fixed, so each apply is one twisted convolution
  struct Symbol {
    GridFunction spectrum;
    std::vector<std::int64_t> retained;
  };
  auto make = [&](const GridFunction& g) {
    auto sym = std::make_shared<Symbol>(Symbol{fourier_inverse(g), {}});
    sym->retained = retained_frequencies(sym->spectrum, ctx.spectral_floor);
    return sym;
  };
  auto fwd = make(f), adj = make(conjugate(f));
  const Eigen::MatrixXd sigma = ctx.pvs.sigma();
  const bool par = ctx.parallel;
  auto run = [s, sigma, left, par](const Symbol& sym, std::span<const cplx> x, std::span<cplx> y) {
    const GridFunction hc = fourier_inverse(GridFunction(s, Domain::position, std::vector<cplx>(x.begin(), x.end())));
    kernels::TwistedArgs args{&s, sym.spectrum.values, sym.retained, hc.values, sigma, left};
    GridFunction out(s, Domain::frequency);
    if (par)
      kernels::twisted_gather_omp(args, out.values);
    else
      kernels::twisted_gather_serial(args, out.values);
    const GridFunction r = fourier_forward(out);
    std::copy(r.values.begin(), r.values.end(), y.begin());
  };
  return {s.size(), [run, fwd](std::span<const cplx> x, std::span<cplx> y) { run(*fwd, x, y); },
          [run, adj](std::span<const cplx> x, std::span<cplx> y) { run(*adj, x, y); }};
}

}  // namespace

LinearOperator left_translation(const StarContext& ctx, const GridFunction& f) { return translation(ctx, f, true); }
LinearOperator right_translation(const StarContext& ctx, const GridFunction& g) {
  return translation(ctx, g, false);
}

double norm_bound_l1(const StarContext& ctx, const GridFunction& f) {
  if (!(f.spec == ctx.grid())) throw ArgumentError("norm_bound_l1: grid mismatch");
  return l1_norm_freq(fourier_inverse(f));
}

LinearOperator doubled_rep_op(const GridSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                              double lambda) {
  if (x.size() != spec.n || xi.size() != spec.n) throw ArgumentError("doubled_rep: dimension mismatch");
  const Eigen::VectorXi k = require_dual(spec, xi, "doubled_rep");
  const Eigen::VectorXi steps = require_position(spec, x, "doubled_rep");
  auto ph = std::make_shared<AxisPhases>(lattice_phases(spec, k, -1));
  auto phc = std::make_shared<AxisPhases>(lattice_phases(spec, k, +1));
  const cplx c = std::polar(1.0, 0.5 * xi.dot(x) + lambda);
  // W* = W(-x, -xi, -lambda): phi(z) -> e^{i<xi, z + x/2> - i lambda} phi(z + x)
  const cplx c_adj = std::polar(1.0, 0.5 * xi.dot(x) - lambda);
  return {spec.size(),
          [spec, ph, steps, c](std::span<const cplx> in, std::span<cplx> out) {
            phase_roll(spec, *ph, steps, c, in, out);
          },
          [spec, phc, steps, c_adj](std::span<const cplx> in, std::span<cplx> out) {
            phase_roll(spec, *phc, Eigen::VectorXi(-steps), c_adj, in, out);
          }};
}

OperatorMatrix doubled_rep(const GridSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                           double lambda) {
  return to_matrix(doubled_rep_op(spec, x, xi, lambda));
}

double doubled_symplectic(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& eta) {
  return xi.dot(y) - eta.dot(x);
}

GridFunction doubled_conjugate_symbol(const StarContext& ctx, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                                      const GridFunction& g) {
  if (x.size() != ctx.pvs.dim() || xi.size() != ctx.pvs.dim())
    throw ArgumentError("doubled_conjugate_symbol: dimension mismatch");
  return translate(g, x + 0.5 * musical_sharp(ctx.pvs, xi));
}

LinearOperator schroedinger_op(const GridSpec& spec, const HeisenbergElement& eta) {
  const int r = spec.n;
  if (eta.xi.size() != 2 * r) throw ArgumentError("schroedinger_op: expected 2r Darboux coordinates");
  const Eigen::VectorXd u = eta.xi.head(r), w = eta.xi.tail(r);
  const Eigen::VectorXi k = require_dual(spec, u, "schroedinger_op");
  const Eigen::VectorXi steps = require_position(spec, w, "schroedinger_op");
  auto ph = std::make_shared<AxisPhases>(lattice_phases(spec, k, +1));
  auto phc = std::make_shared<AxisPhases>(lattice_phases(spec, k, -1));
  const cplx c = std::polar(1.0, eta.lambda + 0.5 * u.dot(w));
  // adjoint = pi(-u, -w, -lambda): phi(s) -> e^{-i lambda} e^{-i u.(s - w/2)} phi(s - w)
  const cplx c_adj = std::polar(1.0, -eta.lambda + 0.5 * u.dot(w));
  return {spec.size(),
          [spec, ph, steps, c](std::span<const cplx> in, std::span<cplx> out) {
            phase_roll(spec, *ph, Eigen::VectorXi(-steps), c, in, out);
          },
          [spec, phc, steps, c_adj](std::span<const cplx> in, std::span<cplx> out) {
            phase_roll(spec, *phc, steps, c_adj, in, out);
          }};
}

IrrepData make_irrep(const RepSpec& rep) {
  IrrepData ir;
  ir.dec = rank_decomposition(rep.pvs);
  const int r2 = ir.dec.rank;
  if (r2 == 0) throw ArgumentError("make_irrep: sigma = 0 has only characters; no Schroedinger factor");
  if (rep.spec.n * 2 != r2) throw ArgumentError("make_irrep: carrier grid must have dimension rank/2");
  const Eigen::MatrixXd G = ir.dec.W_basis.transpose() * rep.pvs.sigma() * ir.dec.W_basis;
  ir.darboux = darboux_basis(0.5 * (G - G.transpose()));
  ir.to_darboux = ir.darboux.inverse() * ir.dec.W_basis.transpose();
  ir.weight = rep.weight.value_or(Eigen::VectorXd::Zero(rep.pvs.dim()));
  if (ir.weight.size() != rep.pvs.dim()) throw ArgumentError("make_irrep: weight has wrong dimension");
  ir.carrier = rep.spec;
  return ir;
}

LinearOperator irrep_op(const IrrepData& ir, const Eigen::VectorXd& xi_ker, const HeisenbergElement& eta) {
  if (xi_ker.size() != ir.weight.size()) throw ArgumentError("irrep_op: kernel covector has wrong dimension");
  // ker sigma is the orthogonal complement of W in V*.
  const Eigen::VectorXd along_w = ir.dec.W_basis.transpose() * xi_ker;
  if (along_w.norm() > 1e-10 * std::max(1.0, xi_ker.norm()))
    throw ArgumentError("irrep_op: covector is not in the kernel of sigma");
  LinearOperator op = schroedinger_op(ir.carrier, eta);
  const cplx ch = std::polar(1.0, xi_ker.dot(ir.weight));
  if (ch == cplx{1.0, 0.0}) return op;
  return linear_combination({ch}, {op});
}

Representation irrep_representation(const IrrepData& ir) {
  return {ir.carrier.size(), static_cast<int>(ir.weight.size()), [ir](const Eigen::VectorXd& xi) {
            const Eigen::VectorXd c = ir.dec.W_basis.transpose() * xi;
            const Eigen::VectorXd ker = xi - ir.dec.W_basis * c;
            return irrep_op(ir, ker, HeisenbergElement{ir.to_darboux * xi, 0.0});
          },
          {}};
}

LinearOperator rep_from_quantization(const QuantizationMap& w, const Eigen::VectorXd& xi) {
  return w(PlaneWaveSum::phase(xi));
}

double faithfulness_witness(const StarContext& ctx, const GridFunction& f) {
  const GridSpec& s = ctx.grid();
  double best = 0.0;
  const double offsets[] = {0.0, 0.25 * s.L, -0.25 * s.L};
  for (double o : offsets) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(s.n);
    c(0) = o;
    const GridFunction g = make_gaussian(s, c, Eigen::VectorXd::Ones(s.n));
    best = std::max(best, star_grid(ctx, f, g).l2_norm());
  }
  return best;
}

}  // namespace moyal
