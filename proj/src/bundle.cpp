#include "moyal/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "moyal/errors.hpp"
#include "moyal/star.hpp"

namespace moyal {

// ---------------------------------------------------------------------------
// base space and bundle

BaseSpace::BaseSpace(std::vector<BasePoint> pts, bool finite_flag) : points(std::move(pts)), finite(finite_flag) {
  std::set<std::string> seen;
  for (const auto& p : points)
    if (!seen.insert(p.id).second) throw ArgumentError("duplicate base point id '" + p.id + "'");
  neighbors.assign(points.size(), {});
}

BaseSpace BaseSpace::named(const std::vector<std::string>& ids, bool finite_flag) {
  std::vector<BasePoint> pts;
  for (const auto& id : ids) pts.push_back({id, Eigen::VectorXd(), 1.0, true});
  return BaseSpace(std::move(pts), finite_flag);
}

int BaseSpace::index_of(const std::string& id) const {
  for (int i = 0; i < size(); ++i)
    if (points[i].id == id) return i;
  throw ArgumentError("unknown base point '" + id + "'");
}

void BaseSpace::chain_neighbors() {
  neighbors.assign(points.size(), {});
  for (int i = 0; i < size(); ++i) {
    if (i > 0) neighbors[i].push_back(i - 1);
    if (i + 1 < size()) neighbors[i].push_back(i + 1);
  }
}

PoissonBundle::PoissonBundle(BaseSpace base, int n, std::vector<std::shared_ptr<const PoissonVectorSpace>> fibers)
    : base_(std::move(base)), n_(n), fibers_(std::move(fibers)) {
  if (static_cast<int>(fibers_.size()) != base_.size())
    throw ArgumentError("bundle needs one fiber per base point");
  for (const auto& f : fibers_) {
    if (!f) throw ArgumentError("null fiber");
    if (f->dim() != n_) throw ArgumentError("fiber dimension mismatch");
  }
}

PoissonBundle::PoissonBundle(BaseSpace base, const std::vector<Eigen::MatrixXd>& sigma_at)
    : base_(std::move(base)), n_(sigma_at.empty() ? 0 : static_cast<int>(sigma_at.front().rows())) {
  if (static_cast<int>(sigma_at.size()) != base_.size())
    throw ArgumentError("bundle needs one sigma per base point");
  for (const auto& s : sigma_at) {
    if (s.rows() != n_) throw ArgumentError("fiber dimension mismatch");
    fibers_.push_back(std::make_shared<const PoissonVectorSpace>(s));
  }
}

PoissonBundle PoissonBundle::constant(BaseSpace base, const PoissonVectorSpace& pvs) {
  auto shared = std::make_shared<const PoissonVectorSpace>(pvs);
  std::vector<std::shared_ptr<const PoissonVectorSpace>> fibers(base.points.size(), shared);
  const int n = pvs.dim();
  return PoissonBundle(std::move(base), n, std::move(fibers));
}

PoissonBundle PoissonBundle::from_json(const nlohmann::json& j) {
  try {
    std::vector<BasePoint> pts;
    for (const auto& e : j.at("base")) {
      BasePoint p;
      if (e.is_string()) {
        p.id = e.get<std::string>();
      } else {
        p.id = e.at("id").get<std::string>();
        if (e.contains("coords")) {
          const auto c = e.at("coords").get<std::vector<double>>();
          p.coords = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        }
        p.weight = e.value("weight", 1.0);
        p.compact = e.value("compact", true);
      }
      pts.push_back(std::move(p));
    }
    BaseSpace base(std::move(pts), j.value("finite", true));
    const int n = j.at("n").get<int>();
    std::vector<Eigen::MatrixXd> sig;
    for (const auto& p : base.points) {
      const auto rows = j.at("sigma_at").at(p.id).get<std::vector<std::vector<double>>>();
      if (static_cast<int>(rows.size()) != n) throw ArgumentError("sigma_at['" + p.id + "'] has wrong size");
      Eigen::MatrixXd s(n, n);
      for (int r = 0; r < n; ++r) {
        if (static_cast<int>(rows[r].size()) != n) throw ArgumentError("sigma_at['" + p.id + "'] is not square");
        for (int c = 0; c < n; ++c) s(r, c) = rows[r][c];
      }
      sig.push_back(s);
    }
    if (j.contains("neighbors")) {
      for (const auto& [id, list] : j.at("neighbors").items()) {
        const int i = base.index_of(id);
        for (const auto& nb : list) base.neighbors[i].push_back(base.index_of(nb.get<std::string>()));
      }
    }
    if (sig.empty()) return PoissonBundle(std::move(base), n, {});
    return PoissonBundle(std::move(base), sig);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("bad bundle description: ") + e.what());
  }
}

nlohmann::json PoissonBundle::to_json() const {
  nlohmann::json base = nlohmann::json::array(), sig = nlohmann::json::object(), nb = nlohmann::json::object();
  for (int i = 0; i < size(); ++i) {
    const auto& p = base_.points[i];
    base.push_back({{"id", p.id},
                    {"coords", std::vector<double>(p.coords.data(), p.coords.data() + p.coords.size())},
                    {"weight", p.weight},
                    {"compact", p.compact}});
    std::vector<std::vector<double>> rows(n_, std::vector<double>(n_));
    for (int r = 0; r < n_; ++r)
      for (int c = 0; c < n_; ++c) rows[r][c] = fiber(i).sigma()(r, c);
    sig[p.id] = rows;
    std::vector<std::string> ids;
    for (int k : base_.neighbors[i]) ids.push_back(base_.points[k].id);
    nb[p.id] = ids;
  }
  return {{"base", base}, {"n", n_}, {"sigma_at", sig}, {"finite", base_.finite}, {"neighbors", nb}};
}

// ---------------------------------------------------------------------------
// sections

SectionOverBase::SectionOverBase(std::shared_ptr<const PoissonBundle> b, std::vector<FiberValue> v)
    : bundle(std::move(b)), values(std::move(v)) {
  if (!bundle) throw ArgumentError("section without bundle");
  if (static_cast<int>(values.size()) != bundle->size()) throw ArgumentError("section needs a value at every point");
  for (const auto& x : values)
    if (x.index() != values.front().index()) throw ArgumentError("section mixes plane-wave and grid fibers");
}

SectionOverBase SectionOverBase::from_function(std::shared_ptr<const PoissonBundle> b,
                                               const std::function<FiberValue(int)>& value_at) {
  std::vector<FiberValue> v;
  for (int i = 0; i < b->size(); ++i) v.push_back(value_at(i));
  return SectionOverBase(std::move(b), std::move(v));
}

bool SectionOverBase::is_grid() const {
  return !values.empty() && std::holds_alternative<GridFunction>(values.front());
}

SectionOverBase fiber_star(const SectionOverBase& phi, const SectionOverBase& psi) {
  if (phi.bundle != psi.bundle && phi.bundle->size() != psi.bundle->size())
    throw ArgumentError("sections over different bundles");
  const auto& B = *phi.bundle;
  std::vector<FiberValue> out;
  out.reserve(phi.values.size());
  for (int i = 0; i < B.size(); ++i) {
    const auto& a = phi.values[i];
    const auto& b = psi.values[i];
    const auto* ga = std::get_if<GridFunction>(&a);
    const auto* gb = std::get_if<GridFunction>(&b);
    if (!ga && !gb) {
      out.emplace_back(star_exact(StarContext(B.fiber(i)), std::get<PlaneWaveSum>(a), std::get<PlaneWaveSum>(b)));
    } else if (ga && gb) {
      out.emplace_back(star_grid(StarContext(B.fiber(i), ga->spec), *ga, *gb));
    } else if (ga) {
      out.emplace_back(star_mixed(StarContext(B.fiber(i), ga->spec, Backend::mixed), *ga, std::get<PlaneWaveSum>(b)));
    } else {
      out.emplace_back(star_mixed(StarContext(B.fiber(i), gb->spec, Backend::mixed), std::get<PlaneWaveSum>(a), *gb));
    }
  }
  return SectionOverBase(phi.bundle, std::move(out));
}

double section_sup_seminorm(const SectionOverBase& phi, int p, int q, const std::vector<std::string>& K) {
  if (K.empty()) throw ArgumentError("seminorm over an empty set of points");
  if (!phi.is_grid()) throw UnsupportedRepresentation("sup seminorms need grid fibers");
  double m = 0.0;
  for (const auto& id : K) m = std::max(m, seminorm(std::get<GridFunction>(evaluation(phi, id)), p, q));
  return m;
}

SectionOverBase module_action(const std::vector<double>& f, const SectionOverBase& phi) {
  if (static_cast<int>(f.size()) != phi.bundle->size()) throw ArgumentError("scalar function needs one value per point");
  std::vector<FiberValue> out = phi.values;
  for (size_t i = 0; i < out.size(); ++i) std::visit([&](auto& v) { v *= f[i]; }, out[i]);
  return SectionOverBase(phi.bundle, std::move(out));
}

const FiberValue& evaluation(const SectionOverBase& phi, const std::string& id) {
  return phi.values[phi.bundle->base().index_of(id)];
}

double cstar_fiber_sup_norm(const SectionOverBase& phi, const GridSpec& spec, const NormOptions& opt) {
  double m = 0.0;
  for (int i = 0; i < phi.bundle->size(); ++i) {
    GridFunction f = std::holds_alternative<GridFunction>(phi.values[i])
                         ? std::get<GridFunction>(phi.values[i])
                         : sample_planewave(std::get<PlaneWaveSum>(phi.values[i]), spec);
    if (!(f.spec == spec)) throw ArgumentError("fiber grid differs from the norm grid");
    if (f.max_abs() == 0.0) continue;
    const auto r = operator_norm(left_translation(StarContext(phi.bundle->fiber(i), spec), f), opt);
    m = std::max(m, r.value);
  }
  return m;
}

// ---------------------------------------------------------------------------
// finite C0(X)-algebras

FiniteCStarModuleAlgebra::FiniteCStarModuleAlgebra(BaseSpace b, std::vector<int> dims,
                                                   std::vector<std::optional<int>> points)
    : base(std::move(b)), block_dims(std::move(dims)), block_point(std::move(points)) {
  if (!base.finite) throw ArgumentError("finite algebra over a non-finite base");
  if (block_dims.size() != block_point.size()) throw ArgumentError("one base point per block");
  for (size_t i = 0; i < block_dims.size(); ++i) {
    if (block_dims[i] < 1) throw ArgumentError("block dimension must be positive");
    if (block_point[i] && (*block_point[i] < 0 || *block_point[i] >= base.size()))
      throw ArgumentError("block point out of range");
  }
}

FiniteCStarModuleAlgebra FiniteCStarModuleAlgebra::pointwise(BaseSpace b, const std::vector<std::vector<int>>& fibers) {
  if (static_cast<int>(fibers.size()) != b.size()) throw ArgumentError("one block list per base point");
  std::vector<int> dims;
  std::vector<std::optional<int>> pts;
  for (int x = 0; x < b.size(); ++x)
    for (int d : fibers[x]) {
      dims.push_back(d);
      pts.emplace_back(x);
    }
  return FiniteCStarModuleAlgebra(std::move(b), std::move(dims), std::move(pts));
}

int FiniteCStarModuleAlgebra::dim() const {
  int t = 0;
  for (int d : block_dims) t += d * d;
  return t;
}

int FiniteCStarModuleAlgebra::block_offset(int b) const {
  int t = 0;
  for (int i = 0; i < b; ++i) t += block_dims[i] * block_dims[i];
  return t;
}

Eigen::MatrixXd FiniteCStarModuleAlgebra::action_matrix(const Eigen::VectorXd& f) const {
  if (f.size() != base.size()) throw ArgumentError("scalar function needs one value per point");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
  for (size_t b = 0; b < block_dims.size(); ++b) {
    if (!block_point[b]) continue;
    const int o = block_offset(static_cast<int>(b)), d = block_dims[b];
    for (int k = 0; k < d * d; ++k) m(o + k, o + k) = f(*block_point[b]);
  }
  return m;
}

namespace {

// orthonormal basis of the column span, with its orthogonal complement
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> span_and_complement(const Eigen::MatrixXd& S, int D) {
  if (S.cols() == 0) return {Eigen::MatrixXd(D, 0), Eigen::MatrixXd::Identity(D, D)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S * S.transpose());
  const auto& ev = es.eigenvalues();
  const double cut = 1e-9 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<int> in, out;
  for (int i = 0; i < D; ++i) (ev(i) > cut ? in : out).push_back(i);
  Eigen::MatrixXd U(D, in.size()), C(D, out.size());
  for (size_t k = 0; k < in.size(); ++k) U.col(k) = es.eigenvectors().col(in[k]);
  for (size_t k = 0; k < out.size(); ++k) C.col(k) = es.eigenvectors().col(out[k]);
  return {U, C};
}

Eigen::MatrixXd ideal_generators(const FiniteCStarModuleAlgebra& A, int x) {
  // I_x is spanned by the indicator functions of the other points
  const int D = A.dim(), X = A.base.size();
  Eigen::MatrixXd S(D, D * std::max(0, X - 1));
  int c = 0;
  for (int y = 0; y < X; ++y) {
    if (y == x) continue;
    S.middleCols(c * D, D) = A.action_matrix(Eigen::VectorXd::Unit(X, y));
    ++c;
  }
  return S;
}

template <class F>
void for_blocks(const std::vector<int>& dims, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                Eigen::VectorXcd& out, F&& op) {
  int o = 0;
  for (int d : dims) {
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(a.data() + o, d, d);
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> B(b.data() + o, d, d);
    Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> R(out.data() + o, d, d);
    op(A, B, R);
    o += d * d;
  }
}

Eigen::VectorXcd blocks_multiply(const std::vector<int>& dims, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(a.size());
  for_blocks(dims, a, b, out, [](const auto& A, const auto& B, auto& R) { R = A * B; });
  return out;
}

Eigen::VectorXcd blocks_adjoint(const std::vector<int>& dims, const Eigen::VectorXcd& a) {
  Eigen::VectorXcd out(a.size());
  for_blocks(dims, a, a, out, [](const auto& A, const auto&, auto& R) { R = A.adjoint(); });
  return out;
}

double blocks_norm(const std::vector<int>& dims, const Eigen::VectorXcd& a) {
  double m = 0.0;
  int o = 0;
  for (int d : dims) {
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(a.data() + o, d, d);
    m = std::max(m, Eigen::JacobiSVD<Eigen::MatrixXcd>(Eigen::MatrixXcd(A)).singularValues()(0));
    o += d * d;
  }
  return m;
}

}  // namespace

bool FiniteCStarModuleAlgebra::nondegenerate() const {
  const int D = dim(), X = base.size();
  Eigen::MatrixXd S(D, D * X);
  for (int y = 0; y < X; ++y) S.middleCols(y * D, D) = action_matrix(Eigen::VectorXd::Unit(X, y));
  return span_and_complement(S, D).first.cols() == D;
}

Eigen::VectorXcd FiniteCStarModuleAlgebra::multiply(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const {
  return blocks_multiply(block_dims, a, b);
}

Eigen::VectorXcd FiniteCStarModuleAlgebra::adjoint(const Eigen::VectorXcd& a) const {
  return blocks_adjoint(block_dims, a);
}

double FiniteCStarModuleAlgebra::norm(const Eigen::VectorXcd& a) const { return blocks_norm(block_dims, a); }

QuotientFiber sr_fiber(const FiniteCStarModuleAlgebra& A, int x) {
  if (x < 0 || x >= A.base.size()) throw ArgumentError("point not in base");
  const int D = A.dim();
  const auto [U, C] = span_and_complement(ideal_generators(A, x), D);
  QuotientFiber q;
  q.point = x;
  q.ideal_dim = static_cast<int>(U.cols());
  q.dim = static_cast<int>(C.cols());
  q.quotient = C.transpose();

  // a block survives when its coordinates are not all inside the ideal
  std::vector<int> rows;
  for (int b = 0; b < static_cast<int>(A.block_dims.size()); ++b) {
    const int o = A.block_offset(b), d = A.block_dims[b];
    const double leak = C.middleRows(o, d * d).norm();
    if (leak > 1e-9) {
      q.blocks.push_back(b);
      q.fiber_dims.push_back(d);
      for (int k = 0; k < d * d; ++k) rows.push_back(o + k);
    }
  }
  // P selects the surviving entries; it vanishes on the ideal, so it factors through the quotient
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(rows.size(), D);
  for (size_t r = 0; r < rows.size(); ++r) P(r, rows[r]) = 1.0;
  if (U.cols() > 0 && P.rows() > 0 && (P * U).cwiseAbs().maxCoeff() > 1e-9)
    throw NumericError("ideal is not a sum of blocks", 0, 0);
  q.to_fiber = P * C;
  if (q.to_fiber.rows() != q.to_fiber.cols()) throw NumericError("quotient and fiber dimensions differ", 0, 0);
  q.from_fiber = q.dim ? Eigen::MatrixXd(q.to_fiber.inverse()) : Eigen::MatrixXd(0, 0);
  return q;
}

QuotientFiber sr_fiber(const FiniteCStarModuleAlgebra& A, const std::string& id) {
  return sr_fiber(A, A.base.index_of(id));
}

Eigen::VectorXcd fiber_multiply(const QuotientFiber& q, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return blocks_multiply(q.fiber_dims, a, b);
}

Eigen::VectorXcd fiber_adjoint(const QuotientFiber& q, const Eigen::VectorXcd& a) {
  return blocks_adjoint(q.fiber_dims, a);
}

double fiber_norm(const QuotientFiber& q, const Eigen::VectorXcd& a) { return blocks_norm(q.fiber_dims, a); }

RoundtripReport sectional_roundtrip(const FiniteCStarModuleAlgebra& A, std::uint64_t seed) {
  RoundtripReport r;
  const int D = A.dim(), X = A.base.size();
  r.dim_algebra = D;
  r.nondegenerate = A.nondegenerate();

  std::vector<QuotientFiber> fib;
  std::vector<Eigen::MatrixXd> T;  // A -> fiber entries at x
  int total = 0;
  for (int x = 0; x < X; ++x) {
    fib.push_back(sr_fiber(A, x));
    T.push_back(fib.back().to_fiber * fib.back().quotient);
    total += fib.back().dim;
  }
  r.dim_sections = total;
  if (!r.nondegenerate) {
    r.failure = "module action is degenerate: Phi(C0(X))A is a proper subspace, so A is not a C0(X)-algebra";
    return r;
  }

  Eigen::MatrixXd big(total, D);
  int row = 0;
  for (const auto& t : T) {
    big.middleRows(row, t.rows()) = t;
    row += static_cast<int>(t.rows());
  }
  r.bijective = total == D && Eigen::FullPivLU<Eigen::MatrixXd>(big).rank() == D;

  auto at = [&](int x, const Eigen::VectorXcd& a) -> Eigen::VectorXcd { return T[x].cast<cplx>() * a; };
  for (int i = 0; i < D; ++i) {
    const Eigen::VectorXcd ei = Eigen::VectorXcd::Unit(D, i);
    for (int x = 0; x < X; ++x) {
      if (fib[x].dim == 0) continue;
      const double d = (at(x, A.adjoint(ei)) - fiber_adjoint(fib[x], at(x, ei))).cwiseAbs().maxCoeff();
      r.involution_defect = std::max(r.involution_defect, d);
    }
    for (int j = 0; j < D; ++j) {
      const Eigen::VectorXcd ej = Eigen::VectorXcd::Unit(D, j);
      const Eigen::VectorXcd eij = A.multiply(ei, ej);
      for (int x = 0; x < X; ++x) {
        if (fib[x].dim == 0) continue;
        const double d = (at(x, eij) - fiber_multiply(fib[x], at(x, ei), at(x, ej))).cwiseAbs().maxCoeff();
        r.multiplication_defect = std::max(r.multiplication_defect, d);
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int s = 0; s < 10; ++s) {
    Eigen::VectorXcd a(D);
    for (auto& v : a) v = {g(rng), g(rng)};
    double sec = 0.0;
    for (int x = 0; x < X; ++x)
      if (fib[x].dim) sec = std::max(sec, fiber_norm(fib[x], at(x, a)));
    const double full = A.norm(a);
    r.isometry_defect = std::max(r.isometry_defect, std::abs(sec - full) / std::max(1.0, full));
  }

  if (!r.bijective)
    r.failure = "section map is not bijective";
  else if (r.multiplication_defect > 1e-12)
    r.failure = "section map is not multiplicative";
  else if (r.involution_defect > 1e-12)
    r.failure = "section map does not preserve the involution";
  else if (r.isometry_defect > 1e-12)
    r.failure = "section map is not isometric";
  return r;
}

PoissonBundle pullback_bundle(const std::vector<int>& f, const BaseSpace& source, const PoissonBundle& B) {
  if (static_cast<int>(f.size()) != source.size()) throw ArgumentError("map must be total on the source");
  std::vector<std::shared_ptr<const PoissonVectorSpace>> fibers;
  for (int y : f) {
    if (y < 0 || y >= B.size()) throw ArgumentError("map leaves the target base");
    fibers.push_back(B.fiber_ptr(y));
  }
  return PoissonBundle(source, B.n(), std::move(fibers));
}

FiniteCStarModuleAlgebra change_base_ring(const std::vector<int>& f, const BaseSpace& target,
                                          const FiniteCStarModuleAlgebra& A) {
  if (static_cast<int>(f.size()) != A.base.size()) throw ArgumentError("map must be total on the source");
  std::vector<std::optional<int>> pts;
  for (const auto& p : A.block_point) {
    if (p && (f[*p] < 0 || f[*p] >= target.size())) throw ArgumentError("map leaves the target base");
    pts.push_back(p ? std::optional<int>(f[*p]) : std::nullopt);
  }
  return FiniteCStarModuleAlgebra(target, A.block_dims, std::move(pts));
}

std::vector<FiberFormulaReport> fiber_formula_check(const std::vector<int>& f, const BaseSpace& target,
                                                    const FiniteCStarModuleAlgebra& A) {
  const auto pushed = change_base_ring(f, target, A);
  std::vector<FiberFormulaReport> out;
  for (int y = 0; y < target.size(); ++y) {
    FiberFormulaReport rep;
    rep.point = y;
    const auto qy = sr_fiber(pushed, y);
    rep.dim_pushed = qy.dim;

    // direct sum over the preimage, rows keyed by (block, entry)
    std::vector<std::pair<int, Eigen::RowVectorXd>> rows;
    for (int x = 0; x < A.base.size(); ++x) {
      if (f[x] != y) continue;
      const auto qx = sr_fiber(A, x);
      rep.dim_preimage += qx.dim;
      const Eigen::MatrixXd t = qx.to_fiber * qx.quotient;
      int r = 0;
      for (size_t k = 0; k < qx.blocks.size(); ++k)
        for (int e = 0; e < qx.fiber_dims[k] * qx.fiber_dims[k]; ++e, ++r)
          rows.emplace_back(A.block_offset(qx.blocks[k]) + e, t.row(r));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const Eigen::MatrixXd ty = qy.to_fiber * qy.quotient;
    if (static_cast<int>(rows.size()) == ty.rows()) {
      for (size_t r = 0; r < rows.size(); ++r)
        rep.map_defect = std::max(rep.map_defect, (ty.row(r) - rows[r].second).cwiseAbs().maxCoeff());
    } else {
      rep.map_defect = std::numeric_limits<double>::infinity();
    }
    rep.ok = rep.dim_pushed == rep.dim_preimage && rep.map_defect < 1e-12;
    out.push_back(rep);
  }
  return out;
}

UscReport usc_sample_check(const SectionOverBase& phi, int p, int q, double jump_threshold) {
  const auto& base = phi.bundle->base();
  if (!phi.is_grid()) throw UnsupportedRepresentation("semicontinuity sweep needs grid fibers");
  UscReport r;
  for (const auto& v : phi.values) r.values.push_back(seminorm(std::get<GridFunction>(v), p, q));
  for (int i = 0; i < base.size(); ++i) {
    double lo = r.values[i];
    if (static_cast<size_t>(i) < base.neighbors.size())
      for (int k : base.neighbors[i]) lo = std::min(lo, r.values[k]);
    r.excess.push_back(r.values[i] - lo);
    const bool bad = r.excess.back() > jump_threshold;
    r.violation.push_back(bad);
    r.violations += bad;
  }
  return r;
}

}  // namespace moyal
