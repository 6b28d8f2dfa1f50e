#include "moyal/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include <fftw3.h>

#include "moyal/errors.hpp"

namespace moyal {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe, execution is.  Plans are created once per
// (n, N, sign) with FFTW_ESTIMATE so results never depend on timing.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int N, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(n, N, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<int> dims(n, N);
    std::int64_t total = 1;
    for (int i = 0; i < n; ++i) total *= N;
    auto* buf = fftw_alloc_complex(static_cast<size_t>(total));
    fftw_plan p = fftw_plan_dft(n, dims.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw std::runtime_error("fftw planning failed");
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void require_same(const GridFunction& a, const GridFunction& b, const char* what) {
  if (!(a.spec == b.spec) || a.domain != b.domain || a.values.size() != b.values.size())
    throw ArgumentError(std::string(what) + ": grid functions live on different grids");
}

void require_domain(const GridFunction& f, Domain d, const char* what) {
  if (f.domain != d)
    throw ArgumentError(std::string(what) + (d == Domain::position ? ": expected position samples"
                                                                    : ": expected a spectrum"));
}

bool near_integer(double v, long& out, double tol) {
  const double r = std::round(v);
  if (std::abs(v - r) > tol) return false;
  out = static_cast<long>(r);
  return true;
}

}  // namespace

void GridSpec::validate() const {
  if (n < 1) throw ArgumentError("grid dimension must be positive");
  if (N < 2 || N % 2 != 0) throw ArgumentError("samples per axis must be even and >= 2");
  if (!(L > 0.0) || !std::isfinite(L)) throw ArgumentError("box half-width must be positive");
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) {
    total *= N;
    if (total > kMaxSamples) throw ArgumentError("grid exceeds the sample cap");
  }
}

std::int64_t GridSpec::size() const {
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) total *= N;
  return total;
}

double GridSpec::dual_step() const { return kPi / L; }
double GridSpec::cell_volume() const { return std::pow(spacing(), n); }
double GridSpec::dual_cell_volume() const { return std::pow(dual_step(), n); }

void GridSpec::unflatten(std::int64_t flat, std::span<int> idx) const {
  for (int a = n - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % N);
    flat /= N;
  }
}

std::int64_t GridSpec::flatten(std::span<const int> idx) const {
  std::int64_t flat = 0;
  for (int a = 0; a < n; ++a) flat = flat * N + idx[a];
  return flat;
}

Eigen::VectorXd GridSpec::point(std::int64_t flat) const {
  std::vector<int> idx(n);
  unflatten(flat, idx);
  Eigen::VectorXd x(n);
  for (int a = 0; a < n; ++a) x(a) = -L + idx[a] * spacing();
  return x;
}

Eigen::VectorXd GridSpec::frequency(std::int64_t flat) const {
  return frequency_label(flat).cast<double>() * dual_step();
}

Eigen::VectorXi GridSpec::frequency_label(std::int64_t flat) const {
  std::vector<int> idx(n);
  unflatten(flat, idx);
  Eigen::VectorXi k(n);
  for (int a = 0; a < n; ++a) k(a) = idx[a] - N / 2;
  return k;
}

bool GridSpec::on_dual_lattice(const Eigen::VectorXd& xi, Eigen::VectorXi* label, double tol) const {
  if (xi.size() != n) return false;
  Eigen::VectorXi k(n);
  for (int a = 0; a < n; ++a) {
    long v;
    if (!near_integer(xi(a) / dual_step(), v, tol)) return false;
    if (v < -N / 2 || v >= N / 2) return false;
    k(a) = static_cast<int>(v);
  }
  if (label) *label = k;
  return true;
}

bool GridSpec::on_dual_lattice_any(const Eigen::VectorXd& xi, Eigen::VectorXi* label, double tol) const {
  if (xi.size() != n) return false;
  Eigen::VectorXi k(n);
  for (int a = 0; a < n; ++a) {
    long v;
    if (!near_integer(xi(a) / dual_step(), v, tol)) return false;
    k(a) = static_cast<int>(v);
  }
  if (label) *label = k;
  return true;
}

bool GridSpec::on_position_lattice(const Eigen::VectorXd& a, Eigen::VectorXi* steps, double tol) const {
  if (a.size() != n) return false;
  Eigen::VectorXi s(n);
  for (int i = 0; i < n; ++i) {
    long v;
    if (!near_integer(a(i) / spacing(), v, tol)) return false;
    s(i) = static_cast<int>(v);
  }
  if (steps) *steps = s;
  return true;
}

GridSpec GridSpec::commensurate(int n, int N, double quantum) {
  if (!(quantum > 0.0)) throw ArgumentError("commensurate grid needs a positive quantum");
  // (1/2) sigma^{kj} (pi/L) k_k is an integer multiple of 2L/N iff L^2 = (pi N quantum / 4) / m.
  GridSpec s{n, std::sqrt(kPi * N * quantum / 4.0), N};
  s.validate();
  return s;
}

GridFunction::GridFunction(const GridSpec& s, Domain d) : spec(s), domain(d) {
  spec.validate();
  values.assign(static_cast<size_t>(spec.size()), cplx{0.0, 0.0});
}

GridFunction::GridFunction(const GridSpec& s, Domain d, std::vector<cplx> v)
    : spec(s), domain(d), values(std::move(v)) {
  spec.validate();
  if (static_cast<std::int64_t>(values.size()) != spec.size())
    throw ArgumentError("sample count does not match grid");
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::l2_norm() const {
  double s = 0.0;
  for (const auto& v : values) s += std::norm(v);
  const double vol = domain == Domain::position ? spec.cell_volume() : spec.dual_cell_volume();
  return std::sqrt(s * vol);
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same(*this, o, "operator+=");
  for (size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same(*this, o, "operator-=");
  for (size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}

GridFunction& GridFunction::operator*=(cplx s) {
  for (auto& v : values) v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx s, GridFunction a) { return a *= s; }

GridFunction pointwise_product(const GridFunction& a, const GridFunction& b) {
  require_same(a, b, "pointwise_product");
  require_domain(a, Domain::position, "pointwise_product");
  GridFunction out = a;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] *= b.values[i];
  return out;
}

GridFunction conjugate(const GridFunction& f) {
  require_domain(f, Domain::position, "conjugate");
  GridFunction out = f;
  for (auto& v : out.values) v = std::conj(v);
  return out;
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  require_same(a, b, "max_abs_diff");
  double m = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

void dft_inplace(const GridSpec& spec, std::span<cplx> data, int sign) {
  if (static_cast<std::int64_t>(data.size()) != spec.size()) throw ArgumentError("dft: size mismatch");
  fftw_plan p = PlanCache::instance().get(spec.n, spec.N, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
}

namespace {

// Centered-order <-> FFT-order permutation with the (-1)^{sum k} sign folded in.
// perm[m] is the FFT-order index of centered index m.
struct CenterMap {
  std::vector<std::int64_t> perm;
  std::vector<double> sign;
};

const CenterMap& center_map(const GridSpec& s) {
  thread_local GridSpec cached{0, 0.0, 0};
  thread_local CenterMap map;
  if (cached == s) return map;
  const int n = s.n, N = s.N;
  const std::int64_t total = s.size();
  map.perm.resize(static_cast<size_t>(total));
  map.sign.resize(static_cast<size_t>(total));
  std::vector<int> idx(n, 0);
  for (std::int64_t m = 0; m < total; ++m) {
    std::int64_t dst = 0;
    int ksum = 0;
    for (int a = 0; a < n; ++a) {
      dst = dst * N + (idx[a] + N / 2) % N;
      ksum += idx[a] - N / 2;
    }
    map.perm[m] = dst;
    map.sign[m] = (ksum % 2 == 0) ? 1.0 : -1.0;
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < N) break;
      idx[a] = 0;
    }
  }
  cached = s;
  return map;
}

}  // namespace

GridFunction fourier_inverse(const GridFunction& f) {
  require_domain(f, Domain::position, "fourier_inverse");
  const auto& s = f.spec;
  std::vector<cplx> buf = f.values;
  dft_inplace(s, buf, -1);
  // x_0 = -L gives the factor e^{i xi_k L} = (-1)^{sum k}.
  const double scale = std::pow(s.spacing() / (2.0 * kPi), s.n);
  const CenterMap& cm = center_map(s);
  GridFunction out(s, Domain::frequency);
  for (std::int64_t m = 0; m < s.size(); ++m) out.values[m] = (cm.sign[m] * scale) * buf[cm.perm[m]];
  return out;
}

GridFunction fourier_forward(const GridFunction& fcheck) {
  require_domain(fcheck, Domain::frequency, "fourier_forward");
  const auto& s = fcheck.spec;
  std::vector<cplx> buf(fcheck.values.size());
  const double scale = s.dual_cell_volume();
  const CenterMap& cm = center_map(s);
  for (std::int64_t m = 0; m < s.size(); ++m) buf[cm.perm[m]] = (cm.sign[m] * scale) * fcheck.values[m];
  dft_inplace(s, buf, +1);
  return GridFunction(s, Domain::position, std::move(buf));
}

GridFunction spectral_derivative(const GridFunction& f, std::span<const int> beta) {
  require_domain(f, Domain::position, "spectral_derivative");
  if (static_cast<int>(beta.size()) != f.spec.n) throw ArgumentError("derivative order has wrong length");
  if (std::all_of(beta.begin(), beta.end(), [](int b) { return b == 0; })) return f;
  GridFunction fc = fourier_inverse(f);
  const auto& s = f.spec;
  for (std::int64_t m = 0; m < s.size(); ++m) {
    const Eigen::VectorXd xi = s.frequency(m);
    cplx factor{1.0, 0.0};
    for (int a = 0; a < s.n; ++a)
      for (int r = 0; r < beta[a]; ++r) factor *= cplx{0.0, xi(a)};
    fc.values[m] *= factor;
  }
  return fourier_forward(fc);
}

GridFunction monomial_multiply(const GridFunction& f, std::span<const int> alpha) {
  require_domain(f, Domain::position, "monomial_multiply");
  if (static_cast<int>(alpha.size()) != f.spec.n) throw ArgumentError("monomial order has wrong length");
  GridFunction out = f;
  const auto& s = f.spec;
  std::vector<int> idx(s.n);
  for (std::int64_t m = 0; m < s.size(); ++m) {
    s.unflatten(m, idx);
    double w = 1.0;
    for (int a = 0; a < s.n; ++a) w *= std::pow(-s.L + idx[a] * s.spacing(), alpha[a]);
    out.values[m] *= w;
  }
  return out;
}

std::vector<std::vector<int>> multi_indices(int n, int order) {
  std::vector<std::vector<int>> out;
  for (int total = 0; total <= order; ++total) {
    // all compositions of `total` into n parts, lexicographically descending in axis 0
    std::vector<int> c(n, 0);
    auto rec = [&](auto&& self, int axis, int left) -> void {
      if (axis == n - 1) {
        c[axis] = left;
        out.push_back(c);
        return;
      }
      for (int v = left; v >= 0; --v) {
        c[axis] = v;
        self(self, axis + 1, left - v);
      }
    };
    rec(rec, 0, total);
  }
  return out;
}

double seminorm(const GridFunction& f, int p, int q) {
  require_domain(f, Domain::position, "seminorm");
  if (p < 0 || q < 0) throw ArgumentError("seminorm orders must be nonnegative");
  const auto alphas = multi_indices(f.spec.n, p);
  const auto betas = multi_indices(f.spec.n, q);
  double total = 0.0;
  for (const auto& beta : betas) {
    const GridFunction d = spectral_derivative(f, beta);
    for (const auto& alpha : alphas) total += monomial_multiply(d, alpha).max_abs();
  }
  return total;
}

double l1_norm_freq(const GridFunction& fcheck) {
  require_domain(fcheck, Domain::frequency, "l1_norm_freq");
  double s = 0.0;
  for (const auto& v : fcheck.values) s += std::abs(v);
  return s * fcheck.spec.dual_cell_volume();
}

GridFunction make_gaussian(const GridSpec& spec, const Eigen::VectorXd& center, const Eigen::VectorXd& widths) {
  if (center.size() != spec.n || widths.size() != spec.n) throw ArgumentError("make_gaussian: dimension mismatch");
  if ((widths.array() <= 0.0).any()) throw ArgumentError("make_gaussian: widths must be positive");
  GridFunction out(spec, Domain::position);
  std::vector<int> idx(spec.n);
  for (std::int64_t m = 0; m < spec.size(); ++m) {
    spec.unflatten(m, idx);
    double e = 0.0;
    for (int a = 0; a < spec.n; ++a) {
      const double d = (-spec.L + idx[a] * spec.spacing() - center(a)) / widths(a);
      e += d * d;
    }
    out.values[m] = std::exp(-0.5 * e);
  }
  return out;
}

namespace {

GridFunction roll(const GridFunction& f, const Eigen::VectorXi& steps) {
  const auto& s = f.spec;
  GridFunction out(s, f.domain);
  std::vector<int> idx(s.n);
  for (std::int64_t m = 0; m < s.size(); ++m) {
    s.unflatten(m, idx);
    for (int a = 0; a < s.n; ++a) idx[a] = ((idx[a] - steps(a)) % s.N + s.N) % s.N;
    out.values[m] = f.values[s.flatten(idx)];
  }
  return out;
}

}  // namespace

GridFunction translate_spectrum(const GridFunction& fcheck, const Eigen::VectorXd& a) {
  require_domain(fcheck, Domain::frequency, "translate_spectrum");
  if (a.size() != fcheck.spec.n) throw ArgumentError("translate: dimension mismatch");
  GridFunction ramp = fcheck;
  for (std::int64_t m = 0; m < ramp.spec.size(); ++m)
    ramp.values[m] *= std::polar(1.0, -fcheck.spec.frequency(m).dot(a));
  return fourier_forward(ramp);
}

GridFunction translate(const GridFunction& f, const Eigen::VectorXd& a) {
  require_domain(f, Domain::position, "translate");
  if (a.size() != f.spec.n) throw ArgumentError("translate: dimension mismatch");
  Eigen::VectorXi steps;
  if (f.spec.on_position_lattice(a, &steps)) return roll(f, steps);
  return translate_spectrum(fourier_inverse(f), a);
}

}  // namespace moyal
