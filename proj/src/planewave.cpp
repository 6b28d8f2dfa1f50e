#include "moyal/planewave.hpp"

#include <algorithm>
#include <cmath>

#include "moyal/errors.hpp"

namespace moyal {

PlaneWaveSum::PlaneWaveSum(int n, double tol) : n_(n), tol_(tol) {
  if (n < 1) throw ArgumentError("plane-wave sum needs a positive dimension");
  if (!(tol > 0.0)) throw ArgumentError("frequency tolerance must be positive");
}

PlaneWaveSum PlaneWaveSum::phase(const Eigen::VectorXd& xi, cplx c) {
  PlaneWaveSum s(static_cast<int>(xi.size()));
  s.add(c, xi);
  return s;
}

void PlaneWaveSum::add(cplx c, const Eigen::VectorXd& xi) {
  if (xi.size() != n_) throw ArgumentError("plane-wave frequency has wrong dimension");
  for (auto& t : terms_) {
    if ((t.freq - xi).cwiseAbs().maxCoeff() <= tol_) {
      t.coeff += c;
      return;
    }
  }
  terms_.push_back({c, xi});
}

void PlaneWaveSum::prune(double cut) {
  std::erase_if(terms_, [cut](const PlaneWaveTerm& t) { return std::abs(t.coeff) <= cut; });
}

PlaneWaveSum PlaneWaveSum::conjugate() const {
  PlaneWaveSum out(n_, tol_);
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) out.terms_.push_back({std::conj(t.coeff), -t.freq});
  return out;
}

cplx PlaneWaveSum::eval(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw ArgumentError("evaluation point has wrong dimension");
  cplx s{0.0, 0.0};
  for (const auto& t : terms_) s += t.coeff * std::polar(1.0, t.freq.dot(x));
  return s;
}

PlaneWaveSum& PlaneWaveSum::operator+=(const PlaneWaveSum& o) {
  if (o.n_ != n_) throw ArgumentError("plane-wave sums of different dimension");
  for (const auto& t : o.terms_) add(t.coeff, t.freq);
  return *this;
}

PlaneWaveSum& PlaneWaveSum::operator-=(const PlaneWaveSum& o) {
  if (o.n_ != n_) throw ArgumentError("plane-wave sums of different dimension");
  for (const auto& t : o.terms_) add(-t.coeff, t.freq);
  return *this;
}

PlaneWaveSum& PlaneWaveSum::operator*=(cplx s) {
  for (auto& t : terms_) t.coeff *= s;
  return *this;
}

PlaneWaveSum PlaneWaveSum::sorted() const {
  PlaneWaveSum out = *this;
  std::sort(out.terms_.begin(), out.terms_.end(), [](const PlaneWaveTerm& a, const PlaneWaveTerm& b) {
    return std::lexicographical_compare(a.freq.data(), a.freq.data() + a.freq.size(), b.freq.data(),
                                        b.freq.data() + b.freq.size());
  });
  return out;
}

PlaneWaveSum PlaneWaveSum::from_json(const nlohmann::json& j, int n) {
  if (!j.is_array()) throw ArgumentError("plane-wave sum must be a JSON list");
  if (n < 0) {
    if (j.empty()) throw ArgumentError("cannot infer dimension of an empty plane-wave sum");
    n = static_cast<int>(j.at(0).at("freq").size());
  }
  PlaneWaveSum s(n);
  for (const auto& t : j) {
    const auto& fr = t.at("freq");
    if (static_cast<int>(fr.size()) != n) throw ArgumentError("plane-wave term has wrong dimension");
    Eigen::VectorXd xi(n);
    for (int a = 0; a < n; ++a) xi(a) = fr.at(a).get<double>();
    s.add({t.at("re").get<double>(), t.at("im").get<double>()}, xi);
  }
  return s;
}

nlohmann::json PlaneWaveSum::to_json() const {
  auto j = nlohmann::json::array();
  for (const auto& t : terms_) {
    j.push_back({{"re", t.coeff.real()},
                 {"im", t.coeff.imag()},
                 {"freq", std::vector<double>(t.freq.data(), t.freq.data() + t.freq.size())}});
  }
  return j;
}

PlaneWaveSum operator+(PlaneWaveSum a, const PlaneWaveSum& b) { return a += b; }
PlaneWaveSum operator-(PlaneWaveSum a, const PlaneWaveSum& b) { return a -= b; }
PlaneWaveSum operator*(cplx s, PlaneWaveSum a) { return a *= s; }

double max_coeff_diff(const PlaneWaveSum& a, const PlaneWaveSum& b) {
  const PlaneWaveSum d = a - b;
  double m = 0.0;
  for (const auto& t : d.terms()) m = std::max(m, std::abs(t.coeff));
  return m;
}

bool identical(const PlaneWaveSum& a, const PlaneWaveSum& b) {
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  const auto sa = a.sorted(), sb = b.sorted();
  for (size_t i = 0; i < sa.size(); ++i) {
    const auto& x = sa.terms()[i];
    const auto& y = sb.terms()[i];
    if (x.coeff != y.coeff || x.freq != y.freq) return false;
  }
  return true;
}

PlaneWaveSum tensor_product(const PlaneWaveSum& a, const PlaneWaveSum& b) {
  PlaneWaveSum out(a.dim() + b.dim(), std::min(a.tol(), b.tol()));
  for (const auto& s : a.terms()) {
    for (const auto& t : b.terms()) {
      Eigen::VectorXd xi(a.dim() + b.dim());
      xi << s.freq, t.freq;
      out.add(s.coeff * t.coeff, xi);
    }
  }
  return out;
}

cplx eval_planewave(const PlaneWaveSum& pw, const Eigen::VectorXd& x) { return pw.eval(x); }

GridFunction planewave_spectrum(const PlaneWaveSum& pw, const GridSpec& spec) {
  if (pw.dim() != spec.n) throw ArgumentError("plane-wave sum and grid differ in dimension");
  GridFunction out(spec, Domain::frequency);
  const double inv_cell = 1.0 / spec.dual_cell_volume();
  for (const auto& t : pw.terms()) {
    Eigen::VectorXi k;
    if (!spec.on_dual_lattice(t.freq, &k))
      throw CommensurabilityError("plane-wave frequency is not on the dual lattice of the grid");
    std::vector<int> idx(spec.n);
    for (int a = 0; a < spec.n; ++a) idx[a] = k(a) + spec.N / 2;
    out.values[spec.flatten(idx)] += t.coeff * inv_cell;
  }
  return out;
}

GridFunction sample_planewave(const PlaneWaveSum& pw, const GridSpec& spec) {
  if (pw.dim() != spec.n) throw ArgumentError("plane-wave sum and grid differ in dimension");
  for (const auto& t : pw.terms())
    if (!spec.on_dual_lattice(t.freq))
      throw CommensurabilityError("plane-wave frequency is not on the dual lattice of the grid");
  GridFunction out(spec, Domain::position);
  for (std::int64_t m = 0; m < spec.size(); ++m) out.values[m] = pw.eval(spec.point(m));
  return out;
}

}  // namespace moyal
