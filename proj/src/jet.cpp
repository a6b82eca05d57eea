#include "chern/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

namespace chern {

namespace {

using Exps = std::array<std::uint8_t, kMaxJetVars>;

void enumerate_degree(int nvar, int d, int v, Exps& cur, std::vector<Exps>& out) {
  if (v == nvar - 1) {
    cur[v] = static_cast<std::uint8_t>(d);
    out.push_back(cur);
    cur[v] = 0;
    return;
  }
  for (int e = d; e >= 0; --e) {
    cur[v] = static_cast<std::uint8_t>(e);
    enumerate_degree(nvar, d - e, v + 1, cur, out);
  }
  cur[v] = 0;
}

std::unique_ptr<JetLayout> build_layout(int nvar, int order) {
  auto L = std::make_unique<JetLayout>();
  L->nvar = nvar;
  L->order = order;
  if (nvar == 0) {
    L->exps.push_back(Exps{});
    L->degree.push_back(0);
    L->products.push_back({0, 0, 0});
    L->conj_perm.push_back(0);
    L->size = 1;
    return L;
  }
  for (int d = 0; d <= order; ++d) {
    Exps cur{};
    std::vector<Exps> level;
    enumerate_degree(nvar, d, 0, cur, level);
    for (auto& e : level) {
      L->exps.push_back(e);
      L->degree.push_back(static_cast<std::uint8_t>(d));
    }
  }
  L->size = static_cast<int>(L->exps.size());
  for (int i = 0; i < L->size; ++i) {
    for (int j = 0; j < L->size; ++j) {
      if (L->degree[i] + L->degree[j] > order) continue;
      Exps s{};
      for (int v = 0; v < nvar; ++v) s[v] = static_cast<std::uint8_t>(L->exps[i][v] + L->exps[j][v]);
      L->products.push_back({static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j),
                             static_cast<std::uint8_t>(L->index_of(s))});
    }
  }
  for (int v = 0; v < nvar; ++v) {
    for (int i = 0; i < L->size; ++i) {
      if (L->degree[i] >= order) break;
      Exps s = L->exps[i];
      s[v] += 1;
      L->deriv[v].push_back({static_cast<std::uint8_t>(L->index_of(s)), s[v]});
    }
  }
  L->conj_perm.resize(L->size);
  for (int i = 0; i < L->size; ++i) {
    Exps s = L->exps[i];
    if (nvar % 2 == 0) {
      int n = nvar / 2;
      for (int j = 0; j < n; ++j) std::swap(s[j], s[n + j]);
    }
    L->conj_perm[i] = static_cast<std::uint8_t>(L->index_of(s));
  }
  return L;
}

struct LayoutTable {
  std::array<std::vector<std::unique_ptr<JetLayout>>, kMaxJetVars + 1> by_nvar;
  LayoutTable() {
    for (int n = 0; n <= kMaxJetVars; ++n)
      for (int k = 0; k <= max_jet_order(n); ++k) by_nvar[n].push_back(build_layout(n, k));
  }
};

const LayoutTable& layouts() {
  static const LayoutTable table;
  return table;
}

void check_shape(int nvar, int order) {
  if (nvar < 0 || nvar > kMaxJetVars || order < 0 || order > max_jet_order(nvar))
    throw std::invalid_argument("jet shape out of range");
}

// Unchecked lookup for shapes that come from existing jets.
struct FastLayouts {
  std::array<std::array<const JetLayout*, kMaxJetCoeffs>, kMaxJetVars + 1> p{};
  FastLayouts() {
    const LayoutTable& t = layouts();
    for (int n = 0; n <= kMaxJetVars; ++n)
      for (std::size_t k = 0; k < t.by_nvar[n].size(); ++k) p[n][k] = t.by_nvar[n][k].get();
  }
};

inline const JetLayout& known_layout(int nvar, int order) {
  static const FastLayouts f;
  return *f.p[nvar][order];
}

// a*b without the C99 Annex G special-value handling of std::complex.
inline void fma_into(cplx& acc, const cplx& a, const cplx& b) {
  double ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
  acc = cplx(acc.real() + ar * br - ai * bi, acc.imag() + ar * bi + ai * br);
}

inline cplx times(const cplx& a, const cplx& b) {
  return cplx(a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real());
}

}  // namespace

int JetLayout::index_of(const Exps& e) const {
  for (int i = 0; i < size; ++i)
    if (exps[i] == e) return i;
  throw std::logic_error("monomial not in layout");
}

int max_jet_order(int nvar) {
  switch (nvar) {
    case 0: return 0;
    case 1: return kMaxJetCoeffs - 1;
    case 2: return 6;
    case 3: return 4;
    default: return 3;
  }
}

const JetLayout& jet_layout(int nvar, int order) {
  check_shape(nvar, order);
  return *layouts().by_nvar[nvar][order];
}

Jet Jet::zero(int nvar, int ncplx, int order) {
  check_shape(nvar, order);
  Jet j;
  j.nvar_ = static_cast<std::uint8_t>(nvar);
  j.ncplx_ = static_cast<std::uint8_t>(ncplx);
  j.order_ = static_cast<std::uint8_t>(nvar == 0 ? 0 : order);
  j.size_ = static_cast<std::uint8_t>(known_layout(nvar, j.order_).size);
  for (int i = 0; i < j.size_; ++i) j.c_[i] = 0.0;
  return j;
}

Jet Jet::constant(int nvar, int ncplx, int order, cplx v) {
  Jet j = zero(nvar, ncplx, order);
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(int nvar, int ncplx, int order, int index, cplx value) {
  Jet j = constant(nvar, ncplx, order, value);
  if (order >= 1) j.c_[1 + index] = 1.0;
  return j;
}

void Jet::promote_to(const Jet& shape) {
  cplx v = c_[0];
  *this = zero(shape.nvar_, shape.ncplx_, shape.order_);
  c_[0] = v;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.is_constant()) {
    c_[0] += o.c_[0];
    return *this;
  }
  if (is_constant()) promote_to(o);
  if (o.nvar_ != nvar_) throw std::logic_error("jet variable mismatch");
  if (o.order_ < order_) {
    order_ = o.order_;
    size_ = o.size_;
  }
  for (int i = 0; i < size_; ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.is_constant()) {
    c_[0] -= o.c_[0];
    return *this;
  }
  if (is_constant()) promote_to(o);
  if (o.nvar_ != nvar_) throw std::logic_error("jet variable mismatch");
  if (o.order_ < order_) {
    order_ = o.order_;
    size_ = o.size_;
  }
  for (int i = 0; i < size_; ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet operator-(const Jet& a) {
  Jet r = a;
  for (int i = 0; i < r.size_; ++i) r.c_[i] = -r.c_[i];
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.is_constant()) {
    Jet r = b;
    for (int i = 0; i < r.size_; ++i) r.c_[i] = times(r.c_[i], a.c_[0]);
    return r;
  }
  if (b.is_constant()) {
    Jet r = a;
    for (int i = 0; i < r.size_; ++i) r.c_[i] = times(r.c_[i], b.c_[0]);
    return r;
  }
  if (a.nvar_ != b.nvar_) throw std::logic_error("jet variable mismatch");
  int K = std::min(a.order_, b.order_);
  const JetLayout& L = known_layout(a.nvar_, K);
  Jet r;
  r.nvar_ = a.nvar_;
  r.ncplx_ = a.ncplx_;
  r.order_ = static_cast<std::uint8_t>(K);
  r.size_ = static_cast<std::uint8_t>(L.size);
  for (int i = 0; i < L.size; ++i) r.c_[i] = 0.0;
  for (const auto& t : L.products) fma_into(r.c_[t[2]], a.c_[t[0]], b.c_[t[1]]);
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.is_constant()) {
    Jet r = a;
    for (int i = 0; i < r.size_; ++i) r.c_[i] /= b.c_[0];
    return r;
  }
  return a * inverse(b);
}

Jet Jet::derivative(int v) const {
  if (is_constant()) return Jet(0.0);
  if (order_ == 0) throw std::logic_error("derivative of an order-0 jet");
  const JetLayout& L = known_layout(nvar_, order_);
  Jet r = zero(nvar_, ncplx_, order_ - 1);
  for (int b = 0; b < r.size_; ++b) {
    auto [src, f] = L.deriv[v][b];
    r.c_[b] = c_[src] * static_cast<double>(f);
  }
  return r;
}

Jet Jet::truncated(int order) const {
  if (is_constant() || order >= order_) return *this;
  Jet r = *this;
  r.order_ = static_cast<std::uint8_t>(order);
  r.size_ = static_cast<std::uint8_t>(jet_layout(nvar_, order).size);
  return r;
}

Jet Jet::scaled_variables(double t) const {
  if (is_constant()) return *this;
  const JetLayout& L = layout();
  Jet r = *this;
  for (int i = 1; i < size_; ++i) r.c_[i] *= std::pow(t, L.degree[i]);
  return r;
}

double Jet::max_abs() const {
  double m = 0;
  for (int i = 0; i < size_; ++i) m = std::max(m, std::abs(c_[i]));
  return m;
}

Jet conj(const Jet& a) {
  Jet r = a;
  if (a.is_constant() || a.ncplx_ == 0) {
    for (int i = 0; i < r.size_; ++i) r.c_[i] = std::conj(a.c_[i]);
    return r;
  }
  const JetLayout& L = a.layout();
  for (int i = 0; i < r.size_; ++i) r.c_[L.conj_perm[i]] = std::conj(a.c_[i]);
  return r;
}

Jet apply_series(const Jet& a, std::span<const cplx> f) {
  if (a.is_constant() || a.order_ == 0) {
    Jet r = a;
    r.c_[0] = f[0];
    return r;
  }
  Jet h = a;
  h.c_[0] = 0.0;
  int K = a.order_;
  Jet r = Jet::constant(a.nvar_, a.ncplx_, K, f[K]);
  for (int j = K - 1; j >= 0; --j) {
    r = r * h;
    r.c_[0] += f[j];
  }
  return r;
}

Jet inverse(const Jet& a) {
  cplx a0 = a.value();
  if (a0 == 0.0) throw std::domain_error("inverse of a jet with zero value");
  std::array<cplx, kMaxJetCoeffs> f;
  cplx inv = 1.0 / a0;
  f[0] = inv;
  for (int j = 1; j <= a.order(); ++j) f[j] = -f[j - 1] * inv;
  return apply_series(a, std::span<const cplx>(f.data(), a.order() + 1));
}

Jet exp(const Jet& a) {
  std::array<cplx, kMaxJetCoeffs> f;
  f[0] = std::exp(a.value());
  for (int j = 1; j <= a.order(); ++j) f[j] = f[j - 1] / static_cast<double>(j);
  return apply_series(a, std::span<const cplx>(f.data(), a.order() + 1));
}

Jet log(const Jet& a) {
  cplx a0 = a.value();
  if (a0 == 0.0) throw std::domain_error("log of a jet with zero value");
  std::array<cplx, kMaxJetCoeffs> f;
  f[0] = std::log(a0);
  cplx p = 1.0;
  for (int j = 1; j <= a.order(); ++j) {
    p /= a0;
    f[j] = ((j % 2) ? 1.0 : -1.0) * p / static_cast<double>(j);
  }
  return apply_series(a, std::span<const cplx>(f.data(), a.order() + 1));
}

Jet pow(const Jet& a, double s) {
  cplx a0 = a.value();
  std::array<cplx, kMaxJetCoeffs> f;
  f[0] = std::pow(a0, s);
  for (int j = 1; j <= a.order(); ++j) f[j] = f[j - 1] * (s - (j - 1)) / (static_cast<double>(j) * a0);
  return apply_series(a, std::span<const cplx>(f.data(), a.order() + 1));
}

Jet pow(const Jet& a, int k) {
  if (k < 0) return inverse(pow(a, -k));
  Jet r(1.0), b = a;
  while (k) {
    if (k & 1) r = r * b;
    k >>= 1;
    if (k) b = b * b;
  }
  return r;
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet sin(const Jet& a) {
  std::array<cplx, kMaxJetCoeffs> f;
  cplx s = std::sin(a.value()), c = std::cos(a.value());
  cplx cyc[4] = {s, c, -s, -c};
  double fact = 1.0;
  for (int j = 0; j <= a.order(); ++j) {
    if (j) fact *= j;
    f[j] = cyc[j % 4] / fact;
  }
  return apply_series(a, std::span<const cplx>(f.data(), a.order() + 1));
}

Jet cos(const Jet& a) {
  std::array<cplx, kMaxJetCoeffs> f;
  cplx s = std::sin(a.value()), c = std::cos(a.value());
  cplx cyc[4] = {c, -s, -c, s};
  double fact = 1.0;
  for (int j = 0; j <= a.order(); ++j) {
    if (j) fact *= j;
    f[j] = cyc[j % 4] / fact;
  }
  return apply_series(a, std::span<const cplx>(f.data(), a.order() + 1));
}

Jet smooth_step(const Jet& s) {
  if (s.value().real() <= 0.0) return s.is_constant() ? Jet(0.0) : Jet::zero(s.nvar(), s.ncplx(), s.order());
  return exp(-inverse(s));
}

Jet abs2(const Jet& a) { return a * conj(a); }

Jet real_part(const Jet& a) { return (a + conj(a)) * Jet(0.5); }

Jet compose(const Jet& f, std::span<const Jet> ys) {
  if (f.is_constant()) return f;
  if (static_cast<int>(ys.size()) != f.nvar()) throw std::logic_error("compose: arity mismatch");
  int K = f.order();
  const Jet* shape = nullptr;
  for (const Jet& y : ys)
    if (!y.is_constant()) {
      K = std::min(K, y.order());
      shape = &y;
    }
  if (!shape) return Jet(f.value());
  const JetLayout& L = jet_layout(f.nvar(), K);
  std::vector<std::vector<Jet>> powers(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    Jet h = ys[i].is_constant() ? Jet::zero(shape->nvar(), shape->ncplx(), K) : ys[i].truncated(K);
    h.coeff(0) = 0.0;
    powers[i].push_back(Jet::constant(shape->nvar(), shape->ncplx(), K, 1.0));
    for (int e = 1; e <= K; ++e) powers[i].push_back(powers[i].back() * h);
  }
  Jet r = Jet::zero(shape->nvar(), shape->ncplx(), K);
  for (int m = 0; m < L.size; ++m) {
    cplx c = f.coeff(m);
    if (c == 0.0) continue;
    Jet term = Jet::constant(shape->nvar(), shape->ncplx(), K, c);
    for (std::size_t i = 0; i < ys.size(); ++i)
      if (L.exps[m][i]) term = term * powers[i][L.exps[m][i]];
    r += term;
  }
  return r;
}

Jet antiderivative(std::span<const Jet> grad) {
  int m = static_cast<int>(grad.size());
  int ncplx = 0, K = -1;
  for (const Jet& g : grad) {
    if (g.is_constant()) continue;
    if (g.nvar() != m) throw std::logic_error("antiderivative: arity mismatch");
    ncplx = g.ncplx();
    K = (K < 0) ? g.order() : std::min(K, g.order());
  }
  if (K < 0) K = 0;
  K += 1;
  const JetLayout& L = jet_layout(m, K);
  const JetLayout& Lm = jet_layout(m, K - 1);
  Jet r = Jet::zero(m, ncplx, K);
  for (int i = 0; i < m; ++i) {
    for (int b = 0; b < Lm.size; ++b) {
      cplx gi = grad[i].is_constant() ? (b == 0 ? grad[i].value() : cplx(0.0)) : grad[i].coeff(b);
      int t = L.deriv[i][b].first;
      r.coeff(t) += gi / static_cast<double>(L.degree[t]);
    }
  }
  return r;
}

std::vector<Jet> seed_complex(const Eigen::VectorXcd& z, int order) {
  int n = static_cast<int>(z.size());
  std::vector<Jet> out;
  out.reserve(2 * n);
  for (int j = 0; j < n; ++j) out.push_back(Jet::variable(2 * n, n, order, j, z[j]));
  for (int j = 0; j < n; ++j) out.push_back(Jet::variable(2 * n, n, order, n + j, std::conj(z[j])));
  return out;
}

std::vector<Jet> seed_real(const Eigen::VectorXd& x, int order) {
  int m = static_cast<int>(x.size());
  std::vector<Jet> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j) out.push_back(Jet::variable(m, 0, order, j, x[j]));
  return out;
}

JetMatrix jet_identity(int r) {
  JetMatrix m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = Jet(i == j ? 1.0 : 0.0);
  return m;
}

JetMatrix jet_zero(int r) {
  JetMatrix m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = Jet(0.0);
  return m;
}

JetMatrix from_numeric(const Eigen::MatrixXcd& a) {
  JetMatrix m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = Jet(a(i, j));
  return m;
}

Eigen::MatrixXcd values(const JetMatrix& a) {
  Eigen::MatrixXcd m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j).value();
  return m;
}

JetMatrix mul(const JetMatrix& a, const JetMatrix& b) {
  if (a.cols() != b.rows()) throw std::logic_error("matrix size mismatch");
  JetMatrix r(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      Jet s = a(i, 0) * b(0, j);
      for (int k = 1; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}

JetMatrix inverse(const JetMatrix& a) {
  int n = static_cast<int>(a.rows());
  if (n == 1) {
    JetMatrix r(1, 1);
    r(0, 0) = inverse(a(0, 0));
    return r;
  }
  JetMatrix m = a, inv = jet_identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m(r, col).value()) > std::abs(m(piv, col).value())) piv = r;
    if (m(piv, col).value() == 0.0) throw std::domain_error("singular jet matrix");
    if (piv != col) {
      m.row(piv).swap(m.row(col));
      inv.row(piv).swap(inv.row(col));
    }
    Jet p = inverse(m(col, col));
    for (int j = 0; j < n; ++j) {
      m(col, j) = m(col, j) * p;
      inv(col, j) = inv(col, j) * p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet f = m(r, col);
      for (int j = 0; j < n; ++j) {
        m(r, j) -= f * m(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

JetMatrix conj_transpose(const JetMatrix& a) {
  JetMatrix r(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(j, i) = conj(a(i, j));
  return r;
}

Jet trace(const JetMatrix& a) {
  Jet s = a(0, 0);
  for (int i = 1; i < a.rows(); ++i) s += a(i, i);
  return s;
}

JetMatrix sqrt_hpd(const JetMatrix& a) {
  int n = static_cast<int>(a.rows());
  if (n == 1) {
    JetMatrix r(1, 1);
    r(0, 0) = sqrt(a(0, 0));
    return r;
  }
  // Denman-Beavers; jets of the iterates converge together with the values.
  JetMatrix y = a, z = jet_identity(n);
  for (int it = 0; it < 100; ++it) {
    JetMatrix yi = inverse(y), zi = inverse(z);
    JetMatrix yn(n, n), zn(n, n);
    double change = 0, scale = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        yn(i, j) = (y(i, j) + zi(i, j)) * Jet(0.5);
        zn(i, j) = (z(i, j) + yi(i, j)) * Jet(0.5);
        change = std::max(change, (yn(i, j) - y(i, j)).max_abs());
        scale = std::max(scale, yn(i, j).max_abs());
      }
    y = yn;
    z = zn;
    if (change <= 1e-15 * (1.0 + scale)) break;
  }
  return y;
}

JetMatrix truncated(const JetMatrix& a, int order) {
  JetMatrix r(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j).truncated(order);
  return r;
}

JetMatrix derivative(const JetMatrix& a, int v) {
  JetMatrix r(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j).derivative(v);
  return r;
}

}  // namespace chern
