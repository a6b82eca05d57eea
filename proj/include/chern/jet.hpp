#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace chern {

using cplx = std::complex<double>;

inline constexpr int kMaxJetVars = 4;
inline constexpr int kMaxJetCoeffs = 35;

/// Monomial bookkeeping for truncated Taylor polynomials in `nvar` variables
/// up to total degree `order`. Monomials are graded, so the table for a lower
/// order is a prefix of the table for a higher one.
struct JetLayout {
  int nvar = 0;
  int order = 0;
  int size = 1;
  std::vector<std::array<std::uint8_t, kMaxJetVars>> exps;
  std::vector<std::uint8_t> degree;
  // (i, j, k): monomial i times monomial j is monomial k.
  std::vector<std::array<std::uint8_t, 3>> products;
  // deriv[v][i] = (index of monomial i + e_v in the order+1 table, exponent).
  std::array<std::vector<std::pair<std::uint8_t, std::uint8_t>>, kMaxJetVars> deriv;
  // Exponent swap of the pairs (j, nvar/2 + j); used for complex conjugation.
  std::vector<std::uint8_t> conj_perm;

  int index_of(const std::array<std::uint8_t, kMaxJetVars>& e) const;
};

int max_jet_order(int nvar);
const JetLayout& jet_layout(int nvar, int order);

/// Truncated multivariate Taylor polynomial with complex coefficients.
///
/// Coefficients are Taylor coefficients (derivatives divided by factorials).
/// On complex charts the variables are (z_1..z_n, zbar_1..zbar_n) treated as
/// independent Wirtinger variables; `ncplx` records that pairing so that
/// conj() can swap them. A jet with nvar == 0 is an exact constant and
/// broadcasts against any other jet.
class Jet {
 public:
  Jet() { c_[0] = 0.0; }
  Jet(cplx v) { c_[0] = v; }
  Jet(double v) { c_[0] = v; }
  Jet(int v) { c_[0] = static_cast<double>(v); }

  Jet(const Jet& o) : nvar_(o.nvar_), order_(o.order_), ncplx_(o.ncplx_), size_(o.size_) {
    for (int i = 0; i < size_; ++i) c_[i] = o.c_[i];
  }
  Jet& operator=(const Jet& o) {
    nvar_ = o.nvar_;
    order_ = o.order_;
    ncplx_ = o.ncplx_;
    size_ = o.size_;
    for (int i = 0; i < size_; ++i) c_[i] = o.c_[i];
    return *this;
  }

  static Jet zero(int nvar, int ncplx, int order);
  static Jet constant(int nvar, int ncplx, int order, cplx v);
  static Jet variable(int nvar, int ncplx, int order, int index, cplx value);

  int nvar() const { return nvar_; }
  int order() const { return order_; }
  int ncplx() const { return ncplx_; }
  int size() const { return size_; }
  bool is_constant() const { return nvar_ == 0; }

  cplx value() const { return c_[0]; }
  cplx coeff(int i) const { return c_[i]; }
  cplx& coeff(int i) { return c_[i]; }
  const JetLayout& layout() const { return jet_layout(nvar_, order_); }

  /// Partial derivative in variable v; the order drops by one.
  Jet derivative(int v) const;
  Jet truncated(int order) const;
  /// Substitutes eps -> t*eps, i.e. the jet of x -> f(t x) seen from t x.
  Jet scaled_variables(double t) const;
  /// Largest coefficient magnitude.
  double max_abs() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

  friend Jet conj(const Jet& a);
  friend Jet apply_series(const Jet& a, std::span<const cplx> f);

 private:
  void promote_to(const Jet& shape);

  std::uint8_t nvar_ = 0;
  std::uint8_t order_ = 0;
  std::uint8_t ncplx_ = 0;
  std::uint8_t size_ = 1;
  std::array<cplx, kMaxJetCoeffs> c_;
};

/// f(a) for f given by its Taylor coefficients f[j] = f^{(j)}(a0)/j! about a0 = a.value().
Jet apply_series(const Jet& a, std::span<const cplx> f);

Jet inverse(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double s);
Jet pow(const Jet& a, int k);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
/// exp(-1/s) for Re s > 0, identically zero otherwise (all derivatives vanish there).
Jet smooth_step(const Jet& s);
/// |a|^2 = a * conj(a).
Jet abs2(const Jet& a);
Jet real_part(const Jet& a);

/// Taylor composition: f is a jet in y-variables around y0 = (ys[i].value());
/// returns the jet of x -> f(y(x)).
Jet compose(const Jet& f, std::span<const Jet> ys);

/// Potential F with F(x) = 0 and dF = sum_i grad[i] dx_i, for a closed gradient
/// jet of order K-1; the result has order K.
Jet antiderivative(std::span<const Jet> grad);

/// Identity jets of a point: complex charts give z_1..z_n then zbar_1..zbar_n.
std::vector<Jet> seed_complex(const Eigen::VectorXcd& z, int order);
std::vector<Jet> seed_real(const Eigen::VectorXd& x, int order);

}  // namespace chern

namespace Eigen {
template <>
struct NumTraits<chern::Jet> : GenericNumTraits<chern::Jet> {
  typedef chern::Jet Real;
  typedef chern::Jet NonInteger;
  typedef chern::Jet Nested;
  typedef chern::Jet Literal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 8,
    MulCost = 32
  };
  static inline Real epsilon() { return Real(0.0); }
  static inline Real dummy_precision() { return Real(0.0); }
  static inline int digits10() { return 15; }
};
}  // namespace Eigen

namespace chern {
using JetMatrix = Eigen::Matrix<Jet, Eigen::Dynamic, Eigen::Dynamic>;

JetMatrix jet_identity(int r);
JetMatrix jet_zero(int r);
JetMatrix from_numeric(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd values(const JetMatrix& m);
/// Matrix product without Eigen's blocking (matrices here are tiny).
JetMatrix mul(const JetMatrix& a, const JetMatrix& b);
/// Gauss-Jordan inverse, pivoting on the value part.
JetMatrix inverse(const JetMatrix& a);
JetMatrix conj_transpose(const JetMatrix& a);
Jet trace(const JetMatrix& a);
/// Principal square root of a Hermitian positive-definite jet matrix.
JetMatrix sqrt_hpd(const JetMatrix& a);
JetMatrix truncated(const JetMatrix& a, int order);
JetMatrix derivative(const JetMatrix& a, int v);

}  // namespace chern
