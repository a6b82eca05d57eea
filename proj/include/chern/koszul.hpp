#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "chern/forms.hpp"
#include "chern/geometry.hpp"

namespace chern {

using BigRational = boost::multiprecision::cpp_rational;

/// A monomial Z^e dZ_{i1} ^ ... ^ dZ_{ip} with i1 < ... < ip given as a bit mask.
struct Monomial {
  std::vector<int> exps;
  unsigned dmask = 0;
  auto operator<=>(const Monomial&) const = default;
};

/// Polynomial differential form on C^n with exact rational coefficients,
/// i.e. an element of Omega^p_A for the polynomial ring A = Q[Z_0..Z_{n-1}].
class HomogPoly {
 public:
  HomogPoly() = default;
  explicit HomogPoly(int nvars) : n_(nvars) {}

  static HomogPoly constant(int nvars, const BigRational& c);
  static HomogPoly coordinate(int nvars, int i);
  /// dZ_i.
  static HomogPoly differential(int nvars, int i);

  int nvars() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, BigRational>& terms() const { return terms_; }
  void add_term(const Monomial& m, const BigRational& c);

  /// Total degree with dZ counted as degree 1, if all terms agree.
  std::optional<int> degree() const;
  /// Number of dZ factors, if all terms agree.
  std::optional<int> form_degree() const;

  friend HomogPoly operator+(const HomogPoly& a, const HomogPoly& b);
  friend HomogPoly operator-(const HomogPoly& a, const HomogPoly& b);
  friend HomogPoly operator*(const BigRational& s, const HomogPoly& a);
  /// Product in the exterior algebra (dZ anticommute).
  friend HomogPoly operator*(const HomogPoly& a, const HomogPoly& b);
  friend bool operator==(const HomogPoly& a, const HomogPoly& b) { return a.n_ == b.n_ && a.terms_ == b.terms_; }

  /// Text form: terms `c * Z0^a Z1 [dZ0 ^ dZ2]` joined by ` + `; "0" when zero.
  std::string to_string() const;
  /// Parses the text form; nvars is taken as the given count.
  static HomogPoly parse(const std::string& text, int nvars);

  HomogPoly pow(int k) const;

 private:
  int n_ = 0;
  std::map<Monomial, BigRational> terms_;
};

/// Alternating Cech q-cochain of degree-0 fractions eta_t = numerator_t / (Z_t0 ... Z_tq)^m,
/// numerators stored on increasing tuples.
struct KoszulCocycle {
  int nvars = 0;
  int q = 0;
  int p = 0;  // form degree of the numerators
  int level = 1;
  std::map<std::vector<int>, HomogPoly> numerators;

  /// Numerator of any tuple by the sign rule; zero for repeated indices.
  HomogPoly numerator(const std::vector<int>& t) const;
  /// Every numerator is homogeneous of degree (q + 1) * level.
  bool degree_balanced() const;
};

struct KoszulCheck {
  bool ok = true;
  int tuples_checked = 0;
  std::vector<int> tuple;  // first failing tuple
  HomogPoly witness;       // the nonzero alternating sum there
};

/// sum_j (-1)^j Z_{t_j}^l eta^{(l)}_{t without t_j} == 0 for every increasing
/// (q+2)-tuple, exactly.
KoszulCheck koszul_delta_check(const KoszulCocycle& eta);

/// eta^{(l)}_t = (Z_t0 ... Z_tq)^{l-m} eta^{(m)}_t.
KoszulCocycle level_raise(const KoszulCocycle& eta, int l);

/// The p-th Atiyah cocycle of O(k) on CP^{n-1} (n homogeneous coordinates):
/// the cup power of k (Z_a dZ_b - Z_b dZ_a) / (Z_a Z_b), with the sign
/// (-1)^{p(p-1)/2} of the numeric construction, at level 1 for p = 1 and 2 otherwise.
KoszulCocycle algebraic_atiyah(int n, int k, int p);

/// Value at a point of CP^{n-1}, written in the chart basis, of the fraction
/// eta_t pulled back along the affine section Z_chart = 1.
FormJet evaluate_fraction(const KoszulCocycle& eta, const std::vector<int>& t, const ProjectiveSpace& space,
                          const ChartPoint& p);

}  // namespace chern
