#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chern/forms.hpp"
#include "chern/geometry.hpp"
#include "chern/normalization.hpp"

namespace chern {

struct GaussRule {
  std::vector<double> x, w;
};
/// n-point Gauss-Legendre rule on [a, b].
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Pairwise (cascade) summation in a fixed order.
cplx pairwise_sum(std::span<const cplx> v);

/// Coefficient that converts a top-degree form's coefficient in the chart
/// basis into its coefficient against the oriented real volume form
/// dx_1 ^ dy_1 ^ ... (complex charts) or dx_1 ^ ... (real charts).
cplx top_form_factor(const Atlas& atlas);

/// Default points per real dimension: 64 on CP^1, 128 on the S^2 cover (its
/// exp(-1/s) partition makes gauge-transformed forms converge slowly), 12 on CP^2.
int default_quad_order(const Atlas& atlas);

/// Integral over M of a top-degree global form: sum over charts of the
/// integral of rho_a * omega in chart a. Complex coordinates are compactified
/// by z = tan(t) e^{i phi}; real charts are integrated over the disc carrying
/// supp rho_a in polar coordinates. quad_order Gauss points per real dimension.
cplx integrate_top(const FormField& omega, const PartitionOfUnity& pou, int quad_order);

/// A closed cycle parametrized, up to a null set, by C^m through one chart.
struct Cycle {
  std::string id;
  int chart = 0;
  int param_dim = 1;  // complex dimension m of the parameter space
  /// Chart coordinate jets (z..., zbar...) as functions of the parameter jets (w..., wbar...).
  std::function<std::vector<Jet>(std::span<const Jet>)> map;
  int orientation = 1;
};
/// A projective line in CP^2, in the class of {Z_2 = 0}: the line
/// Z_2 = (Z_0 + Z_1)/2, parametrized by w -> (w, (1 + w)/2) in chart 0. It meets
/// every coordinate hyperplane in a single point.
Cycle projective_line();
cplx integrate_cycle(const FormField& omega, const std::shared_ptr<const Atlas>& atlas, const Cycle& c, int quad_order);

struct Rational {
  long num = 0;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};
/// Smallest-denominator p/q (q <= max_den) within tol of x, provided |Im x| <= tol.
std::optional<Rational> rationalize(cplx x, double tol, int max_den = 64);

struct PeriodReport {
  std::string cycle;
  std::string form;
  int p = 1;
  cplx raw;
  cplx normalized;
  std::optional<Rational> nearest_rational;
  double residual = 0;
};
/// Normalizes raw / (p! (-2 pi i)^p) and rationalizes with the given tolerance.
PeriodReport make_period_report(std::string cycle, std::string form, int p, cplx raw, double tol, bool already_normalized = false);

}  // namespace chern
