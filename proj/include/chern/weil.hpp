#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "chern/bundles.hpp"
#include "chern/cech.hpp"
#include "chern/periods.hpp"

namespace chern {

/// DR(eta) = sum over ordered tuples of rho_a0 eta_{a0..aq} ^ drho_a1 ^ ... ^ drho_aq.
/// eta must be untwisted (scalar or already traced).
FormField dr_map(const Cochain& eta, const PartitionOfUnity& pou);
/// D(eta) = sum over ordered tuples of rho_a0 eta_{a0..aq} ^ delbar rho_a1 ^ ... ^ delbar rho_aq,
/// for (p,0)-tagged components; the result is tagged (p,q).
FormField dolbeault_map(const Cochain& eta, const PartitionOfUnity& pou);

/// Largest disagreement between the values of a global form computed in
/// different charts at the same points (after pulling back to one basis).
double chart_disagreement(const FormField& omega, int samples, std::uint64_t seed);

/// Absolute error target of the radial integral, per jet coefficient.
inline constexpr double kRadialTolerance = 1e-9;

/// Radial homotopy potential of a closed k-form on chart `home` (which must be
/// star-shaped about 0): K w (x) = int_0^1 t^{k-1} i_x w(t x) dt, by adaptive
/// Gauss-Kronrod in t to kRadialTolerance, so that dK w = w. Throws if w is
/// visibly not closed.
FormField poincare_potential(const FormField& omega, int home);

/// A line bundle and connection rebuilt from a closed 2-form with periods in
/// 2 pi i Z, on the S^2 good cover.
struct Reconstruction {
  Bundle bundle;
  ConnectionForms connection;  // theta_a with d theta_a = Theta on U_a, sign -1
  cplx period;                 // integral of Theta
  long degree = 0;             // period / (-2 pi i)
  double quantization_defect = 0;
  /// exp of the triple sums of the log branches, which must be 1: the largest
  /// deviation of the Cech class from the quadrature period, in units of 2 pi.
  double cech_class_defect = 0;
  /// f_a with g_ab = f_a / f_b when degree == 0; empty otherwise.
  std::vector<FormField> trivialization;
};

struct QuantizationError : std::runtime_error {
  QuantizationError(const std::string& what, double defect) : std::runtime_error(what), defect(defect) {}
  double defect;
};

/// Tolerance on |period - 2 pi i n| in units of 2 pi.
inline constexpr double kQuantizationTolerance = 1e-4;

/// The period of Theta is computed at `quad_order`; 128 keeps the quadrature
/// error of exact forms on the good cover below the quantization tolerance.
Reconstruction reconstruct_line_bundle(const FormField& Theta, const PartitionOfUnity& pou, int quad_order = 128);

/// Primitive of the closed 1-form xi along the segment from a to b in the
/// coordinates of `chart`: 64 panels of 4-point Gauss-Legendre.
cplx path_integral(const FormField& xi, int chart, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

}  // namespace chern
