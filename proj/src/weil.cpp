#include "chern/weil.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/QR>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace chern {

namespace {

// Adaptive 7/15-point Gauss-Kronrod on [a, b] for a FormJet-valued integrand,
// bisecting until the Gauss and Kronrod estimates agree to tol in every coefficient.
template <class F>
FormJet adaptive_gk(const F& f, double a, double b, double tol, int depth) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  using Gauss = boost::math::quadrature::gauss<double, 7>;
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  FormJet f0 = f(c);
  FormJet k = cplx(wk[0] * h) * f0;
  FormJet g = cplx(wg[0] * h) * f0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    FormJet pair = f(c - h * x[i]) + f(c + h * x[i]);
    k = k + cplx(wk[i] * h) * pair;
    if (i % 2 == 0) g = g + cplx(wg[i / 2] * h) * pair;
  }
  if (depth == 0 || max_abs_diff(k, g) <= tol) return k;
  return adaptive_gk(f, a, c, tol / 2, depth - 1) + adaptive_gk(f, c, b, tol / 2, depth - 1);
}

bool has_repeat(const Tuple& t) { return std::set<int>(t.begin(), t.end()).size() != t.size(); }

FormField transfer(const Cochain& eta, const PartitionOfUnity& pou, bool dolbeault) {
  if (eta.atlas() != pou.atlas) throw std::invalid_argument("cochain and partition live on different atlases");
  if (eta.twist() && eta.rank() > 1) throw std::invalid_argument("transfer maps need untwisted cochains");
  auto atlas = eta.atlas();
  std::vector<FormField> drho;
  for (const auto& r : pou.rho) drho.push_back(dolbeault ? delbar(r) : ext_d(r));
  std::vector<std::pair<std::vector<int>, FormField>> terms;
  for (const Tuple& t : eta.ordered_tuples()) {
    if (eta.is_stored() && has_repeat(t)) continue;
    FormField c = eta(t);
    if (dolbeault && (!c.bidegree() || *c.bidegree() != Bidegree{eta.p(), 0}))
      throw std::invalid_argument("Dolbeault transfer needs (p,0)-tagged components");
    // rho_a0 c drho_a1 ... drho_aq = c ^ (rho_a0 drho_a1 ...): the cheap partition
    // factor is evaluated first and c is skipped where it vanishes.
    FormField weights = pou.rho[t[0]];
    for (std::size_t j = 1; j < t.size(); ++j) weights = wedge(weights, drho[t[j]]);
    FormField term = wedge(c, weights);
    std::vector<int> guard(t.begin(), t.end());
    terms.push_back({guard, term});
  }
  FormField out = guarded_sum(atlas, eta.p() + eta.q(), eta.rank(), std::move(terms));
  return dolbeault ? with_bidegree(out, {eta.p(), eta.q()}) : out;
}

FormField exp_field(const FormField& F) {
  return apply(F, 1, [](const JetMatrix& m) {
    JetMatrix r(1, 1);
    r(0, 0) = exp(m(0, 0));
    return r;
  });
}

}  // namespace

FormField dr_map(const Cochain& eta, const PartitionOfUnity& pou) { return transfer(eta, pou, false); }

FormField dolbeault_map(const Cochain& eta, const PartitionOfUnity& pou) {
  if (eta.atlas()->kind() != ChartKind::Complex) throw std::invalid_argument("Dolbeault transfer needs a complex atlas");
  return transfer(eta, pou, true);
}

double chart_disagreement(const FormField& omega, int samples, std::uint64_t seed) {
  const Atlas& A = *omega.atlas();
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    ChartPoint p = A.random_point(rng);
    FormJet here = omega.eval(p);
    std::vector<Jet> x = A.seed(p, 1);
    for (int b = 0; b < A.num_charts(); ++b) {
      if (b == p.chart || !A.contains(b, p)) continue;
      FormJet there = omega.eval(A.to_chart(b, p));
      worst = std::max(worst, max_abs_diff(here, pullback(there, A.change(b, p.chart, x))));
    }
  }
  return worst;
}

FormField poincare_potential(const FormField& omega, int home) {
  const int k = omega.degree();
  if (k < 1) throw std::invalid_argument("Poincare potential needs a form of degree at least 1");
  auto A = omega.atlas();
  const double r = std::min(A->support_radius(home), 1.0);
  FormField dw = ext_d(omega);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-r / 2, r / 2);
  for (int i = 0; i < 8; ++i) {
    ChartPoint p{home, Eigen::VectorXcd(A->coord_count())};
    for (int j = 0; j < p.coords.size(); ++j)
      p.coords[j] = A->kind() == ChartKind::Complex ? cplx(u(rng), u(rng)) : cplx(u(rng));
    if (!A->contains(home, p)) continue;
    double scale = std::max(1.0, omega.eval(p).max_abs());
    if (dw.eval(p).max_abs() > 1e-9 * scale) throw std::invalid_argument("Poincare potential of a form that is not closed");
  }
  const int rank = omega.rank();
  return coefficient_field(A, home, k - 1, rank, [A, omega, home, k](const Eigen::VectorXcd& x, int order) {
    std::vector<Jet> X = A->seed(ChartPoint{home, x}, order);
    auto integrand = [&](double t) {
      FormJet w = omega.eval(ChartPoint{home, t * x}, order);
      for (auto& m : w.coef)
        for (int a = 0; a < m.rows(); ++a)
          for (int b = 0; b < m.cols(); ++b) m(a, b) = m(a, b).scaled_variables(t);
      return cplx(std::pow(t, k - 1)) * contract(X, w);
    };
    return adaptive_gk(integrand, 0.0, 1.0, kRadialTolerance, 8);
  });
}

cplx path_integral(const FormField& xi, int chart, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (xi.degree() != 1 || xi.rank() != 1) throw std::invalid_argument("path integrals take scalar 1-forms");
  const Atlas& A = *xi.atlas();
  const int n = A.coord_count();
  const bool cx = A.kind() == ChartKind::Complex;
  const Eigen::VectorXcd v = b - a;
  const GaussRule g = gauss_legendre(4, 0.0, 1.0);
  constexpr int panels = 64;
  std::vector<cplx> vals;
  vals.reserve(panels * g.x.size());
  for (int k = 0; k < panels; ++k)
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double s = (k + g.x[i]) / panels;
      FormJet f = xi.eval(ChartPoint{chart, a + s * v}, 0);
      cplx dot = 0;
      for (int j = 0; j < n; ++j) {
        dot += f.value(1u << j)(0, 0) * v[j];
        if (cx) dot += f.value(1u << (n + j))(0, 0) * std::conj(v[j]);
      }
      vals.push_back(dot * (g.w[i] / panels));
    }
  return pairwise_sum(vals);
}

Reconstruction reconstruct_line_bundle(const FormField& Theta, const PartitionOfUnity& pou, int quad_order) {
  auto S = std::dynamic_pointer_cast<const SphereGoodCover>(pou.atlas);
  if (!S || Theta.atlas() != pou.atlas) throw std::invalid_argument("reconstruction runs on the S^2 good cover");
  if (Theta.degree() != 2 || Theta.rank() != 1) throw std::invalid_argument("reconstruction needs a scalar 2-form");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const int nc = S->num_charts();

  std::mt19937_64 rng(0x7e57);
  FormField dT = ext_d(Theta);
  for (int i = 0; i < 16; ++i) {
    ChartPoint p = S->random_point(rng);
    if (dT.eval(p).max_abs() > 1e-9 * std::max(1.0, Theta.eval(p).max_abs()))
      throw std::invalid_argument("reconstruction of a 2-form that is not closed");
  }

  Reconstruction rec;
  rec.period = integrate_top(Theta, pou, quad_order);
  const cplx winding = rec.period / cplx(0, -two_pi);
  rec.degree = std::lround(winding.real());
  rec.quantization_defect = std::abs(winding - cplx(static_cast<double>(rec.degree)));
  if (rec.quantization_defect > kQuantizationTolerance)
    throw QuantizationError("periods of the 2-form are not in 2 pi i Z", rec.quantization_defect);

  std::vector<FormField> theta;
  for (int a = 0; a < nc; ++a) theta.push_back(poincare_potential(Theta, a));

  // Edges a < b; xi_ab = theta_b - theta_a = dlog g_ab.
  std::vector<std::array<int, 2>> edges;
  for (int a = 0; a < nc; ++a)
    for (int b = a + 1; b < nc; ++b)
      if (S->overlap_nonempty(std::vector<int>{a, b})) edges.push_back({a, b});
  auto edge_index = [&](int a, int b) {
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (edges[e][0] == a && edges[e][1] == b) return static_cast<int>(e);
    throw std::logic_error("missing edge");
  };
  std::vector<FormField> xi;
  std::vector<Eigen::VectorXcd> base;
  for (auto [a, b] : edges) {
    xi.push_back(restrict_domain(theta[b] - theta[a], {a, b}));
    base.push_back(S->from_ambient(a, (S->center(a) + S->center(b)).normalized()).coords);
  }
  // Log branch of g_ab in chart-a coordinates, before the constant shift.
  auto raw_log = [&](int e, const ChartPoint& p) {
    ChartPoint q = S->to_chart(edges[e][0], p);
    return path_integral(xi[e], edges[e][0], base[e], q.coords);
  };

  // Triangles of the nerve (the boundary of a tetrahedron) and their signs.
  std::vector<std::array<int, 3>> tris;
  for (int a = 0; a < nc; ++a)
    for (int b = a + 1; b < nc; ++b)
      for (int c = b + 1; c < nc; ++c)
        if (S->overlap_nonempty(std::vector<int>{a, b, c})) tris.push_back({a, b, c});
  const int ne = static_cast<int>(edges.size()), nt = static_cast<int>(tris.size());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nt, ne);
  Eigen::VectorXcd c0(nt);
  std::vector<double> sign(nt);
  for (int t = 0; t < nt; ++t) {
    auto [a, b, c] = tris[t];
    ChartPoint m = S->from_ambient(a, (S->center(a) + S->center(b) + S->center(c)).normalized());
    int ab = edge_index(a, b), bc = edge_index(b, c), ac = edge_index(a, c);
    c0[t] = raw_log(ab, m) + raw_log(bc, m) - raw_log(ac, m);
    D(t, ab) += 1;
    D(t, bc) += 1;
    D(t, ac) -= 1;
    int missing = 0 + 1 + 2 + 3 - a - b - c;
    sign[t] = (missing % 2) ? -1.0 : 1.0;
  }
  cplx klass = 0;
  for (int t = 0; t < nt; ++t) klass += sign[t] * c0[t];
  const cplx n_cech = klass / cplx(0, two_pi);
  const long N = std::lround(n_cech.real());
  rec.cech_class_defect = std::abs(n_cech - cplx(static_cast<double>(N)));
  if (rec.cech_class_defect > kQuantizationTolerance)
    throw QuantizationError("log branches do not close up to 2 pi i Z", rec.cech_class_defect);
  // Constants F0 with c0 + D F0 in 2 pi i Z, the integer part carried by one triangle.
  Eigen::VectorXcd target = -c0;
  if (nt > 0) target[0] += sign[0] * cplx(0, two_pi) * static_cast<double>(N);
  Eigen::VectorXcd F0 = D.cast<cplx>().completeOrthogonalDecomposition().solve(target);

  std::vector<FormField> logs(ne);
  for (int e = 0; e < ne; ++e) {
    const int a = edges[e][0], b = edges[e][1];
    FormField x = xi[e];
    const cplx shift = F0[e];
    const Eigen::VectorXcd p0 = base[e];
    auto A = pou.atlas;
    logs[e] = coefficient_field(
        A, a, 0, 1,
        [x, shift, p0, a, A](const Eigen::VectorXcd& y, int order) {
          const cplx F = shift + path_integral(x, a, p0, y);
          Jet j;
          if (order == 0) {
            j = Jet::constant(A->nvar(), A->ncplx(), 0, F);
          } else {
            FormJet grad = x.eval(ChartPoint{a, y}, order - 1);
            std::vector<Jet> gj;
            for (int v = 0; v < A->nvar(); ++v) gj.push_back(grad.coef[v](0, 0));
            j = antiderivative(gj) + Jet(F);
          }
          JetMatrix m(1, 1);
          m(0, 0) = j;
          return FormJet::function(A->nvar(), A->ncplx(), m);
        },
        {a, b});
  }
  auto log_g = [&, logs](int a, int b) { return a < b ? logs[edge_index(a, b)] : -logs[edge_index(b, a)]; };
  auto xi_of = [&, xi](int a, int b) { return a < b ? xi[edge_index(a, b)] : -xi[edge_index(b, a)]; };

  std::map<std::pair<int, int>, FormField> g;
  for (auto [a, b] : edges) {
    g[{a, b}] = with_log_differential(exp_field(log_g(a, b)), xi_of(a, b));
    g[{b, a}] = with_log_differential(exp_field(log_g(b, a)), xi_of(b, a));
  }
  rec.bundle = std::make_shared<BundleData>(
      pou.atlas, 1, "reconstructed", [g](int a, int b) { return g.at({a, b}); }, false);
  rec.connection = ConnectionForms{rec.bundle, theta, -1};

  if (rec.degree == 0 && N == 0) {
    for (int a = 0; a < nc; ++a) {
      std::vector<std::pair<std::vector<int>, FormField>> terms;
      for (int c = 0; c < nc; ++c) {
        if (c == a || !S->overlap_nonempty(std::vector<int>{a, c})) continue;
        terms.push_back({{c}, wedge(pou.rho[c], log_g(a, c))});
      }
      rec.trivialization.push_back(exp_field(guarded_sum(pou.atlas, 0, 1, std::move(terms), {a})));
    }
  }
  return rec;
}

}  // namespace chern
