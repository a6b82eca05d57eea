#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chern/atiyah.hpp"
#include "chern/weil.hpp"

using namespace chern;

namespace {

double field_diff(const FormField& a, const FormField& b, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double err = 0;
  for (int i = 0; i < n; ++i) {
    ChartPoint p = a.atlas()->random_point(rng);
    EvalContext ctx(*a.atlas(), p);
    err = std::max(err, max_abs_diff(a.eval(ctx), b.eval(ctx)));
  }
  return err;
}

double field_norm(const FormField& a, int n, std::uint64_t seed) {
  return field_diff(a, zero_field(a.atlas(), a.degree(), a.rank()), n, seed);
}

// Same as field_diff, restricted to points of chart `chart`.
double chart_diff(const FormField& a, const FormField& b, int chart, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double err = 0;
  for (int i = 0; i < n; ++i) {
    ChartPoint p = a.atlas()->random_point_in(rng, std::vector<int>{chart});
    EvalContext ctx(*a.atlas(), p);
    err = std::max(err, max_abs_diff(a.eval(ctx), b.eval(ctx)));
  }
  return err;
}

// c / (1 + |u|^2)^2 du1 ^ du2 in every stereographic chart of the S^2 cover.
FormField sphere_area(const std::shared_ptr<const Atlas>& A, cplx c) {
  std::vector<FormField> per;
  for (int a = 0; a < A->num_charts(); ++a) {
    FormField f = scalar_field(A, {a}, [c](int, std::span<const Jet> u) {
      Jet s = Jet(1.0) + u[0] * u[0] + u[1] * u[1];
      return Jet(c) / (s * s);
    });
    per.push_back(wedge(f, wedge(ext_d(coordinate(A, a, 0)), ext_d(coordinate(A, a, 1)))));
  }
  return chartwise(A, per);
}

// Largest |g_ab g_bc - g_ac| over sampled triple overlaps of a line bundle.
double line_cocycle_defect(const Bundle& e, int samples, std::uint64_t seed) {
  auto A = e->atlas();
  std::mt19937_64 rng(seed);
  double err = 0;
  const int n = A->num_charts();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        std::vector<int> t{a, b, c};
        if (!A->overlap_nonempty(t)) continue;
        for (int i = 0; i < samples; ++i) {
          ChartPoint p = A->random_point_in(rng, t);
          EvalContext ctx(*A, p);
          cplx gab = e->transition(a, b).eval(ctx).value(0)(0, 0);
          cplx gbc = e->transition(b, c).eval(ctx).value(0)(0, 0);
          cplx gac = e->transition(a, c).eval(ctx).value(0)(0, 0);
          err = std::max(err, std::abs(gab * gbc - gac));
        }
      }
  return err;
}

}  // namespace

// With the cup and coboundary conventions of the library the identity reads
// d DR(xi) = (-1)^p DR(delta xi) + DR(d xi), p the form degree of xi.
TEST_CASE("exterior derivative of the Weil transfer") {
  for (auto pou : {build_cpn(2), build_good_cover_s2()}) {
    for (int q = 0; q <= 2; ++q)
      for (int p = 0; p <= 1; ++p) {
        Cochain xi = random_cochain(pou.atlas, q, p, 1, 10 * q + p, true);
        FormField lhs = ext_d(dr_map(xi, pou));
        FormField rhs = (p % 2 ? -1.0 : 1.0) * dr_map(cech_delta(xi), pou) + dr_map(cochain_d(xi), pou);
        CHECK(field_diff(lhs, rhs, 20, 1) <= 1e-10);
      }
  }
}

TEST_CASE("Weil and Dolbeault transfers of O(k) on CP^1") {
  auto cp1 = build_cpn(1);
  for (int k : {1, -2}) {
    auto E = line_bundle_o(cp1.atlas, k);
    FormField dr = dr_map(smooth_atiyah(E, 1).scalar, cp1);
    FormField dol = dolbeault_map(atiyah_p0(E, 1).scalar, cp1);
    // z = 0 lies on the null set {Z_1 = 0} where guarded terms are dropped.
    for (cplx z : {cplx(1e-3), cplx(0.3, 0.8), cplx(-2.0, 0.5)}) {
      ChartPoint p{0, Eigen::VectorXcd::Constant(1, z)};
      double s = 1 + std::norm(z);
      cplx expect = static_cast<double>(k) / (s * s);
      CHECK(std::abs(dr.eval(p, 0).at(3u)(0, 0).value() - expect) <= 1e-14);
      CHECK(std::abs(dol.eval(p, 0).at(3u)(0, 0).value() - expect) <= 1e-14);
    }
  }
  Cochain zero = 0.0 * smooth_atiyah(line_bundle_o(cp1.atlas, 1), 1).scalar;
  CHECK(field_norm(dr_map(zero, cp1), 10, 2) == 0.0);
}

TEST_CASE("Weil transfer takes cup products to wedge products") {
  auto cp2 = build_cpn(2);
  Cochain x1 = smooth_atiyah(line_bundle_o(cp2.atlas, 1), 1).scalar;
  FormField a = dr_map(materialize(cup(x1, x1)), cp2);
  FormField b = wedge(dr_map(x1, cp2), dr_map(x1, cp2));
  CHECK(field_diff(a, b, 100, 4) <= 1e-11);
  CHECK(field_norm(a, 10, 4) > 1e-2);
}

TEST_CASE("Weil transfer restricted to a chart") {
  auto cp2 = build_cpn(2);
  auto A = cp2.atlas;
  for (int p = 1; p <= 2; ++p) {
    Cochain xi = smooth_atiyah(tangent_bundle(A), p).scalar;
    FormField dr = dr_map(xi, cp2);
    for (int b = 0; b < 3; ++b) {
      // DR(xi) = sum over (a1..ap) of xi_{b a1..ap} ^ drho_a1 ^ ... ^ drho_ap on U_b.
      std::vector<std::pair<std::vector<int>, FormField>> terms;
      for (const Tuple& t : xi.ordered_tuples()) {
        if (t[0] != b) continue;
        FormField term = xi(t);
        for (int j = 1; j <= p; ++j) term = wedge(term, ext_d(cp2.rho[t[j]]));
        terms.push_back({t, term});
      }
      FormField local = guarded_sum(A, 2 * p, 1, terms, {b});
      CHECK(chart_diff(dr, local, b, 30, 5 + b) <= 1e-11);
    }
  }
}

// Sum rho_a tr((d theta_a)^p) = DR(xi^p) needs the rho_b dlog g ^ dlog g part of
// d theta_a to drop out of the trace power: true at p = 1, for line bundles,
// and for holomorphic bundles on CP^2 (by type).
TEST_CASE("modified Chern density is the Weil transfer of the Atiyah cocycle") {
  auto cp2 = build_cpn(2);
  auto A = cp2.atlas;
  auto T = tangent_bundle(A);
  auto G = gauge_transform(T, random_gauge(T, 2));
  auto P = polar_unitary_transitions(T, cp2);
  auto N = nonholomorphic_line_bundle(A, 1, 0.1);
  for (const Bundle& e : {line_bundle_o(A, 1), T, G, P, N}) {
    FormField dr = dr_map(smooth_atiyah(e, 1).scalar, cp2);
    CHECK(field_diff(dr, modified_chern_density(levi_civita(e, cp2), cp2, 1), 50, 2) <= 1e-11);
  }
  for (const Bundle& e : {line_bundle_o(A, 1), T, N, direct_sum(T, line_bundle_o(A, -1))}) {
    INFO(e->name());
    FormField dr = dr_map(smooth_atiyah(e, 2).scalar, cp2);
    CHECK(field_diff(dr, modified_chern_density(levi_civita(e, cp2), cp2, 2), 50, 2) <= 1e-11);
  }
  // For any bundle the transfer keeps the drho part of d theta: with
  // A_a = -sum_b drho_b ^ dlog g_ab, DR(xi^2) = sum_a rho_a tr(A_a ^ A_a).
  for (const Bundle& e : {G, P}) {
    std::vector<std::pair<std::vector<int>, FormField>> terms;
    for (int a = 0; a < 3; ++a) {
      std::vector<std::pair<std::vector<int>, FormField>> t;
      for (int b = 0; b < 3; ++b)
        if (b != a) t.push_back({{b}, -wedge(ext_d(cp2.rho[b]), dlog(e->transition(a, b)))});
      FormField Aa = guarded_sum(A, 2, 2, t, {a});
      terms.push_back({{a}, wedge(cp2.rho[a], trace_form(wedge(Aa, Aa)))});
    }
    FormField dr = dr_map(smooth_atiyah(e, 2).scalar, cp2);
    CHECK(field_diff(dr, guarded_sum(A, 4, 1, terms), 50, 3) <= 1e-11);
  }
}

TEST_CASE("Dolbeault transfer of the (p,0) cocycle is the trace of (I del I delbar I)^p") {
  auto cp2 = build_cpn(2);
  auto A = cp2.atlas;
  for (const Bundle& e : {line_bundle_o(A, 1), tangent_bundle(A)}) {
    Idempotent I = fedosov_idempotent(e, cp2);
    FormField th = wedge(I.matrix, wedge(del(I.matrix), delbar(I.matrix)));
    for (int p = 1; p <= 2; ++p) {
      FormField lhs = trace_form(wedge_power(th, p));
      FormField rhs = dolbeault_map(atiyah_p0(e, p).scalar, cp2);
      CHECK(field_diff(lhs, rhs, 200, 5) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(dolbeault_map(smooth_atiyah(line_bundle_o(A, 1), 1).scalar, cp2), std::invalid_argument);
  CHECK_THROWS_AS(dr_map(smooth_atiyah(line_bundle_o(A, 1), 1).scalar, build_cpn(2)), std::invalid_argument);
}

TEST_CASE("chart disagreement of global and chartwise forms") {
  auto cp2 = build_cpn(2);
  FormField dr = dr_map(smooth_atiyah(tangent_bundle(cp2.atlas), 1).scalar, cp2);
  CHECK(chart_disagreement(dr, 10, 1) <= 1e-10);
  auto s2 = build_good_cover_s2();
  CHECK(chart_disagreement(sphere_area(s2.atlas, 1.0), 10, 1) <= 1e-12);
  // A coordinate 1-form read in each chart's own basis is not a global form.
  std::vector<FormField> per;
  for (int a = 0; a < 4; ++a) per.push_back(ext_d(coordinate(s2.atlas, a, 0)));
  CHECK(chart_disagreement(chartwise(s2.atlas, per), 10, 1) > 1e-2);
}

TEST_CASE("Poincare potential of constant forms") {
  auto cp1 = build_cpn(1);
  auto A = cp1.atlas;
  FormField z = coordinate(A, 0, 0), zb = coordinate(A, 0, 1);
  FormField w = wedge(ext_d(z), ext_d(zb));
  FormField th = poincare_potential(w, 0);
  // -i (x dy - y dx) = (z dzbar - zbar dz) / 2
  FormField expect = 0.5 * (wedge(z, ext_d(zb)) - wedge(zb, ext_d(z)));
  CHECK(chart_diff(th, expect, 0, 20, 1) <= 1e-13);
  CHECK(chart_diff(ext_d(th), w, 0, 20, 2) <= 1e-12);
  CHECK(chart_diff(poincare_potential(zero_field(A, 2, 1), 0), zero_field(A, 1, 1), 0, 5, 3) == 0.0);

  auto S = build_good_cover_s2().atlas;
  FormField x = coordinate(S, 1, 0), y = coordinate(S, 1, 1);
  FormField area = wedge(ext_d(x), ext_d(y));
  FormField half = 0.5 * (wedge(x, ext_d(y)) - wedge(y, ext_d(x)));
  CHECK(chart_diff(poincare_potential(area, 1), half, 1, 20, 4) <= 1e-13);
}

TEST_CASE("Poincare potential of random closed forms") {
  auto cp2 = build_cpn(2);
  std::mt19937_64 rng(9);
  for (int k = 1; k <= 2; ++k) {
    FormField w = ext_d(random_global_form(cp2.atlas, k, 1, rng));
    FormField th = poincare_potential(w, 0);
    CHECK(chart_diff(ext_d(th), w, 0, 10, 5) <= 1e-8);
  }
  FormField not_closed = wedge(coordinate(cp2.atlas, 0, 2), ext_d(coordinate(cp2.atlas, 0, 0)));
  CHECK_THROWS_AS(poincare_potential(not_closed, 0), std::invalid_argument);
}

TEST_CASE("path integral of an exact 1-form") {
  auto s2 = build_good_cover_s2();
  std::mt19937_64 rng(6);
  FormField f = random_global_form(s2.atlas, 0, 1, rng);
  FormField df = ext_d(f);
  ChartPoint a = s2.atlas->random_point_in(rng, std::vector<int>{0, 1});
  ChartPoint b = s2.atlas->to_chart(a.chart, s2.atlas->random_point_in(rng, std::vector<int>{a.chart}));
  // Straight segments stay in the (convex) chart disc.
  cplx got = path_integral(df, a.chart, a.coords, b.coords);
  cplx expect = f.eval(b, 0).value(0)(0, 0) - f.eval(a, 0).value(0)(0, 0);
  CHECK(std::abs(got - expect) <= 1e-10);
}

TEST_CASE("reconstruction of a line bundle from a curvature form of period one") {
  auto s2 = build_good_cover_s2();
  auto A = s2.atlas;
  // -2 pi i times the normalized area form: normalized period 1.
  FormField Theta = sphere_area(A, cplx(0, -2.0));
  Reconstruction rec = reconstruct_line_bundle(Theta, s2);
  CHECK(rec.degree == 1);
  CHECK(rec.quantization_defect <= 1e-4);
  CHECK(rec.cech_class_defect <= 1e-4);
  for (int a = 0; a < 4; ++a) CHECK(chart_diff(ext_d(rec.connection.theta[a]), Theta, a, 20, 10 + a) <= 1e-6);
  CHECK(line_cocycle_defect(rec.bundle, 2, 3) <= 1e-6);
  cplx period = integrate_top(dr_map(smooth_atiyah(rec.bundle, 1).scalar, s2), s2, 64) * chern_normalization(1);
  CHECK(std::abs(period - 1.0) <= 1e-4);
  CHECK(rec.trivialization.empty());
}

TEST_CASE("reconstruction of an exact 2-form is trivial") {
  auto s2 = build_good_cover_s2();
  auto A = s2.atlas;
  // beta = phi (u1 u2 du1 + sin(u1) du2) with the C^11 bump
  // phi = (1 - |u|^2/R^2)^12 on the disc |u| < R = 0.8 of chart 0. An
  // exp(-1/s) bump is too steep at its edge for the 32-node radial rule.
  auto in0 = [A](int c, std::span<const Jet> u) { return A->change(0, c, u); };
  FormField phi = scalar_field(A, {0}, [in0](int c, std::span<const Jet> u) {
    std::vector<Jet> v = in0(c, u);
    Jet s = Jet(1.0) - (v[0] * v[0] + v[1] * v[1]) / Jet(0.64);
    return s.value().real() <= 0 ? 0.0 * s : pow(s, 12);
  });
  FormField sn = scalar_field(A, {0}, [in0](int c, std::span<const Jet> u) { return sin(in0(c, u)[0]); });
  FormField u1 = coordinate(A, 0, 0), u2 = coordinate(A, 0, 1);
  FormField gamma = wedge(wedge(u1, u2), ext_d(u1)) + wedge(sn, ext_d(u2));
  FormField beta = guarded_sum(A, 1, 1, {{{0}, wedge(phi, gamma)}});
  FormField Theta = ext_d(beta);
  Reconstruction rec;
  try {
    rec = reconstruct_line_bundle(Theta, s2);
  } catch (const QuantizationError& e) {
    FAIL("defect " << e.defect);
  }
  CHECK(rec.degree == 0);
  REQUIRE(rec.trivialization.size() == 4);
  CHECK(line_cocycle_defect(rec.bundle, 2, 4) <= 1e-6);
  std::mt19937_64 rng(7);
  double err = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a == b || !A->overlap_nonempty(std::vector<int>{a, b})) continue;
      for (int i = 0; i < 3; ++i) {
        ChartPoint p = A->random_point_in(rng, std::vector<int>{a, b});
        EvalContext ctx(*A, p);
        cplx g = rec.bundle->transition(a, b).eval(ctx).value(0)(0, 0);
        cplx fa = rec.trivialization[a].eval(ctx).value(0)(0, 0);
        cplx fb = rec.trivialization[b].eval(ctx).value(0)(0, 0);
        err = std::max(err, std::abs(g - fa / fb));
      }
    }
  CHECK(err <= 1e-6);
  for (int a = 0; a < 4; ++a) CHECK(chart_diff(ext_d(rec.connection.theta[a]), Theta, a, 20, 20 + a) <= 1e-6);
}

TEST_CASE("reconstruction of the zero form and of bad inputs") {
  auto s2 = build_good_cover_s2();
  auto A = s2.atlas;
  Reconstruction rec = reconstruct_line_bundle(zero_field(A, 2, 1), s2);
  CHECK(rec.degree == 0);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    ChartPoint p = A->random_point_in(rng, std::vector<int>{0, 2});
    EvalContext ctx(*A, p);
    CHECK(std::abs(rec.bundle->transition(0, 2).eval(ctx).value(0)(0, 0) - 1.0) <= 1e-14);
    CHECK(rec.connection.theta[0].eval(ctx).max_abs() <= 1e-14);
  }
  try {
    reconstruct_line_bundle(sphere_area(A, cplx(0, -1.0)), s2);
    FAIL("half-integral period accepted");
  } catch (const QuantizationError& e) {
    CHECK(std::abs(e.defect - 0.5) <= 1e-3);
  }
  CHECK_THROWS_AS(reconstruct_line_bundle(zero_field(A, 1, 1), s2), std::invalid_argument);
  auto cp1 = build_cpn(1);
  CHECK_THROWS_AS(reconstruct_line_bundle(zero_field(cp1.atlas, 2, 1), cp1), std::invalid_argument);
}
