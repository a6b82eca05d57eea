#include <doctest.h>

#include <random>

#include "chern/forms.hpp"
#include "chern/geometry.hpp"

using namespace chern;

namespace {

// A single complex chart: CP^1 chart 0 near the origin, and the S^2 cover as a real chart.
std::shared_ptr<const Atlas> cp1() { return build_cpn(1).atlas; }

ChartPoint at(cplx z) { return ChartPoint{0, Eigen::VectorXcd::Constant(1, z)}; }

FormField z_of(const std::shared_ptr<const Atlas>& a) { return coordinate(a, 0, 0); }
FormField zbar_of(const std::shared_ptr<const Atlas>& a) { return coordinate(a, 0, 1); }

// Scalar fields with polynomial-exponential coefficients, different per seed.
FormField test_function(const std::shared_ptr<const Atlas>& a, int seed) {
  double s = 0.3 + 0.1 * seed;
  return scalar_field(a, {0}, [s, seed](int, std::span<const Jet> x) {
    Jet z = x[0], zb = x[1];
    return exp(Jet(s) * (z + zb)) * (z * z * zb + Jet(cplx(0.2, seed))) + sin(z * zb);
  });
}

constexpr unsigned dz = 1u, dzb = 2u;

// Chart-0 point with coordinates in the unit polydisc.
ChartPoint bounded_point(const Atlas& A, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  ChartPoint p{0, Eigen::VectorXcd(A.coord_count())};
  for (int i = 0; i < p.coords.size(); ++i) p.coords[i] = cplx(u(rng), u(rng));
  return p;
}

}  // namespace

TEST_CASE("wedge of basis forms") {
  auto A = cp1();
  FormField dzf = ext_d(z_of(A)), dzbf = ext_d(zbar_of(A));
  auto p = at(cplx(0.4, 0.2));
  CHECK(wedge(dzf, dzf).eval(p).max_abs() == 0.0);
  CHECK(wedge(dzf, dzbf).eval(p).value(dz | dzb)(0, 0) == cplx(1.0));
  CHECK(wedge(dzbf, dzf).eval(p).value(dz | dzb)(0, 0) == cplx(-1.0));
}

TEST_CASE("graded commutativity of scalar 1-forms") {
  auto A = cp1();
  FormField a = ext_d(test_function(A, 1)), b = wedge(test_function(A, 2), ext_d(test_function(A, 3)));
  std::mt19937_64 rng(7);
  double err = 0;
  for (int i = 0; i < 100; ++i) {
    auto p = bounded_point(*A, rng);
    err = std::max(err, max_abs_diff(wedge(a, b).eval(p), -1.0 * wedge(b, a).eval(p)));
  }
  CHECK(err <= 1e-14);
}

TEST_CASE("exterior derivative examples") {
  auto A = cp1();
  auto p = at(cplx(-0.3, 0.8));
  FormField w = wedge(z_of(A), ext_d(zbar_of(A)));
  CHECK(std::abs(ext_d(w).eval(p).value(dz | dzb)(0, 0) - 1.0) < 1e-15);

  auto S = build_good_cover_s2().atlas;
  ChartPoint q{0, Eigen::Vector2cd(0.3, -0.2)};
  FormField x = coordinate(S, 0, 0), y = coordinate(S, 0, 1);
  FormField form = wedge(wedge(x, x), ext_d(y));
  FormJet d = ext_d(form).eval(q);
  CHECK(std::abs(d.value(3u)(0, 0) - 0.6) < 1e-15);
}

TEST_CASE("d squared and Dolbeault relations vanish") {
  auto A = cp1();
  FormField f = scalar_field(A, {0}, [](int, std::span<const Jet> x) {
    return abs2(x[0]) * exp(real_part(x[0]));
  });
  FormField g = wedge(test_function(A, 2), ext_d(test_function(A, 4)));
  std::mt19937_64 rng(11);
  double err = 0;
  for (int i = 0; i < 100; ++i) {
    auto p = bounded_point(*A, rng);
    for (const FormField& h : {f, g}) {
      err = std::max(err, ext_d(ext_d(h)).eval(p).max_abs());
      err = std::max(err, del(del(h)).eval(p).max_abs());
      err = std::max(err, delbar(delbar(h)).eval(p).max_abs());
      err = std::max(err, (del(delbar(h)) + delbar(del(h))).eval(p).max_abs());
    }
  }
  CHECK(err <= 1e-12);
}

TEST_CASE("Leibniz rule") {
  auto A = cp1();
  FormField a = wedge(test_function(A, 0), ext_d(test_function(A, 1)));
  FormField b = test_function(A, 5);
  std::mt19937_64 rng(3);
  double err = 0;
  for (int i = 0; i < 100; ++i) {
    auto p = bounded_point(*A, rng);
    FormJet lhs = ext_d(wedge(a, b)).eval(p);
    FormJet rhs = (wedge(ext_d(a), b) + (-1.0) * wedge(a, ext_d(b))).eval(p);
    err = std::max(err, max_abs_diff(lhs, rhs));
  }
  CHECK(err <= 1e-12);
}

TEST_CASE("(p,q) split of simple functions") {
  auto A = cp1();
  auto p = at(cplx(0.7, -0.4));
  const cplx z(0.7, -0.4);
  FormField f = wedge(z_of(A), zbar_of(A));
  CHECK(std::abs(del(f).eval(p).value(dz)(0, 0) - std::conj(z)) < 1e-15);
  CHECK(std::abs(delbar(f).eval(p).value(dzb)(0, 0) - z) < 1e-15);
  FormField cube = wedge(wedge(z_of(A), z_of(A)), z_of(A));
  CHECK(delbar(cube).eval(p).max_abs() == 0.0);

  FormField w = ext_d(wedge(zbar_of(A), ext_d(z_of(A))));
  auto parts = split_pq(w);
  // On a curve only the (1,1) part can be nonzero.
  REQUIRE(parts.size() == 1);
  CHECK(parts[0].eval(p).value(dz | dzb)(0, 0) == cplx(-1.0));  // dzbar ^ dz
  CHECK(*parts[0].bidegree() == Bidegree{1, 1});
  CHECK(project_pq(w, 2, 0).eval(p).max_abs() == 0.0);
}

TEST_CASE("split parts sum to the original") {
  auto A = build_cpn(2).atlas;
  FormField a = wedge(ext_d(coordinate(A, 0, 0)), ext_d(scalar_field(A, {0}, [](int, std::span<const Jet> x) {
                        return exp(x[1] * x[2]) + x[3] * x[0];
                      })));
  std::mt19937_64 rng(5);
  auto p = bounded_point(*A, rng);
  auto parts = split_pq(a);
  FormJet total = FormJet::zero(4, 2, 2, 1);
  for (auto& f : parts) total = total + f.eval(p);
  CHECK(max_abs_diff(total, a.eval(p)) == 0.0);
}

TEST_CASE("trace identities for matrix forms") {
  auto A = cp1();
  auto mat1 = [&](int s) {
    return function_field(A, {0}, 2, [s](int, std::span<const Jet> x) {
      JetMatrix m(2, 2);
      m(0, 0) = x[0] * Jet(double(s));
      m(0, 1) = exp(x[1] * Jet(0.1 * s));
      m(1, 0) = x[0] * x[1] + Jet(double(s));
      m(1, 1) = sin(x[0] + Jet(double(s)));
      return m;
    });
  };
  FormField M = wedge(mat1(1), ext_d(mat1(2)));
  FormField N = wedge(mat1(3), ext_d(mat1(4)));
  FormField diag = function_field(A, {0}, 2, [](int, std::span<const Jet> x) {
    JetMatrix m = jet_zero(2);
    m(0, 0) = x[0];
    m(1, 1) = x[1];
    return m;
  });
  std::mt19937_64 rng(13);
  double err = 0;
  for (int i = 0; i < 100; ++i) {
    auto p = bounded_point(*A, rng);
    err = std::max(err, trace_form(wedge(M, M)).eval(p).max_abs());
    err = std::max(err, max_abs_diff(trace_form(wedge(M, N)).eval(p), -1.0 * trace_form(wedge(N, M)).eval(p)));
    FormJet t = trace_form(ext_d(diag)).eval(p);
    err = std::max(err, std::abs(t.value(dz)(0, 0) - 1.0) + std::abs(t.value(dzb)(0, 0) - 1.0));
  }
  CHECK(err <= 1e-13);
}

TEST_CASE("pullback agrees with direct evaluation in another chart") {
  auto A = build_cpn(2).atlas;
  // A form written through chart 0 coefficients, evaluated from chart 1.
  FormField f = coefficient_field(A, 0, 1, 1, [](const Eigen::VectorXcd& z, int order) {
    auto x = seed_complex(z, order);
    FormJet r = FormJet::zero(4, 2, 1, 1);
    r.coef[0](0, 0) = x[1] * x[2];
    r.coef[3](0, 0) = exp(x[0]);
    return r;
  });
  FormField direct = wedge(wedge(coordinate(A, 0, 1), coordinate(A, 0, 2)), ext_d(coordinate(A, 0, 0))) +
                     wedge(scalar_field(A, {0}, [A](int c, std::span<const Jet> x) {
                             return exp(A->change(0, c, x)[0]);
                           }),
                           ext_d(coordinate(A, 0, 3)));
  std::mt19937_64 rng(17);
  double err = 0;
  for (int i = 0; i < 100; ++i) {
    auto p = bounded_point(*A, rng);
    p.coords[0] += 0.8;
    auto q = A->to_chart(1, p);
    err = std::max(err, max_abs_diff(f.eval(q, 1), direct.eval(q, 1)));
  }
  CHECK(err <= 1e-10);
}

TEST_CASE("evaluation outside the domain is rejected") {
  auto S = build_good_cover_s2().atlas;
  FormField x0 = coordinate(S, 0, 0);
  auto far = std::static_pointer_cast<const SphereGoodCover>(S)->from_ambient(1, -std::static_pointer_cast<const SphereGoodCover>(S)->center(0));
  CHECK_THROWS_AS(x0.eval(far), DomainError);
}
