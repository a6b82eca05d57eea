#include <doctest.h>

#include <random>

#include "chern/atiyah.hpp"
#include "chern/koszul.hpp"

using namespace chern;

namespace {

HomogPoly P(const std::string& s, int n) { return HomogPoly::parse(s, n); }

// O(1) on CP^2: eta_ab = Z_a dZ_b - Z_b dZ_a at level 1.
KoszulCocycle telescoping(int n) {
  KoszulCocycle eta;
  eta.nvars = n;
  eta.q = 1;
  eta.p = 1;
  eta.level = 1;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      eta.numerators[{a, b}] = HomogPoly::coordinate(n, a) * HomogPoly::differential(n, b) -
                               HomogPoly::coordinate(n, b) * HomogPoly::differential(n, a);
  return eta;
}

}  // namespace

TEST_CASE("exterior polynomial arithmetic") {
  HomogPoly x = P("Z0 [dZ1]", 3), y = P("Z1 [dZ0]", 3);
  CHECK((x * y).is_zero() == false);
  CHECK(x * y == P("-1 * Z0 Z1 [dZ0 ^ dZ1]", 3));
  CHECK(P("[dZ1]", 3) * P("[dZ1]", 3) == HomogPoly(3));
  CHECK(P("[dZ2 ^ dZ0]", 3) == P("-1 * [dZ0 ^ dZ2]", 3));
  CHECK((P("Z0 + Z1", 2).pow(2)) == P("Z0^2 + 2 * Z0 Z1 + Z1^2", 2));
  CHECK(P("1/2 * Z0 + 1/3 * Z0", 1) == P("5/6 * Z0", 1));
  CHECK(P("Z0 Z1^2 [dZ0]", 2).degree() == 4);
  CHECK(P("Z0 + [dZ1]", 2).degree() == 1);
  CHECK_FALSE(P("Z0 + Z0^2", 2).degree().has_value());
  CHECK(P("Z0 + Z0 [dZ1]", 2).form_degree() == std::nullopt);
}

TEST_CASE("polynomial text round trip") {
  for (const char* s : {"0", "3", "-7/4 * Z0^3 Z2 [dZ0 ^ dZ1]", "1 * Z0 [dZ1] + -1 * Z1 [dZ0]", "2/3 * [dZ2]"}) {
    HomogPoly p = P(s, 3);
    CHECK(HomogPoly::parse(p.to_string(), 3) == p);
  }
  KoszulCocycle eta = algebraic_atiyah(3, 2, 2);
  for (const auto& [t, num] : eta.numerators) CHECK(HomogPoly::parse(num.to_string(), 3) == num);
  CHECK(P("1 * Z0 [dZ1] + -1 * Z1 [dZ0]", 2).to_string() == "-1 * Z1 [dZ0] + 1 * Z0 [dZ1]");
  CHECK_THROWS_AS(P("Z3", 3), std::invalid_argument);
  CHECK_THROWS_AS(P("2 * Q0", 3), std::invalid_argument);
  CHECK_THROWS_AS(P("Z0 + ", 3), std::invalid_argument);
  CHECK_THROWS_AS(P("", 3), std::invalid_argument);
}

TEST_CASE("Koszul coboundary check of the telescoping cocycle") {
  KoszulCocycle eta = telescoping(3);
  CHECK(eta.degree_balanced());
  KoszulCheck c = koszul_delta_check(eta);
  CHECK(c.ok);
  CHECK(c.tuples_checked == 1);

  KoszulCocycle zero = eta;
  for (auto& [t, num] : zero.numerators) num = HomogPoly(3);
  CHECK(koszul_delta_check(zero).ok);

  KoszulCocycle bad = eta;
  bad.numerators[{0, 2}] = bad.numerators[{0, 2}] + P("Z0 [dZ1]", 3);
  KoszulCheck f = koszul_delta_check(bad);
  CHECK_FALSE(f.ok);
  CHECK(f.tuple == std::vector<int>{0, 1, 2});
  // -Z_1 times the added term.
  CHECK(f.witness == P("-1 * Z0 Z1 [dZ1]", 3));
}

TEST_CASE("level raising") {
  KoszulCocycle eta = telescoping(3);
  KoszulCocycle same = level_raise(eta, 1);
  CHECK(same.numerators == eta.numerators);
  KoszulCocycle two = level_raise(eta, 2);
  CHECK(two.numerators.at({0, 1}) == P("Z0^2 Z1 [dZ1] + -1 * Z0 Z1^2 [dZ0]", 3));
  CHECK(two.degree_balanced());
  CHECK(koszul_delta_check(two).ok);

  KoszulCocycle bad = eta;
  bad.numerators[{0, 2}] = bad.numerators[{0, 2}] + P("Z0 [dZ1]", 3);
  CHECK_FALSE(koszul_delta_check(level_raise(bad, 3)).ok);
  CHECK_THROWS_AS(level_raise(two, 1), std::invalid_argument);
}

TEST_CASE("algebraic Atiyah cocycles") {
  KoszulCocycle e1 = algebraic_atiyah(2, 1, 1);
  CHECK(e1.numerators.at({0, 1}) == P("Z0 [dZ1] + -1 * Z1 [dZ0]", 2));
  CHECK(e1.numerator({1, 0}) == P("-1 * Z0 [dZ1] + Z1 [dZ0]", 2));
  for (auto& [t, num] : algebraic_atiyah(3, 0, 2).numerators) CHECK(num.is_zero());
  for (int n : {2, 3})
    for (int k : {0, 1, 2})
      for (int p : {1, 2}) {
        KoszulCocycle eta = algebraic_atiyah(n, k, p);
        CHECK(eta.degree_balanced());
        CHECK(koszul_delta_check(eta).ok);
        CHECK(koszul_delta_check(level_raise(eta, eta.level + 2)).ok);
      }
  CHECK_THROWS_AS(algebraic_atiyah(3, 1, 4), std::invalid_argument);
}

TEST_CASE("algebraic and numeric Atiyah cocycles agree") {
  for (int n : {1, 2}) {
    auto pou = build_cpn(n);
    const auto& space = dynamic_cast<const ProjectiveSpace&>(*pou.atlas);
    for (int k : {1, 2, -1})
      for (int p = 1; p <= n; ++p) {
        KoszulCocycle eta = algebraic_atiyah(n + 1, k, p);
        Cochain xi = atiyah_p0(line_bundle_o(pou.atlas, k), p).scalar;
        std::mt19937_64 rng(17);
        double err = 0;
        for (const auto& [t, num] : eta.numerators)
          for (int i = 0; i < 10; ++i) {
            ChartPoint pt = pou.atlas->random_point_in(rng, t);
            err = std::max(err, max_abs_diff(evaluate_fraction(eta, t, space, pt), xi(t).eval(pt, 0)));
          }
        CHECK(err <= 1e-12);
      }
  }
}
