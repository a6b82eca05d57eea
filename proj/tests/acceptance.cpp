// Acceptance gate: runs the nine criteria and prints one PASS/FAIL line each.
// Exit status 0 iff every criterion passes.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chern/atiyah.hpp"
#include "chern/cli.hpp"
#include "chern/koszul.hpp"
#include "chern/periods.hpp"
#include "chern/weil.hpp"

#ifndef CHERN_CLI_PATH
#define CHERN_CLI_PATH "chern"
#endif

using namespace chern;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void criterion(int n, const std::string& name, const std::function<void(Outcome&)>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << n << ". " << name << ":" << o.detail.str() << " ("
            << std::fixed << std::setprecision(1) << seconds_since(t0) << " s)" << std::endl;
  std::cout.unsetf(std::ios::floatfield);
}

cplx normalized(const FormField& w, const PartitionOfUnity& pou, int order, int p, bool already) {
  cplx raw = integrate_top(w, pou, order);
  return already ? raw : raw * chern_normalization(p);
}

std::string sci(double x) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << x;
  return s.str();
}

// ---------------------------------------------------------------- 1

void chern_periods_cp1(Outcome& o) {
  auto t0 = std::chrono::steady_clock::now();
  auto cp1 = build_cpn(1);
  const int order = default_quad_order(*cp1.atlas);
  double worst = 0;
  for (int k = -2; k <= 3; ++k) {
    Bundle E = line_bundle_o(cp1.atlas, k);
    std::array<cplx, 4> v = {
        normalized(chern_form(E, cp1, 1), cp1, order, 1, true),
        normalized(modified_chern_form(E, cp1, 1), cp1, order, 1, true),
        normalized(dr_map(smooth_atiyah(E, 1).scalar, cp1), cp1, order, 1, false),
        normalized(dolbeault_map(atiyah_p0(E, 1).scalar, cp1), cp1, order, 1, false),
    };
    for (cplx x : v) worst = std::max(worst, std::abs(x - static_cast<double>(k)));
  }
  double t = seconds_since(t0);
  o.detail << " max |period - k| = " << sci(worst) << " (tol 1e-6), runtime " << std::fixed << std::setprecision(2)
           << t << " s (limit 10 s)";
  o.require(worst <= 1e-6, "period");
  o.require(t < 10, "runtime");
}

// ---------------------------------------------------------------- 2

void chern_periods_cp2(Outcome& o) {
  auto t0 = std::chrono::steady_clock::now();
  auto cp2 = build_cpn(2);
  const int order = 12;
  Bundle O1 = line_bundle_o(cp2.atlas, 1), T = tangent_bundle(cp2.atlas);
  cplx dr = normalized(dr_map(smooth_atiyah(O1, 2).scalar, cp2), cp2, order, 2, false);
  cplx ch_o1 = normalized(chern_form(O1, cp2, 2), cp2, order, 2, true);
  cplx tilde_t = normalized(modified_chern_form(T, cp2, 2), cp2, order, 2, true);
  cplx ch_t = normalized(chern_form(T, cp2, 2), cp2, order, 2, true);
  double t = seconds_since(t0);
  double e1 = std::abs(dr - 0.5), e2 = std::abs(tilde_t - 1.5);
  double a1 = std::abs(dr - ch_o1), a2 = std::abs(tilde_t - ch_t);
  o.detail << " DR(xi^2, O(1)) = " << dr.real() << " (err " << sci(e1) << "), tilde-ch_2(T) = " << tilde_t.real()
           << " (err " << sci(e2) << "), oracle gaps " << sci(a1) << ", " << sci(a2) << ", runtime " << std::fixed
           << std::setprecision(1) << t << " s";
  o.require(e1 <= 1e-2 && e2 <= 1e-2, "period");
  o.require(a1 <= 2e-2 && a2 <= 2e-2, "oracle agreement");
  o.require(t < 300, "runtime");
}

// ---------------------------------------------------------------- 3

void pointwise_suite(Outcome& o) {
  constexpr int kPoints = 1000;
  struct Case {
    std::string manifold, bundle;
    int p;
  };
  // The smooth identity tr(d theta)^p = DR(xi^p) holds for p = 1, for line
  // bundles and for holomorphic transitions; rank-2 bundles with
  // non-holomorphic transitions at p = 2 only satisfy the drho part of it.
  const std::vector<Case> smooth = {
      {"cp1", "O:-2", 1},           {"cp1", "O:3", 1},       {"cp1", "T", 1},
      {"cp1", "sum(O:1,O:2)", 1},   {"cp1", "gauge(sum(O:1,O:2),5)", 1},
      {"cp1", "polar(sum(O:1,O:-1))", 1},                    {"cp1", "nonhol(1,0.3)", 1},
      {"cp2", "O:1", 1},            {"cp2", "O:1", 2},       {"cp2", "O:-2", 2},
      {"cp2", "T", 1},              {"cp2", "T", 2},         {"cp2", "sum(T,O:-1)", 2},
      {"cp2", "nonhol(1,0.3)", 2},  {"cp2", "gauge(T,3)", 1}, {"cp2", "polar(T)", 1},
      {"s2good", "O:2", 1},         {"s2good", "sum(O:1,O:-3)", 1},
  };
  const std::vector<Case> drho_only = {{"cp2", "gauge(T,3)", 2}, {"cp2", "polar(T)", 2}};
  const std::vector<Case> holomorphic = {{"cp1", "O:2", 1}, {"cp1", "T", 1},   {"cp1", "sum(O:1,O:-1)", 1},
                                         {"cp2", "O:1", 1}, {"cp2", "O:1", 2}, {"cp2", "T", 1},
                                         {"cp2", "T", 2},   {"cp2", "sum(T,O:1)", 2}};

  double worst_smooth = 0, worst_drho = 0, worst_hol = 0;
  std::ostringstream diag;
  for (const Case& c : smooth) {
    auto pou = make_manifold(c.manifold);
    Bundle E = parse_bundle_spec(c.bundle, pou);
    FormField dr = dr_map(smooth_atiyah(E, c.p).scalar, pou);
    worst_smooth = std::max(worst_smooth, sampled_diff(dr, modified_chern_density(levi_civita(E, pou), pou, c.p),
                                                       kPoints, 11));
    worst_drho = std::max(worst_drho, sampled_diff(dr, drho_part_density(E, pou, c.p), kPoints / 4, 12));
  }
  for (const Case& c : drho_only) {
    auto pou = make_manifold(c.manifold);
    Bundle E = parse_bundle_spec(c.bundle, pou);
    FormField dr = dr_map(smooth_atiyah(E, c.p).scalar, pou);
    worst_drho = std::max(worst_drho, sampled_diff(dr, drho_part_density(E, pou, c.p), kPoints, 13));
    diag << "; " << c.bundle << " p=" << c.p << " full-density gap "
         << sci(sampled_diff(dr, modified_chern_density(levi_civita(E, pou), pou, c.p), 50, 14))
         << " (non-holomorphic rank 2, not required)";
  }
  for (const Case& c : holomorphic) {
    auto pou = make_manifold(c.manifold);
    Bundle E = parse_bundle_spec(c.bundle, pou);
    Idempotent I = fedosov_idempotent(E, pou);
    FormField th = wedge(I.matrix, wedge(del(I.matrix), delbar(I.matrix)));
    FormField lhs = trace_form(wedge_power(th, c.p));
    worst_hol = std::max(worst_hol, sampled_diff(lhs, dolbeault_map(atiyah_p0(E, c.p).scalar, pou), kPoints, 15));
  }
  o.detail << " smooth identity " << sci(worst_smooth) << " over " << smooth.size() << " cases, drho part "
           << sci(worst_drho) << " over " << smooth.size() + drho_only.size() << " cases, (1,1) identity "
           << sci(worst_hol) << " over " << holomorphic.size() << " holomorphic cases (tol 1e-10)" << diag.str();
  o.require(worst_smooth <= 1e-10, "smooth identity");
  o.require(worst_drho <= 1e-10, "drho part");
  o.require(worst_hol <= 1e-10, "(1,1) identity");
}

// ---------------------------------------------------------------- 4

void structural(Outcome& o) {
  double dd = 0, d2 = 0, hom = 0, transfer = 0, cupw = 0, deriv = 0;
  for (const std::string& m : {"cp1", "cp2", "s2good"}) {
    auto pou = make_manifold(m);
    const auto& A = pou.atlas;
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
      for (int q = 0; q <= 2; ++q)
        for (int fp = 0; fp <= 2; ++fp) {
          std::uint64_t s = 100 * seed + 10 * q + fp;
          Cochain eta = random_cochain(A, q, fp, 1, s, true);
          Cochain x = cech_delta(cech_delta(eta));
          dd = std::max(dd, sampled_cochain_diff(x, 0.0 * x, 2, s));
          Cochain y = cochain_d(cochain_d(eta));
          d2 = std::max(d2, sampled_cochain_diff(y, 0.0 * y, 2, s));
          if (q >= 1)
            hom = std::max(hom, sampled_cochain_diff(
                                    homotopy_h(cech_delta(eta), pou) + cech_delta(homotopy_h(eta, pou)), eta, 2, s));
          FormField lhs = ext_d(dr_map(eta, pou));
          FormField rhs = (fp % 2 ? -1.0 : 1.0) * dr_map(cech_delta(eta), pou) + dr_map(cochain_d(eta), pou);
          transfer = std::max(transfer, sampled_diff(lhs, rhs, 10, s));
          Cochain xi = random_cochain(A, q, fp, 1, s + 7);
          Cochain ze = random_cochain(A, 0, 1, 1, s + 9);
          Cochain l = cech_delta(cup(xi, ze));
          Cochain r = cup(cech_delta(xi), ze) + ((q + fp) % 2 ? -1.0 : 1.0) * cup(xi, cech_delta(ze));
          deriv = std::max(deriv, sampled_cochain_diff(l, r, 2, s));
        }
    for (const std::string& b : {"O:1", "T", "sum(O:1,O:-1)"}) {
      Bundle E = parse_bundle_spec(b, pou);
      for (int p = 1; p <= 2; ++p)
        for (int p2 = 1; p2 <= 2; ++p2) {
          if (2 * (p + p2) > A->real_dim()) continue;
          Cochain x1 = smooth_atiyah(E, p).scalar, x2 = smooth_atiyah(E, p2).scalar;
          cupw = std::max(cupw, sampled_diff(dr_map(materialize(cup(x1, x2)), pou),
                                             wedge(dr_map(x1, pou), dr_map(x2, pou)), 50, 3));
        }
    }
  }
  o.detail << " delta^2 " << sci(dd) << ", d^2 " << sci(d2) << ", h delta + delta h - id " << sci(hom)
           << ", d of Weil transfer " << sci(transfer) << ", cup to wedge " << sci(cupw) << ", derivation law "
           << sci(deriv) << " (tol 1e-10)";
  for (double v : {dd, d2, hom, transfer, cupw, deriv}) o.require(v <= 1e-10, "structural identity");
}

// ---------------------------------------------------------------- 5

void gauge_and_partition(Outcome& o) {
  struct Case {
    std::string manifold, bundle;
    double tol;
  };
  const std::vector<Case> cases = {{"cp1", "sum(O:1,O:2)", 1e-6}, {"cp1", "T", 1e-6}, {"s2good", "O:1", 1e-4}};
  double worst_ratio = 0;
  for (const Case& c : cases) {
    auto pou = make_manifold(c.manifold);
    const int order = default_quad_order(*pou.atlas);
    auto periods = [&](const Bundle& E, const PartitionOfUnity& P) {
      return std::array<cplx, 3>{normalized(chern_form(E, P, 1), P, order, 1, true),
                                 normalized(modified_chern_form(E, P, 1), P, order, 1, true),
                                 normalized(dr_map(smooth_atiyah(E, 1).scalar, P), P, order, 1, false)};
    };
    Bundle E = parse_bundle_spec(c.bundle, pou);
    auto base = periods(E, pou);
    Bundle G = gauge_transform(E, random_gauge(E, 21));
    auto gauged = periods(G, pou);
    auto pert_pou = perturbed_partition(pou, 0.2, 22);
    auto perturbed = periods(parse_bundle_spec(c.bundle, pert_pou), pert_pou);
    for (int i = 0; i < 3; ++i) {
      worst_ratio = std::max(worst_ratio, std::abs(gauged[i] - base[i]) / c.tol);
      worst_ratio = std::max(worst_ratio, std::abs(perturbed[i] - base[i]) / c.tol);
    }
  }
  o.detail << " max period change / quadrature tolerance = " << sci(worst_ratio) << " (limit 2)";
  o.require(worst_ratio <= 2, "period change");
}

// ---------------------------------------------------------------- 6

const CheckRecord& find_check(const Report& r, const std::string& name) {
  for (const CheckRecord& c : r.checks)
    if (c.name == name) return c;
  throw std::runtime_error("missing check '" + name + "'");
}

void reconstruction(Outcome& o) {
  RunConfig cfg;
  cfg.manifold = "s2good";
  cfg.bundle = "area:1";
  Report one = run_reconstruct(cfg);
  const CheckRecord& per = find_check(one, "recomputed period equals the degree");
  cfg.bundle = "exact";
  Report exact = run_reconstruct(cfg);
  const CheckRecord& triv = find_check(exact, "transitions are f_a / f_b");
  const CheckRecord& coc = find_check(exact, "transition cocycle identity");
  o.detail << " period-one input: degree " << one.extra.value("degree", -99) << ", recomputed period error "
           << sci(per.measured) << " (tol 1e-4); exact input: degree " << exact.extra.value("degree", -99)
           << ", |g - f_a/f_b| " << sci(triv.measured) << ", cocycle defect " << sci(coc.measured) << " (tol 1e-6)";
  o.require(one.all_pass() && one.extra.value("degree", -99) == 1 && per.measured <= 1e-4, "period one");
  o.require(exact.all_pass() && exact.extra.value("degree", -99) == 0, "exact reconstruction");
  o.require(triv.measured <= 1e-6 && coc.measured <= 1e-6, "trivialization");
}

// ---------------------------------------------------------------- 7

void dbar_discrimination(Outcome& o) {
  double hol = 0, nonhol = std::numeric_limits<double>::infinity();
  for (const std::string& m : {"cp1", "cp2"}) {
    auto pou = make_manifold(m);
    const int pmax = pou.atlas->real_dim() / 2;
    for (const std::string& b : {"O:-1", "O:2", "T", "sum(T,O:1)"}) {
      Bundle E = parse_bundle_spec(b, pou);
      for (int p = 1; p <= pmax; ++p) hol = std::max(hol, dbar_defect(atiyah_p0(E, p).scalar, 50, 31));
    }
    for (int k : {0, 1, 2})
      for (double eps : {0.1, 0.3, 0.5}) {
        Bundle E = nonholomorphic_line_bundle(pou.atlas, k, eps);
        nonhol = std::min(nonhol, dbar_defect(atiyah_p0(E, 1).scalar, 50, 32));
      }
  }
  o.detail << " holomorphic max " << sci(hol) << " (tol 1e-12), non-holomorphic family min " << sci(nonhol)
           << " (must exceed 1e-3)";
  o.require(hol <= 1e-12, "holomorphic");
  o.require(nonhol > 1e-3, "non-holomorphic");
}

// ---------------------------------------------------------------- 8

void koszul_layer(Outcome& o) {
  int exact_ok = 0, total = 0;
  double numeric = 0;
  for (int dim : {1, 2}) {
    auto pou = build_cpn(dim);
    const auto& space = dynamic_cast<const ProjectiveSpace&>(*pou.atlas);
    for (int k : {0, 1, 2})
      for (int p = 1; p <= std::min(dim, 2); ++p) {
        ++total;
        KoszulCocycle eta = algebraic_atiyah(dim + 1, k, p);
        bool ok = eta.degree_balanced() && koszul_delta_check(eta).ok;
        for (int l = eta.level; l <= eta.level + 3; ++l) {
          KoszulCocycle raised = level_raise(eta, l);
          ok = ok && raised.degree_balanced() && koszul_delta_check(raised).ok;
        }
        exact_ok += ok;
        Cochain xi = atiyah_p0(line_bundle_o(pou.atlas, k), p).scalar;
        std::mt19937_64 rng(41);
        for (const auto& [t, num] : eta.numerators)
          for (int i = 0; i < 20; ++i) {
            ChartPoint pt = pou.atlas->random_point_in(rng, t);
            numeric = std::max(numeric, max_abs_diff(evaluate_fraction(eta, t, space, pt), xi(t).eval(pt, 0)));
          }
      }
  }
  o.detail << " exact coboundary identity at levels m..m+3 in " << exact_ok << "/" << total
           << " cocycles, numeric agreement " << sci(numeric) << " (tol 1e-12)";
  o.require(exact_ok == total, "exact identity");
  o.require(numeric <= 1e-12, "numeric agreement");
}

// ---------------------------------------------------------------- 9

std::string capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* f = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!f) throw std::runtime_error("cannot run " + cmd);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) out.append(buf.data(), n);
  status = pclose(f);
  return out;
}

void determinism(Outcome& o) {
  const std::string cli = CHERN_CLI_PATH;
  const std::vector<std::string> runs = {
      "verify --manifold cp1 --bundle O:1 --p 1 --seed 7",
      "verify --manifold cp2 --bundle 'gauge(T,3)' --p 1",
      "periods --manifold cp1 --bundle 'polar(O:1)' --p 1",
      "koszul --manifold cp2 --bundle O:2 --p 2",
  };
  int same = 0;
  for (const std::string& args : runs) {
    int s1 = 0, s2 = 0;
    std::string a = capture(cli + " " + args, s1), b = capture(cli + " " + args, s2);
    bool ok = !a.empty() && a == b && s1 == s2;
    same += ok;
    if (!ok) o.detail << " [differs: " << args << "]";
  }
  o.detail << " " << same << "/" << runs.size() << " invocations byte-identical across two runs";
  o.require(same == static_cast<int>(runs.size()), "byte-identical");
}

}  // namespace

int main() {
  criterion(1, "Chern periods of O(k) on CP^1", chern_periods_cp1);
  criterion(2, "second Chern character periods on CP^2", chern_periods_cp2);
  criterion(3, "pointwise identity suite", pointwise_suite);
  criterion(4, "structural identities", structural);
  criterion(5, "gauge and partition independence", gauge_and_partition);
  criterion(6, "reconstruction round trip", reconstruction);
  criterion(7, "dbar defect discrimination", dbar_discrimination);
  criterion(8, "Koszul layer", koszul_layer);
  criterion(9, "determinism", determinism);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
