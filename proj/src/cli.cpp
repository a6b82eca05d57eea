#include "chern/cli.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "chern/atiyah.hpp"
#include "chern/koszul.hpp"
#include "chern/periods.hpp"
#include "chern/weil.hpp"

namespace chern {

// ---------------------------------------------------------------- reports

bool Report::all_pass() const {
  for (const CheckRecord& c : checks)
    if (!c.pass) return false;
  return true;
}

nlohmann::ordered_json Report::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["suite"] = suite;
  j["config"] = {{"manifold", config.manifold},
                 {"bundle", config.bundle},
                 {"p", config.p},
                 {"quad_order", quad_order},
                 {"seed", config.seed}};
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const CheckRecord& c : checks)
    list.push_back({{"name", c.name},
                    {"status", c.pass ? "pass" : "fail"},
                    {"measured", c.measured},
                    {"tolerance", c.tolerance},
                    {"runtime_ms", c.runtime_ms}});
  j["checks"] = list;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  j["all_pass"] = all_pass();
  return j;
}

std::string Report::table() const {
  std::ostringstream out;
  out << suite << " " << config.manifold << " " << config.bundle << " p=" << config.p << " quad=" << quad_order
      << "\n";
  for (const CheckRecord& c : checks) {
    out << (c.pass ? "  PASS  " : "  FAIL  ") << std::left << std::setw(52) << c.name << std::right
        << std::scientific << std::setprecision(3) << std::setw(12) << c.measured << "  tol " << c.tolerance;
    if (c.runtime_ms > 0) out << std::defaultfloat << "  " << c.runtime_ms << " ms";
    out << "\n";
  }
  return out.str();
}

namespace {

class Recorder {
 public:
  explicit Recorder(Report& r) : r_(r) {}

  /// measured <= tol passes.
  void at_most(const std::string& name, double tol, const std::function<double()>& f) { run(name, tol, f, false); }
  /// measured > tol passes.
  void above(const std::string& name, double tol, const std::function<double()>& f) { run(name, tol, f, true); }

 private:
  void run(const std::string& name, double tol, const std::function<double()>& f, bool lower) {
    auto t0 = std::chrono::steady_clock::now();
    double m = f();
    auto t1 = std::chrono::steady_clock::now();
    CheckRecord c;
    c.name = name;
    c.measured = m;
    c.tolerance = tol;
    c.pass = std::isfinite(m) && (lower ? m > tol : m <= tol);
    if (r_.config.timings) c.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    r_.checks.push_back(c);
  }
  Report& r_;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

long parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " '" + s + "'");
  }
}

// Splits "a,b" at the top-level comma.
std::pair<std::string, std::string> split_args(const std::string& s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == ',' && depth == 0) return {trim(s.substr(0, i)), trim(s.substr(i + 1))};
  }
  throw ConfigError("expected two arguments in '" + s + "'");
}

// "name(args)" -> args, if s has that shape.
std::optional<std::string> call_args(const std::string& s, const std::string& name) {
  if (s.size() < name.size() + 2 || s.compare(0, name.size() + 1, name + "(") != 0 || s.back() != ')')
    return std::nullopt;
  return trim(s.substr(name.size() + 1, s.size() - name.size() - 2));
}

int resolve_order(const RunConfig& cfg, const Atlas& A) {
  if (cfg.quad_order < 0) throw ConfigError("quadrature order must be positive");
  return cfg.quad_order > 0 ? cfg.quad_order : default_quad_order(A);
}

Report start(const std::string& suite, const RunConfig& cfg) {
  Report r;
  r.suite = suite;
  r.config = cfg;
  return r;
}

nlohmann::ordered_json complex_json(cplx z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

nlohmann::ordered_json period_json(const PeriodReport& p) {
  nlohmann::ordered_json j;
  j["cycle"] = p.cycle;
  j["form"] = p.form;
  j["p"] = p.p;
  j["raw"] = complex_json(p.raw);
  j["normalized"] = complex_json(p.normalized);
  if (p.nearest_rational)
    j["rational"] = std::to_string(p.nearest_rational->num) + "/" + std::to_string(p.nearest_rational->den);
  else
    j["rational"] = nullptr;
  j["residual"] = p.residual;
  return j;
}

}  // namespace

// ---------------------------------------------------------------- inputs

PartitionOfUnity make_manifold(const std::string& name) {
  if (name == "cp1") return build_cpn(1);
  if (name == "cp2") return build_cpn(2);
  if (name == "s2good") return build_good_cover_s2();
  throw ConfigError("unknown manifold '" + name + "' (expected cp1, cp2 or s2good)");
}

Bundle parse_bundle_spec(const std::string& spec_in, const PartitionOfUnity& pou) {
  const std::string spec = trim(spec_in);
  const auto& A = pou.atlas;
  if (spec.rfind("O:", 0) == 0) return line_bundle_o(A, static_cast<int>(parse_int(spec.substr(2), "degree")));
  if (spec == "T") return tangent_bundle(A);
  if (spec.rfind("trivial:", 0) == 0) {
    long r = parse_int(spec.substr(8), "rank");
    if (r < 1 || r > 4) throw ConfigError("trivial bundle rank must be 1..4");
    return trivial_bundle(A, static_cast<int>(r));
  }
  if (auto a = call_args(spec, "polar")) return polar_unitary_transitions(parse_bundle_spec(*a, pou), pou);
  if (auto a = call_args(spec, "sum")) {
    auto [x, y] = split_args(*a);
    Bundle e = parse_bundle_spec(x, pou), f = parse_bundle_spec(y, pou);
    if (e->rank() + f->rank() > 4) throw ConfigError("direct sums are limited to rank 4");
    return direct_sum(e, f);
  }
  if (auto a = call_args(spec, "gauge")) {
    auto [x, y] = split_args(*a);
    Bundle e = parse_bundle_spec(x, pou);
    long s = parse_int(y, "gauge seed");
    return gauge_transform(e, random_gauge(e, static_cast<std::uint64_t>(s)));
  }
  if (auto a = call_args(spec, "nonhol")) {
    auto [x, y] = split_args(*a);
    if (A->kind() != ChartKind::Complex) throw ConfigError("nonhol bundles live on CP^n");
    return nonholomorphic_line_bundle(A, static_cast<int>(parse_int(x, "degree")), parse_double(y, "epsilon"));
  }
  throw ConfigError("unknown bundle spec '" + spec + "'");
}

// ---------------------------------------------------------------- sampling helpers

double sampled_diff(const FormField& a, const FormField& b, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double err = 0;
  for (int i = 0; i < n; ++i) {
    ChartPoint p = a.atlas()->random_point(rng);
    EvalContext ctx(*a.atlas(), p);
    err = std::max(err, max_abs_diff(a.eval(ctx), b.eval(ctx)));
  }
  return err;
}

double sampled_cochain_diff(const Cochain& a, const Cochain& b, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double err = 0;
  for (const Tuple& t : a.ordered_tuples()) {
    FormField fa = a(t), fb = b(t);
    for (int i = 0; i < n; ++i) {
      ChartPoint p = a.atlas()->random_point_in(rng, t);
      EvalContext ctx(*a.atlas(), p);
      err = std::max(err, max_abs_diff(fa.eval(ctx), fb.eval(ctx)));
    }
  }
  return err;
}

double transition_cocycle_defect(const Bundle& e, int samples, std::uint64_t seed) {
  auto A = e->atlas();
  std::mt19937_64 rng(seed);
  const int n = A->num_charts();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(e->rank(), e->rank());
  auto g = [&](int a, int b, EvalContext& ctx) -> Eigen::MatrixXcd { return e->transition(a, b).eval(ctx).value(0); };
  double err = 0;
  // Distinct increasing triples and inverse pairs cover every ordered triple.
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (!A->overlap_nonempty(std::vector<int>{a, b})) continue;
      for (int i = 0; i < samples; ++i) {
        ChartPoint p = A->random_point_in(rng, std::vector<int>{a, b});
        EvalContext ctx(*A, p);
        Eigen::MatrixXcd gab = g(a, b, ctx), gba = g(b, a, ctx);
        err = std::max(err, (gab * gba - id).norm() / std::max(1.0, gab.norm() * gba.norm()));
      }
      for (int c = b + 1; c < n; ++c) {
        std::vector<int> t{a, b, c};
        if (!A->overlap_nonempty(t)) continue;
        for (int i = 0; i < samples; ++i) {
          ChartPoint p = A->random_point_in(rng, t);
          EvalContext ctx(*A, p);
          Eigen::MatrixXcd gac = g(a, c, ctx);
          err = std::max(err, (g(a, b, ctx) * g(b, c, ctx) - gac).norm() / std::max(1.0, gac.norm()));
        }
      }
    }
  return err;
}

FormField drho_part_density(const Bundle& e, const PartitionOfUnity& pou, int p) {
  const auto& A = pou.atlas;
  const int n = A->num_charts();
  std::vector<std::pair<std::vector<int>, FormField>> terms;
  for (int a = 0; a < n; ++a) {
    std::vector<std::pair<std::vector<int>, FormField>> parts;
    for (int b = 0; b < n; ++b)
      if (b != a && A->overlap_nonempty(std::vector<int>{a, b}))
        parts.push_back({{b}, -wedge(ext_d(pou.rho[b]), dlog(e->transition(a, b)))});
    FormField Aa = guarded_sum(A, 2, e->rank(), parts, {a});
    terms.push_back({{a}, wedge(pou.rho[a], trace_form(wedge_power(Aa, p)))});
  }
  return guarded_sum(A, 2 * p, 1, terms);
}

FormField area_curvature_form(const PartitionOfUnity& s2, int k) {
  const auto& A = s2.atlas;
  if (!dynamic_cast<const SphereGoodCover*>(A.get())) throw ConfigError("the area form lives on the S^2 cover");
  // Area element of the unit sphere in stereographic coordinates is
  // 4 / (1 + |u|^2)^2 du1 du2; normalized by 4 pi and scaled by -2 pi i k.
  const cplx c(0.0, -2.0 * k);
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

FormField exact_bump_form(const PartitionOfUnity& s2) {
  const auto A = s2.atlas;
  if (!dynamic_cast<const SphereGoodCover*>(A.get())) throw ConfigError("the bump form lives on the S^2 cover");
  auto in0 = [A](int c, std::span<const Jet> u) { return A->change(0, c, u); };
  FormField phi = scalar_field(A, {0}, [in0](int c, std::span<const Jet> u) {
    std::vector<Jet> v = in0(c, u);
    Jet s = Jet(1.0) - (v[0] * v[0] + v[1] * v[1]) / Jet(0.64);
    return s.value().real() <= 0 ? 0.0 * s : pow(s, 12);
  });
  FormField sn = scalar_field(A, {0}, [in0](int c, std::span<const Jet> u) { return sin(in0(c, u)[0]); });
  FormField u1 = coordinate(A, 0, 0), u2 = coordinate(A, 0, 1);
  FormField gamma = wedge(wedge(u1, u2), ext_d(u1)) + wedge(sn, ext_d(u2));
  return ext_d(guarded_sum(A, 1, 1, {{{0}, wedge(phi, gamma)}}));
}

// ---------------------------------------------------------------- suites

Report run_verify(const RunConfig& cfg) {
  PartitionOfUnity pou = make_manifold(cfg.manifold);
  const auto& A = pou.atlas;
  Bundle E = parse_bundle_spec(cfg.bundle, pou);
  const int pmax_dim = A->real_dim() / 2;
  if (cfg.p < 1 || cfg.p > pmax_dim) throw ConfigError("p must be between 1 and half the real dimension");
  Report r = start("verify", cfg);
  r.quad_order = resolve_order(cfg, *A);
  Recorder rec(r);
  const std::uint64_t s = cfg.seed;
  const bool complex = A->kind() == ChartKind::Complex;

  rec.at_most("transition cocycle identity", 1e-12, [&] { return transition_cocycle_defect(E, 5, s); });
  // Randomized cochains over a small range of Cech and form degrees.
  auto sweep = [&](int q_min, const std::function<double(int, int, std::uint64_t)>& f) {
    double err = 0;
    for (int q = q_min; q <= 2; ++q)
      for (int fp = 0; fp <= 1; ++fp) err = std::max(err, f(q, fp, s + 10 * q + fp));
    return err;
  };
  rec.at_most("delta squared vanishes", 1e-10, [&] {
    return sweep(0, [&](int q, int fp, std::uint64_t sd) {
      Cochain dd = cech_delta(cech_delta(random_cochain(A, q, fp, 1, sd, true)));
      return sampled_cochain_diff(dd, 0.0 * dd, 2, sd);
    });
  });
  rec.at_most("d squared vanishes", 1e-10, [&] {
    return sweep(0, [&](int q, int fp, std::uint64_t sd) {
      Cochain dd = cochain_d(cochain_d(random_cochain(A, q, fp, 1, sd, true)));
      return sampled_cochain_diff(dd, 0.0 * dd, 2, sd);
    });
  });
  rec.at_most("homotopy operator inverts delta", 1e-10, [&] {
    return sweep(1, [&](int q, int fp, std::uint64_t sd) {
      Cochain eta = random_cochain(A, q, fp, 1, sd, true);
      return sampled_cochain_diff(homotopy_h(cech_delta(eta), pou) + cech_delta(homotopy_h(eta, pou)), eta, 2, sd);
    });
  });
  rec.at_most("exterior derivative of the Weil transfer", 1e-10, [&] {
    return sweep(0, [&](int q, int fp, std::uint64_t sd) {
      Cochain xi = random_cochain(A, q, fp, 1, sd, true);
      FormField lhs = ext_d(dr_map(xi, pou));
      FormField rhs = (fp % 2 ? -1.0 : 1.0) * dr_map(cech_delta(xi), pou) + dr_map(cochain_d(xi), pou);
      return sampled_diff(lhs, rhs, 10, sd);
    });
  });
  rec.at_most("delta is a graded derivation of the cup product", 1e-10, [&] {
    return sweep(0, [&](int q, int fp, std::uint64_t sd) {
      Cochain xi = random_cochain(A, q, fp, 1, sd);
      Cochain eta = random_cochain(A, 0, 1, 1, sd + 1000);
      Cochain lhs = cech_delta(cup(xi, eta));
      Cochain rhs = cup(cech_delta(xi), eta) + ((q + fp) % 2 ? -1.0 : 1.0) * cup(xi, cech_delta(eta));
      return sampled_cochain_diff(lhs, rhs, 2, sd);
    });
  });
  rec.at_most("Weil transfer takes cup to wedge", 1e-10, [&] {
    Cochain x1 = smooth_atiyah(E, 1).scalar;
    return sampled_diff(dr_map(materialize(cup(x1, x1)), pou), wedge(dr_map(x1, pou), dr_map(x1, pou)), 20, s);
  });

  for (int p = 1; p <= cfg.p; ++p) {
    const std::string tag = " (p=" + std::to_string(p) + ")";
    AtiyahCocycle at = smooth_atiyah(E, p);
    FormField dr = dr_map(at.scalar, pou);
    rec.at_most("Atiyah cocycle is delta-closed" + tag, 1e-12,
                [&] { return sampled_cochain_diff(cech_delta(at.scalar), 0.0 * cech_delta(at.scalar), 5, s); });
    rec.at_most("Atiyah cocycle is d-closed" + tag, 1e-11,
                [&] { return sampled_cochain_diff(cochain_d(at.scalar), 0.0 * cochain_d(at.scalar), 5, s); });
    rec.at_most("Atiyah cocycle is the trace of the matrix cocycle" + tag, 1e-12,
                [&] { return sampled_cochain_diff(at.scalar, cochain_trace(at.matrix), 3, s); });
    rec.at_most("smooth Chern identity pointwise" + tag, 1e-11, [&] {
      return sampled_diff(dr, modified_chern_density(levi_civita(E, pou), pou, p), 30, s);
    });
    rec.at_most("Weil transfer equals the drho part of the density" + tag, 1e-11,
                [&] { return sampled_diff(dr, drho_part_density(E, pou, p), 30, s); });
    rec.at_most("Weil transfer is closed" + tag, 1e-10,
                [&] { return sampled_diff(ext_d(dr), zero_field(A, 2 * p + 1, 1), 20, s); });
    rec.at_most("Chern form is closed" + tag, 1e-10, [&] {
      FormField ch = chern_form(E, pou, p);
      return sampled_diff(ext_d(ch), zero_field(A, 2 * p + 1, 1), 20, s);
    });
    rec.at_most("Chern form agrees with the idempotent form" + tag, 1e-10,
                [&] { return sampled_diff(chern_form(E, pou, p), chern_form_idempotent(E, pou, p), 20, s); });
    if (!complex) continue;
    AtiyahCocycle p0 = atiyah_p0(E, p);
    if (E->holomorphic()) {
      rec.at_most("(p,0) part equals the Atiyah cocycle" + tag, 0.0,
                  [&] { return sampled_cochain_diff(p0.scalar, at.scalar, 3, s); });
      rec.at_most("dbar defect of the (p,0) cocycle" + tag, 1e-12, [&] { return dbar_defect(p0.scalar, 10, s); });
      rec.at_most("Dolbeault transfer equals tr((I del I delbar I)^p)" + tag, 1e-10, [&] {
        Idempotent I = fedosov_idempotent(E, pou);
        FormField th = wedge(I.matrix, wedge(del(I.matrix), delbar(I.matrix)));
        return sampled_diff(trace_form(wedge_power(th, p)), dolbeault_map(p0.scalar, pou), 30, s);
      });
    } else if (p == 1) {
      rec.above("dbar defect detects non-holomorphic transitions" + tag, 1e-3,
                [&] { return dbar_defect(p0.scalar, 10, s); });
    }
  }
  r.extra["holomorphic"] = E->holomorphic();
  r.extra["rank"] = E->rank();
  return r;
}

Report run_periods(const RunConfig& cfg) {
  PartitionOfUnity pou = make_manifold(cfg.manifold);
  const auto& A = pou.atlas;
  Bundle E = parse_bundle_spec(cfg.bundle, pou);
  const int p = cfg.p;
  if (p < 1 || 2 * p > A->real_dim()) throw ConfigError("p must be between 1 and half the real dimension");
  Report r = start("periods", cfg);
  r.quad_order = resolve_order(cfg, *A);
  Recorder rec(r);
  const bool complex = A->kind() == ChartKind::Complex;
  const double tol = cfg.manifold == "cp1" ? 1e-6 : cfg.manifold == "cp2" ? 2e-2 : 1e-4;

  std::vector<std::pair<std::string, FormField>> forms = {
      {"ch", chern_form(E, pou, p)},
      {"tilde-ch", modified_chern_form(E, pou, p)},
      {"DR(xi)", dr_map(smooth_atiyah(E, p).scalar, pou)},
  };
  std::vector<bool> normalized = {true, true, false};
  if (complex) {
    forms.push_back({"D(xi^(p,0))", dolbeault_map(atiyah_p0(E, p).scalar, pou)});
    normalized.push_back(false);
  }

  std::string cycle;
  std::function<cplx(const FormField&)> integrate;
  if (2 * p == A->real_dim()) {
    cycle = "fundamental";
    integrate = [&](const FormField& w) { return integrate_top(w, pou, r.quad_order); };
  } else {
    cycle = "line";
    const int q = cfg.quad_order > 0 ? cfg.quad_order : 64;
    integrate = [&, q](const FormField& w) { return integrate_cycle(w, A, projective_line(), q); };
  }

  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  std::vector<cplx> values;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    PeriodReport pr = make_period_report(cycle, forms[i].first, p, integrate(forms[i].second), tol, normalized[i]);
    values.push_back(pr.normalized);
    table.push_back(period_json(pr));
  }
  r.extra["periods"] = table;

  rec.at_most("ch period is rational", tol, [&] {
    PeriodReport pr = make_period_report(cycle, "ch", p, values[0], tol, true);
    return pr.residual;
  });
  rec.at_most("tilde-ch period agrees with ch", tol, [&] { return std::abs(values[1] - values[0]); });
  rec.at_most("DR(xi) period agrees with ch", tol, [&] { return std::abs(values[2] - values[0]); });
  nlohmann::ordered_json flags = nlohmann::ordered_json::array();
  if (complex) {
    double d = std::abs(values[3] - values[2]);
    if (E->holomorphic())
      rec.at_most("D(xi^(p,0)) period agrees with ch", tol, [&] { return std::abs(values[3] - values[0]); });
    else if (d > tol)
      flags.push_back("non-holomorphic (p,0)-split");
  }
  r.extra["flags"] = flags;
  return r;
}

Report run_reconstruct(const RunConfig& cfg) {
  PartitionOfUnity pou = make_manifold(cfg.manifold);
  const auto& A = pou.atlas;
  if (cfg.manifold != "s2good") throw ConfigError("reconstruction runs on s2good");
  Report r = start("reconstruct", cfg);
  r.quad_order = cfg.quad_order > 0 ? cfg.quad_order : 128;
  Recorder rec(r);
  const std::uint64_t s = cfg.seed;

  FormField Theta;
  if (cfg.bundle.rfind("area:", 0) == 0) {
    Theta = area_curvature_form(pou, static_cast<int>(parse_int(cfg.bundle.substr(5), "degree")));
  } else if (cfg.bundle == "exact") {
    Theta = exact_bump_form(pou);
  } else {
    Bundle E = parse_bundle_spec(cfg.bundle, pou);
    if (E->rank() != 1) throw ConfigError("reconstruction takes the curvature of a line bundle");
    Theta = cplx(0.0, -2.0 * std::numbers::pi) * chern_form(E, pou, 1);
  }

  Reconstruction out;
  try {
    out = reconstruct_line_bundle(Theta, pou, r.quad_order);
  } catch (const QuantizationError& e) {
    rec.at_most("periods are quantized", kQuantizationTolerance, [&] { return e.defect; });
    r.extra["error"] = e.what();
    return r;
  }
  rec.at_most("periods are quantized", kQuantizationTolerance, [&] { return out.quantization_defect; });
  rec.at_most("Cech class matches the period", kQuantizationTolerance, [&] { return out.cech_class_defect; });
  rec.at_most("d theta_a equals Theta on every chart", 1e-6, [&] {
    double err = 0;
    for (int a = 0; a < A->num_charts(); ++a) {
      std::mt19937_64 rng(s + a);
      FormField dth = ext_d(out.connection.theta[a]);
      for (int i = 0; i < 10; ++i) {
        ChartPoint p = A->random_point_in(rng, std::vector<int>{a});
        EvalContext ctx(*A, p);
        err = std::max(err, max_abs_diff(dth.eval(ctx), Theta.eval(ctx)));
      }
    }
    return err;
  });
  rec.at_most("transition cocycle identity", 1e-6, [&] { return transition_cocycle_defect(out.bundle, 1, s); });
  cplx period = 0;
  rec.at_most("recomputed period equals the degree", 1e-4, [&] {
    period = integrate_top(dr_map(smooth_atiyah(out.bundle, 1).scalar, pou), pou, r.quad_order) *
             chern_normalization(1);
    return std::abs(period - static_cast<double>(out.degree));
  });
  if (out.degree == 0 && !out.trivialization.empty()) {
    rec.at_most("transitions are f_a / f_b", 1e-6, [&] {
      std::mt19937_64 rng(s);
      double err = 0;
      for (int a = 0; a < A->num_charts(); ++a)
        for (int b = 0; b < A->num_charts(); ++b) {
          if (a == b || !A->overlap_nonempty(std::vector<int>{a, b})) continue;
          for (int i = 0; i < 2; ++i) {
            ChartPoint p = A->random_point_in(rng, std::vector<int>{a, b});
            EvalContext ctx(*A, p);
            cplx g = out.bundle->transition(a, b).eval(ctx).value(0)(0, 0);
            cplx fa = out.trivialization[a].eval(ctx).value(0)(0, 0);
            cplx fb = out.trivialization[b].eval(ctx).value(0)(0, 0);
            err = std::max(err, std::abs(g - fa / fb));
          }
        }
      return err;
    });
  }
  r.extra["degree"] = out.degree;
  r.extra["period"] = complex_json(out.period);
  r.extra["recomputed_normalized_period"] = complex_json(period);
  return r;
}

Report run_koszul(const RunConfig& cfg) {
  PartitionOfUnity pou = make_manifold(cfg.manifold);
  const auto* space = dynamic_cast<const ProjectiveSpace*>(pou.atlas.get());
  if (!space) throw ConfigError("the Koszul layer runs on cp1 or cp2");
  if (cfg.bundle.rfind("O:", 0) != 0) throw ConfigError("the Koszul layer takes a line bundle O:k");
  const int k = static_cast<int>(parse_int(cfg.bundle.substr(2), "degree"));
  const int n = space->dim() + 1;
  if (cfg.p < 1 || cfg.p > space->dim()) throw ConfigError("p must be between 1 and the complex dimension");
  Report r = start("koszul", cfg);
  Recorder rec(r);

  KoszulCocycle eta = algebraic_atiyah(n, k, cfg.p);
  auto terms = [](const KoszulCheck& c) { return static_cast<double>(c.witness.terms().size()); };
  rec.at_most("numerators are degree-balanced", 0.0, [&] { return eta.degree_balanced() ? 0.0 : 1.0; });
  rec.at_most("Koszul coboundary identity (witness terms)", 0.0, [&] { return terms(koszul_delta_check(eta)); });
  rec.at_most("identity after level raising (witness terms)", 0.0,
              [&] { return terms(koszul_delta_check(level_raise(eta, eta.level + 2))); });
  rec.at_most("text round trip mismatches", 0.0, [&] {
    int bad = 0;
    for (const auto& [t, num] : eta.numerators) bad += !(HomogPoly::parse(num.to_string(), n) == num);
    return static_cast<double>(bad);
  });
  rec.at_most("agreement with the numeric (p,0) cocycle", 1e-12, [&] {
    Cochain xi = atiyah_p0(line_bundle_o(pou.atlas, k), cfg.p).scalar;
    std::mt19937_64 rng(cfg.seed);
    double err = 0;
    for (const auto& [t, num] : eta.numerators)
      for (int i = 0; i < 10; ++i) {
        ChartPoint pt = pou.atlas->random_point_in(rng, t);
        err = std::max(err, max_abs_diff(evaluate_fraction(eta, t, *space, pt), xi(t).eval(pt, 0)));
      }
    return err;
  });
  nlohmann::ordered_json nums = nlohmann::ordered_json::object();
  for (const auto& [t, num] : eta.numerators) {
    std::string key;
    for (int a : t) key += std::to_string(a);
    nums[key] = num.to_string();
  }
  r.extra["level"] = eta.level;
  r.extra["numerators"] = nums;
  return r;
}

}  // namespace chern
