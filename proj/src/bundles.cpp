#include "chern/bundles.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace chern {

BundleData::BundleData(std::shared_ptr<const Atlas> atlas, int rank, std::string name, Builder builder, bool holomorphic) :
    atlas_(std::move(atlas)), rank_(rank), name_(std::move(name)), builder_(std::move(builder)), holomorphic_(holomorphic) {}

FormField BundleData::transition(int a, int b) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find({a, b});
    if (it != memo_.end()) return it->second;
  }
  FormField g;
  if (a == b) {
    const int r = rank_;
    g = restrict_domain(function_field(atlas_, {}, r, [r](int, std::span<const Jet>) { return jet_identity(r); }), {a});
  } else {
    g = restrict_domain(builder_(a, b), {a, b});
  }
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.emplace(std::make_pair(a, b), g).first->second;
}

namespace {

JetMatrix scalar_matrix(const Jet& x) {
  JetMatrix m(1, 1);
  m(0, 0) = x;
  return m;
}

// Homogeneous spinor of a point of S^2; the branch is chosen at the point so
// that it stays away from zero.
std::array<Jet, 2> spinor(const std::array<Jet, 3>& x) {
  const Jet i(cplx(0, 1));
  if (x[2].value().real() <= 0.0) return {Jet(1.0) - x[2], x[0] - i * x[1]};
  return {x[0] + i * x[1], Jet(1.0) + x[2]};
}

}  // namespace

Bundle line_bundle_o(std::shared_ptr<const Atlas> atlas, int k) {
  const std::string name = "O:" + std::to_string(k);
  if (auto P = std::dynamic_pointer_cast<const ProjectiveSpace>(atlas)) {
    auto builder = [P, k](int a, int b) {
      return function_field(P, {a, b}, 1, [P, a, b, k](int chart, std::span<const Jet> x) {
        std::vector<Jet> Z = P->homogeneous(chart, x);
        return scalar_matrix(pow(Z[b] / Z[a], k));
      });
    };
    return std::make_shared<BundleData>(atlas, 1, name, builder, true);
  }
  if (auto S = std::dynamic_pointer_cast<const SphereGoodCover>(atlas)) {
    // l_a(Z) = det[Z, W(-c_a)] vanishes only at the antipode of the centre of chart a.
    std::array<std::array<cplx, 2>, 4> W;
    for (int a = 0; a < 4; ++a) {
      Eigen::Vector3d m = -S->center(a);
      auto w = spinor({Jet(m.x()), Jet(m.y()), Jet(m.z())});
      W[a] = {w[0].value(), w[1].value()};
    }
    auto builder = [S, W, k](int a, int b) {
      return function_field(S, {a, b}, 1, [S, W, a, b, k](int chart, std::span<const Jet> u) {
        auto Z = spinor(S->ambient(chart, u));
        auto l = [&](int c) { return Z[0] * Jet(W[c][1]) - Z[1] * Jet(W[c][0]); };
        return scalar_matrix(pow(l(b) / l(a), k));
      });
    };
    return std::make_shared<BundleData>(atlas, 1, name, builder, false);
  }
  throw std::invalid_argument("O(k) is defined on the built-in CP^n and S^2 atlases only");
}

Bundle tangent_bundle(std::shared_ptr<const Atlas> atlas) {
  const int r = atlas->coord_count();
  auto A = atlas;
  auto builder = [A, r](int a, int b) {
    return function_field(A, {a, b}, r, [A, a, b](int chart, std::span<const Jet> x) {
      JetMatrix Ja = A->jacobian_jets(a, chart, x);
      JetMatrix Jb = A->jacobian_jets(b, chart, x);
      return mul(Ja, inverse(Jb));
    });
  };
  return std::make_shared<BundleData>(atlas, r, "T", builder, atlas->kind() == ChartKind::Complex);
}

Bundle trivial_bundle(std::shared_ptr<const Atlas> atlas, int rank) {
  auto A = atlas;
  auto builder = [A, rank](int, int) {
    return function_field(A, {}, rank, [rank](int, std::span<const Jet>) { return jet_identity(rank); });
  };
  return std::make_shared<BundleData>(atlas, rank, "trivial:" + std::to_string(rank), builder,
                                      atlas->kind() == ChartKind::Complex);
}

Bundle direct_sum(const Bundle& e, const Bundle& f) {
  if (e->atlas() != f->atlas()) throw std::invalid_argument("direct sum of bundles on different atlases");
  const int re = e->rank(), rf = f->rank();
  auto builder = [e, f, re, rf](int a, int b) {
    FormField ge = e->transition(a, b), gf = f->transition(a, b);
    // Assemble a 2x2 block of unequal sizes by padding through apply.
    FormField ge_pad = apply(ge, re + rf, [re, rf](const JetMatrix& m) {
      JetMatrix r = jet_zero(re + rf);
      r.block(0, 0, re, re) = m;
      return r;
    });
    FormField gf_pad = apply(gf, re + rf, [re, rf](const JetMatrix& m) {
      JetMatrix r = jet_zero(re + rf);
      r.block(re, re, rf, rf) = m;
      return r;
    });
    return ge_pad + gf_pad;
  };
  return std::make_shared<BundleData>(e->atlas(), re + rf, "sum(" + e->name() + "," + f->name() + ")", builder,
                                      e->holomorphic() && f->holomorphic());
}

Bundle gauge_transform(const Bundle& e, const std::vector<FormField>& f, std::string name) {
  if (static_cast<int>(f.size()) != e->atlas()->num_charts()) throw std::invalid_argument("one gauge function per chart");
  for (const auto& fa : f)
    if (fa.degree() != 0 || fa.rank() != e->rank()) throw std::invalid_argument("gauge function has the wrong shape");
  auto builder = [e, f](int a, int b) { return wedge(wedge(f[a], e->transition(a, b)), inverse_field(f[b])); };
  if (name.empty()) name = "gauge(" + e->name() + ")";
  return std::make_shared<BundleData>(e->atlas(), e->rank(), name, builder, false);
}

std::vector<FormField> random_gauge(const Bundle& e, std::uint64_t seed) {
  auto atlas = e->atlas();
  const int r = e->rank();
  std::mt19937_64 rng(seed);
  ChartPoint probe = atlas->random_point(rng);
  const int ng = static_cast<int>(atlas->global_functions(probe.chart, atlas->seed(probe, 0)).size());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto combination = [&]() {
    std::vector<cplx> c(ng);
    double total = 0;
    for (auto& x : c) {
      x = cplx(u(rng), u(rng));
      total += std::abs(x);
    }
    for (auto& x : c) x /= total;
    return c;
  };
  std::vector<FormField> out;
  for (int a = 0; a < atlas->num_charts(); ++a) {
    std::vector<std::vector<cplx>> s(r), K(r * r);
    for (auto& v : s) v = combination();
    for (auto& v : K) v = combination();
    out.push_back(restrict_domain(
        function_field(atlas, {}, r,
                       [atlas, s, K, r](int chart, std::span<const Jet> x) {
                         std::vector<Jet> G = atlas->global_functions(chart, x);
                         auto combine = [&](const std::vector<cplx>& c) {
                           Jet t(0.0);
                           for (std::size_t l = 0; l < c.size(); ++l) t += Jet(c[l]) * G[l];
                           return t;
                         };
                         JetMatrix m(r, r);
                         const double eps = 0.5 / r;
                         for (int i = 0; i < r; ++i)
                           for (int j = 0; j < r; ++j)
                             m(i, j) = exp(combine(s[i])) * (Jet(i == j ? 1.0 : 0.0) + Jet(eps) * combine(K[i * r + j]));
                         return m;
                       }),
        {a}));
  }
  return out;
}

Bundle polar_unitary_transitions(const Bundle& e, const PartitionOfUnity& pou) {
  auto atlas = e->atlas();
  const int r = e->rank();
  const std::string name = "polar(" + e->name() + ")";
  if (r == 1) {
    auto builder = [e](int a, int b) {
      return apply(e->transition(a, b), 1, [](const JetMatrix& m) { return scalar_matrix(m(0, 0) * pow(abs2(m(0, 0)), -0.5)); });
    };
    return std::make_shared<BundleData>(atlas, 1, name, builder, false);
  }
  std::vector<FormField> root, inv_root;
  for (int a = 0; a < atlas->num_charts(); ++a) {
    std::vector<std::pair<std::vector<int>, FormField>> terms;
    for (int b = 0; b < atlas->num_charts(); ++b) {
      std::vector<int> ab{a, b};
      if (!atlas->overlap_nonempty(ab)) continue;
      FormField gg = apply(e->transition(b, a), r, [](const JetMatrix& g) { return mul(conj_transpose(g), g); });
      terms.push_back({{b}, wedge(pou.rho[b], gg)});
    }
    FormField h = guarded_sum(atlas, 0, r, std::move(terms), {a});
    root.push_back(apply(h, r, [](const JetMatrix& m) { return sqrt_hpd(m); }));
    inv_root.push_back(apply(h, r, [](const JetMatrix& m) { return inverse(sqrt_hpd(m)); }));
  }
  auto builder = [e, root, inv_root](int a, int b) { return wedge(wedge(root[a], e->transition(a, b)), inv_root[b]); };
  return std::make_shared<BundleData>(atlas, r, name, builder, false);
}

Bundle nonholomorphic_line_bundle(std::shared_ptr<const Atlas> atlas, int k, double eps) {
  auto P = std::dynamic_pointer_cast<const ProjectiveSpace>(atlas);
  if (!P) throw std::invalid_argument("the non-holomorphic family is defined on CP^n");
  std::vector<FormField> f;
  for (int a = 0; a < P->num_charts(); ++a) {
    if (a == 0) {
      f.push_back(scalar_field(P, {}, [P, eps](int chart, std::span<const Jet> x) {
        std::vector<Jet> Z = P->homogeneous(chart, x), Zb = P->homogeneous(chart, x, true);
        Jet N(0.0);
        for (std::size_t j = 0; j < Z.size(); ++j) N += Z[j] * Zb[j];
        return exp(Jet(eps) * Z[0] * Zb[1] / N);
      }));
    } else {
      f.push_back(constant_field(P, 1.0));
    }
  }
  std::ostringstream name;
  name << "nonhol(O:" << k << "," << eps << ")";
  return gauge_transform(line_bundle_o(atlas, k), f, name.str());
}

Idempotent fedosov_idempotent(const Bundle& e, const PartitionOfUnity& pou) {
  auto atlas = e->atlas();
  const int n = atlas->num_charts(), r = e->rank();
  std::vector<BlockEntry> entries;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::vector<int> ab{a, b};
      if (!atlas->overlap_nonempty(ab)) continue;
      entries.push_back({a, b, {a, b}, wedge(pou.rho[a], e->transition(a, b))});
    }
  return {block_field(atlas, n, r, std::move(entries)), n, r};
}

ConnectionForms levi_civita(const Bundle& e, const PartitionOfUnity& pou) {
  auto atlas = e->atlas();
  ConnectionForms conn{e, {}, -1};
  for (int a = 0; a < atlas->num_charts(); ++a) {
    std::vector<std::pair<std::vector<int>, FormField>> terms;
    for (int b = 0; b < atlas->num_charts(); ++b) {
      std::vector<int> ab{a, b};
      if (b == a || !atlas->overlap_nonempty(ab)) continue;
      terms.push_back({{b}, -wedge(pou.rho[b], dlog(e->transition(a, b)))});
    }
    conn.theta.push_back(guarded_sum(atlas, 1, e->rank(), std::move(terms), {a}));
  }
  return conn;
}

std::vector<FormField> curvature(const ConnectionForms& conn) {
  std::vector<FormField> out;
  for (const auto& th : conn.theta) out.push_back(ext_d(th) + wedge(th, th));
  return out;
}

FormField curvature_from_idempotent(const Bundle& e, const PartitionOfUnity& pou, const Idempotent& idem, int a) {
  auto atlas = e->atlas();
  FormField dI = ext_d(idem.matrix);
  FormField IdIdI = wedge(idem.matrix, wedge(dI, dI));
  std::vector<std::pair<std::vector<int>, FormField>> terms;
  for (int d = 0; d < idem.nblocks; ++d)
    for (int c = 0; c < idem.nblocks; ++c) {
      std::vector<int> adc{a, d, c};
      if (!atlas->overlap_nonempty(adc)) continue;
      FormField t = wedge(wedge(e->transition(a, d), extract_block(IdIdI, d, c, idem.block_size)),
                          wedge(pou.rho[c], e->transition(c, a)));
      terms.push_back({{d, c}, t});
    }
  return guarded_sum(atlas, 2, e->rank(), std::move(terms), {a});
}

FormField wedge_power(const FormField& a, int p) {
  if (p < 1) throw std::invalid_argument("wedge power needs p >= 1");
  FormField r = a;
  for (int i = 1; i < p; ++i) r = wedge(r, a);
  return r;
}

FormField chern_form(const Bundle& e, const PartitionOfUnity& pou, int p) {
  auto Theta = curvature(levi_civita(e, pou));
  std::vector<FormField> per_chart;
  for (const auto& th : Theta) per_chart.push_back(chern_normalization(p) * trace_form(wedge_power(th, p)));
  return chartwise(e->atlas(), per_chart);
}

FormField chern_form_idempotent(const Bundle& e, const PartitionOfUnity& pou, int p) {
  Idempotent idem = fedosov_idempotent(e, pou);
  FormField dI = ext_d(idem.matrix);
  return chern_normalization(p) * trace_form(wedge(idem.matrix, wedge_power(wedge(dI, dI), p)));
}

FormField modified_chern_density(const ConnectionForms& conn, const PartitionOfUnity& pou, int p) {
  auto atlas = conn.bundle->atlas();
  std::vector<std::pair<std::vector<int>, FormField>> terms;
  for (int a = 0; a < atlas->num_charts(); ++a)
    terms.push_back({{a}, wedge(pou.rho[a], trace_form(wedge_power(ext_d(conn.theta[a]), p)))});
  return guarded_sum(atlas, 2 * p, 1, std::move(terms));
}

FormField modified_chern_form(const Bundle& e, const PartitionOfUnity& pou, int p) {
  return chern_normalization(p) * modified_chern_density(levi_civita(e, pou), pou, p);
}

}  // namespace chern
