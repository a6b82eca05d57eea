#include "chern/cech.hpp"

#include <algorithm>
#include <stdexcept>

namespace chern {

FormField adjoint(const Twisting* twist, int a, int b, const FormField& x) {
  if (!twist || a == b || x.rank() == 1) return x;
  return conjugate_by(twist->transition(a, b), x);
}

Cochain Cochain::stored(std::shared_ptr<const Atlas> atlas, int q, int p, int rank, std::map<Tuple, FormField> comps) {
  Cochain c;
  c.impl_ = std::make_shared<Impl>();
  c.impl_->atlas = std::move(atlas);
  c.impl_->q = q;
  c.impl_->p = p;
  c.impl_->rank = rank;
  c.impl_->is_stored = true;
  for (const auto& [t, f] : comps) {
    if (static_cast<int>(t.size()) != q + 1 || !std::is_sorted(t.begin(), t.end()) ||
        std::adjacent_find(t.begin(), t.end()) != t.end())
      throw std::invalid_argument("stored cochains are indexed by increasing tuples of length q+1");
    if (f.degree() != p || f.rank() != rank) throw std::invalid_argument("cochain component has the wrong shape");
  }
  c.impl_->comps = std::move(comps);
  return c;
}

Cochain Cochain::formula(std::shared_ptr<const Atlas> atlas, int q, int p, int rank, Formula f,
                         std::shared_ptr<const Twisting> twist) {
  Cochain c;
  c.impl_ = std::make_shared<Impl>();
  c.impl_->atlas = std::move(atlas);
  c.impl_->q = q;
  c.impl_->p = p;
  c.impl_->rank = rank;
  c.impl_->formula = std::move(f);
  c.impl_->twist = std::move(twist);
  return c;
}

bool Cochain::overlap_nonempty(const Tuple& t) const { return impl_->atlas->overlap_nonempty(t); }

FormField Cochain::operator()(const Tuple& t) const {
  if (static_cast<int>(t.size()) != impl_->q + 1) throw std::invalid_argument("cochain index tuple has the wrong length");
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->memo.find(t);
    if (it != impl_->memo.end()) return it->second;
  }
  FormField out;
  if (!overlap_nonempty(t)) {
    out = zero_field(impl_->atlas, impl_->p, impl_->rank);
  } else if (impl_->is_stored) {
    Tuple s = t;
    int sign = 1;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j + 1 < s.size() - i; ++j)
        if (s[j] > s[j + 1]) {
          std::swap(s[j], s[j + 1]);
          sign = -sign;
        }
    auto it = impl_->comps.find(s);
    if (std::adjacent_find(s.begin(), s.end()) != s.end() || it == impl_->comps.end())
      out = zero_field(impl_->atlas, impl_->p, impl_->rank);
    else
      out = sign > 0 ? it->second : -it->second;
  } else {
    out = impl_->formula(t);
  }
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->memo.emplace(t, out).first->second;
}

std::vector<Tuple> Cochain::increasing_tuples() const {
  std::vector<Tuple> out;
  int n = impl_->atlas->num_charts(), len = impl_->q + 1;
  if (len > n) return out;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + len, true);
  do {
    Tuple t;
    for (int i = 0; i < n; ++i)
      if (pick[i]) t.push_back(i);
    if (overlap_nonempty(t)) out.push_back(t);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Tuple> Cochain::ordered_tuples() const {
  std::vector<Tuple> out;
  int n = impl_->atlas->num_charts(), len = impl_->q + 1;
  Tuple t(len, 0);
  while (true) {
    if (overlap_nonempty(t)) out.push_back(t);
    int i = len - 1;
    while (i >= 0 && ++t[i] == n) t[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

namespace {

Tuple drop(const Tuple& t, std::size_t j) {
  Tuple r;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (i != j) r.push_back(t[i]);
  return r;
}

Tuple slice(const Tuple& t, std::size_t from, std::size_t to) { return Tuple(t.begin() + from, t.begin() + to); }

Cochain map_components(const Cochain& eta, int p, int rank, std::function<FormField(const FormField&)> f) {
  if (eta.is_stored()) {
    std::map<Tuple, FormField> comps;
    for (const auto& t : eta.increasing_tuples()) comps.emplace(t, f(eta(t)));
    return Cochain::stored(eta.atlas(), eta.q(), p, rank, std::move(comps));
  }
  return Cochain::formula(
      eta.atlas(), eta.q(), p, rank, [eta, f](const Tuple& t) { return f(eta(t)); }, eta.twist());
}

}  // namespace

Cochain cech_delta(const Cochain& eta) {
  auto twist = eta.twist();
  auto atlas = eta.atlas();
  return Cochain::formula(
      atlas, eta.q() + 1, eta.p(), eta.rank(),
      [eta, twist, atlas](const Tuple& t) {
        std::vector<FormField> terms{adjoint(twist.get(), t[0], t[1], eta(drop(t, 0)))};
        for (std::size_t j = 1; j < t.size(); ++j) {
          FormField c = eta(drop(t, j));
          terms.push_back(j % 2 ? -c : c);
        }
        return restrict_domain(sum(atlas, eta.p(), eta.rank(), terms), t);
      },
      twist);
}

Cochain cup(const Cochain& xi, const Cochain& eta) {
  if (xi.atlas() != eta.atlas()) throw std::invalid_argument("cup: cochains live on different atlases");
  if (xi.rank() != eta.rank() && xi.rank() != 1 && eta.rank() != 1)
    throw std::invalid_argument("cup: matrix size mismatch");
  if (xi.twist() && eta.twist() && xi.twist() != eta.twist())
    throw std::invalid_argument("cup: cochains twisted by different bundles");
  auto twist = xi.twist() ? xi.twist() : eta.twist();
  const int q = xi.q(), q2 = eta.q();
  const cplx sign = ((xi.p() * q2) % 2) ? -1.0 : 1.0;
  return Cochain::formula(
      xi.atlas(), q + q2, xi.p() + eta.p(), std::max(xi.rank(), eta.rank()),
      [xi, eta, twist, q, sign](const Tuple& t) {
        FormField left = xi(slice(t, 0, q + 1));
        FormField right = adjoint(twist.get(), t[0], t[q], eta(slice(t, q, t.size())));
        FormField w = wedge(left, right);
        return restrict_domain(sign == 1.0 ? w : sign * w, t);
      },
      twist);
}

Cochain homotopy_h(const Cochain& eta, const PartitionOfUnity& pou) {
  if (eta.q() == 0) throw std::invalid_argument("homotopy operator needs Cech degree at least 1");
  if (pou.atlas != eta.atlas()) throw std::invalid_argument("partition and cochain live on different atlases");
  auto twist = eta.twist();
  auto rho = pou.rho;
  auto atlas = eta.atlas();
  return Cochain::formula(
      atlas, eta.q() - 1, eta.p(), eta.rank(),
      [eta, twist, rho, atlas](const Tuple& t) {
        std::vector<std::pair<std::vector<int>, FormField>> terms;
        for (int b = 0; b < atlas->num_charts(); ++b) {
          Tuple bt{b};
          bt.insert(bt.end(), t.begin(), t.end());
          if (!atlas->overlap_nonempty(bt)) continue;
          terms.push_back({{b}, wedge(rho[b], adjoint(twist.get(), t[0], b, eta(bt)))});
        }
        return guarded_sum(atlas, eta.p(), eta.rank(), std::move(terms), t);
      },
      twist);
}

Cochain cochain_d(const Cochain& eta) {
  return map_components(eta, eta.p() + 1, eta.rank(), [](const FormField& f) { return ext_d(f); });
}

Cochain cochain_trace(const Cochain& eta) {
  if (eta.is_stored()) return map_components(eta, eta.p(), 1, [](const FormField& f) { return trace_form(f); });
  return Cochain::formula(eta.atlas(), eta.q(), eta.p(), 1, [eta](const Tuple& t) { return trace_form(eta(t)); });
}

Cochain cochain_project(const Cochain& eta, int p, int q) {
  if (p + q != eta.p()) throw std::invalid_argument("bidegree does not match the form degree");
  return map_components(eta, eta.p(), eta.rank(), [p, q](const FormField& f) { return project_pq(f, p, q); });
}

Cochain operator+(const Cochain& a, const Cochain& b) {
  if (a.q() != b.q() || a.p() != b.p() || a.rank() != b.rank() || a.atlas() != b.atlas())
    throw std::invalid_argument("cochain sum: shape mismatch");
  if (a.is_stored() && b.is_stored()) {
    std::map<Tuple, FormField> comps;
    for (const auto& t : a.increasing_tuples()) comps.emplace(t, a(t) + b(t));
    return Cochain::stored(a.atlas(), a.q(), a.p(), a.rank(), std::move(comps));
  }
  auto twist = a.twist() ? a.twist() : b.twist();
  return Cochain::formula(
      a.atlas(), a.q(), a.p(), a.rank(), [a, b](const Tuple& t) { return restrict_domain(a(t) + b(t), t); }, twist);
}

Cochain operator-(const Cochain& a, const Cochain& b) { return a + (-1.0) * b; }

Cochain operator*(cplx s, const Cochain& a) {
  return map_components(a, a.p(), a.rank(), [s](const FormField& f) { return s * f; });
}

Cochain materialize(const Cochain& eta) {
  if (eta.twist()) throw std::invalid_argument("twisted cochains are not alternating and cannot be stored");
  std::map<Tuple, FormField> comps;
  for (const auto& t : eta.increasing_tuples()) comps.emplace(t, eta(t));
  return Cochain::stored(eta.atlas(), eta.q(), eta.p(), eta.rank(), std::move(comps));
}

Cochain unit_cochain(std::shared_ptr<const Atlas> atlas, int rank) {
  FormField one = function_field(atlas, {}, rank, [rank](int, std::span<const Jet>) { return jet_identity(rank); });
  return Cochain::formula(atlas, 0, 0, rank, [one](const Tuple& t) { return restrict_domain(one, t); });
}

FormField random_global_form(std::shared_ptr<const Atlas> atlas, int p, int rank, std::mt19937_64& rng) {
  if (p > atlas->nvar()) return zero_field(atlas, p, rank);
  std::normal_distribution<double> g;
  ChartPoint probe = atlas->random_point(rng);
  const int nglobal = static_cast<int>(atlas->global_functions(probe.chart, atlas->seed(probe, 0)).size());
  auto random_function = [&]() {
    // Entry = c + sum_j a_j G_j + sum_j b_j G_j G_{j+1}, with G the global functions.
    std::vector<cplx> coef(rank * rank * (2 * nglobal + 1));
    for (auto& c : coef) c = cplx(g(rng), g(rng)) * 0.5;
    return function_field(atlas, {}, rank, [atlas, coef, nglobal, rank](int chart, std::span<const Jet> x) {
      std::vector<Jet> G = atlas->global_functions(chart, x);
      JetMatrix m(rank, rank);
      int k = 0;
      for (int i = 0; i < rank; ++i)
        for (int j = 0; j < rank; ++j) {
          Jet e(coef[k++]);
          for (int l = 0; l < nglobal; ++l) e += Jet(coef[k++]) * G[l];
          for (int l = 0; l < nglobal; ++l) e += Jet(coef[k++]) * G[l] * G[(l + 1) % nglobal];
          m(i, j) = e;
        }
      return m;
    });
  };
  std::vector<FormField> terms;
  for (int term = 0; term < 2; ++term) {
    FormField f = random_function();
    for (int i = 0; i < p; ++i) f = wedge(f, ext_d(random_function()));
    terms.push_back(f);
  }
  return sum(atlas, p, rank, terms);
}

Cochain random_cochain(std::shared_ptr<const Atlas> atlas, int q, int p, int rank, std::uint64_t seed,
                       bool alternating, std::shared_ptr<const Twisting> twist) {
  Cochain c = Cochain::formula(
      atlas, q, p, rank,
      [atlas, p, rank, seed](const Tuple& t) {
        std::seed_seq ss(t.begin(), t.end());
        std::vector<std::uint64_t> mix(1);
        ss.generate(mix.begin(), mix.end());
        std::mt19937_64 rng(seed ^ (mix[0] * 0x9E3779B97F4A7C15ull));
        return restrict_domain(random_global_form(atlas, p, rank, rng), t);
      },
      twist);
  return alternating ? materialize(c) : c;
}

}  // namespace chern
