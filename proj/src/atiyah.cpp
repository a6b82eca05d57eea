#include "chern/atiyah.hpp"

#include <stdexcept>

namespace chern {

namespace {

Cochain log_cocycle(const Bundle& e, bool holomorphic_part) {
  auto atlas = e->atlas();
  if (holomorphic_part && atlas->kind() != ChartKind::Complex)
    throw std::invalid_argument("the (p,0) Atiyah cocycle needs a complex atlas");
  return Cochain::formula(
      atlas, 1, 1, e->rank(),
      [e, holomorphic_part](const Tuple& t) {
        FormField g = e->transition(t[0], t[1]);
        FormField x = holomorphic_part ? del_log(g) : dlog(g);
        return restrict_domain(holomorphic_part ? with_bidegree(x, {1, 0}) : x, t);
      },
      e);
}

AtiyahCocycle power(const Bundle& e, int p, bool holomorphic_part) {
  if (p < 1) throw std::invalid_argument("Atiyah cocycles need p >= 1");
  Cochain one = log_cocycle(e, holomorphic_part);
  Cochain m = one;
  for (int i = 1; i < p; ++i) m = cup(m, one);
  Cochain tr = cochain_trace(m);
  if (holomorphic_part) {
    tr = Cochain::formula(tr.atlas(), tr.q(), tr.p(), 1,
                          [tr, p](const Tuple& t) { return with_bidegree(tr(t), {p, 0}); });
  }
  return {e, p, m, materialize(tr)};
}

}  // namespace

Cochain atiyah_one(const Bundle& e) { return log_cocycle(e, false); }
Cochain atiyah_one_p0(const Bundle& e) { return log_cocycle(e, true); }

AtiyahCocycle smooth_atiyah(const Bundle& e, int p) { return power(e, p, false); }
AtiyahCocycle atiyah_p0(const Bundle& e, int p) { return power(e, p, true); }

double dbar_defect(const Cochain& eta, const std::vector<ChartPoint>& points) {
  const Atlas& A = *eta.atlas();
  if (A.kind() != ChartKind::Complex) throw std::invalid_argument("dbar defect needs a complex atlas");
  double worst = 0;
  for (const Tuple& t : eta.increasing_tuples()) {
    FormField c = eta(t);
    if (!c.bidegree() || *c.bidegree() != Bidegree{eta.p(), 0})
      throw std::invalid_argument("dbar defect needs (p,0)-tagged components");
    FormField d = delbar(c);
    for (const ChartPoint& x : points) {
      EvalContext ctx(A, x);
      bool inside = true;
      for (int a : t) inside = inside && ctx.contains(a);
      if (inside) worst = std::max(worst, d.eval(ctx).max_abs());
    }
  }
  return worst;
}

double dbar_defect(const Cochain& eta, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ChartPoint> pts;
  for (const Tuple& t : eta.increasing_tuples())
    for (int i = 0; i < samples; ++i) pts.push_back(eta.atlas()->random_point_in(rng, t));
  return dbar_defect(eta, pts);
}

}  // namespace chern
