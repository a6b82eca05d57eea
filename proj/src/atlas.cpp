#include "chern/atlas.hpp"

namespace chern {

std::vector<Jet> Atlas::seed(const ChartPoint& p, int order) const {
  if (kind() == ChartKind::Complex) return seed_complex(p.coords, order);
  return seed_real(p.coords.real(), order);
}

ChartPoint Atlas::to_chart(int chart, const ChartPoint& p) const {
  if (chart == p.chart) return p;
  if (!contains(chart, p)) throw DomainError("point is not in the target chart");
  std::vector<Jet> y = change(chart, p.chart, seed(p, 0));
  ChartPoint q{chart, Eigen::VectorXcd(coord_count())};
  for (int i = 0; i < coord_count(); ++i)
    q.coords[i] = kind() == ChartKind::Complex ? y[i].value() : cplx(y[i].value().real(), 0.0);
  return q;
}

ChartPoint Atlas::random_point_in(std::mt19937_64& rng, std::span<const int> charts) const {
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    ChartPoint p = random_point(rng);
    bool inside = true;
    for (int c : charts) inside = inside && contains(c, p);
    if (inside) return charts.empty() ? p : to_chart(charts[0], p);
  }
  throw DomainError("could not sample the requested overlap");
}

JetMatrix Atlas::jacobian_jets(int to, int from, std::span<const Jet> coords) const {
  const int m = coord_count();
  ChartPoint p{from, Eigen::VectorXcd(m)};
  for (int i = 0; i < m; ++i) p.coords[i] = coords[i].value();
  const int order = coords.empty() ? 0 : coords[0].order();
  std::vector<Jet> y = change(to, from, seed(p, order + 1));
  JetMatrix J(m, m);
  for (int i = 0; i < m; ++i)
    for (int v = 0; v < m; ++v) J(i, v) = y[i].derivative(v);
  return J;
}

Eigen::MatrixXcd Atlas::jacobian(int to, const ChartPoint& p) const {
  std::vector<Jet> y = change(to, p.chart, seed(p, 1));
  Eigen::MatrixXcd J(nvar(), nvar());
  for (int i = 0; i < nvar(); ++i)
    for (int v = 0; v < nvar(); ++v) J(i, v) = y[i].derivative(v).value();
  return J;
}

}  // namespace chern
