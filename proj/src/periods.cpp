#include "chern/periods.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <stdexcept>

#include <Eigen/LU>

namespace chern {

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("Gauss rule needs at least one node");
  GaussRule g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1 - x * x) * dp * dp);
    double h = 0.5 * (b - a), m = 0.5 * (b + a);
    g.x[i] = m - h * x;
    g.x[n - 1 - i] = m + h * x;
    g.w[i] = g.w[n - 1 - i] = h * w;
  }
  return g;
}

cplx pairwise_sum(std::span<const cplx> v) {
  if (v.size() <= 8) {
    cplx s = 0;
    for (const cplx& x : v) s += x;
    return s;
  }
  std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

namespace {

cplx complex_top_factor(int n) {
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    M(j, 2 * j) = 1;
    M(j, 2 * j + 1) = cplx(0, 1);
    M(n + j, 2 * j) = 1;
    M(n + j, 2 * j + 1) = cplx(0, -1);
  }
  return M.determinant();
}

// Nodes of the compactified plane: z = tan(t) e^{i phi}, with the area
// element of dx dy folded into the weight.
struct PlaneRule {
  std::vector<cplx> z;
  std::vector<double> w;
};

PlaneRule compact_plane(int q) {
  GaussRule t = gauss_legendre(q, 0.0, 0.5 * std::numbers::pi);
  GaussRule f = gauss_legendre(q, 0.0, 2.0 * std::numbers::pi);
  PlaneRule r;
  for (int i = 0; i < q; ++i) {
    double rad = std::tan(t.x[i]);
    double sec = 1.0 / std::cos(t.x[i]);
    for (int j = 0; j < q; ++j) {
      r.z.push_back(std::polar(rad, f.x[j]));
      r.w.push_back(t.w[i] * f.w[j] * rad * sec * sec);
    }
  }
  return r;
}

// Polar rule on the disc |u| < R: Gauss in the radius, and the periodic
// trapezoid rule in the angle, which converges much faster than Gauss for the
// bump-function integrands of the S^2 cover.
PlaneRule disc(int q, double R) {
  GaussRule t = gauss_legendre(q, 0.0, R);
  PlaneRule r;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      r.z.push_back(std::polar(t.x[i], 2.0 * std::numbers::pi * j / q));
      r.w.push_back(t.w[i] * (2.0 * std::numbers::pi / q) * t.x[i]);
    }
  return r;
}

unsigned top_mask(int nvar) { return (1u << nvar) - 1u; }

}  // namespace

cplx top_form_factor(const Atlas& atlas) {
  if (atlas.kind() == ChartKind::Complex) return complex_top_factor(atlas.ncplx());
  return 1.0;
}

int default_quad_order(const Atlas& atlas) {
  if (atlas.real_dim() >= 4) return 12;
  return atlas.kind() == ChartKind::Complex ? 64 : 128;
}

cplx integrate_top(const FormField& omega, const PartitionOfUnity& pou, int quad_order) {
  const Atlas& A = *pou.atlas;
  if (omega.degree() != A.real_dim()) throw std::invalid_argument("integrate_top needs a top-degree form");
  if (omega.rank() != 1) throw std::invalid_argument("integrate_top needs a scalar form");
  const cplx factor = top_form_factor(A);
  const unsigned top = top_mask(A.nvar());
  std::vector<cplx> values;
  for (int a = 0; a < A.num_charts(); ++a) {
    if (A.kind() == ChartKind::Complex) {
      const int n = A.ncplx();
      PlaneRule plane = compact_plane(quad_order);
      const std::size_t m = plane.z.size();
      std::vector<std::size_t> idx(n, 0);
      while (true) {
        ChartPoint p{a, Eigen::VectorXcd(n)};
        double w = 1;
        for (int j = 0; j < n; ++j) {
          p.coords[j] = plane.z[idx[j]];
          w *= plane.w[idx[j]];
        }
        EvalContext ctx(A, p);
        cplx r = pou.rho[a].eval(ctx).value(0)(0, 0);
        values.push_back(r == 0.0 ? cplx(0.0) : w * r * omega.eval(ctx).at(top)(0, 0).value());
        int j = n - 1;
        while (j >= 0 && ++idx[j] == m) idx[j--] = 0;
        if (j < 0) break;
      }
    } else {
      if (A.nvar() != 2) throw std::invalid_argument("real charts are integrated in dimension 2 only");
      PlaneRule d = disc(quad_order, A.support_radius(a));
      for (std::size_t i = 0; i < d.z.size(); ++i) {
        ChartPoint p{a, Eigen::Vector2cd(d.z[i].real(), d.z[i].imag())};
        EvalContext ctx(A, p);
        cplx r = pou.rho[a].eval(ctx).value(0)(0, 0);
        values.push_back(r == 0.0 ? cplx(0.0) : d.w[i] * r * omega.eval(ctx).at(top)(0, 0).value());
      }
    }
  }
  return factor * pairwise_sum(values);
}

Cycle projective_line() {
  Cycle c;
  c.id = "line";
  c.chart = 0;
  c.param_dim = 1;
  c.map = [](std::span<const Jet> w) {
    return std::vector<Jet>{w[0], Jet(0.5) * (Jet(1.0) + w[0]), w[1], Jet(0.5) * (Jet(1.0) + w[1])};
  };
  return c;
}

cplx integrate_cycle(const FormField& omega, const std::shared_ptr<const Atlas>& atlas, const Cycle& c, int quad_order) {
  if (omega.degree() != 2 * c.param_dim) throw std::invalid_argument("form degree does not match the cycle dimension");
  if (c.param_dim != 1) throw std::invalid_argument("cycles of complex dimension 1 only");
  PlaneRule plane = compact_plane(quad_order);
  const int n = atlas->coord_count();
  std::vector<cplx> values;
  values.reserve(plane.z.size());
  for (std::size_t i = 0; i < plane.z.size(); ++i) {
    std::vector<Jet> w = seed_complex(Eigen::VectorXcd::Constant(1, plane.z[i]), 1);
    std::vector<Jet> y = c.map(w);
    ChartPoint p{c.chart, Eigen::VectorXcd(n)};
    for (int j = 0; j < n; ++j) p.coords[j] = y[j].value();
    FormJet f = omega.eval(p, 0);
    FormJet pulled = pullback(f, y);
    values.push_back(plane.w[i] * pulled.at(3u)(0, 0).value());
  }
  return static_cast<double>(c.orientation) * complex_top_factor(1) * pairwise_sum(values);
}

std::optional<Rational> rationalize(cplx x, double tol, int max_den) {
  if (std::abs(x.imag()) > tol) return std::nullopt;
  for (int q = 1; q <= max_den; ++q) {
    long p = std::lround(x.real() * q);
    if (std::abs(x.real() - static_cast<double>(p) / q) <= tol) {
      long g = std::gcd(p, static_cast<long>(q));
      if (g == 0) g = 1;
      return Rational{p / g, q / g};
    }
  }
  return std::nullopt;
}

PeriodReport make_period_report(std::string cycle, std::string form, int p, cplx raw, double tol, bool already_normalized) {
  PeriodReport r;
  r.cycle = std::move(cycle);
  r.form = std::move(form);
  r.p = p;
  r.raw = raw;
  r.normalized = already_normalized ? raw : raw * chern_normalization(p);
  r.nearest_rational = rationalize(r.normalized, tol);
  double best = std::numeric_limits<double>::infinity();
  for (int q = 1; q <= 64; ++q) {
    double cand = std::round(r.normalized.real() * q) / q;
    best = std::min(best, std::abs(r.normalized - cplx(cand)));
  }
  r.residual = r.nearest_rational ? std::abs(r.normalized - cplx(r.nearest_rational->value())) : best;
  return r;
}

}  // namespace chern
