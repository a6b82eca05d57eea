#include "chern/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

namespace chern {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

// ------------------------------------------------------------------ CP^n

ProjectiveSpace::ProjectiveSpace(int n) : n_(n) {
  if (n != 1 && n != 2) throw std::invalid_argument("CP^n is built in for n = 1, 2 only");
}

std::vector<Jet> ProjectiveSpace::homogeneous(int chart, std::span<const Jet> coords, bool conjugate) const {
  std::vector<Jet> Z(n_ + 1);
  int k = 0;
  for (int j = 0; j <= n_; ++j) Z[j] = (j == chart) ? Jet(1.0) : coords[(conjugate ? n_ : 0) + k++];
  return Z;
}

Eigen::VectorXcd ProjectiveSpace::homogeneous(const ChartPoint& p) const {
  Eigen::VectorXcd Z(n_ + 1);
  int k = 0;
  for (int j = 0; j <= n_; ++j) Z[j] = (j == p.chart) ? cplx(1.0) : p.coords[k++];
  return Z;
}

std::vector<Jet> ProjectiveSpace::change(int to, int from, std::span<const Jet> coords) const {
  if (to == from) return {coords.begin(), coords.end()};
  std::vector<Jet> Z = homogeneous(from, coords, false), Zb = homogeneous(from, coords, true);
  Jet inv = inverse(Z[to]), invb = inverse(Zb[to]);
  std::vector<Jet> out;
  out.reserve(2 * n_);
  for (int j = 0; j <= n_; ++j)
    if (j != to) out.push_back(Z[j] * inv);
  for (int j = 0; j <= n_; ++j)
    if (j != to) out.push_back(Zb[j] * invb);
  return out;
}

JetMatrix ProjectiveSpace::jacobian_jets(int to, int from, std::span<const Jet> coords) const {
  if (to == from) return jet_identity(n_);
  // d(Z_j / Z_to)/dZ_m = delta_jm / Z_to - Z_j delta_{to,m} / Z_to^2, with Z_from = 1.
  std::vector<Jet> Z = homogeneous(from, coords, false);
  Jet inv = inverse(Z[to]);
  JetMatrix J(n_, n_);
  int r = 0;
  for (int j = 0; j <= n_; ++j) {
    if (j == to) continue;
    int c = 0;
    for (int m = 0; m <= n_; ++m) {
      if (m == from) continue;
      Jet e(0.0);
      if (j == m) e += inv;
      if (m == to) e -= Z[j] * inv * inv;
      J(r, c++) = e;
    }
    ++r;
  }
  return J;
}

bool ProjectiveSpace::contains(int chart, const ChartPoint& p) const {
  Eigen::VectorXcd Z = homogeneous(p);
  return std::abs(Z[chart]) / Z.norm() > kBoundaryMargin;
}

bool ProjectiveSpace::overlap_nonempty(std::span<const int>) const { return true; }

std::vector<Jet> ProjectiveSpace::global_functions(int chart, std::span<const Jet> coords) const {
  std::vector<Jet> Z = homogeneous(chart, coords, false), Zb = homogeneous(chart, coords, true);
  Jet N(0.0);
  for (int j = 0; j <= n_; ++j) N += Z[j] * Zb[j];
  Jet invN = inverse(N);
  std::vector<Jet> out;
  for (int i = 0; i <= n_; ++i)
    for (int j = 0; j <= n_; ++j) out.push_back(Z[i] * Zb[j] * invN);
  return out;
}

ChartPoint ProjectiveSpace::random_point(std::mt19937_64& rng) const {
  std::normal_distribution<double> g;
  Eigen::VectorXcd Z(n_ + 1);
  for (int j = 0; j <= n_; ++j) Z[j] = cplx(g(rng), g(rng));
  int a = 0;
  for (int j = 1; j <= n_; ++j)
    if (std::abs(Z[j]) > std::abs(Z[a])) a = j;
  ChartPoint p{a, Eigen::VectorXcd(n_)};
  int k = 0;
  for (int j = 0; j <= n_; ++j)
    if (j != a) p.coords[k++] = Z[j] / Z[a];
  return p;
}

double ProjectiveSpace::support_radius(int) const { return std::numeric_limits<double>::infinity(); }

// ------------------------------------------------------- S^2 good cover

SphereGoodCover::SphereGoodCover() {
  const double s = std::sqrt(8.0 / 9.0);
  c_[0] = Eigen::Vector3d(0, 0, 1);
  for (int k = 0; k < 3; ++k) {
    double a = 2.0 * std::numbers::pi * k / 3.0;
    c_[k + 1] = Eigen::Vector3d(s * std::cos(a), s * std::sin(a), -1.0 / 3.0);
  }
  for (int k = 0; k < 4; ++k) {
    Eigen::Vector3d helper = std::abs(c_[k].z()) < 0.9 ? Eigen::Vector3d(0, 0, 1) : Eigen::Vector3d(1, 0, 0);
    e1_[k] = (helper - helper.dot(c_[k]) * c_[k]).normalized();
    e2_[k] = c_[k].cross(e1_[k]);
  }
}

std::array<Jet, 3> SphereGoodCover::ambient(int chart, std::span<const Jet> u) const {
  Jet s = u[0] * u[0] + u[1] * u[1];
  Jet inv = inverse(s + Jet(1.0));
  Jet w = (Jet(1.0) - s) * inv;
  Jet a = Jet(2.0) * u[0] * inv, b = Jet(2.0) * u[1] * inv;
  std::array<Jet, 3> x;
  for (int i = 0; i < 3; ++i) x[i] = a * Jet(e1_[chart][i]) + b * Jet(e2_[chart][i]) + w * Jet(c_[chart][i]);
  return x;
}

Eigen::Vector3d SphereGoodCover::ambient(const ChartPoint& p) const {
  double u1 = p.coords[0].real(), u2 = p.coords[1].real();
  double s = u1 * u1 + u2 * u2;
  return (2 * u1 * e1_[p.chart] + 2 * u2 * e2_[p.chart] + (1 - s) * c_[p.chart]) / (1 + s);
}

ChartPoint SphereGoodCover::from_ambient(int chart, const Eigen::Vector3d& x) const {
  double den = 1.0 + x.dot(c_[chart]);
  ChartPoint p{chart, Eigen::VectorXcd(2)};
  p.coords[0] = x.dot(e1_[chart]) / den;
  p.coords[1] = x.dot(e2_[chart]) / den;
  return p;
}

std::vector<Jet> SphereGoodCover::change(int to, int from, std::span<const Jet> coords) const {
  if (to == from) return {coords.begin(), coords.end()};
  std::array<Jet, 3> x = ambient(from, coords);
  Jet den(1.0), p(0.0), q(0.0);
  for (int i = 0; i < 3; ++i) {
    den += x[i] * Jet(c_[to][i]);
    p += x[i] * Jet(e1_[to][i]);
    q += x[i] * Jet(e2_[to][i]);
  }
  Jet inv = inverse(den);
  return {p * inv, q * inv};
}

bool SphereGoodCover::contains(int chart, const ChartPoint& p) const {
  return ambient(p).dot(c_[chart]) - std::cos(kDomainAngleDeg * kDeg) > kBoundaryMargin;
}

bool SphereGoodCover::overlap_nonempty(std::span<const int> charts) const {
  unsigned mask = 0;
  for (int c : charts) mask |= 1u << c;
  return std::popcount(mask) <= 3;
}

std::vector<Jet> SphereGoodCover::global_functions(int chart, std::span<const Jet> coords) const {
  std::array<Jet, 3> x = ambient(chart, coords);
  return {x.begin(), x.end()};
}

ChartPoint SphereGoodCover::random_point(std::mt19937_64& rng) const {
  std::normal_distribution<double> g;
  Eigen::Vector3d x(g(rng), g(rng), g(rng));
  x.normalize();
  int a = 0;
  for (int k = 1; k < 4; ++k)
    if (x.dot(c_[k]) > x.dot(c_[a])) a = k;
  return from_ambient(a, x);
}

double SphereGoodCover::support_radius(int) const { return std::tan(0.5 * kSupportAngleDeg * kDeg); }

// ---------------------------------------------------------- partitions

PartitionOfUnity build_cpn(int n) {
  auto atlas = std::make_shared<ProjectiveSpace>(n);
  PartitionOfUnity pou{atlas, {}};
  for (int a = 0; a <= n; ++a) {
    pou.rho.push_back(scalar_field(atlas, {}, [atlas, a](int chart, std::span<const Jet> x) {
      std::vector<Jet> Z = atlas->homogeneous(chart, x, false), Zb = atlas->homogeneous(chart, x, true);
      Jet N(0.0);
      for (std::size_t j = 0; j < Z.size(); ++j) N += Z[j] * Zb[j];
      return Z[a] * Zb[a] / N;
    }));
  }
  return pou;
}

PartitionOfUnity build_good_cover_s2() {
  auto atlas = std::make_shared<SphereGoodCover>();
  const double cut = std::cos(SphereGoodCover::kSupportAngleDeg * kDeg);
  auto bump = [atlas, cut](int a, int chart, std::span<const Jet> u) {
    std::array<Jet, 3> x = atlas->ambient(chart, u);
    Jet t(-cut);
    for (int i = 0; i < 3; ++i) t += x[i] * Jet(atlas->center(a)[i]);
    return smooth_step(t);
  };
  PartitionOfUnity pou{atlas, {}};
  for (int a = 0; a < 4; ++a) {
    pou.rho.push_back(scalar_field(atlas, {}, [bump, a](int chart, std::span<const Jet> u) {
      Jet total(0.0), mine(0.0);
      for (int b = 0; b < 4; ++b) {
        Jet psi = bump(b, chart, u);
        total += psi;
        if (b == a) mine = psi;
      }
      return mine / total;
    }));
  }
  return pou;
}

PouValue pou_eval(const PartitionOfUnity& pou, int chart, const ChartPoint& p) {
  if (!pou.atlas->contains(chart, p)) throw DomainError("point outside the chart domain");
  FormJet v = pou.rho.at(chart).eval(p, 1);
  FormJet d = ext_d(v);
  PouValue out;
  out.value = v.value(0)(0, 0).real();
  out.gradient.resize(d.coef.size());
  for (std::size_t i = 0; i < d.coef.size(); ++i) out.gradient[i] = d.coef[i](0, 0).value();
  return out;
}

PartitionOfUnity perturbed_partition(const PartitionOfUnity& pou, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 1.0)) throw std::invalid_argument("perturbation amplitude must lie in [0,1)");
  const auto atlas = pou.atlas;
  const int n = atlas->num_charts();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<ChartPoint> probe{atlas->random_point(rng)};
  const int nglobal = static_cast<int>(atlas->global_functions(probe[0].chart, atlas->seed(probe[0], 0)).size());
  std::vector<std::vector<cplx>> w(n, std::vector<cplx>(nglobal));
  for (auto& row : w)
    for (auto& c : row) c = cplx(g(rng), g(rng));
  auto weight = [atlas, amplitude, w](int a, int chart, std::span<const Jet> x) {
    std::vector<Jet> f = atlas->global_functions(chart, x);
    Jet phi(0.0);
    for (std::size_t j = 0; j < f.size(); ++j) phi += f[j] * Jet(w[a][j]);
    return Jet(1.0) + Jet(amplitude) * sin(real_part(phi) * Jet(3.0));
  };
  std::vector<FormField> weighted;
  for (int a = 0; a < n; ++a)
    weighted.push_back(wedge(pou.rho[a], scalar_field(atlas, {}, [weight, a](int chart, std::span<const Jet> x) {
                               return weight(a, chart, x);
                             })));
  FormField inv_total = inverse_field(sum(atlas, 0, 1, weighted));
  PartitionOfUnity out{atlas, {}};
  for (int a = 0; a < n; ++a) out.rho.push_back(wedge(weighted[a], inv_total));
  return out;
}

}  // namespace chern
