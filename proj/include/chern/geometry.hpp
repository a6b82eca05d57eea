#pragma once

#include <array>
#include <memory>
#include <vector>

#include "chern/atlas.hpp"
#include "chern/forms.hpp"

namespace chern {

/// CP^n (n = 1, 2) with its standard affine charts: chart a has coordinates
/// Z_j / Z_a for j != a, in increasing order of j.
class ProjectiveSpace : public Atlas {
 public:
  explicit ProjectiveSpace(int n);

  std::string name() const override { return n_ == 1 ? "cp1" : "cp2"; }
  int num_charts() const override { return n_ + 1; }
  ChartKind kind() const override { return ChartKind::Complex; }
  int real_dim() const override { return 2 * n_; }
  int dim() const { return n_; }

  std::vector<Jet> change(int to, int from, std::span<const Jet> coords) const override;
  JetMatrix jacobian_jets(int to, int from, std::span<const Jet> coords) const override;
  bool contains(int chart, const ChartPoint& p) const override;
  bool overlap_nonempty(std::span<const int> charts) const override;
  std::vector<Jet> global_functions(int chart, std::span<const Jet> coords) const override;
  ChartPoint random_point(std::mt19937_64& rng) const override;
  double support_radius(int) const override;

  /// Homogeneous coordinates (Z_0..Z_n) of a chart point with Z_chart = 1;
  /// conjugate = true gives the conjugates from the zbar jets.
  std::vector<Jet> homogeneous(int chart, std::span<const Jet> coords, bool conjugate = false) const;
  Eigen::VectorXcd homogeneous(const ChartPoint& p) const;

 private:
  int n_;
};

/// S^2 covered by four geodesic balls of radius 85 degrees centred at the
/// vertices of a regular tetrahedron. Chart a is stereographic projection
/// from the antipode of its centre, so the centre maps to the origin and the
/// chart image is a disc. Pairs and triples of charts meet in spherically
/// convex sets; the four charts have empty common intersection.
class SphereGoodCover : public Atlas {
 public:
  SphereGoodCover();

  std::string name() const override { return "s2good"; }
  int num_charts() const override { return 4; }
  ChartKind kind() const override { return ChartKind::Real; }
  int real_dim() const override { return 2; }

  std::vector<Jet> change(int to, int from, std::span<const Jet> coords) const override;
  bool contains(int chart, const ChartPoint& p) const override;
  bool overlap_nonempty(std::span<const int> charts) const override;
  std::vector<Jet> global_functions(int chart, std::span<const Jet> coords) const override;
  ChartPoint random_point(std::mt19937_64& rng) const override;
  double support_radius(int chart) const override;

  /// Point of S^2 in R^3 from chart coordinates.
  std::array<Jet, 3> ambient(int chart, std::span<const Jet> coords) const;
  Eigen::Vector3d ambient(const ChartPoint& p) const;
  ChartPoint from_ambient(int chart, const Eigen::Vector3d& x) const;
  const Eigen::Vector3d& center(int chart) const { return c_[chart]; }

  static constexpr double kDomainAngleDeg = 85.0;
  static constexpr double kSupportAngleDeg = 80.0;

 private:
  std::array<Eigen::Vector3d, 4> c_, e1_, e2_;
};

struct PartitionOfUnity {
  std::shared_ptr<const Atlas> atlas;
  std::vector<FormField> rho;
};

struct PouValue {
  double value = 0;
  /// Components of d rho in the basis of the point's chart.
  Eigen::VectorXcd gradient;
};

/// CP^n with weights rho_a = |Z_a|^2 / sum |Z_b|^2.
PartitionOfUnity build_cpn(int n);
/// The four-chart good cover of S^2 with weights psi_a / sum psi_b,
/// psi_a = exp(-1/(x.c_a - cos 80deg)) on the cap and 0 off it.
PartitionOfUnity build_good_cover_s2();
PouValue pou_eval(const PartitionOfUnity& pou, int chart, const ChartPoint& p);
/// Reweights rho_a by 1 + amplitude*sin(phi_a) with phi_a a seeded random
/// combination of the atlas's global functions, then renormalizes.
PartitionOfUnity perturbed_partition(const PartitionOfUnity& pou, double amplitude, std::uint64_t seed);

}  // namespace chern
