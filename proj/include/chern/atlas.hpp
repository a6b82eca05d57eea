#pragma once

#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chern/jet.hpp"

namespace chern {

enum class ChartKind { Complex, Real };

/// A point written in the coordinates of one chart. Complex charts hold n
/// complex coordinates; real charts hold m real ones (imaginary parts zero).
struct ChartPoint {
  int chart = 0;
  Eigen::VectorXcd coords;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Points closer than this to a chart boundary are treated as outside.
inline constexpr double kBoundaryMargin = 1e-9;

class Atlas {
 public:
  virtual ~Atlas() = default;

  virtual std::string name() const = 0;
  virtual int num_charts() const = 0;
  virtual ChartKind kind() const = 0;
  virtual int real_dim() const = 0;

  int nvar() const { return real_dim(); }
  int ncplx() const { return kind() == ChartKind::Complex ? real_dim() / 2 : 0; }
  int coord_count() const { return kind() == ChartKind::Complex ? real_dim() / 2 : real_dim(); }

  /// Coordinates of chart `to` (for complex charts: z's then zbar's) as jets,
  /// given the coordinate jets of chart `from` in the same layout.
  virtual std::vector<Jet> change(int to, int from, std::span<const Jet> coords) const = 0;

  /// Whether p (given in any chart) lies in U_chart.
  virtual bool contains(int chart, const ChartPoint& p) const = 0;

  virtual bool overlap_nonempty(std::span<const int> charts) const = 0;

  /// Smooth bounded functions on all of M, written in the given chart.
  virtual std::vector<Jet> global_functions(int chart, std::span<const Jet> coords) const = 0;

  /// A random point of M, returned in a chart that contains it.
  virtual ChartPoint random_point(std::mt19937_64& rng) const = 0;

  /// Radius of the coordinate region that carries the support of the
  /// partition weight of a chart (infinite for the whole-plane charts).
  virtual double support_radius(int chart) const = 0;

  /// Jacobian of the coordinates of chart `to` with respect to those of chart
  /// `from`, as jets of the same order as `coords` (which must be identity
  /// jets). Complex charts give the holomorphic n x n block.
  virtual JetMatrix jacobian_jets(int to, int from, std::span<const Jet> coords) const;

  std::vector<Jet> seed(const ChartPoint& p, int order) const;
  ChartPoint to_chart(int chart, const ChartPoint& p) const;
  /// Random point lying in every listed chart, expressed in the first.
  ChartPoint random_point_in(std::mt19937_64& rng, std::span<const int> charts) const;
  /// Numeric Jacobian d(coords of `to`)/d(coords of p.chart) in the chart bases.
  Eigen::MatrixXcd jacobian(int to, const ChartPoint& p) const;
};

}  // namespace chern
