#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chern/atlas.hpp"
#include "chern/jet.hpp"

namespace chern {

using Bidegree = std::pair<int, int>;

/// Increasing index sets of a given size over nvar basis 1-forms, as bit masks.
const std::vector<unsigned>& basis_masks(int nvar, int degree);
int mask_position(int nvar, unsigned mask);

/// The value of a matrix-valued k-form at a point: one coefficient matrix per
/// increasing index set of basis 1-forms. On complex charts the basis is
/// dz_1..dz_n, dzbar_1..dzbar_n; on real charts dx_1..dx_m.
struct FormJet {
  int nvar = 0;
  int ncplx = 0;
  int degree = 0;
  int rank = 1;
  std::vector<JetMatrix> coef;

  static FormJet zero(int nvar, int ncplx, int degree, int rank);
  static FormJet function(int nvar, int ncplx, const JetMatrix& m);

  JetMatrix& at(unsigned mask) { return coef[mask_position(nvar, mask)]; }
  const JetMatrix& at(unsigned mask) const { return coef[mask_position(nvar, mask)]; }
  /// Numeric coefficient matrix of an index set.
  Eigen::MatrixXcd value(unsigned mask) const;
  /// Largest |value| over all coefficient entries.
  double max_abs() const;
};

FormJet operator+(const FormJet& a, const FormJet& b);
FormJet operator-(const FormJet& a, const FormJet& b);
FormJet operator*(cplx s, const FormJet& a);
FormJet wedge(const FormJet& a, const FormJet& b);
/// d of a form jet of order k+1, giving order k.
FormJet ext_d(const FormJet& a);
/// The part of d raising the holomorphic (del) or antiholomorphic (delbar) degree.
FormJet del(const FormJet& a);
FormJet delbar(const FormJet& a);
FormJet project_pq(const FormJet& a, int p, int q);
FormJet trace(const FormJet& a);
FormJet truncated(const FormJet& a, int order);
/// Left and right multiplication by a matrix-valued function.
FormJet left_mul(const JetMatrix& g, const FormJet& a);
FormJet right_mul(const FormJet& a, const JetMatrix& g);
/// Interior product with the vector field sum_i v[i] d/de_i (chart basis components).
FormJet contract(std::span<const Jet> v, const FormJet& a);
/// Pullback of a form written in another chart's basis through the coordinate
/// jets y (order k+1) of that chart; coefficients must be jets in y's own
/// variables around y's value.
FormJet pullback(const FormJet& a, std::span<const Jet> y);
double max_abs_diff(const FormJet& a, const FormJet& b);

class FormNode;

/// Evaluation of a form expression at one point: caches the identity jets and
/// every subexpression result, keyed by node and jet order.
class EvalContext {
 public:
  EvalContext(const Atlas& atlas, ChartPoint x);

  const Atlas& atlas() const { return *atlas_; }
  const ChartPoint& point() const { return x_; }
  int chart() const { return x_.chart; }
  const std::vector<Jet>& coords(int order);
  bool contains(int chart);
  /// Results are memoized per node; the context keeps evaluated nodes alive so
  /// their addresses stay unique for its lifetime.
  const FormJet& eval(const std::shared_ptr<const FormNode>& node, int order);

 private:
  struct Key {
    const FormNode* node;
    int order;
    bool operator==(const Key& o) const { return node == o.node && order == o.order; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<const void*>()(k.node) * 31u + static_cast<std::size_t>(k.order);
    }
  };
  const Atlas* atlas_;
  ChartPoint x_;
  std::vector<std::vector<Jet>> seeds_;
  std::vector<int> membership_;
  std::unordered_map<Key, std::pair<std::shared_ptr<const FormNode>, FormJet>, KeyHash> cache_;
};

class FormNode {
 public:
  FormNode(std::shared_ptr<const Atlas> atlas, int degree, int rank) :
      atlas_(std::move(atlas)), degree_(degree), rank_(rank) {}
  virtual ~FormNode() = default;

  virtual FormJet compute(EvalContext& ctx, int order) const = 0;
  /// Closed-form exterior derivative, when the node knows one.
  virtual std::shared_ptr<const FormNode> differential() const { return nullptr; }
  /// Closed-form dg g^{-1} of a 0-form g, when the node knows one.
  virtual std::shared_ptr<const FormNode> log_differential() const { return nullptr; }

  const std::shared_ptr<const Atlas>& atlas() const { return atlas_; }
  int degree() const { return degree_; }
  int rank() const { return rank_; }
  const std::optional<Bidegree>& bidegree() const { return bidegree_; }
  const std::vector<int>& domain() const { return domain_; }
  int home() const { return home_; }

  void set_bidegree(std::optional<Bidegree> b) { bidegree_ = b; }
  void set_domain(std::vector<int> d) { domain_ = std::move(d); }
  void set_home(int h) { home_ = h; }

 private:
  std::shared_ptr<const Atlas> atlas_;
  int degree_;
  int rank_;
  std::optional<Bidegree> bidegree_;
  std::vector<int> domain_;
  int home_ = -1;
};

/// A matrix-valued differential form defined on the intersection of the
/// charts in its domain (all of M when the domain is empty). It can be
/// evaluated in any chart containing the point; results are in that chart's
/// basis.
class FormField {
 public:
  FormField() = default;
  explicit FormField(std::shared_ptr<const FormNode> n) : node_(std::move(n)) {}

  bool valid() const { return static_cast<bool>(node_); }
  int degree() const { return node_->degree(); }
  int rank() const { return node_->rank(); }
  /// Chart the field was defined in (-1 for globally defined fields).
  int chart() const { return node_->home(); }
  const std::optional<Bidegree>& bidegree() const { return node_->bidegree(); }
  const std::vector<int>& domain() const { return node_->domain(); }
  const std::shared_ptr<const Atlas>& atlas() const { return node_->atlas(); }
  const FormNode& node() const { return *node_; }
  const std::shared_ptr<const FormNode>& node_ptr() const { return node_; }

  FormJet eval(const ChartPoint& x, int order = 0) const;
  const FormJet& eval(EvalContext& ctx, int order = 0) const { return ctx.eval(node_, order); }

 private:
  std::shared_ptr<const FormNode> node_;
};

using MatrixFunction = std::function<JetMatrix(int chart, std::span<const Jet> coords)>;
using ScalarFunction = std::function<Jet(int chart, std::span<const Jet> coords)>;
/// Coefficients in the home chart's basis at a numeric home-chart point, as
/// jets of the given order in the home chart's identity variables.
using CoefficientFunction = std::function<FormJet(const Eigen::VectorXcd& x, int order)>;

/// Matrix-valued function (0-form); `fn` receives the coordinate jets of the
/// chart the point is written in.
FormField function_field(std::shared_ptr<const Atlas> atlas, std::vector<int> domain, int rank,
                         MatrixFunction fn);
FormField scalar_field(std::shared_ptr<const Atlas> atlas, std::vector<int> domain, ScalarFunction fn);
/// Form given by coefficient functions in the basis of chart `home`.
FormField coefficient_field(std::shared_ptr<const Atlas> atlas, int home, int degree, int rank,
                            CoefficientFunction fn, std::vector<int> domain = {});
FormField zero_field(std::shared_ptr<const Atlas> atlas, int degree, int rank);
/// Constant function with value c (rank 1).
FormField constant_field(std::shared_ptr<const Atlas> atlas, cplx c);
/// Coordinate function i of chart `home` (for complex charts i < n gives z_i,
/// i >= n gives zbar_{i-n}).
FormField coordinate(std::shared_ptr<const Atlas> atlas, int home, int i);

FormField operator+(const FormField& a, const FormField& b);
FormField operator-(const FormField& a, const FormField& b);
FormField operator-(const FormField& a);
FormField operator*(cplx s, const FormField& a);
FormField wedge(const FormField& a, const FormField& b);
FormField ext_d(const FormField& a);
FormField del(const FormField& a);
FormField delbar(const FormField& a);
FormField project_pq(const FormField& a, int p, int q);
std::vector<FormField> split_pq(const FormField& a);
FormField trace_form(const FormField& a);
FormField inverse_field(const FormField& g);
/// dg g^{-1} for a matrix-valued function g.
FormField dlog(const FormField& g);
/// del(g) g^{-1}.
FormField del_log(const FormField& g);
/// g a g^{-1}.
FormField conjugate_by(const FormField& g, const FormField& a);
FormField sum(std::shared_ptr<const Atlas> atlas, int degree, int rank, const std::vector<FormField>& terms);
/// Sum of terms, each skipped at points outside its guard charts. `domain`
/// is the domain of the result.
FormField guarded_sum(std::shared_ptr<const Atlas> atlas, int degree, int rank,
                      std::vector<std::pair<std::vector<int>, FormField>> terms, std::vector<int> domain = {});
/// Evaluates per_chart[c] when the point is written in chart c.
FormField chartwise(std::shared_ptr<const Atlas> atlas, std::vector<FormField> per_chart);
FormField with_bidegree(const FormField& a, Bidegree b);
/// Pointwise matrix function of a 0-form: x -> fn(g(x)), with result size `rank`.
FormField apply(const FormField& g, int rank, std::function<JetMatrix(const JetMatrix&)> fn);

struct BlockEntry {
  int row = 0, col = 0;
  /// The entry is taken as zero at points outside any of these charts.
  std::vector<int> guard;
  FormField value;  // block_size x block_size 0-form
};
/// The (nblocks * block_size)-square 0-form assembled from blocks.
FormField block_field(std::shared_ptr<const Atlas> atlas, int nblocks, int block_size, std::vector<BlockEntry> entries);
/// Block (i, j) of size block_size of a square matrix form.
FormField extract_block(const FormField& a, int i, int j, int block_size);

/// g with a known logarithmic differential: dlog of the result returns xi
/// without evaluating g.
FormField with_log_differential(const FormField& g, const FormField& xi);

/// The same form, declared on the intersection of the given charts.
FormField restrict_domain(const FormField& a, std::vector<int> domain);

}  // namespace chern
