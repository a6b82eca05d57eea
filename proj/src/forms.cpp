#include "chern/forms.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <stdexcept>

namespace chern {

namespace {

struct MaskTables {
  std::array<std::array<std::vector<unsigned>, kMaxJetVars + 1>, kMaxJetVars + 1> masks;
  std::array<std::array<int, 1u << kMaxJetVars>, kMaxJetVars + 1> position;
  MaskTables() {
    for (int n = 0; n <= kMaxJetVars; ++n) {
      for (int k = 0; k <= n; ++k) {
        std::vector<unsigned>& v = masks[n][k];
        for (unsigned m = 0; m < (1u << n); ++m)
          if (std::popcount(m) == k) v.push_back(m);
        // Lexicographic order of the sorted index tuples.
        std::sort(v.begin(), v.end(), [n](unsigned a, unsigned b) {
          for (int i = 0; i < n; ++i) {
            bool ia = a & (1u << i), ib = b & (1u << i);
            if (ia != ib) return ia;
          }
          return false;
        });
        for (std::size_t i = 0; i < v.size(); ++i) position[n][v[i]] = static_cast<int>(i);
      }
    }
  }
};

const MaskTables& mask_tables() {
  static const MaskTables t;
  return t;
}

// Sign of e^I ^ e^J relative to e^{I|J}.
int merge_sign(unsigned I, unsigned J) {
  int count = 0;
  for (unsigned j = J; j; j &= j - 1) {
    int b = std::countr_zero(j);
    count += std::popcount(I & ~((2u << b) - 1u));
  }
  return (count & 1) ? -1 : 1;
}

JetMatrix scaled(const JetMatrix& m, cplx s) {
  JetMatrix r(m.rows(), m.cols());
  Jet js(s);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j) * js;
  return r;
}

void add_into(JetMatrix& acc, const JetMatrix& m, int sign) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      if (sign > 0)
        acc(i, j) += m(i, j);
      else
        acc(i, j) -= m(i, j);
    }
}

JetMatrix product(const JetMatrix& a, const JetMatrix& b) {
  if (a.rows() == 1 && a.cols() == 1 && b.rows() > 1) {
    JetMatrix r(b.rows(), b.cols());
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) r(i, j) = a(0, 0) * b(i, j);
    return r;
  }
  if (b.rows() == 1 && b.cols() == 1 && a.rows() > 1) {
    JetMatrix r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) * b(0, 0);
    return r;
  }
  return mul(a, b);
}

FormJet partial_d(const FormJet& a, int vbegin, int vend) {
  FormJet r = FormJet::zero(a.nvar, a.ncplx, a.degree + 1, a.rank);
  if (a.degree + 1 > a.nvar) return r;
  for (unsigned I : basis_masks(a.nvar, a.degree)) {
    const JetMatrix& c = a.at(I);
    for (int v = vbegin; v < vend; ++v) {
      if (I & (1u << v)) continue;
      int sign = (std::popcount(I & ((1u << v) - 1u)) & 1) ? -1 : 1;
      add_into(r.at(I | (1u << v)), derivative(c, v), sign);
    }
  }
  return r;
}

void check_compatible(const FormJet& a, const FormJet& b) {
  if (a.nvar != b.nvar || a.degree != b.degree || a.rank != b.rank)
    throw std::invalid_argument("form shape mismatch");
}

}  // namespace

const std::vector<unsigned>& basis_masks(int nvar, int degree) {
  static const std::vector<unsigned> empty;
  if (degree < 0 || degree > nvar) return empty;
  return mask_tables().masks[nvar][degree];
}

int mask_position(int nvar, unsigned mask) { return mask_tables().position[nvar][mask]; }

FormJet FormJet::zero(int nvar, int ncplx, int degree, int rank) {
  FormJet f;
  f.nvar = nvar;
  f.ncplx = ncplx;
  f.degree = degree;
  f.rank = rank;
  f.coef.assign(basis_masks(nvar, degree).size(), jet_zero(rank));
  return f;
}

FormJet FormJet::function(int nvar, int ncplx, const JetMatrix& m) {
  FormJet f;
  f.nvar = nvar;
  f.ncplx = ncplx;
  f.degree = 0;
  f.rank = static_cast<int>(m.rows());
  f.coef.push_back(m);
  return f;
}

Eigen::MatrixXcd FormJet::value(unsigned mask) const { return values(at(mask)); }

double FormJet::max_abs() const {
  double m = 0;
  for (const auto& c : coef)
    for (int i = 0; i < c.rows(); ++i)
      for (int j = 0; j < c.cols(); ++j) m = std::max(m, std::abs(c(i, j).value()));
  return m;
}

FormJet operator+(const FormJet& a, const FormJet& b) {
  check_compatible(a, b);
  FormJet r = a;
  for (std::size_t k = 0; k < r.coef.size(); ++k) add_into(r.coef[k], b.coef[k], 1);
  return r;
}

FormJet operator-(const FormJet& a, const FormJet& b) {
  check_compatible(a, b);
  FormJet r = a;
  for (std::size_t k = 0; k < r.coef.size(); ++k) add_into(r.coef[k], b.coef[k], -1);
  return r;
}

FormJet operator*(cplx s, const FormJet& a) {
  FormJet r = a;
  for (auto& c : r.coef) c = scaled(c, s);
  return r;
}

FormJet wedge(const FormJet& a, const FormJet& b) {
  if (a.nvar != b.nvar) throw std::invalid_argument("wedge: chart dimension mismatch");
  if (a.rank != b.rank && a.rank != 1 && b.rank != 1) throw std::invalid_argument("wedge: matrix size mismatch");
  int rank = std::max(a.rank, b.rank);
  FormJet r = FormJet::zero(a.nvar, a.ncplx, a.degree + b.degree, rank);
  if (a.degree + b.degree > a.nvar) return r;
  const auto& ma = basis_masks(a.nvar, a.degree);
  const auto& mb = basis_masks(b.nvar, b.degree);
  for (std::size_t i = 0; i < ma.size(); ++i)
    for (std::size_t j = 0; j < mb.size(); ++j) {
      unsigned I = ma[i], J = mb[j];
      if (I & J) continue;
      add_into(r.at(I | J), product(a.coef[i], b.coef[j]), merge_sign(I, J));
    }
  return r;
}

FormJet ext_d(const FormJet& a) { return partial_d(a, 0, a.nvar); }

FormJet del(const FormJet& a) {
  if (a.ncplx == 0) throw std::invalid_argument("del on a real chart");
  return partial_d(a, 0, a.ncplx);
}

FormJet delbar(const FormJet& a) {
  if (a.ncplx == 0) throw std::invalid_argument("delbar on a real chart");
  return partial_d(a, a.ncplx, a.nvar);
}

FormJet project_pq(const FormJet& a, int p, int q) {
  if (a.ncplx == 0) throw std::invalid_argument("(p,q) split on a real chart");
  FormJet r = FormJet::zero(a.nvar, a.ncplx, a.degree, a.rank);
  unsigned holo = (1u << a.ncplx) - 1u;
  const auto& masks = basis_masks(a.nvar, a.degree);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    int hp = std::popcount(masks[i] & holo);
    if (hp == p && a.degree - hp == q) r.coef[i] = a.coef[i];
  }
  return r;
}

FormJet trace(const FormJet& a) {
  FormJet r = FormJet::zero(a.nvar, a.ncplx, a.degree, 1);
  for (std::size_t i = 0; i < a.coef.size(); ++i) r.coef[i](0, 0) = trace(a.coef[i]);
  return r;
}

FormJet truncated(const FormJet& a, int order) {
  FormJet r = a;
  for (auto& c : r.coef) c = truncated(c, order);
  return r;
}

FormJet left_mul(const JetMatrix& g, const FormJet& a) {
  FormJet r = a;
  r.rank = static_cast<int>(g.rows());
  for (auto& c : r.coef) c = product(g, c);
  return r;
}

FormJet right_mul(const FormJet& a, const JetMatrix& g) {
  FormJet r = a;
  r.rank = static_cast<int>(g.cols());
  for (auto& c : r.coef) c = product(c, g);
  return r;
}

FormJet contract(std::span<const Jet> v, const FormJet& a) {
  FormJet r = FormJet::zero(a.nvar, a.ncplx, a.degree - 1, a.rank);
  if (a.degree == 0) throw std::invalid_argument("contraction of a 0-form");
  const auto& masks = basis_masks(a.nvar, a.degree);
  for (std::size_t k = 0; k < masks.size(); ++k) {
    unsigned I = masks[k];
    for (unsigned rest = I; rest; rest &= rest - 1) {
      int i = std::countr_zero(rest);
      int sign = (std::popcount(I & ((1u << i) - 1u)) & 1) ? -1 : 1;
      JetMatrix term = a.coef[k];
      for (int p = 0; p < term.rows(); ++p)
        for (int q = 0; q < term.cols(); ++q) term(p, q) = term(p, q) * v[i];
      add_into(r.at(I & ~(1u << i)), term, sign);
    }
  }
  return r;
}

FormJet pullback(const FormJet& a, std::span<const Jet> y) {
  const Jet* shape = nullptr;
  for (const Jet& j : y)
    if (!j.is_constant()) shape = &j;
  if (!shape) throw std::logic_error("pullback through constant coordinates");
  int nvar = shape->nvar(), ncplx = shape->ncplx();
  int order = shape->order() - 1;
  std::vector<Jet> yk;
  for (const Jet& j : y) yk.push_back(j.truncated(order));
  std::vector<FormJet> dy;
  for (const Jet& j : y) {
    FormJet f = FormJet::zero(nvar, ncplx, 1, 1);
    for (int v = 0; v < nvar; ++v) f.coef[v](0, 0) = j.derivative(v);
    dy.push_back(f);
  }
  FormJet r = FormJet::zero(nvar, ncplx, a.degree, a.rank);
  const auto& masks = basis_masks(a.nvar, a.degree);
  for (std::size_t k = 0; k < masks.size(); ++k) {
    JetMatrix c(a.rank, a.rank);
    bool nonzero = false;
    for (int p = 0; p < a.rank; ++p)
      for (int q = 0; q < a.rank; ++q) {
        c(p, q) = compose(a.coef[k](p, q), yk);
        if (c(p, q).max_abs() != 0.0) nonzero = true;
      }
    if (!nonzero) continue;
    FormJet basis = FormJet::function(nvar, ncplx, c);
    for (unsigned rest = masks[k]; rest; rest &= rest - 1) basis = wedge(basis, dy[std::countr_zero(rest)]);
    r = r + basis;
  }
  return r;
}

double max_abs_diff(const FormJet& a, const FormJet& b) { return (a - b).max_abs(); }

// ---------------------------------------------------------------- evaluation

EvalContext::EvalContext(const Atlas& atlas, ChartPoint x) :
    atlas_(&atlas), x_(std::move(x)), membership_(atlas.num_charts(), -1) {}

const std::vector<Jet>& EvalContext::coords(int order) {
  if (static_cast<int>(seeds_.size()) <= order) seeds_.resize(order + 1);
  if (seeds_[order].empty()) seeds_[order] = atlas_->seed(x_, order);
  return seeds_[order];
}

bool EvalContext::contains(int chart) {
  if (chart == x_.chart) return true;
  if (membership_[chart] < 0) membership_[chart] = atlas_->contains(chart, x_) ? 1 : 0;
  return membership_[chart] == 1;
}

const FormJet& EvalContext::eval(const std::shared_ptr<const FormNode>& node, int order) {
  Key key{node.get(), order};
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second.second;
  for (int c : node->domain())
    if (!contains(c)) throw DomainError("form evaluated outside its domain");
  FormJet v = node->compute(*this, order);
  return cache_.emplace(key, std::make_pair(node, std::move(v))).first->second.second;
}

FormJet FormField::eval(const ChartPoint& x, int order) const {
  EvalContext ctx(*node_->atlas(), x);
  return ctx.eval(node_, order);
}

// --------------------------------------------------------------------- nodes

namespace {

std::vector<int> merged_domain(const std::vector<FormField>& fs) {
  std::vector<int> d;
  for (const auto& f : fs) d.insert(d.end(), f.domain().begin(), f.domain().end());
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

std::optional<Bidegree> zero_form_tag(const Atlas& a) {
  if (a.kind() == ChartKind::Complex) return Bidegree{0, 0};
  return std::nullopt;
}

class FunctionNode : public FormNode {
 public:
  FunctionNode(std::shared_ptr<const Atlas> atlas, int rank, MatrixFunction fn) :
      FormNode(std::move(atlas), 0, rank), fn_(std::move(fn)) {}
  FormJet compute(EvalContext& ctx, int order) const override {
    JetMatrix m = fn_(ctx.chart(), ctx.coords(order));
    return FormJet::function(atlas()->nvar(), atlas()->ncplx(), truncated(m, order));
  }

 private:
  MatrixFunction fn_;
};

class CoefficientNode : public FormNode {
 public:
  CoefficientNode(std::shared_ptr<const Atlas> atlas, int home, int degree, int rank, CoefficientFunction fn) :
      FormNode(std::move(atlas), degree, rank), fn_(std::move(fn)) {
    set_home(home);
  }
  FormJet compute(EvalContext& ctx, int order) const override {
    const Atlas& A = *atlas();
    if (ctx.chart() == home()) return truncated(fn_(ctx.point().coords, order), order);
    std::vector<Jet> y = A.change(home(), ctx.chart(), ctx.coords(order + 1));
    Eigen::VectorXcd y0(A.coord_count());
    for (int i = 0; i < y0.size(); ++i) y0[i] = y[i].value();
    if (A.kind() == ChartKind::Real) y0 = y0.real().cast<cplx>();
    FormJet home_jet = fn_(y0, order);
    return pullback(home_jet, y);
  }

 private:
  CoefficientFunction fn_;
};

class SumNode : public FormNode {
 public:
  SumNode(std::shared_ptr<const Atlas> atlas, int degree, int rank, std::vector<std::pair<cplx, FormField>> terms) :
      FormNode(std::move(atlas), degree, rank), terms_(std::move(terms)) {}
  FormJet compute(EvalContext& ctx, int order) const override {
    FormJet r = FormJet::zero(atlas()->nvar(), atlas()->ncplx(), degree(), rank());
    for (const auto& [c, f] : terms_) {
      const FormJet& v = f.eval(ctx, order);
      r = (c == 1.0) ? r + v : r + c * v;
    }
    return r;
  }

 private:
  std::vector<std::pair<cplx, FormField>> terms_;
};

class GuardedSumNode : public FormNode {
 public:
  GuardedSumNode(std::shared_ptr<const Atlas> atlas, int degree, int rank,
                 std::vector<std::pair<std::vector<int>, FormField>> terms) :
      FormNode(std::move(atlas), degree, rank), terms_(std::move(terms)) {}
  FormJet compute(EvalContext& ctx, int order) const override {
    FormJet r = FormJet::zero(atlas()->nvar(), atlas()->ncplx(), degree(), rank());
    for (const auto& [guard, f] : terms_) {
      bool inside = true;
      for (int c : guard) inside = inside && ctx.contains(c);
      if (inside) r = r + f.eval(ctx, order);
    }
    return r;
  }

 private:
  std::vector<std::pair<std::vector<int>, FormField>> terms_;
};

bool identically_zero(const FormJet& f) {
  for (const auto& c : f.coef)
    for (int i = 0; i < c.rows(); ++i)
      for (int j = 0; j < c.cols(); ++j)
        if (c(i, j).max_abs() != 0.0) return false;
  return true;
}

class WedgeNode : public FormNode {
 public:
  WedgeNode(FormField a, FormField b) :
      FormNode(a.atlas(), a.degree() + b.degree(), std::max(a.rank(), b.rank())), a_(std::move(a)), b_(std::move(b)) {}
  // The right factor goes first; where it vanishes identically the left one is not evaluated.
  FormJet compute(EvalContext& ctx, int order) const override {
    const FormJet& b = b_.eval(ctx, order);
    if (identically_zero(b)) return FormJet::zero(b.nvar, b.ncplx, degree(), rank());
    return wedge(a_.eval(ctx, order), b);
  }

 private:
  FormField a_, b_;
};

enum class DKind { Full, Del, Delbar };

class DNode : public FormNode {
 public:
  DNode(FormField a, DKind kind) : FormNode(a.atlas(), a.degree() + 1, a.rank()), a_(std::move(a)), kind_(kind) {}
  FormJet compute(EvalContext& ctx, int order) const override {
    const FormJet& v = a_.eval(ctx, order + 1);
    switch (kind_) {
      case DKind::Del: return del(v);
      case DKind::Delbar: return delbar(v);
      default: return ext_d(v);
    }
  }

 private:
  FormField a_;
  DKind kind_;
};

class ProjectNode : public FormNode {
 public:
  ProjectNode(FormField a, int p, int q) : FormNode(a.atlas(), a.degree(), a.rank()), a_(std::move(a)), p_(p), q_(q) {}
  FormJet compute(EvalContext& ctx, int order) const override { return project_pq(a_.eval(ctx, order), p_, q_); }

 private:
  FormField a_;
  int p_, q_;
};

class TraceNode : public FormNode {
 public:
  explicit TraceNode(FormField a) : FormNode(a.atlas(), a.degree(), 1), a_(std::move(a)) {}
  FormJet compute(EvalContext& ctx, int order) const override { return trace(a_.eval(ctx, order)); }

 private:
  FormField a_;
};

class InverseNode : public FormNode {
 public:
  explicit InverseNode(FormField g) : FormNode(g.atlas(), 0, g.rank()), g_(std::move(g)) {}
  FormJet compute(EvalContext& ctx, int order) const override {
    const FormJet& v = g_.eval(ctx, order);
    return FormJet::function(v.nvar, v.ncplx, inverse(v.coef[0]));
  }

 private:
  FormField g_;
};

class ChartwiseNode : public FormNode {
 public:
  ChartwiseNode(std::shared_ptr<const Atlas> atlas, std::vector<FormField> per_chart) :
      FormNode(std::move(atlas), per_chart.at(0).degree(), per_chart.at(0).rank()), per_chart_(std::move(per_chart)) {}
  FormJet compute(EvalContext& ctx, int order) const override { return per_chart_.at(ctx.chart()).eval(ctx, order); }

 private:
  std::vector<FormField> per_chart_;
};

class TaggedNode : public FormNode {
 public:
  explicit TaggedNode(FormField a) : FormNode(a.atlas(), a.degree(), a.rank()), a_(std::move(a)) {
    set_bidegree(a_.bidegree());
    set_domain(a_.domain());
    set_home(a_.chart());
  }
  FormJet compute(EvalContext& ctx, int order) const override { return a_.eval(ctx, order); }
  std::shared_ptr<const FormNode> log_differential() const override {
    return log_.valid() ? log_.node_ptr() : a_.node().log_differential();
  }
  void set_log(FormField xi) { log_ = std::move(xi); }

 private:
  FormField a_;
  FormField log_;
};

class ApplyNode : public FormNode {
 public:
  ApplyNode(FormField g, int rank, std::function<JetMatrix(const JetMatrix&)> fn) :
      FormNode(g.atlas(), 0, rank), g_(std::move(g)), fn_(std::move(fn)) {}
  FormJet compute(EvalContext& ctx, int order) const override {
    const FormJet& v = g_.eval(ctx, order);
    return FormJet::function(v.nvar, v.ncplx, fn_(v.coef[0]));
  }

 private:
  FormField g_;
  std::function<JetMatrix(const JetMatrix&)> fn_;
};

class BlockNode : public FormNode {
 public:
  BlockNode(std::shared_ptr<const Atlas> atlas, int nblocks, int block_size, std::vector<BlockEntry> entries) :
      FormNode(std::move(atlas), 0, nblocks * block_size), b_(block_size), entries_(std::move(entries)) {}
  FormJet compute(EvalContext& ctx, int order) const override {
    JetMatrix m = jet_zero(rank());
    for (const auto& e : entries_) {
      bool inside = true;
      for (int c : e.guard) inside = inside && ctx.contains(c);
      if (!inside) continue;
      const JetMatrix& v = e.value.eval(ctx, order).coef[0];
      for (int i = 0; i < b_; ++i)
        for (int j = 0; j < b_; ++j) m(e.row * b_ + i, e.col * b_ + j) += v(i, j);
    }
    return FormJet::function(atlas()->nvar(), atlas()->ncplx(), m);
  }

 private:
  int b_;
  std::vector<BlockEntry> entries_;
};

class ExtractNode : public FormNode {
 public:
  ExtractNode(FormField a, int i, int j, int b) : FormNode(a.atlas(), a.degree(), b), a_(std::move(a)), i_(i), j_(j) {}
  FormJet compute(EvalContext& ctx, int order) const override {
    const FormJet& v = a_.eval(ctx, order);
    FormJet r = FormJet::zero(v.nvar, v.ncplx, v.degree, rank());
    for (std::size_t k = 0; k < v.coef.size(); ++k) r.coef[k] = v.coef[k].block(i_ * rank(), j_ * rank(), rank(), rank());
    return r;
  }

 private:
  FormField a_;
  int i_, j_;
};

template <class N, class... Args>
std::shared_ptr<N> make(Args&&... args) {
  return std::make_shared<N>(std::forward<Args>(args)...);
}

std::optional<Bidegree> add_tags(const std::optional<Bidegree>& a, const std::optional<Bidegree>& b) {
  if (!a || !b) return std::nullopt;
  return Bidegree{a->first + b->first, a->second + b->second};
}

void require_complex(const FormField& a, const char* what) {
  if (a.atlas()->kind() != ChartKind::Complex) throw std::invalid_argument(std::string(what) + " needs a complex chart");
}

}  // namespace

FormField function_field(std::shared_ptr<const Atlas> atlas, std::vector<int> domain, int rank, MatrixFunction fn) {
  auto tag = zero_form_tag(*atlas);
  auto n = make<FunctionNode>(std::move(atlas), rank, std::move(fn));
  n->set_domain(std::move(domain));
  n->set_bidegree(tag);
  if (n->domain().size() == 1) n->set_home(n->domain()[0]);
  return FormField(n);
}

FormField scalar_field(std::shared_ptr<const Atlas> atlas, std::vector<int> domain, ScalarFunction fn) {
  return function_field(std::move(atlas), std::move(domain), 1, [fn = std::move(fn)](int c, std::span<const Jet> x) {
    JetMatrix m(1, 1);
    m(0, 0) = fn(c, x);
    return m;
  });
}

FormField coefficient_field(std::shared_ptr<const Atlas> atlas, int home, int degree, int rank,
                            CoefficientFunction fn, std::vector<int> domain) {
  auto n = make<CoefficientNode>(std::move(atlas), home, degree, rank, std::move(fn));
  if (std::find(domain.begin(), domain.end(), home) == domain.end()) domain.push_back(home);
  std::sort(domain.begin(), domain.end());
  n->set_domain(std::move(domain));
  return FormField(n);
}

FormField zero_field(std::shared_ptr<const Atlas> atlas, int degree, int rank) {
  auto n = make<SumNode>(std::move(atlas), degree, rank, std::vector<std::pair<cplx, FormField>>{});
  return FormField(n);
}

FormField constant_field(std::shared_ptr<const Atlas> atlas, cplx c) {
  return scalar_field(std::move(atlas), {}, [c](int, std::span<const Jet>) { return Jet(c); });
}

FormField coordinate(std::shared_ptr<const Atlas> atlas, int home, int i) {
  auto A = atlas;
  return scalar_field(std::move(atlas), {home}, [A, home, i](int c, std::span<const Jet> x) {
    if (c == home) return x[i];
    return A->change(home, c, x)[i];
  });
}

FormField operator+(const FormField& a, const FormField& b) {
  if (a.degree() != b.degree() || a.rank() != b.rank()) throw std::invalid_argument("sum: shape mismatch");
  auto n = make<SumNode>(a.atlas(), a.degree(), a.rank(),
                         std::vector<std::pair<cplx, FormField>>{{1.0, a}, {1.0, b}});
  n->set_domain(merged_domain({a, b}));
  if (a.bidegree() == b.bidegree()) n->set_bidegree(a.bidegree());
  return FormField(n);
}

FormField operator-(const FormField& a, const FormField& b) { return a + (-1.0) * b; }

FormField operator-(const FormField& a) { return (-1.0) * a; }

FormField operator*(cplx s, const FormField& a) {
  auto n = make<SumNode>(a.atlas(), a.degree(), a.rank(), std::vector<std::pair<cplx, FormField>>{{s, a}});
  n->set_domain(a.domain());
  n->set_bidegree(a.bidegree());
  n->set_home(a.chart());
  return FormField(n);
}

FormField wedge(const FormField& a, const FormField& b) {
  if (a.atlas() != b.atlas()) throw std::invalid_argument("wedge: atlas mismatch");
  if (a.rank() != b.rank() && a.rank() != 1 && b.rank() != 1) throw std::invalid_argument("wedge: matrix size mismatch");
  auto n = make<WedgeNode>(a, b);
  n->set_domain(merged_domain({a, b}));
  n->set_bidegree(add_tags(a.bidegree(), b.bidegree()));
  return FormField(n);
}

FormField ext_d(const FormField& a) {
  if (auto d = a.node().differential()) return FormField(d);
  auto n = make<DNode>(a, DKind::Full);
  n->set_domain(a.domain());
  n->set_home(a.chart());
  return FormField(n);
}

FormField del(const FormField& a) {
  require_complex(a, "del");
  auto n = make<DNode>(a, DKind::Del);
  n->set_domain(a.domain());
  if (a.bidegree()) n->set_bidegree(Bidegree{a.bidegree()->first + 1, a.bidegree()->second});
  return FormField(n);
}

FormField delbar(const FormField& a) {
  require_complex(a, "delbar");
  auto n = make<DNode>(a, DKind::Delbar);
  n->set_domain(a.domain());
  if (a.bidegree()) n->set_bidegree(Bidegree{a.bidegree()->first, a.bidegree()->second + 1});
  return FormField(n);
}

FormField project_pq(const FormField& a, int p, int q) {
  require_complex(a, "split_pq");
  auto n = make<ProjectNode>(a, p, q);
  n->set_domain(a.domain());
  n->set_bidegree(Bidegree{p, q});
  return FormField(n);
}

std::vector<FormField> split_pq(const FormField& a) {
  require_complex(a, "split_pq");
  std::vector<FormField> parts;
  int n = a.atlas()->ncplx();
  for (int p = 0; p <= a.degree(); ++p) {
    int q = a.degree() - p;
    if (p <= n && q <= n) parts.push_back(project_pq(a, p, q));
  }
  return parts;
}

FormField trace_form(const FormField& a) {
  auto n = make<TraceNode>(a);
  n->set_domain(a.domain());
  n->set_bidegree(a.bidegree());
  return FormField(n);
}

FormField inverse_field(const FormField& g) {
  if (g.degree() != 0) throw std::invalid_argument("inverse of a form of positive degree");
  auto n = make<InverseNode>(g);
  n->set_domain(g.domain());
  n->set_bidegree(g.bidegree());
  return FormField(n);
}

FormField dlog(const FormField& g) {
  if (auto x = g.node().log_differential()) return FormField(x);
  return wedge(ext_d(g), inverse_field(g));
}

FormField del_log(const FormField& g) { return wedge(del(g), inverse_field(g)); }

FormField conjugate_by(const FormField& g, const FormField& a) { return wedge(wedge(g, a), inverse_field(g)); }

FormField sum(std::shared_ptr<const Atlas> atlas, int degree, int rank, const std::vector<FormField>& terms) {
  std::vector<std::pair<cplx, FormField>> t;
  for (const auto& f : terms) t.push_back({1.0, f});
  auto n = make<SumNode>(std::move(atlas), degree, rank, std::move(t));
  n->set_domain(merged_domain(terms));
  return FormField(n);
}

FormField guarded_sum(std::shared_ptr<const Atlas> atlas, int degree, int rank,
                      std::vector<std::pair<std::vector<int>, FormField>> terms, std::vector<int> domain) {
  auto n = make<GuardedSumNode>(std::move(atlas), degree, rank, std::move(terms));
  n->set_domain(std::move(domain));
  if (n->domain().size() == 1) n->set_home(n->domain()[0]);
  return FormField(n);
}

FormField chartwise(std::shared_ptr<const Atlas> atlas, std::vector<FormField> per_chart) {
  return FormField(make<ChartwiseNode>(std::move(atlas), std::move(per_chart)));
}

FormField with_bidegree(const FormField& a, Bidegree b) {
  auto n = make<TaggedNode>(a);
  n->set_bidegree(b);
  return FormField(n);
}

FormField apply(const FormField& g, int rank, std::function<JetMatrix(const JetMatrix&)> fn) {
  if (g.degree() != 0) throw std::invalid_argument("apply needs a 0-form");
  auto n = make<ApplyNode>(g, rank, std::move(fn));
  n->set_domain(g.domain());
  n->set_bidegree(zero_form_tag(*g.atlas()));
  return FormField(n);
}

FormField block_field(std::shared_ptr<const Atlas> atlas, int nblocks, int block_size, std::vector<BlockEntry> entries) {
  for (const auto& e : entries)
    if (e.value.degree() != 0 || e.value.rank() != block_size) throw std::invalid_argument("block entry has the wrong shape");
  auto tag = zero_form_tag(*atlas);
  auto n = make<BlockNode>(std::move(atlas), nblocks, block_size, std::move(entries));
  n->set_bidegree(tag);
  return FormField(n);
}

FormField extract_block(const FormField& a, int i, int j, int block_size) {
  auto n = make<ExtractNode>(a, i, j, block_size);
  n->set_domain(a.domain());
  n->set_bidegree(a.bidegree());
  return FormField(n);
}

FormField with_log_differential(const FormField& g, const FormField& xi) {
  if (g.degree() != 0 || xi.degree() != 1 || g.rank() != xi.rank())
    throw std::invalid_argument("log differential has the wrong shape");
  auto n = make<TaggedNode>(g);
  n->set_log(xi);
  return FormField(n);
}

FormField restrict_domain(const FormField& a, std::vector<int> domain) {
  auto n = make<TaggedNode>(a);
  std::sort(domain.begin(), domain.end());
  domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
  n->set_domain(std::move(domain));
  return FormField(n);
}

}  // namespace chern
