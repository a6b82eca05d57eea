#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "chern/forms.hpp"
#include "chern/geometry.hpp"

namespace chern {

using Tuple = std::vector<int>;

/// Transition data used to twist End(E)-valued cochains. A component
/// eta_{a0...aq} of a twisted cochain is written in the frame of chart a0.
class Twisting {
 public:
  virtual ~Twisting() = default;
  virtual std::shared_ptr<const Atlas> atlas() const = 0;
  virtual int rank() const = 0;
  /// g_ab on U_ab.
  virtual FormField transition(int a, int b) const = 0;
};

/// g_ab x g_ab^{-1}; x itself when no twisting is given or a == b.
FormField adjoint(const Twisting* twist, int a, int b, const FormField& x);

/// A Cech q-cochain with values in (matrix-valued) p-forms.
///
/// Stored cochains keep components on increasing tuples with nonempty overlap
/// and answer other tuples by the sign of the sorting permutation (zero on
/// repeated indices). Formula cochains compute the component of any ordered
/// tuple, as the cup product and the coboundary do; they need not be
/// alternating.
class Cochain {
 public:
  using Formula = std::function<FormField(const Tuple&)>;

  Cochain() = default;
  static Cochain stored(std::shared_ptr<const Atlas> atlas, int q, int p, int rank, std::map<Tuple, FormField> comps);
  static Cochain formula(std::shared_ptr<const Atlas> atlas, int q, int p, int rank, Formula f,
                         std::shared_ptr<const Twisting> twist = nullptr);

  int q() const { return impl_->q; }
  int p() const { return impl_->p; }
  int rank() const { return impl_->rank; }
  bool is_stored() const { return impl_->is_stored; }
  const std::shared_ptr<const Atlas>& atlas() const { return impl_->atlas; }
  const std::shared_ptr<const Twisting>& twist() const { return impl_->twist; }

  /// Component on an ordered tuple of length q+1 (zero on empty overlaps).
  FormField operator()(const Tuple& t) const;
  bool overlap_nonempty(const Tuple& t) const;
  /// Increasing tuples of length q+1 with nonempty overlap.
  std::vector<Tuple> increasing_tuples() const;
  /// All ordered tuples of length q+1 with nonempty overlap.
  std::vector<Tuple> ordered_tuples() const;

 private:
  struct Impl {
    std::shared_ptr<const Atlas> atlas;
    int q = 0, p = 0, rank = 1;
    bool is_stored = false;
    std::map<Tuple, FormField> comps;
    Formula formula;
    std::shared_ptr<const Twisting> twist;
    std::mutex mu;
    std::map<Tuple, FormField> memo;
  };
  std::shared_ptr<Impl> impl_;
};

/// (delta eta)_{a0..a_{q+1}} = Ad(g_{a0a1}) eta_{a1..} + sum_{j>=1} (-1)^j eta_{..^aj..}.
Cochain cech_delta(const Cochain& eta);
/// (xi u eta)_{a0..a_{q+q'}} = (-1)^{p q'} xi_{a0..aq} ^ Ad(g_{a0aq}) eta_{aq..a_{q+q'}}.
Cochain cup(const Cochain& xi, const Cochain& eta);
/// (h eta)_{a1..aq} = sum_b rho_b Ad(g_{a1 b}) eta_{b a1..aq}.
Cochain homotopy_h(const Cochain& eta, const PartitionOfUnity& pou);
/// Componentwise exterior derivative.
Cochain cochain_d(const Cochain& eta);
/// Componentwise fibre trace (untwisted scalar result).
Cochain cochain_trace(const Cochain& eta);
/// Componentwise (p,q)-projection.
Cochain cochain_project(const Cochain& eta, int p, int q);
Cochain operator+(const Cochain& a, const Cochain& b);
Cochain operator-(const Cochain& a, const Cochain& b);
Cochain operator*(cplx s, const Cochain& a);
/// Stored cochain with the components of eta on increasing tuples.
Cochain materialize(const Cochain& eta);
/// The constant 0-cocycle with value 1 (scalar) or the identity (rank r).
Cochain unit_cochain(std::shared_ptr<const Atlas> atlas, int rank = 1);

/// Random smooth global p-form (rank x rank) built from the atlas's global
/// functions: a sum of terms f0 df1 ^ ... ^ dfp with random coefficients.
FormField random_global_form(std::shared_ptr<const Atlas> atlas, int p, int rank, std::mt19937_64& rng);
/// Random cochain whose component on each ordered tuple is an independent
/// random global form restricted to the overlap. With alternating = true the
/// result is stored (increasing tuples only).
Cochain random_cochain(std::shared_ptr<const Atlas> atlas, int q, int p, int rank, std::uint64_t seed,
                       bool alternating = false, std::shared_ptr<const Twisting> twist = nullptr);

}  // namespace chern
