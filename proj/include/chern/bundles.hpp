#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "chern/cech.hpp"
#include "chern/forms.hpp"
#include "chern/geometry.hpp"
#include "chern/normalization.hpp"

namespace chern {

/// A vector bundle given by transition matrices g_ab on the overlaps U_ab,
/// with g_ab g_bc = g_ac. g_ab maps the chart-b frame to the chart-a frame.
class BundleData : public Twisting {
 public:
  using Builder = std::function<FormField(int a, int b)>;

  BundleData(std::shared_ptr<const Atlas> atlas, int rank, std::string name, Builder builder, bool holomorphic);

  std::shared_ptr<const Atlas> atlas() const override { return atlas_; }
  int rank() const override { return rank_; }
  /// g_ab as a 0-form on U_ab (the identity when a == b).
  FormField transition(int a, int b) const override;
  const std::string& name() const { return name_; }
  /// Whether the transitions are holomorphic by construction.
  bool holomorphic() const { return holomorphic_; }

 private:
  std::shared_ptr<const Atlas> atlas_;
  int rank_;
  std::string name_;
  Builder builder_;
  bool holomorphic_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, int>, FormField> memo_;
};

using Bundle = std::shared_ptr<const BundleData>;

/// O(k): g_ab = (Z_b / Z_a)^k on CP^n. On the S^2 cover the same ratio of
/// linear forms in a spinor of the point is used, with the sign chosen so that
/// the degree is k.
Bundle line_bundle_o(std::shared_ptr<const Atlas> atlas, int k);
/// Transitions are the Jacobians of the coordinate changes.
Bundle tangent_bundle(std::shared_ptr<const Atlas> atlas);
Bundle trivial_bundle(std::shared_ptr<const Atlas> atlas, int rank);
Bundle direct_sum(const Bundle& e, const Bundle& f);
/// g^F_ab = f_a g^E_ab f_b^{-1} for invertible matrix functions f_a on U_a.
Bundle gauge_transform(const Bundle& e, const std::vector<FormField>& f, std::string name = "");
/// f_a = diag(exp(s_a)) (1 + K_a / (2r)) with s_a and the entries of K_a seeded
/// combinations of global functions, |K_a entries| <= 1.
std::vector<FormField> random_gauge(const Bundle& e, std::uint64_t seed);
/// Unitary transitions in the same isomorphism class: g/|g| for line bundles,
/// h_a^{1/2} g_ab h_b^{-1/2} with h_a = sum_b rho_b g_ba^* g_ba otherwise.
Bundle polar_unitary_transitions(const Bundle& e, const PartitionOfUnity& pou);
/// O(k) glued by the non-holomorphic g_ab exp(eps (phi_a - phi_b)), phi_0 =
/// Z_0 conj(Z_1)/|Z|^2 and phi_a = 0 otherwise; on CP^1 this is
/// g_01 = z^k exp(eps zbar/(1+|z|^2)).
Bundle nonholomorphic_line_bundle(std::shared_ptr<const Atlas> atlas, int k, double eps);

/// The block matrix I_ab = rho_a g_ab of size (charts * rank).
struct Idempotent {
  FormField matrix;
  int nblocks = 0;
  int block_size = 0;
};
Idempotent fedosov_idempotent(const Bundle& e, const PartitionOfUnity& pou);

/// theta_a = -sum_b rho_b dlog g_ab. These satisfy
/// theta_a = g_ab theta_b g_ab^{-1} + sign * dlog g_ab with sign = -1.
struct ConnectionForms {
  Bundle bundle;
  std::vector<FormField> theta;
  int sign = -1;
};
ConnectionForms levi_civita(const Bundle& e, const PartitionOfUnity& pou);

/// Theta_a = d theta_a + theta_a ^ theta_a, one per chart.
std::vector<FormField> curvature(const ConnectionForms& conn);
/// Theta_a from the idempotent: sum_{d,c} g_ad (I dI ^ dI)_dc rho_c g_ca.
FormField curvature_from_idempotent(const Bundle& e, const PartitionOfUnity& pou, const Idempotent& idem, int a);

/// ch_p = norm * tr(Theta^p), evaluated in the curvature of the point's chart.
FormField chern_form(const Bundle& e, const PartitionOfUnity& pou, int p);
/// ch_p(I) = norm * tr(I (dI ^ dI)^p).
FormField chern_form_idempotent(const Bundle& e, const PartitionOfUnity& pou, int p);
/// norm * sum_a rho_a tr((d theta_a)^p).
FormField modified_chern_form(const Bundle& e, const PartitionOfUnity& pou, int p);
/// Unnormalized sum_a rho_a tr((d theta_a)^p).
FormField modified_chern_density(const ConnectionForms& conn, const PartitionOfUnity& pou, int p);

/// Wedge power a^p of a form (p >= 1).
FormField wedge_power(const FormField& a, int p);

}  // namespace chern
