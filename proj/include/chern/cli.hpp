#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chern/bundles.hpp"
#include "chern/cech.hpp"
#include "chern/geometry.hpp"

namespace chern {

inline constexpr const char* kToolName = "chern";
inline constexpr const char* kToolVersion = "0.1.0";

/// Bad manifold, bundle spec or parameter; maps to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string manifold = "cp1";
  std::string bundle = "O:1";
  int p = 1;
  int quad_order = 0;  // 0: default_quad_order of the manifold
  std::uint64_t seed = 1;
  bool timings = false;  // record runtime_ms; otherwise 0 so reports are reproducible
};

struct CheckRecord {
  std::string name;
  bool pass = false;
  double measured = 0;
  double tolerance = 0;
  double runtime_ms = 0;
};

struct Report {
  std::string suite;
  RunConfig config;
  int quad_order = 0;  // the order actually used
  std::vector<CheckRecord> checks;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool all_pass() const;
  nlohmann::ordered_json to_json() const;
  /// Human-readable table, one line per check.
  std::string table() const;
};

PartitionOfUnity make_manifold(const std::string& name);

/// Bundle from its text spec: O:k, T, trivial:r, polar(b), sum(b1,b2),
/// gauge(b,seed), nonhol(k,eps).
Bundle parse_bundle_spec(const std::string& spec, const PartitionOfUnity& pou);

Report run_verify(const RunConfig& cfg);
Report run_periods(const RunConfig& cfg);
/// Rebuilds a line bundle on the S^2 cover from a closed 2-form named by the
/// bundle field: "area:k" (area_curvature_form), "exact" (exact_bump_form),
/// or a line bundle spec, whose Levi-Civita curvature is used.
Report run_reconstruct(const RunConfig& cfg);
Report run_koszul(const RunConfig& cfg);

/// Largest pointwise difference of two forms at n random points.
double sampled_diff(const FormField& a, const FormField& b, int n, std::uint64_t seed);
/// Largest difference of two cochains over ordered tuples at n random points per overlap.
double sampled_cochain_diff(const Cochain& a, const Cochain& b, int n, std::uint64_t seed);
/// Largest |g_ab g_bc - g_ac| (relative) over sampled triple overlaps a < b < c
/// and |g_ab g_ba - 1| over pair overlaps.
double transition_cocycle_defect(const Bundle& e, int samples, std::uint64_t seed);
/// sum_a rho_a tr(A_a^p) with A_a = -sum_b drho_b ^ dlog g_ab: the part of the
/// modified Chern density that the Weil transfer of xi^p reproduces for every bundle.
FormField drho_part_density(const Bundle& e, const PartitionOfUnity& pou, int p);
/// (-2 pi i k) times the normalized area form of the S^2 cover, chart by chart:
/// a closed 2-form whose normalized period is k.
FormField area_curvature_form(const PartitionOfUnity& s2, int k);
/// d(phi * (u1 u2 du1 + sin(u1) du2)) with phi = (1 - |u|^2/0.64)^12 in chart 0 of
/// the S^2 cover: an exact 2-form supported in one chart.
FormField exact_bump_form(const PartitionOfUnity& s2);

}  // namespace chern
