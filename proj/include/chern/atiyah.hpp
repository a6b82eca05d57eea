#pragma once

#include <vector>

#include "chern/bundles.hpp"
#include "chern/cech.hpp"

namespace chern {

/// The p-fold cup power of the twisted End(E)-valued 1-cocycle dlog g (or
/// del log g for the (p,0) version), and its trace.
struct AtiyahCocycle {
  Bundle bundle;
  int p = 1;
  Cochain matrix;  // twisted by the bundle, components in the frame of the first chart
  Cochain scalar;  // stored on increasing tuples
};

/// xi_ab = dlog g_ab = dg_ab g_ab^{-1}.
Cochain atiyah_one(const Bundle& e);
/// xi_ab = del g_ab g_ab^{-1}, tagged (1,0).
Cochain atiyah_one_p0(const Bundle& e);

AtiyahCocycle smooth_atiyah(const Bundle& e, int p);
/// Same construction from del log g; components carry the (p,0) tag.
AtiyahCocycle atiyah_p0(const Bundle& e, int p);

/// Largest |coefficient| of delbar of any component over the given points;
/// each point is used for the components whose overlap contains it. The
/// components must be tagged (p,0).
double dbar_defect(const Cochain& eta, const std::vector<ChartPoint>& points);
/// `samples` random points in every overlap of eta.
double dbar_defect(const Cochain& eta, int samples, std::uint64_t seed);

}  // namespace chern
