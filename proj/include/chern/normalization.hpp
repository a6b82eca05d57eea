#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace chern {

/// 1 / (p! (-2 pi i)^p), the factor turning tr(Theta^p) into ch_p.
inline std::complex<double> chern_normalization(int p) {
  return 1.0 / (std::tgamma(p + 1.0) * std::pow(std::complex<double>(0.0, -2.0 * std::numbers::pi), p));
}

}  // namespace chern
