// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>

namespace tstab {

/// Below this natural scale a bound comparison switches to an absolute floor.
inline constexpr double kZeroScale = 1e-6;
inline constexpr double kAbsoluteFloor = 1e-12;

/// value <= bound (1 + rel), with an absolute floor of 1e-12 * scale when
/// the bound itself is below 1e-6.
inline bool within_bound(double value, double bound, double rel, double scale = 1.0) {
    const double floor = bound < kZeroScale ? kAbsoluteFloor * std::max(1.0, scale) : 0.0;
    return value <= bound * (1.0 + rel) + floor;
}

/// The right-hand side used by within_bound; handy for utilisation ratios.
inline double allowed_bound(double bound, double rel, double scale = 1.0) {
    const double floor = bound < kZeroScale ? kAbsoluteFloor * std::max(1.0, scale) : 0.0;
    return bound * (1.0 + rel) + floor;
}

}  // namespace tstab
