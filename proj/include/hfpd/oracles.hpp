#ifndef HFPD_ORACLES_HPP
#define HFPD_ORACLES_HPP

#include "hfpd/core.hpp"

#include <cmath>

namespace hfpd {
namespace oracles {

/// Series controls shared by the consolidation and crack-diffusion solutions.
/// Terms are summed until the last term falls below `tail_tol` times the
/// running sum, capped at `max_terms`.
struct SeriesParams {
  int max_terms = 500;
  double tail_tol = 1e-12;
};

/// One-dimensional consolidation constants. `compliance` is the oedometric
/// compliance a [1/Pa] (the column is loaded along x and drained at x = 0).
struct ConsolidationParams {
  double compliance = 1e-8;   // a [1/Pa]
  double alpha = 0.5;         // Biot coefficient
  double storage = 0.0;       // S [1/Pa]
  double permeability = 0.0;  // k [m^2]
  double viscosity = 0.0;     // mu_w [Pa s]
  double length = 0.0;        // L [m]
  double load = 0.0;          // P0 [Pa]

  double b() const { return compliance / (1.0 + compliance * alpha * alpha / storage); }
  double v() const { return (compliance - b()) / (compliance * alpha); }
  double c() const {
    return permeability / ((compliance * alpha * alpha + storage) * viscosity);
  }
  double cm() const { return (compliance - b()) / v(); }
};

inline double consolidation_pressure(double x, double t, const ConsolidationParams& cp,
                                     const SeriesParams& sp = {}) {
  const double L = cp.length;
  const double c = cp.c();
  double sum = 0.0;
  for (int m = 0; m < sp.max_terms; ++m) {
    const double k = (2 * m + 1) * M_PI / (2.0 * L);
    const double envelope = std::exp(-k * k * c * t) / (2 * m + 1);
    sum += envelope * std::sin(k * x);
    // the envelope bounds every remaining term and decays monotonically
    if (envelope < sp.tail_tol * std::max(std::abs(sum), 1e-300) && m > 2) break;
  }
  return 4.0 * cp.v() * cp.load / M_PI * sum;
}

inline double consolidation_displacement(double x, double t, const ConsolidationParams& cp,
                                         const SeriesParams& sp = {}) {
  const double L = cp.length;
  const double c = cp.c();
  double sum = 0.0;
  for (int m = 0; m < sp.max_terms; ++m) {
    const double k = (2 * m + 1) * M_PI / (2.0 * L);
    const double envelope = std::exp(-k * k * c * t) / double((2 * m + 1) * (2 * m + 1));
    sum += envelope * std::cos(k * x);
    if (envelope < sp.tail_tol * std::max(std::abs(sum), 1e-300) && m > 2) break;
  }
  return cp.cm() * cp.v() * cp.load * (L - x - 8.0 * L / (M_PI * M_PI) * sum) +
         cp.b() * cp.load * (L - x);
}

/// Normalized pressure P/P0 along a pressurized crack. zeta = (L-x)/L with the
/// driven edge at zeta = 1 (where the cosine factor vanishes and the value is
/// exactly 1) and the sealed far end at zeta = 0.
inline double crack_pressure_profile(double zeta, double Td, const SeriesParams& sp = {}) {
  double sum = 0.0;
  for (int n = 0; n < sp.max_terms; ++n) {
    const double q = (2 * n + 1);
    const double sign = (n % 2 == 0) ? -1.0 : 1.0; // (-1)^(n+1)
    const double envelope = std::exp(-q * q * (Td / 4.0) * M_PI * M_PI) / q;
    sum += sign * envelope * std::cos(q * M_PI / 2.0 * zeta);
    if (envelope < sp.tail_tol * std::max(std::abs(sum), 1e-300) && n > 2) break;
  }
  return 1.0 + 4.0 / M_PI * sum;
}

/// Sneddon half-opening of a pressurized crack of half-length l_c in an
/// infinite plane-strain medium.
inline double sneddon_opening(double x, double p, double l_c, double E, double nu) {
  if (std::abs(x) > l_c) throw ConfigError("sneddon_opening: |x| must be <= l_c");
  const double Ep = E / (1.0 - nu * nu);
  return 2.0 * p * l_c / Ep * std::sqrt(1.0 - (x / l_c) * (x / l_c));
}

/// Continuum damage of a neighborhood cut by a straight crack at distance h
/// from its center: 0.5 on the crack face, 0 at one horizon away.
inline double continuum_damage(double h, double horizon) {
  if (h < 0.0 || h > horizon) throw ConfigError("continuum_damage: h must be in [0, horizon]");
  const double r = h / horizon;
  return (std::acos(2.0 * r * r - 1.0) - 2.0 * r * std::sqrt(1.0 - r * r)) /
         (2.0 * M_PI);
}

} // namespace oracles
} // namespace hfpd

#endif
