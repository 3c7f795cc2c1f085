#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "metrolab/errors.hpp"
#include "metrolab/linalg.hpp"

namespace metrolab {

enum class BoundKind { dynamical, dephasing_asymptotic, dephasing_finite_d, thermal, low_temperature };

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::dynamical: return "dynamical";
    case BoundKind::dephasing_asymptotic: return "dephasing_asymptotic";
    case BoundKind::dephasing_finite_d: return "dephasing_finite_d";
    case BoundKind::thermal: return "thermal";
    case BoundKind::low_temperature: return "low_temperature";
  }
  return "?";
}

struct BoundReport {
  BoundKind kind;
  double value;
  std::map<std::string, double> inputs;
  std::string caveat;
};

// Bounds take the pseudo-norm ||H_S|| = lambda_max - lambda_min directly; the
// HermitianOperator overloads compute it first.

inline BoundReport dynamical_bound(double hs_range, double t) {
  if (t < 0) throw ContractViolation("dynamical_bound: t must be >= 0");
  return {BoundKind::dynamical, t * t * hs_range * hs_range, {{"hs_range", hs_range}, {"t", t}}, {}};
}

inline BoundReport dynamical_bound(const HermitianOperator& hs, double t) {
  return dynamical_bound(spectral_range(hs), t);
}

// Sum of 1/j^2 for j = 1..n.
inline double harmonic2(long n) {
  double s = 0.0;
  for (long j = n; j >= 1; --j) s += 1.0 / (static_cast<double>(j) * static_cast<double>(j));
  return s;
}

inline double dephasing_s(long d) {
  if (d < 1) throw ContractViolation("dephasing_s: d must be >= 1");
  if (d % 2 == 1) return 2.0 * harmonic2((d - 1) / 2);
  return harmonic2(d / 2) + harmonic2(d / 2 - 1);
}

inline BoundReport dephasing_bound(double hs_range, double e, std::optional<long> d = std::nullopt) {
  if (!(e > 0)) throw ContractViolation("dephasing_bound: E must be > 0");
  const double pi = std::acos(-1.0);
  if (!d) {
    return {BoundKind::dephasing_asymptotic, (3.0 + pi * pi) / 3.0 * hs_range * hs_range / (e * e),
            {{"hs_range", hs_range}, {"E", e}}, {}};
  }
  const double s = dephasing_s(*d);
  const double hinf = 0.5 * hs_range;  // after centering the spectrum on zero
  return {BoundKind::dephasing_finite_d, 4.0 * (1.0 + s) * hinf * hinf / (e * e),
          {{"hs_range", hs_range}, {"E", e}, {"d", static_cast<double>(*d)}, {"s_d", s}}, {}};
}

inline BoundReport dephasing_bound(const HermitianOperator& hs, double e, std::optional<long> d = std::nullopt) {
  return dephasing_bound(spectral_range(hs), e, d);
}

inline BoundReport thermal_bound(double hs_range, double beta) {
  if (!(beta > 0)) throw ContractViolation("thermal_bound: beta must be > 0");
  return {BoundKind::thermal, beta * beta * hs_range * hs_range / 4.0, {{"hs_range", hs_range}, {"beta", beta}}, {}};
}

inline BoundReport thermal_bound(const HermitianOperator& hs, double beta) {
  return thermal_bound(spectral_range(hs), beta);
}

inline BoundReport low_temperature_bound(double hs_range, double gap) {
  if (!(gap > 0)) throw ContractViolation("low_temperature_bound: gap must be > 0");
  return {BoundKind::low_temperature, hs_range * hs_range / (gap * gap), {{"hs_range", hs_range}, {"gap", gap}},
          "plus a correction of order exp(-beta * gap) with unspecified constant"};
}

inline BoundReport low_temperature_bound(const HermitianOperator& hs, double gap) {
  return low_temperature_bound(spectral_range(hs), gap);
}

// (Delta theta)^2 >= 1/(mu F)
inline double cramer_rao(double f, long mu) {
  if (!(f > 0)) throw ContractViolation("cramer_rao: F must be > 0");
  if (mu < 1) throw ContractViolation("cramer_rao: mu must be >= 1");
  return 1.0 / (static_cast<double>(mu) * f);
}

}  // namespace metrolab
