#pragma once

#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "metrolab/errors.hpp"

namespace metrolab::lab {

struct InverseSqrtFit {
  double k1, k2, k3, rms;
  double at(double n) const { return k1 + k2 / std::sqrt(n) + k3 / n; }
};

// Least squares in the basis {1, N^{-1/2}, N^{-1}} through the normal equations.
inline InverseSqrtFit fit_inverse_sqrt_regression(const std::vector<std::pair<double, double>>& pts) {
  std::set<double> distinct;
  for (const auto& [n, y] : pts) {
    if (!(n > 0)) throw ContractViolation("fit_inverse_sqrt_regression: N must be positive");
    distinct.insert(n);
  }
  if (pts.size() < 3 || distinct.size() < 3) {
    throw ContractViolation("fit_inverse_sqrt_regression: need at least 3 points with distinct N");
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double n = pts[i].first;
    a.row(static_cast<Eigen::Index>(i)) << 1.0, 1.0 / std::sqrt(n), 1.0 / n;
    y(static_cast<Eigen::Index>(i)) = pts[i].second;
  }
  const Eigen::Matrix3d g = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(g);
  const Eigen::Vector3d w = es.eigenvalues();
  if (!(w(0) > 1e-14 * w(2))) throw ContractViolation("fit_inverse_sqrt_regression: rank-deficient design");
  const Eigen::Vector3d rhs = es.eigenvectors().transpose() * (a.transpose() * y);
  const Eigen::Vector3d k = es.eigenvectors() * rhs.cwiseQuotient(w);
  const double rms = std::sqrt((a * k - y).squaredNorm() / static_cast<double>(pts.size()));
  return {k(0), k(1), k(2), rms};
}

struct PowerLawFit {
  double exponent, prefactor;
};

// y = A x^p by least squares on logs.
inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) throw ContractViolation("fit_power_law: need at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    if (!(x > 0) || !(y > 0)) throw ContractViolation("fit_power_law: values must be positive");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(pts.size());
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0)) throw ContractViolation("fit_power_law: degenerate abscissae");
  const double p = (n * sxy - sx * sy) / den;
  return {p, std::exp((sy - p * sx) / n)};
}

// First grid time after which |F/F_long - 1| < tol holds for a full decade; F_long is the last sample.
// Returns a negative value if no such time exists on the grid.
inline double time_to_plateau(const std::vector<double>& t, const std::vector<double>& f, double tol = 0.1) {
  if (t.size() != f.size() || t.empty()) throw ContractViolation("time_to_plateau: bad series");
  const double flong = f.back();
  std::vector<bool> ok(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) ok[i] = std::abs(f[i] / flong - 1.0) < tol;
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::size_t j = i;
    bool good = true;
    while (j < t.size() && t[j] <= 10.0 * t[i] * (1 + 1e-12)) {
      if (!ok[j]) {
        good = false;
        break;
      }
      ++j;
    }
    if (good && j < t.size()) return t[i];
  }
  return -1.0;
}

inline std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0) || !(hi > lo) || per_decade < 1) throw ContractViolation("log_grid: bad range");
  const double l0 = std::log10(lo), l1 = std::log10(hi);
  const int n = static_cast<int>(std::lround((l1 - l0) * per_decade));
  std::vector<double> g;
  for (int i = 0; i <= n; ++i) g.push_back(std::pow(10.0, l0 + (l1 - l0) * i / n));
  return g;
}

}  // namespace metrolab::lab
