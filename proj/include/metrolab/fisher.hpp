#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metrolab/linalg.hpp"
#include "metrolab/models.hpp"

namespace metrolab {

enum class FisherMethod {
  pure_exact,
  pinched_asymptotic,
  mixed_spectral,
  thermal_variance,
  diagonal_perturbative,
  cfi_projective,
  error_propagation,
  oat_closed_form
};

inline const char* to_string(FisherMethod m) {
  switch (m) {
    case FisherMethod::pure_exact: return "pure_exact";
    case FisherMethod::pinched_asymptotic: return "pinched_asymptotic";
    case FisherMethod::mixed_spectral: return "mixed_spectral";
    case FisherMethod::thermal_variance: return "thermal_variance";
    case FisherMethod::diagonal_perturbative: return "diagonal_perturbative";
    case FisherMethod::cfi_projective: return "cfi_projective";
    case FisherMethod::error_propagation: return "error_propagation";
    case FisherMethod::oat_closed_form: return "oat_closed_form";
  }
  return "?";
}

struct FisherComponents {
  double ext = 0.0;
  double intr = 0.0;  // "int" is a keyword
};

struct FisherReport {
  double value = 0.0;
  std::optional<FisherComponents> components;
  FisherMethod method = FisherMethod::mixed_spectral;
  std::map<std::string, double> diagnostics;
};

inline constexpr double kPairCutoff = 1e-12;
inline constexpr double kOutcomeCutoff = 1e-10;

using StateFamily = std::function<QuantumState(double)>;

// (1 - e^{-ix})/(ix), also the time-average filter.
inline cplx phase_filter(double x) {
  if (std::abs(x) < 1e-6) return cplx(1.0 - x * x / 6.0, -x / 2.0 + x * x * x / 24.0);
  return (1.0 - std::exp(-I_unit * x)) / (I_unit * x);
}

inline double default_fd_step(const HamiltonianFamily& fam) {
  return 1e-5 * std::max(1.0, spectral_range(fam.control)) / std::max(1.0, spectral_range(fam.signal));
}

inline FisherReport qfi_pure_dynamical(const HamiltonianFamily& fam, double theta, const QuantumState& psi0,
                                       double t) {
  if (t < 0) throw ContractViolation("qfi_pure_dynamical: t must be >= 0");
  psi0.check_dim(fam.dim());
  const SpectralDecomposition s = eig_hermitian(fam.at(theta));
  const CMatrix& v = s.eigenvectors;
  const RVector& e = s.eigenvalues;
  CMatrix heff = v.adjoint() * fam.signal.matrix() * v;
  for (Index j = 0; j < heff.rows(); ++j)
    for (Index k = 0; k < heff.cols(); ++k) heff(j, k) *= phase_filter(t * (e(j) - e(k)));
  CVector c = v.adjoint() * psi0.vector();
  for (Index j = 0; j < c.size(); ++j) c(j) *= std::exp(-I_unit * (e(j) * t));
  const CVector hc = heff * c;
  const double m1 = c.dot(hc).real();
  const double var = std::max(0.0, hc.squaredNorm() - m1 * m1);
  FisherReport r;
  r.value = 4.0 * t * t * var;
  r.method = FisherMethod::pure_exact;
  r.diagnostics["var_heff"] = var;
  return r;
}

// Returns Var(H_P) on psi0; the dynamical QFI is 4 t^2 times this plus O(t).
inline FisherReport qfi_pinched_asymptotic(const HamiltonianFamily& fam, double theta, const QuantumState& psi0,
                                           GroupingTolerance tol = {}) {
  psi0.check_dim(fam.dim());
  const SpectralDecomposition s = eig_hermitian(fam.at(theta));
  const EigenspacePartition part = group_eigenspaces(s, tol);
  const HermitianOperator hp = pinch(fam.signal, part);
  FisherReport r;
  r.value = psi0.variance(hp);
  r.method = FisherMethod::pinched_asymptotic;
  r.diagnostics["groups"] = static_cast<double>(part.size());
  return r;
}

inline FisherReport qfi_mixed(const CMatrix& rho, const CMatrix& drho) {
  if (rho.rows() != drho.rows() || rho.cols() != drho.cols()) {
    throw ContractViolation("qfi_mixed: dimension mismatch");
  }
  const double tr = std::abs(drho.trace());
  if (tr > 1e-9 * std::max(1.0, max_abs(drho))) throw ContractViolation("qfi_mixed: trace(drho) = " + std::to_string(tr) + " != 0");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(rho));
  const RVector p = es.eigenvalues().cwiseMax(0.0);
  const CMatrix d = es.eigenvectors().adjoint() * hermitian_part(drho) * es.eigenvectors();
  double f = 0.0, dropped = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    for (Index j = 0; j < p.size(); ++j) {
      const double w = std::norm(d(i, j));
      const double s = p(i) + p(j);
      if (s < kPairCutoff) dropped += w;
      else f += 2.0 * w / s;
    }
  }
  FisherReport r;
  r.value = f;
  r.method = FisherMethod::mixed_spectral;
  r.diagnostics["dropped_weight"] = dropped;
  return r;
}

inline FisherReport qfi_mixed(const QuantumState& rho, const HermitianOperator& drho) {
  rho.check_dim(drho.dim());
  return qfi_mixed(rho.density(), drho.matrix());
}

inline FisherReport qfi_thermal(const HamiltonianFamily& fam, double theta, double beta) {
  if (!(beta > 0)) throw ContractViolation("qfi_thermal: beta must be > 0");
  const GibbsSpectrum g = gibbs_spectrum(fam.at(theta), beta);
  const RVector& e = g.spec.eigenvalues;
  const RVector& p = g.populations;
  // log p computed from energies so that underflowed populations keep finite logs.
  const double logz = std::log(((-(beta * (e.array() - e(0)))).exp()).sum());
  const CMatrix hs = g.spec.eigenvectors.adjoint() * fam.signal.matrix() * g.spec.eigenvectors;
  double second = 0.0, mean = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    mean += p(i) * hs(i, i).real();
    for (Index j = 0; j < p.size(); ++j) {
      const double w = std::norm(hs(i, j));
      if (w == 0.0) continue;
      double jij;
      if (std::abs(p(i) - p(j)) <= 1e-12 * std::max(p(i), p(j))) {
        jij = p(i);
      } else {
        const double li = -beta * (e(i) - e(0)) - logz;
        const double lj = -beta * (e(j) - e(0)) - logz;
        const double dp = p(i) - p(j);
        jij = 2.0 * dp * dp / ((li - lj) * (li - lj) * (p(i) + p(j)));
      }
      second += w * jij;
    }
  }
  FisherReport r;
  r.value = std::max(0.0, beta * beta * (second - mean * mean));
  r.method = FisherMethod::thermal_variance;
  return r;
}

struct DiagonalEnsembleParts {
  CMatrix basis;     // eigenvectors of H_theta
  CMatrix rho;       // pinched state, eigenbasis
  CMatrix drho_ext;  // -i[S, rho], eigenbasis
  CMatrix drho_int;  // i pinch([S, psi]), eigenbasis
  CMatrix generator; // S, eigenbasis
  CVector psi;       // psi0, eigenbasis
  std::vector<std::pair<Index, Index>> groups;
};

inline DiagonalEnsembleParts diagonal_ensemble_parts(const HamiltonianFamily& fam, double theta,
                                                     const QuantumState& psi0, GroupingTolerance tol = {}) {
  psi0.check_dim(fam.dim());
  const SpectralDecomposition s = eig_hermitian(fam.at(theta));
  const EigenspacePartition part = group_eigenspaces(s, tol);
  if (part.size() < 2) {
    throw DegenerateEncodingError("qfi_diagonal_ensemble: H_theta has a single eigenspace, rotation generator undefined");
  }
  const Index d = fam.dim();
  std::vector<std::size_t> gid(static_cast<std::size_t>(d));
  DiagonalEnsembleParts out;
  for (std::size_t k = 0; k < part.size(); ++k) {
    out.groups.push_back(part.range(k));
    for (Index i : part.group(k)) gid[static_cast<std::size_t>(i)] = k;
  }
  const RVector& eg = part.group_energies();
  const CMatrix hs = s.eigenvectors.adjoint() * fam.signal.matrix() * s.eigenvectors;
  CMatrix sg = CMatrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index l = 0; l < d; ++l) {
      const std::size_t gj = gid[static_cast<std::size_t>(j)], gl = gid[static_cast<std::size_t>(l)];
      if (gj != gl) sg(j, l) = I_unit * hs(j, l) / (eg(static_cast<Index>(gl)) - eg(static_cast<Index>(gj)));
    }
  }
  const CVector c = s.eigenvectors.adjoint() * psi0.vector();
  const CMatrix proj = c * c.adjoint();
  auto block_diag = [&](const CMatrix& x) {
    CMatrix y = CMatrix::Zero(d, d);
    for (const auto& [st, len] : out.groups) y.block(st, st, len, len) = x.block(st, st, len, len);
    return y;
  };
  out.basis = s.eigenvectors;
  out.rho = block_diag(proj);
  out.drho_ext = -I_unit * commutator(sg, out.rho);
  out.drho_int = I_unit * block_diag(commutator(sg, proj));
  out.generator = sg;
  out.psi = c;
  return out;
}

// Asymptotic (infinite-time dephased) QFI, split into rotation (ext) and population (int) parts.
inline FisherReport qfi_diagonal_ensemble(const HamiltonianFamily& fam, double theta, const QuantumState& psi0,
                                          GroupingTolerance tol = {}) {
  const DiagonalEnsembleParts dp = diagonal_ensemble_parts(fam, theta, psi0, tol);
  const FisherReport ext = qfi_mixed(dp.rho, dp.drho_ext);
  const FisherReport intr = qfi_mixed(dp.rho, dp.drho_int);
  // Blocks with zero weight acquire population theta^2 ||Pi_k S psi||^2; their Fisher
  // contribution 4 ||Pi_k S psi||^2 is invisible to the first-order SLD sum.
  const CVector spsi = dp.generator * dp.psi;
  double rank_change = 0.0;
  for (const auto& [st, len] : dp.groups) {
    const double pk = dp.psi.segment(st, len).squaredNorm();
    if (pk < kPairCutoff) rank_change += 4.0 * spsi.segment(st, len).squaredNorm();
  }
  FisherReport r;
  r.components = FisherComponents{ext.value, intr.value + rank_change};
  r.value = r.components->ext + r.components->intr;
  r.method = FisherMethod::diagonal_perturbative;
  r.diagnostics["rank_change"] = rank_change;
  r.diagnostics["dropped_weight"] = ext.diagnostics.at("dropped_weight") + intr.diagnostics.at("dropped_weight");
  r.diagnostics["groups"] = static_cast<double>(dp.groups.size());
  return r;
}

// Eigenspace projectors of an observable, i.e. the projective measurement it defines.
inline std::vector<HermitianOperator> measurement_projectors(const HermitianOperator& obs, GroupingTolerance tol = {}) {
  return group_eigenspaces(eig_hermitian(obs), tol).projectors();
}

namespace detail {
inline RVector outcome_probabilities(const std::vector<HermitianOperator>& proj, const QuantumState& rho) {
  RVector p(static_cast<Index>(proj.size()));
  for (std::size_t x = 0; x < proj.size(); ++x) p(static_cast<Index>(x)) = rho.expectation(proj[x]);
  return p;
}

inline double cfi_from(const RVector& p, const RVector& dp, double& excluded) {
  double f = 0.0;
  excluded = 0.0;
  for (Index x = 0; x < p.size(); ++x) {
    if (p(x) < kOutcomeCutoff) excluded += std::max(0.0, p(x));
    else f += dp(x) * dp(x) / p(x);
  }
  return f;
}
}  // namespace detail

inline FisherReport cfi_projective(const std::vector<HermitianOperator>& projectors, const StateFamily& family,
                                   double theta, double fd_step) {
  if (projectors.empty()) throw ContractViolation("cfi_projective: empty projector set");
  if (!(fd_step > 0)) throw ContractViolation("cfi_projective: fd_step must be > 0");
  const Index d = projectors.front().dim();
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& p : projectors) sum += p.matrix();
  const double dev = max_abs(sum - CMatrix::Identity(d, d));
  if (dev > 1e-9) throw ContractViolation("cfi_projective: projectors do not sum to identity (" + std::to_string(dev) + ")");

  const RVector p0 = detail::outcome_probabilities(projectors, family(theta));
  auto derivative = [&](double h) {
    return RVector((detail::outcome_probabilities(projectors, family(theta + h)) -
                    detail::outcome_probabilities(projectors, family(theta - h))) / (2.0 * h));
  };
  double excluded = 0.0, excluded_half = 0.0;
  const double f = detail::cfi_from(p0, derivative(fd_step), excluded);
  const double fh = detail::cfi_from(p0, derivative(0.5 * fd_step), excluded_half);
  FisherReport r;
  r.value = f;
  r.method = FisherMethod::cfi_projective;
  r.diagnostics["excluded_mass"] = excluded;
  r.diagnostics["fd_step"] = fd_step;
  r.diagnostics["fd_halving_rel_change"] = std::abs(f - fh) / std::max(std::abs(f), 1e-300);
  return r;
}

// QFI of a state family by central differences of the state plus the spectral SLD sum.
inline FisherReport qfi_finite_difference(const StateFamily& family, double theta, double fd_step) {
  if (!(fd_step > 0)) throw ContractViolation("qfi_finite_difference: fd_step must be > 0");
  const CMatrix rho = family(theta).density();
  auto drho = [&](double h) {
    CMatrix d = (family(theta + h).density() - family(theta - h).density()) / (2.0 * h);
    // both states have unit trace; what remains is rounding amplified by 1/h
    d -= (d.trace() / static_cast<double>(d.rows())) * CMatrix::Identity(d.rows(), d.cols());
    return d;
  };
  FisherReport r = qfi_mixed(rho, drho(fd_step));
  const FisherReport rh = qfi_mixed(rho, drho(0.5 * fd_step));
  r.diagnostics["fd_step"] = fd_step;
  r.diagnostics["fd_halving_rel_change"] = std::abs(r.value - rh.value) / std::max(std::abs(r.value), 1e-300);
  return r;
}

// Single-shot 1/(Delta theta)^2 = (d<O>/dtheta)^2 / Var(O).
inline double error_propagation_precision(const HermitianOperator& obs, const StateFamily& family, double theta,
                                          double fd_step) {
  if (!(fd_step > 0)) throw ContractViolation("error_propagation_precision: fd_step must be > 0");
  const QuantumState rho = family(theta);
  const double slope = (family(theta + fd_step).expectation(obs) - family(theta - fd_step).expectation(obs)) /
                       (2.0 * fd_step);
  if (std::abs(slope) < 1e-14) throw FlatSignalError("error_propagation_precision: d<O>/dtheta vanishes");
  return slope * slope / rho.variance(obs);
}

namespace detail {
inline double central_binomial_odd(int k) {  // C(2k+1, k)
  return std::exp(std::lgamma(2.0 * k + 2.0) - std::lgamma(k + 1.0) - std::lgamma(k + 2.0));
}
inline int oat_k(int n) {
  if (n < 3 || n % 2 == 0) throw ContractViolation("oat_closed_form: N must be odd and >= 3");
  return (n - 1) / 2;
}
}  // namespace detail

// t^2 (k(k+2) - 1/2) 4^{-k} C(2k+1, k) with N = 2k+1, as published.
inline FisherReport oat_closed_form(int n, double t) {
  const int k = detail::oat_k(n);
  FisherReport r;
  r.value = t * t * (k * (k + 2.0) - 0.5) * std::pow(4.0, -k) * detail::central_binomial_odd(k);
  r.method = FisherMethod::oat_closed_form;
  r.diagnostics["asymptote"] = t * t * std::pow(n, 1.5) / std::sqrt(2.0 * std::acos(-1.0));
  return r;
}

// Large-a limit evaluated exactly. Sz couples the degenerate Sx^2 doublet m_x = +-1/2 with
// matrix element (S+1/2)/2, giving t^2 (k+1)^2 4^{-k} C(2k+1, k).
inline FisherReport oat_exact_form(int n, double t) {
  const int k = detail::oat_k(n);
  FisherReport r;
  r.value = t * t * (k + 1.0) * (k + 1.0) * std::pow(4.0, -k) * detail::central_binomial_odd(k);
  r.method = FisherMethod::oat_closed_form;
  r.diagnostics["asymptote"] = t * t * std::pow(n, 1.5) / std::sqrt(2.0 * std::acos(-1.0));
  return r;
}

}  // namespace metrolab
