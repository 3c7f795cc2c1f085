#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "metrolab/linalg.hpp"
#include "metrolab/spin.hpp"

namespace metrolab {

enum class BasisKind { dicke, full_hilbert, abstract };

inline const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::dicke: return "dicke";
    case BasisKind::full_hilbert: return "full_hilbert";
    case BasisKind::abstract: return "abstract";
  }
  return "?";
}

// theta -> theta * signal + control
struct HamiltonianFamily {
  HermitianOperator signal;
  HermitianOperator control;
  BasisKind basis_kind = BasisKind::abstract;
  std::optional<int> n_spins;
  std::map<std::string, double> params;

  HamiltonianFamily(HermitianOperator s, HermitianOperator c, BasisKind kind = BasisKind::abstract,
                    std::optional<int> n = std::nullopt, std::map<std::string, double> p = {})
      : signal(std::move(s)), control(std::move(c)), basis_kind(kind), n_spins(n), params(std::move(p)) {
    if (signal.dim() != control.dim()) {
      throw ContractViolation("HamiltonianFamily: signal dim " + std::to_string(signal.dim()) +
                              " != control dim " + std::to_string(control.dim()));
    }
  }

  Index dim() const { return signal.dim(); }

  HermitianOperator at(double theta) const {
    return HermitianOperator::hermitized(theta * signal.matrix() + control.matrix(), "H_theta");
  }

  HamiltonianFamily with_control(HermitianOperator c) const {
    HamiltonianFamily f = *this;
    f.control = std::move(c);
    return f;
  }
};

inline HamiltonianFamily build_spin_squeezing(int n, double a, double b, double c) {
  const DickeSpace ds = collective_ops(n);
  const CMatrix& x = ds.Sx.matrix();
  const CMatrix& y = ds.Sy.matrix();
  const CMatrix& z = ds.Sz.matrix();
  CMatrix hc = a * (x * x) + b * (y * y) + c * (z * z);
  return HamiltonianFamily(ds.Sz, HermitianOperator::hermitized(hc, "a Sx^2 + b Sy^2 + c Sz^2"), BasisKind::dicke, n,
                           {{"a", a}, {"b", b}, {"c", c}});
}

// Central site 0 steers the other N-1 spins: alpha |0><0| x 1 + beta |1><1| x Sx^{(N-1)}.
inline HamiltonianFamily build_central_spin(int n, double alpha = std::sqrt(2.0), double beta = 1.0) {
  if (n < 2 || n > kMaxFullHilbertSpins) {
    throw ContractViolation("build_central_spin: N=" + std::to_string(n) + " outside [2, 14]");
  }
  const Index d = Index{1} << n;
  const Index half = d / 2;
  std::vector<int> bath;
  for (int i = 1; i < n; ++i) bath.push_back(i);
  const HermitianOperator sx_bath = collective_full(n, pauli::x(), bath);
  CMatrix hc = CMatrix::Zero(d, d);
  hc.topLeftCorner(half, half) = alpha * CMatrix::Identity(half, half);
  // Site 0 is the leading tensor factor, so |1><1| x A is the lower-right block of A's bath part.
  hc.bottomRightCorner(half, half) = beta * sx_bath.matrix().bottomRightCorner(half, half);
  return HamiltonianFamily(collective_full(n, pauli::z(), all_sites(n), "Sz"),
                           HermitianOperator::hermitized(hc, "central spin control"), BasisKind::full_hilbert, n,
                           {{"alpha", alpha}, {"beta", beta}});
}

// Control whose theta=0 eigenvectors rotate the extremal pair of H_S by pi/8, eigenvalues +1/-1,
// with distinct integers 2, 3, ... on the eigenvectors of H_S between the extremes.
inline HamiltonianFamily build_result2_control(const HermitianOperator& hs) {
  const SpectralDecomposition s = eig_hermitian(hs);
  const Index d = hs.dim();
  if (d < 2) throw ContractViolation("build_result2_control: dim must be >= 2");
  const CVector up = s.eigenvectors.col(d - 1);
  const CVector down = s.eigenvectors.col(0);
  const double pi = std::acos(-1.0);
  const CVector ne = std::cos(pi / 8) * up + std::sin(pi / 8) * down;
  const CVector nw = -std::sin(pi / 8) * up + std::cos(pi / 8) * down;
  CMatrix hc = ne * ne.adjoint() - nw * nw.adjoint();
  for (Index j = 1; j + 1 < d; ++j) {
    const CVector v = s.eigenvectors.col(j);
    hc += static_cast<double>(j + 1) * (v * v.adjoint());
  }
  return HamiltonianFamily(hs, HermitianOperator::hermitized(hc, "pi/8 control"), BasisKind::abstract, std::nullopt,
                           {{"lam_min", s.eigenvalues(0)}, {"lam_max", s.eigenvalues(d - 1)}});
}

inline HamiltonianFamily build_result2_control(double lam_min, double lam_max, int dim_perp) {
  if (!(lam_max > lam_min)) throw ContractViolation("build_result2_control: need lam_max > lam_min");
  if (dim_perp < 0) throw ContractViolation("build_result2_control: dim_perp must be >= 0");
  RVector diag(2 + dim_perp);
  diag(0) = lam_max;
  diag(1) = lam_min;
  for (int j = 0; j < dim_perp; ++j) diag(2 + j) = lam_min + (lam_max - lam_min) * (j + 1) / (dim_perp + 1);
  const HermitianOperator hs = HermitianOperator::diagonal(diag, "H_S");
  // Built directly in the given basis so |Phi_up> = e0 and |Phi_down> = e1.
  const Index d = diag.size();
  const double pi = std::acos(-1.0);
  CVector ne = CVector::Zero(d), nw = CVector::Zero(d);
  ne(0) = std::cos(pi / 8);
  ne(1) = std::sin(pi / 8);
  nw(0) = -std::sin(pi / 8);
  nw(1) = std::cos(pi / 8);
  CMatrix hc = ne * ne.adjoint() - nw * nw.adjoint();
  for (int j = 0; j < dim_perp; ++j) hc(2 + j, 2 + j) = 2.0 + j;
  return HamiltonianFamily(hs, HermitianOperator::hermitized(hc, "pi/8 control"), BasisKind::abstract, std::nullopt,
                           {{"lam_min", lam_min}, {"lam_max", lam_max}, {"dim_perp", dim_perp}});
}

inline HamiltonianFamily build_qutrit_dephasing_control(double e, double lam_abs) {
  if (!(e > 0) || !(lam_abs > 0)) throw ContractViolation("build_qutrit_dephasing_control: need E > 0, lam_abs > 0");
  RVector sd(3);
  sd << lam_abs, 0.0, -lam_abs;
  CMatrix hc(3, 3);
  hc << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  hc *= e / std::sqrt(2.0);
  return HamiltonianFamily(HermitianOperator::diagonal(sd, "H_S"), HermitianOperator(hc, "qutrit control"),
                           BasisKind::abstract, std::nullopt, {{"E", e}, {"lam_abs", lam_abs}});
}

struct GibbsSpectrum {
  SpectralDecomposition spec;
  RVector populations;
};

inline GibbsSpectrum gibbs_spectrum(const HermitianOperator& h, double beta) {
  if (beta < 0) throw ContractViolation("gibbs_state: beta must be >= 0");
  GibbsSpectrum g{eig_hermitian(h), {}};
  const RVector& e = g.spec.eigenvalues;
  g.populations = (-(beta * (e.array() - e(0)))).exp();
  g.populations /= g.populations.sum();
  return g;
}

inline QuantumState gibbs_state(const HermitianOperator& h, double beta) {
  const GibbsSpectrum g = gibbs_spectrum(h, beta);
  const CMatrix& v = g.spec.eigenvectors;
  return QuantumState::mixed(hermitian_part(v * g.populations.cast<cplx>().asDiagonal() * v.adjoint()));
}

}  // namespace metrolab
