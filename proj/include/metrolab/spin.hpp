#pragma once

#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "metrolab/linalg.hpp"

namespace metrolab {

inline constexpr int kMaxFullHilbertSpins = 14;

namespace pauli {
inline HermitianOperator x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return HermitianOperator(m, "sigma_x");
}
inline HermitianOperator y() {
  CMatrix m(2, 2);
  m << 0, -I_unit, I_unit, 0;
  return HermitianOperator(m, "sigma_y");
}
inline HermitianOperator z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return HermitianOperator(m, "sigma_z");
}
}  // namespace pauli

struct DickeSpace {
  int n_spins;
  Index dim;
  double S;
  HermitianOperator Sx, Sy, Sz;
  CMatrix s_plus, s_minus;

  double m_of(Index k) const { return S - static_cast<double>(k); }
};

// Maximal-spin block, basis |S,m> with m = S, S-1, ..., -S.
inline DickeSpace collective_ops(int n) {
  if (n < 1) throw ContractViolation("collective_ops: N must be >= 1");
  const Index d = n + 1;
  const double S = 0.5 * n;
  CMatrix sp = CMatrix::Zero(d, d);
  RVector mz(d);
  for (Index k = 0; k < d; ++k) {
    const double m = S - static_cast<double>(k);
    mz(k) = m;
    if (k > 0) sp(k - 1, k) = std::sqrt(S * (S + 1) - m * (m + 1));
  }
  CMatrix sm = sp.adjoint();
  return DickeSpace{n,
                    d,
                    S,
                    HermitianOperator::hermitized(0.5 * (sp + sm), "Sx"),
                    HermitianOperator::hermitized(-0.5 * I_unit * (sp - sm), "Sy"),
                    HermitianOperator::diagonal(mz, "Sz"),
                    sp,
                    sm};
}

enum class Axis { z, x };

// Binomial-amplitude expansion with eta = -tan(theta/2) e^{-i phi}: amplitude of |S, S-k>
// is sqrt(C(N,k)) eta^k / (1+|eta|^2)^S, the expansion of (cos(theta/2)|0> - e^{-i phi} sin(theta/2)|1>)^N.
// Axis::x places the same amplitudes on the Sx eigenbasis; the result is in the Sz Dicke basis.
inline QuantumState spin_coherent_state(int n, double theta, double phi, Axis axis = Axis::z) {
  if (n < 1) throw ContractViolation("spin_coherent_state: N must be >= 1");
  const cplx c = std::cos(0.5 * theta);
  const cplx s = -std::exp(-I_unit * phi) * std::sin(0.5 * theta);
  CVector amp(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double lbin = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    double logmag = 0.5 * lbin;
    double ph = 0.0;
    bool zero = false;
    if (n - k > 0) {
      if (std::abs(c) == 0.0) zero = true;
      else {
        logmag += (n - k) * std::log(std::abs(c));
        ph += (n - k) * std::arg(c);
      }
    }
    if (k > 0) {
      if (std::abs(s) == 0.0) zero = true;
      else {
        logmag += k * std::log(std::abs(s));
        ph += k * std::arg(s);
      }
    }
    amp(k) = zero ? cplx(0.0) : std::polar(std::exp(logmag), ph);
  }
  if (axis == Axis::x) {
    const DickeSpace ds = collective_ops(n);
    const SpectralDecomposition sy = eig_hermitian(ds.Sy);
    const double angle = std::acos(-1.0) / 2;
    // exp(-i pi/2 Sy) rotates the z axis onto x, carrying |S,m_z> onto |S,m_x>.
    const CMatrix rot = spectral_function(sy, [angle](double e) { return std::exp(-I_unit * (angle * e)); });
    amp = rot * amp;
  }
  return QuantumState::pure_normalized(amp);
}

// Kronecker product over N sites, site 0 leftmost (most significant bit).
inline HermitianOperator tensor_operator(int n, const std::vector<std::pair<int, HermitianOperator>>& site_ops,
                                         std::string label = {}) {
  if (n < 1 || n > kMaxFullHilbertSpins) {
    throw ContractViolation("tensor_operator: N=" + std::to_string(n) + " outside [1, " +
                            std::to_string(kMaxFullHilbertSpins) + "]");
  }
  std::vector<const HermitianOperator*> at(static_cast<std::size_t>(n), nullptr);
  for (const auto& [site, op] : site_ops) {
    if (site < 0 || site >= n) throw ContractViolation("tensor_operator: bad site index " + std::to_string(site));
    if (at[static_cast<std::size_t>(site)]) {
      throw ContractViolation("tensor_operator: duplicate site index " + std::to_string(site));
    }
    if (op.dim() != 2) throw ContractViolation("tensor_operator: site operators must be 2x2");
    at[static_cast<std::size_t>(site)] = &op;
  }
  CMatrix out = CMatrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    const CMatrix f = at[static_cast<std::size_t>(i)] ? at[static_cast<std::size_t>(i)]->matrix()
                                                      : CMatrix(CMatrix::Identity(2, 2));
    CMatrix next(out.rows() * 2, out.cols() * 2);
    for (Index r = 0; r < out.rows(); ++r)
      for (Index q = 0; q < out.cols(); ++q) next.block(2 * r, 2 * q, 2, 2) = out(r, q) * f;
    out = std::move(next);
  }
  return HermitianOperator::hermitized(out, std::move(label));
}

// (1/2) sum_i sigma^{(i)} over the listed sites, in the full 2^N space.
inline HermitianOperator collective_full(int n, const HermitianOperator& pauli_op, const std::vector<int>& sites,
                                         std::string label = {}) {
  const Index d = Index{1} << n;
  CMatrix acc = CMatrix::Zero(d, d);
  for (int s : sites) acc += 0.5 * tensor_operator(n, {{s, pauli_op}}).matrix();
  return HermitianOperator::hermitized(acc, std::move(label));
}

inline std::vector<int> all_sites(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

inline QuantumState product_state(const std::vector<CVector>& factors) {
  CVector out = CVector::Ones(1);
  for (const auto& f : factors) {
    CVector next(out.size() * f.size());
    for (Index i = 0; i < out.size(); ++i) next.segment(i * f.size(), f.size()) = out(i) * f;
    out = std::move(next);
  }
  return QuantumState::pure_normalized(out);
}

inline QuantumState product_state(int n, const CVector& single) {
  if (n < 1 || n > kMaxFullHilbertSpins) throw ContractViolation("product_state: N out of range");
  return product_state(std::vector<CVector>(static_cast<std::size_t>(n), single));
}

namespace qubit {
inline CVector up() { return (CVector(2) << 1, 0).finished(); }
inline CVector down() { return (CVector(2) << 0, 1).finished(); }
inline CVector plus_x() { return (CVector(2) << 1, 1).finished() / std::sqrt(2.0); }
inline CVector minus_x() { return (CVector(2) << 1, -1).finished() / std::sqrt(2.0); }
inline CVector plus_y() { return (CVector(2) << 1, I_unit).finished() / std::sqrt(2.0); }
inline CVector minus_y() { return (CVector(2) << 1, -I_unit).finished() / std::sqrt(2.0); }
}  // namespace qubit

// Named stretch states in the Dicke basis.
inline QuantumState dicke_product(int n, const std::string& dir) {
  const double pi = std::acos(-1.0);
  if (dir == "+z") return spin_coherent_state(n, 0.0, 0.0);
  if (dir == "-z") return spin_coherent_state(n, pi, 0.0);
  if (dir == "+x") return spin_coherent_state(n, pi / 2, pi);
  if (dir == "-x") return spin_coherent_state(n, pi / 2, 0.0);
  if (dir == "+y") return spin_coherent_state(n, pi / 2, pi / 2);
  if (dir == "-y") return spin_coherent_state(n, pi / 2, -pi / 2);
  throw ContractViolation("dicke_product: unknown direction '" + dir + "'");
}

}  // namespace metrolab
