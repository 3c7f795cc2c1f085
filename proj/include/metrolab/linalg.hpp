#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "metrolab/errors.hpp"

namespace metrolab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cplx I_unit{0.0, 1.0};

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline CMatrix hermitian_part(const CMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  return a * b - b * a;
}

class HermitianOperator {
 public:
  explicit HermitianOperator(CMatrix m, std::string label = {})
      : m_(std::move(m)), label_(std::move(label)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) {
      throw ContractViolation("HermitianOperator: matrix must be square with dim >= 1");
    }
    const double tol = 1e-12 * max_abs(m_);
    double worst = -1.0;
    Index wi = 0, wj = 0;
    for (Index j = 0; j < m_.cols(); ++j) {
      for (Index i = 0; i <= j; ++i) {
        const double dev = std::abs(m_(i, j) - std::conj(m_(j, i)));
        if (dev > worst) {
          worst = dev;
          wi = i;
          wj = j;
        }
      }
    }
    if (worst > tol) {
      std::ostringstream os;
      os << "HermitianOperator" << (label_.empty() ? "" : " '" + label_ + "'")
         << ": not Hermitian, worst pair (" << wi << "," << wj << ") deviates by " << worst
         << " (tolerance " << tol << ")";
      throw ContractViolation(os.str());
    }
  }

  // Symmetrize first; for results of arithmetic that are Hermitian up to rounding.
  static HermitianOperator hermitized(const CMatrix& m, std::string label = {}) {
    return HermitianOperator(hermitian_part(m), std::move(label));
  }

  static HermitianOperator zero(Index dim, std::string label = {}) {
    return HermitianOperator(CMatrix::Zero(dim, dim), std::move(label));
  }

  static HermitianOperator identity(Index dim, std::string label = {}) {
    return HermitianOperator(CMatrix::Identity(dim, dim), std::move(label));
  }

  static HermitianOperator diagonal(const RVector& d, std::string label = {}) {
    return HermitianOperator(d.cast<cplx>().asDiagonal().toDenseMatrix(), std::move(label));
  }

  const CMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  const std::string& label() const { return label_; }

  HermitianOperator with_label(std::string label) const {
    HermitianOperator out = *this;
    out.label_ = std::move(label);
    return out;
  }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    check_same_dim(a, b);
    return hermitized(a.m_ + b.m_);
  }
  friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    check_same_dim(a, b);
    return hermitized(a.m_ - b.m_);
  }
  friend HermitianOperator operator*(double s, const HermitianOperator& a) {
    return HermitianOperator(s * a.m_, a.label_);
  }
  // Product of Hermitian operators, symmetrized: (AB + BA)/2. Exact for commuting or equal factors.
  friend HermitianOperator jordan(const HermitianOperator& a, const HermitianOperator& b) {
    check_same_dim(a, b);
    return hermitized(a.m_ * b.m_);
  }

 private:
  static void check_same_dim(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) {
      throw ContractViolation("HermitianOperator: dimension mismatch " + std::to_string(a.dim()) +
                              " vs " + std::to_string(b.dim()));
    }
  }

  CMatrix m_;
  std::string label_;
};

class QuantumState {
 public:
  enum class Kind { pure, mixed };

  static QuantumState pure(CVector v) {
    if (v.size() < 1) throw ContractViolation("QuantumState: empty vector");
    const double n = v.norm();
    if (std::abs(n - 1.0) > 1e-10) {
      throw ContractViolation("QuantumState: pure state norm " + std::to_string(n) + " != 1");
    }
    QuantumState s;
    s.kind_ = Kind::pure;
    s.vec_ = std::move(v);
    return s;
  }

  // Normalizes instead of checking; for vectors assembled from formulas.
  static QuantumState pure_normalized(const CVector& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw ContractViolation("QuantumState: zero vector");
    return pure(v / n);
  }

  static QuantumState mixed(CMatrix rho, double positivity_tol = 1e-10) {
    if (rho.rows() != rho.cols() || rho.rows() < 1) {
      throw ContractViolation("QuantumState: density matrix must be square");
    }
    const double herm = max_abs(rho - rho.adjoint());
    if (herm > 1e-10) {
      throw ContractViolation("QuantumState: density matrix not Hermitian (deviation " +
                              std::to_string(herm) + ")");
    }
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-10) {
      throw ContractViolation("QuantumState: trace " + std::to_string(tr) + " != 1");
    }
    rho = hermitian_part(rho);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -positivity_tol) {
      throw ContractViolation("QuantumState: negative eigenvalue " +
                              std::to_string(es.eigenvalues()(0)));
    }
    QuantumState s;
    s.kind_ = Kind::mixed;
    s.mat_ = std::move(rho);
    return s;
  }

  Kind kind() const { return kind_; }
  bool is_pure() const { return kind_ == Kind::pure; }
  Index dim() const { return is_pure() ? vec_.size() : mat_.rows(); }

  const CVector& vector() const {
    if (!is_pure()) throw ContractViolation("QuantumState: vector() on a mixed state");
    return vec_;
  }

  CMatrix density() const { return is_pure() ? CMatrix(vec_ * vec_.adjoint()) : mat_; }

  double expectation(const HermitianOperator& op) const {
    check_dim(op.dim());
    if (is_pure()) return vec_.dot(op.matrix() * vec_).real();
    return (mat_ * op.matrix()).trace().real();
  }

  double variance(const HermitianOperator& op) const {
    const double m1 = expectation(op);
    double m2;
    if (is_pure()) {
      m2 = (op.matrix() * vec_).squaredNorm();
    } else {
      m2 = (mat_ * op.matrix() * op.matrix()).trace().real();
    }
    return std::max(0.0, m2 - m1 * m1);
  }

  void check_dim(Index d) const {
    if (d != dim()) {
      throw ContractViolation("QuantumState: dimension mismatch " + std::to_string(dim()) +
                              " vs " + std::to_string(d));
    }
  }

 private:
  QuantumState() = default;
  Kind kind_ = Kind::pure;
  CVector vec_;
  CMatrix mat_;
};

struct SpectralDecomposition {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns
  Index source_dim = 0;
};

inline void fix_phases(CMatrix& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    const double top = v.col(j).cwiseAbs().maxCoeff();
    Index k = 0;
    while (std::abs(v(k, j)) < top * (1.0 - 1e-12)) ++k;
    const cplx ph = std::conj(v(k, j)) / std::abs(v(k, j));
    v.col(j) *= ph;
    v(k, j) = std::abs(v(k, j));
  }
}

inline SpectralDecomposition eig_hermitian(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw AccuracyError("eig_hermitian: eigensolver did not converge");
  SpectralDecomposition out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  out.source_dim = h.dim();
  fix_phases(out.eigenvectors);
  return out;
}

// V f(lambda) V^dagger for a complex-valued spectral function.
template <class F>
CMatrix spectral_function(const SpectralDecomposition& s, F&& f) {
  CVector d(s.eigenvalues.size());
  for (Index i = 0; i < d.size(); ++i) d(i) = f(s.eigenvalues(i));
  return s.eigenvectors * d.asDiagonal() * s.eigenvectors.adjoint();
}

inline double spectral_range(const SpectralDecomposition& s) {
  return s.eigenvalues(s.eigenvalues.size() - 1) - s.eigenvalues(0);
}

// The pseudo-norm lambda_max - lambda_min.
inline double spectral_range(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(h.dim() - 1) - es.eigenvalues()(0);
}

class EigenspacePartition {
 public:
  EigenspacePartition(const SpectralDecomposition& s, std::vector<std::pair<Index, Index>> ranges)
      : basis_(s.eigenvectors), ranges_(std::move(ranges)) {
    energies_.resize(static_cast<Index>(ranges_.size()));
    for (std::size_t k = 0; k < ranges_.size(); ++k) {
      energies_(static_cast<Index>(k)) =
          s.eigenvalues.segment(ranges_[k].first, ranges_[k].second).mean();
    }
  }

  std::size_t size() const { return ranges_.size(); }
  Index dim() const { return basis_.rows(); }
  const RVector& group_energies() const { return energies_; }
  const CMatrix& basis() const { return basis_; }

  // Eigenvalue positions of group k; groups are contiguous runs of the sorted spectrum.
  std::vector<Index> group(std::size_t k) const {
    std::vector<Index> idx(static_cast<std::size_t>(ranges_[k].second));
    for (Index i = 0; i < ranges_[k].second; ++i) idx[static_cast<std::size_t>(i)] = ranges_[k].first + i;
    return idx;
  }
  std::pair<Index, Index> range(std::size_t k) const { return ranges_[k]; }

  auto block(std::size_t k) const { return basis_.middleCols(ranges_[k].first, ranges_[k].second); }

  HermitianOperator projector(std::size_t k) const {
    return HermitianOperator::hermitized(block(k) * block(k).adjoint());
  }

  std::vector<HermitianOperator> projectors() const {
    std::vector<HermitianOperator> out;
    out.reserve(size());
    for (std::size_t k = 0; k < size(); ++k) out.push_back(projector(k));
    return out;
  }

  // X expressed in the eigenbasis with all cross-group blocks removed.
  CMatrix pinched_in_basis(const CMatrix& x) const {
    CMatrix y = basis_.adjoint() * x * basis_;
    CMatrix out = CMatrix::Zero(y.rows(), y.cols());
    for (const auto& [start, len] : ranges_) {
      out.block(start, start, len, len) = y.block(start, start, len, len);
    }
    return out;
  }

  CMatrix pinch_matrix(const CMatrix& x) const {
    if (x.rows() != dim() || x.cols() != dim()) {
      throw ContractViolation("pinch: dimension mismatch");
    }
    return basis_ * pinched_in_basis(x) * basis_.adjoint();
  }

 private:
  CMatrix basis_;
  std::vector<std::pair<Index, Index>> ranges_;
  RVector energies_;
};

struct GroupingTolerance {
  double abs = 1e-12;
  double rel = 1e-10;
};

inline EigenspacePartition group_eigenspaces(const SpectralDecomposition& s,
                                             GroupingTolerance tol = {}) {
  if (tol.abs < 0 || tol.rel < 0) throw ContractViolation("group_eigenspaces: negative tolerance");
  const Index n = s.eigenvalues.size();
  const double thresh = tol.abs + tol.rel * spectral_range(s);
  std::vector<std::pair<Index, Index>> ranges;
  Index start = 0;
  for (Index i = 1; i <= n; ++i) {
    if (i == n || s.eigenvalues(i) - s.eigenvalues(i - 1) > thresh) {
      ranges.emplace_back(start, i - start);
      start = i;
    }
  }
  return EigenspacePartition(s, std::move(ranges));
}

inline HermitianOperator pinch(const HermitianOperator& x, const EigenspacePartition& p) {
  return HermitianOperator::hermitized(p.pinch_matrix(x.matrix()), x.label());
}

inline QuantumState pinch(const QuantumState& s, const EigenspacePartition& p) {
  return QuantumState::mixed(hermitian_part(p.pinch_matrix(s.density())));
}

inline double min_gap(const SpectralDecomposition&, const EigenspacePartition& p) {
  const RVector& e = p.group_energies();
  if (e.size() < 2) return std::numeric_limits<double>::infinity();
  double g = std::numeric_limits<double>::infinity();
  for (Index k = 1; k < e.size(); ++k) g = std::min(g, e(k) - e(k - 1));
  return g;
}

// e^{-i t H}
inline CMatrix propagator(const SpectralDecomposition& s, double t) {
  return spectral_function(s, [t](double e) { return std::exp(-I_unit * (e * t)); });
}

inline double trace_distance(const CMatrix& a, const CMatrix& b) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a - b), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double min_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace metrolab
