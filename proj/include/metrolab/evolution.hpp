#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "metrolab/fisher.hpp"
#include "metrolab/linalg.hpp"
#include "metrolab/models.hpp"

namespace metrolab {

inline QuantumState evolve_unitary(const HamiltonianFamily& fam, double theta, const QuantumState& psi0, double t) {
  psi0.check_dim(fam.dim());
  const CMatrix u = propagator(eig_hermitian(fam.at(theta)), t);
  if (psi0.is_pure()) return QuantumState::pure_normalized(u * psi0.vector());
  return QuantumState::mixed(hermitian_part(u * psi0.density() * u.adjoint()));
}

// (1/T) int_0^T U psi U^dagger dt, evaluated elementwise in the eigenbasis of H_theta.
inline QuantumState time_averaged_state(const HamiltonianFamily& fam, double theta, const QuantumState& psi0,
                                        double T) {
  if (!(T > 0)) throw ContractViolation("time_averaged_state: T must be > 0");
  psi0.check_dim(fam.dim());
  const SpectralDecomposition s = eig_hermitian(fam.at(theta));
  const CVector c = s.eigenvectors.adjoint() * psi0.vector();
  CMatrix r = c * c.adjoint();
  for (Index j = 0; j < r.rows(); ++j)
    for (Index k = 0; k < r.cols(); ++k)
      if (j != k) r(j, k) *= phase_filter(T * (s.eigenvalues(j) - s.eigenvalues(k)));
  CMatrix rho = hermitian_part(s.eigenvectors * r * s.eigenvectors.adjoint());
  rho /= rho.trace().real();
  return QuantumState::mixed(std::move(rho));
}

struct Dissipator {
  double rate;
  CMatrix op;
};

struct LindbladModel {
  HermitianOperator hamiltonian;
  std::vector<Dissipator> dissipators;

  LindbladModel(HermitianOperator h, std::vector<Dissipator> ds) : hamiltonian(std::move(h)), dissipators(std::move(ds)) {
    for (const auto& d : dissipators) {
      if (d.rate < 0) throw ContractViolation("LindbladModel: negative rate");
      if (d.op.rows() != hamiltonian.dim() || d.op.cols() != hamiltonian.dim()) {
        throw ContractViolation("LindbladModel: dissipator dimension mismatch");
      }
    }
  }

  // 0.05 / (||H||_max + sum gamma ||L||_max^2)
  double max_step() const {
    double scale = max_abs(hamiltonian.matrix());
    for (const auto& d : dissipators) scale += d.rate * std::pow(max_abs(d.op), 2);
    return scale > 0 ? 0.05 / scale : 0.05;
  }
};

struct LindbladOptions {
  bool halving_check = true;
  double drift_tol = 1e-6;
  double step = 0.0;        // 0: use the model's step rule
  int max_halvings = 10;    // refinements tried before giving up
};

struct LindbladRun {
  std::vector<QuantumState> states;
  double step = 0.0;
  double max_trace_correction = 0.0;
  double max_hermiticity_correction = 0.0;
  double halving_drift = 0.0;
};

namespace detail {

struct LindbladRhs {
  CMatrix k;  // -iH - 1/2 sum gamma L^dag L
  std::vector<std::pair<double, CMatrix>> jumps;

  explicit LindbladRhs(const LindbladModel& m) {
    k = -I_unit * m.hamiltonian.matrix();
    for (const auto& d : m.dissipators) {
      if (d.rate == 0) continue;
      k -= 0.5 * d.rate * (d.op.adjoint() * d.op);
      jumps.emplace_back(d.rate, d.op);
    }
  }

  CMatrix operator()(const CMatrix& rho) const {
    CMatrix kr = k * rho;
    CMatrix out = kr + kr.adjoint();
    for (const auto& [g, l] : jumps) out.noalias() += g * (l * rho * l.adjoint());
    return out;
  }
};

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Liouvillian acting on column-major vec(rho): vec(A X B) = (B^T kron A) vec(X).
inline CMatrix liouvillian(const LindbladRhs& f) {
  const Index d = f.k.rows();
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix l = kron(id, f.k) + kron(f.k.conjugate(), id);
  for (const auto& [g, op] : f.jumps) l += g * kron(op.conjugate(), op);
  return l;
}

// Dimension up to which the RK4 step is applied as a superoperator power.
inline constexpr Index kSuperopMaxDim = 16;

inline std::vector<CMatrix> rk4_grid(const LindbladRhs& f, const CMatrix& rho0, const std::vector<double>& grid,
                                     double hmax) {
  std::vector<CMatrix> out;
  out.reserve(grid.size());
  const Index d = rho0.rows();
  const bool superop = d <= kSuperopMaxDim;
  CMatrix liou;
  if (superop) liou = liouvillian(f);
  CMatrix rho = rho0;
  double t = 0.0;
  for (double target : grid) {
    const double span = target - t;
    if (span > 0) {
      const auto n = static_cast<long>(std::ceil(span / hmax - 1e-9));
      const double h = span / static_cast<double>(n);
      if (superop) {
        // For a linear autonomous ODE one RK4 step is the degree-4 Taylor polynomial of e^{hL};
        // n steps are that matrix to the n-th power.
        const CMatrix hl = h * liou;
        CMatrix step = CMatrix::Identity(d * d, d * d);
        CMatrix term = step;
        for (int k = 1; k <= 4; ++k) {
          term = (term * hl) / static_cast<double>(k);
          step += term;
        }
        CVector v = Eigen::Map<const CVector>(rho.data(), d * d);
        for (long e = n; e > 0; e >>= 1) {
          if (e & 1) v = step * v;
          if (e > 1) step = step * step;
        }
        rho = Eigen::Map<const CMatrix>(v.data(), d, d);
      } else {
        for (long i = 0; i < n; ++i) {
          const CMatrix k1 = f(rho);
          const CMatrix k2 = f(rho + 0.5 * h * k1);
          const CMatrix k3 = f(rho + 0.5 * h * k2);
          const CMatrix k4 = f(rho + h * k3);
          rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
      }
    }
    t = target;
    out.push_back(rho);
  }
  return out;
}

}  // namespace detail

// Fixed-step RK4 on the density matrix; outputs re-Hermitized and trace-renormalized.
// With the halving check on, the step is halved until runs at h and h/2 agree to drift_tol
// (trace distance at the last grid time) and the h/2 run is returned.
inline LindbladRun lindblad_evolve(const LindbladModel& model, const QuantumState& rho0,
                                   const std::vector<double>& t_grid, LindbladOptions opt = {}) {
  rho0.check_dim(model.hamiltonian.dim());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0 || (i > 0 && t_grid[i] < t_grid[i - 1])) {
      throw ContractViolation("lindblad_evolve: t_grid must be nonnegative and ascending");
    }
  }
  const detail::LindbladRhs rhs(model);
  LindbladRun run;
  double h = opt.step > 0 ? std::min(opt.step, model.max_step()) : model.max_step();
  std::vector<CMatrix> raw = detail::rk4_grid(rhs, rho0.density(), t_grid, h);
  if (opt.halving_check && !t_grid.empty()) {
    for (int k = 0;; ++k) {
      std::vector<CMatrix> fine = detail::rk4_grid(rhs, rho0.density(), t_grid, 0.5 * h);
      run.halving_drift = trace_distance(raw.back(), fine.back());
      raw = std::move(fine);
      h *= 0.5;
      if (run.halving_drift <= opt.drift_tol) break;
      if (k + 1 >= opt.max_halvings) {
        throw AccuracyError("lindblad_evolve: step-halving drift " + std::to_string(run.halving_drift) +
                            " exceeds " + std::to_string(opt.drift_tol) + " at step " + std::to_string(2 * h) +
                            "; retry with step <= " + std::to_string(0.5 * h));
      }
    }
  }
  run.step = h;
  run.states.reserve(raw.size());
  for (const CMatrix& r : raw) {
    CMatrix m = hermitian_part(r);
    run.max_hermiticity_correction = std::max(run.max_hermiticity_correction, max_abs(m - r));
    const double tr = m.trace().real();
    run.max_trace_correction = std::max(run.max_trace_correction, std::abs(tr - 1.0));
    m /= tr;
    // RK4 is not completely positive; near-pure states pick up negative eigenvalues of the size of the step error
    run.states.push_back(QuantumState::mixed(std::move(m), std::max(1e-8, opt.drift_tol)));
  }
  return run;
}

struct LinearResponse {
  CMatrix rho;   // state at t
  CMatrix drho;  // d rho / d theta at t
};

namespace detail {
// int_0^t e^{a (t-s)} e^{b s} ds
inline cplx duhamel(cplx a, cplx b, double t) {
  const cplx z = (b - a) * t;
  if (std::abs(z) < 1e-6) return t * std::exp(0.5 * (a + b) * t) * (1.0 + z * z / 24.0);
  return (std::exp(b * t) - std::exp(a * t)) / (b - a);
}

inline CVector diagonal_of(const CMatrix& m, const char* what) {
  const CMatrix off = m - CMatrix(m.diagonal().asDiagonal());
  if (max_abs(off) > 1e-14 * std::max(1.0, max_abs(m))) {
    throw ContractViolation(std::string("lindblad_diagonal_response: ") + what + " is not diagonal");
  }
  return m.diagonal();
}
}  // namespace detail

// Exact rho(t) and first-order theta response for H = H0 + theta V at theta = 0 when H0 and every
// jump operator are diagonal: the unperturbed Lindbladian then acts entrywise with rates lambda_xy.
inline LinearResponse lindblad_diagonal_response(const LindbladModel& model0, const HermitianOperator& v,
                                                 const QuantumState& rho0, double t) {
  if (t < 0) throw ContractViolation("lindblad_diagonal_response: t must be >= 0");
  const Index d = model0.hamiltonian.dim();
  rho0.check_dim(d);
  const CVector e = detail::diagonal_of(model0.hamiltonian.matrix(), "hamiltonian");
  CMatrix lam(d, d);
  for (Index x = 0; x < d; ++x)
    for (Index y = 0; y < d; ++y) lam(x, y) = -I_unit * (e(x) - std::conj(e(y)));
  for (const auto& dis : model0.dissipators) {
    const CVector l = detail::diagonal_of(dis.op, "dissipator");
    for (Index x = 0; x < d; ++x)
      for (Index y = 0; y < d; ++y)
        lam(x, y) += dis.rate * (l(x) * std::conj(l(y)) - 0.5 * (std::norm(l(x)) + std::norm(l(y))));
  }
  const CMatrix r0 = rho0.density();
  const CMatrix& vm = v.matrix();
  LinearResponse out{CMatrix(d, d), CMatrix::Zero(d, d)};
  for (Index x = 0; x < d; ++x)
    for (Index y = 0; y < d; ++y) out.rho(x, y) = r0(x, y) * std::exp(lam(x, y) * t);
  for (Index x = 0; x < d; ++x) {
    for (Index y = 0; y < d; ++y) {
      cplx acc = 0.0;
      for (Index z = 0; z < d; ++z) {
        if (vm(x, z) != cplx(0.0) && r0(z, y) != cplx(0.0)) acc += vm(x, z) * r0(z, y) * detail::duhamel(lam(x, y), lam(z, y), t);
        if (r0(x, z) != cplx(0.0) && vm(z, y) != cplx(0.0)) acc -= r0(x, z) * vm(z, y) * detail::duhamel(lam(x, y), lam(x, z), t);
      }
      out.drho(x, y) = -I_unit * acc;
    }
  }
  out.rho = hermitian_part(out.rho);
  out.drho = hermitian_part(out.drho);
  return out;
}

}  // namespace metrolab
