#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "metrolab/errors.hpp"
#include "metrolab/linalg.hpp"

namespace metrolab {

// Slow barrier-crossing modes sit ~e^{-beta c N^2/4} below the fast ones, so the spectral
// propagation runs at 50 significant digits.
using mpreal = boost::multiprecision::cpp_bin_float_50;
}  // namespace metrolab

// Own traits rather than boost's eigen.hpp, which predates the members Eigen 3.4 asks for.
namespace Eigen {
template <>
struct NumTraits<metrolab::mpreal> : GenericNumTraits<metrolab::mpreal> {
  enum { IsInteger = 0, IsSigned = 1, IsComplex = 0, RequireInitialization = 1, ReadCost = 4, AddCost = 8, MulCost = 16 };
  static metrolab::mpreal dummy_precision() { return metrolab::mpreal(1e-45); }
  static int digits10() { return std::numeric_limits<metrolab::mpreal>::digits10; }
};
}  // namespace Eigen

namespace metrolab {
using MpMatrix = Eigen::Matrix<mpreal, Eigen::Dynamic, Eigen::Dynamic>;
using MpVector = Eigen::Matrix<mpreal, Eigen::Dynamic, 1>;

struct RateChainParams {
  int n = 1;
  double theta = 0.0;
  double c = 0.0;
  double beta = 1.0;
  double gamma = 1.0;
};

struct RateChain {
  RateChainParams params;
  int n_levels = 0;
  RMatrix generator;  // Q, columns sum to zero
  RVector energies;   // U(n)
  RVector stationary;
  double beta = 0.0;
  double gamma = 0.0;
};

namespace detail {

inline mpreal chain_energy(const RateChainParams& p, int k) {
  const mpreal m = mpreal(k) - mpreal(p.n) / 2;
  return mpreal(p.theta) * m + mpreal(p.c) * m * m;
}

inline mpreal fermi(const mpreal& x, double beta) {
  using boost::multiprecision::exp;
  return mpreal(1) / (mpreal(1) + exp(mpreal(beta) * x));
}

inline MpMatrix chain_generator(const RateChainParams& p) {
  const int d = p.n + 1;
  MpMatrix q = MpMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    if (k < p.n) {
      const mpreal r = mpreal(p.gamma) * (p.n - k) * fermi(chain_energy(p, k + 1) - chain_energy(p, k), p.beta);
      q(k + 1, k) += r;
      q(k, k) -= r;
    }
    if (k > 0) {
      const mpreal r = mpreal(p.gamma) * k * fermi(chain_energy(p, k - 1) - chain_energy(p, k), p.beta);
      q(k - 1, k) += r;
      q(k, k) -= r;
    }
  }
  return q;
}

// pi_n proportional to C(N,n) e^{-beta U(n)}
inline MpVector chain_stationary(const RateChainParams& p) {
  using boost::multiprecision::exp;
  using boost::multiprecision::lgamma;
  const int d = p.n + 1;
  MpVector lw(d);
  for (int k = 0; k < d; ++k) {
    lw(k) = lgamma(mpreal(p.n + 1)) - lgamma(mpreal(k + 1)) - lgamma(mpreal(p.n - k + 1)) -
            mpreal(p.beta) * chain_energy(p, k);
  }
  const mpreal top = lw.maxCoeff();
  MpVector w(d);
  for (int k = 0; k < d; ++k) w(k) = exp(lw(k) - top);
  return w / w.sum();
}

}  // namespace detail

inline RateChain build_rate_chain(int n, double theta, double c, double beta, double gamma) {
  if (n < 1) throw ContractViolation("build_rate_chain: N must be >= 1");
  if (!(gamma > 0) || !(beta > 0)) throw ContractViolation("build_rate_chain: need gamma > 0 and beta > 0");
  RateChain ch;
  ch.params = {n, theta, c, beta, gamma};
  ch.n_levels = n + 1;
  ch.beta = beta;
  ch.gamma = gamma;
  const MpMatrix q = detail::chain_generator(ch.params);
  const MpVector pi = detail::chain_stationary(ch.params);
  ch.generator = q.cast<double>();
  ch.stationary = pi.cast<double>();
  ch.energies.resize(n + 1);
  for (int k = 0; k <= n; ++k) ch.energies(k) = static_cast<double>(detail::chain_energy(ch.params, k));
  return ch;
}

// e^{Qt} p0 via the symmetric similarity transform D^{-1} Q D, D = diag(sqrt(pi)).
class RateChainPropagator {
 public:
  explicit RateChainPropagator(const RateChainParams& p) {
    using boost::multiprecision::sqrt;
    const MpMatrix q = detail::chain_generator(p);
    const MpVector pi = detail::chain_stationary(p);
    const int d = p.n + 1;
    sqrt_pi_.resize(d);
    for (int k = 0; k < d; ++k) sqrt_pi_(k) = sqrt(pi(k));
    MpMatrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = q(i, j) * sqrt_pi_(j) / sqrt_pi_(i);
    a = (a + a.transpose()).eval() / 2;
    Eigen::SelfAdjointEigenSolver<MpMatrix> es(a);
    if (es.info() != Eigen::Success) throw AccuracyError("rate chain: eigensolver did not converge");
    rates_ = es.eigenvalues();
    for (int k = 0; k < d; ++k)
      if (rates_(k) > 0) rates_(k) = 0;
    w_ = es.eigenvectors();
  }

  MpVector evolve(const MpVector& p0, double t) const {
    using boost::multiprecision::exp;
    const Index d = p0.size();
    MpVector q(d);
    for (Index k = 0; k < d; ++k) q(k) = p0(k) / sqrt_pi_(k);
    MpVector y = w_.transpose() * q;
    for (Index k = 0; k < d; ++k) y(k) *= exp(rates_(k) * mpreal(t));
    MpVector out = w_ * y;
    for (Index k = 0; k < d; ++k) {
      out(k) *= sqrt_pi_(k);
      if (out(k) < 0) out(k) = 0;
    }
    return out / out.sum();
  }

  // Second slowest rate; sets the thermalization time.
  double slowest_rate() const { return rates_.size() > 1 ? -static_cast<double>(rates_(rates_.size() - 2)) : 0.0; }

 private:
  MpVector sqrt_pi_;
  MpVector rates_;
  MpMatrix w_;
};

namespace detail {
inline MpVector check_distribution(const RVector& p0, int levels) {
  if (p0.size() != levels) throw ContractViolation("rate_chain_evolve: p0 has wrong length");
  if ((p0.array() < 0).any() || std::abs(p0.sum() - 1.0) > 1e-12) {
    throw ContractViolation("rate_chain_evolve: p0 must be nonnegative and sum to 1");
  }
  return p0.cast<mpreal>();
}
}  // namespace detail

inline std::vector<RVector> rate_chain_evolve(const RateChain& chain, const RVector& p0,
                                              const std::vector<double>& t_grid) {
  const MpVector p = detail::check_distribution(p0, chain.n_levels);
  const RateChainPropagator prop(chain.params);
  std::vector<RVector> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) out.push_back(prop.evolve(p, t).cast<double>());
  return out;
}

inline RVector uniform_distribution(int levels) { return RVector::Constant(levels, 1.0 / levels); }

struct ChainFisherPoint {
  double t;
  double fisher;
  double energy;
};

// Classical Fisher information of p_n(t) w.r.t. theta, central difference over two chains.
inline std::vector<ChainFisherPoint> rate_chain_fisher(const RateChainParams& base, const RVector& p0,
                                                       const std::vector<double>& t_grid, double fd_step = 1e-6) {
  const MpVector p = detail::check_distribution(p0, base.n + 1);
  RateChainParams lo = base, hi = base;
  lo.theta -= fd_step;
  hi.theta += fd_step;
  const RateChainPropagator p_mid(base), p_lo(lo), p_hi(hi);
  std::vector<ChainFisherPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const MpVector m = p_mid.evolve(p, t);
    const MpVector dp = (p_hi.evolve(p, t) - p_lo.evolve(p, t)) / mpreal(2 * fd_step);
    mpreal f = 0, e = 0;
    for (Index k = 0; k < m.size(); ++k) {
      e += m(k) * detail::chain_energy(base, static_cast<int>(k));
      if (m(k) >= mpreal(1e-10)) f += dp(k) * dp(k) / m(k);
    }
    out.push_back({t, static_cast<double>(f), static_cast<double>(e)});
  }
  return out;
}

}  // namespace metrolab
