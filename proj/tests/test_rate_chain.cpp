#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "metrolab/rate_chain.hpp"

using namespace metrolab;

namespace {

double energy(int n, int k, double theta, double c) {
  const double m = k - n / 2.0;
  return theta * m + c * m * m;
}

double binom(int n, int k) { return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)); }

// pi from the ratio pi_{k+1}/pi_k = rate(k -> k+1) / rate(k+1 -> k), telescoped from k = 0.
RVector telescoped(int n, double theta, double c, double beta) {
  auto f = [&](double x) { return 1.0 / (1.0 + std::exp(beta * x)); };
  RVector lw(n + 1);
  lw(0) = 0;
  for (int k = 0; k < n; ++k) {
    const double du = energy(n, k + 1, theta, c) - energy(n, k, theta, c);
    lw(k + 1) = lw(k) + std::log((n - k) * f(du)) - std::log((k + 1) * f(-du));
  }
  const RVector w = (lw.array() - lw.maxCoeff()).exp();
  return w / w.sum();
}

}  // namespace

TEST(RateChain, GeneratorIsStochastic) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 20; ++i) {
    const RateChain ch = build_rate_chain(1 + i % 9, u(rng), u(rng), 0.1 + std::abs(u(rng)), 0.5 + std::abs(u(rng)));
    const RMatrix& q = ch.generator;
    for (Index j = 0; j < q.cols(); ++j) {
      EXPECT_NEAR(q.col(j).sum(), 0.0, 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()));
      for (Index k = 0; k < q.rows(); ++k) {
        if (k != j) {
          EXPECT_GE(q(k, j), 0.0);
        }
      }
    }
    EXPECT_LE((q * ch.stationary).cwiseAbs().maxCoeff(), 1e-12 * q.cwiseAbs().maxCoeff());
  }
}

TEST(RateChain, StationaryIsDetailedBalance) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 20; ++i) {
    const int n = 1 + i % 10;
    const double theta = u(rng), c = u(rng), beta = 0.1 + std::abs(u(rng));
    const RateChain ch = build_rate_chain(n, theta, c, beta, 1.0);
    RVector gibbs(n + 1);
    for (int k = 0; k <= n; ++k) gibbs(k) = binom(n, k) * std::exp(-beta * energy(n, k, theta, c));
    gibbs /= gibbs.sum();
    EXPECT_LE((ch.stationary - gibbs).cwiseAbs().maxCoeff(), 1e-12) << i;
    EXPECT_LE((ch.stationary - telescoped(n, theta, c, beta)).cwiseAbs().maxCoeff(), 1e-12) << i;
  }
}

TEST(RateChain, FlatEnergiesGiveBinomial) {
  const RateChain ch = build_rate_chain(6, 0, 0, 1, 1);
  for (int k = 0; k <= 6; ++k) EXPECT_NEAR(ch.stationary(k), binom(6, k) / 64.0, 1e-15);
}

TEST(RateChain, StrongQuadraticCoupling) {
  // c = -50 concentrates on the stretched states, c = +50 on m = 0 (see README)
  const RateChain ferro = build_rate_chain(2, 0, -50, 1, 1);
  EXPECT_NEAR(ferro.stationary(0), 0.5, std::exp(-25.0));
  EXPECT_NEAR(ferro.stationary(2), 0.5, std::exp(-25.0));
  const RateChain lit = build_rate_chain(2, 0, 50, 1, 1);
  EXPECT_NEAR(lit.stationary(1), 1.0, std::exp(-25.0));
}

TEST(RateChain, Contracts) {
  EXPECT_THROW(build_rate_chain(0, 0, 0, 1, 1), ContractViolation);
  EXPECT_THROW(build_rate_chain(2, 0, 0, 0, 1), ContractViolation);
  EXPECT_THROW(build_rate_chain(2, 0, 0, 1, -1), ContractViolation);
  const RateChain ch = build_rate_chain(2, 0, 1, 1, 1);
  EXPECT_THROW(rate_chain_evolve(ch, (RVector(3) << 0.5, 0.6, -0.1).finished(), {1.0}), ContractViolation);
  EXPECT_THROW(rate_chain_evolve(ch, (RVector(3) << 0.5, 0.4, 0.2).finished(), {1.0}), ContractViolation);
  EXPECT_THROW(rate_chain_evolve(ch, (RVector(2) << 0.5, 0.5).finished(), {1.0}), ContractViolation);
}

TEST(RateChainEvolve, EndpointsAndConservation) {
  const RateChain ch = build_rate_chain(5, 0.3, -0.7, 1.2, 1.0);
  RVector p0 = RVector::Zero(6);
  p0(1) = 0.25;
  p0(4) = 0.75;
  const auto ps = rate_chain_evolve(ch, p0, {0.0, 0.1, 1.0, 10.0, 1e6});
  EXPECT_LE((ps.front() - p0).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((ps.back() - ch.stationary).cwiseAbs().maxCoeff(), 1e-9);
  for (const RVector& p : ps) {
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
  }
}

TEST(RateChainEvolve, MatchesSmallStepIntegration) {
  // forward Euler with a tiny step as an independent oracle at short times
  const RateChain ch = build_rate_chain(4, 0.2, -1.0, 1.0, 0.8);
  const RVector p0 = uniform_distribution(5);
  const double t = 0.7;
  const int steps = 700000;
  RVector p = p0;
  for (int i = 0; i < steps; ++i) p += (t / steps) * (ch.generator * p);
  EXPECT_LE((rate_chain_evolve(ch, p0, {t}).front() - p).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(RateChainEvolve, RandomDrawsConverge) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 20; ++i) {
    const int n = 1 + static_cast<int>(u(rng) * 10);
    const RateChainParams p{n, 0.0, -1 + 2 * u(rng), 0.2 + 1.8 * u(rng), 1.0};
    const RateChain ch = build_rate_chain(p.n, p.theta, p.c, p.beta, p.gamma);
    const RateChainPropagator prop(p);
    RVector p0 = RVector::Zero(n + 1);
    p0(static_cast<Index>(u(rng) * (n + 1)) % (n + 1)) = 1.0;
    const double t = 60.0 / prop.slowest_rate();
    const RVector pt = rate_chain_evolve(ch, p0, {t}).front();
    EXPECT_NEAR(pt.sum(), 1.0, 1e-12);
    EXPECT_LE((pt - ch.stationary).cwiseAbs().maxCoeff(), 1e-9) << "draw " << i << " N=" << n;
  }
}

TEST(RateChainFisher, PlateauReachesThermalBound) {
  for (int n : {2, 3, 4}) {
    const RateChainParams p{n, 0.0, -10.0, 1.0, 1.0};
    const auto pts = rate_chain_fisher(p, uniform_distribution(n + 1), {1e25});
    EXPECT_NEAR(pts.back().fisher / (n * n / 4.0), 1.0, 0.02) << n;
  }
  // the stationary Fisher is beta^2 Var(m) under pi; at c = +10 that variance is tiny
  const auto lit = rate_chain_fisher({2, 0.0, 10.0, 1.0, 1.0}, uniform_distribution(3), {1e25});
  EXPECT_LT(lit.back().fisher, 1e-3);
}

TEST(RateChainFisher, StationaryFisherIsEnergyVariance) {
  const RateChainParams p{3, 0.0, -0.8, 1.5, 1.0};
  const RateChain ch = build_rate_chain(3, 0, -0.8, 1.5, 1);
  double mean = 0, sq = 0;
  for (int k = 0; k <= 3; ++k) {
    const double m = k - 1.5;
    mean += ch.stationary(k) * m;
    sq += ch.stationary(k) * m * m;
  }
  const auto pts = rate_chain_fisher(p, uniform_distribution(4), {1e6});
  EXPECT_NEAR(pts.back().fisher, 1.5 * 1.5 * (sq - mean * mean), 1e-6);
}
