#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "metrolab/evolution.hpp"
#include "metrolab/fisher.hpp"
#include "metrolab/models.hpp"
#include "metrolab/spin.hpp"

using namespace metrolab;

namespace {

CMatrix random_herm(Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  CMatrix m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return scale * (m + m.adjoint()) / 2.0;
}

QuantumState random_psi(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(d);
  for (Index i = 0; i < d; ++i) v(i) = cplx(g(rng), g(rng));
  return QuantumState::pure_normalized(v);
}

// Pure-state QFI 4(<d psi|d psi> - |<psi|d psi>|^2) with d psi from a five-point stencil.
double pure_fd_qfi(const std::function<CVector(double)>& psi, double th, double h) {
  const CVector p = psi(th);
  const CVector d = (psi(th - 2 * h) - 8.0 * psi(th - h) + 8.0 * psi(th + h) - psi(th + 2 * h)) / (12 * h);
  return 4 * (d.squaredNorm() - std::norm(p.dot(d)));
}

// Dephased state of the family at theta, built directly from the partition of H_theta.
QuantumState dephased(const HamiltonianFamily& f, double th, const QuantumState& psi) {
  return pinch(psi, group_eigenspaces(eig_hermitian(f.at(th))));
}

}  // namespace

TEST(PhaseFilter, LimitsAndZeros) {
  EXPECT_NEAR(std::abs(phase_filter(0.0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(phase_filter(2 * M_PI)), 0.0, 1e-15);
  for (double x : {1e-7, 5e-7, 2e-6}) {
    const cplx exact = (1.0 - std::exp(-I_unit * x)) / (I_unit * x);
    EXPECT_NEAR(std::abs(phase_filter(x) - exact), 0.0, 1e-9);
  }
}

TEST(PureDynamical, ShotNoiseForIndependentSpins) {
  for (int n = 1; n <= 4; ++n) {
    const HamiltonianFamily f = build_spin_squeezing(n, 0, 0, 0);
    for (double t : {0.5, 3.0}) {
      EXPECT_NEAR(qfi_pure_dynamical(f, 0.0, dicke_product(n, "+x"), t).value, t * t * n, 1e-9 * t * t * n);
    }
    EXPECT_EQ(qfi_pure_dynamical(f, 0.0, dicke_product(n, "+x"), 0.0).value, 0.0);
  }
}

TEST(PureDynamical, MatchesFiniteDifferenceOracle) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const Index d = 2 + rep % 6;
    const HamiltonianFamily f(HermitianOperator(random_herm(d, rng)), HermitianOperator(random_herm(d, rng, 2.0)));
    const QuantumState psi = random_psi(d, rng);
    const double t = 0.3 + rep * 0.4, th = 0.1 * rep;
    const auto fam = [&](double x) {
      return CVector(propagator(eig_hermitian(f.at(x)), t) * psi.vector());
    };
    const double want = pure_fd_qfi(fam, th, 1e-4);
    EXPECT_NEAR(qfi_pure_dynamical(f, th, psi, t).value, want, 1e-6 * std::max(1.0, want)) << rep;
  }
}

TEST(PureDynamical, OneAxisTwistingN3) {
  const HamiltonianFamily f = build_spin_squeezing(3, 100, 0, 0);
  const double v = qfi_pure_dynamical(f, 0.0, dicke_product(3, "+y"), 1000).value / 1e6;
  EXPECT_NEAR(v, oat_exact_form(3, 1.0).value, 0.01 * v);
}

TEST(PureDynamical, LateTimeResidualIsSubQuadratic) {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 5; ++rep) {
    const Index d = 3 + rep;
    const HamiltonianFamily f(HermitianOperator(random_herm(d, rng)), HermitianOperator(random_herm(d, rng, 3.0)));
    const QuantumState psi = random_psi(d, rng);
    const double v = qfi_pinched_asymptotic(f, 0.0, psi).value;
    double early = 0, late = 0;
    for (double t = 1e2; t <= 1e4 * 1.0001; t *= std::pow(10.0, 0.1)) {
      const double r = std::abs(qfi_pure_dynamical(f, 0.0, psi, t).value - 4 * t * t * v) / t;
      (t < 3.1e2 ? early : late) = std::max(t < 3.1e2 ? early : late, r);
    }
    // |F - 4 t^2 Var(H_P)| = O(t): the coefficient does not grow over two decades
    EXPECT_LE(late, 3 * early + 1e-6) << rep;
  }
}

TEST(PinchedAsymptotic, CentralSpinAndEigenstates) {
  const HamiltonianFamily cs = build_central_spin(4);
  std::vector<CVector> fac{qubit::plus_x(), qubit::up(), qubit::up(), qubit::up()};
  EXPECT_NEAR(qfi_pinched_asymptotic(cs, 0.0, product_state(fac)).value, 25.0 / 16, 1e-9);
  const HamiltonianFamily f = build_spin_squeezing(3, 0, 0, 0);
  EXPECT_NEAR(qfi_pinched_asymptotic(f, 0.0, dicke_product(3, "-z")).value, 0.0, 1e-14);
  const HamiltonianFamily r2 = build_result2_control(-1, 1, 0);
  const QuantumState down = QuantumState::pure_normalized(eig_hermitian(r2.signal).eigenvectors.col(0));
  EXPECT_NEAR(qfi_pinched_asymptotic(r2, 0.0, down).value, 0.25, 1e-12);
  EXPECT_NEAR(qfi_pure_dynamical(r2, 0.0, down, 1e4).value / 1e8, 4 * 0.25, 2e-3);
}

TEST(Mixed, HandExamples) {
  // rho = I/2 + theta sigma_z: populations 1/2 +- theta, classical Fisher 2 (1/(1/2)) = 4
  const CMatrix half = CMatrix::Identity(2, 2) / 2.0;
  EXPECT_NEAR(qfi_mixed(half, pauli::z().matrix()).value, 4.0, 1e-14);
  EXPECT_NEAR(qfi_mixed(half, 0.5 * pauli::z().matrix()).value, 1.0, 1e-14);
  EXPECT_EQ(qfi_mixed(half, CMatrix::Zero(2, 2)).value, 0.0);
  CMatrix rho = CMatrix::Zero(2, 2);
  rho(0, 0) = 1;
  const CMatrix g = pauli::y().matrix() / 2.0;
  EXPECT_NEAR(qfi_mixed(rho, -I_unit * commutator(g, rho)).value, 1.0, 1e-14);
  EXPECT_THROW(qfi_mixed(half, CMatrix::Identity(2, 2)), ContractViolation);
  EXPECT_THROW(qfi_mixed(half, CMatrix::Zero(3, 3)), ContractViolation);
}

TEST(Mixed, PureStateIsFourTimesVariance) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const Index d = 2 + rep % 7;
    const QuantumState psi = random_psi(d, rng);
    const HermitianOperator g(random_herm(d, rng));
    const CMatrix rho = psi.density();
    EXPECT_NEAR(qfi_mixed(rho, -I_unit * commutator(g.matrix(), rho)).value, 4 * psi.variance(g), 1e-8);
  }
}

TEST(Thermal, CommutingReducesToVariance) {
  // two free spins in the full register: the Gibbs state at theta = 0 is I/4, Var(Sz) = N/4
  const HamiltonianFamily full(collective_full(2, pauli::z(), all_sites(2)), HermitianOperator::zero(4));
  EXPECT_NEAR(qfi_thermal(full, 0.0, 1.0).value, 0.5, 1e-12);
  // restricted to the symmetric subspace the state is I/3 instead
  EXPECT_NEAR(qfi_thermal(build_spin_squeezing(2, 0, 0, 0), 0.0, 1.0).value, 2.0 / 3.0, 1e-12);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int rep = 0; rep < 20; ++rep) {
    const Index d = 2 + rep % 5;
    const CMatrix v = eig_hermitian(HermitianOperator(random_herm(d, rng))).eigenvectors;
    RVector a(d), b(d);
    for (Index i = 0; i < d; ++i) a(i) = u(rng), b(i) = u(rng);
    auto rot = [&](const RVector& x) { return HermitianOperator::hermitized(v * x.cast<cplx>().asDiagonal() * v.adjoint()); };
    const HamiltonianFamily fam(rot(a), rot(b));
    const double beta = 0.3 + 0.1 * rep, th = u(rng);
    const QuantumState g = gibbs_state(fam.at(th), beta);
    EXPECT_NEAR(qfi_thermal(fam, th, beta).value, beta * beta * g.variance(fam.signal), 1e-9) << rep;
  }
}

TEST(Thermal, NonCommutingMatchesFiniteDifference) {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 10; ++rep) {
    const Index d = 2 + rep % 5;
    const HamiltonianFamily f(HermitianOperator(random_herm(d, rng)), HermitianOperator(random_herm(d, rng)));
    const double beta = 0.5 + 0.2 * rep;
    const double fd = qfi_finite_difference([&](double x) { return gibbs_state(f.at(x), beta); }, 0.1, 1e-5).value;
    EXPECT_NEAR(qfi_thermal(f, 0.1, beta).value, fd, 1e-5 * std::max(1.0, fd)) << rep;
  }
}

TEST(Thermal, FerromagneticSaturationAndHighTemperature) {
  for (int n = 2; n <= 10; ++n) {
    EXPECT_NEAR(qfi_thermal(build_spin_squeezing(n, 0, 0, -50), 0.0, 1.0).value, n * n / 4.0, 1e-6);
  }
  EXPECT_LT(qfi_thermal(build_spin_squeezing(3, 0, 0, 1), 0.0, 1e-6).value, 1e-10);
  EXPECT_THROW(qfi_thermal(build_spin_squeezing(3, 0, 0, 1), 0.0, 0.0), ContractViolation);
}

TEST(DiagonalEnsemble, QutritOptimum) {
  for (double e : {1.0, 2.5}) {
    for (double lam : {1.0, 0.3}) {
      const HamiltonianFamily f = build_qutrit_dephasing_control(e, lam);
      const QuantumState mid = QuantumState::pure((CVector(3) << 0, 1, 0).finished());
      const FisherReport r = qfi_diagonal_ensemble(f, 0.0, mid);
      const double unit = lam * lam / (e * e);
      EXPECT_NEAR(r.value / unit, 6.0, 1e-6 * 6);
      EXPECT_NEAR(r.components->ext / unit, 2.0, 1e-6 * 2);
      EXPECT_NEAR(r.components->intr / unit, 4.0, 1e-6 * 4);
      EXPECT_NEAR(r.value, r.components->ext + r.components->intr, 0.0);
    }
  }
}

TEST(DiagonalEnsemble, QutritAgreesWithExactDephasedFamilyOffZero) {
  const HamiltonianFamily f = build_qutrit_dephasing_control(1.0, 1.0);
  const QuantumState mid = QuantumState::pure((CVector(3) << 0, 1, 0).finished());
  // populations of the outer blocks grow as theta^2, so the limit is taken from theta != 0
  const double fd = qfi_finite_difference([&](double x) { return dephased(f, x, mid); }, 1e-3, 1e-6).value;
  EXPECT_NEAR(fd, 6.0, 1e-2);
}

TEST(DiagonalEnsemble, GenericStatesMatchFiniteDifference) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const Index d = 2 + rep % 5;
    const HamiltonianFamily f(HermitianOperator(random_herm(d, rng)), HermitianOperator(random_herm(d, rng, 3.0)));
    const QuantumState psi = random_psi(d, rng);
    const FisherReport r = qfi_diagonal_ensemble(f, 0.0, psi);
    const double fd = qfi_finite_difference([&](double x) { return dephased(f, x, psi); }, 0.0, 1e-6).value;
    EXPECT_NEAR(r.value, fd, 1e-5 * std::max(1.0, fd)) << rep;
    EXPECT_EQ(r.diagnostics.at("rank_change"), 0.0);
  }
}

TEST(DiagonalEnsemble, ComponentsAreTheTwoSldSums) {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    const Index d = 3 + rep % 4;
    const HamiltonianFamily f(HermitianOperator(random_herm(d, rng)), HermitianOperator(random_herm(d, rng, 3.0)));
    const QuantumState psi = random_psi(d, rng);
    const DiagonalEnsembleParts p = diagonal_ensemble_parts(f, 0.0, psi);
    const FisherReport r = qfi_diagonal_ensemble(f, 0.0, psi);
    EXPECT_NEAR(r.components->ext, qfi_mixed(p.rho, -I_unit * commutator(p.generator, p.rho)).value, 1e-10);
    // nondegenerate blocks: int is the classical Fisher of the populations p_k, dp_k = 2 Re <psi_k| i S psi>_k
    double cl = 0;
    const CVector spsi = p.generator * p.psi;
    for (Index k = 0; k < d; ++k) {
      const double pk = std::norm(p.psi(k));
      const double dpk = 2 * (std::conj(p.psi(k)) * (-I_unit) * spsi(k)).real();
      cl += dpk * dpk / pk;
    }
    EXPECT_NEAR(r.components->intr, cl, 1e-8 * std::max(1.0, cl)) << rep;
    EXPECT_NEAR(r.value, qfi_mixed(p.rho, p.drho_ext + p.drho_int).value, 1e-8 * std::max(1.0, r.value));
  }
}

TEST(DiagonalEnsemble, TwoBodyScalingValue) {
  for (int n : {10, 20, 30}) {
    const HamiltonianFamily f = build_spin_squeezing(n, 1, 0, 0);
    const FisherReport r = qfi_diagonal_ensemble(f, 0.0, dicke_product(n, "-y"));
    EXPECT_NEAR(r.value / std::pow(n, 1.5), 1.34, 0.15) << n;
  }
}

TEST(DiagonalEnsemble, SingleEigenspaceThrows) {
  const HamiltonianFamily f(pauli::z(), HermitianOperator::zero(2));
  EXPECT_THROW(qfi_diagonal_ensemble(f, 0.0, QuantumState::pure((CVector(2) << 1, 0).finished())),
               DegenerateEncodingError);
  EXPECT_NO_THROW(qfi_diagonal_ensemble(f, 0.5, QuantumState::pure((CVector(2) << 1, 0).finished())));
  const HamiltonianFamily g(HermitianOperator::identity(2), HermitianOperator::identity(2));
  EXPECT_THROW(qfi_diagonal_ensemble(g, 0.0, QuantumState::pure((CVector(2) << 1, 0).finished())),
               DegenerateEncodingError);
}

TEST(Projective, OneAxisTwistingSxMeasurement) {
  const HamiltonianFamily f = build_spin_squeezing(5, 100, 0, 0);
  const QuantumState psi = dicke_product(5, "+y");
  const double q = qfi_pure_dynamical(f, 0.0, psi, 1000).value;
  const FisherReport c = cfi_projective(measurement_projectors(collective_ops(5).Sx),
                                        [&](double x) { return evolve_unitary(f, x, psi, 1000); }, 0.0,
                                        default_fd_step(f) / 1000);
  EXPECT_NEAR(c.value, q, 0.01 * q);
  EXPECT_LE(c.value, q + 1e-6 * q);
}

TEST(Projective, QubitPhaseInXBasis) {
  const HamiltonianFamily f(HermitianOperator(pauli::z().matrix() / 2.0), HermitianOperator::zero(2));
  const QuantumState plus = QuantumState::pure((CVector(2) << 1, 1).finished() / std::sqrt(2.0));
  const StateFamily fam = [&](double x) { return evolve_unitary(f, x, plus, 1.0); };
  for (double th : {0.3, M_PI / 4, 1.2}) {
    const FisherReport c = cfi_projective(measurement_projectors(pauli::x()), fam, th, 1e-5);
    EXPECT_NEAR(c.value, 1.0, 1e-6);
  }
}

TEST(Projective, FlatFamilyAndIncompleteSet) {
  const StateFamily flat = [](double) { return QuantumState::pure((CVector(2) << 1, 0).finished()); };
  EXPECT_EQ(cfi_projective(measurement_projectors(pauli::x()), flat, 0.0, 1e-5).value, 0.0);
  std::vector<HermitianOperator> partial{measurement_projectors(pauli::x()).front()};
  EXPECT_THROW(cfi_projective(partial, flat, 0.0, 1e-5), ContractViolation);
}

TEST(ErrorPropagation, RabiSaturatesAndFlatThrows) {
  const HamiltonianFamily f(HermitianOperator(pauli::x().matrix() / 2.0), HermitianOperator::zero(2));
  const QuantumState up = QuantumState::pure((CVector(2) << 1, 0).finished());
  for (double t : {0.5, 2.0}) {
    const StateFamily fam = [&](double x) { return evolve_unitary(f, x, up, t); };
    const double p = error_propagation_precision(pauli::y(), fam, 0.0, 1e-5);
    EXPECT_NEAR(p, t * t, 1e-6 * t * t);
    EXPECT_LE(p, qfi_pure_dynamical(f, 0.0, up, t).value + 1e-6);
  }
  const StateFamily fam = [&](double x) { return evolve_unitary(f, x, up, 1.0); };
  EXPECT_THROW(error_propagation_precision(pauli::x(), fam, 0.0, 1e-5), FlatSignalError);
}

TEST(ErrorPropagation, NeverExceedsQfi) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const Index d = 2 + rep % 5;
    const HamiltonianFamily f(HermitianOperator(random_herm(d, rng)), HermitianOperator(random_herm(d, rng)));
    const QuantumState psi = random_psi(d, rng);
    const HermitianOperator o(random_herm(d, rng));
    const StateFamily fam = [&](double x) { return evolve_unitary(f, x, psi, 1.5); };
    EXPECT_LE(error_propagation_precision(o, fam, 0.0, 1e-5), qfi_pure_dynamical(f, 0.0, psi, 1.5).value + 1e-6);
  }
}

TEST(GenericControlMeasurement, ConjugatedObservableApproachesBound) {
  // Observable sigma_y in the {|Phi_up>, |Phi_down>} block, rotated back by the control dynamics:
  // for a two-level signal the single-shot precision tends to t^2 Delta_-^2 / 4.
  const HamiltonianFamily f = build_result2_control(-1, 1, 0);
  const QuantumState down = QuantumState::pure((CVector(2) << 0, 1).finished());
  const double t = 2000;
  const double q = qfi_pure_dynamical(f, 0.0, down, t).value;
  // optimal observable for a pure state: the SLD, O = i[d rho, rho] direction; check it reaches the QFI
  const StateFamily fam = [&](double x) { return evolve_unitary(f, x, down, t); };
  const double h = 1e-9;
  const CMatrix dr = (fam(h).density() - fam(-h).density()) / (2 * h);
  const HermitianOperator sld = HermitianOperator::hermitized(2.0 * dr);
  const double p = error_propagation_precision(sld, fam, 0.0, h);
  EXPECT_NEAR(p / (t * t), 4 / 4.0, 2e-3);
  EXPECT_NEAR(p, q, 1e-4 * q);
}

TEST(ClosedForms, OneAxisTwisting) {
  EXPECT_NEAR(oat_closed_form(3, 1.0).value, 1.875, 1e-12);
  EXPECT_NEAR(oat_closed_form(5, 1.0).value, 4.6875, 1e-12);
  EXPECT_NEAR(oat_exact_form(3, 1.0).value, 3.0, 1e-12);
  EXPECT_NEAR(oat_exact_form(5, 1.0).value, 5.625, 1e-12);
  // ratio to N^{3/2}/sqrt(2 pi): the stated form rises to 1.074 at N=9 and then decreases;
  // the exact form decreases from N=3
  double prev = 10, prev_exact = 10;
  for (int n = 3; n <= 41; n += 2) {
    const FisherReport r = oat_closed_form(n, 1.0);
    const double ratio = r.value / r.diagnostics.at("asymptote");
    const double exact = oat_exact_form(n, 1.0).value / r.diagnostics.at("asymptote");
    if (n >= 11) {
      EXPECT_LT(ratio, prev) << n;
    }
    EXPECT_LT(exact, prev_exact) << n;
    EXPECT_GT(exact, ratio);
    prev = ratio;
    prev_exact = exact;
  }
  EXPECT_NEAR(prev, 1.0, 0.05);
  EXPECT_NEAR(prev_exact, 1.0, 0.10);
  EXPECT_THROW(oat_closed_form(4, 1.0), ContractViolation);
}

TEST(FiniteDifference, HalvingDiagnosticIsSmall) {
  const HamiltonianFamily f = build_spin_squeezing(4, 1, 0, 0);
  const QuantumState psi = dicke_product(4, "+x");
  const FisherReport r =
      qfi_finite_difference([&](double x) { return evolve_unitary(f, x, psi, 2.0); }, 0.0, default_fd_step(f));
  EXPECT_LT(r.diagnostics.at("fd_halving_rel_change"), 1e-4);
  EXPECT_NEAR(r.value, qfi_pure_dynamical(f, 0.0, psi, 2.0).value, 1e-5 * r.value);
}
