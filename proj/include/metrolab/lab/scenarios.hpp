#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "metrolab/bounds.hpp"
#include "metrolab/evolution.hpp"
#include "metrolab/fisher.hpp"
#include "metrolab/lab/config.hpp"
#include "metrolab/lab/fit.hpp"
#include "metrolab/lab/table.hpp"
#include "metrolab/models.hpp"
#include "metrolab/rate_chain.hpp"
#include "metrolab/spin.hpp"
#include "metrolab/version.hpp"

namespace metrolab::lab {

inline constexpr int kDickeCap = 41;
inline constexpr int kLocalNoiseCap = 8;

// ---- shared helpers ----

inline CMatrix random_hermitian(Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return scale * hermitian_part(m);
}

inline QuantumState random_pure_state(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(d);
  for (Index i = 0; i < d; ++i) v(i) = cplx(g(rng), g(rng));
  return QuantumState::pure_normalized(v);
}

inline double gap_of(const HermitianOperator& h, GroupingTolerance tol = {}) {
  const SpectralDecomposition s = eig_hermitian(h);
  return min_gap(s, group_eigenspaces(s, tol));
}

// Automatic central-difference step for a family evolved to time t (t = 0 for static states).
inline double fd_step_for(const ExperimentConfig& cfg, const HamiltonianFamily& fam, double t) {
  const double user = cfg.tolerance("fd_step");
  if (user > 0) return user;
  return default_fd_step(fam) / std::max(1.0, t);
}

// Central-difference QFI of a Lindblad family H(theta) = H0 + theta V at theta = 0, on a time grid.
struct LindbladFisher {
  std::vector<double> qfi;
  std::vector<CMatrix> rho, drho;
  double step = 0.0;
  double drift = 0.0;
};

inline LindbladFisher lindblad_fisher(const HermitianOperator& h0, const HermitianOperator& v,
                                      const std::vector<Dissipator>& ds, const QuantumState& r0,
                                      const std::vector<double>& grid, double fd, double drift_tol) {
  const LindbladModel mid(h0, ds);
  const LindbladRun centre = lindblad_evolve(mid, r0, grid, {true, drift_tol});
  const LindbladOptions same{false, drift_tol, centre.step};
  const LindbladRun up = lindblad_evolve(LindbladModel(h0 + fd * v, ds), r0, grid, same);
  const LindbladRun dn = lindblad_evolve(LindbladModel(h0 - fd * v, ds), r0, grid, same);
  LindbladFisher out;
  out.step = centre.step;
  out.drift = centre.halving_drift;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CMatrix d = (up.states[i].density() - dn.states[i].density()) / (2.0 * fd);
    d -= (d.trace() / static_cast<double>(d.rows())) * CMatrix::Identity(d.rows(), d.cols());
    out.rho.push_back(centre.states[i].density());
    out.qfi.push_back(qfi_mixed(out.rho.back(), d).value);
    out.drho.push_back(std::move(d));
  }
  return out;
}

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline double pi() { return std::acos(-1.0); }

// ---- scenarios ----

struct ReferenceRegression {
  double k1, k2, k3;
};

inline std::optional<ReferenceRegression> squeezing_reference(double ratio) {
  if (ratio == 0.0) return ReferenceRegression{0.141, -1.193, 5.498};
  if (std::abs(ratio - 1e-2) < 1e-15) return ReferenceRegression{0.196, -2.311, 12.159};
  return std::nullopt;
}

inline ResultTable run_dynamical_squeezing(const ExperimentConfig& cfg) {
  const double a = cfg.param("a");
  bool refs = true;
  for (double r : cfg.grid("theta_over_a")) refs = refs && squeezing_reference(r).has_value();
  std::vector<Column> cols{real_col("theta_over_a"), real_col("t"), int_col("N"), real_col("fisher"),
                           real_col("fisher_over_t2N2")};
  if (refs) cols.push_back(real_col("reference_regression"));
  cols.push_back(real_col("bound"));
  ResultTable tab(cols);
  tab.bound_checks = {{"fisher", "bound"}};
  nlohmann::json fits = nlohmann::json::array();
  for (double ratio : cfg.grid("theta_over_a")) {
    for (double t : cfg.grid("t")) {
      std::vector<std::pair<double, double>> pts;
      for (int n : cfg.int_grid("N")) {
        const HamiltonianFamily fam = build_spin_squeezing(n, a, 1.0 / std::sqrt(n), 0.0);
        const QuantumState psi = spin_coherent_state(n, cfg.param("state_theta"), cfg.param("state_phi"));
        const double f = qfi_pure_dynamical(fam, ratio * a, psi, t).value;
        const double norm = f / (t * t * n * n);
        pts.emplace_back(n, norm);
        std::vector<Cell> row{ratio, t, std::int64_t{n}, f, norm};
        if (refs) {
          const auto c = *squeezing_reference(ratio);
          row.emplace_back(c.k1 + c.k2 / std::sqrt(n) + c.k3 / n);
        }
        row.emplace_back(dynamical_bound(fam.signal, t).value);
        tab.add_row(std::move(row));
      }
      if (pts.size() >= 3) {
        const InverseSqrtFit fit = fit_inverse_sqrt_regression(pts);
        fits.push_back({{"theta_over_a", ratio}, {"t", t}, {"k1", fit.k1}, {"k2", fit.k2}, {"k3", fit.k3}, {"rms", fit.rms}});
      }
    }
  }
  tab.metadata["fits"] = fits;
  return tab;
}

inline ResultTable run_dynamical_oat(const ExperimentConfig& cfg) {
  const double a = cfg.param("a");
  const double theta = cfg.param("theta");
  ResultTable tab({int_col("N"), real_col("t"), real_col("fisher"), real_col("fisher_over_t2"),
                   real_col("closed_form_over_t2"), real_col("exact_form_over_t2"), real_col("fisher_over_t2N15"),
                   real_col("asymptote_ratio"), real_col("cfi_sx"), real_col("cfi_over_qfi"), real_col("fd_check"),
                   real_col("bound")});
  tab.bound_checks = {{"fisher", "bound"}, {"cfi_sx", "bound"}, {"cfi_sx", "fisher"}};
  for (double t : cfg.grid("t")) {
    for (int n : cfg.int_grid("N")) {
      const HamiltonianFamily fam = build_spin_squeezing(n, a, 0.0, 0.0);
      const QuantumState psi = dicke_product(n, "+y");
      const double f = qfi_pure_dynamical(fam, theta, psi, t).value;
      const DickeSpace ds = collective_ops(n);
      const StateFamily family = [&](double th) { return evolve_unitary(fam, th, psi, t); };
      const FisherReport cfi = cfi_projective(measurement_projectors(ds.Sx), family, theta, fd_step_for(cfg, fam, t));
      const double closed = n % 2 ? oat_closed_form(n, 1.0).value : 0.0;
      const double exact = n % 2 ? oat_exact_form(n, 1.0).value : 0.0;
      const double asym = std::pow(n, 1.5) / std::sqrt(2.0 * pi());
      tab.add_row({std::int64_t{n}, t, f, f / (t * t), closed, exact, f / (t * t * std::pow(n, 1.5)), f / (t * t) / asym,
                   cfi.value, cfi.value / f, cfi.diagnostics.at("fd_halving_rel_change"),
                   dynamical_bound(fam.signal, t).value});
    }
  }
  return tab;
}

inline ResultTable run_diagonal_ensemble(const ExperimentConfig& cfg) {
  ResultTable tab({real_col("a"), real_col("b"), real_col("c"), real_col("theta"), int_col("N"), real_col("fisher"),
                   real_col("ext"), real_col("int"), real_col("gap"), real_col("fisher_E2_over_N15"),
                   real_col("bound_asymptotic"), real_col("bound_finite_d")});
  tab.bound_checks = {{"fisher", "bound_asymptotic"}, {"fisher", "bound_finite_d"}};
  for (double a : cfg.grid("a"))
    for (double b : cfg.grid("b"))
      for (double c : cfg.grid("c"))
        for (double theta : cfg.grid("theta"))
          for (int n : cfg.int_grid("N")) {
            const HamiltonianFamily fam = build_spin_squeezing(n, a, b, c);
            const QuantumState psi = dicke_product(n, "-y");
            const FisherReport r = qfi_diagonal_ensemble(fam, theta, psi, cfg.grouping());
            const double e = gap_of(fam.at(theta), cfg.grouping());
            tab.add_row({a, b, c, theta, std::int64_t{n}, r.value, r.components->ext, r.components->intr, e,
                         r.value * e * e / std::pow(n, 1.5), dephasing_bound(fam.signal, e).value,
                         dephasing_bound(fam.signal, e, fam.dim()).value});
          }
  return tab;
}

inline ResultTable run_time_average(const ExperimentConfig& cfg) {
  ResultTable tab({real_col("lambda"), int_col("N"), real_col("T"), real_col("fisher"), real_col("fisher_inf"),
                   real_col("fisher_over_inf"), real_col("bound")});
  tab.bound_checks = {{"fisher", "bound"}};
  const std::vector<double> ts =
      log_grid(cfg.param("T_min"), cfg.param("T_max"), static_cast<int>(cfg.param("T_per_decade")));
  nlohmann::json summary = nlohmann::json::array();
  for (int n : cfg.int_grid("N")) {
    double tp_ref = -1, f_ref = -1;
    for (double lam : cfg.grid("lambda")) {
      const HamiltonianFamily fam =
          build_spin_squeezing(n, cfg.param("a") / lam, cfg.param("b") / lam, cfg.param("c") / lam);
      const QuantumState psi = dicke_product(n, "-y");
      const double finf = qfi_diagonal_ensemble(fam, 0.0, psi, cfg.grouping()).value;
      std::vector<double> fs;
      for (double T : ts) {
        const StateFamily family = [&](double th) { return time_averaged_state(fam, th, psi, T); };
        const double f = qfi_finite_difference(family, 0.0, fd_step_for(cfg, fam, T)).value;
        fs.push_back(f);
        // Convexity of the QFI over the time average of the dynamical bound.
        const double bound = T * T * std::pow(spectral_range(fam.signal), 2) / 3.0;
        tab.add_row({lam, std::int64_t{n}, T, f, finf, f / finf, bound});
      }
      // plateau measured against the analytic asymptote
      std::vector<double> rel(fs.size());
      for (std::size_t i = 0; i < fs.size(); ++i) rel[i] = fs[i] / finf;
      rel.push_back(1.0);
      std::vector<double> tt = ts;
      tt.push_back(ts.back() * 10);
      const double tp = time_to_plateau(tt, rel);
      if (tp_ref < 0) {
        tp_ref = tp;
        f_ref = finf;
      }
      summary.push_back({{"N", n}, {"lambda", lam}, {"fisher_inf", finf}, {"time_to_plateau", tp},
                         {"fisher_inf_ratio", finf / f_ref}, {"time_ratio", tp / tp_ref}});
    }
  }
  tab.metadata["summary"] = summary;
  return tab;
}

inline ResultTable run_thermalization_chain(const ExperimentConfig& cfg) {
  ResultTable tab({int_col("N"), real_col("c"), real_col("beta"), real_col("gamma"), real_col("t"), real_col("fisher"),
                   real_col("energy"), real_col("fisher_over_bound"), real_col("bound")});
  tab.bound_checks = {{"fisher", "bound"}};
  const std::vector<double> ts =
      log_grid(cfg.param("t_min"), cfg.param("t_max"), static_cast<int>(cfg.param("t_per_decade")));
  nlohmann::json summary = nlohmann::json::array();
  for (int n : cfg.int_grid("N"))
    for (double c : cfg.grid("c"))
      for (double beta : cfg.grid("beta"))
        for (double gamma : cfg.grid("gamma")) {
          const RateChainParams p{n, cfg.param("theta"), c, beta, gamma};
          const auto pts = rate_chain_fisher(p, uniform_distribution(n + 1), ts, cfg.param("fd_step"));
          const double bound = thermal_bound(static_cast<double>(n), beta).value;
          std::vector<double> fs;
          for (const auto& q : pts) {
            fs.push_back(q.fisher);
            tab.add_row({std::int64_t{n}, c, beta, gamma, q.t, q.fisher, q.energy, q.fisher / bound, bound});
          }
          const HamiltonianFamily fam = build_spin_squeezing(n, 0.0, 0.0, c);
          summary.push_back({{"N", n}, {"c", c}, {"beta", beta}, {"gamma", gamma}, {"plateau", fs.back()},
                             {"plateau_over_bound", fs.back() / bound},
                             {"time_to_plateau", time_to_plateau(ts, fs)},
                             {"gibbs_qfi_dicke", qfi_thermal(fam, cfg.param("theta"), beta).value}});
        }
  tab.metadata["summary"] = summary;
  return tab;
}

inline double global_noise_prediction(double gamma, double t) {
  const double x = 1.0 - std::exp(-0.5 * gamma * t);
  return 4.0 * x * x / (gamma * gamma);
}

inline ResultTable run_global_noise(const ExperimentConfig& cfg) {
  ResultTable tab({text_col("mode"), int_col("N"), real_col("gamma"), real_col("t"), real_col("fisher"),
                   real_col("qfi"), real_col("prediction"), real_col("fisher_over_prediction"),
                   real_col("exact_large_a"), real_col("step"), real_col("bound")});
  tab.bound_checks = {{"fisher", "bound"}, {"qfi", "bound"}, {"fisher", "qfi"}};
  const double drift = cfg.tolerance("lindblad_drift");
  for (double gamma : cfg.grid("gamma")) {
    std::vector<double> grid;
    for (double gt : cfg.grid("gamma_t")) grid.push_back(gt / gamma);
    grid = sorted_unique(grid);
    for (int n : cfg.int_grid("N")) {
      const DickeSpace ds = collective_ops(n);
      const HamiltonianFamily fam(ds.Sz, HermitianOperator::zero(ds.dim), BasisKind::dicke, n);
      const double fd = fd_step_for(cfg, fam, grid.back());
      const LindbladFisher lf = lindblad_fisher(fam.control, ds.Sz, {{gamma, ds.Sx.matrix()}},
                                                dicke_product(n, "+x"), grid, fd, drift);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double pred = n * global_noise_prediction(gamma, grid[i]);
        tab.add_row({std::string("no_control"), std::int64_t{n}, gamma, grid[i], lf.qfi[i], lf.qfi[i], pred,
                     lf.qfi[i] / pred, pred, lf.step, dynamical_bound(ds.Sz, grid[i]).value});
      }
    }
    for (int n : cfg.int_grid("N_control")) {
      const HamiltonianFamily fam = build_spin_squeezing(n, cfg.param("a"), 0.0, 0.0);
      const DickeSpace ds = collective_ops(n);
      const double fd = fd_step_for(cfg, fam, grid.back());
      const LindbladFisher lf = lindblad_fisher(fam.control, ds.Sz, {{gamma, ds.Sx.matrix()}},
                                                dicke_product(n, "+y"), grid, fd, drift);
      const auto proj = measurement_projectors(ds.Sx);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        RVector p(static_cast<Index>(proj.size())), dp(static_cast<Index>(proj.size()));
        for (std::size_t x = 0; x < proj.size(); ++x) {
          p(static_cast<Index>(x)) = (proj[x].matrix() * lf.rho[i]).trace().real();
          dp(static_cast<Index>(x)) = (proj[x].matrix() * lf.drho[i]).trace().real();
        }
        double excluded = 0.0;
        const double cfi = detail::cfi_from(p, dp, excluded);
        const double base = global_noise_prediction(gamma, grid[i]);
        const double pred = base * std::pow(n, 1.5) / std::sqrt(2.0 * pi());
        const double exact = n % 2 ? base * oat_exact_form(n, 1.0).value : 0.0;
        tab.add_row({std::string("control"), std::int64_t{n}, gamma, grid[i], cfi, lf.qfi[i], pred, cfi / pred, exact,
                     lf.step, dynamical_bound(ds.Sz, grid[i]).value});
      }
    }
  }
  return tab;
}

// Rotated frame: H = theta Sx + a Sz^2, jump operators sigma_z^{(i)}/2, initial |-y>^N.
inline double local_noise_qfi(int n, double a, double gamma, double t) {
  const HermitianOperator sz = collective_full(n, pauli::z(), all_sites(n));
  const HermitianOperator sx = collective_full(n, pauli::x(), all_sites(n));
  const HermitianOperator h0 = HermitianOperator::hermitized(a * sz.matrix() * sz.matrix());
  std::vector<Dissipator> ds;
  for (int i = 0; i < n; ++i) ds.push_back({gamma, 0.5 * tensor_operator(n, {{i, pauli::z()}}).matrix()});
  const LinearResponse lr =
      lindblad_diagonal_response(LindbladModel(h0, ds), sx, product_state(n, qubit::minus_y()), t);
  return qfi_mixed(lr.rho, lr.drho).value;
}

inline ResultTable run_local_noise(const ExperimentConfig& cfg) {
  ResultTable tab({real_col("a"), real_col("gamma"), real_col("t"), int_col("N"), real_col("fisher"),
                   real_col("fisher_noninteracting"), real_col("advantage_ratio"), real_col("bound")});
  tab.bound_checks = {{"fisher", "bound"}, {"fisher_noninteracting", "bound"}};
  nlohmann::json fits = nlohmann::json::array();
  for (double a : cfg.grid("a"))
    for (double gamma : cfg.grid("gamma"))
      for (double t : cfg.grid("t")) {
        std::vector<std::pair<double, double>> pts;
        for (int n : cfg.int_grid("N")) {
          const double f = local_noise_qfi(n, a, gamma, t);
          const double f0 = local_noise_qfi(n, 0.0, gamma, t);
          pts.emplace_back(n, f);
          tab.add_row({a, gamma, t, std::int64_t{n}, f, f0, f / f0, t * t * n * n});
        }
        if (pts.size() >= 2) {
          const PowerLawFit pl = fit_power_law(pts);
          fits.push_back({{"a", a}, {"gamma", gamma}, {"t", t}, {"exponent", pl.exponent}, {"prefactor", pl.prefactor}});
        }
      }
  tab.metadata["power_law"] = fits;
  return tab;
}

inline QuantumState central_spin_probe(int n) {
  std::vector<CVector> f{qubit::plus_x()};
  for (int i = 1; i < n; ++i) f.push_back(qubit::up());
  return product_state(f);
}

inline ResultTable run_central_spin(const ExperimentConfig& cfg) {
  ResultTable tab({int_col("N"), real_col("t"), real_col("var_hp"), real_col("predicted"), real_col("rel_err"),
                   real_col("fisher"), real_col("fisher_over_t2"), real_col("asymptote_over_t2"), real_col("bound")});
  tab.bound_checks = {{"fisher", "bound"}};
  for (double t : cfg.grid("t"))
    for (int n : cfg.int_grid("N")) {
      const HamiltonianFamily fam = build_central_spin(n, cfg.param("alpha"), cfg.param("beta"));
      const QuantumState psi = central_spin_probe(n);
      const double var = qfi_pinched_asymptotic(fam, 0.0, psi, cfg.grouping()).value;
      const double pred = (n + 1.0) * (n + 1.0) / 16.0;
      const double f = qfi_pure_dynamical(fam, 0.0, psi, t).value;
      tab.add_row({std::int64_t{n}, t, var, pred, std::abs(var - pred) / pred, f, f / (t * t), 4.0 * var,
                   dynamical_bound(fam.signal, t).value});
    }
  return tab;
}

inline ResultTable run_result2(const ExperimentConfig& cfg) {
  ResultTable tab({int_col("draw"), int_col("dim"), real_col("t"), real_col("fisher"), real_col("target"),
                   real_col("fisher_over_target"), real_col("residual"), real_col("bound")});
  tab.bound_checks = {{"fisher", "bound"}};
  std::mt19937_64 rng(cfg.seed);
  const std::vector<int> dims = cfg.int_grid("dim");
  const std::vector<double> ts = log_grid(cfg.param("t_min"), cfg.param("t_max"), static_cast<int>(cfg.param("t_per_decade")));
  nlohmann::json draws = nlohmann::json::array();
  const int ndraws = static_cast<int>(cfg.param("draws"));
  for (int k = 0; k < ndraws; ++k) {
    const int d = dims[static_cast<std::size_t>(k) % dims.size()];
    const HermitianOperator hs = HermitianOperator::hermitized(random_hermitian(d, rng), "H_S");
    const HamiltonianFamily fam = build_result2_control(hs);
    const SpectralDecomposition s = eig_hermitian(hs);
    const QuantumState psi = QuantumState::pure_normalized(s.eigenvectors.col(0));
    const double range = spectral_range(s);
    double early = 0, late = 0;
    for (double t : ts) {
      const double f = qfi_pure_dynamical(fam, 0.0, psi, t).value;
      const double target = t * t * range * range / 4.0;
      const double rel = std::abs(f - target) / target;
      if (t <= ts.front() * 3.0001) early = std::max(early, rel);
      if (t >= ts.back() / 3.0001) late = std::max(late, rel);
      tab.add_row({std::int64_t{k}, std::int64_t{d}, t, f, target, f / target, f - target,
                   dynamical_bound(range, t).value});
    }
    draws.push_back({{"draw", k}, {"dim", d}, {"early_rel_residual", early}, {"late_rel_residual", late}});
  }
  tab.metadata["draws"] = draws;
  return tab;
}

inline ResultTable run_qutrit(const ExperimentConfig& cfg) {
  ResultTable tab({real_col("E"), real_col("lam_abs"), real_col("fisher"), real_col("ext"), real_col("int"),
                   real_col("rank_change"), real_col("fisher_E2_over_hinf2"), real_col("bound_finite_d"),
                   real_col("bound_asymptotic")});
  tab.bound_checks = {{"fisher", "bound_finite_d"}, {"fisher", "bound_asymptotic"}};
  for (double e : cfg.grid("E"))
    for (double lam : cfg.grid("lam_abs")) {
      const HamiltonianFamily fam = build_qutrit_dephasing_control(e, lam);
      const QuantumState psi = QuantumState::pure((CVector(3) << 0, 1, 0).finished());
      const FisherReport r = qfi_diagonal_ensemble(fam, 0.0, psi, cfg.grouping());
      tab.add_row({e, lam, r.value, r.components->ext, r.components->intr, r.diagnostics.at("rank_change"),
                   r.value * e * e / (lam * lam), dephasing_bound(fam.signal, e, 3).value,
                   dephasing_bound(fam.signal, e).value});
    }
  return tab;
}

inline ResultTable run_bounds_audit(const ExperimentConfig& cfg) {
  ResultTable tab({text_col("family"), int_col("draw"), int_col("dim"), real_col("value"), real_col("bound"),
                   real_col("slack")});
  tab.bound_checks = {{"value", "bound"}};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto dim_in = [&](int lo, int hi) { return lo + static_cast<int>(u(rng) * (hi - lo + 1) - 1e-12); };
  auto add = [&](const std::string& fam, int k, Index d, double v, double b) {
    tab.add_row({fam, std::int64_t{k}, std::int64_t{d}, v, b, b - v});
  };
  for (int k = 0; k < static_cast<int>(cfg.param("draws_dynamical")); ++k) {
    const int d = dim_in(2, 8);
    const HamiltonianFamily fam(HermitianOperator::hermitized(random_hermitian(d, rng)),
                                HermitianOperator::hermitized(random_hermitian(d, rng, 1.0 + 4.0 * u(rng))));
    const QuantumState psi = random_pure_state(d, rng);
    const double t = 10.0 * u(rng);
    add("dynamical", k, d, qfi_pure_dynamical(fam, 0.0, psi, t).value, dynamical_bound(fam.signal, t).value);
  }
  for (int k = 0; k < static_cast<int>(cfg.param("draws_dephasing")); ++k) {
    const int d = dim_in(2, 6);
    for (;;) {
      const HamiltonianFamily fam(HermitianOperator::hermitized(random_hermitian(d, rng)),
                                  HermitianOperator::hermitized(random_hermitian(d, rng, 1.0 + 4.0 * u(rng))));
      const double e = gap_of(fam.control, cfg.grouping());
      if (!(e > 1e-3) || !std::isfinite(e)) continue;
      const QuantumState psi = random_pure_state(d, rng);
      add("dephasing", k, d, qfi_diagonal_ensemble(fam, 0.0, psi, cfg.grouping()).value,
          dephasing_bound(fam.signal, e, d).value);
      break;
    }
  }
  for (int k = 0; k < static_cast<int>(cfg.param("draws_thermal")); ++k) {
    const int d = dim_in(2, 8);
    const HamiltonianFamily fam(HermitianOperator::hermitized(random_hermitian(d, rng)),
                                HermitianOperator::hermitized(random_hermitian(d, rng, 1.0 + 4.0 * u(rng))));
    const double beta = 0.1 + 4.9 * u(rng);
    add("thermal", k, d, qfi_thermal(fam, 0.0, beta).value, thermal_bound(fam.signal, beta).value);
  }
  // Gibbs saturation rows: Dicke H = theta Sz + c Sz^2 at theta = 0.
  for (int n = 2; n <= static_cast<int>(cfg.param("gibbs_n_max")); ++n) {
    const double beta = cfg.param("gibbs_beta");
    const HamiltonianFamily fam = build_spin_squeezing(n, 0.0, 0.0, cfg.param("gibbs_c"));
    add("gibbs_saturation", n, fam.dim(), qfi_thermal(fam, 0.0, beta).value, thermal_bound(fam.signal, beta).value);
  }
  tab.metadata["violations"] = [&] {
    int v = 0;
    for (std::size_t r = 0; r < tab.rows.size(); ++r) v += tab.real(r, "value") > tab.real(r, "bound") + 1e-6;
    return v;
  }();
  return tab;
}

// ---- registry ----

struct Scenario {
  std::string name;
  std::string summary;
  ScenarioDefaults defaults;
  std::function<ResultTable(const ExperimentConfig&)> run;
};

inline std::vector<double> range_step(double lo, double hi, double step) {
  std::vector<double> v;
  for (double x = lo; x <= hi + 1e-9; x += step) v.push_back(x);
  return v;
}

inline const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> all = [] {
    std::vector<Scenario> s;
    s.push_back({"dynamical_squeezing_n2",
                 "normalized dynamical QFI of theta Sz + a Sx^2 + Sy^2/sqrt(N) vs odd N, reference regression fit",
                 {{{"N", range_step(5, 29, 2)}, {"theta_over_a", {0.0, 1e-2}}, {"t", {1000.0}}},
                  {{"a", 100.0}, {"state_theta", pi() / 4}, {"state_phi", pi() / 2}},
                  {{"N", kDickeCap, 1}}},
                 run_dynamical_squeezing});
    s.push_back({"dynamical_oat_n32",
                 "one-axis twisting QFI and Sx-measurement CFI vs odd N against the closed form and N^{3/2}",
                 {{{"N", range_step(3, 13, 2)}, {"t", {1000.0}}}, {{"a", 100.0}, {"theta", 0.0}}, {{"N", kDickeCap, 1}}},
                 run_dynamical_oat});
    s.push_back({"diagonal_ensemble_scaling", "dephased (infinite-time) QFI of a Sx^2 + b Sy^2 + c Sz^2 vs even N",
                 {{{"N", range_step(10, 30, 2)}, {"a", {1.0}}, {"b", {0.0}}, {"c", {0.0}}, {"theta", {0.0}}},
                  {},
                  {{"N", kDickeCap, 1}}},
                 run_diagonal_ensemble});
    s.push_back({"time_average_transient", "finite-T time-averaged QFI and its approach to the dephased value under (a,b,c)/lambda",
                 {{{"N", {10.0}}, {"lambda", {1.0, 2.0, 10.0}}},
                  {{"a", 1.0}, {"b", 0.0}, {"c", 0.0}, {"T_min", 0.1}, {"T_max", 1e5}, {"T_per_decade", 40.0}},
                  {{"N", kDickeCap, 1}}},
                 run_time_average});
    s.push_back({"thermalization_chain", "birth-death thermalization: classical Fisher and energy vs time",
                 {{{"N", {2.0, 3.0, 4.0}}, {"c", {-0.5, -1.0, -2.0, -5.0, -10.0}}, {"beta", {1.0}}, {"gamma", {1.0}}},
                  {{"theta", 0.0}, {"t_min", 1e-2}, {"t_max", 1e20}, {"t_per_decade", 20.0}, {"fd_step", 1e-6}},
                  {{"N", kDickeCap, 1}}},
                 run_thermalization_chain});
    s.push_back({"global_noise", "collective Sx noise: QFI without control, Sx-measurement CFI with a Sx^2 control",
                 {{{"N", range_step(1, 6, 1)}, {"N_control", {3.0, 5.0}}, {"gamma", {0.1, 1.0}}, {"gamma_t", {1.0, 3.0, 10.0}}},
                  {{"a", 100.0}},
                  {{"N", kDickeCap, 1}, {"N_control", kDickeCap, 1}}},
                 run_global_noise});
    s.push_back({"local_noise", "independent dephasing in the full 2^N space: interacting vs non-interacting long-time QFI",
                 {{{"N", {3.0, 5.0, 7.0}}, {"a", {10.0}}, {"gamma", {1.0}}, {"t", {40.0}}}, {}, {{"N", kLocalNoiseCap, 1}}},
                 run_local_noise});
    s.push_back({"central_spin", "pinched-signal variance and dynamical QFI of the central-spin control",
                 {{{"N", range_step(2, 8, 1)}, {"t", {1000.0}}},
                  {{"alpha", std::sqrt(2.0)}, {"beta", 1.0}},
                  {{"N", kMaxFullHilbertSpins, 2}}},
                 run_central_spin});
    s.push_back({"result2_generic", "dynamical QFI of the pi/8 control for random signals vs t^2 ||H_S||^2 / 4",
                 {{{"dim", {2.0, 3.0, 4.0, 5.0, 6.0}}},
                  {{"draws", 10.0}, {"t_min", 1e2}, {"t_max", 1e4}, {"t_per_decade", 10.0}},
                  {}},
                 run_result2});
    s.push_back({"qutrit_dephasing", "dephased QFI of the tridiagonal qutrit control with its ext/int split",
                 {{{"E", {1.0}}, {"lam_abs", {1.0}}}, {}, {}},
                 run_qutrit});
    s.push_back({"bounds_audit", "random-draw audit of the dynamical, dephasing and thermal bounds",
                 {{},
                  {{"draws_dynamical", 200.0}, {"draws_dephasing", 200.0}, {"draws_thermal", 100.0},
                   {"gibbs_n_max", 10.0}, {"gibbs_c", -50.0}, {"gibbs_beta", 1.0}},
                  {}},
                 run_bounds_audit});
    return s;
  }();
  return all;
}

inline const Scenario& find_scenario(const std::string& name) {
  for (const auto& s : scenarios())
    if (s.name == name) return s;
  throw ConfigError("unknown scenario '" + name + "' (see list-scenarios)");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("scenario") || !j["scenario"].is_string()) {
    throw ConfigError("config: missing string key 'scenario'");
  }
  const std::string name = j["scenario"].get<std::string>();
  return resolve_config(j, name, find_scenario(name).defaults);
}

inline ExperimentConfig default_config(const std::string& name) {
  return config_from_json({{"scenario", name}});
}

inline ResultTable run_scenario(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ResultTable t;
  try {
    t = find_scenario(cfg.scenario).run(cfg);
  } catch (const AccuracyError& e) {
    throw AccuracyError("scenario '" + cfg.scenario + "': " + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.metadata["scenario"] = cfg.scenario;
  t.metadata["config"] = cfg.echo();
  t.metadata["code_version"] = kVersion;
  t.metadata["runtime_seconds"] = secs;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& [v, b] : t.bound_checks) checks.push_back({v, b});
  t.metadata["bound_checks"] = checks;
  if (!t.rows.empty() && !t.bound_checks.empty()) t.metadata["worst_bound_excess"] = t.worst_violation();
  return t;
}

}  // namespace metrolab::lab
