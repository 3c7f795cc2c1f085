// metrolab: run scenarios, list them, fit CSV columns, evaluate bounds.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "metrolab/lab/emit.hpp"
#include "metrolab/lab/scenarios.hpp"

namespace {

using namespace metrolab;

constexpr int kExitConfig = 2;
constexpr int kExitAccuracy = 3;

int cmd_run(const std::string& path, const std::string& out_override) {
  const lab::ExperimentConfig cfg = lab::config_from_json(lab::load_json_file(path));
  const lab::ResultTable t = lab::run_scenario(cfg);
  const std::string dir = out_override.empty() ? cfg.output_dir : out_override;
  const lab::EmittedFiles f = lab::emit(t, dir, cfg.scenario);
  std::cout << f.csv.string() << "\n" << f.manifest.string() << "\n";
  if (t.metadata.contains("worst_bound_excess")) {
    const double w = t.metadata["worst_bound_excess"].get<double>();
    if (w > 1e-6) std::cerr << "warning: a Fisher value exceeds its bound by " << w << "\n";
  }
  return 0;
}

int cmd_list() {
  for (const auto& s : lab::scenarios()) std::cout << s.name << "\t" << s.summary << "\n";
  return 0;
}

int cmd_fit(const std::string& path, const std::string& model, const std::string& xcol, const std::string& ycol) {
  if (model != "inv-sqrt") throw ConfigError("fit: unknown model '" + model + "'");
  std::ifstream in(path);
  if (!in) throw ConfigError("fit: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const lab::ResultTable t = lab::parse_csv(ss.str());
  std::vector<std::pair<double, double>> pts;
  try {
    for (std::size_t r = 0; r < t.rows.size(); ++r) pts.emplace_back(t.real(r, xcol), t.real(r, ycol));
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("fit: ") + e.what());
  }
  const lab::InverseSqrtFit f = lab::fit_inverse_sqrt_regression(pts);
  std::printf("k1 = %.12g\nk2 = %.12g\nk3 = %.12g\nrms = %.12g\n", f.k1, f.k2, f.k3, f.rms);
  return 0;
}

void print_bound(const BoundReport& b) {
  std::printf("%-22s %.12g\n", to_string(b.kind), b.value);
}

int cmd_bounds(double range, std::optional<double> e, std::optional<long> d, std::optional<double> beta,
               std::optional<double> t) {
  if (!(range >= 0)) throw ConfigError("bounds: --hs-range must be >= 0");
  if (t) print_bound(dynamical_bound(range, *t));
  if (e) {
    print_bound(dephasing_bound(range, *e));
    if (d) print_bound(dephasing_bound(range, *e, *d));
  }
  if (beta) print_bound(thermal_bound(range, *beta));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metrolab: quantum Fisher information under control, dephasing and thermalization"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "run the scenario described by a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "override output.dir");

  auto* list = app.add_subcommand("list-scenarios", "list scenario names");

  std::string csv_path, model = "inv-sqrt", xcol = "N", ycol;
  auto* fit = app.add_subcommand("fit", "fit y = k1 + k2/sqrt(N) + k3/N to two CSV columns");
  fit->add_option("csv", csv_path, "CSV file")->required();
  fit->add_option("--model", model, "fit model (inv-sqrt)");
  fit->add_option("--x", xcol, "abscissa column");
  fit->add_option("--y", ycol, "ordinate column")->required();

  double range = 0;
  std::optional<double> e, beta, t;
  std::optional<long> d;
  auto* bounds = app.add_subcommand("bounds", "evaluate the Fisher bounds for a given signal range");
  bounds->add_option("--hs-range", range, "lambda_max - lambda_min of H_S")->required();
  bounds->add_option("--E", e, "minimal gap of H_theta");
  bounds->add_option("--d", d, "Hilbert-space dimension");
  bounds->add_option("--beta", beta, "inverse temperature");
  bounds->add_option("--t", t, "evolution time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*list) return cmd_list();
    if (*fit) return cmd_fit(csv_path, model, xcol, ycol);
    if (*bounds) return cmd_bounds(range, e, d, beta, t);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const AccuracyError& err) {
    std::cerr << "accuracy error: " << err.what() << "\n";
    return kExitAccuracy;
  } catch (const ContractViolation& err) {
    std::cerr << "invalid input: " << err.what() << "\n";
    return kExitConfig;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
