// nqsv: command-line front end for noisy state-verification experiments.

#include "nqsv/config.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>

using namespace nqsv;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> lambda0;
  std::optional<double> nu;
  std::string out;
  bool csv = false;
  bool json_out = false;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("-c,--config", c.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  if (config_required) opt->required();
  sub->add_option("--seed", c.seed, "override the config seed");
  sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  sub->add_option("-o,--out", c.out, "output file (default stdout)");
  auto* csv = sub->add_flag("--csv", c.csv, "CSV output");
  sub->add_flag("--json", c.json_out, "JSON output")->excludes(csv);
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? parse_config(json::object()) : load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (c.lambda0) cfg.lambda0 = c.lambda0;
  if (c.nu) cfg.nu = c.nu;
  return cfg;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", c.out));
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> linear_grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(lo + (hi - lo) * i / (points - 1));
  return g;
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / (points - 1)));
  return g;
}

int cmd_analyze(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const Instance inst = build_instance(cfg);
  const SpectralReport r = analyze(inst.noisy.op(), inst.target, cfg.tol);
  json j = to_json(r);
  j["trace_condition"] = trace_condition(inst.noisy.op(), r.lambda_prime, inst.noisy.num_qubits());
  emit(c, dump(j));
  return 0;
}

int cmd_plan(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  json j;
  if (cfg.lambda0 && cfg.nu) {
    j = to_json(make_plan(*cfg.lambda0, *cfg.nu, cfg.epsilon, cfg.delta, cfg.q_prior));
    j["method"] = "spectral";
  } else {
    const Instance inst = build_instance(cfg);
    const SpectralReport r = analyze(inst.noisy.op(), inst.target, cfg.tol);
    if (r.distinguishable) {
      j = to_json(make_plan(r.lambda0, r.nu, cfg.epsilon, cfg.delta, cfg.q_prior));
      j["method"] = "spectral";
    } else {
      j = to_json(nondistinguishable_plan(inst.noisy.op(), inst.target, cfg.epsilon, cfg.delta, cfg.q_prior));
      j["method"] = "worst_case";
    }
  }
  emit(c, dump(j));
  return 0;
}

int cmd_threshold(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const Instance inst = build_instance(cfg);
  if (c.csv) {
    const std::vector<double> grid = cfg.epsilons.empty() ? linear_grid(0.0, 1.0, 51) : cfg.epsilons;
    emit(c, worst_case_csv(worst_case_curve(inst.noisy.op(), inst.target, grid)));
    return 0;
  }
  emit(c, dump(to_json(infidelity_threshold(inst.noisy.op(), inst.target, cfg.threshold_tol))));
  return 0;
}

int cmd_simulate(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const Instance inst = build_instance(cfg);
  if (!cfg.g_values.empty()) {
    const NoiseSweepSetup setup{inst.strategy, inst.target, cfg.g_values, cfg.epsilon, cfg.n,
                                cfg.repetitions, cfg.seed, cfg.q_prior, cfg.threads};
    const auto pts = noise_sweep(setup);
    emit(c, c.csv ? sweep_csv(pts) : dump(sweep_json(pts)));
    return 0;
  }
  const ConfidenceSetup setup{inst.noisy, inst.target, cfg.epsilon, cfg.n, cfg.repetitions,
                              cfg.seed, cfg.q_prior, std::nullopt, cfg.threads};
  const ExperimentSummary s = simulate_confidence(setup);
  if (c.csv) {
    std::string out = fmt::format("# schema_version={}\ntrial,truth,passes,decision\n", kSchemaVersion);
    for (std::size_t t = 0; t < s.pass_counts.size(); ++t) {
      out += fmt::format("{},{},{},{}\n", t, s.truths[t] == Hypothesis::H0 ? "H0" : "H1", s.pass_counts[t],
                         s.decisions[t] == Hypothesis::H0 ? "H0" : "H1");
    }
    emit(c, out);
  } else {
    emit(c, dump(to_json(s)));
  }
  return 0;
}

int cmd_histogram(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const Instance inst = build_instance(cfg);
  const ConfidenceSetup setup{inst.noisy, inst.target, cfg.epsilon, cfg.n, cfg.repetitions,
                              cfg.seed, cfg.q_prior, std::nullopt, cfg.threads};
  const Histogram h = histogram(setup, cfg.max_bins);
  emit(c, c.json_out ? dump(to_json(h)) : histogram_csv(h));
  return 0;
}

int cmd_curve(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  double lambda0 = 0.0, nu = 0.0;
  if (cfg.lambda0 && cfg.nu) {
    lambda0 = *cfg.lambda0;
    nu = *cfg.nu;
  } else {
    if (c.config_path.empty()) throw ConfigError("curve needs --config or both --lambda0 and --nu");
    const Instance inst = build_instance(cfg);
    const SpectralReport r = analyze(inst.noisy.op(), inst.target, cfg.tol);
    if (!r.distinguishable) throw std::domain_error("curve needs a distinguishable strategy");
    lambda0 = r.lambda0;
    nu = r.nu;
  }
  const std::vector<double> eps = cfg.epsilons.empty() ? geometric_grid(3e-3, 3e-2, 9) : cfg.epsilons;
  const CurveTable t = n_vs_epsilon_curve(lambda0, nu, cfg.deltas, eps);
  emit(c, c.json_out ? dump(to_json(t)) : curve_csv(t));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noisy quantum state verification"};
  app.require_subcommand(1);
  Common common;

  auto* analyze_cmd = app.add_subcommand("analyze", "spectral report of the noisy strategy");
  add_common(analyze_cmd, common, true);
  auto* plan_cmd = app.add_subcommand("plan", "threshold frequency and sample complexity");
  add_common(plan_cmd, common, false);
  plan_cmd->add_option("--lambda0", common.lambda0, "dominant eigenvalue (skips the instance)");
  plan_cmd->add_option("--nu", common.nu, "spectral gap (skips the instance)");
  auto* threshold_cmd = app.add_subcommand("threshold", "infidelity threshold; --csv prints p(eps)");
  add_common(threshold_cmd, common, true);
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo confidence (or g sweep)");
  add_common(simulate_cmd, common, true);
  auto* histogram_cmd = app.add_subcommand("histogram", "pass-frequency histograms for H0 and H1");
  add_common(histogram_cmd, common, true);
  auto* curve_cmd = app.add_subcommand("curve", "sample complexity against epsilon");
  add_common(curve_cmd, common, false);
  curve_cmd->add_option("--lambda0", common.lambda0, "dominant eigenvalue");
  curve_cmd->add_option("--nu", common.nu, "spectral gap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze_cmd) return cmd_analyze(common);
    if (*plan_cmd) return cmd_plan(common);
    if (*threshold_cmd) return cmd_threshold(common);
    if (*simulate_cmd) return cmd_simulate(common);
    if (*histogram_cmd) return cmd_histogram(common);
    if (*curve_cmd) return cmd_curve(common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
