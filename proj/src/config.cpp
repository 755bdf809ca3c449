#include "nqsv/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>

namespace nqsv {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {
    "schema_version", "target",  "strategy", "noise",         "epsilon",  "delta",
    "q_prior",        "N",       "repetitions", "seed",       "tol",      "threshold_tol",
    "max_bins",       "threads", "epsilons", "deltas",        "g_values", "lambda0",
    "nu"};

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config field '{}': {}", key, e.what()));
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = get_as<T>(j, key);
}

Complex parse_entry(const json& e) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
    return {e[0].get<double>(), e[1].get<double>()};
  }
  throw ConfigError(fmt::format("matrix entry must be a number or [re, im], got {}", e.dump()));
}

ComplexMatrix parse_matrix(const json& m) {
  if (!m.is_array() || m.empty()) throw ConfigError("matrix must be a non-empty nested array");
  const auto rows = static_cast<Eigen::Index>(m.size());
  const auto cols = static_cast<Eigen::Index>(m[0].size());
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = m[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) out(i, k) = parse_entry(row[static_cast<std::size_t>(k)]);
  }
  return out;
}

TargetSpec parse_target(const json& j) {
  TargetSpec t;
  t.kind = get_as<std::string>(j, "kind");
  if (t.kind == "ghz" || t.kind == "w") {
    t.n = get_as<int>(j, "n");
    if (t.n < 3 || t.n > 10) throw ConfigError(fmt::format("qubit count {} outside [3, 10]", t.n));
  } else if (t.kind == "stabilizer") {
    t.generators = get_as<std::vector<std::string>>(j, "generators");
    if (t.generators.empty()) throw ConfigError("stabilizer target needs generators");
    t.n = static_cast<int>(t.generators.front().size());
  } else {
    throw ConfigError(fmt::format("unknown target kind '{}'", t.kind));
  }
  return t;
}

NoiseSpec parse_noise(const json& j) {
  NoiseSpec s;
  if (j.is_string() && j.get<std::string>() == "none") return s;
  if (!j.is_object() || j.size() != 1) {
    throw ConfigError("noise must be \"none\" or an object with exactly one key");
  }
  const std::string key = j.begin().key();
  const json& v = j.begin().value();
  s.kind = key;
  if (key == "uniform_eta" || key == "uniform_g") {
    s.value = v.get<double>();
  } else if (key == "per_qubit") {
    s.per_qubit = v.get<std::vector<std::array<double, 3>>>();
  } else if (key == "per_qubit_asymmetric") {
    // [[[eta_x, q_x], [eta_y, q_y], [eta_z, q_z]], ...]
    for (const json& row : v) {
      std::array<FlipChannel, 3> ch;
      if (row.size() != 3) throw ConfigError("asymmetric rows need three [eta, q] pairs");
      for (std::size_t b = 0; b < 3; ++b) ch[b] = {row[b].at(0).get<double>(), row[b].at(1).get<double>()};
      s.asymmetric.push_back(ch);
    }
  } else if (key == "random") {
    s.lo = get_as<double>(v, "lo");
    s.hi = get_as<double>(v, "hi");
    s.seed = get_as<std::uint64_t>(v, "seed");
  } else if (key == "general") {
    OutcomeNoise on;
    const ComplexMatrix lam = parse_matrix(v.at("lambda"));
    if (lam.imag().cwiseAbs().maxCoeff() > 0.0) throw ConfigError("lambda must be real");
    on.lambda = lam.real();
    if (v.contains("delta")) {
      for (const json& d : v.at("delta")) on.delta.push_back(parse_matrix(d));
    }
    s.general = on;
  } else {
    throw ConfigError(fmt::format("unknown noise kind '{}'", key));
  }
  return s;
}

QubitNoiseParams qubit_params(const NoiseSpec& s, int n) {
  if (s.kind == "none") return QubitNoiseParams::noiseless(n);
  if (s.kind == "uniform_eta") return QubitNoiseParams::uniform(n, s.value);
  if (s.kind == "uniform_g") return QubitNoiseParams::uniform(n, 0.5 * (1.0 - s.value));
  if (s.kind == "per_qubit") {
    if (static_cast<int>(s.per_qubit.size()) != n) throw ConfigError("per_qubit needs one row per qubit");
    return QubitNoiseParams::per_qubit(s.per_qubit);
  }
  if (s.kind == "per_qubit_asymmetric") {
    if (static_cast<int>(s.asymmetric.size()) != n) throw ConfigError("per_qubit_asymmetric needs one row per qubit");
    return QubitNoiseParams(n, s.asymmetric);
  }
  if (s.kind == "random") return random_noise(n, s.lo, s.hi, s.seed);
  throw ConfigError(fmt::format("noise kind '{}' has no per-qubit form", s.kind));
}

std::string g17(double x) { return fmt::format("{:.17g}", x); }

std::string hyp(Hypothesis h) { return h == Hypothesis::H0 ? "H0" : "H1"; }

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kTopKeys.count(k)) throw ConfigError(fmt::format("unknown config field '{}'", k));
  }
  if (j.contains("schema_version") && j.at("schema_version") != kSchemaVersion) {
    throw ConfigError(fmt::format("unsupported schema_version {}", j.at("schema_version").dump()));
  }
  ExperimentConfig c;
  if (j.contains("target")) c.target = parse_target(j.at("target"));
  read_opt(j, "strategy", c.strategy);
  if (j.contains("noise")) {
    try {
      c.noise = parse_noise(j.at("noise"));
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("config field 'noise': {}", e.what()));
    }
  }
  read_opt(j, "epsilon", c.epsilon);
  read_opt(j, "delta", c.delta);
  read_opt(j, "q_prior", c.q_prior);
  read_opt(j, "N", c.n);
  read_opt(j, "repetitions", c.repetitions);
  read_opt(j, "seed", c.seed);
  read_opt(j, "tol", c.tol);
  read_opt(j, "threshold_tol", c.threshold_tol);
  read_opt(j, "max_bins", c.max_bins);
  read_opt(j, "threads", c.threads);
  read_opt(j, "epsilons", c.epsilons);
  read_opt(j, "deltas", c.deltas);
  read_opt(j, "g_values", c.g_values);
  if (j.contains("lambda0")) c.lambda0 = get_as<double>(j, "lambda0");
  if (j.contains("nu")) c.nu = get_as<double>(j, "nu");

  if (c.strategy != "default" && c.strategy != "stabilizer") {
    throw ConfigError(fmt::format("unknown strategy '{}'", c.strategy));
  }
  if (c.strategy == "stabilizer" && c.target.kind == "w") throw ConfigError("W state has no stabilizer strategy");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0,1)");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (!(c.q_prior >= 0.0 && c.q_prior <= 1.0)) throw ConfigError("q_prior must lie in [0,1]");
  if (c.n == 0 || c.repetitions == 0) throw ConfigError("N and repetitions must be positive");
  if (c.n > kMaxShots / c.repetitions) throw ConfigError("N * repetitions exceeds 1e9");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  return parse_config(j);
}

Instance build_instance(const ExperimentConfig& cfg) {
  const TargetSpec& t = cfg.target;
  auto pick = [&]() -> std::pair<Strategy, StateVector> {
    if (t.kind == "ghz") {
      if (cfg.strategy == "stabilizer") return {stabilizer_strategy(StabilizerGroup::ghz_group(t.n)), ghz(t.n)};
      return {ghz_strategy(t.n), ghz(t.n)};
    }
    if (t.kind == "w") return {w_strategy(t.n), w_state(t.n)};
    const StabilizerGroup g = StabilizerGroup::from_strings(t.generators);
    return {stabilizer_strategy(g), stabilizer_state(g)};
  };
  auto [strategy, target] = pick();
  if (cfg.noise.kind == "general") {
    NoisyStrategy ns = noisy_strategy(strategy, *cfg.noise.general);
    return {std::move(strategy), std::move(ns), std::move(target)};
  }
  NoisyStrategy ns = noisy_strategy(strategy, qubit_params(cfg.noise, t.n));
  return {std::move(strategy), std::move(ns), std::move(target)};
}

json to_json(const SpectralReport& r) {
  return {{"schema_version", kSchemaVersion},
          {"lambda0", r.lambda0},
          {"lambda1", r.lambda1},
          {"nu", r.nu},
          {"lambda_prime", r.lambda_prime},
          {"target_is_dominant", r.target_is_dominant},
          {"residual", r.residual},
          {"distinguishable", r.distinguishable},
          {"tol", r.tol}};
}

json to_json(const TestPlan& p) {
  return {{"schema_version", kSchemaVersion},
          {"lambda0", p.lambda0},
          {"nu", p.nu},
          {"epsilon", p.epsilon},
          {"delta", p.delta},
          {"q_prior", p.q_prior},
          {"h1", p.h1},
          {"f_prime", p.f_prime},
          {"N", p.n},
          {"acceptance_count", p.feasible ? acceptance_count(p.f_prime, p.n) : 0},
          {"feasible", p.feasible},
          {"p_sym", p.p_sym}};
}

json to_json(const ThresholdResult& t) {
  json j = {{"schema_version", kSchemaVersion},
            {"lambda_prime", t.lambda_prime},
            {"exists_check", t.exists_check},
            {"p_at_one", t.p_at_one}};
  if (t.epsilon_th) {
    j["epsilon_th"] = *t.epsilon_th;
    j["p_at_threshold"] = t.p_at_threshold;
  } else {
    j["epsilon_th"] = "none";
  }
  return j;
}

json to_json(const ExperimentSummary& s) {
  json truths = json::array(), decisions = json::array();
  for (auto h : s.truths) truths.push_back(hyp(h));
  for (auto h : s.decisions) decisions.push_back(hyp(h));
  return {{"schema_version", kSchemaVersion},
          {"seed", s.seed},
          {"N", s.n},
          {"repetitions", s.repetitions},
          {"q_prior", s.q_prior},
          {"f_prime", s.f_prime},
          {"h0", s.h0},
          {"h1", s.h1},
          {"bad_state_from_witness", s.bad_state_from_witness},
          {"h0_trials", s.h0_trials},
          {"h1_trials", s.h1_trials},
          {"empirical_type1", s.empirical_type1},
          {"empirical_type2", s.empirical_type2},
          {"empirical_confidence", s.empirical_confidence},
          {"theoretical_type1", s.theoretical_type1},
          {"theoretical_type2", s.theoretical_type2},
          {"theoretical_p_sym", s.theoretical_p_sym},
          {"theoretical_p_ave", s.theoretical_p_ave},
          {"pass_counts", s.pass_counts},
          {"truths", truths},
          {"decisions", decisions}};
}

json to_json(const Histogram& h) {
  return {{"schema_version", kSchemaVersion},
          {"N", h.n},
          {"bin_width", h.bin_width},
          {"bin_lower", h.bin_lower},
          {"h0_counts", h.h0_counts},
          {"h1_counts", h.h1_counts},
          {"h0_mean", h.h0_mean},
          {"h1_mean", h.h1_mean},
          {"h0_f", h.h0_f},
          {"h1_f", h.h1_f}};
}

json to_json(const CurveTable& t) {
  json series = json::array();
  for (const CurveSeries& s : t.series) {
    std::vector<int> feasible(s.feasible.begin(), s.feasible.end());
    series.push_back({{"delta", s.delta},
                      {"N", s.n},
                      {"chernoff", s.chernoff},
                      {"feasible", feasible},
                      {"slope", s.slope}});
  }
  return {{"schema_version", kSchemaVersion},
          {"lambda0", t.lambda0},
          {"nu", t.nu},
          {"epsilons", t.epsilons},
          {"series", series}};
}

std::string worst_case_csv(const std::vector<WorstCaseResult>& curve) {
  std::string out = fmt::format("# schema_version={}\nepsilon,p_eps,mu_star,gap\n", kSchemaVersion);
  for (const WorstCaseResult& r : curve) {
    out += fmt::format("{},{},{},{}\n", g17(r.epsilon), g17(r.p_eps), g17(r.mu_star), g17(r.duality_gap));
  }
  return out;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = fmt::format("# schema_version={}\nbin_lower,h0_count,h1_count\n", kSchemaVersion);
  for (std::size_t b = 0; b < h.bin_lower.size(); ++b) {
    out += fmt::format("{},{},{}\n", g17(h.bin_lower[b]), h.h0_counts[b], h.h1_counts[b]);
  }
  return out;
}

std::string curve_csv(const CurveTable& t) {
  std::string out = fmt::format("# schema_version={}\ndelta,epsilon,N,chernoff,feasible,slope\n", kSchemaVersion);
  for (const CurveSeries& s : t.series) {
    for (std::size_t i = 0; i < t.epsilons.size(); ++i) {
      out += fmt::format("{},{},{},{},{},{}\n", g17(s.delta), g17(t.epsilons[i]), s.n[i], s.chernoff[i],
                         s.feasible[i] ? 1 : 0, g17(s.slope));
    }
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& pts) {
  std::string out = fmt::format(
      "# schema_version={}\ng,eta,lambda0,nu,f_prime,empirical_type1,empirical_type2,empirical_confidence,"
      "theoretical_p_sym,theoretical_p_ave\n",
      kSchemaVersion);
  for (const SweepPoint& p : pts) {
    const ExperimentSummary& s = p.summary;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", g17(p.g), g17(p.eta), g17(p.lambda0), g17(p.nu),
                       g17(s.f_prime), g17(s.empirical_type1), g17(s.empirical_type2),
                       g17(s.empirical_confidence), g17(s.theoretical_p_sym), g17(s.theoretical_p_ave));
  }
  return out;
}

json sweep_json(const std::vector<SweepPoint>& pts) {
  json arr = json::array();
  for (const SweepPoint& p : pts) {
    json s = to_json(p.summary);
    s.erase("schema_version");
    arr.push_back({{"g", p.g}, {"eta", p.eta}, {"lambda0", p.lambda0}, {"nu", p.nu}, {"summary", s}});
  }
  return {{"schema_version", kSchemaVersion}, {"points", arr}};
}

}  // namespace nqsv
