#pragma once

// Experiment configuration files and JSON/CSV serialization of results.

#include "nqsv/hypothesis.hpp"
#include "nqsv/noise.hpp"
#include "nqsv/sim.hpp"
#include "nqsv/spectral.hpp"
#include "nqsv/states.hpp"
#include "nqsv/worstcase.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nqsv {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TargetSpec {
  std::string kind = "ghz";  // ghz | w | stabilizer
  int n = 3;
  std::vector<std::string> generators;  // stabilizer only
};

struct NoiseSpec {
  std::string kind = "none";  // none | uniform_eta | uniform_g | per_qubit | per_qubit_asymmetric | random | general
  double value = 0.0;         // eta or g
  std::vector<std::array<double, 3>> per_qubit;
  std::vector<std::array<FlipChannel, 3>> asymmetric;
  double lo = 0.0, hi = 0.0;
  std::uint64_t seed = 0;
  std::optional<OutcomeNoise> general;
};

struct ExperimentConfig {
  TargetSpec target;
  std::string strategy = "default";  // default | stabilizer (GHZ only)
  NoiseSpec noise;
  double epsilon = 0.01;
  double delta = 0.05;
  double q_prior = 0.5;
  std::uint64_t n = 20000;
  std::uint64_t repetitions = 1000;
  std::uint64_t seed = 1;
  double tol = kDefaultSpectralTol;
  double threshold_tol = 1e-6;
  std::size_t max_bins = 100;
  unsigned threads = 0;
  std::vector<double> epsilons;
  std::vector<double> deltas = {0.01, 0.05, 0.1, 0.2};
  std::vector<double> g_values;
  std::optional<double> lambda0;  // overrides for curve/plan without an instance
  std::optional<double> nu;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct Instance {
  Strategy strategy;
  NoisyStrategy noisy;
  StateVector target;
};

Instance build_instance(const ExperimentConfig& cfg);

nlohmann::json to_json(const SpectralReport& r);
nlohmann::json to_json(const TestPlan& p);
nlohmann::json to_json(const ThresholdResult& t);
nlohmann::json to_json(const ExperimentSummary& s);
nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const CurveTable& t);

/// Header plus one line per row; doubles printed with 17 significant digits.
std::string worst_case_csv(const std::vector<WorstCaseResult>& curve);
std::string histogram_csv(const Histogram& h);
std::string curve_csv(const CurveTable& t);
std::string sweep_csv(const std::vector<SweepPoint>& pts);
nlohmann::json sweep_json(const std::vector<SweepPoint>& pts);

}  // namespace nqsv
