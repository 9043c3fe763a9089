#pragma once

// Experiment orchestration: builds the psi systems, runs every policy on a
// shared pre-generated noise tape per simulation, and reduces the traces
// into per-round regret quantiles and diagnostics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ares/environment.hpp"
#include "ares/kalman.hpp"
#include "ares/policy.hpp"
#include "ares/regressor.hpp"

namespace ares {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::vector<double> psi_values{1.0, 2.0, 3.0, 4.0};
  std::size_t state_dim = 5;
  std::size_t horizon = 5000;
  std::size_t burn_in = 10000;
  std::size_t num_sims = 50;
  std::uint64_t base_seed = 1;
  std::vector<std::string> policies = default_policy_ids();
  PolicySettings settings;
  BoundParams bounds;                 // b_r is replaced per system unless overridden
  std::optional<double> b_r_override;
  bool instrumented = false;
  bool normalize = true;              // divide by the oracle median
  std::size_t threads = 0;            // 0: hardware concurrency
  std::size_t tail_rounds = 1000;     // window for end-of-run averages
  std::filesystem::path output_dir = "results";

  /// Throws ConfigError.
  void validate() const;
};

/// Parses the JSON experiment description. Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

/// Parses "1,2,3" style lists used by the CLI overrides.
std::vector<double> parse_number_list(std::string_view text);
std::vector<std::string> parse_name_list(std::string_view text);

// --- per-system setup -------------------------------------------------------

struct SystemSetup {
  double psi = 0.0;
  EnvParams params;
  SteadyKalman steady;
  Matrix state_cov;         // stationary covariance of z
  double generator_rho = 0.0;
  double closed_loop_rho = 0.0;
  double max_innovation_variance = 0.0;  // max_a c_a' P c_a + sigma_eta^2
  BoundParams bounds;       // with b_r resolved
  PolicySettings settings;  // with rexp3 clip resolved
  BiasModel bias_model;
};

SystemSetup make_system_setup(double psi, const ExperimentConfig& config);

/// base_seed xor mix(sim, psi_index).
std::uint64_t simulation_seed(std::uint64_t base_seed, std::size_t sim, std::size_t psi_index);
std::uint64_t policy_seed(std::uint64_t sim_seed, std::string_view policy_id);

// --- traces -----------------------------------------------------------------

/// One (psi, sim) cell. Flattened per-round per-arm arrays are indexed
/// round * k + arm.
struct SimulationTrace {
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> regret;  // [policy][round] cumulative
  std::vector<double> final_mean_gap;       // [policy] sum of <c*,z> - <c_a,z>
  std::vector<std::vector<std::size_t>> arms;  // [policy][round]
  std::vector<double> ares_u;
  std::vector<double> ares_s;
  std::vector<double> ares_abs_bias;   // instrumented only
  std::vector<double> ares_b_width;    // instrumented only
  std::vector<std::vector<double>> pies_residuals;  // [pies][round*k+arm], NaN if unavailable
};

/// Generates the tape for one cell and runs every configured policy on it.
SimulationTrace simulate_cell(const SystemSetup& system, const ExperimentConfig& config,
                              std::uint64_t seed);

/// Prefix sums of optimal - realized. Throws DimensionError on length mismatch.
std::vector<double> compute_regret(std::span<const double> optimal,
                                   std::span<const double> realized);

struct Quantiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

/// Nearest-rank percentile: element ceil(p n) (1-based) of the sorted values.
double nearest_rank(std::span<const double> sorted, double p);
Quantiles nearest_rank_quantiles(std::vector<double> values);

// --- aggregate --------------------------------------------------------------

struct PolicyCurve {
  std::string policy;
  std::vector<Quantiles> per_round;
  std::vector<double> normalized;  // median / oracle median, NaN if undefined
  Quantiles final_regret;
  Quantiles final_mean_gap;
  std::optional<Quantiles> pct_decrease_vs_ares;  // (R_alg - R_ares) / R_alg * 100
};

struct PsiReport {
  double psi = 0.0;
  double generator_rho = 0.0;
  double closed_loop_rho = 0.0;
  double max_innovation_variance = 0.0;
  double b_r = 0.0;
  double rexp3_clip = 0.0;
  std::size_t num_arms = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<PolicyCurve> curves;
  std::vector<std::vector<double>> final_regrets;  // [policy][sim]

  bool has_ares = false;
  std::vector<double> mean_u;          // [round*k+arm]
  std::vector<double> mean_s;
  std::vector<double> mean_abs_bias;   // instrumented only
  std::vector<double> mean_b_width;
  std::vector<double> tail_mean_s;     // [arm], average s_a over the last tail rounds

  std::vector<std::size_t> residual_windows;          // s of each PIES policy
  std::vector<std::vector<double>> mean_residual;     // [pies][round*k+arm]
  std::vector<std::vector<double>> tail_residual;     // [pies][arm]
};

struct AggregateReport {
  ExperimentConfig config;
  std::vector<PsiReport> systems;
};

PsiReport aggregate(const SystemSetup& system, const ExperimentConfig& config,
                    const std::vector<SimulationTrace>& traces);

AggregateReport run_experiment(const ExperimentConfig& config);

/// Writes regret_<psi>.csv, diagnostics_<psi>.csv, residuals_<psi>.csv and
/// summary.json into dir (created if needed).
void write_report(const AggregateReport& report, const std::filesystem::path& dir);

/// "%.9g"
std::string format_number(double value);
/// Number used in per-psi file names ("1", "2.5").
std::string psi_label(double psi);

}  // namespace ares
