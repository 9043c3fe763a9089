#pragma once

// Shared per-round contract for every bandit policy:
//   select(t)  -> arm, using contexts theta_0 .. theta_{t-1}
//   observe(t, arm, X_t, theta_t)

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ares/environment.hpp"
#include "ares/regressor.hpp"

namespace ares {

/// Per-arm quantities a policy computed while selecting; exported into the
/// experiment trace. Empty vectors mean "not applicable".
struct SelectionInfo {
  std::vector<double> perturbation;  // u_a
  std::vector<std::size_t> window;   // s_a
  std::vector<std::optional<double>> prediction;  // reward prediction per arm
};

class Policy {
 public:
  virtual ~Policy() = default;

  virtual const std::string& id() const = 0;
  virtual std::size_t select(std::size_t round) = 0;
  virtual void observe(std::size_t round, std::size_t arm, double reward,
                       const Vector& context) = 0;

  /// Details about the most recent select() call.
  virtual const SelectionInfo* selection_info() const { return nullptr; }
};

/// Tunables for the baselines whose hyperparameters are not pinned by the
/// algorithm description; defaults are reported in the experiment summary.
struct PolicySettings {
  std::size_t swucb_window = 500;
  double swucb_scale = 2.0;
  std::optional<std::size_t> rexp3_batch;  // default derived from k and n
  std::optional<double> rexp3_gamma;       // default derived from k and batch
  std::optional<double> rexp3_clip;        // default derived from the true system
  std::size_t ares_max_window = 10;
  bool ares_refresh_penalties = false;
};

struct BiasModel {
  std::vector<double> b_beta;  // B_beta(s), s = 0 .. max window
  Matrix state_cov;            // stationary state covariance
};

struct PolicyContext {
  const EnvParams* params = nullptr;  // true system: Oracle and instrumentation only
  std::size_t horizon = 0;
  BoundParams bounds;
  PolicySettings settings;
  std::uint64_t seed = 0;
  std::optional<BiasModel> bias_model;  // enables "ares-b"
};

bool is_known_policy(const std::string& id);

/// Registered ids: "oracle", "ares", "ares-b", "ucb", "swucb", "rexp3",
/// "random", "pies-s<j>". Throws std::invalid_argument for anything else.
std::unique_ptr<Policy> make_policy(const std::string& id, const PolicyContext& ctx);

std::vector<std::string> default_policy_ids();

}  // namespace ares
