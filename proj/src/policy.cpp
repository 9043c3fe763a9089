#include "ares/policy.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "ares/ares.hpp"
#include "ares/baselines.hpp"

namespace ares {

namespace {

std::optional<std::size_t> pies_window(const std::string& id) {
  constexpr std::string_view prefix = "pies-s";
  if (id.size() <= prefix.size() || id.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  std::size_t value = 0;
  const char* first = id.data() + prefix.size();
  const char* last = id.data() + id.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || value == 0) return std::nullopt;
  return value;
}

double rexp3_clip(const PolicyContext& ctx) {
  if (ctx.settings.rexp3_clip) return *ctx.settings.rexp3_clip;
  if (ctx.params == nullptr)
    throw std::invalid_argument("rexp3: reward clip needs either a setting or the true system");
  const EnvParams& p = *ctx.params;
  const Matrix z = solve_lyapunov(p.gamma, p.q);
  double worst = 0.0;
  for (const auto& c : p.actions) worst = std::max(worst, c.dot(z * c));
  return 3.0 * std::sqrt(worst + p.sigma_eta * p.sigma_eta);
}

}  // namespace

bool is_known_policy(const std::string& id) {
  return id == "oracle" || id == "ares" || id == "ares-b" || id == "ucb" || id == "swucb" ||
         id == "rexp3" || id == "random" || pies_window(id).has_value();
}

std::vector<std::string> default_policy_ids() {
  std::vector<std::string> ids = {"oracle", "ares", "ucb", "swucb", "rexp3", "random"};
  for (int s = 1; s <= 10; ++s) ids.push_back("pies-s" + std::to_string(s));
  return ids;
}

std::unique_ptr<Policy> make_policy(const std::string& id, const PolicyContext& ctx) {
  if (ctx.params == nullptr) throw std::invalid_argument("make_policy: missing system description");
  const std::size_t k = ctx.params->num_arms();
  const std::size_t m = ctx.params->context_dim();

  if (id == "oracle") return std::make_unique<OraclePolicy>(id, *ctx.params);
  if (id == "ares" || id == "ares-b") {
    AresConfig config;
    config.bounds = ctx.bounds;
    config.max_window = ctx.settings.ares_max_window;
    config.refresh_all_penalties = ctx.settings.ares_refresh_penalties;
    if (id == "ares-b") {
      if (!ctx.bias_model)
        throw std::invalid_argument("ares-b is only available in instrumented experiments");
      config.perturbation = PerturbationKind::with_bias;
      config.bias_model = ctx.bias_model;
    }
    return std::make_unique<AresPolicy>(id, k, m, std::move(config));
  }
  if (id == "ucb") return std::make_unique<UcbPolicy>(id, k, ctx.bounds.delta);
  if (id == "swucb")
    return std::make_unique<SlidingWindowUcbPolicy>(id, k, ctx.settings.swucb_window,
                                                    ctx.settings.swucb_scale);
  if (id == "rexp3") {
    const std::size_t batch =
        ctx.settings.rexp3_batch.value_or(rexp3_default_batch(k, ctx.horizon));
    const double gamma = ctx.settings.rexp3_gamma.value_or(rexp3_default_gamma(k, batch));
    return std::make_unique<Rexp3Policy>(id, k, batch, gamma, rexp3_clip(ctx), ctx.seed);
  }
  if (id == "random") return std::make_unique<RandomPolicy>(id, k, ctx.seed);
  if (auto s = pies_window(id)) return std::make_unique<PiesPolicy>(id, k, m, *s, ctx.bounds.lambda);
  throw std::invalid_argument("unknown policy id: " + id);
}

}  // namespace ares
