#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ares/harness.hpp"
#include "json.hpp"

namespace ares {

using nlohmann::json;

namespace {

void reject_unknown(const json& section, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!section.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : section.items())
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& section, const char* key, T& out) {
  if (!section.contains(key)) return;
  try {
    out = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T>
void read_optional(const json& section, const char* key, std::optional<T>& out) {
  if (!section.contains(key) || section.at(key).is_null()) return;
  T value{};
  read(section, key, value);
  out = value;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (psi_values.empty()) throw ConfigError("psi_values must not be empty");
  for (double psi : psi_values)
    if (!(psi > 0.0)) throw ConfigError("psi values must be positive");
  if (state_dim < 2) throw ConfigError("state_dim must be at least 2");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (num_sims < 1) throw ConfigError("num_sims must be >= 1");
  if (policies.empty()) throw ConfigError("at least one policy is required");
  std::set<std::string> seen;
  for (const auto& id : policies) {
    if (!is_known_policy(id)) throw ConfigError("unknown policy id: " + id);
    if (!seen.insert(id).second) throw ConfigError("duplicate policy id: " + id);
    if (id == "ares-b" && !instrumented)
      throw ConfigError("policy ares-b requires an instrumented experiment");
  }
  if (normalize && !seen.contains("oracle"))
    throw ConfigError("normalization requested but the oracle policy is not configured");
  if (settings.swucb_window < 1) throw ConfigError("swucb window must be >= 1");
  if (b_r_override && !(*b_r_override > 0.0)) throw ConfigError("b_r must be positive");
  try {
    BoundParams probe = bounds;
    probe.b_r = 1.0;
    probe.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string item(text.substr(start, end - start));
    if (!item.empty()) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size()) throw ConfigError("not a number: '" + item + "'");
      out.push_back(value);
    }
    start = end + 1;
  }
  return out;
}

std::vector<std::string> parse_name_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string item(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root, {"environment", "experiment", "policies", "bounds", "output_dir"}, "config");

  ExperimentConfig cfg;
  if (root.contains("environment")) {
    const json& env = root["environment"];
    reject_unknown(env, {"psi_values", "state_dim", "burn_in"}, "environment");
    read(env, "psi_values", cfg.psi_values);
    read(env, "state_dim", cfg.state_dim);
    read(env, "burn_in", cfg.burn_in);
  }
  if (root.contains("experiment")) {
    const json& ex = root["experiment"];
    reject_unknown(ex, {"horizon", "num_sims", "base_seed", "threads", "tail_rounds",
                        "instrumented", "normalize"},
                   "experiment");
    read(ex, "horizon", cfg.horizon);
    read(ex, "num_sims", cfg.num_sims);
    read(ex, "base_seed", cfg.base_seed);
    read(ex, "threads", cfg.threads);
    read(ex, "tail_rounds", cfg.tail_rounds);
    read(ex, "instrumented", cfg.instrumented);
    read(ex, "normalize", cfg.normalize);
  }
  if (root.contains("policies")) {
    const json& pol = root["policies"];
    reject_unknown(pol, {"ids", "swucb", "rexp3", "ares"}, "policies");
    read(pol, "ids", cfg.policies);
    if (pol.contains("swucb")) {
      const json& sw = pol["swucb"];
      reject_unknown(sw, {"window", "scale"}, "policies.swucb");
      read(sw, "window", cfg.settings.swucb_window);
      read(sw, "scale", cfg.settings.swucb_scale);
    }
    if (pol.contains("rexp3")) {
      const json& rx = pol["rexp3"];
      reject_unknown(rx, {"batch", "gamma", "clip"}, "policies.rexp3");
      read_optional(rx, "batch", cfg.settings.rexp3_batch);
      read_optional(rx, "gamma", cfg.settings.rexp3_gamma);
      read_optional(rx, "clip", cfg.settings.rexp3_clip);
    }
    if (pol.contains("ares")) {
      const json& ar = pol["ares"];
      reject_unknown(ar, {"max_window", "refresh_penalties"}, "policies.ares");
      read(ar, "max_window", cfg.settings.ares_max_window);
      read(ar, "refresh_penalties", cfg.settings.ares_refresh_penalties);
    }
  }
  if (root.contains("bounds")) {
    const json& b = root["bounds"];
    reject_unknown(b, {"delta", "lambda", "alpha", "nu", "b_r", "b_g", "b_c", "c_tilde", "k_subg"},
                   "bounds");
    read(b, "delta", cfg.bounds.delta);
    read(b, "lambda", cfg.bounds.lambda);
    read(b, "alpha", cfg.bounds.alpha);
    read(b, "nu", cfg.bounds.nu);
    read(b, "b_g", cfg.bounds.b_g);
    read(b, "b_c", cfg.bounds.b_c);
    read(b, "c_tilde", cfg.bounds.c_tilde);
    read(b, "k_subg", cfg.bounds.k_subg);
    read_optional(b, "b_r", cfg.b_r_override);
  }
  if (root.contains("output_dir")) {
    std::string dir;
    read(root, "output_dir", dir);
    cfg.output_dir = dir;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["environment"] = {{"psi_values", cfg.psi_values},
                      {"state_dim", cfg.state_dim},
                      {"burn_in", cfg.burn_in}};
  j["experiment"] = {{"horizon", cfg.horizon},         {"num_sims", cfg.num_sims},
                     {"base_seed", cfg.base_seed},     {"threads", cfg.threads},
                     {"tail_rounds", cfg.tail_rounds}, {"instrumented", cfg.instrumented},
                     {"normalize", cfg.normalize}};
  auto opt = [](const auto& v) -> nlohmann::ordered_json {
    if (v) return *v;
    return nullptr;
  };
  j["policies"] = {
      {"ids", cfg.policies},
      {"swucb", {{"window", cfg.settings.swucb_window}, {"scale", cfg.settings.swucb_scale}}},
      {"rexp3",
       {{"batch", opt(cfg.settings.rexp3_batch)},
        {"gamma", opt(cfg.settings.rexp3_gamma)},
        {"clip", opt(cfg.settings.rexp3_clip)}}},
      {"ares",
       {{"max_window", cfg.settings.ares_max_window},
        {"refresh_penalties", cfg.settings.ares_refresh_penalties}}}};
  j["bounds"] = {{"delta", cfg.bounds.delta}, {"lambda", cfg.bounds.lambda},
                 {"alpha", cfg.bounds.alpha}, {"nu", cfg.bounds.nu},
                 {"b_r", opt(cfg.b_r_override)}, {"b_g", cfg.bounds.b_g},
                 {"b_c", cfg.bounds.b_c},     {"c_tilde", cfg.bounds.c_tilde},
                 {"k_subg", cfg.bounds.k_subg}};
  j["output_dir"] = cfg.output_dir.string();
  return j.dump(2);
}

}  // namespace ares
