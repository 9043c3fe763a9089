#include <cmath>
#include <fstream>

#include "ares/baselines.hpp"
#include "ares/harness.hpp"
#include "json.hpp"

namespace ares {

using ojson = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// JSON has no NaN; undefined values become null.
ojson num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ojson quantiles(const Quantiles& q) {
  return {{"q25", num(q.q25)}, {"median", num(q.median)}, {"q75", num(q.q75)}};
}

void write_regret(const PsiReport& rep, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "round,policy,median,q25,q75,normalized\n";
  const std::size_t n = rep.curves.empty() ? 0 : rep.curves.front().per_round.size();
  for (std::size_t t = 0; t < n; ++t)
    for (const auto& c : rep.curves) {
      const Quantiles& q = c.per_round[t];
      out << t + 1 << ',' << c.policy << ',' << format_number(q.median) << ','
          << format_number(q.q25) << ',' << format_number(q.q75) << ','
          << format_number(c.normalized[t]) << '\n';
    }
}

void write_diagnostics(const PsiReport& rep, const std::filesystem::path& path) {
  auto out = open_out(path);
  const bool inst = !rep.mean_abs_bias.empty();
  out << "round,arm,mean_u,mean_s";
  if (inst) out << ",mean_abs_bias,mean_b_width";
  out << '\n';
  const std::size_t k = rep.num_arms;
  const std::size_t n = k == 0 ? 0 : rep.mean_u.size() / k;
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t a = 0; a < k; ++a) {
      const std::size_t j = t * k + a;
      out << t + 1 << ',' << a << ',' << format_number(rep.mean_u[j]) << ','
          << format_number(rep.mean_s[j]);
      if (inst) out << ',' << format_number(rep.mean_abs_bias[j]) << ','
                    << format_number(rep.mean_b_width[j]);
      out << '\n';
    }
}

void write_residuals(const PsiReport& rep, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "round,arm,s,mean_abs_residual\n";
  const std::size_t k = rep.num_arms;
  if (rep.mean_residual.empty() || k == 0) return;
  const std::size_t n = rep.mean_residual.front().size() / k;
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t q = 0; q < rep.residual_windows.size(); ++q)
        out << t + 1 << ',' << a << ',' << rep.residual_windows[q] << ','
            << format_number(rep.mean_residual[q][t * k + a]) << '\n';
}

}  // namespace

void write_report(const AggregateReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const ExperimentConfig& cfg = report.config;

  ojson summary;
  summary["config"] = ojson::parse(config_to_json(cfg));
  summary["metadata"] = {
      {"regret", "cumulative X_{a*,t} - X_{a_t,t}, a* maximizing the noiseless mean"},
      {"mean_gap", "cumulative <c_{a*},z_t> - <c_{a_t},z_t>"},
      {"quantiles", "nearest rank"},
      {"common_random_numbers", "one burn-in and reward tape per (psi, simulation) shared by all policies"},
      {"swucb", {{"window", cfg.settings.swucb_window}, {"scale", cfg.settings.swucb_scale}}},
      {"rexp3",
       {{"batch", cfg.settings.rexp3_batch ? ojson(*cfg.settings.rexp3_batch)
                                           : ojson("ceil((k log k n^2)^(1/3)) clamped to [50, n]")},
        {"gamma", cfg.settings.rexp3_gamma ? ojson(*cfg.settings.rexp3_gamma)
                                           : ojson("min(1, sqrt(k log k / ((e-1) batch)))")},
        {"clip", cfg.settings.rexp3_clip
                     ? ojson(*cfg.settings.rexp3_clip)
                     : ojson("3 sqrt(max_a c_a' Z c_a + sigma_eta^2), Z stationary covariance")}}},
      {"ucb", {{"delta", cfg.bounds.delta}}}};

  ojson systems = ojson::array();
  for (const PsiReport& rep : report.systems) {
    const std::string label = psi_label(rep.psi);
    write_regret(rep, dir / ("regret_" + label + ".csv"));
    if (rep.has_ares) write_diagnostics(rep, dir / ("diagnostics_" + label + ".csv"));
    if (!rep.residual_windows.empty()) write_residuals(rep, dir / ("residuals_" + label + ".csv"));

    ojson sys;
    sys["psi"] = rep.psi;
    sys["generator_spectral_radius"] = num(rep.generator_rho);
    sys["closed_loop_spectral_radius"] = num(rep.closed_loop_rho);
    sys["max_innovation_variance"] = num(rep.max_innovation_variance);
    sys["b_r"] = num(rep.b_r);
    sys["rexp3_clip"] = num(rep.rexp3_clip);
    sys["seeds"] = rep.seeds;
    ojson policies = ojson::array();
    for (std::size_t p = 0; p < rep.curves.size(); ++p) {
      const PolicyCurve& c = rep.curves[p];
      ojson entry;
      entry["policy"] = c.policy;
      entry["final_regret"] = quantiles(c.final_regret);
      entry["final_mean_gap"] = quantiles(c.final_mean_gap);
      entry["final_normalized"] = c.normalized.empty() ? ojson(nullptr) : num(c.normalized.back());
      entry["pct_decrease_vs_ares"] =
          c.pct_decrease_vs_ares ? quantiles(*c.pct_decrease_vs_ares) : ojson(nullptr);
      ojson finals = ojson::array();
      for (double v : rep.final_regrets[p]) finals.push_back(num(v));
      entry["final_regret_per_sim"] = std::move(finals);
      policies.push_back(std::move(entry));
    }
    sys["policies"] = std::move(policies);
    if (rep.has_ares) {
      ojson tail = ojson::array();
      for (double v : rep.tail_mean_s) tail.push_back(num(v));
      sys["ares_tail_mean_window"] = std::move(tail);
    }
    if (!rep.residual_windows.empty()) {
      ojson res = ojson::array();
      for (std::size_t q = 0; q < rep.residual_windows.size(); ++q) {
        ojson row;
        row["s"] = rep.residual_windows[q];
        ojson per_arm = ojson::array();
        for (double v : rep.tail_residual[q]) per_arm.push_back(num(v));
        row["tail_mean_abs_residual"] = std::move(per_arm);
        res.push_back(std::move(row));
      }
      sys["pies_tail_residuals"] = std::move(res);
    }
    systems.push_back(std::move(sys));
  }
  summary["systems"] = std::move(systems);

  auto out = open_out(dir / "summary.json");
  out << summary.dump(2) << '\n';
}

}  // namespace ares
