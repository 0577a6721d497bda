#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "coevolve/bounds.hpp"
#include "coevolve/error.hpp"
#include "coevolve/meanfield.hpp"
#include "coevolve/experiment/config.hpp"
#include "coevolve/experiment/runner.hpp"
#include "coevolve/experiment/study.hpp"
#include "coevolve/experiment/svg.hpp"
#include "coevolve/experiment/verify.hpp"

namespace {

enum Exit : int { ok = 0, other = 1, config = 2, divergence = 3, violation = 4 };

using namespace coevolve;
using namespace coevolve::experiment;

int run_command(const std::string& path) {
  const RunOutcome out = run_experiment(load_config(path));
  fmt::print("{}\n", out.manifest_path.string());
  return ok;
}

int study_command(const std::string& path) {
  StudyResult study;
  const RunOutcome out = run_study(load_config(path), &study);
  fmt::print("{}", study.table_csv());
  fmt::print(stderr, "manifest: {}\n", out.manifest_path.string());
  return ok;
}

int verify_command(const std::string& path, const std::vector<std::string>& overrides) {
  ConstantOverride over;
  for (const auto& o : overrides) parse_override(o, over);
  VerifyReport report;
  const RunOutcome out = run_verify(load_config(path), over, &report);
  for (const auto& t : report.trials)
    fmt::print("{:<11} {:<36} eps={:<7g} t={:<5g} measured={:.6e} bound={:.6e} {}\n", t.suite,
               t.system, t.epsilon, t.t, t.measured, t.bound, t.pass ? "ok" : "VIOLATED");
  for (const auto& l : report.lemmas)
    fmt::print("{:<26} pairs={} violations={} worst_ratio={:.4f}\n", l.name, l.pairs,
               l.violations, l.worst_ratio);
  fmt::print("violations={} min_margin={:.6e}\n", report.violations(), report.min_margin());
  fmt::print(stderr, "manifest: {}\n", out.manifest_path.string());
  return report.violations() == 0 ? ok : violation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coevolving-network particle systems and their mean-field limits"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "simulate the configured sizes and write trajectories");
  run->add_option("config", config_path, "TOML configuration")->required();

  auto* study = app.add_subcommand("study", "convergence study over the configured sizes");
  study->add_option("config", config_path, "TOML configuration")->required();

  std::vector<std::string> overrides;
  auto* verify = app.add_subcommand("verify", "stability-bound perturbation suites");
  verify->add_option("config", config_path, "TOML configuration")->required();
  verify->add_option("--override", overrides, "L_K=<value> or L_K_scale=<factor>");

  std::string csv_path;
  std::string kind = "loglog";
  auto* plot = app.add_subcommand("plot", "render a CSV table as SVG next to it");
  plot->add_option("csv", csv_path, "input CSV")->required();
  plot->add_option("--kind", kind, "loglog or series");

  double lk = 0.0, lw = 1.0, d0 = 0.0, t = 0.0, di0 = 0.0, wl1 = 0.0, dzeta = 0.0,
         dx = 0.0;
  auto* bound = app.add_subcommand("bound", "evaluate a stability bound");
  bound->require_subcommand(1);
  auto* dob = bound->add_subcommand("dobrushin", "sqrt(2) max(1, L_W) d0 2 e^{2 L_K t}");
  dob->add_option("--lk", lk)->required();
  dob->add_option("--lw", lw)->required();
  dob->add_option("--d0", d0)->required();
  dob->add_option("--t", t)->required();
  auto* nonlip = bound->add_subcommand("nonlip", "2 dI0 e^{2 L_K t} + |W - W'|_1 (e^{2 L_K t} - 1) / 2");
  nonlip->add_option("--lk", lk)->required();
  nonlip->add_option("--di0", di0)->required();
  nonlip->add_option("--wl1", wl1)->required();
  nonlip->add_option("--t", t)->required();
  auto* flow = bound->add_subcommand("flow", "e^{L_K t} dzeta + L_W (e^{L_K t} - 1) dx");
  flow->add_option("--lk", lk)->required();
  flow->add_option("--lw", lw)->required();
  flow->add_option("--dzeta", dzeta)->required();
  flow->add_option("--dx", dx)->required();
  flow->add_option("--t", t)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config;
  }

  try {
    if (*run) return run_command(config_path);
    if (*study) return study_command(config_path);
    if (*verify) return verify_command(config_path, overrides);
    if (*plot) {
      fmt::print("{}\n", emit_svg(csv_path, parse_plot_kind(kind)).string());
      return ok;
    }
    const auto nonneg = [](std::initializer_list<double> values) {
      for (double v : values)
        if (!(v >= 0.0)) throw ConfigError("bound arguments must be nonnegative");
    };
    double value = 0.0;
    if (*dob) {
      nonneg({lk, lw, d0, t});
      value = dobrushin_bound(lk, lw, d0, t);
    } else if (*nonlip) {
      nonneg({lk, di0, wl1, t});
      value = dobrushin_bound_nonlip(lk, di0, wl1, t);
    } else {
      nonneg({lk, lw, dzeta, dx, t});
      value = lipschitz_flow_bound(lk, lw, dzeta, dx, t);
    }
    fmt::print("{:.17g}\n", value);
    return ok;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return config;
  } catch (const DivergenceError& e) {
    fmt::print(stderr, "divergence: {}\n", e.what());
    return divergence;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return other;
  }
}
