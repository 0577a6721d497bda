#include "coevolve/experiment/runner.hpp"

#include <chrono>
#include <sstream>

#include <fmt/format.h>

#include "coevolve/error.hpp"
#include "coevolve/meanfield.hpp"
#include "coevolve/measures.hpp"
#include "coevolve/parallel.hpp"
#include "coevolve/rng.hpp"
#include "coevolve/transport.hpp"

namespace coevolve::experiment {

StateList grid_initial_states(const Profile& profile, std::size_t n, std::size_t dim) {
  StateList states;
  states.reserve(n);
  for (double x : uniform_nodes(n)) states.emplace_back(dim, profile(x));
  return states;
}

RunManifest base_manifest(const ExperimentConfig& cfg, std::string command) {
  RunManifest m;
  m.command = std::move(command);
  m.config_path = cfg.source.string();
  m.config_hash = cfg.config_hash;
  m.seed = cfg.seed;
  m.generator = std::string(CounterRng::name);
  m.threads = worker_count();
  m.integrator = {{"scheme", "heun-with-history"},
                  {"T", cfg.t_end},
                  {"steps", cfg.steps},
                  {"h", cfg.grid().step_size()},
                  {"paranoid", cfg.paranoid},
                  {"kernel", cfg.kernel_name},
                  {"graphon", cfg.graphon_name}};
  return m;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Rethrows solver failures with the run they belong to.
template <typename F>
auto with_context(const std::string& context, F&& body) {
  try {
    return body();
  } catch (const KernelError& e) {
    throw KernelError(fmt::format("{}: {}", context, e.what()), e.step(), e.row(), e.col());
  } catch (const DivergenceError& e) {
    throw DivergenceError(fmt::format("{}: {}", context, e.what()), e.step());
  }
}

nlohmann::json run_metrics(const Ensemble& e) {
  const LabeledPathMeasure mu = LabeledPathMeasure::empirical(e);
  const double t_end = e.grid().t_end();
  double displacement = 0.0;
  for (const auto& traj : e.trajectories())
    displacement = std::max(displacement, sup_distance(traj, Trajectory::constant(
                                                                  traj.grid(), traj.at_node(0))));
  nlohmann::json metrics = {{"particles", e.size()},
                            {"max_displacement", displacement}};
  if (e.size() <= kMaxTransportAtoms)
    metrics["w1_initial_to_final"] =
        wasserstein1_exact(mu.at_time(0.0), mu.at_time(t_end)).distance;
  return metrics;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const MemoryKernel kernel = cfg.kernel();
  const Graphon graphon = cfg.graphon();
  const TimeGrid grid = cfg.grid();
  const bool sampled = cfg.initial.mode == InitialSpec::Mode::sampled;
  if (!sampled && cfg.sizes.empty()) throw ConfigError("run needs [sizes] N = [...]");
  if (sampled && cfg.blocks.empty()) throw ConfigError("sampled run needs [sizes] blocks = [[n, m], ...]");
  if (sampled && cfg.dim != 1) throw ConfigError("sampled initial data is scalar; set dim = 1");

  prepare_output_directory(cfg.output_dir);
  ArtifactSink sink(cfg.output_dir);
  nlohmann::json metrics = nlohmann::json::array();

  if (!sampled) {
    for (std::size_t n : cfg.sizes) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::vector<double> x = uniform_nodes(n);
      const Ensemble e = with_context(fmt::format("run N={}", n), [&] {
        return simulate_memory(kernel, sample_pointwise(graphon, x),
                               grid_initial_states(*cfg.initial.profile, n, cfg.dim), grid,
                               cfg.paranoid);
      });
      const double wall = seconds_since(t0);
      if (cfg.wants("csv")) {
        std::ostringstream os;
        write_ensemble_csv(os, e);
        sink.write(fmt::format("trajectories_N{}.csv", n), os.str(), "ensemble_csv", wall);
      }
      nlohmann::json m = run_metrics(e);
      m["N"] = n;
      metrics.push_back(m);
    }
  } else {
    for (const auto& [n, m] : cfg.blocks) {
      const auto t0 = std::chrono::steady_clock::now();
      const Ensemble e = with_context(fmt::format("run n={} m={}", n, m), [&] {
        return sample_block_system(*cfg.initial.law, n, m, cfg.seed, graphon, kernel, grid);
      });
      const double wall = seconds_since(t0);
      const std::string csv_name = fmt::format("trajectories_n{}_m{}.csv", n, m);
      if (cfg.wants("csv")) {
        std::ostringstream os;
        write_ensemble_csv(os, e);
        sink.write(csv_name, os.str(), "ensemble_csv", wall);
      }
      if (cfg.wants("json")) {
        nlohmann::json blocks = nlohmann::json::array();
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<std::size_t> particles(m);
          for (std::size_t a = 0; a < m; ++a) particles[a] = i * m + a;
          blocks.push_back({{"block", i},
                            {"lower", static_cast<double>(i) / static_cast<double>(n)},
                            {"upper", static_cast<double>(i + 1) / static_cast<double>(n)},
                            {"atoms_csv", csv_name},
                            {"particles", particles}});
        }
        const nlohmann::json fibers = {{"blocks", n}, {"per_block", m}, {"fibers", blocks}};
        sink.write(fmt::format("fibers_n{}_m{}.json", n, m), fibers.dump(2) + "\n",
                   "fibered_measure_json");
      }
      nlohmann::json mj = run_metrics(e);
      mj["n"] = n;
      mj["m"] = m;
      metrics.push_back(mj);
    }
  }
  if (cfg.wants("json"))
    sink.write("metrics.json", nlohmann::json{{"runs", metrics}}.dump(2) + "\n", "metrics_json");

  RunOutcome outcome{base_manifest(cfg, "run"), {}};
  outcome.manifest.artifacts = sink.records();
  outcome.manifest.wall_seconds = seconds_since(start);
  outcome.manifest_path = write_manifest(cfg.output_dir, outcome.manifest);
  return outcome;
}

}  // namespace coevolve::experiment
