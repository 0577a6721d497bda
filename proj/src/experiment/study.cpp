#include "coevolve/experiment/study.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "coevolve/error.hpp"
#include "coevolve/meanfield.hpp"
#include "coevolve/transport.hpp"
#include "coevolve/experiment/svg.hpp"

namespace coevolve::experiment {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string cell(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : ""; }

void require_increasing(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 3) throw ConfigError("study needs at least three sizes");
  for (std::size_t k = 1; k < sizes.size(); ++k)
    if (sizes[k] <= sizes[k - 1]) throw ConfigError("study sizes must be strictly increasing");
}

StudyResult grid_study(const ExperimentConfig& cfg) {
  require_increasing(cfg.sizes);
  const MemoryKernel kernel = cfg.kernel();
  const Graphon graphon = cfg.graphon();
  const TimeGrid grid = cfg.grid();
  const std::size_t largest = cfg.sizes.back();
  const bool self = cfg.reference == "self";
  const std::size_t n_x = cfg.reference_n ? cfg.reference_n : largest;

  StudyResult result;
  result.reference = self ? "self" : fmt::format("continuum:n_x={}", n_x);

  std::vector<LabeledPathMeasure> runs;
  runs.reserve(cfg.sizes.size());
  for (std::size_t n : cfg.sizes) {
    const Ensemble e = simulate_memory(kernel, sample_pointwise(graphon, uniform_nodes(n)),
                                       grid_initial_states(*cfg.initial.profile, n, cfg.dim),
                                       grid, cfg.paranoid);
    runs.push_back(LabeledPathMeasure::empirical(e));
  }
  const LabeledPathMeasure reference =
      self ? runs.back()
           : continuum_to_measure(solve_continuum(
                                      kernel, graphon,
                                      grid_initial_states(*cfg.initial.profile, n_x, cfg.dim),
                                      grid))
                 .flat;

  for (std::size_t k = 0; k < runs.size(); ++k) {
    StudyRow row;
    row.size = cfg.sizes[k];
    // The continuum at n_x = N is the N-particle system itself.
    const bool is_reference = self ? k + 1 == runs.size() : cfg.sizes[k] == n_x;
    row.dist_to_limit = is_reference ? kNaN : path_wasserstein1(runs[k], reference).distance;
    row.dist_successive = k == 0 ? kNaN : path_wasserstein1(runs[k], runs[k - 1]).distance;
    result.rows.push_back(row);
  }
  return result;
}

StudyResult sampled_study(const ExperimentConfig& cfg) {
  std::vector<std::size_t> sizes;
  for (const auto& [n, m] : cfg.blocks) sizes.push_back(n * m);
  require_increasing(sizes);
  const InitialLaw& law = *cfg.initial.law;
  const bool self = cfg.reference == "self";
  if (!self && law.family() != InitialLaw::Family::dirac)
    throw ConfigError("continuum reference needs a dirac initial family; use reference = \"self\"");
  const MemoryKernel kernel = cfg.kernel();
  const Graphon graphon = cfg.graphon();
  const TimeGrid grid = cfg.grid();
  const std::size_t n_x = cfg.reference_n ? cfg.reference_n : sizes.back();

  StudyResult result;
  result.sampled = true;
  result.reference = self ? "self" : fmt::format("continuum:n_x={}", n_x);

  std::vector<FiberedMeasure> runs;
  for (const auto& [n, m] : cfg.blocks)
    runs.push_back(local_empirical_measure(
        sample_block_system(law, n, m, cfg.seed, graphon, kernel, grid), n, m));
  const FiberedMeasure reference =
      self ? runs.back()
           : continuum_to_measure(solve_continuum(kernel, graphon, law.first(), n_x, grid))
                 .fibered;

  const auto distance = [](const FiberedMeasure& a, const FiberedMeasure& b) {
    const std::size_t common = std::lcm(a.blocks(), b.blocks());
    return dist_fibered(a.refine(common), b.refine(common));
  };
  for (std::size_t k = 0; k < runs.size(); ++k) {
    StudyRow row;
    row.size = sizes[k];
    row.blocks = cfg.blocks[k].first;
    row.per_block = cfg.blocks[k].second;
    row.dist_to_limit =
        self && k + 1 == runs.size() ? kNaN : distance(runs[k], reference);
    row.dist_successive = k == 0 ? kNaN : distance(runs[k], runs[k - 1]);
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace

std::string StudyResult::table_csv() const {
  std::string out = sampled ? "N,dist_fibered,dist_successive,reference\n"
                            : "N,dist_to_limit,dist_successive,reference\n";
  for (const auto& row : rows)
    out += fmt::format("{},{},{},{}\n", row.size, cell(row.dist_to_limit),
                       cell(row.dist_successive), reference);
  return out;
}

StudyResult convergence_study(const ExperimentConfig& cfg) {
  return cfg.initial.mode == InitialSpec::Mode::sampled ? sampled_study(cfg) : grid_study(cfg);
}

RunOutcome run_study(const ExperimentConfig& cfg, StudyResult* result) {
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  StudyResult study = convergence_study(cfg);
  const double solve_seconds = elapsed();

  prepare_output_directory(cfg.output_dir);
  ArtifactSink sink(cfg.output_dir);
  const std::string csv = study.table_csv();
  if (cfg.wants("csv") || cfg.wants("svg"))
    sink.write("study.csv", csv, "study_csv", solve_seconds);
  if (cfg.wants("svg"))
    sink.write("study.svg", render_svg(read_plot_csv(csv), PlotKind::loglog, "study.csv"),
               "study_svg");
  if (cfg.wants("json")) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : study.rows) {
      nlohmann::json r = {{"N", row.size}};
      if (study.sampled) {
        r["n"] = row.blocks;
        r["m"] = row.per_block;
      }
      r["dist_to_limit"] = std::isfinite(row.dist_to_limit) ? nlohmann::json(row.dist_to_limit)
                                                            : nlohmann::json();
      r["dist_successive"] = std::isfinite(row.dist_successive)
                                 ? nlohmann::json(row.dist_successive)
                                 : nlohmann::json();
      rows.push_back(r);
    }
    const nlohmann::json doc = {{"mode", study.sampled ? "sampled" : "grid"},
                                {"reference", study.reference},
                                {"rows", rows}};
    sink.write("study.json", doc.dump(2) + "\n", "study_json");
  }

  RunOutcome outcome{base_manifest(cfg, "study"), {}};
  outcome.manifest.artifacts = sink.records();
  outcome.manifest.wall_seconds = elapsed();
  outcome.manifest_path = write_manifest(cfg.output_dir, outcome.manifest);
  if (result) *result = std::move(study);
  return outcome;
}

}  // namespace coevolve::experiment
