#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "coevolve/graphon.hpp"
#include "coevolve/initial_data.hpp"
#include "coevolve/kernel.hpp"
#include "coevolve/trajectory.hpp"

namespace coevolve::experiment {

/// `constant:<c>`, `product`, `min`, `cosine`, `threshold:<r>`,
/// `step:<n>:<graphon>` (pointwise step approximation on n cells).
Graphon parse_graphon(std::string_view name);

struct InitialSpec {
  enum class Mode { grid, sampled };
  Mode mode = Mode::grid;
  std::optional<Profile> profile;  // grid mode
  std::optional<InitialLaw> law;   // sampled mode
};

/// Perturbation suites; defaults are the shipped 24-trial suite.
struct VerifySpec {
  // Lipschitz-graphon stability trials.
  std::string lipschitz_kernel = "flow:kuramoto:linear:1:cos";
  std::vector<std::string> lipschitz_graphons{"product", "cosine"};
  std::size_t particles = 16;
  std::string profile = "sin:1:1";
  std::vector<double> epsilons{1e-3, 1e-2, 1e-1};
  std::vector<double> times{0.25, 0.5, 1.0};
  // Two-graphon stability trials in the fibered distance.
  std::string nonlip_kernel = "flow:constant:1:zero";
  std::string nonlip_graphon = "threshold:0.3";
  std::string nonlip_approximation = "step:4:threshold:0.3";
  std::size_t fine_particles = 32;
  std::vector<double> nonlip_epsilons{0.0, 1e-2, 1e-1};
  std::vector<double> nonlip_times{0.25, 1.0};
  std::uint64_t jitter_seed = 7;
  // Random-pair checks of the flow-map and characteristic Lipschitz bounds.
  std::size_t lemma_pairs = 0;
};

struct ExperimentConfig {
  std::filesystem::path source;
  nlohmann::json canonical;  // sorted-key image of the parsed document
  std::string config_hash;   // SHA-256 of canonical.dump()

  std::string kernel_name;
  std::string graphon_name;
  std::size_t dim = 1;
  InitialSpec initial;
  double t_end = 1.0;
  std::size_t steps = 1000;
  std::vector<std::size_t> sizes;
  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // (n, m)
  std::uint64_t seed = 0;
  bool paranoid = false;

  std::string reference = "continuum";  // or "self"
  std::size_t reference_n = 0;          // 0: largest configured size

  VerifySpec verify;

  std::filesystem::path output_dir = "out";
  std::vector<std::string> formats{"csv", "json", "svg"};

  MemoryKernel kernel() const { return MemoryKernel::parse(kernel_name); }
  Graphon graphon() const { return parse_graphon(graphon_name); }
  TimeGrid grid() const { return TimeGrid(t_end, steps); }
  bool wants(std::string_view format) const;
};

/// Parses and validates TOML; errors are ConfigError with line numbers.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& source);

}  // namespace coevolve::experiment
