#pragma once

#include <filesystem>
#include <string>

#include "coevolve/experiment/artifacts.hpp"
#include "coevolve/experiment/config.hpp"
#include "coevolve/particle_dynamics.hpp"

namespace coevolve::experiment {

struct RunOutcome {
  RunManifest manifest;
  std::filesystem::path manifest_path;
};

/// Profile values at the n cell centers, repeated over the configured
/// dimension.
StateList grid_initial_states(const Profile& profile, std::size_t n, std::size_t dim);

/// Manifest skeleton shared by every subcommand.
RunManifest base_manifest(const ExperimentConfig& cfg, std::string command);

/// simulate -> measures -> metrics for every configured size; writes
/// trajectories, fiber manifests, metrics.json and manifest.json.
RunOutcome run_experiment(const ExperimentConfig& cfg);

}  // namespace coevolve::experiment
