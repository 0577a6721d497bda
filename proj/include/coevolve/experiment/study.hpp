#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coevolve/experiment/config.hpp"
#include "coevolve/experiment/runner.hpp"

namespace coevolve::experiment {

struct StudyRow {
  std::size_t size = 0;  // N
  std::size_t blocks = 0;
  std::size_t per_block = 0;
  double dist_to_limit = 0.0;     // NaN for the reference itself
  double dist_successive = 0.0;   // NaN for the first row
};

struct StudyResult {
  bool sampled = false;
  /// "continuum:n_x=<n>" or "self".
  std::string reference;
  std::vector<StudyRow> rows;

  std::string table_csv() const;
};

/// Grid mode: path W1 of each N against the continuum reference (or the
/// finest run) and against the previous N. Sampled mode: fibered distance
/// of each local empirical measure to the Dirac-fiber continuum (or the
/// finest run), on the common refinement of the two partitions.
StudyResult convergence_study(const ExperimentConfig& cfg);

/// convergence_study plus study.csv, study.svg, study.json and manifest.json.
RunOutcome run_study(const ExperimentConfig& cfg, StudyResult* result = nullptr);

}  // namespace coevolve::experiment
