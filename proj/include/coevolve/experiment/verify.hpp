#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "coevolve/experiment/config.hpp"
#include "coevolve/experiment/runner.hpp"

namespace coevolve::experiment {

/// `L_K=<value>` replaces every recorded L_K, `L_K_scale=<factor>` scales it.
struct ConstantOverride {
  std::optional<double> l_k;
  double l_k_scale = 1.0;

  double apply(double recorded) const { return (l_k ? *l_k : recorded) * l_k_scale; }
  bool active() const { return l_k.has_value() || l_k_scale != 1.0; }
};

/// Accepts one or more comma-separated assignments.
void parse_override(std::string_view text, ConstantOverride& into);

struct TrialResult {
  std::string suite;   // "lipschitz" or "two_graphon"
  std::string system;  // graphon description
  double epsilon = 0.0;
  double t = 0.0;
  double initial_distance = 0.0;
  double l_k = 0.0;
  double measured = 0.0;
  double bound = 0.0;  // including the (1 + 10 h) slack
  double margin = 0.0;
  bool pass = true;
};

struct LemmaCheck {
  std::string name;
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max measured / bound
};

struct VerifyReport {
  std::vector<TrialResult> trials;
  std::vector<LemmaCheck> lemmas;
  ConstantOverride override_used;

  std::size_t violations() const;
  double min_margin() const;
  nlohmann::json to_json() const;
};

VerifyReport verify_bounds(const ExperimentConfig& cfg, const ConstantOverride& override_);

/// Random history pairs for the weight flow map w' = -w + cos(psi - phi):
/// ||w[g] - w[r]||_C <= e^{L_F T} max(1, L_F T) (||g1 - r1|| + ||g2 - r2||) (1 + 10 h).
LemmaCheck check_flow_lipschitz(std::size_t pairs, std::uint64_t seed, const TimeGrid& grid);

/// Random atom pairs of a Lipschitz-graphon characteristic system:
/// sup_t |Z^x(z) - Z^x'(z')| <= lipschitz_flow_bound(L_K, L_W, |z - z'|, |x - x'|, T) (1 + 10 h).
LemmaCheck check_characteristic_lipschitz(std::size_t pairs, std::uint64_t seed,
                                          const TimeGrid& grid);

/// verify_bounds plus verify.json and manifest.json.
RunOutcome run_verify(const ExperimentConfig& cfg, const ConstantOverride& override_,
                      VerifyReport* report = nullptr);

}  // namespace coevolve::experiment
