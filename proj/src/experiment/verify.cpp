#include "coevolve/experiment/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "coevolve/bounds.hpp"
#include "coevolve/catalog.hpp"
#include "coevolve/error.hpp"
#include "coevolve/meanfield.hpp"
#include "coevolve/particle_dynamics.hpp"
#include "coevolve/rng.hpp"
#include "coevolve/transport.hpp"

namespace coevolve::experiment {

void parse_override(std::string_view text, ConstantOverride& into) {
  const auto parsed = [&](std::string_view key, std::string_view value) {
    const double v = detail::parse_number(std::string(value), fmt::format("override {}", key));
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError(fmt::format("override {} must be a nonnegative number", key));
    return v;
  };
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("override '{}' is not <name>=<value>", item));
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "L_K")
      into.l_k = parsed(key, value);
    else if (key == "L_K_scale")
      into.l_k_scale = parsed(key, value);
    else
      throw ConfigError(fmt::format("unknown override '{}' (expected L_K or L_K_scale)", key));
  }
}

std::size_t VerifyReport::violations() const {
  std::size_t count = 0;
  for (const auto& t : trials) count += t.pass ? 0 : 1;
  for (const auto& l : lemmas) count += l.violations;
  return count;
}

double VerifyReport::min_margin() const {
  double m = HUGE_VAL;
  for (const auto& t : trials) m = std::min(m, t.margin);
  return m;
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json trials_json = nlohmann::json::array();
  for (const auto& t : trials)
    trials_json.push_back({{"suite", t.suite},
                           {"system", t.system},
                           {"epsilon", t.epsilon},
                           {"t", t.t},
                           {"initial_distance", t.initial_distance},
                           {"L_K", t.l_k},
                           {"measured", t.measured},
                           {"bound", t.bound},
                           {"margin", t.margin},
                           {"pass", t.pass}});
  nlohmann::json lemmas_json = nlohmann::json::array();
  for (const auto& l : lemmas)
    lemmas_json.push_back({{"name", l.name},
                           {"pairs", l.pairs},
                           {"violations", l.violations},
                           {"worst_ratio", l.worst_ratio}});
  nlohmann::json over = nlohmann::json::object();
  if (override_used.l_k) over["L_K"] = *override_used.l_k;
  if (override_used.l_k_scale != 1.0) over["L_K_scale"] = override_used.l_k_scale;
  return {{"trials", trials_json},
          {"lemmas", lemmas_json},
          {"override", over},
          {"violations", violations()},
          {"min_margin", trials.empty() ? nlohmann::json() : nlohmann::json(min_margin())},
          {"pass", violations() == 0}};
}

namespace {

TrialResult finish(TrialResult r, double slack) {
  r.bound *= slack;
  r.margin = r.bound - r.measured;
  r.pass = r.measured <= r.bound;
  return r;
}

void check_time(const TimeGrid& grid, double t) {
  if (t < 0.0 || t > grid.t_end() + 1e-12)
    throw ConfigError(fmt::format("verify time {} lies outside [0, {}]", t, grid.t_end()));
}

StateList scalar_states(const Profile& profile, const std::vector<double>& x,
                        const std::vector<double>& jitter, double epsilon) {
  StateList s;
  for (std::size_t k = 0; k < x.size(); ++k) s.push_back({profile(x[k]) + epsilon * jitter[k]});
  return s;
}

// Signed: a one-signed jitter keeps the particle order, and with symmetric
// weights the antisymmetric couplings conserve the mean, so W1 would stay
// frozen at its initial value.
std::vector<double> draw_jitter(std::uint64_t seed, std::uint64_t stream, std::size_t n) {
  CounterRng rng(seed, stream);
  std::vector<double> u(n);
  for (double& v : u) v = 2.0 * rng.uniform() - 1.0;
  return u;
}

void lipschitz_suite(const ExperimentConfig& cfg, const ConstantOverride& over,
                     VerifyReport& report) {
  const VerifySpec& v = cfg.verify;
  const TimeGrid grid = cfg.grid();
  const double slack = 1.0 + 10.0 * grid.step_size();
  const MemoryKernel kernel = MemoryKernel::parse(v.lipschitz_kernel);
  const Profile profile = Profile::parse(v.profile);
  const std::vector<double> x = uniform_nodes(v.particles);
  for (std::size_t gi = 0; gi < v.lipschitz_graphons.size(); ++gi) {
    const Graphon graphon = parse_graphon(v.lipschitz_graphons[gi]);
    const auto l_w = graphon.lipschitz();
    if (!l_w)
      throw ConfigError(fmt::format("graphon '{}' has no Lipschitz constant; move it to the "
                                    "two-graphon suite",
                                    v.lipschitz_graphons[gi]));
    const WeightMatrix weights = sample_pointwise(graphon, x);
    const double l_k = over.apply(
        kernel.constants(grid.t_end(), std::max(1.0, weights.max_abs())).lipschitz);
    const std::vector<double> jitter = draw_jitter(v.jitter_seed, gi, x.size());
    const LabeledPathMeasure base = LabeledPathMeasure::empirical(
        simulate_memory(kernel, weights, scalar_states(profile, x, jitter, 0.0), grid));
    for (double eps : v.epsilons) {
      const LabeledPathMeasure moved = LabeledPathMeasure::empirical(
          simulate_memory(kernel, weights, scalar_states(profile, x, jitter, eps), grid));
      const double d0 = wasserstein1_exact(base.at_time(0.0), moved.at_time(0.0)).distance;
      for (double t : v.times) {
        check_time(grid, t);
        TrialResult r;
        r.suite = "lipschitz";
        r.system = graphon.describe();
        r.epsilon = eps;
        r.t = t;
        r.initial_distance = d0;
        r.l_k = l_k;
        r.measured = wasserstein1_exact(base.at_time(t), moved.at_time(t)).distance;
        r.bound = dobrushin_bound(l_k, *l_w, d0, t);
        report.trials.push_back(finish(r, slack));
      }
    }
  }
}

void two_graphon_suite(const ExperimentConfig& cfg, const ConstantOverride& over,
                       VerifyReport& report) {
  const VerifySpec& v = cfg.verify;
  const TimeGrid grid = cfg.grid();
  const double slack = 1.0 + 10.0 * grid.step_size();
  const MemoryKernel kernel = MemoryKernel::parse(v.nonlip_kernel);
  const Profile profile = Profile::parse(v.profile);
  const std::size_t n = v.fine_particles;
  const std::vector<double> x = uniform_nodes(n);
  const WeightMatrix w = sample_pointwise(parse_graphon(v.nonlip_graphon), x);
  const WeightMatrix w_tilde = sample_pointwise(parse_graphon(v.nonlip_approximation), x);
  // Both systems realize N-cell step graphons, for which the midpoint rule
  // at resolution N is exact.
  const double w_l1 = lp_distance(step_graphon(w), step_graphon(w_tilde), 1, n);
  const double l_k = over.apply(
      kernel.constants(grid.t_end(), std::max({1.0, w.max_abs(), w_tilde.max_abs()})).lipschitz);
  const std::vector<double> jitter =
      draw_jitter(v.jitter_seed, v.lipschitz_graphons.size(), n);
  const FiberedMeasure base = local_empirical_measure(
      simulate_memory(kernel, w, scalar_states(profile, x, jitter, 0.0), grid), n, 1);
  for (double eps : v.nonlip_epsilons) {
    const FiberedMeasure moved = local_empirical_measure(
        simulate_memory(kernel, w_tilde, scalar_states(profile, x, jitter, eps), grid), n, 1);
    const double d_i0 = dist_fibered(base, moved, 0.0);
    for (double t : v.nonlip_times) {
      check_time(grid, t);
      TrialResult r;
      r.suite = "two_graphon";
      r.system = fmt::format("{} vs {}", v.nonlip_graphon, v.nonlip_approximation);
      r.epsilon = eps;
      r.t = t;
      r.initial_distance = d_i0;
      r.l_k = l_k;
      r.measured = dist_fibered(base, moved, t);
      r.bound = dobrushin_bound_nonlip(l_k, d_i0, w_l1, t);
      report.trials.push_back(finish(r, slack));
    }
  }
}

Trajectory smooth_history(const TimeGrid& grid, CounterRng& rng, const Trajectory* around,
                          double scale) {
  const double a = 2.0 * rng.uniform() - 1.0;
  const double b = rng.uniform();
  const double omega = 0.5 + 3.5 * rng.uniform();
  const double phase = 2.0 * std::numbers::pi * rng.uniform();
  TrajectoryBuilder builder(grid, 1);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    const double s = a + b * std::sin(omega * grid.node(i) + phase);
    const double value = around ? around->at_node(i)[0] + scale * s : s;
    builder.append({&value, 1});
  }
  return std::move(builder).finish();
}

void record(LemmaCheck& check, double measured, double bound) {
  ++check.pairs;
  if (measured > bound) ++check.violations;
  if (bound > 0.0)
    check.worst_ratio = std::max(check.worst_ratio, measured / bound);
  else if (measured > 0.0)
    check.worst_ratio = HUGE_VAL;
}

}  // namespace

LemmaCheck check_flow_lipschitz(std::size_t pairs, std::uint64_t seed, const TimeGrid& grid) {
  const WeightDynamics dynamics = WeightDynamics::linear(1.0, PairFunction::cosine());
  const double l_f = dynamics.lipschitz();
  const double t_end = grid.t_end();
  const double growth = std::exp(l_f * t_end) * std::max(1.0, l_f * t_end);
  const double slack = 1.0 + 10.0 * grid.step_size();
  LemmaCheck check{"flow_map_lipschitz", 0, 0, 0.0};
  for (std::size_t p = 0; p < pairs; ++p) {
    CounterRng rng(seed, p);
    const double w0 = 2.0 * rng.uniform() - 1.0;
    const double scale = std::pow(10.0, -3.0 * rng.uniform());
    const Trajectory g1 = smooth_history(grid, rng, nullptr, 0.0);
    const Trajectory g2 = smooth_history(grid, rng, nullptr, 0.0);
    const Trajectory r1 = smooth_history(grid, rng, &g1, scale);
    const Trajectory r2 = smooth_history(grid, rng, &g2, scale);
    const double measured = sup_distance(solve_weight_ode(dynamics, w0, g1, g2, grid),
                                         solve_weight_ode(dynamics, w0, r1, r2, grid));
    const double bound = growth * (sup_distance(g1, r1) + sup_distance(g2, r2)) * slack;
    record(check, measured, bound);
  }
  return check;
}

LemmaCheck check_characteristic_lipschitz(std::size_t pairs, std::uint64_t seed,
                                          const TimeGrid& grid) {
  constexpr std::size_t kDriving = 6;
  const MemoryKernel kernel = MemoryKernel::parse("flow:kuramoto:linear:1:cos");
  const Graphon graphon = Graphon::product();
  const double l_w = *graphon.lipschitz();
  const double l_k = kernel.constants(grid.t_end(), 1.0).lipschitz;
  const double slack = 1.0 + 10.0 * grid.step_size();
  LemmaCheck check{"characteristic_lipschitz", 0, 0, 0.0};
  for (std::size_t p = 0; p < pairs; ++p) {
    CounterRng rng(seed ^ 0x9e3779b97f4a7c15ULL, p);
    std::vector<double> atoms;
    std::vector<double> labels;
    std::vector<double> masses;
    for (std::size_t j = 0; j < kDriving + 2; ++j) {
      labels.push_back(rng.uniform());
      atoms.push_back(2.0 * rng.uniform() - 1.0);
      masses.push_back(j < kDriving ? 1.0 / static_cast<double>(kDriving) : 0.0);
    }
    // The probes carry no mass, so they follow the characteristic flow of
    // the driving measure without perturbing it.
    const double scale = std::pow(10.0, -3.0 * rng.uniform());
    labels[kDriving + 1] = std::clamp(labels[kDriving] + scale * (rng.uniform() - 0.5), 0.0,
                                      std::nextafter(1.0, 0.0));
    atoms[kDriving + 1] = atoms[kDriving] + scale * (rng.uniform() - 0.5);
    const LabeledPointMeasure mu0(1, atoms, labels, masses);
    const LabeledPathMeasure paths = solve_characteristics(kernel, graphon, mu0, grid);
    const double measured = sup_distance(paths.path(kDriving), paths.path(kDriving + 1));
    const double bound =
        lipschitz_flow_bound(l_k, l_w, std::abs(atoms[kDriving] - atoms[kDriving + 1]),
                             std::abs(labels[kDriving] - labels[kDriving + 1]), grid.t_end()) *
        slack;
    record(check, measured, bound);
  }
  return check;
}

VerifyReport verify_bounds(const ExperimentConfig& cfg, const ConstantOverride& override_) {
  VerifyReport report;
  report.override_used = override_;
  lipschitz_suite(cfg, override_, report);
  two_graphon_suite(cfg, override_, report);
  if (cfg.verify.lemma_pairs > 0) {
    report.lemmas.push_back(check_flow_lipschitz(cfg.verify.lemma_pairs, cfg.seed, cfg.grid()));
    report.lemmas.push_back(
        check_characteristic_lipschitz(cfg.verify.lemma_pairs, cfg.seed, cfg.grid()));
  }
  return report;
}

RunOutcome run_verify(const ExperimentConfig& cfg, const ConstantOverride& override_,
                      VerifyReport* report) {
  const auto start = std::chrono::steady_clock::now();
  VerifyReport result = verify_bounds(cfg, override_);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  prepare_output_directory(cfg.output_dir);
  ArtifactSink sink(cfg.output_dir);
  sink.write("verify.json", result.to_json().dump(2) + "\n", "verify_json", wall);
  RunOutcome outcome{base_manifest(cfg, "verify"), {}};
  outcome.manifest.artifacts = sink.records();
  outcome.manifest.wall_seconds = wall;
  outcome.manifest_path = write_manifest(cfg.output_dir, outcome.manifest);
  if (report) *report = std::move(result);
  return outcome;
}

}  // namespace coevolve::experiment
