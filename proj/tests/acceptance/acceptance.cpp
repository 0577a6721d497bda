// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
// Tolerances and runtime budgets are fixed here, not configurable.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "coevolve/meanfield.hpp"
#include "coevolve/particle_dynamics.hpp"
#include "coevolve/rng.hpp"
#include "coevolve/transport.hpp"
#include "coevolve/experiment/config.hpp"
#include "coevolve/experiment/verify.hpp"

using namespace coevolve;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

const MemoryKernel kKuramoto = MemoryKernel::parse("flow:kuramoto:linear:1:cos");

StateList profile_states(const Profile& u0, std::size_t n) {
  StateList s;
  for (double x : uniform_nodes(n)) s.push_back({u0(x)});
  return s;
}

Ensemble grid_run(const MemoryKernel& k, const Graphon& w, const Profile& u0, std::size_t n,
                  const TimeGrid& g) {
  return simulate_memory(k, sample_pointwise(w, uniform_nodes(n)), profile_states(u0, n), g);
}

// Distance between the fine-grid ensemble restricted to the coarse nodes
// and the coarse ensemble.
double coarse_sup(const Ensemble& fine, const Ensemble& coarse) {
  const std::size_t stride = fine.grid().steps() / coarse.grid().steps();
  double d = 0.0;
  for (std::size_t k = 0; k < coarse.size(); ++k)
    for (std::size_t i = 0; i < coarse.grid().nodes(); ++i)
      d = std::max(d, std::abs(fine[k].at_node(i * stride)[0] - coarse[k].at_node(i)[0]));
  return d;
}

Outcome formulation_equivalence() {
  const std::size_t n = 16;
  CounterRng rng(101);
  StateList s;
  for (std::size_t k = 0; k < n; ++k) s.push_back({6.0 * rng.uniform() - 3.0});
  const WeightMatrix w = sample_pointwise(Graphon::product(), uniform_nodes(n));
  const PairFunction c = PairFunction::kuramoto();
  const auto f = WeightDynamics::linear(1.0, PairFunction::cosine());
  const auto memory = [&](std::size_t steps) {
    return simulate_memory(MemoryKernel::flow(c, f), w, s, TimeGrid(1.0, steps));
  };
  const TimeGrid g(1.0, 1000);
  const Ensemble m1 = memory(1000);
  const double gap = max_sup_distance(m1, simulate_coupled(c, f, w, s, g).particles);
  // Error of each run estimated against the next finer one (Richardson).
  const Ensemble m2 = memory(2000), m4 = memory(4000);
  const double e1 = coarse_sup(m2, m1) * 4.0 / 3.0;
  const double e2 = coarse_sup(m4, m2) * 4.0 / 3.0;
  const double ratio = e1 / e2;
  return {gap <= 1e-6 && std::abs(ratio - 4.0) <= 0.5,
          fmt::format("sup|memory-joint|={:.3e} (<=1e-6) err(h)/err(h/2)={:.3f} (4+-0.5)", gap,
                      ratio)};
}

Outcome duhamel_closed_form() {
  const TimeGrid g(1.0, 1000);
  const std::size_t n = 8;
  CounterRng rng(102);
  StateList s;
  for (std::size_t k = 0; k < n; ++k) s.push_back({6.0 * rng.uniform() - 3.0});
  const WeightMatrix w = sample_pointwise(Graphon::product(), uniform_nodes(n));
  const PairFunction c = PairFunction::kuramoto();
  const double gap = max_sup_distance(
      simulate_memory(kernel_duhamel(c, 1.0, PairFunction::cosine()), w, s, g),
      simulate_memory(kernel_from_flow(c, WeightDynamics::linear(1.0, PairFunction::cosine())), w,
                      s, g));
  const double zero = 0.0;
  const Trajectory z = Trajectory::constant(g, {&zero, 1});
  const double decay = duhamel_weight(1.0, PairFunction::constant(0.0), 2.0, z, z, g).at_node(1000)[0];
  const double relax = duhamel_weight(1.0, PairFunction::constant(1.0), 0.0, z, z, g).at_node(1000)[0];
  const double e1 = std::abs(decay - 2.0 * std::exp(-1.0));
  const double e2 = std::abs(relax - (1.0 - std::exp(-1.0)));
  return {gap <= 1e-6 && e1 <= 1e-5 && e2 <= 1e-5,
          fmt::format("sup|duhamel-flow|={:.3e} (<=1e-6) |w-2/e|={:.1e} |w-(1-1/e)|={:.1e} (<=1e-5)",
                      gap, e1, e2)};
}

Outcome representation_identity() {
  const TimeGrid g(1.0, 1000);
  const std::size_t n = 16;
  const Profile u0 = Profile::sine(1.0, 1.0);
  const Ensemble e = grid_run(kKuramoto, Graphon::product(), u0, n, g);
  std::vector<double> atoms;
  for (double x : uniform_nodes(n)) atoms.push_back(u0(x));
  const LabeledPathMeasure chars = solve_characteristics(
      kKuramoto, Graphon::product(), LabeledPointMeasure::uniform(1, atoms, uniform_nodes(n)), g);
  bool identical = true;
  for (std::size_t j = 0; j < n; ++j) identical = identical && chars.path(j) == e[j];
  const double d = path_wasserstein1(chars, LabeledPathMeasure::empirical(e)).distance;
  return {identical && d == 0.0, fmt::format("bit-identical={} path W1={:.1e} (==0)", identical, d)};
}

Outcome meanfield_convergence() {
  const TimeGrid g(1.0, 1000);
  const Profile u0 = Profile::sine(1.0, 1.0);
  const LabeledPathMeasure reference =
      LabeledPathMeasure::empirical(grid_run(kKuramoto, Graphon::product(), u0, 256, g));
  std::vector<double> d;
  for (std::size_t n : {8u, 16u, 32u, 64u, 128u})
    d.push_back(path_wasserstein1(
                    LabeledPathMeasure::empirical(grid_run(kKuramoto, Graphon::product(), u0, n, g)),
                    reference)
                    .distance);
  bool decreasing = true;
  for (std::size_t k = 1; k < d.size(); ++k) decreasing = decreasing && d[k] < d[k - 1];
  const double ratio = d.back() / d.front();
  return {decreasing && ratio <= 0.15,
          fmt::format("W1 N=8..128: {:.3e} {:.3e} {:.3e} {:.3e} {:.3e} last/first={:.3f} (<=0.15)",
                      d[0], d[1], d[2], d[3], d[4], ratio)};
}

Outcome continuum_relation() {
  const TimeGrid g(1.0, 1000);
  const Profile u0 = Profile::sine(1.0, 1.0);
  bool identical = true;
  for (std::size_t n : {16u, 64u, 256u}) {
    const ContinuumField u = solve_continuum(kKuramoto, Graphon::product(), u0, n, g);
    const Ensemble e = grid_run(kKuramoto, Graphon::product(), u0, n, g);
    for (std::size_t j = 0; j < n; ++j) identical = identical && u.at(j) == e[j];
  }
  const std::size_t n_x = 256;
  const FiberedMeasure limit =
      continuum_to_measure(solve_continuum(kKuramoto, Graphon::product(), u0, n_x, g)).fibered;
  const InitialLaw law = InitialLaw::dirac(u0);
  std::vector<double> d;
  for (std::size_t b : {4u, 8u, 16u}) {
    const FiberedMeasure local = local_empirical_measure(
        sample_block_system(law, b, b, 5, Graphon::product(), kKuramoto, g), b, b);
    const std::size_t common = std::lcm(b, n_x);
    d.push_back(dist_fibered(local.refine(common), limit.refine(common)));
  }
  const bool decreasing = d[1] < d[0] && d[2] < d[1];
  return {identical && decreasing,
          fmt::format("continuum bit-identical={} dist^I N=16,64,256: {:.3e} {:.3e} {:.3e}",
                      identical, d[0], d[1], d[2])};
}

Outcome dobrushin_bounds() {
  experiment::ExperimentConfig cfg =
      experiment::load_config(std::string(COEVOLVE_SOURCE_DIR) + "/configs/verify_suite.toml");
  cfg.verify.lemma_pairs = 0;
  const experiment::VerifyReport report = experiment::verify_bounds(cfg, {});
  experiment::ConstantOverride halved;
  halved.l_k_scale = 0.5;
  const std::size_t falsified = experiment::verify_bounds(cfg, halved).violations();
  return {report.trials.size() == 24 && report.violations() == 0 && report.min_margin() > 0.0 &&
              falsified >= 1,
          fmt::format("trials={} violations={} min_margin={:.3e} halved-L_K violations={}",
                      report.trials.size(), report.violations(), report.min_margin(), falsified)};
}

Outcome lipschitz_constants() {
  const TimeGrid g(1.0, 1000);
  const experiment::LemmaCheck flow = experiment::check_flow_lipschitz(100, 201, g);
  const experiment::LemmaCheck chars = experiment::check_characteristic_lipschitz(100, 202, g);
  return {flow.pairs == 100 && chars.pairs == 100 && flow.violations == 0 && chars.violations == 0,
          fmt::format("flow map: {} pairs {} violations worst={:.3f}; characteristics: {} pairs {} "
                      "violations worst={:.3f}",
                      flow.pairs, flow.violations, flow.worst_ratio, chars.pairs, chars.violations,
                      chars.worst_ratio)};
}

// First matching in lexicographic order within rounding of the minimum,
// matching the solver's tie rule; its cost is summed in row order.
double brute_force(const LabeledPointMeasure& a, const LabeledPointMeasure& b) {
  const ProductMetric metric = ProductMetric::product();
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> costs;
  double scale = 1.0;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const double c = metric(a.atom(i), a.labels()[i], b.atom(perm[i]), b.labels()[perm[i]]);
      scale = std::max(scale, c);
      s += c;
    }
    costs.push_back(s / static_cast<double>(perm.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double best = *std::min_element(costs.begin(), costs.end());
  for (double c : costs)
    if (c <= best + 1e-12 * scale) return c;
  return best;
}

Outcome transport_oracle() {
  CounterRng rng(301);
  const auto random_measure = [&](std::size_t m) {
    std::vector<double> atoms(m), labels(m);
    for (double& v : atoms) v = 4.0 * rng.uniform() - 2.0;
    for (double& v : labels) v = rng.uniform();
    return LabeledPointMeasure::uniform(1, atoms, labels);
  };
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial) % 7;
    const LabeledPointMeasure a = random_measure(m), b = random_measure(m);
    if (wasserstein1_exact(a, b).distance != brute_force(a, b)) ++mismatches;
  }
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial) % 50;
    std::vector<double> a(m), b(m);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = 0.3 + 2.0 * rng.normal();
    const double exact = wasserstein1_exact(LabeledPointMeasure::uniform(1, a, std::vector<double>(m, 0.5)),
                                            LabeledPointMeasure::uniform(1, b, std::vector<double>(m, 0.5)),
                                            ProductMetric::state_only())
                             .distance;
    worst = std::max(worst, std::abs(wasserstein1_sorted_1d(a, b) - exact));
  }
  return {mismatches == 0 && worst <= 1e-12,
          fmt::format("brute-force mismatches={}/200 sorted max gap={:.1e} (<=1e-12)", mismatches,
                      worst)};
}

Outcome weak_equation() {
  const std::size_t n = 32;
  const Profile u0 = Profile::sine(1.0, 1.0);
  const std::vector<TestFunction> tests{TestFunction::one(), TestFunction::coordinate(0),
                                        TestFunction::square(0)};
  const std::vector<double> times{0.25, 0.5, 0.75};
  // Worst residual over test functions and interior times at each step count.
  const auto worst = [&](std::size_t steps, std::vector<double>& per_test) {
    const TimeGrid g(1.0, steps);
    const LabeledPathMeasure mu =
        LabeledPathMeasure::empirical(grid_run(kKuramoto, Graphon::product(), u0, n, g));
    const double h = g.step_size();
    bool within = true;
    per_test.assign(tests.size(), 0.0);
    for (std::size_t f = 0; f < tests.size(); ++f)
      for (double t : times) {
        const WeakResidual r = weak_form_residual(mu, kKuramoto, Graphon::product(), tests[f], t);
        within = within && !r.one_sided && r.value <= 5.0 * h * h + 1e-10;
        per_test[f] = std::max(per_test[f], r.value);
      }
    return within;
  };
  std::vector<double> coarse, fine;
  const bool ok_coarse = worst(100, coarse);
  const bool ok_fine = worst(200, fine);
  // Residuals at rounding level have nothing to scale: the constant test
  // function always, and zeta here because a symmetric graphon with an
  // antisymmetric coupling conserves the mean. Ratios use the rest.
  constexpr double kRoundingFloor = 1e-12;
  std::vector<double> ratios;
  for (std::size_t f = 0; f < tests.size(); ++f)
    if (coarse[f] > kRoundingFloor) ratios.push_back(coarse[f] / fine[f]);
  bool scaling = !ratios.empty();
  std::string listed;
  for (double r : ratios) {
    scaling = scaling && std::abs(r - 4.0) <= 0.5;
    listed += fmt::format(" {:.3f}", r);
  }
  return {ok_coarse && ok_fine && scaling,
          fmt::format("max residual h=1e-2 for 1, zeta, zeta^2: {:.1e} {:.1e} {:.3e} (<=5h^2+1e-10) "
                      "ratio above rounding:{} (4+-0.5)",
                      coarse[0], coarse[1], coarse[2], listed)};
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"A1", "memory and joint formulations agree", 10.0, formulation_equivalence},
      {"A2", "Duhamel closed form", 5.0, duhamel_closed_form},
      {"A3", "characteristic representation", 5.0, representation_identity},
      {"A4", "mean-field convergence", 120.0, meanfield_convergence},
      {"A5", "continuum relation", 120.0, continuum_relation},
      {"A6", "stability bounds and falsification", 60.0, dobrushin_bounds},
      {"A7", "flow and characteristic Lipschitz bounds", 30.0, lipschitz_constants},
      {"A8", "transport oracle", 30.0, transport_oracle},
      {"A9", "weak form residual", 60.0, weak_equation},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out{false, ""};
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, fmt::format("threw: {}", e.what())};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = out.pass && seconds <= c.budget_seconds;
    failures += pass ? 0 : 1;
    fmt::print("{} {} {}: {} [{:.2f}s, budget {:.0f}s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
               out.detail, seconds, c.budget_seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
