#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"

#include "coevolve/bounds.hpp"
#include "coevolve/error.hpp"
#include "coevolve/graphon.hpp"
#include "coevolve/rng.hpp"
#include "coevolve/transport.hpp"

using namespace coevolve;

namespace {

LabeledPointMeasure uniform_1d(std::vector<double> atoms, std::vector<double> labels = {}) {
  if (labels.empty()) labels.assign(atoms.size(), 0.5);
  return LabeledPointMeasure::uniform(1, std::move(atoms), std::move(labels));
}

LabeledPointMeasure random_uniform(std::size_t m, std::size_t dim, CounterRng& rng) {
  std::vector<double> atoms(m * dim), labels(m);
  for (double& v : atoms) v = 2.0 * rng.uniform() - 1.0;
  for (double& v : labels) v = rng.uniform();
  return LabeledPointMeasure::uniform(dim, atoms, labels);
}

LabeledPointMeasure random_weighted(std::size_t m, CounterRng& rng) {
  std::vector<double> atoms(m), labels(m), masses(m);
  for (double& v : atoms) v = 2.0 * rng.uniform() - 1.0;
  for (double& v : labels) v = rng.uniform();
  for (double& v : masses) v = 0.1 + rng.uniform();
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  for (double& v : masses) v /= total;
  return LabeledPointMeasure(1, atoms, labels, masses);
}

// Enumerates all M! matchings in lexicographic order and returns the
// row-order cost of the first one within rounding of the minimum: the
// tie rule of the solver, so the comparison can be exact even when
// several matchings share the optimal cost (common in 1d).
double brute_force(const LabeledPointMeasure& a, const LabeledPointMeasure& b, ProductMetric metric) {
  const std::size_t m = a.size();
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> costs;
  double scale = 1.0;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double c = metric(a.atom(i), a.labels()[i], b.atom(perm[i]), b.labels()[perm[i]]);
      scale = std::max(scale, c);
      s += c;
    }
    costs.push_back(s / static_cast<double>(m));
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double best = *std::min_element(costs.begin(), costs.end());
  for (double c : costs)
    if (c <= best + 1e-12 * scale) return c;
  return best;
}

}  // namespace

TEST_CASE("product metric") {
  const double a[] = {0.0, 0.0}, b[] = {3.0, 4.0};
  CHECK(ProductMetric::product()(a, 0.2, b, 0.2) == 5.0);
  CHECK(ProductMetric::product().combine(3.0, 4.0) == 5.0);
  CHECK(ProductMetric::state_only()(a, 0.0, b, 0.9) == 5.0);
}

TEST_CASE("exact W1 examples") {
  CounterRng rng(40);
  const LabeledPointMeasure r = random_uniform(5, 2, rng);
  const TransportResult self = wasserstein1_exact(r, r);
  CHECK(self.distance == 0.0);
  for (const PlanEntry& e : self.plan.entries) CHECK(e.i == e.j);

  const TransportResult shift =
      wasserstein1_exact(uniform_1d({0.0, 1.0}), uniform_1d({1.0, 2.0}), ProductMetric::state_only());
  CHECK(shift.distance == 1.0);
  REQUIRE(shift.plan.entries.size() == 2);
  CHECK(shift.plan.entries[0].i == 0);
  CHECK(shift.plan.entries[0].j == 0);
  CHECK(shift.plan.entries[1].j == 1);

  CHECK(wasserstein1_exact(uniform_1d({0.0, 2.0}), uniform_1d({1.0, 1.0}), ProductMetric::state_only())
            .distance == 1.0);
}

TEST_CASE("assignment equals brute force") {
  CounterRng rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 1 + trial % 7;
    const LabeledPointMeasure a = random_uniform(m, 1 + trial % 2, rng);
    const LabeledPointMeasure b = random_uniform(m, 1 + trial % 2, rng);
    for (ProductMetric metric : {ProductMetric::product(), ProductMetric::state_only()})
      CHECK(wasserstein1_exact(a, b, metric).distance == brute_force(a, b, metric));
  }
}

TEST_CASE("metric axioms and plan marginals") {
  CounterRng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const LabeledPointMeasure a = random_weighted(3 + trial % 4, rng);
    const LabeledPointMeasure b = random_weighted(2 + trial % 5, rng);
    const LabeledPointMeasure c = random_weighted(4, rng);
    const TransportResult ab = wasserstein1_exact(a, b);
    CHECK(ab.distance >= 0.0);
    CHECK(std::abs(ab.distance - wasserstein1_exact(b, a).distance) <= 1e-12);
    CHECK(wasserstein1_exact(a, c).distance <=
          ab.distance + wasserstein1_exact(b, c).distance + 1e-10);
    std::vector<double> row(a.size(), 0.0), col(b.size(), 0.0);
    double cost = 0.0;
    for (const PlanEntry& e : ab.plan.entries) {
      CHECK(e.mass >= 0.0);
      row[e.i] += e.mass;
      col[e.j] += e.mass;
      cost += e.cost_contribution;
    }
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(row[i] - a.masses()[i]) <= 1e-10);
    for (std::size_t j = 0; j < b.size(); ++j) CHECK(std::abs(col[j] - b.masses()[j]) <= 1e-10);
    CHECK(std::abs(cost - ab.distance) <= 1e-12);
    CHECK(std::is_sorted(ab.plan.entries.begin(), ab.plan.entries.end(),
                         [](const PlanEntry& x, const PlanEntry& y) {
                           return std::pair(x.i, x.j) < std::pair(y.i, y.j);
                         }));
  }
}

TEST_CASE("simplex agrees with assignment on uniform input") {
  CounterRng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + trial % 6;
    const LabeledPointMeasure a = random_uniform(m, 1, rng);
    const LabeledPointMeasure b = random_uniform(m, 1, rng);
    const std::vector<double> w(m, 1.0 / static_cast<double>(m));
    // Perturbing one mass by far less than the tolerance would change
    // nothing; a different split forces the simplex path instead.
    std::vector<double> skew = w;
    skew[0] += 1e-9;
    skew[1] -= 1e-9;
    const LabeledPointMeasure a2(1, std::vector<double>(a.atoms().begin(), a.atoms().end()), a.labels(), skew);
    CHECK(std::abs(wasserstein1_exact(a2, b).distance - wasserstein1_exact(a, b).distance) <= 1e-8);
  }
}

TEST_CASE("solver validation") {
  const std::vector<double> cost{0.0, 1.0, 1.0, 0.0};
  CHECK_THROWS_AS(solve_transport(cost, std::vector<double>{0.5, 0.6}, std::vector<double>{0.5, 0.5}),
                  ValidationError);
  const std::vector<double> near{0.5, 0.5 + 5e-12};
  const TransportResult r = solve_transport(cost, near, std::vector<double>{0.5, 0.5});
  CHECK(r.plan.renormalized);
  CHECK(r.distance == doctest::Approx(0.0));
  CHECK_THROWS_AS(solve_transport(cost, std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}), ShapeError);
  std::vector<double> big_atoms(kMaxTransportAtoms + 1, 0.0);
  std::vector<double> big_labels(kMaxTransportAtoms + 1, 0.5);
  const LabeledPointMeasure big = LabeledPointMeasure::uniform(1, big_atoms, big_labels);
  CHECK_THROWS_AS(wasserstein1_exact(big, uniform_1d({0.0})), CapacityError);
}

TEST_CASE("sorted 1d W1") {
  CHECK(wasserstein1_sorted_1d(std::vector<double>{3.0, 1.0, 2.0}, std::vector<double>{2.0, 3.0, 1.0}) == 0.0);
  CHECK(wasserstein1_sorted_1d(std::vector<double>{0.0, 1.0}, std::vector<double>{0.5, 0.5}) == 0.5);
  CHECK_THROWS_AS(wasserstein1_sorted_1d(std::vector<double>{0.0}, std::vector<double>{0.5, 0.5}),
                  ValidationError);
  CounterRng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(64), b(64);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = 0.5 + rng.normal();
    const double exact =
        wasserstein1_exact(uniform_1d(a), uniform_1d(b), ProductMetric::state_only()).distance;
    CHECK(std::abs(wasserstein1_sorted_1d(a, b) - exact) <= 1e-12);
  }
}

TEST_CASE("path W1") {
  const TimeGrid g(1.0, 10);
  const double zero = 0.0, one = 1.0;
  const LabeledPathMeasure a({Trajectory::constant(g, {&zero, 1})}, {0.3}, {1.0});
  const LabeledPathMeasure b({Trajectory::constant(g, {&one, 1})}, {0.3}, {1.0});
  CHECK(path_wasserstein1(a, b).distance == 1.0);
  CHECK(path_wasserstein1(a, a).distance == 0.0);

  CounterRng rng(45);
  const auto random_paths = [&](std::size_t m) {
    std::vector<Trajectory> p;
    std::vector<double> labels;
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> v(g.nodes());
      double x = rng.normal();
      for (double& y : v) y = (x += 0.3 * rng.normal());
      p.emplace_back(g, 1, v);
      labels.push_back(rng.uniform());
    }
    return LabeledPathMeasure(p, labels, std::vector<double>(m, 1.0 / static_cast<double>(m)));
  };
  for (int trial = 0; trial < 20; ++trial) {
    const LabeledPathMeasure p = random_paths(5), q = random_paths(5);
    for (ProductMetric metric : {ProductMetric::product(), ProductMetric::state_only()}) {
      const double path = path_wasserstein1(p, q, metric).distance;
      for (std::size_t i = 0; i < g.nodes(); i += 3)
        CHECK(wasserstein1_exact(p.at_time(g.node(i)), q.at_time(g.node(i)), metric).distance <= path + 1e-12);
    }
  }
}

TEST_CASE("fibered distance") {
  const TimeGrid g(1.0, 4);
  const auto dirac = [&](double v, double x) {
    return LabeledPathMeasure({Trajectory::constant(g, {&v, 1})}, {x}, {1.0});
  };
  const FiberedMeasure a({dirac(0.0, 0.25), dirac(0.0, 0.75)});
  const FiberedMeasure b({dirac(0.2, 0.25), dirac(0.4, 0.75)});
  CHECK(dist_fibered(a, a) == 0.0);
  CHECK(dist_fibered(a, b) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(dist_fibered(a, b, 0.5) == doctest::Approx(0.3).epsilon(1e-15));
  const FiberedMeasure one({dirac(1.0, 0.5)});
  const FiberedMeasure other({dirac(3.0, 0.1)});
  CHECK(dist_fibered(one, other) == path_wasserstein1(one.fiber(0), other.fiber(0), ProductMetric::state_only()).distance);
  CHECK(dist_fibered(a.refine(4), b.refine(4)) == doctest::Approx(dist_fibered(a, b)).epsilon(1e-15));
  CHECK_THROWS_AS(dist_fibered(a, one), ValidationError);
  CHECK_THROWS_AS(a.refine(3), ValidationError);
}

TEST_CASE("plan csv") {
  const TransportResult r =
      wasserstein1_exact(uniform_1d({0.0, 1.0}), uniform_1d({1.0, 2.0}), ProductMetric::state_only());
  std::ostringstream os;
  write_transport_plan_csv(os, r.plan);
  CHECK(os.str().rfind("i,j,mass,cost_contribution\n0,0,", 0) == 0);
}

TEST_CASE("stability bounds") {
  CHECK(dobrushin_bound(1.3, 2.0, 0.0, 0.7) == 0.0);
  CHECK(dobrushin_bound(5.0, 1.0, 0.1, 0.0) == doctest::Approx(2.0 * std::sqrt(2.0) * 0.1).epsilon(1e-14));
  CHECK(dobrushin_bound(1.0, 2.0, 1.0, 1.0) ==
        doctest::Approx(std::sqrt(2.0) * 2.0 * 2.0 * std::exp(2.0)).epsilon(1e-14));
  CHECK(dobrushin_bound(1.0, 2.0, 1.0, 1.0) == doctest::Approx(4.0 * std::sqrt(2.0) * std::exp(2.0)).epsilon(1e-12));
  CHECK(dobrushin_bound_nonlip(1.0, 0.0, 0.0, 1.0) == 0.0);
  CHECK(dobrushin_bound_nonlip(2.0, 0.3, 0.5, 0.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(dobrushin_bound_nonlip(1.0, 0.1, 0.2, 1.0) ==
        doctest::Approx(0.2 * std::exp(2.0) + 0.1 * (std::exp(2.0) - 1.0)).epsilon(1e-14));
  CHECK(dobrushin_bound_nonlip(1.0, 0.1, 0.2, 1.0) == doctest::Approx(2.11672).epsilon(1e-5));
}
