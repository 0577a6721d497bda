#include <cmath>
#include <sstream>

#include "doctest.h"

#include "coevolve/error.hpp"
#include "coevolve/graphon.hpp"
#include "coevolve/quadrature.hpp"
#include "coevolve/rng.hpp"

using namespace coevolve;

namespace {

std::vector<Graphon> families() {
  return {Graphon::constant(0.7), Graphon::product(),     Graphon::min(),
          Graphon::cosine(),      Graphon::threshold(0.3),
          step_graphon(WeightMatrix({0.25, 0.75}, {0.0, 1.0, 1.0, -2.0}))};
}

WeightMatrix random_symmetric(std::size_t n, CounterRng& rng) {
  std::vector<double> e(n * n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k; l < n; ++l) e[k * n + l] = e[l * n + k] = 2.0 * rng.uniform() - 1.0;
  return WeightMatrix(uniform_nodes(n), std::move(e));
}

}  // namespace

TEST_CASE("uniform nodes") {
  CHECK(uniform_nodes(1) == std::vector<double>{0.5});
  CHECK(uniform_nodes(2) == std::vector<double>{0.25, 0.75});
  CHECK(uniform_nodes(4) == std::vector<double>{0.125, 0.375, 0.625, 0.875});
  CHECK_THROWS_AS(uniform_nodes(0), DomainError);
}

TEST_CASE("quadrature rules integrate polynomials") {
  for (std::size_t order : {8u, 16u}) {
    const QuadratureRule& q = gauss_legendre_unit(order);
    double sum = 0.0, m7 = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      sum += q.weights[i];
      m7 += q.weights[i] * std::pow(q.nodes[i], 7);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m7 == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
  }
  CHECK_THROWS(gauss_legendre_unit(5));
}

TEST_CASE("families are symmetric and bounded") {
  CounterRng rng(10);
  for (const Graphon& g : families())
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform(), y = rng.uniform();
      CHECK(g(x, y) == g(y, x));
      CHECK(std::isfinite(g(x, y)));
    }
}

TEST_CASE("stored Lipschitz constants hold") {
  CounterRng rng(11);
  for (const Graphon& g : families()) {
    const auto l = g.lipschitz();
    if (!l) continue;
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform(), y = rng.uniform();
      const double x2 = rng.uniform(), y2 = rng.uniform();
      CHECK(std::abs(g(x, y) - g(x2, y2)) <= *l * std::hypot(x - x2, y - y2) + 1e-15);
    }
  }
  CHECK_FALSE(Graphon::threshold(0.3).lipschitz().has_value());
}

TEST_CASE("pointwise sampling") {
  const WeightMatrix ones = sample_pointwise(Graphon::constant(1.0), uniform_nodes(3));
  for (double v : ones.entries()) CHECK(v == 1.0);
  const std::vector<double> nodes{0.25, 0.75};
  const WeightMatrix p = sample_pointwise(Graphon::product(), nodes);
  CHECK(p(0, 0) == 0.0625);
  CHECK(p(0, 1) == 0.1875);
  CHECK(p(1, 0) == 0.1875);
  CHECK(p(1, 1) == 0.5625);
  const std::vector<double> far{0.125, 0.875};
  const WeightMatrix t = sample_pointwise(Graphon::threshold(0.3), far);
  CHECK(t(0, 0) == 1.0);
  CHECK(t(0, 1) == 0.0);
  CHECK(t(1, 1) == 1.0);
}

TEST_CASE("cell-averaged sampling") {
  const WeightMatrix c = sample_averaged(Graphon::constant(-0.4), 5);
  for (double v : c.entries()) CHECK(v == doctest::Approx(-0.4).epsilon(1e-14));
  const WeightMatrix p = sample_averaged(Graphon::product(), 2);
  CHECK(p(0, 0) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
  CHECK(p(0, 1) == doctest::Approx(3.0 / 16.0).epsilon(1e-14));
  CHECK(p(1, 1) == doctest::Approx(9.0 / 16.0).epsilon(1e-14));

  CounterRng rng(12);
  const WeightMatrix m = random_symmetric(4, rng);
  const Graphon s = step_graphon(m);
  CHECK(sample_averaged(s, 4) == m);
  CHECK(sample_pointwise(s, uniform_nodes(4)) == m);
}

TEST_CASE("step graphons") {
  const WeightMatrix ones(uniform_nodes(3), std::vector<double>(9, 1.0));
  const Graphon s = step_graphon(ones);
  CounterRng rng(13);
  for (int i = 0; i < 100; ++i) CHECK(s(rng.uniform(), rng.uniform()) == 1.0);
  const WeightMatrix anti({0.25, 0.75}, {0.0, 1.0, 1.0, 0.0});
  CHECK(step_graphon(anti)(0.1, 0.9) == 1.0);
  CHECK(step_graphon(anti)(0.1, 0.2) == 0.0);
  CHECK(s.family() == GraphonFamily::step);
}

TEST_CASE("weight matrix validation") {
  CHECK_THROWS_AS(WeightMatrix({0.25, 0.75}, {0.0, 1.0, 0.5, 0.0}), ValidationError);
  CHECK_THROWS_AS(WeightMatrix({0.75, 0.25}, {0.0, 1.0, 1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(WeightMatrix({0.25, 1.0}, {0.0, 1.0, 1.0, 0.0}), ValidationError);
  const WeightMatrix m({0.25, 0.75}, {1.0, 2.0, 2.0, 3.0});
  const WeightMatrix e = m.expand_blocks(2);
  CHECK(e.size() == 4);
  CHECK(e.nodes() == uniform_nodes(4));
  CHECK(e(0, 1) == 1.0);
  CHECK(e(1, 2) == 2.0);
  CHECK(e(3, 3) == 3.0);
}

TEST_CASE("Lp distance") {
  CHECK(lp_distance(Graphon::product(), Graphon::product(), 1, 64) == 0.0);
  CHECK(lp_distance(Graphon::constant(1.0), Graphon::constant(0.0), 1, 16) == 1.0);
  CHECK(std::abs(lp_distance(Graphon::product(), Graphon::constant(0.0), 1, 512) - 0.25) <= 1e-3);
  CHECK_THROWS(lp_distance(Graphon::product(), Graphon::min(), 3, 16));

  CounterRng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Graphon a = step_graphon(random_symmetric(4, rng));
    const Graphon b = step_graphon(random_symmetric(4, rng));
    const Graphon c = step_graphon(random_symmetric(4, rng));
    for (int p : {1, 2}) {
      CHECK(lp_distance(a, b, p, 8) == doctest::Approx(lp_distance(b, a, p, 8)).epsilon(1e-14));
      CHECK(lp_distance(a, c, p, 8) <= lp_distance(a, b, p, 8) + lp_distance(b, c, p, 8) + 1e-12);
    }
  }
}

TEST_CASE("continuity defect") {
  CHECK(continuity_defect(Graphon::constant(2.0), 0.1, 32) == 0.0);
  CHECK(std::abs(continuity_defect(Graphon::product(), 0.1, 64) - 0.05) <= 1e-3);
  const double d1 = continuity_defect(Graphon::threshold(0.3), 0.1, 64);
  const double d2 = continuity_defect(Graphon::threshold(0.3), 0.01, 64);
  const double d3 = continuity_defect(Graphon::threshold(0.3), 0.001, 64);
  CHECK(d1 > d2);
  CHECK(d2 > d3);
}

TEST_CASE("weight matrix csv round trip") {
  CounterRng rng(15);
  const WeightMatrix m = random_symmetric(5, rng);
  std::stringstream ss;
  write_weight_matrix_csv(ss, m);
  CHECK(read_weight_matrix_csv(ss) == m);
  std::stringstream bad("0.25,0.75\n1,2\n");
  CHECK_THROWS(read_weight_matrix_csv(bad));
}
