#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nael/infer.hpp"
#include "nael/rng.hpp"
#include "test_util.hpp"

using namespace nael;

namespace {

GenerativeModel two_sensor_model() {
  // two hidden states, one informative sensor, one self-transition action
  return GenerativeModel::from_tables(
      {"s1", "s2"}, {"o1", "o2"}, {"stay"},
      {{0.8, 0.2}, {0.2, 0.8}},
      {{{1.0, 0.0}, {0.0, 1.0}}},
      {0.0, 0.0}, {0.5, 0.5});
}

// enumerates the joint over (s, s', o) without reusing any library pieces
struct EfeOracle {
  double risk = 0.0, ambiguity = 0.0;
};

EfeOracle efe_by_enumeration(const GenerativeModel& m, const CategoricalDist& belief,
                             std::size_t a) {
  std::vector<double> next(m.states.size(), 0.0);
  for (std::size_t s = 0; s < m.states.size(); ++s)
    for (std::size_t sp = 0; sp < m.states.size(); ++sp)
      next[sp] += belief[s] * m.transition[a][s][sp];
  std::vector<double> pred(m.observations.size(), 0.0);
  for (std::size_t sp = 0; sp < m.states.size(); ++sp)
    for (std::size_t o = 0; o < m.observations.size(); ++o)
      pred[o] += next[sp] * m.likelihood[sp][o];
  // softmax of preferences, straight from the definition
  double mx = m.preferences[0];
  for (double c : m.preferences) mx = std::max(mx, c);
  double z = 0.0;
  std::vector<double> target(m.observations.size());
  for (std::size_t o = 0; o < m.observations.size(); ++o) {
    target[o] = std::exp(m.preferences[o] - mx);
    z += target[o];
  }
  for (double& t : target) t /= z;

  EfeOracle r;
  for (std::size_t o = 0; o < pred.size(); ++o)
    if (pred[o] > 0.0) r.risk += pred[o] * std::log(pred[o] / target[o]);
  for (std::size_t sp = 0; sp < next.size(); ++sp)
    for (std::size_t o = 0; o < m.observations.size(); ++o) {
      double p = m.likelihood[sp][o];
      if (p > 0.0) r.ambiguity -= next[sp] * p * std::log(p);
    }
  return r;
}

}  // namespace

TEST_CASE("posterior follows bayes rule on the two-sensor model") {
  auto m = two_sensor_model();
  auto post = exact_posterior(m, m.prior, "o1");
  CHECK(post[0] == Catch::Approx(0.8).epsilon(1e-12));
  CHECK(post[1] == Catch::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("certain evidence collapses the posterior") {
  auto m = GenerativeModel::from_tables(
      {"s1", "s2"}, {"o1", "o2"}, {"stay"},
      {{1.0, 0.0}, {0.0, 1.0}},
      {{{1.0, 0.0}, {0.0, 1.0}}},
      {0.0, 0.0}, {0.3, 0.7});
  auto post = exact_posterior(m, m.prior, "o2");
  CHECK(post[0] == 0.0);
  CHECK(post[1] == 1.0);
}

TEST_CASE("a dogmatic prior is unmoved by compatible evidence") {
  auto m = two_sensor_model();
  auto post = exact_posterior(m, CategoricalDist::delta(2, 0), "o2");
  CHECK(post[0] == 1.0);
}

TEST_CASE("impossible observations raise zero evidence") {
  auto m = GenerativeModel::from_tables(
      {"s1"}, {"o1", "o2"}, {"stay"},
      {{1.0, 0.0}},
      {{{1.0}}},
      {0.0, 0.0}, {1.0});
  CHECK_THROWS_AS(exact_posterior(m, m.prior, "o2"), ZeroEvidence);
  CHECK_THROWS_AS(exact_posterior(m, m.prior, "nope"), UnknownObservation);
}

TEST_CASE("free energy of a fully certain world is zero") {
  auto m = GenerativeModel::from_tables(
      {"s"}, {"o"}, {"stay"}, {{1.0}}, {{{1.0}}}, {0.0}, {1.0});
  CHECK(variational_free_energy(m, CategoricalDist({1.0}), m.prior, "o") ==
        Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("free energy at the posterior equals negative log evidence") {
  auto m = two_sensor_model();
  // evidence for o1 is 0.8*0.5 + 0.2*0.5 = 0.5
  CHECK(variational_free_energy(m, CategoricalDist({0.8, 0.2}), m.prior, "o1") ==
        Catch::Approx(-std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("suboptimal recognition pays strictly more free energy") {
  auto m = two_sensor_model();
  CategoricalDist q({0.5, 0.5});
  // term-by-term: 0.5*(log 0.5 - log 0.4) + 0.5*(log 0.5 - log 0.1)
  double by_hand = 0.5 * (std::log(0.5) - std::log(0.8 * 0.5)) +
                   0.5 * (std::log(0.5) - std::log(0.2 * 0.5));
  double f = variational_free_energy(m, q, m.prior, "o1");
  CHECK(f == Catch::Approx(by_hand).epsilon(1e-12));
  CHECK(f > -std::log(0.5) + 1e-6);
  CHECK(by_hand == Catch::Approx(0.9163).margin(5e-4));
}

TEST_CASE("free energy rejects mass on impossible states") {
  auto m = GenerativeModel::from_tables(
      {"s1", "s2"}, {"o1", "o2"}, {"stay"},
      {{1.0, 0.0}, {0.0, 1.0}},
      {{{1.0, 0.0}, {0.0, 1.0}}},
      {0.0, 0.0}, {0.5, 0.5});
  CHECK_THROWS_AS(variational_free_energy(m, CategoricalDist({0.5, 0.5}), m.prior, "o1"),
                  AbsoluteContinuityViolation);
}

TEST_CASE("the posterior minimizes free energy over random recognitions") {
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    auto m = testutil::random_model(rng, 2 + rng.below(2), 2 + rng.below(2), 1);
    const std::string obs = m.observations[rng.below(m.observations.size())];
    auto post = exact_posterior(m, m.prior, obs);
    double evidence = 0.0;
    std::size_t o = m.obs_index(obs);
    for (std::size_t s = 0; s < m.states.size(); ++s)
      evidence += m.likelihood[s][o] * m.prior[s];
    double f_star = variational_free_energy(m, post, m.prior, obs);
    REQUIRE(f_star == Catch::Approx(-std::log(evidence)).margin(1e-9));
    for (int k = 0; k < 100; ++k) {
      auto q = testutil::random_dist(rng, m.states.size());
      REQUIRE(variational_free_energy(m, q, m.prior, obs) >= f_star - 1e-9);
    }
  }
}

TEST_CASE("deterministic chains predict their next observation exactly") {
  auto m = GenerativeModel::from_tables(
      {"s1", "s2"}, {"o1", "o2"}, {"go"},
      {{1.0, 0.0}, {0.0, 1.0}},
      {{{0.0, 1.0}, {0.0, 1.0}}},
      {0.0, 0.0}, {0.5, 0.5});
  auto pred = predict_outcome_dist(m, CategoricalDist::delta(2, 0), "go");
  CHECK(pred[1] == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symmetric models predict uniform observations") {
  auto m = GenerativeModel::from_tables(
      {"s1", "s2"}, {"o1", "o2"}, {"stay"},
      {{0.5, 0.5}, {0.5, 0.5}},
      {{{1.0, 0.0}, {0.0, 1.0}}},
      {0.0, 0.0}, {0.5, 0.5});
  auto pred = predict_outcome_dist(m, CategoricalDist::uniform(2), "stay");
  CHECK(pred[0] == Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("outcome prediction matches the matrix-product oracle") {
  Rng rng(22);
  for (int i = 0; i < 200; ++i) {
    auto m = testutil::random_model(rng, 2, 2, 2);
    auto belief = testutil::random_dist(rng, 2);
    std::size_t a = rng.below(2);
    // oracle: belief * T(a) * L, by explicit loops
    std::vector<double> expect(2, 0.0);
    for (std::size_t s = 0; s < 2; ++s)
      for (std::size_t sp = 0; sp < 2; ++sp)
        for (std::size_t o = 0; o < 2; ++o)
          expect[o] += belief[s] * m.transition[a][s][sp] * m.likelihood[sp][o];
    auto pred = predict_outcome_dist(m, belief, m.actions[a]);
    for (std::size_t o = 0; o < 2; ++o)
      REQUIRE(pred[o] == Catch::Approx(expect[o]).margin(1e-12));
  }
  CHECK_THROWS_AS(predict_outcome_dist(testutil::random_model(rng, 2, 2, 1),
                                       CategoricalDist::uniform(2), "bogus"),
                  UnknownAction);
}

TEST_CASE("a preferred certain outcome carries no expected free energy") {
  auto m = GenerativeModel::from_tables(
      {"s1", "s2"}, {"o1", "o2"}, {"go"},
      {{1.0, 0.0}, {0.0, 1.0}},
      {{{0.0, 1.0}, {0.0, 1.0}}},
      {-40.0, 0.0},  // softmax puts essentially all mass on o2
      {1.0, 0.0});
  auto b = expected_free_energy(m, m.prior, "go");
  CHECK(b.risk == Catch::Approx(0.0).margin(1e-9));
  CHECK(b.ambiguity == Catch::Approx(0.0).margin(1e-9));
  CHECK(b.total == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("an uninformative sensor contributes pure ambiguity") {
  auto m = GenerativeModel::from_tables(
      {"s1", "s2"}, {"o1", "o2"}, {"go"},
      {{1.0, 0.0}, {0.5, 0.5}},
      {{{0.0, 1.0}, {0.0, 1.0}}},
      {0.0, 0.0},
      {1.0, 0.0});
  auto b = expected_free_energy(m, m.prior, "go");
  CHECK(b.risk == Catch::Approx(0.0).margin(1e-12));
  CHECK(b.ambiguity == Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("expected free energy matches full enumeration on random models") {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    auto m = testutil::random_model(rng, 3, 3, 2);
    auto belief = testutil::random_dist(rng, 3);
    std::size_t a = rng.below(2);
    auto oracle = efe_by_enumeration(m, belief, a);
    auto b = expected_free_energy(m, belief, m.actions[a]);
    REQUIRE(b.risk == Catch::Approx(oracle.risk).margin(1e-9));
    REQUIRE(b.ambiguity == Catch::Approx(oracle.ambiguity).margin(1e-9));
    REQUIRE(b.total == Catch::Approx(b.risk + b.ambiguity).margin(1e-9));
    REQUIRE(b.risk >= 0.0);
    REQUIRE(b.ambiguity >= 0.0);
  }
}

TEST_CASE("belief propagation applies the action's transition rows") {
  auto m = two_sensor_model();
  auto next = propagate_belief(m, CategoricalDist({0.3, 0.7}), 0);
  CHECK(next[0] == Catch::Approx(0.3).epsilon(1e-12));
  CHECK(next[1] == Catch::Approx(0.7).epsilon(1e-12));
}
