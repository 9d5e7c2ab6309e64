#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "nael/errors.hpp"
#include "nael/params.hpp"
#include "nael/sim.hpp"

namespace nael {

inline constexpr double kDefaultEta = 0.05;
inline constexpr double kDefaultDelta = 1e-2;
inline constexpr int kDefaultEpisodes = 8;

using VecObjective = std::function<double(const std::vector<double>&)>;

// Mean over seeded episodes of the summed chosen-action totals. Episode e
// runs on seed + e, so the same seed always replays the same noise.
inline double episode_objective(const EthicalParams& params, const Scenario& sc,
                                std::uint64_t seed, int episodes = kDefaultEpisodes) {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Episode ep(sc, seed + static_cast<std::uint64_t>(e), &params);
    for (int d = 0; d < sc.config.days; ++d) {
      DayOutcome out = ep.advance();
      total += out.decision.evaluated.at(out.decision.chosen).total;
    }
  }
  double v = total / static_cast<double>(episodes);
  if (!std::isfinite(v)) throw NonFiniteObjective("episode objective is not finite");
  return v;
}

// Central differences on a flat coordinate vector. Callers keep the random
// numbers common across both sides by baking the seed into f.
inline std::vector<double> finite_diff_gradient(const VecObjective& f, std::vector<double> x,
                                                double delta) {
  if (delta <= 0.0) throw ConfigError("delta must be positive");
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double saved = x[i];
    x[i] = saved + delta;
    double hi = f(x);
    x[i] = saved - delta;
    double lo = f(x);
    x[i] = saved;
    if (!std::isfinite(hi) || !std::isfinite(lo))
      throw NonFiniteObjective("objective not finite near coordinate " + std::to_string(i));
    g[i] = (hi - lo) / (2.0 * delta);
  }
  return g;
}

inline std::vector<double> finite_diff_gradient(const EthicalParams& params, const Scenario& sc,
                                                std::uint64_t seed, double delta = kDefaultDelta,
                                                int episodes = kDefaultEpisodes) {
  return finite_diff_gradient(
      [&](const std::vector<double>& x) {
        return episode_objective(EthicalParams::unflatten(params, x), sc, seed, episodes);
      },
      params.flatten(), delta);
}

inline EthicalParams update_step(const EthicalParams& params, const std::vector<double>& grad,
                                 double eta) {
  if (eta < 0.0) throw ConfigError("eta must be >= 0");
  std::vector<double> x = params.flatten();
  if (grad.size() != x.size()) throw ConfigError("gradient has wrong dimension");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= eta * grad[i];
  EthicalParams next = EthicalParams::unflatten(params, x);
  next.project();
  return next;
}

// Plain projected descent over a flat vector; the typed train() below and the
// synthetic-objective tests share this loop.
inline std::vector<std::pair<std::vector<double>, double>> descend(
    const VecObjective& f, std::vector<double> x0, double eta, int epochs, double delta,
    const std::function<void(std::vector<double>&)>& project = {}) {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  std::vector<std::pair<std::vector<double>, double>> history;
  history.emplace_back(x0, f(x0));
  std::vector<double> x = std::move(x0);
  for (int e = 0; e < epochs; ++e) {
    std::vector<double> g = finite_diff_gradient(f, x, delta);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= eta * g[i];
    if (project) project(x);
    history.emplace_back(x, f(x));
  }
  return history;
}

struct TrainRecord {
  EthicalParams params;
  double objective = 0.0;
};

// Projected finite-difference descent on the episode objective. The seed is
// held fixed across epochs so every gradient sees the same noise realization.
inline std::vector<TrainRecord> train(const Scenario& sc, const EthicalParams& params0,
                                      double eta, int epochs, std::uint64_t seed,
                                      int episodes = kDefaultEpisodes,
                                      double delta = kDefaultDelta) {
  auto objective = [&](const std::vector<double>& x) {
    return episode_objective(EthicalParams::unflatten(params0, x), sc, seed, episodes);
  };
  auto project = [&](std::vector<double>& x) {
    EthicalParams p = EthicalParams::unflatten(params0, x);
    p.project();
    x = p.flatten();
  };
  std::vector<TrainRecord> out;
  for (auto& [x, obj] : descend(objective, params0.flatten(), eta, epochs, delta, project))
    out.push_back(TrainRecord{EthicalParams::unflatten(params0, x), obj});
  return out;
}

}  // namespace nael
