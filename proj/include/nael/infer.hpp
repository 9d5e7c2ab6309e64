#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nael/categorical.hpp"
#include "nael/errors.hpp"
#include "nael/generative_model.hpp"

namespace nael {

// Exact Bayesian posterior over states given one observation:
//   posterior(s) ∝ P(obs|s) * prior(s)
inline CategoricalDist exact_posterior(const GenerativeModel& model, const CategoricalDist& prior,
                                       const std::string& obs) {
  std::size_t o = model.obs_index(obs);
  std::vector<double> post(model.states.size());
  double evidence = 0.0;
  for (std::size_t s = 0; s < post.size(); ++s) {
    post[s] = model.likelihood[s][o] * prior[s];
    evidence += post[s];
  }
  if (evidence <= 0.0) throw ZeroEvidence("observation '" + obs + "' has zero evidence");
  for (double& p : post) p /= evidence;
  return CategoricalDist(std::move(post));
}

// Variational free energy of a candidate recognition distribution q:
//   F = Σ_s q(s) [log q(s) − log P(obs,s)]   with  P(obs,s) = P(obs|s)·prior(s).
// Lower-bounded by −log evidence; the bound is tight exactly at the posterior.
inline double variational_free_energy(const GenerativeModel& model, const CategoricalDist& q,
                                      const CategoricalDist& prior, const std::string& obs) {
  std::size_t o = model.obs_index(obs);
  if (q.size() != model.states.size())
    throw SupportMismatch("q has support " + std::to_string(q.size()) + " over " +
                          std::to_string(model.states.size()) + " states");
  double evidence = 0.0;
  for (std::size_t s = 0; s < q.size(); ++s) evidence += model.likelihood[s][o] * prior[s];
  if (evidence <= 0.0) throw ZeroEvidence("observation '" + obs + "' has zero evidence");

  double f = 0.0;
  for (std::size_t s = 0; s < q.size(); ++s) {
    if (q[s] < kProbFloor) continue;
    double joint = model.likelihood[s][o] * prior[s];
    if (joint < kProbFloor)
      throw AbsoluteContinuityViolation("q has mass on state '" + model.states[s] +
                                        "' with zero joint probability");
    f += q[s] * (std::log(q[s]) - std::log(joint));
  }
  return f;
}

// belief over next states after taking the action once
inline CategoricalDist propagate_belief(const GenerativeModel& model, const CategoricalDist& belief,
                                        std::size_t action_idx) {
  std::vector<double> next(model.states.size(), 0.0);
  for (std::size_t s = 0; s < belief.size(); ++s) {
    if (belief[s] == 0.0) continue;
    const CategoricalDist& row = model.transition[action_idx][s];
    for (std::size_t sp = 0; sp < next.size(); ++sp) next[sp] += belief[s] * row[sp];
  }
  return CategoricalDist::normalized(std::move(next));
}

// Predicted outcome distribution one step ahead:
//   Q(o'|a) = Σ_{s'} P(o'|s') Σ_s P(s'|s,a) belief(s)
inline CategoricalDist predict_outcome_dist(const GenerativeModel& model,
                                            const CategoricalDist& belief,
                                            const std::string& action) {
  std::size_t a = model.action_index(action);
  CategoricalDist next = propagate_belief(model, belief, a);
  std::vector<double> out(model.observations.size(), 0.0);
  for (std::size_t sp = 0; sp < next.size(); ++sp) {
    if (next[sp] == 0.0) continue;
    for (std::size_t o = 0; o < out.size(); ++o) out[o] += next[sp] * model.likelihood[sp][o];
  }
  return CategoricalDist::normalized(std::move(out));
}

struct EfeBreakdown {
  double risk = 0.0;       // KL(predicted outcomes || softmax(C)), nats
  double ambiguity = 0.0;  // expected observation entropy under predicted states, nats
  double total = 0.0;
};

// Single-step expected free energy of taking the action from the current belief.
// The preference vector C is converted to a target outcome distribution by
// softmax, which is strictly positive, so the risk KL is always defined.
inline EfeBreakdown expected_free_energy(const GenerativeModel& model,
                                         const CategoricalDist& belief,
                                         const std::string& action) {
  std::size_t a = model.action_index(action);
  CategoricalDist next = propagate_belief(model, belief, a);
  CategoricalDist predicted = predict_outcome_dist(model, belief, action);
  CategoricalDist target = softmax(model.preferences);

  EfeBreakdown b;
  b.risk = kl_divergence(predicted, target);
  for (std::size_t sp = 0; sp < next.size(); ++sp) {
    if (next[sp] == 0.0) continue;
    b.ambiguity += next[sp] * entropy(model.likelihood[sp]);
  }
  b.total = b.risk + b.ambiguity;
  return b;
}

}  // namespace nael
