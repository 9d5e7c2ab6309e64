#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nael/categorical.hpp"
#include "nael/errors.hpp"
#include "nael/ethica.hpp"
#include "nael/generative_model.hpp"
#include "nael/infer.hpp"
#include "nael/opinion.hpp"

namespace nael {

// Projection key for the deciding agent's own (environment) model.
inline constexpr const char* kEnvId = "env";

struct StakeholderModel {
  std::string id;
  GenerativeModel model;   // the deciding agent's model of this stakeholder's world
  CategoricalDist belief;  // modeled current belief
  Opinion trust;           // opinion of this stakeholder's data

  void validate() const {
    model.validate();
    if (belief.size() != model.states.size())
      throw SupportMismatch("belief support does not match model states for '" + id + "'");
  }
};

// Everything action selection needs: the agent's own environment model, its
// models of the stakeholders, the ecological target, and the scenario's
// projection from joint actions to each model's local action space.
struct EthicalField {
  GenerativeModel self_model;
  CategoricalDist self_belief = CategoricalDist::uniform(1);
  std::vector<StakeholderModel> stakeholders;
  CategoricalDist env_target = CategoricalDist::uniform(1);
  double env_weight = 1.0;
  int horizon = 3;
  // joint action label -> model id (stakeholder id or kEnvId) -> local action
  std::map<std::string, std::map<std::string, std::string>> projection;
  SatisfiesFn satisfies = satisfies_by_equality;

  void validate() const {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (env_weight < 0.0) throw ConfigError("env_weight must be >= 0");
    for (const auto& s : stakeholders) s.validate();
  }

  const StakeholderModel& stakeholder(const std::string& id) const {
    for (const auto& s : stakeholders)
      if (s.id == id) return s;
    throw UnknownStakeholder("no stakeholder '" + id + "' in the field");
  }

  const std::string& local_action(const std::string& model_id, const std::string& action) const {
    auto row = projection.find(action);
    if (row == projection.end())
      throw UnmappedAction("no projection for joint action '" + action + "'");
    auto cell = row->second.find(model_id);
    if (cell == row->second.end())
      throw UnmappedAction("joint action '" + action + "' has no local action for '" + model_id + "'");
    return cell->second;
  }
};

struct StakeholderTerm {
  double raw = 0.0;         // summed EFE over the horizon, nats
  double confidence = 0.0;  // 1 - u of the trust opinion
  double weighted = 0.0;    // confidence * raw
};

struct GlobalBreakdown {
  std::map<std::string, StakeholderTerm> stakeholder_terms;
  double env_raw = 0.0;   // KL(projected species || target), nats
  double env_term = 0.0;  // env_weight * env_raw
  double penalty = 0.0;   // neglected-obligation cost, nats
  double total = 0.0;
};

struct DecisionRecord {
  long timestep = 0;
  std::map<std::string, GlobalBreakdown> evaluated;      // allowed candidates only
  Verdicts verdicts;
  std::vector<std::pair<std::string, double>> excluded;  // candidate, prohibition probability
  std::map<std::string, double> penalties;
  std::string chosen;
  std::string tie_note;  // nonempty when the argmin was a tie
};

// EFE of one stakeholder's model under the projected local action, rolled
// over the field's horizon with the same action repeated and beliefs pushed
// through the stakeholder's transition model each step.
inline double stakeholder_efe(const EthicalField& field, const std::string& id,
                              const std::string& action) {
  const StakeholderModel& sm = field.stakeholder(id);
  const std::string& local = field.local_action(id, action);
  std::size_t a = sm.model.action_index(local);
  CategoricalDist belief = sm.belief;
  double total = 0.0;
  for (int t = 0; t < field.horizon; ++t) {
    total += expected_free_energy(sm.model, belief, local).total;
    belief = propagate_belief(sm.model, belief, a);
  }
  return total;
}

// KL(projected || target); with a uniform target this is log K minus the
// projected distribution's entropy, so maximizing species entropy minimizes it.
inline double env_free_energy(const CategoricalDist& projected_species,
                              const CategoricalDist& target) {
  return kl_divergence(projected_species, target);
}

// Species distribution the self model predicts at the end of the horizon.
inline CategoricalDist projected_species(const EthicalField& field, const std::string& action) {
  const std::string& local = field.local_action(kEnvId, action);
  std::size_t a = field.self_model.action_index(local);
  CategoricalDist belief = field.self_belief;
  for (int t = 1; t < field.horizon; ++t) belief = propagate_belief(field.self_model, belief, a);
  return predict_outcome_dist(field.self_model, belief, local);
}

inline GlobalBreakdown global_efe(const EthicalField& field, const std::string& action,
                                  const std::map<std::string, double>& penalties) {
  GlobalBreakdown g;
  for (const auto& sm : field.stakeholders) {
    StakeholderTerm term;
    term.raw = stakeholder_efe(field, sm.id, action);
    term.confidence = confidence_weight(sm.trust);
    term.weighted = term.confidence * term.raw;
    g.stakeholder_terms[sm.id] = term;
    g.total += term.weighted;
  }
  if (field.env_weight > 0.0) {
    g.env_raw = env_free_energy(projected_species(field, action), field.env_target);
    g.env_term = field.env_weight * g.env_raw;
    g.total += g.env_term;
  }
  auto p = penalties.find(action);
  if (p != penalties.end()) {
    g.penalty = p->second;
    g.total += g.penalty;
  }
  return g;
}

// The full selection pipeline: fire norms, filter, score every allowed
// candidate, take the argmin. Ties go to the lexicographically first label
// and are noted in the record.
inline DecisionRecord select_action(const EthicalField& field,
                                    const std::set<std::string>& candidates, const NormSet& norms,
                                    const SymbolicState& state, double tau, double theta) {
  DecisionRecord rec;
  rec.verdicts = active_verdicts(norms, state, theta, candidates, field.satisfies);
  FilterResult filtered = filter_actions(candidates, rec.verdicts, tau, field.satisfies);
  rec.excluded = filtered.excluded;
  rec.penalties = filtered.penalties;

  bool first = true;
  double best = 0.0;
  for (const std::string& c : filtered.allowed) {  // std::set: lexicographic order
    GlobalBreakdown g = global_efe(field, c, filtered.penalties);
    if (!std::isfinite(g.total))
      throw NonFiniteObjective("global EFE for '" + c + "' is not finite");
    rec.evaluated[c] = g;
    if (first || g.total < best) {
      rec.chosen = c;
      best = g.total;
      first = false;
    } else if (g.total == best) {
      rec.tie_note = "tie between " + rec.chosen + " and " + c + "; kept " + rec.chosen;
    }
  }
  return rec;
}

}  // namespace nael
