#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nael/categorical.hpp"
#include "nael/errors.hpp"

namespace nael {

// Tabular world model of one agent: labelled state/observation/action spaces,
// likelihood P(o|s), per-action transition P(s'|s,a), log-preferences C(o)
// and a prior over states.
struct GenerativeModel {
  std::vector<std::string> states;
  std::vector<std::string> observations;
  std::vector<std::string> actions;
  std::vector<CategoricalDist> likelihood;                // [state] -> dist over observations
  std::vector<std::vector<CategoricalDist>> transition;   // [action][state] -> dist over next states
  std::vector<double> preferences;                        // log-preference per observation, nats
  CategoricalDist prior;                                  // over states

  std::size_t state_index(const std::string& label) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i] == label) return i;
    throw UnknownState("unknown state '" + label + "'");
  }

  std::size_t obs_index(const std::string& label) const {
    for (std::size_t i = 0; i < observations.size(); ++i)
      if (observations[i] == label) return i;
    throw UnknownObservation("unknown observation '" + label + "'");
  }

  std::size_t action_index(const std::string& label) const {
    for (std::size_t i = 0; i < actions.size(); ++i)
      if (actions[i] == label) return i;
    throw UnknownAction("unknown action '" + label + "'");
  }

  // Structural diagnostics; empty means the model is well formed. Each entry
  // names the offending state/action so callers can surface it directly.
  std::vector<std::string> diagnostics() const {
    std::vector<std::string> out;
    if (states.empty()) out.push_back("model has no states");
    if (observations.empty()) out.push_back("model has no observations");
    if (actions.empty()) out.push_back("model has no actions");
    if (likelihood.size() != states.size())
      out.push_back("likelihood has " + std::to_string(likelihood.size()) + " rows for " +
                    std::to_string(states.size()) + " states");
    for (std::size_t s = 0; s < likelihood.size(); ++s)
      if (likelihood[s].size() != observations.size())
        out.push_back("likelihood row for state '" + states[s] + "' has wrong support");
    if (transition.size() != actions.size())
      out.push_back("transition has " + std::to_string(transition.size()) + " action slices for " +
                    std::to_string(actions.size()) + " actions");
    for (std::size_t a = 0; a < transition.size(); ++a) {
      if (transition[a].size() != states.size()) {
        out.push_back("transition slice for action '" + actions[a] + "' has wrong state count");
        continue;
      }
      for (std::size_t s = 0; s < transition[a].size(); ++s)
        if (transition[a][s].size() != states.size())
          out.push_back("transition row for state '" + states[s] + "' under action '" + actions[a] +
                        "' has wrong support");
    }
    if (preferences.size() != observations.size())
      out.push_back("preference vector length " + std::to_string(preferences.size()) +
                    " does not match " + std::to_string(observations.size()) + " observations");
    if (prior.size() != states.size()) out.push_back("prior support does not match states");
    return out;
  }

  void validate() const {
    auto d = diagnostics();
    if (!d.empty()) throw ConfigError("invalid generative model: " + d.front());
  }

  // Builds from raw probability tables, naming the offending state/action in
  // the diagnostic when a row fails to normalize.
  static GenerativeModel from_tables(std::vector<std::string> states,
                                     std::vector<std::string> observations,
                                     std::vector<std::string> actions,
                                     const std::vector<std::vector<double>>& likelihood_rows,
                                     const std::vector<std::vector<std::vector<double>>>& transition_rows,
                                     std::vector<double> preferences,
                                     const std::vector<double>& prior_probs) {
    std::vector<CategoricalDist> likelihood;
    for (std::size_t s = 0; s < likelihood_rows.size(); ++s) {
      try {
        likelihood.emplace_back(likelihood_rows[s]);
      } catch (const InvalidDistribution& e) {
        throw ConfigError("likelihood row for state '" + states.at(s) + "': " + e.what());
      }
    }
    std::vector<std::vector<CategoricalDist>> transition;
    for (std::size_t a = 0; a < transition_rows.size(); ++a) {
      std::vector<CategoricalDist> slice;
      for (std::size_t s = 0; s < transition_rows[a].size(); ++s) {
        try {
          slice.emplace_back(transition_rows[a][s]);
        } catch (const InvalidDistribution& e) {
          throw ConfigError("transition row for state '" + states.at(s) + "' under action '" +
                            actions.at(a) + "': " + e.what());
        }
      }
      transition.push_back(std::move(slice));
    }
    CategoricalDist prior = [&] {
      try {
        return CategoricalDist(prior_probs);
      } catch (const InvalidDistribution& e) {
        throw ConfigError(std::string("prior: ") + e.what());
      }
    }();
    GenerativeModel m{std::move(states), std::move(observations), std::move(actions),
                      std::move(likelihood), std::move(transition), std::move(preferences),
                      std::move(prior)};
    m.validate();
    return m;
  }
};

}  // namespace nael
