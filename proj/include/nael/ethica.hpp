#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nael/errors.hpp"
#include "nael/formula.hpp"
#include "nael/norms.hpp"
#include "nael/opinion.hpp"

namespace nael {

// The deciding agent's symbolic picture of the world: graded atom valuations,
// the modeled frames of each stakeholder, and the trust held in each of them.
struct SymbolicState {
  std::map<std::string, Opinion> atoms;
  std::map<std::string, std::map<std::string, Opinion>> frames;
  std::map<std::string, Opinion> trust;
};

// Relation deciding whether a candidate action satisfies a norm's action
// label. Defaults to label equality; scenarios may supply a coarser mapping
// (an allocation "contains" an abstract action such as give_water(C1)).
using SatisfiesFn = std::function<bool(const std::string& candidate, const std::string& norm_action)>;

inline bool satisfies_by_equality(const std::string& candidate, const std::string& norm_action) {
  return candidate == norm_action;
}

namespace detail {

inline Opinion eval_node(const Formula::Node& n, const SymbolicState& state,
                         const std::map<std::string, Opinion>* active_frame) {
  switch (n.kind) {
    case Formula::Kind::Atom: {
      const auto& table = active_frame ? *active_frame : state.atoms;
      auto it = table.find(n.name);
      if (it == table.end()) throw UnknownAtom("unknown atom '" + n.name + "'");
      return it->second;
    }
    case Formula::Kind::Not:
      return complement(eval_node(*n.left, state, active_frame));
    case Formula::Kind::And:
      return multiply(eval_node(*n.left, state, active_frame),
                      eval_node(*n.right, state, active_frame));
    case Formula::Kind::Or:
      return comultiply(eval_node(*n.left, state, active_frame),
                        eval_node(*n.right, state, active_frame));
    case Formula::Kind::Implies:
      // implies(f,g) == or(not f, g)
      return comultiply(complement(eval_node(*n.left, state, active_frame)),
                        eval_node(*n.right, state, active_frame));
    case Formula::Kind::From: {
      auto frame = state.frames.find(n.name);
      if (frame == state.frames.end())
        throw UnknownStakeholder("no modeled frame for stakeholder '" + n.name + "'");
      auto trust = state.trust.find(n.name);
      if (trust == state.trust.end())
        throw UnknownStakeholder("no trust opinion for stakeholder '" + n.name + "'");
      Opinion inner = eval_node(*n.left, state, &frame->second);
      return discount(trust->second, inner);
    }
  }
  throw Error("unreachable formula kind");
}

}  // namespace detail

// Evaluates a formula to a graded opinion. Atoms look up the deciding agent's
// valuations; From(i, f) evaluates f in stakeholder i's frame and discounts
// the result by the trust held in i.
inline Opinion eval_formula(const Formula& f, const SymbolicState& state) {
  return detail::eval_node(f.root(), state, nullptr);
}

// crisp gate over graded truth
inline bool holds(const Opinion& x, double theta) {
  return expected_probability(x) >= theta;
}

// probability that the norm's condition obtains
inline double violation_probability(const Norm& norm, const SymbolicState& state) {
  return expected_probability(eval_formula(norm.condition, state));
}

struct FiredNorm {
  std::string id;
  Modality modality;
  std::string action;
  double weight = 0.0;
  Opinion opinion;  // the condition's evaluated opinion
};

struct NormConflict {
  std::string action;          // candidate the conflict is about
  double obligation_weight = 0.0;
  double prohibition_weight = 0.0;
  bool prohibition_won = false;
  std::string note;
};

// Deontic status of one candidate set under the fired norms. obligated maps a
// norm action label to its summed weight; forbidden and permitted partition
// the candidates. Axioms maintained: obligated actions keep at least one
// permitted satisfier, and forbidden ∩ permitted = ∅.
struct Verdicts {
  std::map<std::string, double> obligated;
  std::map<std::string, Opinion> forbidden;
  std::set<std::string> permitted;
  std::vector<FiredNorm> fired;
  std::vector<NormConflict> conflicts;
};

// Fires norms against the symbolic state and resolves the deontic status of
// every candidate. An action both obligated and forbidden goes to whichever
// side carries more total weight; prohibition wins ties.
inline Verdicts active_verdicts(const NormSet& norms, const SymbolicState& state, double theta,
                                const std::set<std::string>& candidates,
                                const SatisfiesFn& satisfies = satisfies_by_equality) {
  if (candidates.empty()) throw EmptyCandidateSet("no candidate actions to judge");

  Verdicts v;
  std::map<std::string, double> obligation_weight;   // norm action -> summed weight
  std::map<std::string, double> prohibition_weight;  // candidate -> summed weight
  for (const Norm& n : norms) {
    Opinion cond = eval_formula(n.condition, state);
    if (!holds(cond, theta)) continue;
    v.fired.push_back(FiredNorm{n.id, n.modality, n.action, n.weight, cond});
    if (n.modality == Modality::Obligation) {
      obligation_weight[n.action] += n.weight;
    } else if (n.modality == Modality::Prohibition) {
      for (const std::string& c : candidates) {
        if (!satisfies(c, n.action)) continue;
        prohibition_weight[c] += n.weight;
        auto it = v.forbidden.find(c);
        if (it == v.forbidden.end() || expected_probability(cond) > expected_probability(it->second))
          v.forbidden[c] = cond;
      }
    }
    // permissions record as fired; the candidate space is open-world
  }

  // axiom closure O a -> P a: an obligated action must keep a permitted
  // satisfier, otherwise the obligation falls (or overrides the prohibition,
  // by total weight)
  for (const auto& [action, ow] : obligation_weight) {
    std::vector<std::string> sat;
    for (const std::string& c : candidates)
      if (satisfies(c, action)) sat.push_back(c);
    if (sat.empty()) {
      v.conflicts.push_back(NormConflict{action, ow, 0.0, false,
                                         "obligated action has no satisfying candidate"});
      continue;  // unsatisfiable here; drop from the verdict
    }
    bool any_permitted = false;
    for (const std::string& c : sat)
      if (v.forbidden.find(c) == v.forbidden.end()) any_permitted = true;
    if (!any_permitted) {
      // every satisfier is forbidden: weight contest per candidate
      for (const std::string& c : sat) {
        double pw = prohibition_weight[c];
        if (ow > pw) {
          v.forbidden.erase(c);
          any_permitted = true;
          v.conflicts.push_back(NormConflict{c, ow, pw, false, "obligation overrides prohibition"});
        } else {
          v.conflicts.push_back(NormConflict{c, ow, pw, true, "prohibition upheld"});
        }
      }
    }
    if (any_permitted) v.obligated[action] = ow;
  }

  for (const std::string& c : candidates)
    if (v.forbidden.find(c) == v.forbidden.end()) v.permitted.insert(c);
  return v;
}

struct FilterResult {
  std::set<std::string> allowed;
  std::map<std::string, double> penalties;  // candidate -> nats for neglected obligations
  // candidates excluded by the tau gate, with the triggering probability
  std::vector<std::pair<std::string, double>> excluded;
};

// Hard-filters candidates whose prohibition is sufficiently probable and
// prices every remaining candidate by the obligations it would neglect.
inline FilterResult filter_actions(const std::set<std::string>& candidates, const Verdicts& verdicts,
                                   double tau,
                                   const SatisfiesFn& satisfies = satisfies_by_equality) {
  FilterResult r;
  for (const std::string& c : candidates) {
    auto it = verdicts.forbidden.find(c);
    if (it != verdicts.forbidden.end() && expected_probability(it->second) >= tau) {
      r.excluded.emplace_back(c, expected_probability(it->second));
      continue;
    }
    r.allowed.insert(c);
  }
  if (r.allowed.empty()) throw NoPermittedAction("every candidate is excluded by a prohibition");

  for (const std::string& c : r.allowed) {
    double penalty = 0.0;
    for (const FiredNorm& fn : verdicts.fired) {
      if (fn.modality != Modality::Obligation) continue;
      if (!satisfies(c, fn.action)) penalty += fn.weight;
    }
    r.penalties[c] = penalty;
  }
  return r;
}

}  // namespace nael
