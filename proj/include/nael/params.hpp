#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nael/categorical.hpp"
#include "nael/errors.hpp"
#include "nael/global.hpp"
#include "nael/norms.hpp"
#include "nael/valley.hpp"

namespace nael {

// The adaptable ethical stance. Flattening order is fixed: the ecological
// target logits, each stakeholder's preference vector in field order, norm
// weights by id, then env_weight — and names() documents it column by column.
struct EthicalParams {
  std::vector<double> env_target_pref;
  std::vector<std::pair<std::string, std::vector<double>>> stakeholder_pref;
  std::map<std::string, double> norm_weight;
  double env_weight = 1.0;

  std::vector<double> flatten() const {
    std::vector<double> x(env_target_pref);
    for (const auto& [id, pref] : stakeholder_pref) x.insert(x.end(), pref.begin(), pref.end());
    for (const auto& [id, w] : norm_weight) x.push_back(w);
    x.push_back(env_weight);
    return x;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < env_target_pref.size(); ++i)
      out.push_back("env_target[" + std::to_string(i) + "]");
    for (const auto& [id, pref] : stakeholder_pref)
      for (std::size_t i = 0; i < pref.size(); ++i)
        out.push_back("pref." + id + "[" + std::to_string(i) + "]");
    for (const auto& [id, w] : norm_weight) out.push_back("norm." + id);
    out.push_back("env_weight");
    return out;
  }

  std::size_t dim() const {
    std::size_t n = env_target_pref.size() + norm_weight.size() + 1;
    for (const auto& [id, pref] : stakeholder_pref) n += pref.size();
    return n;
  }

  // rebuilds a params struct shaped like `shape` from a flat vector
  static EthicalParams unflatten(const EthicalParams& shape, const std::vector<double>& x) {
    if (x.size() != shape.dim())
      throw ConfigError("parameter vector has wrong dimension " + std::to_string(x.size()));
    EthicalParams p = shape;
    std::size_t i = 0;
    for (double& v : p.env_target_pref) v = x[i++];
    for (auto& [id, pref] : p.stakeholder_pref)
      for (double& v : pref) v = x[i++];
    for (auto& [id, w] : p.norm_weight) w = x[i++];
    p.env_weight = x[i++];
    return p;
  }

  // constrained coordinates clamp to zero from below
  void project() {
    for (auto& [id, w] : norm_weight) w = std::max(0.0, w);
    env_weight = std::max(0.0, env_weight);
  }
};

inline EthicalParams initial_params(const Scenario& sc) {
  EthicalParams p;
  p.env_target_pref.assign(static_cast<std::size_t>(sc.config.k_species()), 0.0);
  for (const std::string& id : kCommunityIds)
    p.stakeholder_pref.emplace_back(id, community_model(sc.config, id).preferences);
  p.stakeholder_pref.emplace_back(kSanctuaryId, sanctuary_model(sc.config).preferences);
  // only obligation weights adapt; prohibitions stay hard filters
  for (const Norm& n : sc.norms)
    if (n.modality == Modality::Obligation) p.norm_weight[n.id] = n.weight;
  p.env_weight = sc.config.env_weight;
  return p;
}

// overrides the field's adjustable pieces in place
inline void apply_params(EthicalField& field, const EthicalParams& p) {
  field.env_target = softmax(p.env_target_pref);
  field.env_weight = p.env_weight;
  for (const auto& [id, pref] : p.stakeholder_pref) {
    for (auto& sm : field.stakeholders) {
      if (sm.id != id) continue;
      if (sm.model.preferences.size() != pref.size())
        throw ConfigError("preference vector for '" + id + "' has wrong length");
      sm.model.preferences = pref;
    }
  }
}

inline NormSet with_weights(const NormSet& norms, const EthicalParams& p) {
  NormSet out = norms;
  for (Norm& n : out) {
    auto it = p.norm_weight.find(n.id);
    if (it != p.norm_weight.end()) n.weight = it->second;
  }
  return out;
}

}  // namespace nael
