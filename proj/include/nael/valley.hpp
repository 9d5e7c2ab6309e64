#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nael/categorical.hpp"
#include "nael/errors.hpp"
#include "nael/ethica.hpp"
#include "nael/global.hpp"
#include "nael/infer.hpp"
#include "nael/norms.hpp"
#include "nael/opinion.hpp"
#include "nael/rng.hpp"
#include "nael/scenario.hpp"

namespace nael {

inline const std::array<std::string, 2> kCommunityIds = {"C1", "C2"};
inline constexpr const char* kSanctuaryId = "W";

struct ValleyState {
  std::array<int, 2> deficit = {0, 0};  // days without adequate water, C1/C2
  std::vector<long> species;            // counts over K species in W
  long day = 0;

  void validate(const ScenarioConfig& c) const {
    for (int d : deficit)
      if (d < 0 || d > c.d_max) throw ConfigError("deficit outside [0, d_max]");
    if (static_cast<int>(species.size()) != c.k_species())
      throw ConfigError("species vector must have " + std::to_string(c.k_species()) + " entries");
    long total = 0;
    for (long s : species) {
      if (s < 0) throw ConfigError("species counts must be nonnegative");
      total += s;
    }
    if (total <= 0) throw ConfigError("species counts must not be all zero");
  }
};

inline ValleyState initial_state(const ScenarioConfig& c) {
  ValleyState s;
  s.deficit = c.deficit0;
  s.species = c.species0;
  s.day = 0;
  s.validate(c);
  return s;
}

// Proportional rounding: floor the quotas, then hand the leftover units to
// the largest fractional parts (ties to the lower index). Preserves the total.
inline std::vector<long> largest_remainder(const std::vector<double>& weights, long total) {
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidDistribution("negative weight in rounding");
    sum += w;
  }
  if (sum <= 0.0) throw InvalidDistribution("weights sum to zero in rounding");
  std::vector<long> base(weights.size());
  std::vector<std::pair<double, std::size_t>> frac;
  long assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double quota = weights[i] / sum * static_cast<double>(total);
    base[i] = static_cast<long>(std::floor(quota));
    assigned += base[i];
    frac.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(frac.begin(), frac.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long r = 0; r < total - assigned; ++r) base[frac[static_cast<std::size_t>(r)].second] += 1;
  return base;
}

struct Allocation {
  std::array<double, 3> frac = {0.0, 0.0, 0.0};  // shares for C1, C2, W
  long budget = 100;

  void validate() const {
    double sum = 0.0;
    for (double f : frac) {
      if (f < 0.0) throw InvalidDistribution("allocation fractions must be nonnegative");
      sum += f;
    }
    if (std::fabs(sum - 1.0) > kProbTolerance)
      throw InvalidDistribution("allocation fractions must sum to 1");
    if (budget <= 0) throw ConfigError("budget must be positive");
  }

  std::array<long, 3> units() const {
    auto u = largest_remainder({frac[0], frac[1], frac[2]}, budget);
    return {u[0], u[1], u[2]};
  }
};

inline double survival_probability(int deficit, double kappa) {
  return std::exp(-kappa * static_cast<double>(deficit));
}

// All allocation triples on the simplex lattice with the given step, in
// lexicographic order of their fractions.
inline std::vector<Allocation> candidate_allocations(double grid_step, long budget = 100) {
  const double allowed[] = {0.05, 0.1, 0.2, 0.25, 0.5, 1.0};
  int n = 0;
  for (double s : allowed)
    if (std::fabs(grid_step - s) < 1e-12) n = static_cast<int>(std::lround(1.0 / s));
  if (n == 0)
    throw InvalidGridStep("grid step must be one of 0.05, 0.1, 0.2, 0.25, 0.5, 1.0");
  std::vector<Allocation> out;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n - i; ++j) {
      int k = n - i - j;
      Allocation a;
      a.frac = {static_cast<double>(i) / n, static_cast<double>(j) / n,
                static_cast<double>(k) / n};
      a.budget = budget;
      out.push_back(a);
    }
  return out;
}

inline std::string allocation_label(const Allocation& a) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "a%03d_%03d_%03d", static_cast<int>(std::lround(a.frac[0] * 100)),
                static_cast<int>(std::lround(a.frac[1] * 100)),
                static_cast<int>(std::lround(a.frac[2] * 100)));
  return buf;
}

struct SourceReading {
  int deficit_reading = 0;  // noisy deficit level
  long pos = 0;             // window observations supporting "has water"
  long neg = 0;
};

struct Report {
  long day = 0;
  std::map<std::string, SourceReading> communities;
  std::vector<long> species;  // noisy counts, first window draw
  long low_pos = 0;           // window observations supporting "reserve is low"
  long low_neg = 0;
  int w_bin = 0;              // entropy bin of the reported counts
  std::map<std::string, double> noise;

  void validate() const {
    for (const auto& [id, r] : this->communities)
      if (r.pos < 0 || r.neg < 0) throw ConfigError("negative evidence count for " + id);
    if (low_pos < 0 || low_neg < 0) throw ConfigError("negative reserve evidence");
  }
};

inline double normalized_entropy(const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum <= 0.0 || weights.size() < 2) return 0.0;
  double h = 0.0;
  for (double w : weights) {
    if (w <= 0.0) continue;
    double p = w / sum;
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(weights.size()));
}

inline int entropy_bin(double normalized, int bins) {
  int b = static_cast<int>(std::floor(normalized * bins));
  return std::clamp(b, 0, bins - 1);
}

// One noisy observation pass over the current state. Draw order is fixed:
// C1 reading + window, C2 reading + window, then the sanctuary's window of
// species count draws.
inline Report sense(const ValleyState& state, const ScenarioConfig& c, Rng& rng) {
  Report rep;
  rep.day = state.day;
  rep.noise = {{"C1", c.noise_c1}, {"C2", c.noise_c2}, {kSanctuaryId, c.noise_w}};

  const double eps_c[2] = {c.noise_c1, c.noise_c2};
  for (int i = 0; i < 2; ++i) {
    SourceReading r;
    int truth = state.deficit[i];
    if (rng.bernoulli(eps_c[i]) && c.d_max >= 1) {
      // misread: uniform over the other deficit levels
      int other = static_cast<int>(rng.below(static_cast<std::uint64_t>(c.d_max)));
      r.deficit_reading = other >= truth ? other + 1 : other;
    } else {
      r.deficit_reading = truth;
    }
    bool has_water = truth == 0;
    for (int j = 0; j < c.window; ++j) {
      bool obs = rng.bernoulli(eps_c[i]) ? !has_water : has_water;
      (obs ? r.pos : r.neg) += 1;
    }
    rep.communities[kCommunityIds[static_cast<std::size_t>(i)]] = r;
  }

  int k = c.k_species();
  for (int j = 0; j < c.window; ++j) {
    std::vector<double> noisy(static_cast<std::size_t>(k));
    std::vector<long> rounded(static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) {
      double v = static_cast<double>(state.species[static_cast<std::size_t>(s)]) *
                 std::exp(c.noise_w * rng.normal());
      rounded[static_cast<std::size_t>(s)] = std::max(0l, std::lround(v));
      noisy[static_cast<std::size_t>(s)] = static_cast<double>(rounded[static_cast<std::size_t>(s)]);
    }
    double h = normalized_entropy(noisy);
    (h < c.low_entropy_frac ? rep.low_pos : rep.low_neg) += 1;
    if (j == 0) {
      rep.species = rounded;
      rep.w_bin = entropy_bin(h, c.entropy_bins);
    }
  }
  rep.validate();
  return rep;
}

// Ground-truth daily transition: deficits reset or grow against needs, the
// species mix responds to W's share, and a fresh report is sensed from the
// new state.
inline std::pair<ValleyState, Report> step(const ValleyState& state, const Allocation& alloc,
                                           const ScenarioConfig& c, Rng& rng) {
  alloc.validate();
  state.validate(c);
  ValleyState next = state;
  next.day = state.day + 1;

  auto units = alloc.units();
  for (int i = 0; i < 2; ++i)
    next.deficit[static_cast<std::size_t>(i)] =
        units[static_cast<std::size_t>(i)] >= c.need[static_cast<std::size_t>(i)]
            ? 0
            : std::min(state.deficit[static_cast<std::size_t>(i)] + 1, c.d_max);

  // species respond to the sanctuary share: multipliers interpolate between
  // the drought row and the sustained row, with mixing toward an even spread
  // when water arrives
  long total = std::accumulate(state.species.begin(), state.species.end(), 0l);
  double lambda = std::min(1.0, alloc.frac[2] / c.sustain_share);
  std::size_t k = state.species.size();
  std::vector<double> mass(k);
  double mass_sum = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    double mult = (1.0 - lambda) * c.ecology_response[0][s] + lambda * c.ecology_response[1][s];
    mass[s] = static_cast<double>(state.species[s]) * mult;
    mass_sum += mass[s];
  }
  double mix = c.eco_mixing * lambda;
  for (std::size_t s = 0; s < k; ++s) {
    double p = mass[s] / mass_sum;
    double mixed = (1.0 - mix) * p + mix / static_cast<double>(k);
    mass[s] = mixed * std::exp(c.eco_process_noise * rng.normal());
  }
  next.species = largest_remainder(mass, total);

  Report rep = sense(next, c, rng);
  return {std::move(next), std::move(rep)};
}

inline std::string atom_has_water(const std::string& community) {
  return "has_water(" + community + ")";
}

inline std::string atom_low_reserve() { return std::string("low_reserve(") + kSanctuaryId + ")"; }

// Symbolic picture from one report: evidence counts become opinions, which
// are trust-discounted at the top level and kept raw inside each source's
// own frame.
inline SymbolicState reports_to_state(const Report& rep,
                                      const std::map<std::string, Opinion>& trust) {
  SymbolicState st;
  st.trust = trust;
  auto trust_in = [&trust](const std::string& id) -> const Opinion& {
    auto it = trust.find(id);
    if (it == trust.end()) throw UnknownStakeholder("no trust opinion for source '" + id + "'");
    return it->second;
  };
  for (const auto& [id, r] : rep.communities) {
    Opinion raw = from_evidence(static_cast<double>(r.pos), static_cast<double>(r.neg));
    st.frames[id][atom_has_water(id)] = raw;
    st.atoms[atom_has_water(id)] = discount(trust_in(id), raw);
  }
  Opinion low = from_evidence(static_cast<double>(rep.low_pos), static_cast<double>(rep.low_neg));
  st.frames[kSanctuaryId][atom_low_reserve()] = low;
  st.atoms[atom_low_reserve()] = discount(trust_in(kSanctuaryId), low);
  return st;
}

namespace valley_detail {

// P(obs=j | state=i): identity confused uniformly at rate eps
inline std::vector<std::vector<double>> confusion_rows(int n, double eps) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          i == j ? 1.0 - eps : (n > 1 ? eps / (n - 1) : 1.0);
  if (n == 1) rows[0][0] = 1.0;
  return rows;
}

inline std::vector<std::string> level_names(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// random-walk row drifting up with probability `up`, down with `down`
inline std::vector<double> drift_row(int n, int at, double up, double down) {
  std::vector<double> row(static_cast<std::size_t>(n), 0.0);
  int hi = std::min(at + 1, n - 1), lo = std::max(at - 1, 0);
  row[static_cast<std::size_t>(hi)] += up;
  row[static_cast<std::size_t>(lo)] += down;
  row[static_cast<std::size_t>(at)] += 1.0 - up - down;
  return row;
}

inline void apply_transition_override(const ScenarioConfig& c, const std::string& model_id,
                                      const std::string& action,
                                      std::vector<std::vector<double>>& rows) {
  auto it = c.transition_overrides.find(model_id + "/" + action);
  if (it == c.transition_overrides.end()) return;
  if (it->second.size() != rows.size())
    throw ConfigError("transition override for '" + model_id + "/" + action +
                      "' has wrong row count");
  rows = it->second;
}

}  // namespace valley_detail

// A community's world: deficit levels with deterministic water response and
// survival-shaped preferences.
inline GenerativeModel community_model(const ScenarioConfig& c, const std::string& id) {
  int n = c.d_max + 1;
  double eps = id == "C1" ? c.noise_c1 : c.noise_c2;
  auto names = valley_detail::level_names("d", n);

  std::vector<std::vector<double>> full(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<std::vector<double>> none = full;
  for (int d = 0; d < n; ++d) {
    full[static_cast<std::size_t>(d)][0] = 1.0;
    none[static_cast<std::size_t>(d)][static_cast<std::size_t>(std::min(d + 1, n - 1))] = 1.0;
  }
  valley_detail::apply_transition_override(c, id, "full", full);
  valley_detail::apply_transition_override(c, id, "none", none);

  std::vector<double> prefs;
  for (int d = 0; d < n; ++d)
    prefs.push_back(c.community_pref_scale * std::log(survival_probability(d, c.kappa)));

  return GenerativeModel::from_tables(names, names, {"full", "none"},
                                      valley_detail::confusion_rows(n, eps), {full, none}, prefs,
                                      std::vector<double>(static_cast<std::size_t>(n),
                                                          1.0 / static_cast<double>(n)));
}

// The sanctuary's world: entropy bins of the species mix drifting with or
// against the water supply, preferring the top bin.
inline GenerativeModel sanctuary_model(const ScenarioConfig& c) {
  int n = c.entropy_bins;
  auto names = valley_detail::level_names("b", n);

  std::vector<std::vector<double>> sustain, starve;
  for (int b = 0; b < n; ++b) {
    sustain.push_back(valley_detail::drift_row(n, b, c.drift_rate, 0.0));
    starve.push_back(valley_detail::drift_row(n, b, 0.0, c.drift_rate));
  }
  valley_detail::apply_transition_override(c, kSanctuaryId, "sustain", sustain);
  valley_detail::apply_transition_override(c, kSanctuaryId, "starve", starve);

  std::vector<double> prefs;
  for (int b = 0; b < n; ++b) prefs.push_back(c.w_pref_scale * static_cast<double>(b - (n - 1)));

  return GenerativeModel::from_tables(names, names, {"sustain", "starve"},
                                      valley_detail::confusion_rows(n, c.noise_w),
                                      {sustain, starve}, prefs,
                                      std::vector<double>(static_cast<std::size_t>(n),
                                                          1.0 / static_cast<double>(n)));
}

inline std::string share_action_label(double frac_w) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "w%03d", static_cast<int>(std::lround(frac_w * 10.0)) * 10);
  return buf;
}

// The deciding agent's own ecology model: entropy bins emitting species
// observations, driven by the share of water routed to W.
inline GenerativeModel ecology_model(const ScenarioConfig& c) {
  int n = c.entropy_bins;
  int k = c.k_species();
  auto states = valley_detail::level_names("b", n);
  auto obs = valley_detail::level_names("s", k);

  // low bins emit a concentrated mix, the top bin an even one
  std::vector<std::vector<double>> emission;
  for (int b = 0; b < n; ++b) {
    double conc = c.emission_concentration * static_cast<double>(n - 1 - b) /
                  static_cast<double>(n - 1);
    std::vector<double> row;
    double sum = 0.0;
    for (int s = 0; s < k; ++s) {
      double w = std::pow(c.emission_base[static_cast<std::size_t>(s)], conc);
      row.push_back(w);
      sum += w;
    }
    for (double& w : row) w /= sum;
    emission.push_back(std::move(row));
  }

  std::vector<std::string> actions;
  std::vector<std::vector<std::vector<double>>> transitions;
  for (int a = 0; a <= 10; ++a) {
    double share = static_cast<double>(a) / 10.0;
    std::string label = share_action_label(share);
    double lambda = std::min(1.0, share / c.sustain_share);
    std::vector<std::vector<double>> rows;
    for (int b = 0; b < n; ++b)
      rows.push_back(
          valley_detail::drift_row(n, b, c.drift_rate * lambda, c.drift_rate * (1.0 - lambda)));
    valley_detail::apply_transition_override(c, kEnvId, label, rows);
    actions.push_back(label);
    transitions.push_back(std::move(rows));
  }

  return GenerativeModel::from_tables(states, obs, actions, emission, transitions,
                                      std::vector<double>(static_cast<std::size_t>(k), 0.0),
                                      std::vector<double>(static_cast<std::size_t>(n),
                                                          1.0 / static_cast<double>(n)));
}

// the abstract action vocabulary norms may reference
inline std::set<std::string> norm_action_vocabulary() {
  return {"give_water(C1)", "give_water(C2)", "sustain(W)",
          "prioritize(C1)", "prioritize(C2)", "deny_all(communities)"};
}

inline std::vector<std::pair<std::string, Allocation>> scenario_candidates(
    const ScenarioConfig& c) {
  std::vector<std::pair<std::string, Allocation>> out;
  if (!c.candidate_names.empty()) {
    for (std::size_t i = 0; i < c.candidate_names.size(); ++i) {
      Allocation a;
      a.frac = c.candidate_fractions[i];
      a.budget = c.budget;
      a.validate();
      out.emplace_back(c.candidate_names[i], a);
    }
    return out;
  }
  for (const Allocation& a : candidate_allocations(c.grid_step, c.budget))
    out.emplace_back(allocation_label(a), a);
  return out;
}

// Maps a candidate onto the abstract actions it counts as carrying out:
// meeting a community's need, keeping the sanctuary's share sustaining,
// concentrating half the budget on one community, or starving both.
inline SatisfiesFn make_satisfies(const ScenarioConfig& c,
                                  const std::map<std::string, Allocation>& by_label) {
  long need0 = c.need[0], need1 = c.need[1];
  double sustain = c.sustain_share;
  return [need0, need1, sustain, by_label](const std::string& cand,
                                           const std::string& action) -> bool {
    auto it = by_label.find(cand);
    if (it == by_label.end()) return cand == action;
    const Allocation& a = it->second;
    auto units = a.units();
    if (action == "give_water(C1)") return units[0] >= need0;
    if (action == "give_water(C2)") return units[1] >= need1;
    if (action == "sustain(W)") return a.frac[2] >= sustain;
    if (action == "prioritize(C1)") return a.frac[0] >= 0.5;
    if (action == "prioritize(C2)") return a.frac[1] >= 0.5;
    if (action == "deny_all(communities)") return units[0] < need0 && units[1] < need1;
    return cand == action;
  };
}

struct Scenario {
  ScenarioConfig config;
  NormSet norms;
  std::vector<std::pair<std::string, Allocation>> candidates;
  std::set<std::string> candidate_set;
  std::map<std::string, Allocation> by_label;
  std::map<std::string, Opinion> trust;

  const Allocation& allocation(const std::string& label) const {
    auto it = by_label.find(label);
    if (it == by_label.end()) throw UnknownActionLabel("no candidate '" + label + "'");
    return it->second;
  }
};

inline Scenario make_scenario(ScenarioConfig config, const std::string& norms_text) {
  config.validate();
  Scenario sc;
  sc.config = std::move(config);
  sc.candidates = scenario_candidates(sc.config);
  std::set<std::string> known = norm_action_vocabulary();
  for (const auto& [label, alloc] : sc.candidates) {
    sc.candidate_set.insert(label);
    sc.by_label[label] = alloc;
    known.insert(label);
  }
  sc.norms = parse_norms(norms_text, &known);
  sc.trust = {{"C1", sc.config.trust_c1}, {"C2", sc.config.trust_c2},
              {kSanctuaryId, sc.config.trust_w}};
  return sc;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario(const std::string& config_path) {
  ScenarioConfig config = parse_scenario_config(read_text_file(config_path));
  std::filesystem::path norm_path(config.norm_file);
  if (norm_path.is_relative())
    norm_path = std::filesystem::path(config_path).parent_path() / norm_path;
  return make_scenario(std::move(config), read_text_file(norm_path.string()));
}

// The agent's full decision apparatus for one day, assembled from a report:
// per-stakeholder models conditioned on the day's readings, the ecology
// model, and the projection of every candidate onto local actions.
inline EthicalField build_field(const ScenarioConfig& c, const ValleyState& state,
                                const Report& rep) {
  (void)state;  // the agent sees only the report
  EthicalField field;
  field.horizon = c.horizon;
  field.env_weight = c.env_weight;
  field.env_target = CategoricalDist::uniform(static_cast<std::size_t>(c.k_species()));

  std::map<std::string, Opinion> trust = {
      {"C1", c.trust_c1}, {"C2", c.trust_c2}, {kSanctuaryId, c.trust_w}};
  for (const std::string& id : kCommunityIds) {
    StakeholderModel sm;
    sm.id = id;
    sm.model = community_model(c, id);
    const SourceReading& r = rep.communities.at(id);
    sm.belief = exact_posterior(sm.model, sm.model.prior,
                                "d" + std::to_string(r.deficit_reading));
    sm.trust = trust.at(id);
    field.stakeholders.push_back(std::move(sm));
  }
  {
    StakeholderModel sm;
    sm.id = kSanctuaryId;
    sm.model = sanctuary_model(c);
    sm.belief = exact_posterior(sm.model, sm.model.prior, "b" + std::to_string(rep.w_bin));
    sm.trust = trust.at(kSanctuaryId);
    field.stakeholders.push_back(std::move(sm));
  }

  field.self_model = ecology_model(c);
  field.self_belief = CategoricalDist::delta(static_cast<std::size_t>(c.entropy_bins),
                                             static_cast<std::size_t>(rep.w_bin));

  auto candidates = scenario_candidates(c);
  std::map<std::string, Allocation> by_label;
  for (const auto& [label, alloc] : candidates) {
    by_label[label] = alloc;
    auto units = alloc.units();
    std::map<std::string, std::string> row;
    row["C1"] = units[0] >= c.need[0] ? "full" : "none";
    row["C2"] = units[1] >= c.need[1] ? "full" : "none";
    row[kSanctuaryId] = alloc.frac[2] >= c.sustain_share ? "sustain" : "starve";
    row[kEnvId] = share_action_label(alloc.frac[2]);
    field.projection[label] = std::move(row);
  }
  field.satisfies = make_satisfies(c, by_label);
  field.validate();
  return field;
}

inline ValleyState parse_state_file(const std::string& text, const ScenarioConfig& c) {
  TomlTable t = parse_toml(text);
  ValleyState s;
  s.day = t.get_int("day", 0);
  auto d = t.get_number_array("deficit");
  if (d.size() != 2) throw ConfigError("state deficit must have 2 entries");
  s.deficit = {static_cast<int>(d[0]), static_cast<int>(d[1])};
  s.species.clear();
  for (double v : t.get_number_array("species")) s.species.push_back(static_cast<long>(v));
  s.validate(c);
  return s;
}

inline std::string format_state_file(const ValleyState& s) {
  std::ostringstream out;
  out << "day = " << s.day << "\n";
  out << "deficit = [" << s.deficit[0] << ", " << s.deficit[1] << "]\n";
  out << "species = [";
  for (std::size_t i = 0; i < s.species.size(); ++i) out << (i ? ", " : "") << s.species[i];
  out << "]\n";
  return out.str();
}

}  // namespace nael
