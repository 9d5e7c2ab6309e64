#pragma once

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nael/errors.hpp"
#include "nael/opinion.hpp"
#include "nael/toml.hpp"

namespace nael {

inline Opinion opinion_from_array(const std::vector<double>& v, const std::string& what) {
  if (v.size() != 3 && v.size() != 4)
    throw ConfigError(what + " must be [b, d, u] or [b, d, u, a]");
  Opinion o{v[0], v[1], v[2], v.size() == 4 ? v[3] : 0.5};
  o.validate();
  return o;
}

// Everything the Arid Valley scenario is parameterized by. Defaults here are
// the documented baseline; the bundled config file restates them explicitly
// so a decision is auditable from the file alone.
struct ScenarioConfig {
  int schema_version = 1;

  // valley dynamics
  long budget = 100;
  int d_max = 5;
  std::array<long, 2> need = {35, 25};
  double kappa = 0.5;
  std::vector<long> species0 = {60, 22, 12, 6};
  std::array<int, 2> deficit0 = {1, 1};
  std::vector<std::vector<double>> ecology_response = {{1.3, 1.1, 0.9, 0.7},
                                                       {1.0, 1.0, 1.0, 1.0}};
  double eco_mixing = 0.3;
  double eco_process_noise = 0.05;
  double sustain_share = 0.15;
  double low_entropy_frac = 0.8;

  // model construction
  int horizon = 3;
  int entropy_bins = 6;
  double community_pref_scale = 2.0;
  double w_pref_scale = 1.5;
  double emission_concentration = 3.0;
  std::vector<double> emission_base = {0.7, 0.15, 0.1, 0.05};
  double drift_rate = 0.8;
  int window = 8;  // observations per report source
  // optional raw transition overrides, keyed "<model>/<action>"
  std::map<std::string, std::vector<std::vector<double>>> transition_overrides;

  // sensing
  double noise_c1 = 0.1;
  double noise_c2 = 0.1;
  double noise_w = 0.1;

  // trust priors
  Opinion trust_c1{0.8, 0.05, 0.15, 0.5};
  Opinion trust_c2{0.8, 0.05, 0.15, 0.5};
  Opinion trust_w{0.7, 0.1, 0.2, 0.5};

  // ethics
  std::string norm_file = "arid_valley.norms";
  double tau = 0.8;
  double theta = 0.5;
  double env_weight = 1.0;

  // candidate actions
  double grid_step = 0.1;
  std::vector<std::string> candidate_names;               // empty -> grid
  std::vector<std::array<double, 3>> candidate_fractions;

  // run
  unsigned long long seed = 7;
  int days = 30;

  int k_species() const { return static_cast<int>(species0.size()); }

  static ScenarioConfig from_table(const TomlTable& t) {
    ScenarioConfig c;
    c.schema_version = static_cast<int>(t.get_int("schema_version", 1));
    if (c.schema_version != 1)
      throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));

    c.budget = t.get_int("valley.budget", c.budget);
    c.d_max = static_cast<int>(t.get_int("valley.d_max", c.d_max));
    c.kappa = t.get_double("valley.kappa", c.kappa);
    if (t.has("valley.need")) {
      auto v = t.get_number_array("valley.need");
      if (v.size() != 2) throw ConfigError("valley.need must have 2 entries");
      c.need = {static_cast<long>(v[0]), static_cast<long>(v[1])};
    }
    if (t.has("valley.species")) {
      c.species0.clear();
      for (double x : t.get_number_array("valley.species"))
        c.species0.push_back(static_cast<long>(x));
    }
    if (t.has("valley.deficit")) {
      auto v = t.get_number_array("valley.deficit");
      if (v.size() != 2) throw ConfigError("valley.deficit must have 2 entries");
      c.deficit0 = {static_cast<int>(v[0]), static_cast<int>(v[1])};
    }
    if (t.has("valley.ecology_response")) c.ecology_response = t.get_matrix("valley.ecology_response");
    c.eco_mixing = t.get_double("valley.eco_mixing", c.eco_mixing);
    c.eco_process_noise = t.get_double("valley.eco_process_noise", c.eco_process_noise);
    c.sustain_share = t.get_double("valley.sustain_share", c.sustain_share);
    c.low_entropy_frac = t.get_double("valley.low_entropy_frac", c.low_entropy_frac);

    c.horizon = static_cast<int>(t.get_int("models.horizon", c.horizon));
    c.entropy_bins = static_cast<int>(t.get_int("models.entropy_bins", c.entropy_bins));
    c.community_pref_scale = t.get_double("models.community_pref_scale", c.community_pref_scale);
    c.w_pref_scale = t.get_double("models.w_pref_scale", c.w_pref_scale);
    c.emission_concentration = t.get_double("models.emission_concentration", c.emission_concentration);
    if (t.has("models.emission_base")) c.emission_base = t.get_number_array("models.emission_base");
    c.drift_rate = t.get_double("models.drift_rate", c.drift_rate);
    c.window = static_cast<int>(t.get_int("models.window", c.window));
    for (const auto& [key, val] : t.values) {
      const std::string prefix = "models.transition.";
      if (key.rfind(prefix, 0) == 0) {
        std::string name = key.substr(prefix.size());
        // keys use '_over_' since '/' cannot appear in a bare TOML key
        std::size_t sep = name.find("_over_");
        if (sep == std::string::npos)
          throw ConfigError("transition override key '" + key + "' must be <action>_over_<model>");
        std::string action = name.substr(0, sep), model = name.substr(sep + 6);
        c.transition_overrides[model + "/" + action] = t.get_matrix(key);
        (void)val;
      }
    }

    c.noise_c1 = t.get_double("noise.c1", c.noise_c1);
    c.noise_c2 = t.get_double("noise.c2", c.noise_c2);
    c.noise_w = t.get_double("noise.w", c.noise_w);

    if (t.has("trust.c1")) c.trust_c1 = opinion_from_array(t.get_number_array("trust.c1"), "trust.c1");
    if (t.has("trust.c2")) c.trust_c2 = opinion_from_array(t.get_number_array("trust.c2"), "trust.c2");
    if (t.has("trust.w")) c.trust_w = opinion_from_array(t.get_number_array("trust.w"), "trust.w");

    c.norm_file = t.get_string("ethics.norms", c.norm_file);
    c.tau = t.get_double("ethics.tau", c.tau);
    c.theta = t.get_double("ethics.theta", c.theta);
    c.env_weight = t.get_double("ethics.env_weight", c.env_weight);

    c.grid_step = t.get_double("selection.grid_step", c.grid_step);
    if (t.has("selection.candidates")) {
      c.candidate_names = t.get_string_array("selection.candidates");
      for (const std::string& name : c.candidate_names) {
        auto v = t.get_number_array("selection." + name);
        if (v.size() != 3)
          throw ConfigError("candidate '" + name + "' must list 3 fractions");
        c.candidate_fractions.push_back({v[0], v[1], v[2]});
      }
    }

    c.seed = static_cast<unsigned long long>(t.get_int("run.seed", static_cast<long long>(c.seed)));
    c.days = static_cast<int>(t.get_int("run.days", c.days));
    return c;
  }

  // Collects every invariant violation instead of stopping at the first, so
  // `validate` can print a full report.
  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    auto bad = [&out](const std::string& msg) { out.push_back(msg); };
    if (budget <= 0) bad("budget must be positive");
    if (d_max < 1) bad("d_max must be >= 1");
    if (need[0] <= 0 || need[1] <= 0) bad("community needs must be positive");
    if (kappa <= 0) bad("kappa must be positive");
    if (species0.empty()) bad("species list is empty");
    long total = 0;
    for (long s : species0) {
      if (s < 0) bad("species counts must be nonnegative");
      total += s;
    }
    if (total <= 0) bad("species counts must not be all zero");
    for (int d : deficit0)
      if (d < 0 || d > d_max) bad("initial deficit outside [0, d_max]");
    if (ecology_response.size() != 2)
      bad("ecology_response must have 2 rows (drought, sustained)");
    for (const auto& row : ecology_response) {
      if (static_cast<int>(row.size()) != k_species())
        bad("ecology_response rows must have one entry per species");
      for (double m : row)
        if (m <= 0) bad("ecology_response multipliers must be positive");
    }
    if (eco_mixing < 0 || eco_mixing > 1) bad("eco_mixing must lie in [0, 1]");
    if (eco_process_noise < 0) bad("eco_process_noise must be >= 0");
    if (sustain_share <= 0 || sustain_share > 1) bad("sustain_share must lie in (0, 1]");
    if (low_entropy_frac <= 0 || low_entropy_frac > 1) bad("low_entropy_frac must lie in (0, 1]");
    if (horizon < 1) bad("horizon must be >= 1");
    if (entropy_bins < 2) bad("entropy_bins must be >= 2");
    if (static_cast<int>(emission_base.size()) != k_species())
      bad("emission_base must have one entry per species");
    if (window < 1) bad("window must be >= 1");
    for (double n : {noise_c1, noise_c2, noise_w})
      if (n < 0 || n > 1) bad("noise levels must lie in [0, 1]");
    if (tau <= 0 || tau > 1) bad("tau must lie in (0, 1]");
    if (theta <= 0 || theta > 1) bad("theta must lie in (0, 1]");
    if (env_weight < 0) bad("env_weight must be >= 0");
    const double steps[] = {0.05, 0.1, 0.2, 0.25, 0.5, 1.0};
    bool ok_step = false;
    for (double s : steps) ok_step = ok_step || std::fabs(grid_step - s) < 1e-12;
    if (!ok_step) bad("grid_step must be one of 0.05, 0.1, 0.2, 0.25, 0.5, 1.0");
    if (candidate_names.size() != candidate_fractions.size())
      bad("candidate names and fractions disagree");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < candidate_names.size(); ++i) {
      if (!seen.insert(candidate_names[i]).second)
        bad("duplicate candidate name '" + candidate_names[i] + "'");
      double sum = 0;
      for (double f : candidate_fractions[i]) {
        if (f < 0) bad("candidate '" + candidate_names[i] + "' has a negative fraction");
        sum += f;
      }
      if (std::fabs(sum - 1.0) > 1e-9)
        bad("candidate '" + candidate_names[i] + "' fractions must sum to 1");
    }
    if (days < 1) bad("days must be >= 1");
    return out;
  }

  void validate() const {
    auto p = problems();
    if (!p.empty()) throw ConfigError(p.front());
  }
};

inline ScenarioConfig parse_scenario_config(const std::string& text) {
  return ScenarioConfig::from_table(parse_toml(text));
}

}  // namespace nael
