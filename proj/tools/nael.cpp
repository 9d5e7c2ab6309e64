// Command-line front end: run seeded episodes, inspect a single decision,
// train the ethical parameters, or validate a config. Exit codes: 0 ok,
// 2 config/validation problem, 3 no permitted action, 4 numerical failure.

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nael/nael.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoAction = 3;
constexpr int kExitNumeric = 4;

struct GlobalOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw nael::ConfigError("cannot write to '" + path + "'");
  return out;
}

nael::Scenario load(const GlobalOpts& g) {
  nael::Scenario sc = nael::load_scenario(g.config);
  if (g.seed) sc.config.seed = *g.seed;
  return sc;
}

struct EpisodeOutput {
  std::string trace;
  std::string summary;
  std::string progress;
  std::exception_ptr error;
};

EpisodeOutput run_episode(const nael::Scenario& sc, int episode, std::uint64_t seed, int days,
                          bool want_progress) {
  EpisodeOutput out;
  try {
    nael::Episode ep(sc, seed);
    for (int d = 0; d < days; ++d) {
      nael::DayOutcome day;
      try {
        day = ep.advance();
      } catch (const nael::NoPermittedAction&) {
        // surface the dead end with the day's verdicts before giving up
        nael::SymbolicState sym = nael::reports_to_state(ep.pending_report(), sc.trust);
        nael::Verdicts v = nael::active_verdicts(
            sc.norms, sym, sc.config.theta, sc.candidate_set,
            nael::make_satisfies(sc.config, sc.by_label));
        std::ostringstream msg;
        msg << "episode " << episode << " day " << ep.state().day
            << ": every candidate is prohibited\n"
            << nael::verdicts_json(v).dump() << "\n";
        out.progress += msg.str();
        throw;
      }
      out.trace += nael::report_event(episode, day.report).dump() + "\n";
      out.trace += nael::decision_event(episode, day.decision).dump() + "\n";
      out.trace += nael::transition_event(episode, day.decision.timestep, day.before, day.after,
                                          day.decision.chosen, day.alloc)
                       .dump() +
                   "\n";
      out.summary += nael::summary_row(episode, day) + "\n";
      if (want_progress) {
        char line[160];
        std::snprintf(line, sizeof(line), "ep %d day %ld: %s (G=%.6f)\n", episode,
                      day.decision.timestep, day.decision.chosen.c_str(),
                      day.decision.evaluated.at(day.decision.chosen).total);
        out.progress += line;
      }
    }
  } catch (...) {
    out.error = std::current_exception();
  }
  return out;
}

int cmd_run(const GlobalOpts& g, int days_flag, int episodes, int jobs,
            const std::string& trace_path, const std::string& summary_path) {
  nael::Scenario sc = load(g);
  int days = days_flag > 0 ? days_flag : sc.config.days;
  if (episodes < 1) throw nael::ConfigError("--episodes must be >= 1");
  if (jobs < 1) throw nael::ConfigError("--jobs must be >= 1");

  std::vector<EpisodeOutput> results(static_cast<std::size_t>(episodes));
  bool progress = !g.quiet;
  auto work = [&](int e) {
    results[static_cast<std::size_t>(e)] =
        run_episode(sc, e, sc.config.seed + static_cast<std::uint64_t>(e), days, progress);
  };
  if (jobs == 1 || episodes == 1) {
    for (int e = 0; e < episodes; ++e) work(e);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < std::min(jobs, episodes); ++j)
      pool.emplace_back([&] {
        for (int e = next.fetch_add(1); e < episodes; e = next.fetch_add(1)) work(e);
      });
    for (auto& t : pool) t.join();
  }

  // merged deterministically in seed order regardless of worker scheduling
  std::string trace, summary;
  summary = nael::summary_header() + "\n";
  for (const EpisodeOutput& r : results) {
    trace += r.trace;
    summary += r.summary;
    if (!r.progress.empty()) std::cout << r.progress;
  }
  if (!trace_path.empty()) open_out(trace_path) << trace;
  if (!summary_path.empty()) open_out(summary_path) << summary;
  for (const EpisodeOutput& r : results)
    if (r.error) std::rethrow_exception(r.error);
  return kExitOk;
}

int cmd_decide(const GlobalOpts& g, const std::string& state_path, bool explain) {
  nael::Scenario sc = load(g);
  nael::ValleyState state = state_path.empty()
                                ? nael::initial_state(sc.config)
                                : nael::parse_state_file(nael::read_text_file(state_path),
                                                         sc.config);
  nael::Rng rng(sc.config.seed);
  nael::Report report = nael::sense(state, sc.config, rng);
  nael::SymbolicState sym = nael::reports_to_state(report, sc.trust);
  nael::EthicalField field = nael::build_field(sc.config, state, report);
  nael::DecisionRecord rec = nael::select_action(field, sc.candidate_set, sc.norms, sym,
                                                 sc.config.tau, sc.config.theta);
  rec.timestep = state.day;
  std::cout << nael::format_decide_table(rec, field.satisfies, explain);
  return kExitOk;
}

std::string params_toml(const nael::EthicalParams& p) {
  auto arr = [](const std::vector<double>& v) {
    std::vector<nael::TomlValue> items;
    for (double x : v) items.push_back(nael::TomlValue::of_float(x));
    return nael::toml_format(nael::TomlValue::of_array(items));
  };
  std::ostringstream out;
  out << "schema_version = 1\n\n[params]\n";
  out << "env_weight = " << nael::toml_format(nael::TomlValue::of_float(p.env_weight)) << "\n";
  out << "env_target = " << arr(p.env_target_pref) << "\n";
  for (const auto& [id, pref] : p.stakeholder_pref) out << "pref_" << id << " = " << arr(pref) << "\n";
  out << "\n[params.norm_weights]\n";
  for (const auto& [id, w] : p.norm_weight)
    out << id << " = " << nael::toml_format(nael::TomlValue::of_float(w)) << "\n";
  return out.str();
}

int cmd_train(const GlobalOpts& g, int epochs, double eta, int episodes, double delta,
              const std::string& out_path, const std::string& history_path,
              const std::string& trace_path) {
  nael::Scenario sc = load(g);
  nael::EthicalParams p0 = nael::initial_params(sc);
  auto history = nael::train(sc, p0, eta, epochs, sc.config.seed, episodes, delta);

  std::ofstream history_out = open_out(history_path);
  history_out << "epoch,objective";
  for (const std::string& name : p0.names()) history_out << "," << name;
  history_out << "\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    history_out << e << "," << nael::g9(history[e].objective);
    for (double v : history[e].params.flatten()) history_out << "," << nael::g9(v);
    history_out << "\n";
  }
  open_out(out_path) << params_toml(history.back().params);
  if (!trace_path.empty()) {
    std::ofstream tr = open_out(trace_path);
    for (std::size_t e = 0; e < history.size(); ++e)
      tr << nael::epoch_event(static_cast<int>(e), history[e].objective, history[e].params).dump()
         << "\n";
  }
  if (!g.quiet)
    std::printf("trained %d epochs: objective %.6f -> %.6f\n", epochs, history.front().objective,
                history.back().objective);
  return kExitOk;
}

void collect_from_ids(const nael::Formula::Node& n, std::vector<std::string>& out) {
  if (n.kind == nael::Formula::Kind::From) out.push_back(n.name);
  if (n.left) collect_from_ids(*n.left, out);
  if (n.right) collect_from_ids(*n.right, out);
}

int cmd_validate(const GlobalOpts& g) {
  std::vector<std::string> problems;
  nael::ScenarioConfig config;
  bool structural_ok = true;
  try {
    config = nael::parse_scenario_config(nael::read_text_file(g.config));
  } catch (const nael::Error& e) {
    problems.push_back(e.what());
    structural_ok = false;
  }

  std::vector<std::pair<std::string, nael::Allocation>> candidates;
  if (structural_ok) {
    for (const std::string& p : config.problems()) problems.push_back(p);
    for (const char* who : {"C1", "C2"}) {
      try {
        nael::community_model(config, who).validate();
      } catch (const nael::Error& e) {
        problems.push_back(e.what());
      }
    }
    try {
      nael::sanctuary_model(config).validate();
    } catch (const nael::Error& e) {
      problems.push_back(e.what());
    }
    try {
      nael::ecology_model(config).validate();
    } catch (const nael::Error& e) {
      problems.push_back(e.what());
    }
    try {
      candidates = nael::scenario_candidates(config);
    } catch (const nael::Error& e) {
      problems.push_back(e.what());
    }

    std::filesystem::path norm_path(config.norm_file);
    if (norm_path.is_relative())
      norm_path = std::filesystem::path(g.config).parent_path() / norm_path;
    try {
      nael::NormSet norms = nael::parse_norms(nael::read_text_file(norm_path.string()));
      std::set<std::string> known_actions = nael::norm_action_vocabulary();
      for (const auto& [label, alloc] : candidates) known_actions.insert(label);
      const std::set<std::string> known_atoms = {nael::atom_has_water("C1"),
                                                 nael::atom_has_water("C2"),
                                                 nael::atom_low_reserve()};
      const std::set<std::string> known_sources = {"C1", "C2", "W"};
      for (const nael::Norm& n : norms) {
        if (!known_actions.count(n.action))
          problems.push_back("norm '" + n.id + "': unknown action '" + n.action + "'");
        for (const std::string& atom : n.condition.atoms())
          if (!known_atoms.count(atom))
            problems.push_back("norm '" + n.id + "': unknown atom '" + atom + "'");
        std::vector<std::string> ids;
        collect_from_ids(n.condition.root(), ids);
        for (const std::string& id : ids)
          if (!known_sources.count(id))
            problems.push_back("norm '" + n.id + "': unknown stakeholder '" + id + "'");
      }
    } catch (const nael::Error& e) {
      problems.push_back(e.what());
    }
  }

  if (problems.empty()) {
    std::cout << "ok: " << g.config << " (" << candidates.size() << " candidates)\n";
    return kExitOk;
  }
  std::size_t shown = std::min<std::size_t>(problems.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) std::cout << "problem: " << problems[i] << "\n";
  if (problems.size() > shown)
    std::cout << "(" << problems.size() - shown << " more suppressed)\n";
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"active-inference decision agent for the arid valley scenario"};
  app.require_subcommand(1);
  app.fallthrough();  // accept --config and friends after the subcommand too

  GlobalOpts g;
  std::uint64_t seed_flag = 0;
  app.add_option("--config", g.config, "scenario config (TOML)")->required();
  auto* seed_opt = app.add_option("--seed", seed_flag, "override the config seed");
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  auto* run = app.add_subcommand("run", "run seeded episodes and write trace/summary");
  int days = 0, episodes = 1, jobs = 1;
  std::string trace_path, summary_path;
  run->add_option("--days", days, "days per episode (default: config)");
  run->add_option("--episodes", episodes, "number of seeded episodes");
  run->add_option("--jobs", jobs, "worker threads for episode parallelism");
  run->add_option("--trace", trace_path, "JSONL trace output path");
  run->add_option("--summary", summary_path, "CSV summary output path");

  auto* decide = app.add_subcommand("decide", "evaluate one decision and print the table");
  std::string state_path;
  bool explain = false;
  decide->add_option("--state", state_path, "valley state file (TOML)");
  decide->add_flag("--explain", explain, "also print fired norms and exclusions");

  auto* train = app.add_subcommand("train", "adapt ethical parameters by gradient descent");
  int epochs = 50, train_episodes = nael::kDefaultEpisodes;
  double eta = nael::kDefaultEta, delta = nael::kDefaultDelta;
  std::string params_out = "params.toml", history_out = "history.csv", train_trace;
  train->add_option("--epochs", epochs, "descent epochs");
  train->add_option("--eta", eta, "learning rate");
  train->add_option("--episodes", train_episodes, "episodes per objective evaluation");
  train->add_option("--delta", delta, "finite-difference step");
  train->add_option("--out", params_out, "trained parameters output (TOML)");
  train->add_option("--history", history_out, "training history output (CSV)");
  train->add_option("--trace", train_trace, "optional epoch trace (JSONL)");

  auto* validate = app.add_subcommand("validate", "check a config and its norms");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) g.seed = seed_flag;

  try {
    if (run->parsed()) return cmd_run(g, days, episodes, jobs, trace_path, summary_path);
    if (decide->parsed()) return cmd_decide(g, state_path, explain);
    if (train->parsed())
      return cmd_train(g, epochs, eta, train_episodes, delta, params_out, history_out,
                       train_trace);
    if (validate->parsed()) return cmd_validate(g);
  } catch (const nael::NoPermittedAction& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoAction;
  } catch (const nael::NonFiniteObjective& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const nael::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nael::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nael::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
