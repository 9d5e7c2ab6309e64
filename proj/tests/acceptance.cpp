// Acceptance gate: every release-blocking property on one line each.
// Exits nonzero if any line fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nael/adapt.hpp"
#include "nael/nael.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace nael;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string run_cli(const std::string& args, int& status) {
  std::string full = std::string(NAEL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) {
    status = -1;
    return "";
  }
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
  int rc = pclose(pipe);
  status = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path tmp_path(const std::string& name) {
  return fs::temp_directory_path() / ("nael_accept_" + std::to_string(::getpid()) + "_" + name);
}

std::string config_path(const char* name) {
  return (fs::path(NAEL_CONFIG_DIR) / name).string();
}

char fmt_buf[256];
std::string fmt(const char* f, ...) {
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(fmt_buf, sizeof(fmt_buf), f, ap);
  va_end(ap);
  return fmt_buf;
}

// ---- 1: free-energy minimality ------------------------------------------

bool check_vfe(std::string& detail) {
  Timer timer;
  Rng rng(101);
  double max_gap = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::size_t ns = 2 + rng.below(2);  // |S| <= 3
    GenerativeModel m = testutil::random_model(rng, ns, 2 + rng.below(3), 1 + rng.below(2));
    std::string obs = m.observations[rng.below(m.observations.size())];

    double evidence = 0.0;
    for (std::size_t s = 0; s < ns; ++s) evidence += m.likelihood[s][m.obs_index(obs)] * m.prior[s];
    CategoricalDist post = exact_posterior(m, m.prior, obs);
    double f_star = variational_free_energy(m, post, m.prior, obs);
    double gap = std::fabs(f_star + std::log(evidence));
    max_gap = std::max(max_gap, gap);
    if (gap > 1e-9) {
      detail = fmt("posterior free energy missed -log evidence by %.3g", gap);
      return false;
    }
    for (int k = 0; k < 500; ++k) {
      CategoricalDist q = testutil::random_dist(rng, ns);
      if (variational_free_energy(m, q, m.prior, obs) < f_star - 1e-12) {
        detail = "a random recognition distribution beat the exact posterior";
        return false;
      }
    }
  }
  double secs = timer.seconds();
  detail = fmt("200 models x 500 challengers, max tightness gap %.1e, %.1fs", max_gap, secs);
  return secs < 5.0;
}

// ---- 2: expected free energy against brute-force enumeration -------------

bool check_efe(std::string& detail) {
  Timer timer;
  Rng rng(202);
  double max_err = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::size_t ns = 2 + rng.below(3), no = 2 + rng.below(3);  // |S|,|O| <= 4
    GenerativeModel m = testutil::random_model(rng, ns, no, 1 + rng.below(3));
    CategoricalDist belief = testutil::random_dist(rng, ns);
    for (const std::string& action : m.actions) {
      std::size_t a = m.action_index(action);
      // enumerate next-state and outcome distributions from scratch
      std::vector<double> next(ns, 0.0);
      for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t sp = 0; sp < ns; ++sp) next[sp] += belief[s] * m.transition[a][s][sp];
      std::vector<double> pred(no, 0.0);
      for (std::size_t sp = 0; sp < ns; ++sp)
        for (std::size_t o = 0; o < no; ++o) pred[o] += next[sp] * m.likelihood[sp][o];
      double zc = 0.0;
      for (double c : m.preferences) zc += std::exp(c);
      double risk = 0.0;
      for (std::size_t o = 0; o < no; ++o)
        if (pred[o] > 0.0) risk += pred[o] * std::log(pred[o] / (std::exp(m.preferences[o]) / zc));
      double ambiguity = 0.0;
      for (std::size_t sp = 0; sp < ns; ++sp) {
        double h = 0.0;
        for (std::size_t o = 0; o < no; ++o)
          if (m.likelihood[sp][o] > 0.0)
            h -= m.likelihood[sp][o] * std::log(m.likelihood[sp][o]);
        ambiguity += next[sp] * h;
      }
      EfeBreakdown got = expected_free_energy(m, belief, action);
      double err = std::fabs(got.total - (risk + ambiguity));
      max_err = std::max(max_err, err);
      if (err > 1e-9) {
        detail = fmt("enumeration disagreed by %.3g", err);
        return false;
      }
    }
  }
  double secs = timer.seconds();
  detail = fmt("200 models, every action enumerated, max error %.1e, %.1fs", max_err, secs);
  return secs < 5.0;
}

// ---- 3: opinion algebra closure and laws ----------------------------------

bool check_opinions(std::string& detail) {
  Timer timer;
  Rng rng(303);
  auto closed = [](const Opinion& o) {
    double s = o.b + o.d + o.u;
    return std::fabs(s - 1.0) <= 1e-9 && o.b >= -1e-9 && o.d >= -1e-9 && o.u >= -1e-9 &&
           o.b <= 1.0 + 1e-9 && o.d <= 1.0 + 1e-9 && o.u <= 1.0 + 1e-9;
  };
  auto same = [](const Opinion& x, const Opinion& y) {
    return std::fabs(x.b - y.b) < 1e-12 && std::fabs(x.d - y.d) < 1e-12 &&
           std::fabs(x.u - y.u) < 1e-12 && std::fabs(x.a - y.a) < 1e-12;
  };
  for (int t = 0; t < 10000; ++t) {
    Opinion x = testutil::random_opinion(rng);
    Opinion y = testutil::random_opinion(rng);
    if (x.a <= 0.0 || x.a >= 1.0 || y.a <= 0.0 || y.a >= 1.0) continue;
    if (!closed(multiply(x, y)) || !closed(comultiply(x, y)) || !closed(fuse(x, y)) ||
        !closed(discount(x, y))) {
      detail = "an operator left the opinion simplex";
      return false;
    }
    Opinion inv = complement(complement(x));
    if (!same(inv, x)) {
      detail = "complement is not an involution";
      return false;
    }
    Opinion mxy = multiply(x, y), myx = multiply(y, x);
    Opinion fxy = fuse(x, y), fyx = fuse(y, x);
    if (std::fabs(mxy.b - myx.b) > 1e-12 || std::fabs(fxy.b - fyx.b) > 1e-12) {
      detail = "multiply or fuse lost commutativity";
      return false;
    }
    Opinion full{1.0, 0.0, 0.0, 0.5};
    if (!same(discount(full, x), x)) {
      detail = "full trust failed to act as the discount identity";
      return false;
    }
  }
  double secs = timer.seconds();
  detail = fmt("10^4 random pairs per law, %.1fs", secs);
  return secs < 5.0;
}

// ---- 4: deontic axioms over random norm systems ---------------------------

bool check_deontic(std::string& detail) {
  Rng rng(404);
  const std::vector<std::string> atoms = {"p", "q", "r"};
  const std::vector<std::string> cands = {"act_a", "act_b", "act_c"};
  int nonempty = 0;
  for (int t = 0; t < 1000; ++t) {
    SymbolicState st;
    for (const std::string& a : atoms) st.atoms[a] = testutil::random_opinion(rng);

    NormSet norms;
    std::size_t n_norms = 1 + rng.below(4);
    for (std::size_t i = 0; i < n_norms; ++i) {
      Norm n;
      n.id = "n" + std::to_string(i);
      double roll = rng.uniform01();
      n.modality = roll < 0.4 ? Modality::Obligation
                              : (roll < 0.7 ? Modality::Prohibition : Modality::Permission);
      n.weight = 0.5 + rng.uniform01() * 3.0;
      n.action = cands[rng.below(cands.size())];
      Formula f = Formula::atom(atoms[rng.below(atoms.size())]);
      if (rng.bernoulli(0.5)) f = Formula::negation(f);
      if (rng.bernoulli(0.3))
        f = Formula::conjunction(f, Formula::atom(atoms[rng.below(atoms.size())]));
      n.condition = f;
      norms.push_back(n);
    }

    std::set<std::string> candidates(cands.begin(), cands.end());
    Verdicts v = active_verdicts(norms, st, 0.3, candidates);
    for (const auto& [action, w] : v.obligated)
      if (!v.permitted.count(action)) {
        detail = "an obligated action was not permitted";
        return false;
      }
    for (const auto& [c, op] : v.forbidden)
      if (v.permitted.count(c)) {
        detail = "a candidate was both forbidden and permitted";
        return false;
      }
    if (v.forbidden.size() + v.permitted.size() != candidates.size()) {
      detail = "forbidden and permitted failed to partition the candidates";
      return false;
    }
    if (!v.obligated.empty() || !v.forbidden.empty()) nonempty += 1;
  }
  if (nonempty < 100) {
    detail = fmt("only %d of 1000 systems produced verdicts; generator too weak", nonempty);
    return false;
  }
  detail = fmt("1000 random norm systems, %d with active verdicts", nonempty);
  return true;
}

// ---- 5: crisp evaluation against classical truth tables -------------------

bool classical(const Formula::Node& n, const std::map<std::string, bool>& env) {
  switch (n.kind) {
    case Formula::Kind::Atom:
      return env.at(n.name);
    case Formula::Kind::Not:
      return !classical(*n.left, env);
    case Formula::Kind::And:
      return classical(*n.left, env) && classical(*n.right, env);
    case Formula::Kind::Or:
      return classical(*n.left, env) || classical(*n.right, env);
    case Formula::Kind::Implies:
      return !classical(*n.left, env) || classical(*n.right, env);
    case Formula::Kind::From:
      return classical(*n.left, env);  // a fully trusted frame mirrors the world
  }
  return false;
}

bool check_truth_tables(std::string& detail) {
  const std::vector<std::string> names = {"p", "q", "r", "s"};

  // the 16 crisp worlds, mirrored into a fully trusted frame
  std::vector<SymbolicState> worlds;
  std::vector<std::map<std::string, bool>> envs;
  for (int mask = 0; mask < 16; ++mask) {
    SymbolicState st;
    std::map<std::string, bool> env;
    for (std::size_t i = 0; i < names.size(); ++i) {
      bool val = mask & (1 << i);
      env[names[i]] = val;
      Opinion o{val ? 1.0 : 0.0, val ? 0.0 : 1.0, 0.0, 0.5};
      st.atoms[names[i]] = o;
      st.frames["S1"][names[i]] = o;
    }
    st.trust["S1"] = Opinion{1.0, 0.0, 0.0, 0.5};
    worlds.push_back(st);
    envs.push_back(env);
  }

  auto agrees = [&](const Formula& f) {
    for (std::size_t w = 0; w < worlds.size(); ++w) {
      double e = expected_probability(eval_formula(f, worlds[w]));
      double want = classical(f.root(), envs[w]) ? 1.0 : 0.0;
      if (std::fabs(e - want) > 1e-9) return false;
    }
    return true;
  };

  // exhaustive to depth 2
  std::vector<Formula> level;
  for (const std::string& n : names) level.push_back(Formula::atom(n));
  long tested = 0;
  for (int depth = 0; depth < 2; ++depth) {
    std::vector<Formula> next = level;
    for (const Formula& f : level) next.push_back(Formula::negation(f));
    for (const Formula& f : level)
      for (const Formula& g : level) {
        next.push_back(Formula::conjunction(f, g));
        next.push_back(Formula::disjunction(f, g));
        next.push_back(Formula::implication(f, g));
      }
    level = std::move(next);
    for (const Formula& f : level) {
      ++tested;
      if (!agrees(f)) {
        detail = "exhaustive formula disagreed with its truth table: " + f.print();
        return false;
      }
    }
  }

  // random formulas to depth 3, standpoint operator included
  Rng rng(505);
  std::function<Formula(int)> gen = [&](int depth) -> Formula {
    if (depth == 0 || rng.bernoulli(0.25)) return Formula::atom(names[rng.below(names.size())]);
    switch (rng.below(5)) {
      case 0: return Formula::negation(gen(depth - 1));
      case 1: return Formula::conjunction(gen(depth - 1), gen(depth - 1));
      case 2: return Formula::disjunction(gen(depth - 1), gen(depth - 1));
      case 3: return Formula::implication(gen(depth - 1), gen(depth - 1));
      default: return Formula::standpoint("S1", Formula::atom(names[rng.below(names.size())]));
    }
  };
  for (int t = 0; t < 3000; ++t) {
    Formula f = gen(3);
    ++tested;
    if (!agrees(f)) {
      detail = "random depth-3 formula disagreed with its truth table: " + f.print();
      return false;
    }
  }
  detail = fmt("%ld formulas x 16 assignments (exhaustive to depth 2, sampled at depth 3)", tested);
  return true;
}

// ---- 6: both decision directions, golden tables ---------------------------

struct DecideOutcome {
  std::string chosen;
  double total_a1 = 0.0, total_a2 = 0.0;
};

DecideOutcome decide_in_process(const std::string& config) {
  Scenario sc = load_scenario(config);
  ValleyState state = initial_state(sc.config);
  Rng rng(sc.config.seed);
  Report rep = sense(state, sc.config, rng);
  SymbolicState sym = reports_to_state(rep, sc.trust);
  EthicalField field = build_field(sc.config, state, rep);
  DecisionRecord rec =
      select_action(field, sc.candidate_set, sc.norms, sym, sc.config.tau, sc.config.theta);
  DecideOutcome out;
  out.chosen = rec.chosen;
  out.total_a1 = rec.evaluated.at("A1").total;
  out.total_a2 = rec.evaluated.at("A2").total;
  return out;
}

bool check_decision_directions(std::string& detail) {
  DecideOutcome base = decide_in_process(config_path("arid_valley.toml"));
  if (base.chosen != "A2" || !(base.total_a2 < base.total_a1)) {
    detail = fmt("default config chose %s (A1 %.6f, A2 %.6f)", base.chosen.c_str(), base.total_a1,
                 base.total_a2);
    return false;
  }
  DecideOutcome flip = decide_in_process(config_path("arid_valley_flip.toml"));
  if (flip.chosen != "A1" || !(flip.total_a1 < flip.total_a2)) {
    detail = fmt("flip config chose %s (A1 %.6f, A2 %.6f)", flip.chosen.c_str(), flip.total_a1,
                 flip.total_a2);
    return false;
  }

  int st1 = 0, st2 = 0;
  std::string t1 = run_cli("decide --config '" + config_path("arid_valley.toml") + "' --explain", st1);
  std::string t2 =
      run_cli("decide --config '" + config_path("arid_valley_flip.toml") + "' --explain", st2);
  if (st1 != 0 || st2 != 0) {
    detail = "decide exited nonzero";
    return false;
  }
  if (t1 != read_file((fs::path(NAEL_GOLDEN_DIR) / "decide_default.txt").string()) ||
      t2 != read_file((fs::path(NAEL_GOLDEN_DIR) / "decide_flip.txt").string())) {
    detail = "a printed table drifted from its golden copy";
    return false;
  }
  detail = fmt("default: A2 wins %.4f < %.4f; flip: A1 wins %.4f < %.4f; tables match golden",
               base.total_a2, base.total_a1, flip.total_a1, flip.total_a2);
  return true;
}

// ---- 7: learning convergence ----------------------------------------------

bool check_learning(std::string& detail) {
  Timer timer;
  const std::vector<double> c = {0.7, -0.4, 1.2};
  VecObjective quad = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
    return s;
  };
  auto hist = descend(quad, {0.0, 0.0, 0.0}, 0.05, 100, 1e-3);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (std::fabs(hist.back().first[i] - c[i]) > 1e-3) {
      detail = fmt("quadratic coordinate %zu ended %.2e away from the minimizer", i,
                   std::fabs(hist.back().first[i] - c[i]));
      return false;
    }

  Scenario sc = load_scenario(config_path("arid_valley.toml"));
  auto records = train(sc, initial_params(sc), kDefaultEta, 50, 7, 8);
  if (records.size() != 51) {
    detail = fmt("expected 51 training records, got %zu", records.size());
    return false;
  }
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 10; ++i) {
    first += records[static_cast<std::size_t>(i)].objective;
    last += records[records.size() - 10 + static_cast<std::size_t>(i)].objective;
  }
  first /= 10.0;
  last /= 10.0;
  double secs = timer.seconds();
  if (last > first) {
    detail = fmt("objective rose: first-10 mean %.6f, last-10 mean %.6f", first, last);
    return false;
  }
  detail = fmt("quadratic hit its minimizer; valley objective %.3f -> %.3f over 50 epochs, %.1fs",
               first, last, secs);
  return secs < 60.0;
}

// ---- 8: byte-identical seeded runs -----------------------------------------

bool check_determinism(std::string& detail) {
  fs::path a = tmp_path("det_a.jsonl"), b = tmp_path("det_b.jsonl");
  std::string base = "run --config '" + config_path("arid_valley.toml") +
                     "' --seed 7 --days 30 --quiet --trace '";
  int st1 = 0, st2 = 0;
  run_cli(base + a.string() + "'", st1);
  run_cli(base + b.string() + "'", st2);
  if (st1 != 0 || st2 != 0) {
    detail = "a run exited nonzero";
    return false;
  }
  std::string ta = read_file(a.string()), tb = read_file(b.string());
  fs::remove(a);
  fs::remove(b);
  if (ta.empty() || ta != tb) {
    detail = "traces differ between identical invocations";
    return false;
  }
  detail = fmt("two 30-day runs, %zu identical bytes", ta.size());
  return true;
}

// ---- 9: dry days trigger next-day obligations ------------------------------

bool check_norm_firing(std::string& detail) {
  ScenarioConfig c;
  c.noise_c1 = c.noise_c2 = c.noise_w = 0.0;
  c.trust_c1 = c.trust_c2 = c.trust_w = Opinion{1.0, 0.0, 0.0, 0.5};
  c.candidate_names = {"W1", "W2"};
  c.candidate_fractions = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  Scenario sc = make_scenario(
      c,
      "norm water_c1 weight 2.0: when not has_water(C1) then obligate give_water(C1)\n"
      "norm water_c2 weight 2.0: when not has_water(C2) then obligate give_water(C2)\n");

  int checks = 0;
  for (std::uint64_t seed = 7; seed < 12; ++seed) {
    Episode ep(sc, seed);
    std::vector<DayOutcome> days;
    for (int d = 0; d < 20; ++d) days.push_back(ep.advance());
    for (std::size_t d = 0; d + 1 < days.size(); ++d) {
      auto units = days[d].alloc.units();
      for (int i = 0; i < 2; ++i) {
        if (units[static_cast<std::size_t>(i)] != 0) continue;
        std::string action = "give_water(" + kCommunityIds[static_cast<std::size_t>(i)] + ")";
        if (!days[d + 1].decision.verdicts.obligated.count(action)) {
          detail = fmt("day %zu of seed %llu starved %s but no obligation fired the next day", d,
                       static_cast<unsigned long long>(seed),
                       kCommunityIds[static_cast<std::size_t>(i)].c_str());
          return false;
        }
        ++checks;
      }
    }
  }
  if (checks < 90) {
    detail = fmt("only %d dry-day checks ran; scenario too easy", checks);
    return false;
  }
  detail = fmt("%d dry days over 100 simulated days, every one answered by an obligation", checks);
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool (*fn)(std::string&);
  };
  const Criterion criteria[] = {
      {"exact posteriors minimize variational free energy", check_vfe},
      {"expected free energy matches brute-force enumeration", check_efe},
      {"opinion algebra stays on the simplex and obeys its laws", check_opinions},
      {"obligations imply permissions under randomized norm systems", check_deontic},
      {"crisp formula evaluation reproduces classical truth tables", check_truth_tables},
      {"both bundled configs pick their intended allocation", check_decision_directions},
      {"gradient training converges and improves the valley objective", check_learning},
      {"seeded runs are byte-identical", check_determinism},
      {"a community's dry day raises its obligation the next morning", check_norm_firing},
  };

  int failures = 0;
  int idx = 0;
  for (const Criterion& c : criteria) {
    ++idx;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("[%s] %d. %s — %s\n", ok ? "PASS" : "FAIL", idx, c.name, detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
