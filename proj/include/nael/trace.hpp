#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "json.hpp"

#include "nael/global.hpp"
#include "nael/params.hpp"
#include "nael/sim.hpp"
#include "nael/valley.hpp"

namespace nael {

using json = nlohmann::json;

// trace floats carry 9 significant digits
inline double round9(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v == 0.0 ? 0.0 : v;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

// opinions are reported at 6 decimal places
inline double round6(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v == 0.0 ? 0.0 : v;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::strtod(buf, nullptr);
}

inline std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline json opinion_json(const Opinion& o) {
  return json{{"b", round6(o.b)}, {"d", round6(o.d)}, {"u", round6(o.u)}, {"a", round6(o.a)}};
}

inline json state_json(const ValleyState& s) {
  return json{{"day", s.day}, {"deficit", s.deficit}, {"species", s.species}};
}

inline json report_event(int episode, const Report& r) {
  json communities = json::object();
  for (const auto& [id, reading] : r.communities)
    communities[id] = json{
        {"reading", reading.deficit_reading}, {"pos", reading.pos}, {"neg", reading.neg}};
  json noise = json::object();
  for (const auto& [id, eps] : r.noise) noise[id] = round9(eps);
  return json{{"t", "report"},     {"ep", episode},         {"day", r.day},
              {"communities", communities}, {"species", r.species},
              {"low_pos", r.low_pos},       {"low_neg", r.low_neg},
              {"w_bin", r.w_bin},           {"noise", noise}};
}

// The decision event's total is written as the exact double sum of the
// rounded terms it sits next to, so a reader can reconstruct it bit-honestly.
inline json breakdown_json(const GlobalBreakdown& g) {
  json terms = json::object();
  double total = 0.0;
  for (const auto& [id, t] : g.stakeholder_terms) {
    double w = round9(t.weighted);
    terms[id] = json{{"raw", round9(t.raw)}, {"confidence", round9(t.confidence)}, {"weighted", w}};
    total += w;
  }
  double env = round9(g.env_term);
  double pen = round9(g.penalty);
  total += env + pen;
  return json{{"stakeholders", terms}, {"env_raw", round9(g.env_raw)}, {"env", env},
              {"penalty", pen},        {"total", total}};
}

inline json verdicts_json(const Verdicts& v) {
  json obligated = json::object();
  for (const auto& [action, w] : v.obligated) obligated[action] = round9(w);
  json forbidden = json::object();
  for (const auto& [action, op] : v.forbidden)
    forbidden[action] = json{{"E", round6(expected_probability(op))}, {"opinion", opinion_json(op)}};
  json fired = json::array();
  for (const FiredNorm& f : v.fired)
    fired.push_back(json{{"id", f.id},
                         {"modality", modality_name(f.modality)},
                         {"action", f.action},
                         {"weight", round9(f.weight)},
                         {"E", round6(expected_probability(f.opinion))}});
  json conflicts = json::array();
  for (const NormConflict& c : v.conflicts)
    conflicts.push_back(json{{"action", c.action},
                             {"obligation_weight", round9(c.obligation_weight)},
                             {"prohibition_weight", round9(c.prohibition_weight)},
                             {"prohibition_won", c.prohibition_won},
                             {"note", c.note}});
  return json{{"obligated", obligated},
              {"forbidden", forbidden},
              {"permitted", std::vector<std::string>(v.permitted.begin(), v.permitted.end())},
              {"fired", fired},
              {"conflicts", conflicts}};
}

inline json decision_event(int episode, const DecisionRecord& rec) {
  json candidates = json::object();
  for (const auto& [label, g] : rec.evaluated) candidates[label] = breakdown_json(g);
  json excluded = json::array();
  for (const auto& [label, p] : rec.excluded)
    excluded.push_back(json{{"action", label}, {"probability", round6(p)}});
  json penalties = json::object();
  for (const auto& [label, p] : rec.penalties) penalties[label] = round9(p);
  return json{{"t", "decision"},   {"ep", episode},       {"day", rec.timestep},
              {"chosen", rec.chosen}, {"tie", rec.tie_note}, {"candidates", candidates},
              {"verdicts", verdicts_json(rec.verdicts)},     {"excluded", excluded},
              {"penalties", penalties}};
}

inline json transition_event(int episode, long day, const ValleyState& before,
                             const ValleyState& after, const std::string& label,
                             const Allocation& alloc) {
  auto units = alloc.units();
  std::vector<double> frac;
  for (double f : alloc.frac) frac.push_back(round9(f));
  return json{{"t", "transition"},
              {"ep", episode},
              {"day", day},
              {"action", json{{"label", label}, {"frac", frac}, {"units", units},
                              {"budget", alloc.budget}}},
              {"before", state_json(before)},
              {"after", state_json(after)}};
}

inline json epoch_event(int epoch, double objective, const EthicalParams& p) {
  std::vector<double> values;
  for (double v : p.flatten()) values.push_back(round9(v));
  return json{{"t", "epoch"}, {"epoch", epoch}, {"objective", round9(objective)},
              {"params", values}};
}

inline std::string summary_header() {
  return "ep,day,chosen,total,c1,c2,w,env,penalty,fired";
}

inline std::string summary_row(int episode, const DayOutcome& out) {
  const GlobalBreakdown& g = out.decision.evaluated.at(out.decision.chosen);
  auto term = [&g](const std::string& id) -> double {
    auto it = g.stakeholder_terms.find(id);
    return it == g.stakeholder_terms.end() ? 0.0 : it->second.weighted;
  };
  std::string fired;
  for (const FiredNorm& f : out.decision.verdicts.fired) {
    if (!fired.empty()) fired += ';';
    fired += f.id;
  }
  std::string row = std::to_string(episode) + "," + std::to_string(out.decision.timestep) + "," +
                    out.decision.chosen + "," + g9(g.total) + "," + g9(term("C1")) + "," +
                    g9(term("C2")) + "," + g9(term(kSanctuaryId)) + "," + g9(g.env_term) + "," +
                    g9(g.penalty) + "," + fired;
  return row;
}

// Fixed-width table for `decide`; every float is printed to 6 decimals.
inline std::string format_decide_table(const DecisionRecord& rec, const SatisfiesFn& satisfies,
                                       bool explain) {
  std::vector<std::string> ids;
  if (!rec.evaluated.empty())
    for (const auto& [id, t] : rec.evaluated.begin()->second.stakeholder_terms) ids.push_back(id);

  std::size_t label_w = 9;  // fits "candidate"
  for (const auto& [label, g] : rec.evaluated) label_w = std::max(label_w, label.size());

  auto pad = [](std::string s, std::size_t w) {
    while (s.size() < w) s.push_back(' ');
    return s;
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%12.6f", v);
    return std::string(buf);
  };

  std::string out = pad("candidate", label_w);
  for (const std::string& id : ids) out += pad("", 12 - std::min<std::size_t>(12, id.size())) + id;
  out += "         env     penalty       total\n";
  for (const auto& [label, g] : rec.evaluated) {
    out += pad(label, label_w);
    for (const std::string& id : ids) out += num(g.stakeholder_terms.at(id).weighted);
    out += num(g.env_term) + num(g.penalty) + num(g.total);
    if (label == rec.chosen) out += "  <- chosen";
    out += "\n";
  }
  if (!rec.tie_note.empty()) out += "note: " + rec.tie_note + "\n";
  for (const auto& [label, p] : rec.excluded) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", p);
    out += "excluded: " + label + " (prohibited at p=" + buf + ")\n";
  }

  if (explain) {
    out += "\nfired norms:\n";
    if (rec.verdicts.fired.empty()) out += "  (none)\n";
    for (const FiredNorm& f : rec.verdicts.fired) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), " weight %.6f (E=%.6f)", f.weight,
                    expected_probability(f.opinion));
      out += "  " + std::string(modality_name(f.modality)) + " " + f.action + " [" + f.id + "]" +
             buf + "\n";
    }
    for (const NormConflict& c : rec.verdicts.conflicts)
      out += "conflict: " + c.action + " (" + c.note + ")\n";
    out += "\nneglected obligations:\n";
    bool any = false;
    for (const auto& [label, g] : rec.evaluated) {
      std::string neglected;
      for (const FiredNorm& f : rec.verdicts.fired) {
        if (f.modality != Modality::Obligation) continue;
        if (satisfies(label, f.action)) continue;
        if (!neglected.empty()) neglected += ", ";
        char buf[32];
        std::snprintf(buf, sizeof(buf), " (%.6f)", f.weight);
        neglected += f.id + std::string(buf);
      }
      if (!neglected.empty()) {
        out += "  " + label + ": " + neglected + "\n";
        any = true;
      }
    }
    if (!any) out += "  (none)\n";
  }
  out += "\nchosen: " + rec.chosen + "\n";
  return out;
}

}  // namespace nael
