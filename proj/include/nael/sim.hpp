#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "nael/global.hpp"
#include "nael/params.hpp"
#include "nael/rng.hpp"
#include "nael/valley.hpp"

namespace nael {

struct DayOutcome {
  Report report;
  SymbolicState symbolic;
  DecisionRecord decision;
  ValleyState before;
  ValleyState after;
  Allocation alloc;
};

// One seeded run of the perceive -> judge -> select -> act cycle. The report
// consumed on day t is the one sensed at the end of day t-1 (or the initial
// sensing for day 0), so a day's decision never sees its own outcome.
class Episode {
 public:
  Episode(const Scenario& sc, std::uint64_t seed, const EthicalParams* params = nullptr)
      : sc_(sc),
        rng_(seed),
        state_(initial_state(sc.config)),
        norms_(params ? with_weights(sc.norms, *params) : sc.norms) {
    if (params) params_ = *params;
    report_ = sense(state_, sc.config, rng_);
  }

  DayOutcome advance() {
    DayOutcome out;
    out.before = state_;
    out.report = report_;
    out.symbolic = reports_to_state(report_, sc_.trust);
    EthicalField field = build_field(sc_.config, state_, report_);
    if (params_) apply_params(field, *params_);
    out.decision =
        select_action(field, sc_.candidate_set, norms_, out.symbolic, sc_.config.tau,
                      sc_.config.theta);
    out.decision.timestep = state_.day;
    out.alloc = sc_.allocation(out.decision.chosen);
    auto [next, rep] = step(state_, out.alloc, sc_.config, rng_);
    state_ = std::move(next);
    report_ = std::move(rep);
    out.after = state_;
    return out;
  }

  const ValleyState& state() const { return state_; }
  const Report& pending_report() const { return report_; }

 private:
  const Scenario& sc_;
  Rng rng_;
  ValleyState state_;
  Report report_;
  NormSet norms_;
  std::optional<EthicalParams> params_;
};

}  // namespace nael
