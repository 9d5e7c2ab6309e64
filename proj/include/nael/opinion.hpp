#pragma once

#include <cmath>
#include <string>

#include "nael/errors.hpp"

namespace nael {

// Binomial subjective-logic opinion. The triple (b, d, u) carries belief,
// disbelief and uncertainty mass and must sum to 1; a is the base rate used
// to project vacuous mass onto a probability.
struct Opinion {
  double b = 0.0;
  double d = 0.0;
  double u = 1.0;
  double a = 0.5;

  void validate() const {
    auto in01 = [](double v) { return v >= -1e-9 && v <= 1.0 + 1e-9; };
    if (!in01(b) || !in01(d) || !in01(u) || !in01(a))
      throw InvalidOpinion("opinion component outside [0,1]");
    if (std::abs(b + d + u - 1.0) > 1e-9)
      throw InvalidOpinion("opinion masses sum to " + std::to_string(b + d + u));
  }

  static Opinion vacuous(double base_rate = 0.5) { return Opinion{0.0, 0.0, 1.0, base_rate}; }
  static Opinion full_belief(double base_rate = 0.5) { return Opinion{1.0, 0.0, 0.0, base_rate}; }
  static Opinion full_disbelief(double base_rate = 0.5) { return Opinion{0.0, 1.0, 0.0, base_rate}; }
};

// Maps positive/negative evidence counts to an opinion. The prior weight is
// the evidence mass reserved for uncertainty (2 for binomial opinions).
inline Opinion from_evidence(double r, double s, double prior_weight = 2.0) {
  if (r < 0.0 || s < 0.0) throw NegativeEvidence("evidence counts must be nonnegative");
  double denom = r + s + prior_weight;
  return Opinion{r / denom, s / denom, prior_weight / denom, 0.5};
}

// projected probability: b + a*u
inline double expected_probability(const Opinion& x) { return x.b + x.a * x.u; }

// attenuation factor applied to a stakeholder's term: 1 - u
inline double confidence_weight(const Opinion& x) { return 1.0 - x.u; }

inline Opinion complement(const Opinion& x) { return Opinion{x.d, x.b, x.u, 1.0 - x.a}; }

// Binomial conjunction (product). Degenerate when both base rates are 1.
inline Opinion multiply(const Opinion& x, const Opinion& y) {
  double denom = 1.0 - x.a * y.a;
  if (denom <= 0.0) throw DegenerateBaseRate("conjunction with base rates both 1");
  Opinion r;
  r.b = x.b * y.b + ((1.0 - x.a) * y.a * x.b * y.u + x.a * (1.0 - y.a) * x.u * y.b) / denom;
  r.d = x.d + y.d - x.d * y.d;
  r.u = x.u * y.u + ((1.0 - y.a) * x.b * y.u + (1.0 - x.a) * x.u * y.b) / denom;
  r.a = x.a * y.a;
  // rounding can leave the triple a hair off; renormalize the dust
  double sum = r.b + r.d + r.u;
  r.b /= sum;
  r.d /= sum;
  r.u /= sum;
  return r;
}

// Binomial disjunction, defined as the De Morgan dual of the product.
inline Opinion comultiply(const Opinion& x, const Opinion& y) {
  try {
    return complement(multiply(complement(x), complement(y)));
  } catch (const DegenerateBaseRate&) {
    throw DegenerateBaseRate("disjunction with base rates both 0");
  }
}

// Trust discounting: the functional trust t in the source scales the source's
// opinion x; distrusted or uncertain trust mass becomes uncertainty.
inline Opinion discount(const Opinion& t, const Opinion& x) {
  return Opinion{t.b * x.b, t.b * x.d, t.d + t.u + t.b * x.u, x.a};
}

// Cumulative fusion of two independent reports. The dogmatic-dogmatic limit
// (both u = 0) is defined as the component-wise average to keep the operator
// total.
inline Opinion fuse(const Opinion& x, const Opinion& y) {
  double kappa = x.u + y.u - x.u * y.u;
  if (kappa <= 0.0) {
    return Opinion{(x.b + y.b) / 2.0, (x.d + y.d) / 2.0, 0.0, (x.a + y.a) / 2.0};
  }
  Opinion r;
  r.b = (x.b * y.u + y.b * x.u) / kappa;
  r.d = (x.d * y.u + y.d * x.u) / kappa;
  r.u = (x.u * y.u) / kappa;
  double adenom = x.u + y.u - 2.0 * x.u * y.u;
  r.a = adenom <= 0.0 ? (x.a + y.a) / 2.0
                      : (x.a * y.u + y.a * x.u - (x.a + y.a) * x.u * y.u) / adenom;
  return r;
}

}  // namespace nael
