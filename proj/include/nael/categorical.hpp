#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nael/errors.hpp"

namespace nael {

inline constexpr double kProbTolerance = 1e-9;
// probabilities below this are treated as exact zeros inside p*log(p) terms
inline constexpr double kProbFloor = 1e-12;

// Finite discrete distribution over an indexed support. Immutable after
// construction; construction validates normalization.
class CategoricalDist {
 public:
  // empty placeholder; every consumer validates before use
  CategoricalDist() = default;

  explicit CategoricalDist(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidDistribution("distribution over empty support");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0 && p <= 1.0 + kProbTolerance))
        throw InvalidDistribution("probability entry " + std::to_string(p) + " outside [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTolerance)
      throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
  }

  static CategoricalDist uniform(std::size_t n) {
    return CategoricalDist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static CategoricalDist delta(std::size_t n, std::size_t k) {
    std::vector<double> p(n, 0.0);
    p.at(k) = 1.0;
    return CategoricalDist(std::move(p));
  }

  // normalizes nonnegative weights; the weight mass must be positive
  static CategoricalDist normalized(std::vector<double> weights) {
    double sum = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw InvalidDistribution("negative weight");
      sum += w;
    }
    if (sum <= 0.0) throw InvalidDistribution("zero total weight");
    for (double& w : weights) w /= sum;
    return CategoricalDist(std::move(weights));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

  bool same_support(const CategoricalDist& other) const { return size() == other.size(); }

 private:
  std::vector<double> probs_;
};

// KL(p || q) in nats. Terms with p ~ 0 contribute nothing; p > 0 where q = 0
// violates absolute continuity.
inline double kl_divergence(const CategoricalDist& p, const CategoricalDist& q) {
  if (!p.same_support(q))
    throw SupportMismatch("KL over supports of size " + std::to_string(p.size()) + " and " +
                          std::to_string(q.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < kProbFloor) continue;
    if (q[i] < kProbFloor)
      throw AbsoluteContinuityViolation("p has mass at index " + std::to_string(i) +
                                        " where q is zero");
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum < 0.0 ? 0.0 : sum;  // clamp away rounding dust
}

// Shannon entropy in nats, 0*log(0) = 0.
inline double entropy(const CategoricalDist& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < kProbFloor) continue;
    h -= p[i] * std::log(p[i]);
  }
  return h < 0.0 ? 0.0 : h;
}

// softmax of a log-preference vector; always strictly positive
inline CategoricalDist softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw InvalidDistribution("softmax of empty vector");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> e(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(logits[i] - mx);
    sum += e[i];
  }
  for (double& v : e) v /= sum;
  return CategoricalDist(std::move(e));
}

}  // namespace nael
