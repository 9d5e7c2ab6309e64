#pragma once

#include <stdexcept>
#include <string>

namespace nael {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidDistribution : Error { using Error::Error; };
struct SupportMismatch : Error { using Error::Error; };
struct AbsoluteContinuityViolation : Error { using Error::Error; };
struct ZeroEvidence : Error { using Error::Error; };
struct UnknownAction : Error { using Error::Error; };
struct UnknownState : Error { using Error::Error; };
struct UnknownObservation : Error { using Error::Error; };
struct NegativeEvidence : Error { using Error::Error; };
struct DegenerateBaseRate : Error { using Error::Error; };
struct InvalidOpinion : Error { using Error::Error; };
struct DuplicateNormId : Error { using Error::Error; };
struct UnknownActionLabel : Error { using Error::Error; };
struct UnknownAtom : Error { using Error::Error; };
struct UnknownStakeholder : Error { using Error::Error; };
struct EmptyCandidateSet : Error { using Error::Error; };
struct NoPermittedAction : Error { using Error::Error; };
struct UnmappedAction : Error { using Error::Error; };
struct NonFiniteObjective : Error { using Error::Error; };
struct InvalidGridStep : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Parse failure with source position and the token set that would have been accepted.
struct ParseError : Error {
  int line = 0;
  int column = 0;
  std::string expected;

  ParseError(int l, int c, const std::string& expected_tokens, const std::string& found)
      : Error(std::to_string(l) + ":" + std::to_string(c) + ": expected " + expected_tokens +
              ", found " + found),
        line(l),
        column(c),
        expected(expected_tokens) {}
};

}  // namespace nael
