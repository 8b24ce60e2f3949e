#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "gpsr/primitives.hpp"

namespace gpsr {

// Half-open character range into the raw response.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const CharSpan&) const = default;
};

struct ParseFailure {
  FailureKind kind;
  std::string detail;
  std::optional<CharSpan> span;
};

class ParseOutcome {
 public:
  ParseOutcome(Plan plan) : value_(std::move(plan)) {}
  ParseOutcome(ParseFailure failure) : value_(std::move(failure)) {}

  bool parsed() const { return std::holds_alternative<Plan>(value_); }
  const Plan& plan() const { return std::get<Plan>(value_); }
  const ParseFailure& failure() const { return std::get<ParseFailure>(value_); }

 private:
  std::variant<Plan, ParseFailure> value_;
};

// Longest balanced bracket region that opens a list of lists ("[[", also
// "[ [") or is an empty list. Responses usually wrap the plan in prose.
std::optional<std::string> extract_candidate(std::string_view raw);

/// Strict grammar, applied to the extracted candidate:
///
///   Plan     := '[' ']' | '[' Step (',' Step)* ']'
///   Step     := '[' Action ',' Argument ']'
///   Argument := quoted string, or bare text with balanced brackets whose
///               top-level commas delimit
///
/// Whitespace between tokens is ignored and quotes are stripped. Grammar
/// failures always report format_deviation; only a grammatical plan whose
/// action names fall outside the registry reports unknown_action.
ParseOutcome parse(std::string_view raw);

// Canonical text: "[[move to, sink], [speak, hello]]". Arguments are quoted
// only when a bare rendering would not parse back to the same text.
std::string render(const Plan& plan);

}  // namespace gpsr
