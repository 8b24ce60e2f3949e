#include "gpsr/plan_parser.hpp"

#include <cctype>
#include <vector>

#include "gpsr/text.hpp"

namespace gpsr {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_quote(char c) { return c == '"' || c == '\''; }

struct Region {
  std::size_t begin;
  std::size_t end;  // one past the closing bracket
};

std::optional<Region> find_candidate(std::string_view raw) {
  // Inside brackets, a quote that starts an element opens a string whose
  // brackets do not count, as in the grammar below. Quotes in prose between
  // lists are ignored.
  std::vector<std::size_t> close(raw.size(), std::string_view::npos);
  std::vector<std::size_t> open;
  bool element_start = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (!open.empty() && element_start && is_quote(c)) {
      std::size_t j = i + 1;
      while (j < raw.size() && raw[j] != c) j += raw[j] == '\\' ? 2 : 1;
      if (j >= raw.size()) break;
      i = j;
      element_start = false;
      continue;
    }
    if (c == '[') {
      open.push_back(i);
      element_start = true;
    } else if (c == ']' && !open.empty()) {
      close[open.back()] = i;
      open.pop_back();
      element_start = false;
    } else if (c == ',') {
      element_start = true;
    } else if (!is_space(c)) {
      element_start = false;
    }
  }
  std::optional<Region> best;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '[' || close[i] == std::string_view::npos) continue;
    std::size_t j = i + 1;
    while (j < close[i] && is_space(raw[j])) ++j;
    if (raw[j] != '[' && j != close[i]) continue;
    Region r{i, close[i] + 1};
    if (!best || r.end - r.begin > best->end - best->begin) best = r;
  }
  return best;
}

struct RawStep {
  std::string name;
  std::string argument;
  CharSpan span;
};

// Recursive descent over one candidate region. Offsets reported in spans are
// relative to the full raw response.
class GrammarParser {
 public:
  GrammarParser(std::string_view text, std::size_t base) : s_(text), base_(base) {}

  std::variant<std::vector<RawStep>, ParseFailure> run() {
    std::vector<RawStep> steps;
    expect('[');
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return finish(std::move(steps));
    }
    while (!failed_) {
      steps.push_back(step());
      if (failed_) break;
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        break;
      }
      fail("expected ',' or ']' after a step");
    }
    return finish(std::move(steps));
  }

 private:
  std::variant<std::vector<RawStep>, ParseFailure> finish(std::vector<RawStep> steps) {
    if (!failed_) {
      skip_ws();
      if (pos_ != s_.size()) fail("trailing text after the plan list");
    }
    if (failed_) return std::move(*failure_);
    return steps;
  }

  RawStep step() {
    skip_ws();
    std::size_t start = pos_;
    if (peek() != '[') {
      fail("expected '[' to open an [action, argument] step");
      return {};
    }
    ++pos_;
    std::vector<std::string> elements;
    while (!failed_) {
      elements.push_back(element());
      if (failed_) break;
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      ++pos_;  // ']'
      break;
    }
    if (failed_) return {};
    CharSpan span{base_ + start, base_ + pos_};
    if (elements.size() != 2) {
      fail("step has " + std::to_string(elements.size()) + " elements, expected [action, argument]",
           span);
      return {};
    }
    if (elements[0].empty() || elements[0].find_first_of("[]") != std::string::npos) {
      fail("step has no valid action name", span);
      return {};
    }
    if (elements[1].empty()) {
      fail("step has an empty argument", span);
      return {};
    }
    return {elements[0], elements[1], span};
  }

  // One comma-separated element of a step; leaves pos_ on the ',' or ']'
  // that ends it.
  std::string element() {
    skip_ws();
    if (is_quote(peek())) {
      char q = s_[pos_++];
      std::string out;
      while (pos_ < s_.size() && s_[pos_] != q) {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        out.push_back(s_[pos_++]);
      }
      if (pos_ >= s_.size()) {
        fail("unterminated quoted string");
        return {};
      }
      ++pos_;
      skip_ws();
      if (peek() != ',' && peek() != ']') fail("unexpected text after a quoted string");
      return out;
    }
    std::size_t start = pos_;
    int depth = 0;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (depth == 0 && (c == ',' || c == ']')) break;
      if (c == '[') ++depth;
      if (c == ']') --depth;
      ++pos_;
    }
    if (pos_ >= s_.size()) {
      fail("step is not closed");
      return {};
    }
    return text::trim(s_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) {
      fail(std::string("expected '") + c + "'");
      return;
    }
    ++pos_;
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }

  void fail(std::string detail, std::optional<CharSpan> span = std::nullopt) {
    if (failed_) return;
    failed_ = true;
    if (!span) span = CharSpan{base_ + pos_, base_ + std::min(pos_ + 1, s_.size())};
    failure_ = ParseFailure{FailureKind::format_deviation, std::move(detail), span};
  }

  std::string_view s_;
  std::size_t base_;
  std::size_t pos_ = 0;
  bool failed_ = false;
  std::optional<ParseFailure> failure_;
};

bool needs_quotes(std::string_view arg) {
  int depth = 0;
  for (char c : arg) {
    if (is_quote(c)) return true;
    if (c == '[') ++depth;
    if (c == ']' && --depth < 0) return true;
    if (c == ',' && depth == 0) return true;
  }
  return depth != 0;
}

std::string render_argument(std::string_view arg) {
  if (!needs_quotes(arg)) return std::string(arg);
  std::string out = "\"";
  for (char c : arg) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::optional<std::string> extract_candidate(std::string_view raw) {
  auto r = find_candidate(raw);
  if (!r) return std::nullopt;
  return std::string(raw.substr(r->begin, r->end - r->begin));
}

ParseOutcome parse(std::string_view raw) {
  auto region = find_candidate(raw);
  if (!region) {
    return ParseFailure{FailureKind::format_deviation,
                        raw.empty() ? "empty response" : "no [[action, argument], ...] list found",
                        std::nullopt};
  }
  GrammarParser grammar(raw.substr(region->begin, region->end - region->begin), region->begin);
  auto result = grammar.run();
  if (auto* failure = std::get_if<ParseFailure>(&result)) return std::move(*failure);

  Plan plan;
  for (const auto& raw_step : std::get<std::vector<RawStep>>(result)) {
    auto sig = lookup(raw_step.name);
    if (!sig) {
      return ParseFailure{FailureKind::unknown_action,
                          "unknown action '" + raw_step.name + "' is not a primitive action",
                          raw_step.span};
    }
    plan.steps.emplace_back(sig->kind, raw_step.argument);
  }
  return plan;
}

std::string render(const Plan& plan) {
  std::string out = "[";
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (i > 0) out += ", ";
    out += "[";
    out += surface_name(plan.steps[i].kind);
    out += ", ";
    out += render_argument(plan.steps[i].argument);
    out += "]";
  }
  out += "]";
  return out;
}

}  // namespace gpsr
