#pragma once

// Line-oriented sectioned text shared by scenario, profile and experiment
// config files:
//
//   # comment
//   [section arg1 arg2]
//   key value value ...
//
// Tokens are whitespace separated. Rows before the first section header
// belong to an unnamed section.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace petbench {

struct TextRow {
  std::vector<std::string> tokens;
  int line = 0;

  const std::string& key() const { return tokens.front(); }
  double number(std::size_t i) const;
  long long integer(std::size_t i) const;
  void expect_arity(std::size_t n) const;
};

struct TextSection {
  std::string name;
  std::vector<std::string> args;
  int line = 0;
  std::vector<TextRow> rows;

  const TextRow* find(std::string_view key) const;
  /// Single-valued `key value` lookup; throws ParseError naming the key.
  double number(std::string_view key) const;
  std::optional<double> number_or(std::string_view key) const;
  std::string string(std::string_view key) const;
  std::optional<std::string> string_or(std::string_view key) const;
};

struct TextDoc {
  std::vector<TextSection> sections;

  const TextSection* find(std::string_view name) const;
  std::vector<const TextSection*> all(std::string_view name) const;
};

TextDoc parse_text_doc(std::string_view text);
TextDoc read_text_doc(const std::filesystem::path& path);

double parse_double(std::string_view s, int line, std::string_view what);
long long parse_int(std::string_view s, int line, std::string_view what);

/// Fixed-point formatting with at most six fractional digits, no exponent,
/// trailing zeros trimmed, negative zero printed as "0".
std::string format_number(double v);

}  // namespace petbench
