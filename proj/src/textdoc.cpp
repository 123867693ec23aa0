#include "petbench/textdoc.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "petbench/errors.hpp"

namespace petbench {

double parse_double(std::string_view s, int line, std::string_view what) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError("non-numeric value '" + std::string(s) + "' for " + std::string(what), line);
  }
  return v;
}

long long parse_int(std::string_view s, int line, std::string_view what) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("non-integer value '" + std::string(s) + "' for " + std::string(what), line);
  }
  return v;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) throw Error("cannot serialize non-finite number");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

double TextRow::number(std::size_t i) const {
  if (i >= tokens.size()) throw ParseError("missing value for '" + key() + "'", line);
  return parse_double(tokens[i], line, key());
}

long long TextRow::integer(std::size_t i) const {
  if (i >= tokens.size()) throw ParseError("missing value for '" + key() + "'", line);
  return parse_int(tokens[i], line, key());
}

void TextRow::expect_arity(std::size_t n) const {
  if (tokens.size() != n) {
    throw ParseError("'" + key() + "' expects " + std::to_string(n - 1) + " values, got " +
                         std::to_string(tokens.size() - 1),
                     line);
  }
}

const TextRow* TextSection::find(std::string_view key) const {
  for (const auto& r : rows)
    if (r.key() == key) return &r;
  return nullptr;
}

double TextSection::number(std::string_view key) const {
  if (auto v = number_or(key)) return *v;
  throw ParseError("section [" + name + "] is missing key '" + std::string(key) + "'", line);
}

std::optional<double> TextSection::number_or(std::string_view key) const {
  const TextRow* r = find(key);
  if (!r) return std::nullopt;
  r->expect_arity(2);
  return r->number(1);
}

std::string TextSection::string(std::string_view key) const {
  if (auto v = string_or(key)) return *v;
  throw ParseError("section [" + name + "] is missing key '" + std::string(key) + "'", line);
}

std::optional<std::string> TextSection::string_or(std::string_view key) const {
  const TextRow* r = find(key);
  if (!r) return std::nullopt;
  r->expect_arity(2);
  return r->tokens[1];
}

const TextSection* TextDoc::find(std::string_view name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<const TextSection*> TextDoc::all(std::string_view name) const {
  std::vector<const TextSection*> out;
  for (const auto& s : sections)
    if (s.name == name) out.push_back(&s);
  return out;
}

namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

TextDoc parse_text_doc(std::string_view text) {
  TextDoc doc;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.front().starts_with('[')) {
      std::string joined;
      for (const auto& t : toks) joined += (joined.empty() ? "" : " ") + t;
      if (joined.back() != ']') throw ParseError("unterminated section header", line_no);
      auto inner = split_ws(std::string_view(joined).substr(1, joined.size() - 2));
      if (inner.empty()) throw ParseError("empty section header", line_no);
      TextSection sec;
      sec.name = inner.front();
      sec.args.assign(inner.begin() + 1, inner.end());
      sec.line = line_no;
      doc.sections.push_back(std::move(sec));
      continue;
    }
    if (doc.sections.empty()) doc.sections.push_back(TextSection{"", {}, 0, {}});
    doc.sections.back().rows.push_back(TextRow{std::move(toks), line_no});
  }
  return doc;
}

TextDoc read_text_doc(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text_doc(ss.str());
}

}  // namespace petbench
