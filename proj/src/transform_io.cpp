#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "densereg/core.hpp"

namespace densereg {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  return v;
}

std::vector<std::string_view> non_empty_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!split_ws(line).empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

Transform parse_block(std::span<const std::string_view> lines, std::size_t first_line) {
  auto kind_tok = split_ws(lines[0]);
  if (kind_tok.size() != 1) throw ParseError("expected transform kind", first_line);
  Transform t;
  try {
    t.kind = parse_transform_kind(kind_tok[0]);
  } catch (const FormatError& e) {
    throw ParseError(e.what(), first_line);
  }
  for (auto tok : split_ws(lines[1])) t.params.push_back(parse_double(tok, first_line + 1));
  if (t.params.size() != param_count(t.kind))
    throw ParseError("wrong parameter count for " + std::string(to_string(t.kind)), first_line + 1);
  auto scale = split_ws(lines[2]);
  if (scale.size() != 5 || scale[0] != "scale")
    throw ParseError("expected 'scale <dw> <dh> <rw> <rh>'", first_line + 2);
  t.domain = {parse_double(scale[1], first_line + 2), parse_double(scale[2], first_line + 2)};
  t.range = {parse_double(scale[3], first_line + 2), parse_double(scale[4], first_line + 2)};
  return t;
}

}  // namespace

std::string format_transform(const Transform& t) {
  std::string out(to_string(t.kind));
  out += '\n';
  for (std::size_t i = 0; i < t.params.size(); ++i) {
    if (i) out += ' ';
    out += fmt_double(t.params[i]);
  }
  out += "\nscale " + fmt_double(t.domain.width) + ' ' + fmt_double(t.domain.height) + ' ' +
         fmt_double(t.range.width) + ' ' + fmt_double(t.range.height) + '\n';
  return out;
}

Transform parse_transform(std::string_view text) {
  auto chain = parse_chain(text);
  if (chain.stages().size() != 1) throw ParseError("expected exactly one transform block", 1);
  return chain.stages().front();
}

std::string format_chain(const TransformChain& chain) {
  std::string out;
  for (const auto& t : chain.stages()) out += format_transform(t);
  return out;
}

TransformChain parse_chain(std::string_view text) {
  auto lines = non_empty_lines(text);
  if (lines.empty() || lines.size() % 3 != 0)
    throw ParseError("transform file must hold blocks of 3 lines", lines.size() + 1);
  std::vector<Transform> stages;
  for (std::size_t i = 0; i < lines.size(); i += 3)
    stages.push_back(parse_block(std::span(lines).subspan(i, 3), i + 1));
  return TransformChain(std::move(stages));
}

void write_chain_file(const TransformChain& chain, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << format_chain(chain);
  if (!os) throw IoError("failed writing '" + path + "'");
}

TransformChain read_chain_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_chain(ss.str());
}

}  // namespace densereg
