#pragma once

// Edge-list text format:
//
//   # comment
//   p <n> <m>        optional header, before any edge line
//   <u> <v> <w>      one edge per line, 0-based vertex ids, decimal weight
//
// With a header, vertex ids are taken as given and must lie in [0, n); the
// number of edge lines must equal m. Without one, the distinct ids are
// relabelled to 0..n-1 in increasing order.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "treecount/error.hpp"
#include "treecount/graph.hpp"

namespace treecount {

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
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

template <class T>
std::optional<T> parse_number(std::string_view tok) {
  T value{};
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace detail

inline Graph load_graph(std::string_view text) {
  struct RawEdge {
    std::size_t u, v;
    double w;
  };
  std::optional<std::size_t> declared_n, declared_m;
  std::size_t header_line = 0;
  std::vector<RawEdge> raw;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;

    if (tokens.front() == "p") {
      if (declared_n || !raw.empty()) throw ParseError(line_no, "header must appear once, before any edge");
      if (tokens.size() != 3) throw ParseError(line_no, "header must be 'p <n> <m>'");
      declared_n = detail::parse_number<std::size_t>(tokens[1]);
      declared_m = detail::parse_number<std::size_t>(tokens[2]);
      if (!declared_n || !declared_m) throw ParseError(line_no, "header counts must be non-negative integers");
      header_line = line_no;
      continue;
    }

    if (tokens.size() != 3) throw ParseError(line_no, "expected 'u v w', got " + std::to_string(tokens.size()) + " fields");
    const auto u = detail::parse_number<std::size_t>(tokens[0]);
    const auto v = detail::parse_number<std::size_t>(tokens[1]);
    if (!u || !v) throw ParseError(line_no, "vertex ids must be non-negative integers");
    const auto w = detail::parse_number<double>(tokens[2]);
    if (!w || !std::isfinite(*w)) throw ParseError(line_no, "weight is not a finite decimal number");
    if (*w <= 0.0) throw ParseError(line_no, "non-positive weight");
    if (*w < kMinWeight || *w > kMaxWeight) throw ParseError(line_no, "weight outside supported range [1e-9, 1e9]");
    if (declared_n && (*u >= *declared_n || *v >= *declared_n)) {
      throw ParseError(line_no, "vertex count mismatch: id exceeds header n = " + std::to_string(*declared_n));
    }
    raw.push_back({*u, *v, *w});
  }

  if (declared_m && raw.size() != *declared_m) {
    throw ParseError(header_line, "edge count mismatch: header says " + std::to_string(*declared_m) + ", found " +
                                      std::to_string(raw.size()));
  }

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  if (declared_n) {
    for (const RawEdge& r : raw) edges.push_back({r.u, r.v, r.w});
    return Graph(*declared_n, std::move(edges));
  }

  std::vector<std::size_t> ids;
  ids.reserve(raw.size() * 2);
  for (const RawEdge& r : raw) {
    ids.push_back(r.u);
    ids.push_back(r.v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto label = [&](std::size_t x) {
    return static_cast<VertexId>(std::lower_bound(ids.begin(), ids.end(), x) - ids.begin());
  };
  for (const RawEdge& r : raw) edges.push_back({label(r.u), label(r.v), r.w});
  return Graph(ids.size(), std::move(edges));
}

inline Graph load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_graph(buf.str());
}

/// Shortest decimal text that reads back to exactly `x`.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

/// Header line followed by the edges in id order.
inline std::string serialize(const Graph& g) {
  std::string out = "p " + std::to_string(g.num_vertices()) + " " + std::to_string(g.num_edges()) + "\n";
  for (const Edge& e : g.edges()) {
    out += std::to_string(e.u);
    out += ' ';
    out += std::to_string(e.v);
    out += ' ';
    out += format_double(e.w);
    out += '\n';
  }
  return out;
}

}  // namespace treecount
