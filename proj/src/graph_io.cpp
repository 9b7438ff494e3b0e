#include "gdenet/csv.hpp"
#include "gdenet/graph.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace gdenet {

namespace csv {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  s = trim(s);
  std::string tmp(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + tmp + "'");
  }
  if (used != tmp.size()) throw std::invalid_argument("not a number: '" + tmp + "'");
  return v;
}

long long parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

void write_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace csv

Graph read_edge_list_csv(std::istream& in, int n_hint) {
  std::string line;
  std::size_t line_no = 0;
  int declared_n = -1;
  bool header_seen = false;
  int max_index = -1;
  std::vector<Edge> edges;
  std::vector<std::size_t> edge_lines;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = csv::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      auto body = csv::trim(text.substr(1));
      if (body.starts_with("nodes:")) {
        try {
          declared_n = static_cast<int>(csv::parse_int(body.substr(6)));
        } catch (const std::invalid_argument& e) {
          throw ParseError(e.what(), line_no);
        }
      }
      continue;
    }
    auto fields = csv::split(text);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 2 || fields[0] != "src" || fields[1] != "dst" ||
          (fields.size() == 3 && fields[2] != "weight") || fields.size() > 3) {
        throw ParseError("expected header 'src,dst[,weight]'", line_no);
      }
      continue;
    }
    if (fields.size() < 2 || fields.size() > 3) throw ParseError("expected 2 or 3 fields", line_no);
    Edge e;
    try {
      e.u = static_cast<int>(csv::parse_int(fields[0]));
      e.v = static_cast<int>(csv::parse_int(fields[1]));
      if (fields.size() == 3 && !fields[2].empty()) e.weight = csv::parse_double(fields[2]);
    } catch (const std::invalid_argument& err) {
      throw ParseError(err.what(), line_no);
    }
    if (e.u < 0 || e.v < 0) throw ParseError("negative node index", line_no);
    max_index = std::max({max_index, e.u, e.v});
    edges.push_back(e);
    edge_lines.push_back(line_no);
  }
  if (!header_seen) throw ParseError("missing header", line_no);
  int n = declared_n >= 0 ? declared_n : std::max(max_index + 1, n_hint);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.u >= n || e.v >= n) throw ParseError("node index out of range for " + std::to_string(n) + " nodes", edge_lines[i]);
    if (e.u == e.v) throw ParseError("self-loop", edge_lines[i]);
    if (!(e.weight > 0.0)) throw ParseError("weight must be positive", edge_lines[i]);
  }
  return Graph::from_edge_list(edges, n);
}

Graph read_edge_list_csv(const std::string& path, int n_hint) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_edge_list_csv(in, n_hint);
}

void write_edge_list_csv(std::ostream& out, const Graph& g) {
  out << "# nodes: " << g.num_nodes() << "\n";
  out << "src,dst,weight\n";
  for (const auto& e : g.edges()) out << e.u << ',' << e.v << ',' << csv::format_double(e.weight) << '\n';
}

}  // namespace gdenet
