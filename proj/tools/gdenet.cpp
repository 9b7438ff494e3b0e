// gdenet: graph generation, PDE solves, moment features, curvature labels,
// MLP training/evaluation and proposition checks from the command line.
//
// Exit codes: 0 success, 1 proposition failure, 2 usage or input error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gdenet/chebyshev.hpp"
#include "gdenet/csv.hpp"
#include "gdenet/curvature.hpp"
#include "gdenet/dynamics.hpp"
#include "gdenet/experiment.hpp"
#include "gdenet/features.hpp"
#include "gdenet/graph.hpp"
#include "gdenet/mlp.hpp"
#include "gdenet/random.hpp"
#include "gdenet/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gdenet;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr int kOk = 0, kFailed = 1, kUsage = 2;

// ---------------------------------------------------------------- parsing

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : csv::split(s, ',')) {
    auto t = csv::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    return csv::parse_double(s);
  } catch (const std::exception&) {
    throw UsageError("invalid number '" + s + "' in " + what);
  }
}

long long to_int(const std::string& s, const std::string& what) {
  try {
    return csv::parse_int(s);
  } catch (const std::exception&) {
    throw UsageError("invalid integer '" + s + "' in " + what);
  }
}

/// "a,b,c" or an inclusive range "start:stop:step".
std::vector<double> parse_times(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    auto parts = csv::split(s, ':');
    if (parts.size() != 3) throw UsageError("time range must be start:stop:step");
    double lo = to_double(std::string(parts[0]), "--times"), hi = to_double(std::string(parts[1]), "--times");
    double step = to_double(std::string(parts[2]), "--times");
    if (!(step > 0.0) || hi < lo) throw UsageError("time range needs step > 0 and stop >= start");
    auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long j = 0; j <= count; ++j) out.push_back(lo + static_cast<double>(j) * step);
  } else {
    for (const auto& p : split_list(s)) out.push_back(to_double(p, "--times"));
  }
  try {
    check_time_grid(out);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--times: ") + e.what());
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const auto& p : split_list(s)) out.push_back(static_cast<int>(to_int(p, what)));
  return out;
}

std::pair<double, double> parse_range(const std::string& s, const std::string& what) {
  auto parts = split_list(s);
  if (parts.size() != 2) throw UsageError(what + " must be 'lo,hi'");
  return {to_double(parts[0], what), to_double(parts[1], what)};
}

// ---------------------------------------------------------------- files

Graph load_graph(const std::string& path) {
  try {
    return read_edge_list_csv(path);
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const GraphError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return in;
}

/// CSV with a header row; the first column is an identifier, the remaining
/// columns are numbers.
struct Table {
  std::vector<std::string> columns;  // excluding the id column
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
  auto in = open_input(path);
  Table t;
  std::string line;
  int line_no = 0;
  bool header = false;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty() || line[0] == '#') continue;
    auto cells = csv::split(line);
    if (!header) {
      if (cells.size() < 2) throw UsageError(path + ":" + std::to_string(line_no) + ": need an id and a value column");
      for (std::size_t c = 1; c < cells.size(); ++c) t.columns.emplace_back(csv::trim(cells[c]));
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size() + 1)
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.columns.size() + 1) +
                       " fields");
    std::string id(csv::trim(cells[0]));
    if (!seen.insert(id).second) throw UsageError(path + ":" + std::to_string(line_no) + ": duplicate id '" + id + "'");
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      try {
        row.push_back(csv::parse_double(csv::trim(cells[c])));
      } catch (const std::exception&) {
        throw UsageError(path + ":" + std::to_string(line_no) + ": invalid number '" + std::string(cells[c]) + "'");
      }
    }
    t.ids.push_back(id);
    t.rows.push_back(std::move(row));
  }
  if (!header) throw UsageError(path + ": empty file");
  return t;
}

void write_table(const std::string& path, const std::vector<std::string>& columns, const std::vector<std::string>& ids,
                 const Eigen::MatrixXd& values, const std::string& id_name = "id") {
  csv::write_atomic(path, [&](std::ostream& out) {
    out << id_name;
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      out << ids[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < values.cols(); ++j) out << ',' << csv::format_double(values(i, j));
      out << '\n';
    }
  });
}

/// Signal file: `node,<channel>...`, one row per node 0..n-1.
std::vector<Signal> load_signals(const std::string& path, int n) {
  Table t = read_table(path);
  if (static_cast<int>(t.ids.size()) != n)
    throw UsageError(path + ": signal has " + std::to_string(t.ids.size()) + " rows but the graph has " +
                     std::to_string(n) + " nodes");
  std::vector<Signal> channels(t.columns.size(), Signal::Zero(n));
  std::vector<char> filled(static_cast<std::size_t>(n), 0);
  for (std::size_t r = 0; r < t.ids.size(); ++r) {
    long long v = to_int(t.ids[r], path);
    if (v < 0 || v >= n || filled[v]) throw UsageError(path + ": bad or repeated node id " + t.ids[r]);
    filled[v] = 1;
    for (std::size_t c = 0; c < channels.size(); ++c) channels[c][v] = t.rows[r][c];
  }
  return channels;
}

void write_json(const std::string& path, const json& j) {
  csv::write_atomic(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

json sidecar(const std::string& command, const json& config) {
  return json{{"command", command}, {"config", config}};
}

struct ManifestEntry {
  std::string file;
  GraphFamily family;
  int n;
  double parameter;
  std::uint64_t seed;
  std::string id() const { return fs::path(file).stem().string(); }
};

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  int line_no = 0;
  std::vector<ManifestEntry> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = csv::split(line);
    if (line_no == 1) {
      if (line != "file,family,n,p_or_blocks,seed") throw UsageError(path + ":1: unexpected manifest header");
      continue;
    }
    if (cells.size() != 5) throw UsageError(path + ":" + std::to_string(line_no) + ": expected 5 fields");
    try {
      out.push_back({std::string(cells[0]), parse_family(std::string(cells[1])),
                     static_cast<int>(csv::parse_int(cells[2])), csv::parse_double(cells[3]),
                     static_cast<std::uint64_t>(std::stoull(std::string(cells[4])))});
    } catch (const std::exception& e) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------- shared option groups

struct PdeOptions {
  std::string pde = "heat";
  std::string laplacian = "sym";
  std::string solver = "chebyshev";
  double tolerance = 1e-8;

  void add(CLI::App* cmd) {
    cmd->add_option("--pde", pde, "heat | wave")->check(CLI::IsMember({"heat", "wave"}))->capture_default_str();
    cmd->add_option("--laplacian", laplacian, "comb | sym | rw")
        ->check(CLI::IsMember({"comb", "sym", "rw", "combinatorial", "symmetric_normalized", "random_walk"}))
        ->capture_default_str();
    cmd->add_option("--solver", solver, "exact | chebyshev")
        ->check(CLI::IsMember({"exact", "chebyshev"}))
        ->capture_default_str();
    cmd->add_option("--tolerance", tolerance, "Chebyshev max-abs target")->capture_default_str();
  }
  json to_json() const {
    return {{"pde", pde}, {"laplacian", laplacian}, {"solver", solver}, {"tolerance", tolerance}};
  }
};

std::string column_name(const NodeFeatureTensor& f, int t, int k, int m) {
  return "t" + std::to_string(t + 1) + "_k" + std::to_string(f.first_hop + k) + "_m" + std::to_string(m + 1);
}

std::vector<std::string> graph_columns(const GraphFeatureVector& g, const std::string& prefix) {
  std::vector<std::string> out;
  for (int t = 0; t < g.times; ++t)
    for (int s = 0; s < g.graph_moments; ++s)
      for (int k = 0; k < g.hops; ++k)
        for (int m = 0; m < g.moments; ++m)
          out.push_back(prefix + "t" + std::to_string(t + 1) + "_s" + std::to_string(s + 1) + "_k" +
                        std::to_string(g.first_hop + k) + "_m" + std::to_string(m + 1));
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateCmd {
  std::string family = "er";
  int n = 100;
  std::optional<double> p;
  std::string p_range = "0.01,0.1";
  std::optional<int> blocks;
  std::string blocks_range = "5,25";
  double p_in = 0.5, p_out = 0.05;
  int count = 1;
  std::uint64_t seed = 0;
  std::string out = ".";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("generate", "Generate random graphs and a manifest");
    cmd->add_option("--family", family, "er | sbm | cycle")->check(CLI::IsMember({"er", "sbm", "cycle"}))->capture_default_str();
    cmd->add_option("--n", n, "Node count")->capture_default_str();
    cmd->add_option("--p", p, "Fixed ER edge probability");
    cmd->add_option("--p-range", p_range, "ER probability range lo,hi (uniform)")->capture_default_str();
    cmd->add_option("--blocks", blocks, "Fixed SBM block count");
    cmd->add_option("--blocks-range", blocks_range, "SBM block range lo,hi (uniform integers)")->capture_default_str();
    cmd->add_option("--p-in", p_in, "SBM within-block probability")->capture_default_str();
    cmd->add_option("--p-out", p_out, "SBM between-block probability")->capture_default_str();
    cmd->add_option("--count", count, "Number of graphs")->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", out, "Output directory")->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() {
    DatasetSpec spec;
    spec.family = parse_family(family);
    spec.n = n;
    spec.count = count;
    spec.seed = seed;
    spec.p_in = p_in;
    spec.p_out = p_out;
    if (p) {
      spec.p_min = spec.p_max = *p;
    } else {
      std::tie(spec.p_min, spec.p_max) = parse_range(p_range, "--p-range");
    }
    if (blocks) {
      spec.blocks_min = spec.blocks_max = *blocks;
    } else {
      auto [lo, hi] = parse_range(blocks_range, "--blocks-range");
      spec.blocks_min = static_cast<int>(lo);
      spec.blocks_max = static_cast<int>(hi);
    }
    if (count < 1) throw UsageError("--count must be positive");
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    auto samples = generate_dataset(spec);

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw UsageError("cannot create output directory '" + out + "'");
    for (const auto& s : samples)
      csv::write_atomic((fs::path(out) / (s.id + ".csv")).string(),
                        [&](std::ostream& o) { write_edge_list_csv(o, s.graph); });
    csv::write_atomic((fs::path(out) / "manifest.csv").string(),
                      [&](std::ostream& o) { write_manifest_csv(o, samples); });
    json cfg{{"family", family}, {"n", n},         {"count", count},       {"seed", seed},
             {"p_min", spec.p_min}, {"p_max", spec.p_max}, {"blocks_min", spec.blocks_min},
             {"blocks_max", spec.blocks_max}, {"p_in", p_in}, {"p_out", p_out}};
    write_json((fs::path(out) / "generate.json").string(), sidecar("generate", cfg));
  }
};

// ---------------------------------------------------------------- solve

struct SolveCmd {
  std::string graph;
  PdeOptions pde;
  std::string times = "0:20:1";
  std::string sources;
  std::string signal;
  std::string velocity = "zero";
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("solve", "Solve the heat or wave equation on a graph");
    cmd->add_option("--graph", graph, "Edge-list CSV")->required();
    pde.add(cmd);
    cmd->add_option("--times", times, "Comma list or start:stop:step")->capture_default_str();
    cmd->add_option("--source", sources, "Comma list of Dirac source nodes (default: all)");
    cmd->add_option("--signal", signal, "Initial condition CSV node,value[,...]; each column is a source");
    cmd->add_option("--velocity", velocity, "Wave initial velocity: zero | equal_x")
        ->check(CLI::IsMember({"zero", "equal_x"}))
        ->capture_default_str();
    cmd->add_option("--out", out, "Solution CSV")->required();
    cmd->callback([this] { run(); });
  }

  void run() {
    Graph g = load_graph(graph);
    const int n = g.num_nodes();
    auto grid = parse_times(times);
    auto kind = parse_laplacian_kind(pde.laplacian);
    auto which = parse_pde(pde.pde);

    std::vector<Signal> initial;
    std::vector<int> labels;
    if (!signal.empty()) {
      if (!sources.empty()) throw UsageError("--signal and --source are exclusive");
      initial = load_signals(signal, n);
      for (std::size_t c = 0; c < initial.size(); ++c) labels.push_back(static_cast<int>(c));
    } else {
      labels = sources.empty() ? std::vector<int>{} : parse_int_list(sources, "--source");
      if (sources.empty())
        for (int v = 0; v < n; ++v) labels.push_back(v);
      for (int v : labels) {
        if (v < 0 || v >= n) throw UsageError("source node " + std::to_string(v) + " is out of range");
        initial.push_back(Signal::Unit(n, v));
      }
    }
    std::vector<Signal> vel;
    for (const auto& x : initial) vel.push_back(velocity == "equal_x" ? x : Signal::Zero(n));

    SolutionTensor sol;
    if (pde.solver == "exact") {
      if (n > kDenseCap) throw UsageError("graph exceeds the dense eigensolver cap; use --solver chebyshev");
      auto dec = eigendecompose(g, kind);
      sol = which == Pde::heat ? heat_solution_exact(dec, initial, grid)
                               : wave_solution_exact(dec, initial, vel, grid);
    } else {
      SolverConfig cfg;
      cfg.tolerance = pde.tolerance;
      sol = which == Pde::heat ? heat_solution_cheb(g, kind, initial, grid, cfg)
                               : wave_solution_cheb(g, kind, initial, vel, grid, cfg);
      if (!sol.tolerance_met) std::cerr << "warning: Chebyshev order cap reached before the tolerance\n";
    }
    sol.sources = labels;
    csv::write_atomic(out, [&](std::ostream& o) { write_solution_csv(o, sol); });
    json cfg = pde.to_json();
    cfg["graph"] = graph;
    cfg["times"] = grid;
    cfg["sources"] = labels;
    cfg["signal"] = signal;
    cfg["velocity"] = velocity;
    cfg["tolerance_met"] = sol.tolerance_met;
    write_json(out + ".json", sidecar("solve", cfg));
  }
};

// ---------------------------------------------------------------- features

struct FeaturesCmd {
  std::string graph, manifest, signal;
  PdeOptions pde;
  int M = 4, K = 4, T = 20, S = 4;
  double t_max = 20.0;
  bool include_hop1 = false;
  std::string velocity = "zero";
  std::string level = "graph";
  std::string format = "long";
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("features", "Extract node- or graph-level moment features");
    auto* g = cmd->add_option("--graph", graph, "Edge-list CSV");
    auto* m = cmd->add_option("--manifest", manifest, "Manifest CSV; writes one graph-level row per graph");
    g->excludes(m);
    cmd->add_option("--signal", signal, "Input signal CSV node,value[,...]; each column is a channel");
    pde.add(cmd);
    cmd->add_option("--M", M, "Largest node moment")->capture_default_str();
    cmd->add_option("--K", K, "Largest hop radius")->capture_default_str();
    cmd->add_option("--T", T, "Number of time steps")->capture_default_str();
    cmd->add_option("--S", S, "Largest graph moment")->capture_default_str();
    cmd->add_option("--t-max", t_max, "Last time of the grid j * t_max / T")->capture_default_str();
    cmd->add_flag("--include-hop1", include_hop1, "Also use the 1-hop ball");
    cmd->add_option("--velocity", velocity, "Wave initial velocity: zero | equal_x")
        ->check(CLI::IsMember({"zero", "equal_x"}))
        ->capture_default_str();
    cmd->add_option("--level", level, "node | graph")->check(CLI::IsMember({"node", "graph"}))->capture_default_str();
    cmd->add_option("--format", format, "long (one value per row) | wide (one row per id)")
        ->check(CLI::IsMember({"long", "wide"}))
        ->capture_default_str();
    cmd->add_option("--out", out, "Feature CSV")->required();
    cmd->callback([this] { run(); });
  }

  FeatureConfig config() const {
    FeatureConfig cfg;
    cfg.pde = parse_pde(pde.pde);
    cfg.laplacian = parse_laplacian_kind(pde.laplacian);
    cfg.solver = pde.solver == "exact" ? SolverKind::exact : SolverKind::chebyshev;
    cfg.chebyshev.tolerance = pde.tolerance;
    cfg.max_moment = M;
    cfg.max_hop = K;
    cfg.time_steps = T;
    cfg.t_max = t_max;
    cfg.max_graph_moment = S;
    cfg.include_hop1 = include_hop1;
    cfg.velocity = velocity == "equal_x" ? VelocityRule::equal_x : VelocityRule::zero;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }

  void run() {
    if (graph.empty() == manifest.empty()) throw UsageError("give exactly one of --graph or --manifest");
    FeatureConfig cfg = config();
    bool tolerance_met = true;
    if (!manifest.empty()) {
      if (level != "graph") throw UsageError("--manifest produces graph-level features only");
      if (!signal.empty()) throw UsageError("--signal needs a single --graph");
      auto entries = read_manifest(manifest);
      if (entries.empty()) throw UsageError(manifest + ": no graphs listed");
      auto base = fs::path(manifest).parent_path();
      std::vector<std::string> ids, columns;
      Eigen::MatrixXd X;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        Graph g = load_graph((base / entries[i].file).string());
        auto f = extract_features(g, std::nullopt, std::nullopt, cfg);
        tolerance_met = tolerance_met && f.tolerance_met;
        if (i == 0) {
          columns = graph_columns(f.graph, "");
          X.resize(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(columns.size()));
        }
        for (std::size_t j = 0; j < f.graph.values.size(); ++j)
          X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f.graph.values[j];
        ids.push_back(entries[i].id());
      }
      write_table(out, columns, ids, X);
    } else {
      Graph g = load_graph(graph);
      std::vector<FeatureResult> results;
      if (signal.empty()) {
        results.push_back(extract_features(g, std::nullopt, std::nullopt, cfg));
      } else {
        results = extract_features_channels(g, load_signals(signal, g.num_nodes()), cfg);
      }
      for (const auto& r : results) tolerance_met = tolerance_met && r.tolerance_met;
      write_single(g, results);
    }
    if (!tolerance_met) std::cerr << "warning: Chebyshev order cap reached before the tolerance\n";
    json c = cfg.to_json();
    c["graph"] = graph;
    c["manifest"] = manifest;
    c["signal"] = signal;
    c["level"] = level;
    c["format"] = format;
    c["tolerance_met"] = tolerance_met;
    write_json(out + ".json", sidecar("features", c));
  }

  void write_single(const Graph& g, const std::vector<FeatureResult>& results) const {
    const bool multi = results.size() > 1;
    if (format == "long") {
      if (level == "node") {
        std::vector<NodeFeatureTensor> ch;
        for (const auto& r : results) ch.push_back(r.nodes);
        csv::write_atomic(out, [&](std::ostream& o) { write_node_features_csv(o, ch); });
      } else {
        std::vector<GraphFeatureVector> ch;
        for (const auto& r : results) ch.push_back(r.graph);
        csv::write_atomic(out, [&](std::ostream& o) { write_graph_features_csv(o, ch); });
      }
      return;
    }
    std::vector<std::string> columns, ids;
    Eigen::MatrixXd X;
    if (level == "node") {
      const auto& f0 = results.front().nodes;
      const auto width = static_cast<Eigen::Index>(f0.row_width());
      X.resize(g.num_nodes(), width * static_cast<Eigen::Index>(results.size()));
      for (std::size_t c = 0; c < results.size(); ++c) {
        std::string prefix = multi ? "c" + std::to_string(c) + "_" : "";
        for (int t = 0; t < f0.times; ++t)
          for (int k = 0; k < f0.hops; ++k)
            for (int m = 0; m < f0.moments; ++m) columns.push_back(prefix + column_name(f0, t, k, m));
        X.middleCols(static_cast<Eigen::Index>(c) * width, width) = node_feature_matrix(results[c].nodes);
      }
      for (int v = 0; v < g.num_nodes(); ++v) ids.push_back(std::to_string(v));
      write_table(out, columns, ids, X, "node");
    } else {
      const auto width = static_cast<Eigen::Index>(results.front().graph.values.size());
      X.resize(1, width * static_cast<Eigen::Index>(results.size()));
      for (std::size_t c = 0; c < results.size(); ++c) {
        auto names = graph_columns(results[c].graph, multi ? "c" + std::to_string(c) + "_" : "");
        columns.insert(columns.end(), names.begin(), names.end());
        for (Eigen::Index j = 0; j < width; ++j) X(0, static_cast<Eigen::Index>(c) * width + j) = results[c].graph.values[j];
      }
      ids.push_back(fs::path(graph).stem().string());
      write_table(out, columns, ids, X);
    }
  }
};

// ---------------------------------------------------------------- labels

struct LabelsCmd {
  std::string graph, manifest;
  std::string level = "node";
  double alpha = 0.0;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("labels", "Curvature labels of a graph, or generating parameters of a manifest");
    auto* g = cmd->add_option("--graph", graph, "Edge-list CSV");
    auto* m = cmd->add_option("--manifest", manifest, "Manifest CSV; writes id,label from p_or_blocks");
    g->excludes(m);
    cmd->add_option("--level", level, "node | edge")->check(CLI::IsMember({"node", "edge"}))->capture_default_str();
    cmd->add_option("--alpha", alpha, "Mass kept at the node in the neighbor measure")->capture_default_str();
    cmd->add_option("--out", out, "Labels CSV")->required();
    cmd->callback([this] { run(); });
  }

  void run() {
    if (graph.empty() == manifest.empty()) throw UsageError("give exactly one of --graph or --manifest");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in [0, 1)");
    json cfg{{"graph", graph}, {"manifest", manifest}, {"level", level}, {"alpha", alpha}};
    if (!manifest.empty()) {
      auto entries = read_manifest(manifest);
      csv::write_atomic(out, [&](std::ostream& o) {
        o << "id,label\n";
        for (const auto& e : entries) o << e.id() << ',' << csv::format_double(e.parameter) << '\n';
      });
    } else {
      Graph g = load_graph(graph);
      if (level == "node") {
        auto labels = node_curvature(g, alpha);
        std::vector<int> skipped;
        for (std::size_t v = 0; v < labels.size(); ++v)
          if (!labels[v]) {
            skipped.push_back(static_cast<int>(v));
            std::cerr << "warning: node " << v << " is isolated; no curvature label\n";
          }
        cfg["isolated_nodes"] = skipped;
        csv::write_atomic(out, [&](std::ostream& o) { write_node_labels_csv(o, labels); });
      } else {
        auto labels = edge_curvatures(g, alpha);
        csv::write_atomic(out, [&](std::ostream& o) { write_edge_labels_csv(o, labels); });
      }
    }
    write_json(out + ".json", sidecar("labels", cfg));
  }
};

// ---------------------------------------------------------------- train / eval

/// Joins features and labels on the id column, in feature-file order.
/// Ids present in only one of the files are reported as orphans.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> align(const Table& features, const Table& labels,
                                                  std::vector<std::string>* ids = nullptr) {
  if (labels.columns.size() != 1) throw UsageError("labels file must have exactly one value column");
  std::map<std::string, std::size_t> label_row;
  for (std::size_t i = 0; i < labels.ids.size(); ++i) label_row[labels.ids[i]] = i;
  std::set<std::string> feature_ids(features.ids.begin(), features.ids.end());
  std::vector<std::string> orphans;
  for (const auto& id : features.ids)
    if (!label_row.count(id)) orphans.push_back("features:" + id);
  for (const auto& id : labels.ids)
    if (!feature_ids.count(id)) orphans.push_back("labels:" + id);
  if (!orphans.empty()) {
    std::string msg = "ids do not align (" + std::to_string(orphans.size()) + " orphans):";
    for (const auto& o : orphans) msg += " " + o;
    throw UsageError(msg);
  }
  const auto N = static_cast<Eigen::Index>(features.ids.size());
  Eigen::MatrixXd X(N, static_cast<Eigen::Index>(features.columns.size())), Y(N, 1);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < features.columns.size(); ++j) X(i, static_cast<Eigen::Index>(j)) = features.rows[i][j];
    Y(i, 0) = labels.rows[label_row[features.ids[i]]][0];
  }
  if (ids) *ids = features.ids;
  return {X, Y};
}

int class_count(const Eigen::MatrixXd& Y) {
  int classes = 0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    double c = Y(i, 0);
    if (c < 0 || c != std::floor(c)) throw UsageError("classification labels must be nonnegative integers");
    classes = std::max(classes, static_cast<int>(c) + 1);
  }
  return std::max(classes, 2);
}

struct TrainCmd {
  std::string features, labels, out, metrics;
  std::string task = "regression";
  std::string hidden = "128,128,128,128";
  TrainConfig cfg;
  int folds = 0;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "Train an MLP on aligned feature and label tables");
    cmd->add_option("--features", features, "Feature CSV (id first)")->required();
    cmd->add_option("--labels", labels, "Label CSV id,label")->required();
    cmd->add_option("--task", task, "regression | classification")
        ->check(CLI::IsMember({"regression", "classification"}))
        ->capture_default_str();
    cmd->add_option("--hidden", hidden, "Hidden layer widths")->capture_default_str();
    cmd->add_option("--epochs", cfg.epochs, "Maximum epochs")->capture_default_str();
    cmd->add_option("--batch", cfg.batch_size, "Mini-batch size")->capture_default_str();
    cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--patience", cfg.patience, "Early-stopping patience in epochs")->capture_default_str();
    cmd->add_option("--val-fraction", cfg.validation_fraction, "Held-out fraction for early stopping")
        ->capture_default_str();
    cmd->add_option("--weight-decay", cfg.weight_decay, "Decoupled weight decay")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    cmd->add_option("--folds", folds, "Cross-validation folds (0: none)")->capture_default_str();
    cmd->add_option("--out", out, "Model checkpoint JSON")->required();
    cmd->add_option("--metrics", metrics, "Metrics JSON (default: <out>.metrics.json)");
    cmd->callback([this] { run(); });
  }

  void run() {
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    Table ft = read_table(features);
    auto [X, Y] = align(ft, read_table(labels));
    Task t = task == "regression" ? Task::regression : Task::classification;
    std::vector<int> widths{static_cast<int>(X.cols())};
    for (int w : parse_int_list(hidden, "--hidden")) widths.push_back(w);
    widths.push_back(t == Task::regression ? 1 : class_count(Y));

    json m{{"task", task}, {"samples", X.rows()}};
    if (folds != 0) {
      if (t != Task::regression) throw UsageError("--folds supports regression only");
      if (folds < 2 || folds > X.rows()) throw UsageError("--folds must lie in [2, samples]");
      std::vector<int> hid(widths.begin() + 1, widths.end() - 1);
      auto cv = cross_validate(X, Y, hid, cfg, folds, cfg.seed);
      m["folds"] = folds;
      m["mse"] = cv.mean_mse;
      m["baseline_mse"] = cv.mean_baseline_mse;
      m["fold_mse"] = cv.fold_mse;
      m["fold_baseline_mse"] = cv.fold_baseline_mse;
    }
    MLPModel model;
    try {
      model = init_mlp(widths, t, cfg.seed);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    auto history = train(model, X, Y, cfg);
    m["best_epoch"] = history.best_epoch;
    m["epochs_run"] = history.train_loss.size();
    if (t == Task::regression) {
      m["train_mse"] = evaluate(model, X, Y, Metric::mse);
    } else {
      m["train_accuracy"] = evaluate(model, X, Y, Metric::accuracy);
    }
    json checkpoint{{"model", model.to_json()},
                    {"train_config", cfg.to_json()},
                    {"feature_columns", ft.columns},
                    {"features", features},
                    {"labels", labels}};
    write_json(out, checkpoint);
    write_json(metrics.empty() ? out + ".metrics.json" : metrics, m);
  }
};

struct EvalCmd {
  std::string model, features, predictions, labels, out, save_predictions;
  std::string metric_list;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "Score a checkpoint or a predictions file against labels");
    auto* mo = cmd->add_option("--model", model, "Model checkpoint JSON");
    cmd->add_option("--features", features, "Feature CSV (with --model)");
    auto* pr = cmd->add_option("--predictions", predictions, "Predictions CSV id,prediction");
    mo->excludes(pr);
    cmd->add_option("--labels", labels, "Label CSV id,label")->required();
    cmd->add_option("--metric", metric_list, "Comma list of mse, r2, accuracy (default by task)");
    cmd->add_option("--save-predictions", save_predictions, "Write model predictions CSV");
    cmd->add_option("--out", out, "Metrics JSON")->required();
    cmd->callback([this] { run(); });
  }

  void run() {
    if (model.empty() == predictions.empty()) throw UsageError("give exactly one of --model or --predictions");
    Table lt = read_table(labels);
    Eigen::MatrixXd P, Y;
    Task task = Task::regression;
    if (!model.empty()) {
      if (features.empty()) throw UsageError("--model needs --features");
      auto in = open_input(model);
      MLPModel mlp;
      try {
        mlp = MLPModel::from_json(json::parse(in).at("model"));
      } catch (const std::exception& e) {
        throw UsageError(model + ": " + e.what());
      }
      task = mlp.task;
      Table ft = read_table(features);
      std::vector<std::string> ids;
      Eigen::MatrixXd X;
      std::tie(X, Y) = align(ft, lt, &ids);
      if (X.cols() != mlp.input_width()) throw UsageError("feature width does not match the model");
      P = forward(mlp, X);
      if (!save_predictions.empty()) {
        std::vector<std::string> cols;
        if (task == Task::regression) {
          cols.push_back("prediction");
        } else {
          for (Eigen::Index c = 0; c < P.cols(); ++c) cols.push_back("p" + std::to_string(c));
        }
        write_table(save_predictions, cols, ids, P);
      }
    } else {
      std::tie(P, Y) = align(read_table(predictions), lt);
      if (P.cols() != 1) throw UsageError("predictions file must have one value column");
    }
    std::vector<std::string> names = metric_list.empty()
                                         ? std::vector<std::string>{task == Task::regression ? "mse" : "accuracy"}
                                         : split_list(metric_list);
    json m;
    for (const auto& name : names) {
      Metric metric;
      try {
        metric = parse_metric(name);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      Eigen::MatrixXd pred = P;
      if (metric == Metric::accuracy && pred.cols() == 1) {
        // a single column holds predicted class ids
        int width = std::max(class_count(Y), class_count(pred));
        Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(pred.rows(), width);
        for (Eigen::Index i = 0; i < pred.rows(); ++i) onehot(i, static_cast<Eigen::Index>(pred(i, 0))) = 1.0;
        pred = onehot;
      }
      if (metric != Metric::accuracy && pred.cols() != 1) throw UsageError(name + " needs regression outputs");
      try {
        m[to_string(metric)] = score(pred, Y, metric);
      } catch (const std::domain_error& e) {
        throw UsageError(name + ": " + e.what());
      }
    }
    m["samples"] = Y.rows();
    write_json(out, m);
  }
};

// ---------------------------------------------------------------- verify

struct VerifyCmd {
  std::string suite = "all";
  std::string graph, solution;
  std::string laplacian = "sym";
  std::string times = "0:10:0.25";
  std::string ctrw_times = "0.5,1,2,5";
  double tail_tol = 1e-10;
  int trend_n = 25, trend_graphs = 30;
  std::string trend_p = "0.1,0.2,0.3";
  double trend_t = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  int* exit_code = nullptr;

  void add(CLI::App& app, int* code) {
    exit_code = code;
    auto* cmd = app.add_subcommand("verify", "Check the heat/wave propositions and write a JSONL report");
    cmd->add_option("--suite", suite, "Comma list of heat, wave, confinement, ctrw, dominance, trend, all")
        ->capture_default_str();
    cmd->add_option("--graph", graph, "Edge-list CSV");
    cmd->add_option("--solution", solution, "Solution CSV to check for component confinement");
    cmd->add_option("--laplacian", laplacian, "comb | sym (energy and confinement suites)")
        ->check(CLI::IsMember({"comb", "sym", "rw", "combinatorial", "symmetric_normalized", "random_walk"}))
        ->capture_default_str();
    cmd->add_option("--times", times, "Time grid for the energy suites")->capture_default_str();
    cmd->add_option("--ctrw-times", ctrw_times, "Times for the random-walk identity")->capture_default_str();
    cmd->add_option("--tail-tol", tail_tol, "Poisson tail mass bound")->capture_default_str();
    cmd->add_option("--trend-n", trend_n, "Node count for the decay trend")->capture_default_str();
    cmd->add_option("--trend-p", trend_p, "Increasing ER probabilities for the decay trend")->capture_default_str();
    cmd->add_option("--trend-graphs", trend_graphs, "Graphs per probability")->capture_default_str();
    cmd->add_option("--trend-t", trend_t, "Probe time for the decay trend")->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", out, "Report JSONL (default: stdout)");
    cmd->callback([this] { run(); });
  }

  void run() {
    std::set<std::string> known{"heat", "wave", "confinement", "ctrw", "dominance", "trend"};
    std::set<std::string> chosen;
    for (const auto& s : split_list(suite)) {
      if (s == "all") {
        chosen = known;
      } else if (known.count(s)) {
        chosen.insert(s);
      } else {
        throw UsageError("unknown suite '" + s + "'");
      }
    }
    if (chosen.empty()) throw UsageError("--suite is empty");
    bool needs_graph = chosen.size() > 1 || !chosen.count("trend");
    if (needs_graph && graph.empty()) throw UsageError("--graph is required for the chosen suites");
    auto kind = parse_laplacian_kind(laplacian);
    auto grid = parse_times(times);

    std::vector<PropositionReport> reports;
    std::optional<Graph> g;
    if (!graph.empty()) g = load_graph(graph);
    std::optional<SpectralDecomposition> dec;
    auto decomposition = [&]() -> const SpectralDecomposition& {
      if (!dec) {
        if (g->num_nodes() > kDenseCap) throw UsageError("graph exceeds the dense eigensolver cap");
        dec = eigendecompose(*g, kind);
      }
      return *dec;
    };
    auto merge = [&](const std::string& id, const auto& check) {
      PropositionReport total;
      total.id = id;
      for (int v = 0; v < g->num_nodes(); ++v) {
        auto r = check(v);
        if (r.witness && (!total.witness || r.margin < total.margin)) total.witness = r.witness;
        total.margin = std::min(total.margin, r.margin);
        total.pass = total.pass && r.pass;
      }
      reports.push_back(total);
    };

    if (chosen.count("heat") || chosen.count("wave")) {
      if (kind == LaplacianKind::random_walk) throw UsageError("energy suites need --laplacian comb or sym");
    }
    if (chosen.count("heat"))
      merge("heat_energy_bounds", [&](int v) {
        return check_heat_energy_bounds(decomposition(), Signal::Unit(g->num_nodes(), v), grid, {seed, v, 0.0});
      });
    if (chosen.count("wave"))
      merge("wave_energy_bounds", [&](int v) {
        auto r = check_wave_energy_bounds(decomposition(), Signal::Unit(g->num_nodes(), v), grid, {seed, v, 0.0});
        if (r.witness) r.witness->seed = seed;
        return r;
      });
    if (chosen.count("confinement")) run_confinement(*g, kind, grid, decomposition, reports);
    if (chosen.count("ctrw"))
      for (double t : parse_times(ctrw_times)) {
        auto r = check_ctrw_identity(*g, t, tail_tol);
        r.id = "ctrw_identity_t=" + csv::format_double(t);
        if (r.witness) r.witness->seed = seed;
        reports.push_back(r);
      }
    if (chosen.count("dominance")) reports.push_back(run_dominance(*g, grid));
    if (chosen.count("trend")) reports.push_back(run_trend());

    bool all_pass = true;
    for (const auto& r : reports) all_pass = all_pass && r.pass;
    if (out.empty()) {
      write_reports_jsonl(std::cout, reports);
    } else {
      csv::write_atomic(out, [&](std::ostream& o) { write_reports_jsonl(o, reports); });
    }
    *exit_code = all_pass ? kOk : kFailed;
  }

  template <class Decompose>
  void run_confinement(const Graph& g, LaplacianKind kind, const std::vector<double>& grid, Decompose& decomposition,
                       std::vector<PropositionReport>& reports) {
    if (!solution.empty()) {
      auto in = open_input(solution);
      SolutionTensor sol;
      try {
        sol = read_solution_csv(in);
      } catch (const std::exception& e) {
        throw UsageError(solution + ": " + e.what());
      }
      if (sol.num_nodes != g.num_nodes()) throw UsageError("solution and graph node counts differ");
      auto r = check_component_confinement(g, sol, support_components(g, sol));
      r.id = "confinement_solution";
      if (r.witness) r.witness->seed = seed;
      reports.push_back(r);
      return;
    }
    const int n = g.num_nodes();
    auto comps = connected_components(g);
    for (auto pde : {Pde::heat, Pde::wave}) {
      PropositionReport total;
      total.id = std::string("confinement_") + to_string(pde);
      // one Dirac per component, at its smallest node
      for (int c = 0; c < comps.count; ++c) {
        int v = comps.members(c).front();
        std::vector<Signal> x{Signal::Unit(n, v)}, y{Signal::Zero(n)};
        const auto& d = decomposition();
        auto sol = pde == Pde::heat ? heat_solution_exact(d, x, grid) : wave_solution_exact(d, x, y, grid);
        auto r = check_component_confinement(g, sol, std::vector<int>{c});
        if (r.margin < total.margin) {
          total.margin = r.margin;
          if (r.witness) total.witness = Witness{seed, r.witness->node, r.witness->time};
        }
        total.pass = total.pass && r.pass;
      }
      (void)kind;
      reports.push_back(total);
    }
  }

  PropositionReport run_dominance(const Graph& g, const std::vector<double>& grid) {
    const int n = g.num_nodes();
    auto edges = g.edges();
    std::vector<std::pair<int, int>> missing;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (!g.has_edge(u, v)) missing.emplace_back(u, v);
    CounterRng rng(seed, 0);
    if (!missing.empty()) {
      auto [u, v] = missing[rng.below(missing.size())];
      edges.push_back({u, v, 1.0});
    } else if (!edges.empty()) {
      edges[rng.below(edges.size())].weight += 1.0;
    }
    auto r = check_energy_dominance(g, Graph::from_edge_list(edges, n), grid);
    r.id = "energy_dominance";
    if (r.witness) r.witness->seed = seed;
    return r;
  }

  PropositionReport run_trend() {
    std::vector<double> ps;
    for (const auto& p : split_list(trend_p)) ps.push_back(to_double(p, "--trend-p"));
    DecayTrend trend;
    try {
      trend = er_decay_trend(trend_n, ps, trend_graphs, trend_t, seed);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    PropositionReport r;
    r.id = "decay_trend";
    for (std::size_t i = 1; i < trend.mean_energies.size(); ++i)
      r.check(trend.mean_energies[i], trend.mean_energies[i - 1], 0.0, {seed, -1, trend_t});
    if (!trend.strictly_decreasing()) {
      r.pass = false;
      if (!r.witness) r.witness = Witness{seed, -1, trend_t};
    }
    return r;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph heat/wave dynamics toolkit"};
  app.require_subcommand(1);
  int verify_code = kOk;
  GenerateCmd generate;
  SolveCmd solve;
  FeaturesCmd features;
  LabelsCmd labels;
  TrainCmd train_cmd;
  EvalCmd eval;
  VerifyCmd verify;
  generate.add(app);
  solve.add(app);
  features.add(app);
  labels.add(app);
  train_cmd.add(app);
  eval.add(app);
  verify.add(app, &verify_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return verify_code;
}
