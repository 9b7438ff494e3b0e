#include "gdenet/features.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "gdenet/csv.hpp"
#include "gdenet/parallel.hpp"

namespace gdenet {

void FeatureConfig::validate() const {
  if (max_moment < 1) throw std::invalid_argument("M must be at least 1");
  if (max_hop < 2) throw std::invalid_argument("K must be at least 2");
  if (time_steps < 1) throw std::invalid_argument("T must be at least 1");
  if (max_graph_moment < 1) throw std::invalid_argument("S must be at least 1");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  chebyshev.validate();
}

std::vector<double> FeatureConfig::times() const {
  std::vector<double> t(static_cast<std::size_t>(time_steps));
  for (int j = 1; j <= time_steps; ++j) t[j - 1] = (j * t_max) / time_steps;
  return t;
}

nlohmann::json FeatureConfig::to_json() const {
  return {{"pde", to_string(pde)},
          {"laplacian", to_string(laplacian)},
          {"solver", solver == SolverKind::exact ? "exact" : "chebyshev"},
          {"M", max_moment},
          {"K", max_hop},
          {"T", time_steps},
          {"t_max", t_max},
          {"S", max_graph_moment},
          {"velocity", velocity == VelocityRule::zero ? "zero" : "equal_x"},
          {"include_hop1", include_hop1},
          {"tolerance", chebyshev.tolerance},
          {"max_order", chebyshev.max_order}};
}

NodeFeatureTensor::NodeFeatureTensor(int n, std::vector<double> t, int hop_count, int m, int first)
    : nodes(n), times(static_cast<int>(t.size())), hops(hop_count), moments(m), first_hop(first),
      time_values(std::move(t)) {
  values.assign(static_cast<std::size_t>(nodes) * row_width(), 0.0);
}

std::vector<Signal> dirac_initial_conditions(const Signal& x_tilde) {
  const auto n = x_tilde.size();
  std::vector<Signal> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = Signal::Zero(n);
    out[i][i] = x_tilde[i];
  }
  return out;
}

std::vector<Signal> dirac_initial_conditions(int n) { return dirac_initial_conditions(Signal::Ones(n)); }

void accumulate_node_moments(NodeFeatureTensor& out, const Graph& g, int node, std::span<const Signal> snapshots) {
  const int last_hop = out.first_hop + out.hops - 1;
  auto dist = bfs_distances(g, node, last_hop);
  std::vector<double> powers(static_cast<std::size_t>(out.moments));
  for (int t = 0; t < out.times; ++t) {
    const Signal& u = snapshots[t];
    for (int j = 0; j < g.num_nodes(); ++j) {
      if (dist[j] == kUnreachable) continue;
      double a = std::abs(u[j]);
      double p = 1.0;
      for (int m = 0; m < out.moments; ++m) {
        p *= a;
        powers[m] = p;
      }
      for (int k = std::max(0, dist[j] - out.first_hop); k < out.hops; ++k)
        for (int m = 0; m < out.moments; ++m) out.at(node, t, k, m) += powers[m];
    }
  }
}

NodeFeatureTensor node_moments(const SolutionTensor& solutions, const Graph& g, int max_moment, int max_hop,
                               int first_hop) {
  if (solutions.num_nodes != g.num_nodes() || solutions.num_sources() != static_cast<std::size_t>(g.num_nodes()))
    throw std::invalid_argument("node moments need one source per node");
  if (max_moment < 1 || max_hop < first_hop) throw std::invalid_argument("invalid moment or hop range");
  NodeFeatureTensor out(g.num_nodes(), solutions.times, max_hop - first_hop + 1, max_moment, first_hop);
  parallel_for(static_cast<std::size_t>(g.num_nodes()), [&](std::size_t i) {
    std::vector<Signal> snaps(solutions.times.size());
    for (std::size_t j = 0; j < snaps.size(); ++j) snaps[j] = solutions.snapshot(i, j);
    accumulate_node_moments(out, g, static_cast<int>(i), snaps);
  });
  return out;
}

GraphFeatureVector graph_moments(const NodeFeatureTensor& nodes, int max_graph_moment) {
  if (max_graph_moment < 1) throw std::invalid_argument("S must be at least 1");
  GraphFeatureVector w;
  w.times = nodes.times;
  w.graph_moments = max_graph_moment;
  w.hops = nodes.hops;
  w.moments = nodes.moments;
  w.first_hop = nodes.first_hop;
  w.time_values = nodes.time_values;
  w.values.assign(static_cast<std::size_t>(w.times) * w.graph_moments * w.hops * w.moments, 0.0);
  for (int i = 0; i < nodes.nodes; ++i)
    for (int t = 0; t < nodes.times; ++t)
      for (int k = 0; k < nodes.hops; ++k)
        for (int m = 0; m < nodes.moments; ++m) {
          double h = std::abs(nodes.at(i, t, k, m));
          double p = 1.0;
          for (int s = 0; s < w.graph_moments; ++s) {
            p *= h;
            w.values[w.index(t, s, k, m)] += p;
          }
        }
  return w;
}

namespace {

void check_signal(const std::optional<Signal>& s, int n, const char* name) {
  if (s && (s->size() != n || !s->allFinite()))
    throw std::invalid_argument(std::string(name) + " must have one finite value per node");
}

}  // namespace

FeatureResult extract_features(const Graph& g, const std::optional<Signal>& x_tilde,
                               const std::optional<Signal>& y_tilde, const FeatureConfig& cfg) {
  cfg.validate();
  const int n = g.num_nodes();
  check_signal(x_tilde, n, "input signal");
  check_signal(y_tilde, n, "velocity signal");
  const Signal x_scale = x_tilde ? *x_tilde : Signal::Ones(n);
  Signal y_scale = Signal::Zero(n);
  if (cfg.pde == Pde::wave) {
    if (y_tilde) {
      y_scale = *y_tilde;
    } else if (cfg.velocity == VelocityRule::equal_x) {
      y_scale = x_scale;
    }
  }
  const auto times = cfg.times();
  FeatureResult result;
  result.nodes = NodeFeatureTensor(n, times, cfg.hop_count(), cfg.max_moment, cfg.first_hop());

  if (cfg.solver == SolverKind::exact) {
    auto dec = eigendecompose(g, cfg.laplacian);
    // Column i of f(L) is f(L) delta_i, so one dense kernel per time covers
    // every Dirac source at once.
    std::vector<Eigen::MatrixXd> kernels(times.size());
    std::vector<Eigen::MatrixXd> velocity_kernels(cfg.pde == Pde::wave ? times.size() : 0);
    const bool has_velocity = cfg.pde == Pde::wave && !y_scale.isZero(0.0);
    parallel_for(times.size(), [&](std::size_t j) {
      const double t = times[j];
      Eigen::VectorXd f(n);
      if (cfg.pde == Pde::heat) {
        for (int i = 0; i < n; ++i) f[i] = std::exp(-t * dec.eigenvalues[i]);
        kernels[j] = dec.matrix_function(f);
      } else {
        for (int i = 0; i < n; ++i) f[i] = std::cos(std::sqrt(dec.eigenvalues[i]) * t);
        kernels[j] = dec.matrix_function(f);
        if (has_velocity) {
          for (int i = 0; i < n; ++i) f[i] = wave_sinc(dec.eigenvalues[i], t);
          velocity_kernels[j] = dec.matrix_function(f);
        }
      }
    });
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      std::vector<Signal> snaps(times.size());
      for (std::size_t j = 0; j < times.size(); ++j) {
        snaps[j] = kernels[j].col(static_cast<Eigen::Index>(i)) * x_scale[i];
        if (has_velocity) snaps[j] += velocity_kernels[j].col(static_cast<Eigen::Index>(i)) * y_scale[i];
      }
      accumulate_node_moments(result.nodes, g, static_cast<int>(i), snaps);
    });
  } else {
    auto plan = plan_series(g, cfg.laplacian, cfg.pde, times, cfg.chebyshev);
    result.tolerance_met = plan.converged();
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      Signal x = Signal::Zero(n), y = Signal::Zero(n);
      x[i] = x_scale[i];
      y[i] = y_scale[i];
      auto snaps = solve_source(g, cfg.laplacian, plan, x, cfg.pde == Pde::wave ? &y : nullptr);
      accumulate_node_moments(result.nodes, g, static_cast<int>(i), snaps);
    });
  }
  result.graph = graph_moments(result.nodes, cfg.max_graph_moment);
  return result;
}

std::vector<FeatureResult> extract_features_channels(const Graph& g, std::span<const Signal> signals,
                                                     const FeatureConfig& cfg) {
  std::vector<FeatureResult> out;
  if (signals.empty()) {
    out.push_back(extract_features(g, std::nullopt, std::nullopt, cfg));
    return out;
  }
  for (const auto& s : signals) out.push_back(extract_features(g, s, std::nullopt, cfg));
  return out;
}

void write_node_features_csv(std::ostream& out, std::span<const NodeFeatureTensor> channels) {
  const bool multi = channels.size() > 1;
  out << (multi ? "channel," : "") << "node,time,k,m,value\n";
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& f = channels[c];
    for (int i = 0; i < f.nodes; ++i)
      for (int t = 0; t < f.times; ++t)
        for (int k = 0; k < f.hops; ++k)
          for (int m = 0; m < f.moments; ++m) {
            if (multi) out << c << ',';
            out << i << ',' << csv::format_double(f.time_values[t]) << ',' << f.first_hop + k << ',' << m + 1 << ','
                << csv::format_double(f.at(i, t, k, m)) << '\n';
          }
  }
}

void write_graph_features_csv(std::ostream& out, std::span<const GraphFeatureVector> channels) {
  const bool multi = channels.size() > 1;
  out << (multi ? "channel," : "") << "time,s,k,m,value\n";
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& w = channels[c];
    for (int t = 0; t < w.times; ++t)
      for (int s = 0; s < w.graph_moments; ++s)
        for (int k = 0; k < w.hops; ++k)
          for (int m = 0; m < w.moments; ++m) {
            if (multi) out << c << ',';
            out << csv::format_double(w.time_values[t]) << ',' << s + 1 << ',' << w.first_hop + k << ',' << m + 1
                << ',' << csv::format_double(w.at(t, s, k, m)) << '\n';
          }
  }
}

}  // namespace gdenet
