#include "gdenet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "gdenet/random.hpp"

namespace gdenet {

void PropositionReport::check(double value, double bound, double slack, const Witness& where) {
  double distance = bound - value;
  if (!(distance >= margin)) {  // also catches NaN
    margin = std::isnan(distance) ? -std::numeric_limits<double>::infinity() : distance;
    witness = where;
  }
  if (!(distance >= -slack)) pass = false;
}

EnergyCurve energy_curve(const SolutionTensor& sol, std::size_t source) {
  if (source >= sol.num_sources()) throw std::out_of_range("source index out of range");
  EnergyCurve curve;
  curve.pde = sol.pde;
  curve.times = sol.times;
  curve.energies.resize(sol.times.size());
  for (std::size_t j = 0; j < sol.times.size(); ++j) {
    double e = 0.0;
    for (int v = 0; v < sol.num_nodes; ++v) {
      double u = sol.at(source, static_cast<std::size_t>(v), j);
      e += u * u;
    }
    curve.energies[j] = e;
  }
  return curve;
}

namespace {

void require_symmetric(const SpectralDecomposition& dec) {
  if (dec.kind == LaplacianKind::random_walk)
    throw std::invalid_argument("energy bounds assume an orthonormal eigenbasis (symmetric Laplacian kinds)");
}

Witness at_time(const Witness& context, double t) {
  Witness w = context;
  w.time = t;
  return w;
}

}  // namespace

PropositionReport check_heat_energy_bounds(const SpectralDecomposition& dec, const Signal& x,
                                           std::span<const double> times, const Witness& context) {
  require_symmetric(dec);
  PropositionReport report;
  report.id = "heat_energy_bounds";
  const double norm2 = x.squaredNorm();
  const double slack = 1e-10 * norm2;
  const double lambda_2 = dec.size() > 1 ? dec.eigenvalues[1] : 0.0;
  const double lambda_n = dec.eigenvalues[dec.size() - 1];
  const double zero_mode = std::pow(dec.orthonormal.col(0).dot(x), 2);
  auto sol = heat_solution_exact(dec, std::span<const Signal>(&x, 1), times);
  auto curve = energy_curve(sol, 0);
  for (std::size_t j = 0; j < times.size(); ++j) {
    double t = times[j], e = curve.energies[j];
    Witness w = at_time(context, t);
    report.check(std::exp(-2.0 * t * lambda_n) * norm2, e, slack, w);
    report.check(e, zero_mode + std::exp(-2.0 * t * lambda_2) * norm2, slack, w);
    report.check(e, norm2, slack, w);
    if (j > 0) report.check(e, curve.energies[j - 1], slack, w);
  }
  return report;
}

PropositionReport check_wave_energy_bounds(const SpectralDecomposition& dec, const Signal& x,
                                           std::span<const double> times, const Witness& context) {
  require_symmetric(dec);
  PropositionReport report;
  report.id = "wave_energy_bounds";
  const double norm2 = x.squaredNorm();
  const double slack = 1e-10 * norm2;
  Eigen::VectorXd c = dec.coefficients(x);
  const double zero_mode = c[0] * c[0];
  Signal y = Signal::Zero(x.size());
  auto sol = wave_solution_exact(dec, std::span<const Signal>(&x, 1), std::span<const Signal>(&y, 1), times);
  auto curve = energy_curve(sol, 0);
  for (std::size_t j = 0; j < times.size(); ++j) {
    double t = times[j], e = curve.energies[j];
    Witness w = at_time(context, t);
    report.check(zero_mode, e, slack, w);
    report.check(e, norm2, slack, w);
    double closed = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) closed += std::pow(std::cos(std::sqrt(dec.eigenvalues[i]) * t) * c[i], 2);
    report.check(std::abs(closed - e), slack, 0.0, w);
  }
  return report;
}

std::vector<int> support_components(const Graph& g, const SolutionTensor& sol) {
  auto labels = connected_components(g);
  std::set<int> comps;
  for (std::size_t s = 0; s < sol.num_sources(); ++s)
    for (int v = 0; v < sol.num_nodes; ++v)
      if (sol.at(s, static_cast<std::size_t>(v), 0) != 0.0) comps.insert(labels.labels[v]);
  return {comps.begin(), comps.end()};
}

PropositionReport check_component_confinement(const Graph& g, const SolutionTensor& sol,
                                              std::span<const int> support) {
  if (sol.num_nodes != g.num_nodes()) throw std::invalid_argument("solution does not match the graph");
  constexpr double kTolerance = 1e-10;
  PropositionReport report;
  report.id = "component_confinement";
  auto labels = connected_components(g);
  std::vector<bool> inside(static_cast<std::size_t>(labels.count), false);
  for (int c : support)
    if (c >= 0 && c < labels.count) inside[c] = true;
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (inside[labels.labels[v]]) continue;
    for (std::size_t s = 0; s < sol.num_sources(); ++s)
      for (std::size_t j = 0; j < sol.times.size(); ++j)
        report.check(std::abs(sol.at(s, static_cast<std::size_t>(v), j)), kTolerance, 0.0,
                     Witness{static_cast<std::uint64_t>(sol.sources[s]), v, sol.times[j]});
  }
  return report;
}

std::vector<double> poisson_weights(double t, double tail_tol) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  if (!(tail_tol > 0.0)) throw std::invalid_argument("tail tolerance must be positive");
  std::vector<double> w{std::exp(-t)};
  double mass = w[0];
  while (1.0 - mass > tail_tol) {
    double next = w.back() * t / static_cast<double>(w.size());
    if (next == 0.0 && w.size() > t) break;  // tail below double resolution
    w.push_back(next);
    mass += next;
  }
  return w;
}

Eigen::MatrixXd truncated_poisson_mixture(const Graph& g, double t, double tail_tol) {
  const int n = g.num_nodes();
  auto weights = poisson_weights(t, tail_tol);
  Eigen::MatrixXd P = random_walk_matrix(g);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd mix = weights[0] * power;
  for (std::size_t k = 1; k < weights.size(); ++k) {
    power = (power * P).eval();
    mix += weights[k] * power;
  }
  return mix;
}

PropositionReport check_ctrw_identity(const Graph& g, double t, double tail_tol) {
  PropositionReport report;
  report.id = "ctrw_identity";
  auto dec = eigendecompose(g, LaplacianKind::random_walk);
  Eigen::MatrixXd kernel = heat_kernel(dec, t);
  Eigen::MatrixXd mix = truncated_poisson_mixture(g, t, tail_tol);
  Eigen::MatrixXd diff = (kernel - mix).cwiseAbs();
  Eigen::Index row = 0, col = 0;
  double worst = diff.maxCoeff(&row, &col);
  report.check(worst, tail_tol + 1e-8, 0.0, Witness{0, static_cast<int>(row), t});
  return report;
}

bool is_edge_superset(const Graph& g, const Graph& g_prime) {
  if (g.num_nodes() != g_prime.num_nodes()) return false;
  for (const auto& e : g.edges())
    if (g_prime.edge_weight(e.u, e.v) < e.weight) return false;
  return true;
}

PropositionReport check_energy_dominance(const Graph& g, const Graph& g_prime, std::span<const double> times) {
  if (!is_edge_superset(g, g_prime))
    throw std::invalid_argument("g_prime must contain every edge of g with at least the same weight");
  PropositionReport report;
  report.id = "heat_energy_dominance";
  auto energies = [&](const Graph& graph) {
    auto dec = eigendecompose(graph, LaplacianKind::combinatorial);
    Signal x = dec.orthonormal.rowwise().sum();
    auto sol = heat_solution_exact(dec, std::span<const Signal>(&x, 1), times);
    return energy_curve(sol, 0).energies;
  };
  auto base = energies(g);
  auto denser = energies(g_prime);
  for (std::size_t j = 0; j < times.size(); ++j) report.check(denser[j], base[j], 1e-10, Witness{0, -1, times[j]});
  return report;
}

bool DecayTrend::strictly_decreasing() const {
  for (std::size_t i = 1; i < mean_energies.size(); ++i)
    if (!(mean_energies[i] < mean_energies[i - 1])) return false;
  return true;
}

DecayTrend er_decay_trend(int n, std::span<const double> probabilities, int graphs_per_p, double t_probe,
                          std::uint64_t seed, LaplacianKind kind) {
  for (std::size_t i = 1; i < probabilities.size(); ++i)
    if (!(probabilities[i] > probabilities[i - 1])) throw std::invalid_argument("probabilities must be strictly increasing");
  if (graphs_per_p < 1) throw std::invalid_argument("need at least one graph per probability");
  DecayTrend trend;
  trend.probabilities.assign(probabilities.begin(), probabilities.end());
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    double total = 0.0;
    for (int k = 0; k < graphs_per_p; ++k) {
      std::uint64_t graph_seed = derive_seed(seed, i * static_cast<std::uint64_t>(graphs_per_p) + k);
      Graph g = generate_er(n, probabilities[i], graph_seed);
      auto comps = connected_components(g);
      std::vector<int> sizes(static_cast<std::size_t>(comps.count), 0);
      for (int label : comps.labels) ++sizes[label];
      int largest = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      auto members = comps.members(largest);
      CounterRng rng(graph_seed, 1);
      int node = members[rng.below(members.size())];
      auto dec = eigendecompose(g, kind);
      Signal x = Signal::Zero(n);
      x[node] = 1.0;
      double t = t_probe;
      auto sol = heat_solution_exact(dec, std::span<const Signal>(&x, 1), std::span<const double>(&t, 1));
      total += energy_curve(sol, 0).energies[0];
    }
    trend.mean_energies.push_back(total / graphs_per_p);
  }
  return trend;
}

void write_reports_jsonl(std::ostream& out, std::span<const PropositionReport> reports) {
  for (const auto& r : reports) {
    nlohmann::json j;
    j["id"] = r.id;
    j["pass"] = r.pass;
    j["margin"] = std::isfinite(r.margin) ? nlohmann::json(r.margin) : nlohmann::json(nullptr);
    if (r.witness) {
      j["witness"] = {{"seed", r.witness->seed}, {"node", r.witness->node}, {"time", r.witness->time}};
    } else {
      j["witness"] = nullptr;
    }
    out << j.dump() << '\n';
  }
}

}  // namespace gdenet
