#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gdenet/graph.hpp"
#include "gdenet/spectral.hpp"

namespace gdenet {

struct EnergyCurve {
  Pde pde = Pde::heat;
  std::vector<double> times;
  std::vector<double> energies;  // ||u(., t)||_2^2
};

/// Where a proposition check found its worst case.
struct Witness {
  std::uint64_t seed = 0;
  int node = -1;
  double time = 0.0;
};

/// Outcome of one proposition instance. `margin` is the smallest signed
/// distance to the bound over everything checked (negative means violated,
/// slack not included).
struct PropositionReport {
  std::string id;
  bool pass = true;
  double margin = std::numeric_limits<double>::infinity();
  std::optional<Witness> witness;

  /// Records one comparison `value <= bound` with the given slack.
  void check(double value, double bound, double slack, const Witness& where);
};

EnergyCurve energy_curve(const SolutionTensor& sol, std::size_t source);

/// Lower bound e^{-2 t lambda_n} ||x||^2, upper bound |<nu_1,x>|^2 +
/// e^{-2 t lambda_2} ||x||^2, and monotone non-increase of the energy, at every
/// grid time. Slack is 1e-10 * ||x||^2. Symmetric Laplacian kinds only.
PropositionReport check_heat_energy_bounds(const SpectralDecomposition& dec, const Signal& x,
                                           std::span<const double> times, const Witness& context = {});

/// |<nu_1,x>|^2 <= ||u_W(t)||^2 <= ||x||^2 with zero initial velocity, and the
/// closed form sum_i cos^2(sqrt(lambda_i) t) |<nu_i,x>|^2 against the energy of
/// the synthesized solution (within 1e-10 * ||x||^2).
PropositionReport check_wave_energy_bounds(const SpectralDecomposition& dec, const Signal& x,
                                           std::span<const double> times, const Witness& context = {});

/// Largest |u(v,t)| over nodes outside the given components, every source and
/// time; passes iff it is at most 1e-10. The margin is 1e-10 minus that value.
PropositionReport check_component_confinement(const Graph& g, const SolutionTensor& sol,
                                              std::span<const int> support_components);

/// Components touched by the t = 0 snapshot of every source.
std::vector<int> support_components(const Graph& g, const SolutionTensor& sol);

/// Poisson weights p_t(k) = t^k e^{-t} / k! for k = 0..K where K is the first
/// index whose remaining tail mass is at most tail_tol.
std::vector<double> poisson_weights(double t, double tail_tol);

/// sum_k p_t(k) P^k truncated as in poisson_weights, P = I - L_rw.
Eigen::MatrixXd truncated_poisson_mixture(const Graph& g, double t, double tail_tol);

/// Compares the random-walk heat kernel e^{-t L_rw} with the truncated
/// Poisson mixture; passes iff the max entry deviation is <= tail_tol + 1e-8.
PropositionReport check_ctrw_identity(const Graph& g, double t, double tail_tol);

/// True when every edge of g is in g_prime with at least the same weight and
/// both graphs have the same node count.
bool is_edge_superset(const Graph& g, const Graph& g_prime);

/// Heat energy of g_prime never exceeds that of g when both start from the
/// sum of all eigenvectors of their combinatorial Laplacians. Throws
/// std::invalid_argument when g_prime is not an edge superset of g.
PropositionReport check_energy_dominance(const Graph& g, const Graph& g_prime, std::span<const double> times);

struct DecayTrend {
  std::vector<double> probabilities;
  std::vector<double> mean_energies;
  bool strictly_decreasing() const;
};

/// Mean ||u_H(t_probe)||^2 over ER(n, p) graphs for each p, each started from a
/// Dirac at a random node of the graph's largest component. Graph g of
/// probability index i uses seed derive_seed(seed, i * graphs_per_p + g).
DecayTrend er_decay_trend(int n, std::span<const double> probabilities, int graphs_per_p, double t_probe,
                          std::uint64_t seed, LaplacianKind kind = LaplacianKind::combinatorial);

/// One JSON object per line: {"id","pass","margin","witness"}.
void write_reports_jsonl(std::ostream& out, std::span<const PropositionReport> reports);

}  // namespace gdenet
