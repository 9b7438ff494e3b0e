#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gdenet/graph.hpp"
#include "gdenet/spectral.hpp"

namespace gdenet {

enum class SpectralFunction { heat, wave_cos, wave_sinc, custom };

enum class LambdaMaxStrategy { power_iteration, normalized_bound_2 };

struct SolverConfig {
  double tolerance = 1e-8;
  int initial_order = 32;
  int max_order = 4096;
  LambdaMaxStrategy lambda_max_strategy = LambdaMaxStrategy::power_iteration;
  /// Quadrature nodes per coefficient: nodes = quadrature_factor * (order + 1).
  int quadrature_factor = 2;

  void validate() const;
};

/// p(lambda) = sum_k c_k T_k((2 / lambda_max) lambda - 1) on [0, lambda_max].
struct ChebyshevSeries {
  std::vector<double> coefficients;
  double lambda_max = 2.0;
  SpectralFunction function = SpectralFunction::custom;
  double time = 0.0;
  bool converged = true;   // tail test passed before the order cap
  double tail = 0.0;       // max |c_k| over the last fitted coefficients
  double max_error = 0.0;  // max |p - f| over the quadrature nodes

  int order() const { return static_cast<int>(coefficients.size()) - 1; }
  double evaluate(double lambda) const;
};

/// Upper bound on the spectrum of the chosen Laplacian. Power iteration
/// (at most 1e4 steps) scaled by 1.01 and capped by the analytic bound: 2 for
/// the normalized kinds, twice the maximum weighted degree for the combinatorial one.
double estimate_lambda_max(const Graph& g, LaplacianKind kind,
                           LambdaMaxStrategy strategy = LambdaMaxStrategy::power_iteration);

/// Analytic spectral bound used as cap and fallback.
double analytic_lambda_max(const Graph& g, LaplacianKind kind);

double spectral_function_value(SpectralFunction f, double t, double lambda);

/// Adaptive Chebyshev-Gauss fit. The order doubles from cfg.initial_order
/// until the largest of the last 8 coefficients is below tolerance / 10, or
/// until cfg.max_order (then converged = false). Trailing coefficients whose
/// summed magnitude stays below tolerance / 100 are dropped.
ChebyshevSeries fit_series(SpectralFunction f, double t, double lambda_max, const SolverConfig& cfg = {});
ChebyshevSeries fit_series(const std::function<double(double)>& f, double lambda_max, const SolverConfig& cfg = {});

/// Matrix-free Laplacian action y = L x for the combinatorial and symmetric
/// normalized kinds. The random-walk kind is applied by similarity and
/// therefore uses the symmetric normalized operator internally.
class LaplacianOperator {
 public:
  LaplacianOperator(const Graph& g, LaplacianKind kind);

  int size() const { return graph_->num_nodes(); }
  LaplacianKind kind() const { return kind_; }
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

 private:
  const Graph* graph_;
  LaplacianKind kind_;
  Eigen::VectorXd inv_sqrt_degree_;
  Eigen::VectorXd diagonal_;
};

/// sum_k c_k T_k(L~) x with L~ = (2 / lambda_max) L - I, via the three-term
/// recurrence. For random_walk the result is D^-1/2 p(L_s) D^1/2 x.
Signal apply_filter(const Graph& g, LaplacianKind kind, const ChebyshevSeries& series, const Signal& x);

/// Applies several series sharing lambda_max in one recurrence pass; the
/// cost is that of the longest series.
std::vector<Signal> apply_filter_bank(const Graph& g, LaplacianKind kind, std::span<const ChebyshevSeries> bank,
                                      const Signal& x);

SolutionTensor heat_solution_cheb(const Graph& g, LaplacianKind kind, std::span<const Signal> initial,
                                  std::span<const double> times, const SolverConfig& cfg = {});

SolutionTensor wave_solution_cheb(const Graph& g, LaplacianKind kind, std::span<const Signal> initial,
                                  std::span<const Signal> velocity, std::span<const double> times,
                                  const SolverConfig& cfg = {});

/// Chebyshev series for a PDE over a time grid, plus the interval they share.
struct SeriesPlan {
  double lambda_max = 2.0;
  std::vector<ChebyshevSeries> primary;    // heat or wave_cos, one per time
  std::vector<ChebyshevSeries> secondary;  // wave_sinc per time (wave only)
  bool converged() const;
};

SeriesPlan plan_series(const Graph& g, LaplacianKind kind, Pde pde, std::span<const double> times,
                       const SolverConfig& cfg);

/// Solution snapshots of one source for every time of the plan.
std::vector<Signal> solve_source(const Graph& g, LaplacianKind kind, const SeriesPlan& plan, const Signal& x,
                                 const Signal* y);

}  // namespace gdenet
