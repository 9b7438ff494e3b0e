#include "gdenet/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gdenet/parallel.hpp"
#include "gdenet/random.hpp"

namespace gdenet {

void SolverConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (max_order < 8) throw std::invalid_argument("solver order cap must be at least 8");
  if (initial_order < 1) throw std::invalid_argument("initial order must be positive");
  if (quadrature_factor < 1) throw std::invalid_argument("quadrature factor must be positive");
}

double ChebyshevSeries::evaluate(double lambda) const {
  // Clenshaw
  double x = 2.0 * lambda / lambda_max - 1.0;
  double b1 = 0.0, b2 = 0.0;
  for (int k = order(); k >= 1; --k) {
    double b0 = 2.0 * x * b1 - b2 + coefficients[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + coefficients[0];
}

double analytic_lambda_max(const Graph& g, LaplacianKind kind) {
  if (kind != LaplacianKind::combinatorial) return 2.0;
  double bound = 2.0 * g.max_degree();
  return bound > 0.0 ? bound : 1.0;
}

LaplacianOperator::LaplacianOperator(const Graph& g, LaplacianKind kind) : graph_(&g), kind_(kind) {
  const int n = g.num_nodes();
  Eigen::VectorXd d = g.degrees();
  if (kind == LaplacianKind::combinatorial) {
    inv_sqrt_degree_ = Eigen::VectorXd::Ones(n);
    diagonal_ = d;
  } else {
    Eigen::VectorXd dn = normalization_degrees(g);
    inv_sqrt_degree_ = dn.cwiseSqrt().cwiseInverse();
    diagonal_ = d.cwiseQuotient(dn);
  }
}

void LaplacianOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const int n = size();
  y.resize(n);
  const auto& offsets = graph_->offsets();
  const auto& nbrs = graph_->flat_neighbors();
  const auto& w = graph_->flat_weights();
  const bool scaled = kind_ != LaplacianKind::combinatorial;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    if (scaled) {
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) acc += w[k] * inv_sqrt_degree_[nbrs[k]] * x[nbrs[k]];
      acc *= inv_sqrt_degree_[i];
    } else {
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) acc += w[k] * x[nbrs[k]];
    }
    y[i] = diagonal_[i] * x[i] - acc;
  }
}

Eigen::VectorXd LaplacianOperator::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y;
  apply(x, y);
  return y;
}

double estimate_lambda_max(const Graph& g, LaplacianKind kind, LambdaMaxStrategy strategy) {
  const double analytic = analytic_lambda_max(g, kind);
  if (strategy == LambdaMaxStrategy::normalized_bound_2 || g.num_edges() == 0) return analytic;
  LaplacianKind op_kind = kind == LaplacianKind::random_walk ? LaplacianKind::symmetric_normalized : kind;
  LaplacianOperator op(g, op_kind);
  const int n = g.num_nodes();
  CounterRng rng(0x1a3b5c7d9e);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform() - 0.5;
  v.normalize();
  Eigen::VectorXd w;
  double rho = 0.0;
  constexpr int kMaxIterations = 10000;
  for (int it = 0; it < kMaxIterations; ++it) {
    op.apply(v, w);
    double next = v.dot(w);
    double norm = w.norm();
    if (norm == 0.0) return analytic;
    v = w / norm;
    if (it >= 50 && std::abs(next - rho) <= 1e-10 * std::abs(next)) {
      rho = next;
      return rho > 0.0 ? std::min(rho * 1.01, analytic) : analytic;
    }
    rho = next;
  }
  return analytic;
}

double spectral_function_value(SpectralFunction f, double t, double lambda) {
  switch (f) {
    case SpectralFunction::heat: return std::exp(-t * lambda);
    case SpectralFunction::wave_cos: return std::cos(t * std::sqrt(std::max(lambda, 0.0)));
    case SpectralFunction::wave_sinc: return wave_sinc(lambda, t);
    case SpectralFunction::custom: break;
  }
  throw std::invalid_argument("custom spectral functions need an explicit callable");
}

ChebyshevSeries fit_series(const std::function<double(double)>& f, double lambda_max, const SolverConfig& cfg) {
  cfg.validate();
  if (!(lambda_max > 0.0)) throw std::invalid_argument("lambda_max must be positive");
  ChebyshevSeries series;
  series.lambda_max = lambda_max;
  int order = std::min(cfg.initial_order, cfg.max_order);
  std::vector<double> theta, values;
  while (true) {
    const int nodes = cfg.quadrature_factor * (order + 1);
    theta.resize(nodes);
    values.resize(nodes);
    for (int j = 0; j < nodes; ++j) {
      theta[j] = std::numbers::pi * (j + 0.5) / nodes;
      values[j] = f(0.5 * (std::cos(theta[j]) + 1.0) * lambda_max);
      if (!std::isfinite(values[j])) throw std::invalid_argument("spectral function is not finite on the interval");
    }
    series.coefficients.assign(order + 1, 0.0);
    for (int k = 0; k <= order; ++k) {
      double acc = 0.0;
      for (int j = 0; j < nodes; ++j) acc += values[j] * std::cos(k * theta[j]);
      series.coefficients[k] = 2.0 * acc / nodes;
    }
    series.coefficients[0] *= 0.5;
    double tail = 0.0;
    for (int k = std::max(0, order - 7); k <= order; ++k) tail = std::max(tail, std::abs(series.coefficients[k]));
    series.tail = tail;
    if (tail < cfg.tolerance / 10.0) {
      series.converged = true;
      break;
    }
    if (order >= cfg.max_order) {
      series.converged = false;
      break;
    }
    order = std::min(2 * order, cfg.max_order);
  }
  double dropped = 0.0;
  while (series.coefficients.size() > 1 && dropped + std::abs(series.coefficients.back()) <= cfg.tolerance / 100.0) {
    dropped += std::abs(series.coefficients.back());
    series.coefficients.pop_back();
  }
  double err = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j)
    err = std::max(err, std::abs(series.evaluate(0.5 * (std::cos(theta[j]) + 1.0) * lambda_max) - values[j]));
  series.max_error = err;
  return series;
}

ChebyshevSeries fit_series(SpectralFunction f, double t, double lambda_max, const SolverConfig& cfg) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  auto series = fit_series([&](double lam) { return spectral_function_value(f, t, lam); }, lambda_max, cfg);
  series.function = f;
  series.time = t;
  return series;
}

std::vector<Signal> apply_filter_bank(const Graph& g, LaplacianKind kind, std::span<const ChebyshevSeries> bank,
                                      const Signal& x) {
  const int n = g.num_nodes();
  if (x.size() != n) throw std::invalid_argument("signal length does not match the graph");
  std::vector<Signal> out(bank.size(), Signal::Zero(n));
  if (bank.empty()) return out;
  const double lambda_max = bank.front().lambda_max;
  int max_order = 0;
  for (const auto& s : bank) {
    if (s.lambda_max != lambda_max) throw std::invalid_argument("filter bank series must share lambda_max");
    max_order = std::max(max_order, s.order());
  }
  const bool similarity = kind == LaplacianKind::random_walk;
  LaplacianOperator op(g, similarity ? LaplacianKind::symmetric_normalized : kind);
  Eigen::VectorXd sqrt_deg;
  Eigen::VectorXd t_prev = x;
  if (similarity) {
    sqrt_deg = normalization_degrees(g).cwiseSqrt();
    t_prev = x.cwiseProduct(sqrt_deg);
  }
  const double scale = 2.0 / lambda_max;
  auto rescaled = [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) {
    op.apply(v, y);
    y = scale * y - v;
  };
  for (std::size_t b = 0; b < bank.size(); ++b) out[b] = bank[b].coefficients[0] * t_prev;
  if (max_order >= 1) {
    Eigen::VectorXd t_cur, t_next, tmp;
    rescaled(t_prev, t_cur);
    for (std::size_t b = 0; b < bank.size(); ++b)
      if (bank[b].order() >= 1) out[b] += bank[b].coefficients[1] * t_cur;
    for (int k = 2; k <= max_order; ++k) {
      rescaled(t_cur, tmp);
      t_next = 2.0 * tmp - t_prev;
      for (std::size_t b = 0; b < bank.size(); ++b)
        if (bank[b].order() >= k) out[b] += bank[b].coefficients[k] * t_next;
      std::swap(t_prev, t_cur);
      std::swap(t_cur, t_next);
    }
  }
  if (similarity)
    for (auto& y : out) y = y.cwiseQuotient(sqrt_deg);
  return out;
}

Signal apply_filter(const Graph& g, LaplacianKind kind, const ChebyshevSeries& series, const Signal& x) {
  return apply_filter_bank(g, kind, std::span<const ChebyshevSeries>(&series, 1), x).front();
}

bool SeriesPlan::converged() const {
  auto ok = [](const ChebyshevSeries& s) { return s.converged; };
  return std::all_of(primary.begin(), primary.end(), ok) && std::all_of(secondary.begin(), secondary.end(), ok);
}

SeriesPlan plan_series(const Graph& g, LaplacianKind kind, Pde pde, std::span<const double> times,
                       const SolverConfig& cfg) {
  check_time_grid(times);
  cfg.validate();
  SeriesPlan plan;
  plan.lambda_max = estimate_lambda_max(g, kind, cfg.lambda_max_strategy);
  for (double t : times) {
    if (pde == Pde::heat) {
      plan.primary.push_back(fit_series(SpectralFunction::heat, t, plan.lambda_max, cfg));
    } else {
      plan.primary.push_back(fit_series(SpectralFunction::wave_cos, t, plan.lambda_max, cfg));
      plan.secondary.push_back(fit_series(SpectralFunction::wave_sinc, t, plan.lambda_max, cfg));
    }
  }
  return plan;
}

std::vector<Signal> solve_source(const Graph& g, LaplacianKind kind, const SeriesPlan& plan, const Signal& x,
                                 const Signal* y) {
  auto out = apply_filter_bank(g, kind, plan.primary, x);
  if (y != nullptr && !plan.secondary.empty() && !y->isZero(0.0)) {
    auto drift = apply_filter_bank(g, kind, plan.secondary, *y);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += drift[j];
  }
  for (std::size_t j = 0; j < out.size(); ++j)
    if (plan.primary[j].time == 0.0) out[j] = x;
  // An isolated node has a zero Laplacian row, so its value is f(0) x + g(0) y.
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (g.hop_degree(v) != 0) continue;
    for (std::size_t j = 0; j < out.size(); ++j) {
      const auto& p = plan.primary[j];
      double value = spectral_function_value(p.function, p.time, 0.0) * x[v];
      if (y != nullptr && !plan.secondary.empty()) value += p.time * (*y)[v];
      out[j][v] = value;
    }
  }
  return out;
}

namespace {

SolutionTensor solve_all(const Graph& g, LaplacianKind kind, Pde pde, std::span<const Signal> initial,
                         std::span<const Signal> velocity, std::span<const double> times, const SolverConfig& cfg) {
  for (const auto& x : initial)
    if (x.size() != g.num_nodes() || !x.allFinite()) throw std::invalid_argument("invalid initial signal");
  for (const auto& y : velocity)
    if (y.size() != g.num_nodes() || !y.allFinite()) throw std::invalid_argument("invalid velocity signal");
  auto plan = plan_series(g, kind, pde, times, cfg);
  std::vector<int> sources(initial.size());
  for (std::size_t s = 0; s < sources.size(); ++s) sources[s] = static_cast<int>(s);
  SolutionTensor sol(pde, kind, g.num_nodes(), sources, {times.begin(), times.end()});
  sol.tolerance_met = plan.converged();
  parallel_for(initial.size(), [&](std::size_t s) {
    const Signal* y = velocity.empty() ? nullptr : &velocity[s];
    auto snaps = solve_source(g, kind, plan, initial[s], y);
    for (std::size_t j = 0; j < snaps.size(); ++j) sol.set_snapshot(s, j, snaps[j]);
  });
  return sol;
}

}  // namespace

SolutionTensor heat_solution_cheb(const Graph& g, LaplacianKind kind, std::span<const Signal> initial,
                                  std::span<const double> times, const SolverConfig& cfg) {
  return solve_all(g, kind, Pde::heat, initial, {}, times, cfg);
}

SolutionTensor wave_solution_cheb(const Graph& g, LaplacianKind kind, std::span<const Signal> initial,
                                  std::span<const Signal> velocity, std::span<const double> times,
                                  const SolverConfig& cfg) {
  if (velocity.size() != initial.size()) throw std::invalid_argument("need one velocity per initial signal");
  return solve_all(g, kind, Pde::wave, initial, velocity, times, cfg);
}

}  // namespace gdenet
