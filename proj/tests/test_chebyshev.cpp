#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gdenet/chebyshev.hpp"
#include "gdenet/graph.hpp"
#include "gdenet/random.hpp"
#include "gdenet/spectral.hpp"

using namespace gdenet;

namespace {

constexpr LaplacianKind kAllKinds[] = {LaplacianKind::combinatorial, LaplacianKind::symmetric_normalized,
                                       LaplacianKind::random_walk};

Signal dirac(int n, int v) {
  Signal x = Signal::Zero(n);
  x[v] = 1.0;
  return x;
}

Signal random_signal(int n, std::uint64_t seed) {
  CounterRng rng(seed, 5);
  Signal x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(-1.0, 1.0);
  return x;
}

double max_deviation(const SolutionTensor& a, const SolutionTensor& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

}  // namespace

TEST_CASE("lambda_max examples") {
  double k2 = estimate_lambda_max(generate_complete(2), LaplacianKind::combinatorial);
  CHECK(k2 >= 2.0);
  CHECK(k2 <= 2.02);
  double c4 = estimate_lambda_max(generate_cycle(4), LaplacianKind::combinatorial);
  CHECK(c4 >= 4.0);
  CHECK(c4 <= 4.04);
  CHECK(estimate_lambda_max(generate_er(50, 0.1, 1), LaplacianKind::symmetric_normalized) <= 2.0);
  CHECK(estimate_lambda_max(generate_er(50, 0.1, 1), LaplacianKind::random_walk,
                            LambdaMaxStrategy::normalized_bound_2) == 2.0);
  CHECK(analytic_lambda_max(generate_cycle(4), LaplacianKind::combinatorial) == 4.0);
}

TEST_CASE("lambda_max bounds the true spectrum") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = seed % 3 == 0 ? generate_sbm(60, 4, 0.5, 0.02, seed) : generate_er(60, 0.03 + 0.01 * seed, seed);
    for (auto kind : kAllKinds) {
      double true_max = eigendecompose(g, kind).eigenvalues.maxCoeff();
      double est = estimate_lambda_max(g, kind);
      CHECK(est >= true_max);
      CHECK(est <= analytic_lambda_max(g, kind));
    }
  }
}

TEST_CASE("fit_series examples") {
  auto heat0 = fit_series(SpectralFunction::heat, 0.0, 2.0);
  CHECK(heat0.coefficients.size() == 1);
  CHECK(heat0.coefficients[0] == doctest::Approx(1.0).epsilon(1e-15));
  for (double l : {0.0, 0.7, 2.0}) CHECK(std::abs(heat0.evaluate(l) - 1.0) < 1e-15);

  auto sinc0 = fit_series(SpectralFunction::wave_sinc, 0.0, 2.0);
  for (double l : {0.0, 0.7, 2.0}) CHECK(sinc0.evaluate(l) == 0.0);

  auto heat1 = fit_series(SpectralFunction::heat, 1.0, 2.0);
  CHECK(heat1.converged);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double l = 2.0 * i / 999.0;
    worst = std::max(worst, std::abs(heat1.evaluate(l) - std::exp(-l)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("fitted wave series are accurate on a dense grid") {
  for (double t : {1.0, 5.0, 20.0}) {
    for (auto f : {SpectralFunction::wave_cos, SpectralFunction::wave_sinc}) {
      auto s = fit_series(f, t, 4.0);
      CHECK(s.converged);
      double worst = 0.0;
      for (int i = 0; i <= 2000; ++i) {
        double l = 4.0 * i / 2000.0;
        worst = std::max(worst, std::abs(s.evaluate(l) - spectral_function_value(f, t, l)));
      }
      CHECK(worst <= 1e-8);
    }
  }
  CHECK(spectral_function_value(SpectralFunction::wave_sinc, 3.0, 0.0) == 3.0);
}

TEST_CASE("series order grows with oscillation") {
  auto slow = fit_series(SpectralFunction::wave_cos, 1.0, 4.0);
  auto fast = fit_series(SpectralFunction::wave_cos, 20.0, 4.0);
  CHECK(fast.order() > slow.order());
}

TEST_CASE("order cap is reported") {
  SolverConfig cfg;
  cfg.max_order = 8;
  cfg.initial_order = 8;
  auto s = fit_series(SpectralFunction::wave_cos, 50.0, 4.0, cfg);
  CHECK_FALSE(s.converged);
  SolverConfig bad;
  bad.tolerance = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("apply_filter examples") {
  auto g = generate_er(40, 0.1, 3);
  Signal x = random_signal(40, 1);
  for (auto kind : kAllKinds) {
    double lmax = estimate_lambda_max(g, kind);
    auto one = fit_series([](double) { return 1.0; }, lmax);
    CHECK((apply_filter(g, kind, one, x) - x).cwiseAbs().maxCoeff() < 1e-14);
    auto ident = fit_series([](double l) { return l; }, lmax);
    CHECK((apply_filter(g, kind, ident, x) - build_laplacian(g, kind) * x).cwiseAbs().maxCoeff() < 1e-8);
  }

  auto k2 = generate_complete(2);
  auto series = fit_series(SpectralFunction::heat, 1.0, estimate_lambda_max(k2, LaplacianKind::combinatorial));
  Signal u = apply_filter(k2, LaplacianKind::combinatorial, series, dirac(2, 0));
  CHECK(std::abs(u[0] - (1 + std::exp(-2.0)) / 2) < 1e-8);
  CHECK(std::abs(u[1] - (1 - std::exp(-2.0)) / 2) < 1e-8);
}

TEST_CASE("apply_filter is linear") {
  auto g = generate_er(50, 0.08, 4);
  auto series = fit_series(SpectralFunction::wave_cos, 3.0, estimate_lambda_max(g, LaplacianKind::combinatorial));
  Signal x = random_signal(50, 2), y = random_signal(50, 3);
  const double a = 1.7, b = -0.4;
  Signal lhs = apply_filter(g, LaplacianKind::combinatorial, series, a * x + b * y);
  Signal rhs = a * apply_filter(g, LaplacianKind::combinatorial, series, x) +
               b * apply_filter(g, LaplacianKind::combinatorial, series, y);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
}

TEST_CASE("filter bank equals separate filters") {
  auto g = generate_er(30, 0.15, 5);
  double lmax = estimate_lambda_max(g, LaplacianKind::symmetric_normalized);
  std::vector<ChebyshevSeries> bank;
  for (double t : {0.5, 2.0, 7.0}) bank.push_back(fit_series(SpectralFunction::heat, t, lmax));
  Signal x = random_signal(30, 4);
  auto outs = apply_filter_bank(g, LaplacianKind::symmetric_normalized, bank, x);
  for (std::size_t i = 0; i < bank.size(); ++i)
    CHECK((outs[i] - apply_filter(g, LaplacianKind::symmetric_normalized, bank[i], x)).cwiseAbs().maxCoeff() <
          1e-13);
}

TEST_CASE("Chebyshev heat matches the exact solution") {
  std::vector<double> times;
  for (int j = 0; j <= 40; ++j) times.push_back(0.5 * j);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto g = generate_er(100, 0.06, seed);
    for (auto kind : kAllKinds) {
      std::vector<Signal> x{dirac(100, static_cast<int>(seed * 7)), random_signal(100, seed)};
      auto exact = heat_solution_exact(eigendecompose(g, kind), x, times);
      auto cheb = heat_solution_cheb(g, kind, x, times);
      CHECK(cheb.tolerance_met);
      CHECK(max_deviation(exact, cheb) <= 1e-8);
      CHECK(cheb.snapshot(0, 0) == x[0]);
    }
  }
}

TEST_CASE("Chebyshev wave matches the exact solution on a cycle") {
  auto g = generate_cycle(20);
  std::vector<double> times;
  for (int t = 1; t <= 20; ++t) times.push_back(t);
  std::vector<Signal> x{dirac(20, 0)}, y{Signal::Zero(20)};
  auto exact = wave_solution_exact(eigendecompose(g, LaplacianKind::combinatorial), x, y, times);
  auto cheb = wave_solution_cheb(g, LaplacianKind::combinatorial, x, y, times);
  CHECK(cheb.tolerance_met);
  CHECK(max_deviation(exact, cheb) <= 1e-6);
}

TEST_CASE("Chebyshev wave with velocity matches exact for every kind") {
  auto g = generate_er(60, 0.08, 9);
  std::vector<double> times{0.0, 0.5, 3.0, 10.0, 20.0};
  std::vector<Signal> x{random_signal(60, 1)}, y{random_signal(60, 2)};
  for (auto kind : kAllKinds) {
    auto exact = wave_solution_exact(eigendecompose(g, kind), x, y, times);
    auto cheb = wave_solution_cheb(g, kind, x, y, times);
    CHECK(max_deviation(exact, cheb) <= 1e-6);
    CHECK(cheb.snapshot(0, 0) == x[0]);
  }
}

TEST_CASE("random-walk Chebyshev heat keeps constants") {
  auto g = generate_er(50, 0.1, 11);
  std::vector<Signal> ones{Signal::Ones(50)};
  std::vector<double> times{0.5, 3.0, 20.0};
  auto sol = heat_solution_cheb(g, LaplacianKind::random_walk, ones, times);
  for (std::size_t j = 0; j < times.size(); ++j)
    CHECK((sol.snapshot(0, j).array() - 1.0).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("zero-mode projection grows linearly under a velocity kick") {
  auto g = generate_er(30, 0.2, 13);
  REQUIRE(connected_components(g).count == 1);
  std::vector<Signal> x{Signal::Zero(30)}, y{dirac(30, 4)};
  std::vector<double> times{1.0, 2.0, 5.0, 9.0};
  auto sol = wave_solution_cheb(g, LaplacianKind::combinatorial, x, y, times);
  Signal nu1 = Signal::Ones(30) / std::sqrt(30.0);
  double slope = nu1.dot(y[0]);
  for (std::size_t j = 0; j < times.size(); ++j) CHECK(std::abs(nu1.dot(sol.snapshot(0, j)) - slope * times[j]) < 1e-8);
}

TEST_CASE("plan and solve_source agree with the tensor solvers") {
  auto g = generate_er(40, 0.1, 14);
  std::vector<double> times{0.0, 1.0, 6.0};
  SolverConfig cfg;
  auto plan = plan_series(g, LaplacianKind::symmetric_normalized, Pde::wave, times, cfg);
  CHECK(plan.converged());
  Signal x = dirac(40, 2), y = Signal::Zero(40);
  auto snaps = solve_source(g, LaplacianKind::symmetric_normalized, plan, x, &y);
  std::vector<Signal> xs{x}, ys{y};
  auto sol = wave_solution_cheb(g, LaplacianKind::symmetric_normalized, xs, ys, times, cfg);
  for (std::size_t j = 0; j < times.size(); ++j) CHECK((snaps[j] - sol.snapshot(0, j)).cwiseAbs().maxCoeff() == 0.0);
}
