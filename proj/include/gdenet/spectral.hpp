#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gdenet/graph.hpp"

namespace gdenet {

enum class LaplacianKind { combinatorial, symmetric_normalized, random_walk };

enum class Pde { heat, wave };

std::string to_string(LaplacianKind kind);
std::string to_string(Pde pde);
LaplacianKind parse_laplacian_kind(const std::string& s);  // comb|sym|rw or full names
Pde parse_pde(const std::string& s);

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kDenseCap = 2000;

/// Degree used by the normalized kinds: the weighted degree, or 1 for an
/// isolated node. With this convention an isolated node has an all-zero
/// Laplacian row under every kind and stays frozen in time.
Eigen::VectorXd normalization_degrees(const Graph& g);

/// Dense Laplacian:
///   combinatorial          L    = D - A
///   symmetric_normalized   L_s  = D^-1/2 L D^-1/2
///   random_walk            L_rw = D^-1 L = I - D^-1 A
Eigen::MatrixXd build_laplacian(const Graph& g, LaplacianKind kind);

/// Row-stochastic random-walk matrix P = I - L_rw.
Eigen::MatrixXd random_walk_matrix(const Graph& g);

/// Eigendecomposition L = basis * diag(eigenvalues) * dual.
///
/// The symmetric kinds keep an orthonormal basis and dual = basis^T. For the
/// random-walk kind the symmetric normalized Laplacian is decomposed as
/// Psi Lambda Psi^T and mapped through S = D^-1/2 Psi, S^-1 = Psi^T D^1/2, so
/// all three kinds share the eigenvalues of a symmetric problem.
struct SpectralDecomposition {
  LaplacianKind kind = LaplacianKind::combinatorial;
  Eigen::VectorXd eigenvalues;  // ascending, clamped to >= 0
  Eigen::MatrixXd orthonormal;  // Psi of the symmetric problem
  Eigen::VectorXd sqrt_degree;  // D^1/2 for random_walk, ones otherwise

  int size() const { return static_cast<int>(eigenvalues.size()); }
  Eigen::MatrixXd basis() const;  // columns are right eigenvectors
  Eigen::MatrixXd dual() const;   // basis^-1

  /// Coefficients <nu_i, x> (dual pairing for random_walk).
  Eigen::VectorXd coefficients(const Signal& x) const;
  /// sum_i c_i nu_i
  Signal synthesize(const Eigen::VectorXd& coeffs) const;
  /// f(L) = basis * diag(f(lambda)) * dual, dense.
  Eigen::MatrixXd matrix_function(const Eigen::VectorXd& spectrum_values) const;
};

SpectralDecomposition eigendecompose(const Graph& g, LaplacianKind kind, int dense_cap = kDenseCap);

/// Solution values indexed (source, node, time).
struct SolutionTensor {
  Pde pde = Pde::heat;
  LaplacianKind kind = LaplacianKind::combinatorial;
  int num_nodes = 0;
  std::vector<int> sources;  // label of each source slot
  std::vector<double> times;
  std::vector<double> values;
  bool tolerance_met = true;  // false when an approximate solver hit its order cap

  SolutionTensor() = default;
  SolutionTensor(Pde p, LaplacianKind k, int n, std::vector<int> src, std::vector<double> t);

  std::size_t index(std::size_t s, std::size_t v, std::size_t j) const {
    return (s * static_cast<std::size_t>(num_nodes) + v) * times.size() + j;
  }
  double& at(std::size_t s, std::size_t v, std::size_t j) { return values[index(s, v, j)]; }
  double at(std::size_t s, std::size_t v, std::size_t j) const { return values[index(s, v, j)]; }

  Signal snapshot(std::size_t s, std::size_t j) const;
  void set_snapshot(std::size_t s, std::size_t j, const Signal& u);
  std::size_t num_sources() const { return sources.size(); }
};

/// Validates a time grid: nonempty, nonnegative, strictly increasing.
void check_time_grid(std::span<const double> times);

/// u_H(t) = sum_i e^{-t lambda_i} <nu_i, x> nu_i for every initial signal.
SolutionTensor heat_solution_exact(const SpectralDecomposition& dec, std::span<const Signal> initial,
                                   std::span<const double> times);

/// u_W(t) = sum_i cos(sqrt(lambda_i) t) <nu_i, x> nu_i + g_t(lambda_i) <nu_i, y> nu_i
/// with g_t(lambda) = sin(sqrt(lambda) t) / sqrt(lambda) and g_t(0) = t.
SolutionTensor wave_solution_exact(const SpectralDecomposition& dec, std::span<const Signal> initial,
                                   std::span<const Signal> velocity, std::span<const double> times);

/// e^{-tL}; exactly the identity at t = 0.
Eigen::MatrixXd heat_kernel(const SpectralDecomposition& dec, double t);

/// sin(sqrt(lambda) t) / sqrt(lambda), continuous at lambda = 0.
double wave_sinc(double lambda, double t);

/// CSV `source,node,time,value`; time and value with 17 significant digits.
void write_solution_csv(std::ostream& out, const SolutionTensor& sol);
/// Inverse of write_solution_csv. The rows must cover a full (source, node,
/// time) grid; pde and kind are left at their defaults.
SolutionTensor read_solution_csv(std::istream& in);

}  // namespace gdenet
