#include "gdenet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "gdenet/csv.hpp"
#include "gdenet/parallel.hpp"

namespace gdenet {

std::string to_string(LaplacianKind kind) {
  switch (kind) {
    case LaplacianKind::combinatorial: return "combinatorial";
    case LaplacianKind::symmetric_normalized: return "symmetric_normalized";
    case LaplacianKind::random_walk: return "random_walk";
  }
  return "?";
}

std::string to_string(Pde pde) { return pde == Pde::heat ? "heat" : "wave"; }

LaplacianKind parse_laplacian_kind(const std::string& s) {
  if (s == "comb" || s == "combinatorial") return LaplacianKind::combinatorial;
  if (s == "sym" || s == "symmetric_normalized") return LaplacianKind::symmetric_normalized;
  if (s == "rw" || s == "random_walk") return LaplacianKind::random_walk;
  throw std::invalid_argument("unknown Laplacian kind '" + s + "'");
}

Pde parse_pde(const std::string& s) {
  if (s == "heat") return Pde::heat;
  if (s == "wave") return Pde::wave;
  throw std::invalid_argument("unknown pde '" + s + "'");
}

Eigen::VectorXd normalization_degrees(const Graph& g) {
  Eigen::VectorXd d = g.degrees();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d[i] <= 0.0) d[i] = 1.0;
  return d;
}

Eigen::MatrixXd build_laplacian(const Graph& g, LaplacianKind kind) {
  const int n = g.num_nodes();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    auto nb = g.neighbors(u);
    auto w = g.weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      L(u, nb[k]) -= w[k];
      L(u, u) += w[k];
    }
  }
  if (kind == LaplacianKind::combinatorial) return L;
  Eigen::VectorXd d = normalization_degrees(g);
  if (kind == LaplacianKind::symmetric_normalized) {
    Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
    return s.asDiagonal() * L * s.asDiagonal();
  }
  return d.cwiseInverse().asDiagonal() * L;
}

Eigen::MatrixXd random_walk_matrix(const Graph& g) {
  const int n = g.num_nodes();
  return Eigen::MatrixXd::Identity(n, n) - build_laplacian(g, LaplacianKind::random_walk);
}

Eigen::MatrixXd SpectralDecomposition::basis() const {
  return sqrt_degree.cwiseInverse().asDiagonal() * orthonormal;
}

Eigen::MatrixXd SpectralDecomposition::dual() const {
  return orthonormal.transpose() * sqrt_degree.asDiagonal();
}

Eigen::VectorXd SpectralDecomposition::coefficients(const Signal& x) const {
  if (x.size() != eigenvalues.size()) throw std::invalid_argument("signal length does not match the graph");
  return orthonormal.transpose() * sqrt_degree.cwiseProduct(x);
}

Signal SpectralDecomposition::synthesize(const Eigen::VectorXd& coeffs) const {
  return (orthonormal * coeffs).cwiseQuotient(sqrt_degree);
}

Eigen::MatrixXd SpectralDecomposition::matrix_function(const Eigen::VectorXd& f) const {
  Eigen::MatrixXd scaled = orthonormal * f.asDiagonal();
  Eigen::MatrixXd m = scaled * orthonormal.transpose();
  return sqrt_degree.cwiseInverse().asDiagonal() * m * sqrt_degree.asDiagonal();
}

SpectralDecomposition eigendecompose(const Graph& g, LaplacianKind kind, int dense_cap) {
  if (g.num_nodes() > dense_cap) {
    throw SpectralError("graph has " + std::to_string(g.num_nodes()) + " nodes, above the dense cap of " +
                        std::to_string(dense_cap) + "; use the Chebyshev solver");
  }
  const int n = g.num_nodes();
  LaplacianKind symmetric_kind =
      kind == LaplacianKind::random_walk ? LaplacianKind::symmetric_normalized : kind;
  Eigen::MatrixXd L = build_laplacian(g, symmetric_kind);
  // Exact symmetry so the solver sees a self-adjoint matrix.
  L = 0.5 * (L + L.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
  if (solver.info() != Eigen::Success) {
    throw SpectralError("symmetric eigensolver did not converge within " + std::to_string(30 * n) +
                        " QR iterations");
  }
  SpectralDecomposition dec;
  dec.kind = kind;
  dec.eigenvalues = solver.eigenvalues().cwiseMax(0.0);
  dec.orthonormal = solver.eigenvectors();
  dec.sqrt_degree = kind == LaplacianKind::random_walk ? normalization_degrees(g).cwiseSqrt().eval()
                                                       : Eigen::VectorXd::Ones(n).eval();
  return dec;
}

SolutionTensor::SolutionTensor(Pde p, LaplacianKind k, int n, std::vector<int> src, std::vector<double> t)
    : pde(p), kind(k), num_nodes(n), sources(std::move(src)), times(std::move(t)) {
  values.assign(sources.size() * static_cast<std::size_t>(num_nodes) * times.size(), 0.0);
}

Signal SolutionTensor::snapshot(std::size_t s, std::size_t j) const {
  Signal u(num_nodes);
  for (int v = 0; v < num_nodes; ++v) u[v] = at(s, static_cast<std::size_t>(v), j);
  return u;
}

void SolutionTensor::set_snapshot(std::size_t s, std::size_t j, const Signal& u) {
  for (int v = 0; v < num_nodes; ++v) at(s, static_cast<std::size_t>(v), j) = u[v];
}

void check_time_grid(std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("time grid is empty");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(times[j] >= 0.0) || !std::isfinite(times[j])) throw std::invalid_argument("times must be finite and nonnegative");
    if (j > 0 && !(times[j] > times[j - 1])) throw std::invalid_argument("times must be strictly increasing");
  }
}

namespace {

std::vector<int> default_sources(std::size_t count) {
  std::vector<int> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = static_cast<int>(i);
  return s;
}

void check_signals(std::span<const Signal> signals, int n) {
  for (const auto& x : signals) {
    if (x.size() != n) throw std::invalid_argument("signal length does not match the graph");
    if (!x.allFinite()) throw std::invalid_argument("signal has non-finite entries");
  }
}

}  // namespace

double wave_sinc(double lambda, double t) {
  if (lambda <= 0.0) return t;
  double r = std::sqrt(lambda);
  if (r * t < 1e-8) return t * (1.0 - lambda * t * t / 6.0);
  return std::sin(r * t) / r;
}

SolutionTensor heat_solution_exact(const SpectralDecomposition& dec, std::span<const Signal> initial,
                                   std::span<const double> times) {
  check_time_grid(times);
  check_signals(initial, dec.size());
  SolutionTensor sol(Pde::heat, dec.kind, dec.size(), default_sources(initial.size()),
                     {times.begin(), times.end()});
  std::vector<Eigen::VectorXd> coeffs(initial.size());
  for (std::size_t s = 0; s < initial.size(); ++s) coeffs[s] = dec.coefficients(initial[s]);
  const std::size_t T = times.size();
  parallel_for(initial.size() * T, [&](std::size_t idx) {
    std::size_t s = idx / T, j = idx % T;
    if (times[j] == 0.0) {
      sol.set_snapshot(s, j, initial[s]);
      return;
    }
    Eigen::VectorXd c = coeffs[s].cwiseProduct((-times[j] * dec.eigenvalues).array().exp().matrix());
    sol.set_snapshot(s, j, dec.synthesize(c));
  });
  return sol;
}

SolutionTensor wave_solution_exact(const SpectralDecomposition& dec, std::span<const Signal> initial,
                                   std::span<const Signal> velocity, std::span<const double> times) {
  check_time_grid(times);
  check_signals(initial, dec.size());
  check_signals(velocity, dec.size());
  if (velocity.size() != initial.size()) throw std::invalid_argument("need one velocity per initial signal");
  SolutionTensor sol(Pde::wave, dec.kind, dec.size(), default_sources(initial.size()),
                     {times.begin(), times.end()});
  const std::size_t T = times.size();
  const Eigen::Index n = dec.size();
  parallel_for(initial.size() * T, [&](std::size_t idx) {
    std::size_t s = idx / T, j = idx % T;
    double t = times[j];
    if (t == 0.0) {
      sol.set_snapshot(s, j, initial[s]);
      return;
    }
    Eigen::VectorXd cx = dec.coefficients(initial[s]);
    Eigen::VectorXd cy = dec.coefficients(velocity[s]);
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double lam = dec.eigenvalues[i];
      c[i] = std::cos(std::sqrt(lam) * t) * cx[i] + wave_sinc(lam, t) * cy[i];
    }
    sol.set_snapshot(s, j, dec.synthesize(c));
  });
  return sol;
}

Eigen::MatrixXd heat_kernel(const SpectralDecomposition& dec, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat kernel time must be nonnegative");
  if (t == 0.0) return Eigen::MatrixXd::Identity(dec.size(), dec.size());
  return dec.matrix_function((-t * dec.eigenvalues).array().exp().matrix());
}

void write_solution_csv(std::ostream& out, const SolutionTensor& sol) {
  out << "source,node,time,value\n";
  for (std::size_t s = 0; s < sol.num_sources(); ++s)
    for (int v = 0; v < sol.num_nodes; ++v)
      for (std::size_t j = 0; j < sol.times.size(); ++j)
        out << sol.sources[s] << ',' << v << ',' << csv::format_double(sol.times[j]) << ','
            << csv::format_double(sol.at(s, static_cast<std::size_t>(v), j)) << '\n';
}

SolutionTensor read_solution_csv(std::istream& in) {
  struct Row {
    int source, node;
    double time, value;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = csv::trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto f = csv::split(text);
    if (!header) {
      if (f != std::vector<std::string>{"source", "node", "time", "value"})
        throw ParseError("expected header 'source,node,time,value'", line_no);
      header = true;
      continue;
    }
    if (f.size() != 4) throw ParseError("expected 4 fields", line_no);
    try {
      rows.push_back({static_cast<int>(csv::parse_int(f[0])), static_cast<int>(csv::parse_int(f[1])),
                      csv::parse_double(f[2]), csv::parse_double(f[3])});
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
    if (rows.back().node < 0) throw ParseError("negative node index", line_no);
  }
  if (!header) throw ParseError("missing header", line_no);
  std::map<int, std::size_t> source_slot;
  std::map<double, std::size_t> time_slot;
  int n = 0;
  for (const auto& r : rows) {
    source_slot.emplace(r.source, 0);
    time_slot.emplace(r.time, 0);
    n = std::max(n, r.node + 1);
  }
  std::vector<int> sources;
  for (auto& [label, slot] : source_slot) {
    slot = sources.size();
    sources.push_back(label);
  }
  std::vector<double> times;
  for (auto& [t, slot] : time_slot) {
    slot = times.size();
    times.push_back(t);
  }
  SolutionTensor sol(Pde::heat, LaplacianKind::combinatorial, n, sources, times);
  if (rows.size() != sol.values.size()) throw ParseError("solution rows do not cover a full grid", line_no);
  for (const auto& r : rows) sol.at(source_slot[r.source], static_cast<std::size_t>(r.node), time_slot[r.time]) = r.value;
  return sol;
}

}  // namespace gdenet
