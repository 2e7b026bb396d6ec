#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "randcollect/common.hpp"
#include "randcollect/graph.hpp"
#include "randcollect/linalg.hpp"

namespace randcollect {

// Row-stochastic walk matrix over the nodes of one graph. Analysis treats the
// sink as an ordinary (non-absorbing) state; the simulation engine absorbs at
// the sink regardless of this matrix, which is what sink_absorbing records.
struct TransitionMatrix {
  std::size_t n = 0;
  Matrix p;
  double laziness = 0.0;     // self-loop mass on every node when built lazy
  bool srw = false;          // built by srw_matrix (possibly lazy)
  bool sink_absorbing = false;

  double operator()(NodeId u, NodeId v) const { return p(u, v); }

  double row_sum(NodeId u) const {
    double s = 0.0;
    for (std::size_t v = 0; v < n; ++v) s += p(u, v);
    return s;
  }

  // Dense CSV dump, one row per node. Debugging aid.
  void write_csv(std::ostream& os) const {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (v) os << ',';
        os << fmt_g12(p(u, v));
      }
      os << '\n';
    }
  }
};

// P[u,v] = (1-eps)/d(u) on edges, eps on the diagonal.
inline TransitionMatrix srw_matrix(const Graph& g, double eps = 0.0) {
  if (eps < 0.0 || eps >= 1.0) throw SpecError("srw_matrix: laziness must be in [0,1)");
  TransitionMatrix t;
  t.n = g.n();
  t.p = Matrix(t.n, t.n);
  t.laziness = eps;
  t.srw = true;
  for (NodeId u = 0; u < t.n; ++u) {
    t.p(u, u) = eps;
    const double w = (1.0 - eps) / static_cast<double>(g.degree(u));
    for (NodeId v : g.neighbors(u)) t.p(u, v) = w;
  }
  return t;
}

// eps*I + (1-eps)*P. Maps every eigenvalue lambda to eps + (1-eps)*lambda and
// keeps the stationary distribution.
inline TransitionMatrix lazy(const TransitionMatrix& t, double eps) {
  if (eps < 0.0 || eps >= 1.0) throw SpecError("lazy: laziness must be in [0,1)");
  TransitionMatrix out = t;
  for (std::size_t u = 0; u < t.n; ++u)
    for (std::size_t v = 0; v < t.n; ++v)
      out.p(u, v) = (u == v ? eps : 0.0) + (1.0 - eps) * t.p(u, v);
  out.laziness = eps + (1.0 - eps) * t.laziness;
  out.srw = false;  // no longer the plain (1-eps)/d pattern in general
  return out;
}

struct StationaryDist {
  std::vector<double> pi;
};

// For SRW chains the degree formula pi_i = d(i)/2m is exact at any laziness
// (uniform laziness keeps pi). General chains go through the fixed-point
// linear system with a normalization row.
inline StationaryDist stationary_dist(const TransitionMatrix& t, const Graph& g) {
  const std::size_t n = t.n;
  StationaryDist d;
  d.pi.resize(n);
  if (t.srw) {
    const double two_m = 2.0 * static_cast<double>(g.m());
    for (NodeId u = 0; u < n; ++u) d.pi[u] = static_cast<double>(g.degree(u)) / two_m;
    return d;
  }

  // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
  Matrix a(n, n);
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = t.p(j, i) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  b[n - 1] = 1.0;
  d.pi = solve_linear(a, b);

  double residual = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = -d.pi[j];
    for (std::size_t i = 0; i < n; ++i) s += d.pi[i] * t.p(i, j);
    residual = std::max(residual, std::abs(s));
  }
  if (residual > 1e-10) throw NumericError("stationary_dist: pi P = pi residual too large");
  for (double v : d.pi)
    if (v < -1e-12) throw NumericError("stationary_dist: negative mass (chain not irreducible?)");
  return d;
}

struct SpectrumResult {
  double lambda2 = 0.0;
  double spectral_gap = 0.0;
  std::vector<double> eigenvalues;  // descending
};

// Spectrum of a reversible chain via the symmetric similar matrix
// D^{1/2} P D^{-1/2}, D = diag(pi). Non-reversible input is refused, not
// approximated.
inline SpectrumResult second_eigenvalue(const TransitionMatrix& t, const StationaryDist& dist) {
  const std::size_t n = t.n;
  if (dist.pi.size() != n) throw SpecError("second_eigenvalue: pi size mismatch");
  for (std::size_t u = 0; u < n; ++u)
    if (dist.pi[u] <= 0.0) throw NumericError("second_eigenvalue: pi has a zero entry");
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (std::abs(dist.pi[u] * t.p(u, v) - dist.pi[v] * t.p(v, u)) > 1e-10)
        throw NumericError("second_eigenvalue: chain is not reversible w.r.t. pi");

  Matrix s(n, n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      s(u, v) = std::sqrt(dist.pi[u] / dist.pi[v]) * t.p(u, v);
  // exact symmetry for the eigensolver
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) {
      const double avg = 0.5 * (s(u, v) + s(v, u));
      s(u, v) = avg;
      s(v, u) = avg;
    }

  SpectrumResult r;
  r.eigenvalues = jacobi_eigenvalues(std::move(s));
  r.lambda2 = n >= 2 ? r.eigenvalues[1] : 1.0;
  r.spectral_gap = 1.0 - r.lambda2;
  return r;
}

// Expected hitting times h(x) = E_x[time to reach target], by the dense solve
// of h(x) = 1 + sum_v P[x,v] h(v), h(target) = 0.
inline std::vector<double> hitting_times_to(const TransitionMatrix& t, NodeId target) {
  const std::size_t n = t.n;
  if (target >= n) throw SpecError("hitting_times_to: target out of range");
  const std::size_t m = n - 1;
  std::vector<NodeId> idx;  // non-target nodes in order
  idx.reserve(m);
  for (NodeId u = 0; u < n; ++u)
    if (u != target) idx.push_back(u);

  Matrix a(m, m);
  std::vector<double> b(m, 1.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      a(i, j) = (i == j ? 1.0 : 0.0) - t.p(idx[i], idx[j]);
  std::vector<double> h = solve_linear(a, b);
  if (solve_residual(a, h, b) > 1e-9)
    throw NumericError("hitting_times_to: residual above 1e-9");

  std::vector<double> full(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) full[idx[i]] = h[i];
  return full;
}

// max over targets y and starts x of E_x[time to hit y]; n dense solves.
inline double worst_case_hitting_time(const TransitionMatrix& t) {
  double worst = 0.0;
  for (NodeId y = 0; y < t.n; ++y) {
    const std::vector<double> h = hitting_times_to(t, y);
    for (double v : h) worst = std::max(worst, v);
  }
  return worst;
}

// min over nonempty U ⊆ V \ {sink} of rho(∂U)/rho(U) with rho(u) = row sum
// (= 1 for stochastic P, so rho(U) = |U|) and rho(∂U) the probability mass
// leaving U. Exhaustive, capped like edge_expansion_hat; no closed forms here.
inline double cheeger_hat(const TransitionMatrix& t, NodeId sink,
                          std::size_t cap = kDefaultSubsetCap) {
  const std::size_t n = t.n;
  if (sink >= n) throw SpecError("cheeger_hat: sink out of range");
  if (n > cap) throw CapExceeded("cheeger_hat: n above brute-force cap");

  struct Entry {
    int bu, bv;   // bit positions, -1 for the sink
    double mass;
  };
  std::vector<int> bit_of(n, -1);
  int b = 0;
  for (NodeId u = 0; u < n; ++u)
    if (u != sink) bit_of[u] = b++;
  std::vector<Entry> flows;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (u != v && t.p(u, v) > 0.0) flows.push_back({bit_of[u], bit_of[v], t.p(u, v)});

  const std::uint64_t subsets = 1ull << (n - 1);
  double best = static_cast<double>(n);
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    double out_mass = 0.0;
    for (const Entry& e : flows) {
      const bool bu = e.bu >= 0 && (mask >> e.bu) & 1;
      const bool bv = e.bv >= 0 && (mask >> e.bv) & 1;
      if (bu && !bv) out_mass += e.mass;
    }
    best = std::min(best, out_mass / static_cast<double>(__builtin_popcountll(mask)));
  }
  return best;
}

}  // namespace randcollect
