#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "randcollect/common.hpp"
#include "randcollect/graph.hpp"
#include "randcollect/linalg.hpp"
#include "randcollect/walk.hpp"

namespace randcollect {

// Steady-state queue occupancy probabilities eta_u = P(Q(u) > 0), solved on
// the grounded system: the sink never transmits and eta[sink] is fixed to 0.
struct OccupancyVector {
  std::vector<double> eta;
  double beta = 0.0;
};

namespace detail {

// Grounded balance system over the non-sink nodes:
//   eta_u * (1 - P[u,u]) - sum_{v != u, v != sink} P[v,u] eta_v = beta * 1{u in sources}
// Self-loop mass cancels between the send and receive side, so a lazy walk
// only rescales the solution by 1/(1-eps).
inline std::vector<double> solve_grounded(const TransitionMatrix& p,
                                          const std::vector<char>& is_source, NodeId sink,
                                          double beta) {
  const std::size_t n = p.n;
  const std::size_t m = n - 1;
  std::vector<NodeId> idx;
  idx.reserve(m);
  for (NodeId u = 0; u < n; ++u)
    if (u != sink) idx.push_back(u);

  Matrix a(m, m);
  std::vector<double> b(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const NodeId u = idx[i];
    for (std::size_t j = 0; j < m; ++j) {
      const NodeId v = idx[j];
      if (u == v)
        a(i, j) = 1.0 - p(u, u);
      else
        a(i, j) = -p(v, u);
    }
    b[i] = is_source[u] ? beta : 0.0;
  }
  std::vector<double> x = solve_linear(a, b);
  if (solve_residual(a, x, b) > 1e-10)
    throw NumericError("solve_occupancy: residual above 1e-10");
  return x;
}

inline std::vector<char> source_mask(std::size_t n, const std::vector<NodeId>& sources,
                                     NodeId sink) {
  std::vector<char> mask(n, 0);
  for (NodeId s : sources) {
    if (s >= n) throw SpecError("source id out of range");
    if (s == sink) throw SpecError("sink cannot be a source");
    mask[s] = 1;
  }
  return mask;
}

}  // namespace detail

inline OccupancyVector solve_occupancy(const TransitionMatrix& p,
                                       const std::vector<NodeId>& sources, NodeId sink,
                                       double beta) {
  const std::size_t n = p.n;
  const auto mask = detail::source_mask(n, sources, sink);
  const std::vector<double> x = detail::solve_grounded(p, mask, sink, beta);

  OccupancyVector out;
  out.beta = beta;
  out.eta.assign(n, 0.0);
  std::size_t i = 0;
  for (NodeId u = 0; u < n; ++u)
    if (u != sink) out.eta[u] = x[i++];

  // Sink flow balance: everything the sources inject arrives at the sink.
  double inflow = 0.0;
  for (NodeId v = 0; v < n; ++v)
    if (v != sink) inflow += p(v, sink) * out.eta[v];
  const double expect = beta * static_cast<double>(sources.size());
  if (std::abs(inflow - expect) > 1e-9 * std::max(1.0, expect))
    throw NumericError("solve_occupancy: sink flow balance violated");
  return out;
}

inline OccupancyVector solve_occupancy(const TransitionMatrix& p, const Graph& g, double beta) {
  return solve_occupancy(p, g.sources(), g.sink(), beta);
}

// Largest rate with all eta_u <= 1. The grounded system is linear in beta, so
// one unit solve and a max give the threshold exactly.
inline double critical_rate(const TransitionMatrix& p, const std::vector<NodeId>& sources,
                            NodeId sink) {
  const auto mask = detail::source_mask(p.n, sources, sink);
  const std::vector<double> x = detail::solve_grounded(p, mask, sink, 1.0);
  double xmax = 0.0;
  for (double v : x) xmax = std::max(xmax, v);
  if (xmax <= 0.0) throw NumericError("critical_rate: degenerate unit solution");
  return 1.0 / xmax;
}

inline double critical_rate(const TransitionMatrix& p, const Graph& g) {
  return critical_rate(p, g.sources(), g.sink());
}

// Conditional drift E[Q_{t+1}(u) - Q_t(u) | Q_t(u) > 0] at a solved eta:
// arrivals (exogenous plus occupied neighbors, never the sink) minus the
// off-diagonal service rate. Negative at every node exactly when the rate is
// stable.
inline double expected_drift(const TransitionMatrix& p, const std::vector<NodeId>& sources,
                             NodeId sink, const OccupancyVector& occ, NodeId u, double beta) {
  const auto mask = detail::source_mask(p.n, sources, sink);
  double in = mask[u] ? beta : 0.0;
  for (NodeId v = 0; v < p.n; ++v)
    if (v != u && v != sink) in += p(v, u) * occ.eta[v];
  const double out = 1.0 - p(u, u);
  return in - out;
}

inline double expected_drift(const TransitionMatrix& p, const Graph& g,
                             const OccupancyVector& occ, NodeId u) {
  return expected_drift(p, g.sources(), g.sink(), occ, u, occ.beta);
}

// Closed-form exact rates for the named families, all-sources case.
struct Table1Rate {
  double value = 0.0;
  bool is_upper_bound_only = false;  // hypercube: the closed form bounds the rate
  bool is_exact = false;             // equals the solver's critical rate
};

inline Table1Rate table1_reference(TopologyKind kind, std::size_t n, double eps = 0.0) {
  Table1Rate r;
  const double nd = static_cast<double>(n);
  // Laziness rescales the critical rate by (1-eps); only the star-center form
  // carries eps explicitly, the others are exact for the plain walk.
  switch (kind) {
    case TopologyKind::cycle:
      r.value = 4.0 / (nd * nd);
      r.is_exact = (n % 2 == 0) && eps == 0.0;  // derivation is for even cycles
      return r;
    case TopologyKind::star_center_sink:
      r.value = 1.0 - eps;
      r.is_exact = true;
      return r;
    case TopologyKind::star_outer_sink:
      r.value = 1.0 / ((nd - 1.0) * (nd - 1.0));
      r.is_exact = eps == 0.0;
      return r;
    case TopologyKind::complete:
      r.value = 1.0 / (nd - 1.0);
      r.is_exact = eps == 0.0;
      return r;
    case TopologyKind::hypercube: {
      unsigned x = 0;
      while ((1ull << x) < n) ++x;
      if ((1ull << x) != n) throw SpecError("table1_reference: hypercube n not a power of two");
      r.value = 5.0 / (static_cast<double>(x) * std::pow(1.5, static_cast<double>(x)));
      r.is_upper_bound_only = true;
      return r;
    }
    default:
      throw SpecError("table1_reference: no closed form for this family");
  }
}

inline void write_occupancy_csv(std::ostream& os, const OccupancyVector& occ) {
  os << "node,eta\n";
  for (std::size_t u = 0; u < occ.eta.size(); ++u)
    os << u << ',' << fmt_g12(occ.eta[u]) << '\n';
}

}  // namespace randcollect
