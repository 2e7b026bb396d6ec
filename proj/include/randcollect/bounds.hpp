#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "randcollect/common.hpp"
#include "randcollect/graph.hpp"
#include "randcollect/steady_state.hpp"
#include "randcollect/walk.hpp"

namespace randcollect {

// Throughput lower bound for the simple random walk:
//   (1 - lambda2) * sqrt(d_min / (d_max * 2k(k+1)))
inline double srw_rate_lower_bound(double lambda2, std::size_t d_min, std::size_t d_max,
                                   std::size_t k) {
  if (k == 0 || d_min == 0 || d_min > d_max) throw SpecError("srw_rate_lower_bound: bad inputs");
  if (lambda2 < -1.0 || lambda2 >= 1.0 + 1e-12) throw SpecError("srw_rate_lower_bound: lambda2 out of range");
  const double kk = static_cast<double>(k);
  return (1.0 - lambda2) *
         std::sqrt(static_cast<double>(d_min) /
                   (static_cast<double>(d_max) * 2.0 * kk * (kk + 1.0)));
}

// General spectral bound evaluated as a checker at a supplied (beta, eta)
// pair: (1 - lambda2) * sqrt(Var_pi(eta) / (sum_{sources} pi + k^2 pi_sink)).
// The value is only meaningful relative to the beta that eta was solved at.
inline double general_rate_lower_bound(const StationaryDist& dist, const OccupancyVector& occ,
                                       const std::vector<NodeId>& sources, NodeId sink,
                                       double lambda2) {
  const std::size_t n = dist.pi.size();
  if (occ.eta.size() != n) throw SpecError("general_rate_lower_bound: size mismatch");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += dist.pi[i] * occ.eta[i];
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = occ.eta[i] - mean;
    var += dist.pi[i] * d * d;
  }
  double denom = static_cast<double>(sources.size()) * static_cast<double>(sources.size()) *
                 dist.pi[sink];
  for (NodeId s : sources) denom += dist.pi[s];
  return (1.0 - lambda2) * std::sqrt(var / denom);
}

// min{alpha_hat(G), d_sink/(n-1)}; applies when every non-sink node is a
// source.
inline double general_upper_bound(const Graph& g, std::size_t cap = kDefaultSubsetCap) {
  if (g.k() != g.n() - 1)
    throw SpecError("general_upper_bound: requires sources = V \\ {sink}");
  const double sink_term =
      static_cast<double>(g.degree(g.sink())) / static_cast<double>(g.n() - 1);
  return std::min(edge_expansion_hat(g, cap), sink_term);
}

// min{h_hat(G), sum_{u ~ sink} P[u,sink] / (n-1)}; the walk-weighted analogue.
inline double rc_upper_bound(const TransitionMatrix& p, NodeId sink,
                             std::size_t cap = kDefaultSubsetCap) {
  double into_sink = 0.0;
  for (NodeId u = 0; u < p.n; ++u)
    if (u != sink) into_sink += p(u, sink);
  const double sink_term = into_sink / static_cast<double>(p.n - 1);
  return std::min(cheeger_hat(p, sink, cap), sink_term);
}

// alpha * log(e k) * (1/beta + t_hit/(1-c)). Natural log; alpha defaults to e
// since the analysis never pins the constant. c >= 1 is the unstable regime,
// reported as +inf rather than an error.
inline double latency_upper_bound(std::size_t k, double beta, double t_hit, double c,
                                  double alpha = 2.71828182845904523536) {
  if (k == 0 || beta <= 0.0 || t_hit < 0.0 || c < 0.0 || alpha <= 1.0)
    throw SpecError("latency_upper_bound: bad inputs");
  if (c >= 1.0) return std::numeric_limits<double>::infinity();
  const double log_ek = 1.0 + std::log(static_cast<double>(k));
  return alpha * log_ek * (1.0 / beta + t_hit / (1.0 - c));
}

struct LatencyBound {
  std::size_t k = 0;
  double beta = 0.0;
  double t_hit = 0.0;
  double c = 0.0;
  double alpha = 0.0;
  double value = 0.0;
};

inline LatencyBound evaluate_latency_bound(std::size_t k, double beta, double t_hit, double c,
                                           double alpha = 2.71828182845904523536) {
  return {k, beta, t_hit, c, alpha, latency_upper_bound(k, beta, t_hit, c, alpha)};
}

// One row of the rate table for a topology: every bound plus the exact
// critical rate. Fields that need subset enumeration are NaN when the graph
// is above the cap and has no registered closed form.
struct RateReport {
  std::string topology = "unknown";
  std::size_t n = 0;
  double eps = 0.0;
  std::size_t k = 0;
  double lambda2 = 0.0;
  double srw_lower = 0.0;
  double general_lower = 0.0;  // spectral checker evaluated at beta*/2
  double general_lower_beta = 0.0;
  double exact_rate = 0.0;
  double rc_upper = std::numeric_limits<double>::quiet_NaN();
  double general_upper = std::numeric_limits<double>::quiet_NaN();

  static const char* csv_header() {
    return "topology,n,eps,k,lambda2,srw_lower,general_lower,general_lower_beta,"
           "exact_rate,rc_upper,general_upper";
  }

  void write_csv_row(std::ostream& os) const {
    os << topology << ',' << n << ',' << fmt_g12(eps) << ',' << k << ','
       << fmt_g12(lambda2) << ',' << fmt_g12(srw_lower) << ',' << fmt_g12(general_lower)
       << ',' << fmt_g12(general_lower_beta) << ',' << fmt_g12(exact_rate) << ','
       << fmt_g12(rc_upper) << ',' << fmt_g12(general_upper) << '\n';
  }
};

inline RateReport build_rate_report(const Graph& g, const TransitionMatrix& p,
                                    const StationaryDist& dist,
                                    std::size_t cap = kDefaultSubsetCap) {
  RateReport r;
  r.topology = g.family() ? to_string(*g.family()) : "custom";
  r.n = g.n();
  r.eps = p.laziness;
  r.k = g.k();

  const SpectrumResult spec = second_eigenvalue(p, dist);
  r.lambda2 = spec.lambda2;
  const DegreeStats ds = degree_stats(g);
  r.srw_lower = srw_rate_lower_bound(spec.lambda2, ds.d_min, ds.d_max, g.k());
  r.exact_rate = critical_rate(p, g);

  r.general_lower_beta = 0.5 * r.exact_rate;
  const OccupancyVector occ = solve_occupancy(p, g, r.general_lower_beta);
  r.general_lower = general_rate_lower_bound(dist, occ, g.sources(), g.sink(), spec.lambda2);

  // The two upper bounds apply to the all-sources case only.
  if (g.k() == g.n() - 1) {
    try {
      r.rc_upper = rc_upper_bound(p, g.sink(), cap);
    } catch (const CapExceeded&) {
    }
    try {
      r.general_upper = general_upper_bound(g, cap);
    } catch (const CapExceeded&) {
    }
  }
  return r;
}

// Closed forms behind the rate table, per family. `exact` marks cells that
// the computed columns must reproduce to 1e-9; the rest are asymptotic
// simplifications (cycle/rgg spectral gaps, the lazy-chain hypercube gap).
struct ClosedFormCell {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool exact = false;
};

struct Table1ClosedForms {
  ClosedFormCell lower;
  Table1Rate exact_rate;  // value + bound/exact flags; NaN-like skip for rgg
  bool has_exact_rate = false;
  ClosedFormCell general_upper;
};

inline Table1ClosedForms table1_closed_forms(TopologyKind kind, std::size_t n,
                                             double eps = 0.0) {
  Table1ClosedForms t;
  const double nd = static_cast<double>(n);
  const double nm1 = nd - 1.0;
  unsigned x = 0;
  if (kind == TopologyKind::hypercube) {
    while ((1ull << x) < n) ++x;
    if ((1ull << x) != n) throw SpecError("table1_closed_forms: hypercube n not a power of two");
  }
  switch (kind) {
    case TopologyKind::cycle:
      t.lower = {1.0 / (nd * nd * std::sqrt(2.0 * nd * nm1)), false};
      t.general_upper = {2.0 / nm1, true};
      break;
    case TopologyKind::star_center_sink:
      t.lower = {1.0 / std::sqrt(2.0 * nd * nm1 * nm1), eps == 0.0};
      t.general_upper = {1.0, true};
      break;
    case TopologyKind::star_outer_sink:
      t.lower = {1.0 / std::sqrt(2.0 * nd * nm1 * nm1), eps == 0.0};
      t.general_upper = {1.0 / nm1, true};
      break;
    case TopologyKind::complete:
      t.lower = {nd / std::sqrt(2.0 * nd * nm1 * nm1 * nm1), eps == 0.0};
      t.general_upper = {1.0, true};
      break;
    case TopologyKind::hypercube:
      // The tabulated gap 1/x is the half-lazy chain's; the plain walk's gap
      // is 2/x, so this cell is not reproduced by the eps=0 spectrum.
      t.lower = {1.0 / (static_cast<double>(x) * std::sqrt(2.0 * nd * nm1)), false};
      t.general_upper = {static_cast<double>(x) / nm1, true};
      break;
    case TopologyKind::rgg:
      t.lower = {std::log(nd) / (nd * std::sqrt(2.0 * nd * nm1)), false};
      t.general_upper = {std::log(nd) / nm1, false};
      break;
    default:
      throw SpecError("table1_closed_forms: family not tabulated");
  }
  if (kind != TopologyKind::rgg) {
    t.exact_rate = table1_reference(kind, n, eps);
    t.has_exact_rate = true;
  }
  return t;
}

}  // namespace randcollect
