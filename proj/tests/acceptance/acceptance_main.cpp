// Acceptance suite: one check per numbered criterion, each printing a single
// [PASS]/[FAIL] line with the measured numbers. Run all, or one with
// --criterion N. Exit code is the number of failing criteria (capped at 1 for
// ctest's purposes).

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "randcollect/randcollect.hpp"

using namespace randcollect;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

Graph family(TopologyKind kind, std::size_t n, unsigned x = 0) {
  TopologySpec s;
  s.kind = kind;
  s.n = n;
  s.x = x;
  return build_topology(s);
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

struct CheckResult {
  bool pass = true;
  std::ostringstream detail;
};

void expect(CheckResult& r, bool ok, const std::string& what) {
  if (!ok) {
    r.pass = false;
    r.detail << (r.detail.str().empty() ? "" : "; ") << what;
  }
}

SimConfig sim_config(Graph g, double eps, double beta, std::int64_t horizon,
                     std::int64_t burn_in, std::uint64_t seed) {
  TransitionMatrix p = srw_matrix(g, eps);
  SimConfig cfg(std::move(g), std::move(p));
  cfg.beta = beta;
  cfg.horizon = horizon;
  cfg.burn_in = burn_in;
  cfg.seed = seed;
  return cfg;
}

// ---------------------------------------------------------------------------
// 1. Exact critical rates against the closed forms, < 1 s.
CheckResult criterion1() {
  CheckResult r;
  const double t0 = now_seconds();
  const auto check = [&](TopologyKind kind, std::size_t n, double eps, double want,
                         const char* label) {
    const Graph g = family(kind, n);
    const double got = critical_rate(srw_matrix(g, eps), g);
    expect(r, rel_err(got, want) <= 1e-9,
           std::string(label) + " got " + fmt_g12(got) + " want " + fmt_g12(want));
  };
  for (std::size_t n : {6u, 8u, 10u, 16u})
    check(TopologyKind::cycle, n, 0.0, 4.0 / (static_cast<double>(n) * n),
          ("cycle n=" + std::to_string(n)).c_str());
  for (std::size_t n : {4u, 5u, 10u})
    check(TopologyKind::complete, n, 0.0, 1.0 / (n - 1.0),
          ("complete n=" + std::to_string(n)).c_str());
  for (std::size_t n : {5u, 10u})
    check(TopologyKind::star_outer_sink, n, 0.0, 1.0 / ((n - 1.0) * (n - 1.0)),
          ("star_outer n=" + std::to_string(n)).c_str());
  check(TopologyKind::star_center_sink, 5, 0.01, 0.99, "star_center n=5 eps=0.01");
  const double dt = now_seconds() - t0;
  expect(r, dt < 1.0, "runtime " + fmt_g12(dt) + "s exceeds 1s");
  if (r.pass) r.detail << "all rates within 1e-9, " << fmt_g12(dt) << "s";
  return r;
}

// ---------------------------------------------------------------------------
// 2. Second eigenvalues, < 1 s. The tabulated hypercube gap 1/x belongs to
// the half-lazy chain, so that case is evaluated at eps = 1/2.
CheckResult criterion2() {
  CheckResult r;
  const double t0 = now_seconds();
  const auto lambda2_of = [](const Graph& g, double eps) {
    const TransitionMatrix p = srw_matrix(g, eps);
    return second_eigenvalue(p, stationary_dist(p, g)).lambda2;
  };
  for (std::size_t n : {5u, 10u}) {
    const double got = lambda2_of(family(TopologyKind::complete, n), 0.0);
    expect(r, std::abs(got + 1.0 / (n - 1.0)) <= 1e-8,
           "complete n=" + std::to_string(n) + " lambda2 " + fmt_g12(got));
  }
  for (unsigned x : {3u, 4u}) {
    const double got = lambda2_of(family(TopologyKind::hypercube, 0, x), 0.5);
    expect(r, std::abs(got - (1.0 - 1.0 / x)) <= 1e-8,
           "hypercube x=" + std::to_string(x) + " half-lazy lambda2 " + fmt_g12(got));
  }
  const double star = lambda2_of(family(TopologyKind::star_center_sink, 10), 0.0);
  expect(r, std::abs(star) <= 1e-8, "star lambda2 " + fmt_g12(star));
  const double dt = now_seconds() - t0;
  expect(r, dt < 1.0, "runtime " + fmt_g12(dt) + "s exceeds 1s");
  if (r.pass) r.detail << "all spectra within 1e-8, " << fmt_g12(dt) << "s";
  return r;
}

// ---------------------------------------------------------------------------
// 3. Bound ordering srw_lower <= exact <= rc_upper <= general_upper on every
// tabulated family at n=10 (hypercube x=3), < 5 s. Note: the outer-sink star
// genuinely violates the first leg (its closed-form spectral lower bound
// 1/sqrt(2n(n-1)^2) exceeds the exact rate 1/(n-1)^2 for n >= 4), so this
// criterion reports that discrepancy rather than hiding it.
CheckResult criterion3() {
  CheckResult r;
  const double t0 = now_seconds();
  struct Case {
    TopologyKind kind;
    std::size_t n;
    unsigned x;
    double eps;
  };
  const Case cases[] = {{TopologyKind::cycle, 10, 0, 0.0},
                        {TopologyKind::star_center_sink, 10, 0, 0.01},
                        {TopologyKind::star_outer_sink, 10, 0, 0.0},
                        {TopologyKind::complete, 10, 0, 0.0},
                        {TopologyKind::hypercube, 0, 3, 0.0}};
  for (const Case& c : cases) {
    const Graph g = family(c.kind, c.n, c.x);
    const TransitionMatrix p = srw_matrix(g, c.eps);
    const RateReport rep = build_rate_report(g, p, stationary_dist(p, g));
    const std::string label = rep.topology + " n=" + std::to_string(rep.n);
    expect(r, rep.srw_lower <= rep.exact_rate * (1 + 1e-12),
           label + ": srw_lower " + fmt_g12(rep.srw_lower) + " > exact " +
               fmt_g12(rep.exact_rate));
    expect(r, rep.exact_rate <= rep.rc_upper * (1 + 1e-12),
           label + ": exact " + fmt_g12(rep.exact_rate) + " > rc_upper " +
               fmt_g12(rep.rc_upper));
    expect(r, rep.rc_upper <= rep.general_upper * (1 + 1e-12),
           label + ": rc_upper " + fmt_g12(rep.rc_upper) + " > general_upper " +
               fmt_g12(rep.general_upper));
    if (c.kind == TopologyKind::complete)
      expect(r, rep.exact_rate / rep.srw_lower <= 2.0,
             label + ": exact/srw_lower " + fmt_g12(rep.exact_rate / rep.srw_lower) + " > 2");
  }
  const double dt = now_seconds() - t0;
  expect(r, dt < 5.0, "runtime " + fmt_g12(dt) + "s exceeds 5s");
  if (r.pass) r.detail << "ordering holds on all families, " << fmt_g12(dt) << "s";
  return r;
}

// ---------------------------------------------------------------------------
// 4. Hypercube critical rate is contained by its closed-form bound.
CheckResult criterion4() {
  CheckResult r;
  for (unsigned x : {3u, 4u}) {
    const Graph g = family(TopologyKind::hypercube, 0, x);
    const double got = critical_rate(srw_matrix(g), g);
    const double bound = 5.0 / (static_cast<double>(x) * std::pow(1.5, x));
    expect(r, got <= bound * (1 + 1e-12),
           "x=" + std::to_string(x) + " beta* " + fmt_g12(got) + " > bound " + fmt_g12(bound));
    if (r.pass)
      r.detail << (x == 3 ? "" : "; ") << "x=" << x << ": " << fmt_g12(got)
               << " <= " << fmt_g12(bound);
  }
  return r;
}

// ---------------------------------------------------------------------------
// 5. Solver vs simulator at beta = beta*/2, horizon 1e6.
CheckResult criterion5() {
  CheckResult r;
  struct Case {
    TopologyKind kind;
    std::size_t n;
    unsigned x;
    double eps;
  };
  const Case cases[] = {{TopologyKind::cycle, 10, 0, 0.0},
                        {TopologyKind::star_center_sink, 10, 0, 0.01},
                        {TopologyKind::star_outer_sink, 10, 0, 0.0},
                        {TopologyKind::complete, 10, 0, 0.0},
                        {TopologyKind::hypercube, 0, 3, 0.0}};
  for (const Case& c : cases) {
    Graph g = family(c.kind, c.n, c.x);
    const TransitionMatrix p = srw_matrix(g, c.eps);
    const double beta = 0.5 * critical_rate(p, g);
    const OccupancyVector occ = solve_occupancy(p, g, beta);
    const std::string label =
        std::string(to_string(c.kind)) + " n=" + std::to_string(g.n());
    const std::size_t k = g.k();
    SimConfig cfg = sim_config(std::move(g), c.eps, beta, 1000000, 10000, 0xC5 + c.n + c.x);
    const Metrics m = run(cfg);
    double worst = 0.0;
    for (NodeId u = 0; u < cfg.graph.n(); ++u)
      worst = std::max(worst, std::abs(m.per_node[u].eta_hat - occ.eta[u]));
    expect(r, worst <= 0.02, label + ": max |eta_hat - eta| " + fmt_g12(worst) + " > 0.02");
    const double thr_rel = std::abs(m.throughput_hat - k * beta) / (k * beta);
    expect(r, thr_rel <= 0.01,
           label + ": throughput rel err " + fmt_g12(thr_rel) + " > 0.01");
    expect(r, m.conservation_ok && m.single_tx_ok, label + ": engine invariant tripped");
    if (r.pass)
      r.detail << label << " deta=" << fmt_g12(worst) << " dthr=" << fmt_g12(thr_rel) << "; ";
  }
  return r;
}

// ---------------------------------------------------------------------------
// 6. Stability threshold: the sweep brackets beta* within 10% and the probe
// is decisive at 0.8/1.2 beta*.
CheckResult criterion6() {
  CheckResult r;
  struct Case {
    TopologyKind kind;
    std::size_t n;
    double beta_star;
  };
  const Case cases[] = {{TopologyKind::complete, 5, 0.25}, {TopologyKind::cycle, 10, 0.04}};
  const double mults[] = {0.6, 0.8, 0.9, 0.95, 1.05, 1.1, 1.2, 1.4};
  for (const Case& c : cases) {
    std::vector<double> grid;
    for (double mlt : mults) grid.push_back(mlt * c.beta_star);
    SimConfig base = sim_config(family(c.kind, c.n), 0.0, 0.0, 1000000, 10000, 0xB6 + c.n);
    const SweepResult sweep = beta_sweep(base, grid);
    const std::string label = std::string(to_string(c.kind)) + " n=" + std::to_string(c.n);

    for (const SweepPoint& pt : sweep.points) {
      if (std::abs(pt.beta - 0.8 * c.beta_star) < 1e-12)
        expect(r, pt.verdict == Verdict::stable,
               label + ": verdict at 0.8 beta* is " + to_string(pt.verdict));
      if (std::abs(pt.beta - 1.2 * c.beta_star) < 1e-12)
        expect(r, pt.verdict == Verdict::unstable,
               label + ": verdict at 1.2 beta* is " + to_string(pt.verdict));
    }
    expect(r, !sweep.degenerate(), label + ": degenerate bracket");
    if (!sweep.degenerate()) {
      expect(r, *sweep.last_stable < c.beta_star && c.beta_star < *sweep.first_unstable,
             label + ": bracket misses beta*");
      expect(r, *sweep.last_stable >= 0.9 * c.beta_star * (1 - 1e-12),
             label + ": last stable " + fmt_g12(*sweep.last_stable) + " below 0.9 beta*");
      expect(r, *sweep.first_unstable <= 1.1 * c.beta_star * (1 + 1e-12),
             label + ": first unstable " + fmt_g12(*sweep.first_unstable) + " above 1.1 beta*");
      if (r.pass)
        r.detail << label << " bracket [" << fmt_g12(*sweep.last_stable) << ", "
                 << fmt_g12(*sweep.first_unstable) << "]; ";
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// 7. Occupancy statistics are monotone in beta across the stable regime, up
// to overlapping 95% confidence intervals.
CheckResult criterion7() {
  CheckResult r;
  const double beta_star = 0.25;
  const double mults[] = {0.2, 0.4, 0.6, 0.8};
  struct Point {
    double eta, eta_se, c, c_se, eps;
  };
  std::vector<Point> pts;
  for (double mlt : mults) {
    SimConfig cfg =
        sim_config(family(TopologyKind::complete, 5), 0.0, mlt * beta_star, 1000000, 10000,
                   0xA7 + static_cast<std::uint64_t>(mlt * 100));
    const Metrics m = run(cfg);
    pts.push_back({m.eta_hat_max, m.eta_hat_max_se, m.c_hat, m.c_hat_se, m.eps_hat});
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double eta_slack = 1.96 * (pts[i - 1].eta_se + pts[i].eta_se);
    const double c_slack = 1.96 * (pts[i - 1].c_se + pts[i].c_se);
    expect(r, pts[i].eta >= pts[i - 1].eta - eta_slack,
           "eta_hat decreased: " + fmt_g12(pts[i - 1].eta) + " -> " + fmt_g12(pts[i].eta));
    expect(r, pts[i].c >= pts[i - 1].c - c_slack,
           "c_hat decreased: " + fmt_g12(pts[i - 1].c) + " -> " + fmt_g12(pts[i].c));
    expect(r, pts[i].eps <= pts[i - 1].eps + eta_slack,
           "eps_hat increased: " + fmt_g12(pts[i - 1].eps) + " -> " + fmt_g12(pts[i].eps));
  }
  if (r.pass) {
    r.detail << "eta_hat ";
    for (const Point& p : pts) r.detail << fmt_g12(p.eta) << " ";
    r.detail << "| c_hat ";
    for (const Point& p : pts) r.detail << fmt_g12(p.c) << " ";
  }
  return r;
}

// ---------------------------------------------------------------------------
// 8. Latency: per-round collection time is finite, grows with the source
// count no faster than log(ek) times a constant fitted at the smallest k,
// and grows with beta toward the critical rate. The analytic constants are
// not identifiable, so the closed-form latency bound is reported with a
// fitted alpha, not gated.
CheckResult criterion8() {
  CheckResult r;
  struct Point {
    std::size_t k;
    double beta, tau, tau_se, completion, t_hit, c_hat;
  };
  std::vector<Point> pts;
  for (std::size_t k : {2u, 4u, 8u}) {
    Graph g = family(TopologyKind::complete, 10);
    std::vector<NodeId> sources;
    for (NodeId u = 1; u <= k; ++u) sources.push_back(u);
    g = g.with_sources(sources);
    const TransitionMatrix p = srw_matrix(g);
    const double beta = 0.5 * critical_rate(p, g);
    const double t_hit = worst_case_hitting_time(p);
    SimConfig cfg = sim_config(std::move(g), 0.0, beta, 400000, 0, 0xD8 + k);
    const Metrics m = run(cfg);
    expect(r, m.rounds_completed >= 300,
           "k=" + std::to_string(k) + ": only " + std::to_string(m.rounds_completed) +
               " rounds completed");
    expect(r, std::isfinite(m.tau_bar_hat) && m.tau_bar_hat > 0.0,
           "k=" + std::to_string(k) + ": tau_bar not finite");
    pts.push_back({k, beta, m.tau_bar_hat, m.tau_bar_se, m.completion_per_round, t_hit,
                   m.c_hat});
  }
  const auto log_ek = [](std::size_t k) { return 1.0 + std::log(static_cast<double>(k)); };
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double ratio = pts[i].tau / pts[0].tau;
    const double envelope = log_ek(pts[i].k) / log_ek(pts[0].k);
    expect(r, ratio <= envelope * 1.3,
           "k=" + std::to_string(pts[i].k) + ": tau ratio " + fmt_g12(ratio) +
               " exceeds 1.3 * log(ek) ratio " + fmt_g12(envelope));
  }
  r.detail << "tau_bar(k):";
  for (const Point& p : pts) r.detail << " k=" << p.k << " " << fmt_g12(p.tau);
  // closed-form sanity report: completion-per-round against the envelope
  // log(ek) (1/beta + t_hit/(1-c)), with the implied alpha printed
  r.detail << " | fitted alpha:";
  for (const Point& p : pts) {
    const double env = log_ek(p.k) * (1.0 / p.beta + p.t_hit / (1.0 - std::min(p.c_hat, 0.999)));
    r.detail << " " << fmt_g12(p.completion / env);
  }

  // rate-latency trade-off on the fixed topology
  std::vector<std::pair<double, double>> curve;  // (tau, se)
  for (double mlt : {0.3, 0.5, 0.7, 0.85}) {
    SimConfig cfg = sim_config(family(TopologyKind::complete, 5), 0.0, mlt * 0.25, 400000, 0,
                               0xE8 + static_cast<std::uint64_t>(mlt * 100));
    const Metrics m = run(cfg);
    expect(r, m.rounds_completed >= 300, "beta sweep point lost rounds");
    curve.emplace_back(m.tau_bar_hat, m.tau_bar_se);
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double slack = 1.96 * (curve[i - 1].second + curve[i].second);
    expect(r, curve[i].first >= curve[i - 1].first - slack,
           "tau_bar not increasing toward beta*: " + fmt_g12(curve[i - 1].first) + " -> " +
               fmt_g12(curve[i].first));
  }
  r.detail << " | tau_bar(beta):";
  for (const auto& [tau, se] : curve) r.detail << " " << fmt_g12(tau);
  return r;
}

// ---------------------------------------------------------------------------
// 9. Engine invariants: exact packet conservation, the single-transmission
// guard never fires, reruns are bit-identical.
CheckResult criterion9() {
  CheckResult r;
  SimConfig stable = sim_config(family(TopologyKind::complete, 5), 0.0, 0.2, 200000, 5000, 0x91);
  const Metrics a = run(stable);
  const Metrics b = run(stable);
  expect(r, a.conservation_ok, "conservation violated on the stable run");
  expect(r, a.single_tx_ok, "single-transmission assertion fired");
  bool identical = a.generated_total == b.generated_total &&
                   a.absorbed_total == b.absorbed_total &&
                   a.throughput_hat == b.throughput_hat &&
                   a.round_collect_time == b.round_collect_time &&
                   a.trajectory.size() == b.trajectory.size();
  for (std::size_t i = 0; identical && i < a.trajectory.size(); ++i)
    identical = a.trajectory[i].total_queue == b.trajectory[i].total_queue;
  for (NodeId u = 0; identical && u < 5; ++u)
    identical = a.per_node[u].eta_hat == b.per_node[u].eta_hat &&
                a.per_node[u].drift_hat == b.per_node[u].drift_hat;
  expect(r, identical, "rerun with the same seed diverged");

  SimConfig overload = sim_config(family(TopologyKind::cycle, 10), 0.0, 0.06, 200000, 5000, 0x92);
  const Metrics c = run(overload);
  expect(r, c.conservation_ok && c.single_tx_ok, "invariants tripped under overload");
  if (r.pass)
    r.detail << "conservation exact over " << (a.generated_total + c.generated_total)
             << " packets, reruns identical";
  return r;
}

// ---------------------------------------------------------------------------
// 10. Linear-solve hitting times against an independent Monte Carlo
// estimator within 3 standard errors.
CheckResult criterion10() {
  CheckResult r;
  // estimator deliberately separate from the engine: plain mt19937_64 walk
  const auto mc = [](const Graph& g, NodeId start, NodeId target, int walks,
                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (int w = 0; w < walks; ++w) {
      NodeId at = start;
      std::int64_t steps = 0;
      while (at != target) {
        ++steps;
        const auto& nb = g.neighbors(at);
        std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
        at = nb[pick(rng)];
      }
      sum += static_cast<double>(steps);
      sum_sq += static_cast<double>(steps) * steps;
    }
    const double mean = sum / walks;
    const double var = (sum_sq - sum * sum / walks) / (walks - 1);
    return std::pair<double, double>(mean, std::sqrt(var / walks));
  };

  const Graph c8 = family(TopologyKind::cycle, 8);
  const auto h8 = hitting_times_to(srw_matrix(c8), 0);
  for (NodeId j : {1u, 2u, 3u, 4u}) {
    const auto [mean, se] = mc(c8, j, 0, 20000, 0x10A + j);
    expect(r, std::abs(h8[j] - mean) <= 3.0 * se,
           "cycle start " + std::to_string(j) + ": solver " + fmt_g12(h8[j]) + " vs mc " +
               fmt_g12(mean) + " +- " + fmt_g12(se));
  }
  const Graph k5 = family(TopologyKind::complete, 5);
  const auto h5 = hitting_times_to(srw_matrix(k5), 0);
  const auto [mean, se] = mc(k5, 2, 0, 20000, 0x10F);
  expect(r, std::abs(h5[2] - mean) <= 3.0 * se,
         "complete: solver " + fmt_g12(h5[2]) + " vs mc " + fmt_g12(mean));
  if (r.pass) r.detail << "all hitting times within 3 standard errors";
  return r;
}

struct Criterion {
  int id;
  const char* name;
  std::function<CheckResult()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  const std::vector<Criterion> criteria = {
      {1, "exact-rate closed forms", criterion1},
      {2, "spectral oracle", criterion2},
      {3, "bound ordering", criterion3},
      {4, "hypercube bound containment", criterion4},
      {5, "solver-simulator agreement", criterion5},
      {6, "stability threshold", criterion6},
      {7, "occupancy monotonicity", criterion7},
      {8, "latency properties", criterion8},
      {9, "engine invariants", criterion9},
      {10, "hitting-time oracle", criterion10},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const CheckResult res = c.fn();
    std::cout << (res.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.name
              << " — " << res.detail.str() << "\n";
    if (!res.pass) ++failures;
  }
  return failures > 0 ? 1 : 0;
}
