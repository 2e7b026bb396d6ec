#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "randcollect/bounds.hpp"
#include "randcollect/common.hpp"
#include "randcollect/graph.hpp"
#include "randcollect/simulator.hpp"
#include "randcollect/steady_state.hpp"
#include "randcollect/walk.hpp"

namespace randcollect {

// A fully serializable run description: every command is a pure function of
// one of these, so re-running a spec reproduces its outputs byte for byte.
struct ExperimentSpec {
  TopologySpec topology;
  double eps = 0.0;
  double beta = 0.1;
  std::int64_t horizon = 100000;
  std::int64_t burn_in = 10000;
  std::uint64_t seed = 1;
  std::vector<double> beta_grid;
  double alpha = 2.71828182845904523536;  // latency-bound constant
  std::uint32_t round_cap = 500;
  std::int64_t sample_stride = 0;
  std::size_t subset_cap = kDefaultSubsetCap;
  bool strict = false;        // fail (exit 4) instead of degrading on cap breaches
  bool dump_matrix = false;   // also write the dense transition matrix CSV
};

inline nlohmann::json topology_to_json(const TopologySpec& t) {
  nlohmann::json j;
  j["kind"] = to_string(t.kind);
  if (t.n) j["n"] = t.n;
  if (t.x) j["x"] = t.x;
  if (t.r > 0.0) j["r"] = t.r;
  j["seed"] = t.seed;
  if (t.sink) j["sink"] = *t.sink;
  if (!t.sources.empty()) j["sources"] = t.sources;
  if (!t.path.empty()) j["path"] = t.path;
  return j;
}

inline TopologySpec topology_from_json(const nlohmann::json& j) {
  TopologySpec t;
  if (!j.contains("kind")) throw SpecError("topology: missing 'kind'");
  t.kind = topology_kind_from_string(j.at("kind").get<std::string>());
  t.n = j.value("n", std::size_t{0});
  t.x = j.value("x", 0u);
  t.r = j.value("r", 0.0);
  t.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("sink")) t.sink = j.at("sink").get<NodeId>();
  if (j.contains("sources")) t.sources = j.at("sources").get<std::vector<NodeId>>();
  t.path = j.value("path", std::string{});
  return t;
}

inline nlohmann::json experiment_to_json(const ExperimentSpec& s) {
  nlohmann::json j;
  j["topology"] = topology_to_json(s.topology);
  j["eps"] = s.eps;
  j["beta"] = s.beta;
  j["horizon"] = s.horizon;
  j["burn_in"] = s.burn_in;
  j["seed"] = s.seed;
  if (!s.beta_grid.empty()) j["beta_grid"] = s.beta_grid;
  j["alpha"] = s.alpha;
  j["round_cap"] = s.round_cap;
  if (s.sample_stride) j["sample_stride"] = s.sample_stride;
  j["subset_cap"] = s.subset_cap;
  return j;
}

inline ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  if (!j.contains("topology")) throw SpecError("spec: missing 'topology'");
  s.topology = topology_from_json(j.at("topology"));
  s.eps = j.value("eps", 0.0);
  s.beta = j.value("beta", 0.1);
  s.horizon = j.value("horizon", std::int64_t{100000});
  s.burn_in = j.value("burn_in", std::int64_t{10000});
  s.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("beta_grid")) s.beta_grid = j.at("beta_grid").get<std::vector<double>>();
  s.alpha = j.value("alpha", 2.71828182845904523536);
  s.round_cap = j.value("round_cap", 500u);
  s.sample_stride = j.value("sample_stride", std::int64_t{0});
  s.subset_cap = j.value("subset_cap", kDefaultSubsetCap);
  return s;
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SpecError("cannot open spec file: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("spec file is not valid JSON: ") + e.what());
  }
  return experiment_from_json(j);
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw SpecError("cannot write output file: " + p.string());
  f << content;
}

inline double json_safe(double v) { return v; }  // nlohmann maps NaN/inf to null

}  // namespace detail

// Every command drops the spec it actually ran (flag overrides applied) next
// to its outputs, so a run is reconstructible from the output directory.
inline void write_resolved_spec(const ExperimentSpec& spec, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  detail::write_file(std::filesystem::path(out_dir) / "resolved_spec.json",
                     experiment_to_json(spec).dump(2) + "\n");
}

struct AnalyzeResult {
  RateReport report;
  SpectrumResult spectrum;
  std::vector<double> hitting_to_sink;
  double t_hit = 0.0;
  double alpha_hat = std::numeric_limits<double>::quiet_NaN();
  double h_hat = std::numeric_limits<double>::quiet_NaN();
};

// Spectra, hitting times and the full rate report for one topology, written
// under out_dir as analysis.json + rate_report.csv + hitting_times.csv.
inline AnalyzeResult cmd_analyze(const ExperimentSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const Graph g = build_topology(spec.topology);
  const TransitionMatrix p = srw_matrix(g, spec.eps);
  const StationaryDist dist = stationary_dist(p, g);

  AnalyzeResult res;
  res.report = build_rate_report(g, p, dist, spec.subset_cap);
  res.spectrum = second_eigenvalue(p, dist);
  res.hitting_to_sink = hitting_times_to(p, g.sink());
  res.t_hit = worst_case_hitting_time(p);
  try {
    res.alpha_hat = edge_expansion_hat(g, spec.subset_cap);
  } catch (const CapExceeded&) {
  }
  try {
    res.h_hat = cheeger_hat(p, g.sink(), spec.subset_cap);
  } catch (const CapExceeded&) {
  }
  if (spec.strict && (std::isnan(res.alpha_hat) || std::isnan(res.h_hat)))
    throw CapExceeded("analyze: exact expansion constants unavailable at this size");

  write_resolved_spec(spec, out_dir);
  nlohmann::json j;
  j["topology"] = topology_to_json(spec.topology);
  j["n"] = g.n();
  j["m"] = g.m();
  j["k"] = g.k();
  const DegreeStats ds = degree_stats(g);
  j["d_min"] = ds.d_min;
  j["d_max"] = ds.d_max;
  j["eps"] = spec.eps;
  j["lambda2"] = res.spectrum.lambda2;
  j["spectral_gap"] = res.spectrum.spectral_gap;
  j["eigenvalues"] = res.spectrum.eigenvalues;
  j["pi"] = dist.pi;
  j["beta_star"] = res.report.exact_rate;
  j["srw_lower"] = res.report.srw_lower;
  j["general_lower"] = res.report.general_lower;
  j["general_lower_beta"] = res.report.general_lower_beta;
  j["rc_upper"] = detail::json_safe(res.report.rc_upper);
  j["general_upper"] = detail::json_safe(res.report.general_upper);
  j["alpha_hat"] = detail::json_safe(res.alpha_hat);
  j["h_hat"] = detail::json_safe(res.h_hat);
  j["t_hit"] = res.t_hit;
  j["hitting_to_sink"] = res.hitting_to_sink;
  if (g.family()) {
    try {
      const Table1Rate ref = table1_reference(*g.family(), g.n(), spec.eps);
      j["closed_form_rate"] = {{"value", ref.value},
                               {"is_upper_bound_only", ref.is_upper_bound_only},
                               {"is_exact", ref.is_exact}};
    } catch (const SpecError&) {
    }
  }
  detail::write_file(fs::path(out_dir) / "analysis.json", j.dump(2) + "\n");

  std::string csv = std::string(RateReport::csv_header()) + "\n";
  {
    std::ostringstream os;
    res.report.write_csv_row(os);
    csv += os.str();
  }
  detail::write_file(fs::path(out_dir) / "rate_report.csv", csv);

  std::string ht = "node,hitting_time_to_sink\n";
  for (std::size_t u = 0; u < res.hitting_to_sink.size(); ++u)
    ht += std::to_string(u) + "," + fmt_g12(res.hitting_to_sink[u]) + "\n";
  detail::write_file(fs::path(out_dir) / "hitting_times.csv", ht);

  // occupancy profile at the report's reference rate (half the critical rate)
  {
    const OccupancyVector occ = solve_occupancy(p, g, res.report.general_lower_beta);
    std::ostringstream os;
    write_occupancy_csv(os, occ);
    detail::write_file(fs::path(out_dir) / "occupancy.csv", os.str());
  }

  if (spec.dump_matrix) {
    std::ostringstream os;
    p.write_csv(os);
    detail::write_file(fs::path(out_dir) / "transition_matrix.csv", os.str());
  }
  return res;
}

struct SimulateResult {
  Metrics metrics;
  Verdict verdict = Verdict::inconclusive;
};

inline SimConfig make_sim_config(const ExperimentSpec& spec) {
  Graph g = build_topology(spec.topology);
  TransitionMatrix p = srw_matrix(g, spec.eps);
  SimConfig cfg(std::move(g), std::move(p));
  cfg.beta = spec.beta;
  cfg.horizon = spec.horizon;
  cfg.burn_in = spec.burn_in;
  cfg.seed = spec.seed;
  cfg.round_cap = spec.round_cap;
  cfg.sample_stride = spec.sample_stride;
  return cfg;
}

inline SimulateResult cmd_simulate(const ExperimentSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const SimConfig cfg = make_sim_config(spec);
  SimulateResult res;
  res.metrics = run(cfg);
  res.verdict = stability_probe(res.metrics, cfg);
  const Metrics& m = res.metrics;

  write_resolved_spec(spec, out_dir);
  std::string pn = "node,eta_hat,p_ge2,drift_hat\n";
  for (std::size_t u = 0; u < m.per_node.size(); ++u) {
    const NodeStats& s = m.per_node[u];
    pn += std::to_string(u) + "," + fmt_g12(s.eta_hat) + "," + fmt_g12(s.p_ge2) + "," +
          fmt_g12(s.drift_hat) + "\n";
  }
  detail::write_file(fs::path(out_dir) / "per_node.csv", pn);

  std::string sm = "beta,throughput_hat,c_hat,eps_hat,tau_bar_hat,verdict\n";
  sm += fmt_g12(cfg.beta) + "," + fmt_g12(m.throughput_hat) + "," + fmt_g12(m.c_hat) + "," +
        fmt_g12(m.eps_hat) + "," + fmt_g12(m.tau_bar_hat) + "," + to_string(res.verdict) + "\n";
  detail::write_file(fs::path(out_dir) / "summary.csv", sm);

  std::string tr = "slot,max_queue,total_queue\n";
  for (const TrajectorySample& t : m.trajectory)
    tr += std::to_string(t.slot) + "," + std::to_string(t.max_queue) + "," +
          std::to_string(t.total_queue) + "\n";
  detail::write_file(fs::path(out_dir) / "trajectory.csv", tr);

  std::string rd = "round,collect_time\n";
  for (std::size_t r = 0; r < m.round_collect_time.size(); ++r)
    rd += std::to_string(r + 1) + "," + std::to_string(m.round_collect_time[r]) + "\n";
  detail::write_file(fs::path(out_dir) / "rounds.csv", rd);

  nlohmann::json j;
  j["beta"] = cfg.beta;
  j["horizon"] = cfg.horizon;
  j["burn_in"] = cfg.burn_in;
  j["seed"] = cfg.seed;
  j["verdict"] = to_string(res.verdict);
  j["eta_hat_max"] = m.eta_hat_max;
  j["eta_hat_max_se"] = m.eta_hat_max_se;
  j["c_hat"] = m.c_hat;
  j["c_hat_se"] = m.c_hat_se;
  j["eps_hat"] = m.eps_hat;
  j["throughput_hat"] = m.throughput_hat;
  j["generated_total"] = m.generated_total;
  j["absorbed_total"] = m.absorbed_total;
  j["final_total_queue"] = m.final_total_queue;
  j["rounds_completed"] = m.rounds_completed;
  j["tau_bar_hat"] = m.tau_bar_hat;
  j["tau_bar_se"] = m.tau_bar_se;
  j["completion_per_round"] = m.completion_per_round;
  j["max_queue_slope"] = m.max_queue_slope;
  j["total_queue_slope"] = m.total_queue_slope;
  j["conservation_ok"] = m.conservation_ok;
  j["single_tx_ok"] = m.single_tx_ok;
  // closed-form latency bound at the measured delay probability
  if (cfg.beta > 0.0) {
    const double t_hit = worst_case_hitting_time(cfg.p);
    j["t_hit"] = t_hit;
    j["latency_bound_alpha"] = spec.alpha;
    j["latency_bound"] =
        latency_upper_bound(cfg.graph.k(), cfg.beta, t_hit, std::min(m.c_hat, 1.0), spec.alpha);
  }
  detail::write_file(fs::path(out_dir) / "sim_stats.json", j.dump(2) + "\n");
  return res;
}

inline SweepResult cmd_sweep(const ExperimentSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (spec.beta_grid.empty()) throw SpecError("sweep: beta_grid is empty");
  const SimConfig base = make_sim_config(spec);
  SweepResult res = beta_sweep(base, spec.beta_grid);

  write_resolved_spec(spec, out_dir);
  std::string csv =
      "beta,verdict,throughput_hat,eta_hat_max,c_hat,c_hat_se,eps_hat,tau_bar_hat,"
      "max_queue_slope\n";
  for (const SweepPoint& p : res.points) {
    const Metrics& m = p.metrics;
    csv += fmt_g12(p.beta) + "," + to_string(p.verdict) + "," + fmt_g12(m.throughput_hat) +
           "," + fmt_g12(m.eta_hat_max) + "," + fmt_g12(m.c_hat) + "," + fmt_g12(m.c_hat_se) +
           "," + fmt_g12(m.eps_hat) + "," + fmt_g12(m.tau_bar_hat) + "," +
           fmt_g12(m.max_queue_slope) + "\n";
  }
  detail::write_file(fs::path(out_dir) / "sweep.csv", csv);

  nlohmann::json j;
  j["degenerate"] = res.degenerate();
  if (res.last_stable) j["last_stable"] = *res.last_stable;
  if (res.first_unstable) j["first_unstable"] = *res.first_unstable;
  detail::write_file(fs::path(out_dir) / "sweep_summary.json", j.dump(2) + "\n");
  return res;
}

struct Table1Row {
  TopologyKind family = TopologyKind::cycle;
  std::size_t n = 0;
  std::size_t k = 0;
  double eps = 0.0;
  Table1ClosedForms closed;
  RateReport computed;
};

// Mirrors the rate table: per family and size, the closed-form lower bound,
// exact rate, and general upper bound next to the solver-computed values.
// Star-center rows use the spec's laziness; everything else runs the plain
// walk. Hypercube rows snap n to the nearest power of two.
inline std::vector<Table1Row> cmd_reproduce_table1(const std::vector<std::size_t>& n_list,
                                                   const ExperimentSpec& spec,
                                                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  const TopologyKind families[] = {TopologyKind::cycle, TopologyKind::star_center_sink,
                                   TopologyKind::star_outer_sink, TopologyKind::complete,
                                   TopologyKind::hypercube, TopologyKind::rgg};
  std::vector<Table1Row> rows;
  for (std::size_t n : n_list) {
    for (TopologyKind fam : families) {
      Table1Row row;
      row.family = fam;
      row.eps = fam == TopologyKind::star_center_sink ? spec.eps : 0.0;
      TopologySpec ts;
      ts.kind = fam;
      if (fam == TopologyKind::hypercube) {
        unsigned x = 1;
        while ((1ull << (x + 1)) <= n) ++x;
        ts.x = x;
        ts.n = 1ull << x;
      } else {
        ts.n = n;
      }
      if (fam == TopologyKind::rgg) ts.seed = spec.seed;
      const Graph g = build_topology(ts);
      row.n = g.n();
      row.k = g.k();
      const TransitionMatrix p = srw_matrix(g, row.eps);
      const StationaryDist dist = stationary_dist(p, g);
      row.computed = build_rate_report(g, p, dist, spec.subset_cap);
      row.closed = table1_closed_forms(fam, g.n(), row.eps);
      rows.push_back(std::move(row));
    }
  }

  write_resolved_spec(spec, out_dir);
  std::string csv =
      "family,n,k,eps,lower_closed,lower_closed_exact,srw_lower,exact_closed,"
      "exact_closed_kind,beta_star,upper_closed,upper_closed_exact,general_upper\n";
  for (const Table1Row& r : rows) {
    const char* kind = !r.closed.has_exact_rate ? "none"
                       : r.closed.exact_rate.is_upper_bound_only
                           ? "bound"
                           : (r.closed.exact_rate.is_exact ? "exact" : "approx");
    const double exact_closed = r.closed.has_exact_rate
                                    ? r.closed.exact_rate.value
                                    : std::numeric_limits<double>::quiet_NaN();
    csv += std::string(to_string(r.family)) + "," + std::to_string(r.n) + "," +
           std::to_string(r.k) + "," + fmt_g12(r.eps) + "," + fmt_g12(r.closed.lower.value) +
           "," + (r.closed.lower.exact ? "1" : "0") + "," + fmt_g12(r.computed.srw_lower) +
           "," + fmt_g12(exact_closed) + "," + kind + "," + fmt_g12(r.computed.exact_rate) +
           "," + fmt_g12(r.closed.general_upper.value) + "," +
           (r.closed.general_upper.exact ? "1" : "0") + "," +
           fmt_g12(r.computed.general_upper) + "\n";
  }
  detail::write_file(fs::path(out_dir) / "table1.csv", csv);
  return rows;
}

}  // namespace randcollect
