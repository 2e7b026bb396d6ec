#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "randcollect/common.hpp"
#include "randcollect/graph.hpp"
#include "randcollect/rng.hpp"
#include "randcollect/walk.hpp"

namespace randcollect {

struct Packet {
  NodeId source = 0;
  std::uint32_t round = 0;      // per-source arrival counter, 1-based
  std::int64_t birth_slot = 0;
};

struct SimConfig {
  Graph graph;
  TransitionMatrix p;
  double beta = 0.0;
  std::int64_t horizon = 0;
  std::int64_t burn_in = 0;
  std::uint64_t seed = 0;
  std::uint32_t round_cap = 500;   // latency bookkeeping stops after this many rounds
  std::int64_t sample_stride = 0;  // 0: aim for ~512 trajectory samples

  SimConfig(Graph g, TransitionMatrix t) : graph(std::move(g)), p(std::move(t)) {}

  void validate() const {
    if (p.n != graph.n()) throw SpecError("sim: matrix/graph size mismatch");
    if (beta < 0.0 || beta > 1.0) throw SpecError("sim: beta must be in [0,1]");
    if (horizon <= 0) throw SpecError("sim: horizon must be positive");
    if (burn_in < 0 || burn_in >= horizon) throw SpecError("sim: need 0 <= burn_in < horizon");
  }
};

struct NodeStats {
  double eta_hat = 0.0;    // P(Q > 0) over measured slots
  double p_ge2 = 0.0;      // P(Q >= 2)
  double p_empty = 1.0;    // P(Q = 0)
  double drift_hat = 0.0;  // mean Q_{t+1} - Q_t over occupied measured slots
  std::int64_t drift_samples = 0;
};

struct TrajectorySample {
  std::int64_t slot = 0;
  std::int64_t max_queue = 0;
  std::int64_t total_queue = 0;
};

struct Metrics {
  std::vector<NodeStats> per_node;
  double eta_hat_max = 0.0;
  double eta_hat_max_se = 0.0;
  double c_hat = 0.0;  // max over nodes of P(Q >= 2)
  double c_hat_se = 0.0;
  double eps_hat = 1.0;  // min over non-sink nodes of P(Q = 0)
  double throughput_hat = 0.0;
  std::int64_t measured_slots = 0;
  std::int64_t generated_total = 0;
  std::int64_t absorbed_total = 0;
  std::int64_t final_total_queue = 0;

  std::uint32_t rounds_completed = 0;               // complete prefix length
  std::vector<std::int64_t> round_collect_time;     // per round, 1..rounds_completed
  double tau_bar_hat = 0.0;                         // mean per-round collection time
  double tau_bar_se = 0.0;
  double completion_per_round = 0.0;                // completion slot of round l over l

  std::vector<TrajectorySample> trajectory;
  double max_queue_slope = 0.0;    // packets/slot, post-burn-in regression
  double total_queue_slope = 0.0;

  bool conservation_ok = true;
  bool single_tx_ok = true;
};

namespace detail {

inline double regression_slope(const std::vector<TrajectorySample>& samples,
                               std::int64_t from_slot, bool use_max) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::int64_t cnt = 0;
  for (const auto& s : samples) {
    if (s.slot < from_slot) continue;
    const double x = static_cast<double>(s.slot);
    const double y = static_cast<double>(use_max ? s.max_queue : s.total_queue);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) return 0.0;
  const double nd = static_cast<double>(cnt);
  const double denom = sxx - sx * sx / nd;
  if (denom <= 0.0) return 0.0;
  return (sxy - sx * sy / nd) / denom;
}

inline std::pair<double, double> batch_mean_se(const std::vector<std::int64_t>& hits,
                                               const std::vector<std::int64_t>& slots) {
  const std::size_t b = hits.size();
  std::vector<double> means;
  means.reserve(b);
  for (std::size_t i = 0; i < b; ++i)
    if (slots[i] > 0) means.push_back(static_cast<double>(hits[i]) / static_cast<double>(slots[i]));
  if (means.size() < 2) return {means.empty() ? 0.0 : means[0], 0.0};
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(means.size());
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  var /= static_cast<double>(means.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(means.size()))};
}

}  // namespace detail

// One slot-synchronous run. Per slot: (1) every non-sink node with a
// nonempty start-of-slot queue picks one queued packet uniformly at random
// and a destination from its transition row, all against start-of-slot
// state (simultaneous full-duplex send/receive, multi-reception allowed;
// a self-loop draw keeps the packet but still spends the node's one
// transmission); (2) deliveries land, the sink absorbing instantly;
// (3) each source draws Bernoulli(beta) and on success appends a fresh
// packet stamped with its next round index. Fully deterministic for a
// fixed config, including the seed.
inline Metrics run(const SimConfig& cfg) {
  cfg.validate();
  const Graph& g = cfg.graph;
  const std::size_t n = g.n();
  const NodeId sink = g.sink();
  const CounterRng rng{cfg.seed};
  const std::int64_t window = cfg.horizon - cfg.burn_in;
  const std::int64_t stride =
      cfg.sample_stride > 0 ? cfg.sample_stride : std::max<std::int64_t>(1, cfg.horizon / 512);

  // per-node destination tables: cumulative mass over {self} ∪ neighbors
  std::vector<std::vector<std::pair<double, NodeId>>> dest_cum(n);
  for (NodeId u = 0; u < n; ++u) {
    if (u == sink) continue;
    double acc = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      const double w = cfg.p(u, v);
      if (w > 0.0) {
        acc += w;
        dest_cum[u].emplace_back(acc, v);
      }
    }
    if (dest_cum[u].empty() || std::abs(acc - 1.0) > 1e-9)
      throw SpecError("sim: transition row does not sum to 1");
  }

  std::vector<std::vector<Packet>> queues(n);
  std::vector<std::int64_t> prev_size(n, 0);
  struct Staged {
    NodeId to;
    Packet packet;
  };
  std::vector<Staged> staged;
  std::vector<char> sent(n, 0);

  Metrics m;
  m.per_node.resize(n);
  std::vector<std::int64_t> occ_cnt(n, 0), ge2_cnt(n, 0);
  std::vector<double> drift_sum(n, 0.0);
  std::vector<std::int64_t> drift_cnt(n, 0);

  constexpr std::size_t kBatches = 32;
  std::vector<std::vector<std::int64_t>> occ_batch(n, std::vector<std::int64_t>(kBatches, 0));
  std::vector<std::vector<std::int64_t>> ge2_batch(n, std::vector<std::int64_t>(kBatches, 0));
  std::vector<std::int64_t> batch_slots(kBatches, 0);

  // round bookkeeping, rounds 1..round_cap
  const std::size_t k = g.sources().size();
  const std::uint32_t cap = cfg.round_cap;
  std::vector<std::uint32_t> src_round(n, 0);
  std::vector<std::uint32_t> appear_cnt(cap + 1, 0), absorb_cnt(cap + 1, 0);
  std::vector<std::int64_t> last_appear(cap + 1, -1), last_absorb(cap + 1, -1);

  std::int64_t absorbed_measured = 0;

  for (std::int64_t slot = 0; slot < cfg.horizon; ++slot) {
    const bool measuring = slot >= cfg.burn_in;
    std::size_t batch = 0;
    if (measuring)
      batch = std::min<std::size_t>(
          kBatches - 1, static_cast<std::size_t>((slot - cfg.burn_in) * static_cast<std::int64_t>(kBatches) / window));

    if (slot % stride == 0) {
      std::int64_t mx = 0, tot = 0;
      for (NodeId u = 0; u < n; ++u) {
        const std::int64_t q = static_cast<std::int64_t>(queues[u].size());
        mx = std::max(mx, q);
        tot += q;
      }
      m.trajectory.push_back({slot, mx, tot});
    }

    if (measuring) {
      ++batch_slots[batch];
      for (NodeId u = 0; u < n; ++u) {
        const std::size_t q = queues[u].size();
        prev_size[u] = static_cast<std::int64_t>(q);
        if (q > 0) {
          ++occ_cnt[u];
          ++occ_batch[u][batch];
        }
        if (q >= 2) {
          ++ge2_cnt[u];
          ++ge2_batch[u][batch];
        }
      }
    }

    // (1) transmission decisions from start-of-slot queues
    staged.clear();
    std::fill(sent.begin(), sent.end(), 0);
    for (NodeId u = 0; u < n; ++u) {
      if (u == sink) continue;
      auto& q = queues[u];
      if (q.empty()) continue;
      if (sent[u]) {
        m.single_tx_ok = false;
        continue;
      }
      sent[u] = 1;
      const std::uint64_t pick =
          rng.below(q.size(), rng_stream::kPacketPick, static_cast<std::uint64_t>(slot), u);
      const double draw =
          rng.uniform01(rng_stream::kDestPick, static_cast<std::uint64_t>(slot), u);
      NodeId dest = dest_cum[u].back().second;
      for (const auto& [cum, v] : dest_cum[u])
        if (draw < cum) {
          dest = v;
          break;
        }
      if (dest == u) continue;  // self-loop: the chosen packet stays
      // uniform pick with swap-removal; the pick distribution is what matters
      const Packet pkt = q[pick];
      q[pick] = q.back();
      q.pop_back();
      staged.push_back({dest, pkt});
    }

    // (2) deliveries; the sink absorbs within the slot
    for (const Staged& s : staged) {
      if (s.to == sink) {
        ++m.absorbed_total;
        if (measuring) ++absorbed_measured;
        const Packet& pkt = s.packet;
        if (pkt.round <= cap) {
          ++absorb_cnt[pkt.round];
          last_absorb[pkt.round] = slot;
        }
      } else {
        queues[s.to].push_back(s.packet);
      }
    }

    // (3) Bernoulli(beta) arrivals at the sources
    for (NodeId s : g.sources()) {
      if (rng.uniform01(rng_stream::kArrival, static_cast<std::uint64_t>(slot), s) < cfg.beta) {
        const std::uint32_t r = ++src_round[s];
        queues[s].push_back({s, r, slot});
        ++m.generated_total;
        if (r <= cap) {
          ++appear_cnt[r];
          last_appear[r] = slot;
        }
      }
    }

    if (measuring) {
      for (NodeId u = 0; u < n; ++u) {
        if (u == sink || prev_size[u] == 0) continue;
        drift_sum[u] += static_cast<double>(static_cast<std::int64_t>(queues[u].size()) - prev_size[u]);
        ++drift_cnt[u];
      }
    }

    // packet conservation: generated = queued + absorbed, exactly
    std::int64_t total_q = 0;
    for (NodeId u = 0; u < n; ++u) total_q += static_cast<std::int64_t>(queues[u].size());
    if (total_q + m.absorbed_total != m.generated_total) m.conservation_ok = false;
  }

  m.measured_slots = window;
  for (NodeId u = 0; u < n; ++u) {
    NodeStats& s = m.per_node[u];
    s.eta_hat = static_cast<double>(occ_cnt[u]) / static_cast<double>(window);
    s.p_ge2 = static_cast<double>(ge2_cnt[u]) / static_cast<double>(window);
    s.p_empty = 1.0 - s.eta_hat;
    s.drift_samples = drift_cnt[u];
    s.drift_hat = drift_cnt[u] > 0 ? drift_sum[u] / static_cast<double>(drift_cnt[u]) : 0.0;
  }

  NodeId eta_argmax = 0;
  NodeId c_argmax = 0;
  for (NodeId u = 0; u < n; ++u) {
    if (u == sink) continue;
    if (m.per_node[u].eta_hat > m.per_node[eta_argmax].eta_hat || eta_argmax == sink)
      eta_argmax = u;
    if (m.per_node[u].p_ge2 > m.per_node[c_argmax].p_ge2 || c_argmax == sink) c_argmax = u;
  }
  m.eta_hat_max = m.per_node[eta_argmax].eta_hat;
  m.c_hat = m.per_node[c_argmax].p_ge2;
  m.eps_hat = 1.0 - m.eta_hat_max;
  auto [em, ese] = detail::batch_mean_se(occ_batch[eta_argmax], batch_slots);
  (void)em;
  m.eta_hat_max_se = ese;
  auto [cm, cse] = detail::batch_mean_se(ge2_batch[c_argmax], batch_slots);
  (void)cm;
  m.c_hat_se = cse;

  m.throughput_hat = static_cast<double>(absorbed_measured) / static_cast<double>(window);
  for (NodeId u = 0; u < n; ++u)
    m.final_total_queue += static_cast<std::int64_t>(queues[u].size());

  // complete prefix of rounds: every source generated round r and all of its
  // packets were absorbed
  std::uint32_t prefix = 0;
  while (prefix + 1 <= cap && absorb_cnt[prefix + 1] == k) ++prefix;
  m.rounds_completed = prefix;
  if (prefix > 0) {
    std::int64_t completion = 0;
    double sum = 0.0;
    for (std::uint32_t r = 1; r <= prefix; ++r) {
      const std::int64_t gap = last_absorb[r] - last_appear[r];
      m.round_collect_time.push_back(gap);
      sum += static_cast<double>(gap);
      completion = std::max(completion, last_absorb[r]);
    }
    m.tau_bar_hat = sum / static_cast<double>(prefix);
    double var = 0.0;
    for (std::int64_t gap : m.round_collect_time) {
      const double d = static_cast<double>(gap) - m.tau_bar_hat;
      var += d * d;
    }
    if (prefix > 1) var /= static_cast<double>(prefix - 1);
    m.tau_bar_se = std::sqrt(var / static_cast<double>(prefix));
    m.completion_per_round = static_cast<double>(completion) / static_cast<double>(prefix);
  }

  m.max_queue_slope = detail::regression_slope(m.trajectory, cfg.burn_in, true);
  m.total_queue_slope = detail::regression_slope(m.trajectory, cfg.burn_in, false);
  return m;
}

enum class Verdict { stable, unstable, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ProbeThresholds {
  double drift_delta = 0.01;     // packets/slot on the conditional drift
  double slope_unstable = 1e-3;  // packets/slot on the max-queue trajectory
  double slope_stable = 1e-4;
};

// Stable: every measured conditional drift clearly negative and a flat
// max-queue trajectory. Unstable: some drift clearly positive or a growing
// trajectory. Anything in between is inconclusive (expected near the
// critical rate at desk horizons).
inline Verdict stability_probe(const Metrics& m, const SimConfig& cfg,
                               const ProbeThresholds& th = {}) {
  bool any_positive = false;
  bool all_negative = true;
  for (NodeId u = 0; u < cfg.graph.n(); ++u) {
    if (u == cfg.graph.sink()) continue;
    const NodeStats& s = m.per_node[u];
    if (s.drift_samples == 0) continue;  // never occupied: vacuously fine
    if (s.drift_hat > th.drift_delta) any_positive = true;
    if (!(s.drift_hat < -th.drift_delta)) all_negative = false;
  }
  if (any_positive || m.max_queue_slope > th.slope_unstable) return Verdict::unstable;
  if (all_negative && std::abs(m.max_queue_slope) <= th.slope_stable) return Verdict::stable;
  return Verdict::inconclusive;
}

struct SweepPoint {
  double beta = 0.0;
  Verdict verdict = Verdict::inconclusive;
  Metrics metrics;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<double> last_stable;
  std::optional<double> first_unstable;
  bool degenerate() const { return !last_stable.has_value() || !first_unstable.has_value(); }
};

// Runs each grid point independently on a derived seed and brackets the
// critical rate between the last stable and first unstable verdicts.
inline SweepResult beta_sweep(const SimConfig& base, const std::vector<double>& grid,
                              const ProbeThresholds& th = {}) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] < grid[i - 1]) throw SpecError("beta_sweep: grid must be ascending");
  const CounterRng seeder{base.seed};
  SweepResult out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SimConfig cfg = base;
    cfg.beta = grid[i];
    cfg.seed = seeder.raw(rng_stream::kSweepSeed, i);
    Metrics m = run(cfg);
    const Verdict v = stability_probe(m, cfg, th);
    out.points.push_back({grid[i], v, std::move(m)});
  }
  for (const SweepPoint& p : out.points) {
    if (p.verdict == Verdict::unstable && !out.first_unstable) out.first_unstable = p.beta;
    if (p.verdict == Verdict::stable && !out.first_unstable) out.last_stable = p.beta;
  }
  return out;
}

}  // namespace randcollect
