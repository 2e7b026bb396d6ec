#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "randcollect/common.hpp"
#include "randcollect/rng.hpp"

namespace randcollect {

enum class TopologyKind {
  cycle,
  path,
  star_center_sink,
  star_outer_sink,
  complete,
  hypercube,
  rgg,
  edge_list_file,
};

inline const char* to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::cycle: return "cycle";
    case TopologyKind::path: return "path";
    case TopologyKind::star_center_sink: return "star_center_sink";
    case TopologyKind::star_outer_sink: return "star_outer_sink";
    case TopologyKind::complete: return "complete";
    case TopologyKind::hypercube: return "hypercube";
    case TopologyKind::rgg: return "rgg";
    case TopologyKind::edge_list_file: return "edge_list_file";
  }
  return "?";
}

inline TopologyKind topology_kind_from_string(const std::string& s) {
  if (s == "cycle") return TopologyKind::cycle;
  if (s == "path") return TopologyKind::path;
  if (s == "star_center_sink") return TopologyKind::star_center_sink;
  if (s == "star_outer_sink") return TopologyKind::star_outer_sink;
  if (s == "complete") return TopologyKind::complete;
  if (s == "hypercube") return TopologyKind::hypercube;
  if (s == "rgg") return TopologyKind::rgg;
  if (s == "edge_list_file") return TopologyKind::edge_list_file;
  throw SpecError("unknown topology kind: " + s);
}

struct TopologySpec {
  TopologyKind kind = TopologyKind::cycle;
  std::size_t n = 0;               // node count (derived from x for hypercube)
  unsigned x = 0;                  // hypercube dimension
  double r = 0.0;                  // rgg radius; <= 0 picks 2*sqrt(log n / n)
  std::uint64_t seed = 0;          // rgg placement seed
  std::optional<NodeId> sink;      // defaults per family
  std::vector<NodeId> sources;     // empty means V \ {sink}
  std::string path;                // edge_list_file
};

// Undirected simple graph with one designated sink and a source set.
// Immutable after construction; connectivity and the sink/source invariants
// are checked in the constructor, so every Graph in the system is valid.
class Graph {
 public:
  Graph(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edge_list, NodeId sink,
        std::vector<NodeId> sources = {},
        std::optional<TopologyKind> family = std::nullopt)
      : n_(n), sink_(sink), family_(family) {
    if (n < 2) throw SpecError("graph needs at least 2 nodes");
    if (sink >= n) throw SpecError("sink id out of range");

    std::set<std::pair<NodeId, NodeId>> uniq;
    for (auto [u, v] : edge_list) {
      if (u >= n || v >= n) throw SpecError("edge endpoint out of range");
      if (u == v) throw SpecError("self-loops are not allowed in the graph");
      uniq.insert({std::min(u, v), std::max(u, v)});
    }
    edges_.assign(uniq.begin(), uniq.end());

    adj_.assign(n, {});
    for (auto [u, v] : edges_) {
      adj_[u].push_back(v);
      adj_[v].push_back(u);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());

    if (!connected()) throw SpecError("graph is not connected");

    if (sources.empty()) {
      for (NodeId u = 0; u < n_; ++u)
        if (u != sink_) sources.push_back(u);
    }
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    for (NodeId s : sources) {
      if (s >= n) throw SpecError("source id out of range");
      if (s == sink_) throw SpecError("sink cannot be a source");
    }
    if (sources.empty()) throw SpecError("source set is empty");
    sources_ = std::move(sources);
    is_source_.assign(n_, false);
    for (NodeId s : sources_) is_source_[s] = true;
  }

  std::size_t n() const { return n_; }
  std::size_t m() const { return edges_.size(); }
  NodeId sink() const { return sink_; }
  const std::vector<NodeId>& sources() const { return sources_; }
  std::size_t k() const { return sources_.size(); }
  bool is_source(NodeId u) const { return is_source_[u]; }
  const std::vector<NodeId>& neighbors(NodeId u) const { return adj_[u]; }
  std::size_t degree(NodeId u) const { return adj_[u].size(); }
  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
  std::optional<TopologyKind> family() const { return family_; }

  Graph with_sources(std::vector<NodeId> sources) const {
    return Graph(n_, edges_, sink_, std::move(sources), family_);
  }

 private:
  bool connected() const {
    std::vector<char> seen(n_, 0);
    std::queue<NodeId> q;
    q.push(0);
    seen[0] = 1;
    std::size_t cnt = 1;
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (NodeId v : adj_[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++cnt;
          q.push(v);
        }
    }
    return cnt == n_;
  }

  std::size_t n_;
  NodeId sink_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::vector<std::vector<NodeId>> adj_;
  std::vector<NodeId> sources_;
  std::vector<char> is_source_;
  std::optional<TopologyKind> family_;
};

struct DegreeStats {
  std::size_t d_min = 0;
  std::size_t d_max = 0;
  std::vector<std::size_t> per_node;
};

inline DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  s.per_node.resize(g.n());
  s.d_min = g.n();
  for (NodeId u = 0; u < g.n(); ++u) {
    s.per_node[u] = g.degree(u);
    s.d_min = std::min(s.d_min, s.per_node[u]);
    s.d_max = std::max(s.d_max, s.per_node[u]);
  }
  return s;
}

// |∂U|: edges with exactly one endpoint in U. U must be a proper nonempty
// subset of V.
inline std::size_t edge_boundary_size(const Graph& g, const std::vector<NodeId>& u_set) {
  if (u_set.empty()) throw SpecError("edge_boundary_size: U is empty");
  std::vector<char> in_u(g.n(), 0);
  std::size_t distinct = 0;
  for (NodeId u : u_set) {
    if (u >= g.n()) throw SpecError("edge_boundary_size: node out of range");
    if (!in_u[u]) {
      in_u[u] = 1;
      ++distinct;
    }
  }
  if (distinct == g.n()) throw SpecError("edge_boundary_size: U is all of V");
  std::size_t cnt = 0;
  for (auto [a, b] : g.edges())
    if (in_u[a] != in_u[b]) ++cnt;
  return cnt;
}

constexpr std::size_t kDefaultSubsetCap = 22;

// min over nonempty U ⊆ V \ {sink} of |∂U| / |U|, by exhaustive subset
// enumeration. Exponential in n, so capped; the named families have closed
// forms registered for larger n (all minimized at U = V \ {sink}, which is
// itself always an admissible candidate).
inline double edge_expansion_hat(const Graph& g, std::size_t cap = kDefaultSubsetCap) {
  const std::size_t n = g.n();
  if (n <= cap) {
    std::vector<int> bit_of(n, -1);
    int b = 0;
    for (NodeId u = 0; u < n; ++u)
      if (u != g.sink()) bit_of[u] = b++;
    const std::uint64_t subsets = 1ull << (n - 1);
    double best = static_cast<double>(g.m());
    for (std::uint64_t mask = 1; mask < subsets; ++mask) {
      std::size_t boundary = 0;
      for (auto [u, v] : g.edges()) {
        const bool bu = bit_of[u] >= 0 && (mask >> bit_of[u]) & 1;
        const bool bv = bit_of[v] >= 0 && (mask >> bit_of[v]) & 1;
        if (bu != bv) ++boundary;
      }
      const double a = static_cast<double>(boundary) /
                       static_cast<double>(__builtin_popcountll(mask));
      best = std::min(best, a);
    }
    return best;
  }

  if (g.family()) {
    const double nm1 = static_cast<double>(n - 1);
    switch (*g.family()) {
      case TopologyKind::cycle: return 2.0 / nm1;
      case TopologyKind::complete: return 1.0;
      case TopologyKind::star_center_sink: return 1.0;
      case TopologyKind::star_outer_sink: return 1.0 / nm1;
      case TopologyKind::hypercube:
        return static_cast<double>(g.degree(g.sink())) / nm1;
      default: break;
    }
  }
  throw CapExceeded("edge_expansion_hat: n above brute-force cap and no closed form");
}

namespace detail {

inline Graph build_rgg(const TopologySpec& spec) {
  const std::size_t n = spec.n;
  if (n < 2) throw SpecError("rgg: n must be >= 2");
  const double r = spec.r > 0.0
                       ? spec.r
                       : 2.0 * std::sqrt(std::log(static_cast<double>(n)) /
                                         static_cast<double>(n));
  const NodeId sink = spec.sink.value_or(0);
  const CounterRng rng{spec.seed};

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<double> px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
      // uniform in the unit disc: sqrt-radius times a uniform angle
      const std::uint64_t key = static_cast<std::uint64_t>(attempt) * (n + 1) + i;
      const double rad = std::sqrt(rng.uniform01(rng_stream::kRggPoint, key, 0));
      const double ang = 2.0 * 3.14159265358979323846 * rng.uniform01(rng_stream::kRggPoint, key, 1);
      px[i] = rad * std::cos(ang);
      py[i] = rad * std::sin(ang);
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = px[i] - px[j], dy = py[i] - py[j];
        if (dx * dx + dy * dy <= r * r)
          edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    try {
      return Graph(n, std::move(edges), sink, spec.sources, TopologyKind::rgg);
    } catch (const SpecError&) {
      // disconnected draw; retry with the next sub-seed
    }
  }
  throw SpecError("rgg: no connected instance within the retry budget");
}

}  // namespace detail

inline Graph load_edge_list(std::istream& in) {
  std::optional<NodeId> sink;
  std::vector<NodeId> sources;
  std::vector<std::pair<NodeId, NodeId>> edges;
  NodeId max_id = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first[0] == '#') continue;
    if (first == "sink") {
      NodeId s;
      if (!(ls >> s)) throw SpecError("edge list: bad sink line");
      sink = s;
      max_id = std::max(max_id, s);
    } else if (first == "sources") {
      NodeId s;
      while (ls >> s) {
        sources.push_back(s);
        max_id = std::max(max_id, s);
      }
    } else {
      NodeId u, v;
      try {
        u = static_cast<NodeId>(std::stoul(first));
      } catch (...) {
        throw SpecError("edge list: bad line: " + line);
      }
      if (!(ls >> v)) throw SpecError("edge list: bad edge line: " + line);
      edges.emplace_back(u, v);
      max_id = std::max({max_id, u, v});
    }
  }
  if (!sink) throw SpecError("edge list: missing 'sink <id>' header");
  return Graph(max_id + 1, std::move(edges), *sink, std::move(sources),
               TopologyKind::edge_list_file);
}

inline Graph load_edge_list_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SpecError("cannot open edge list file: " + path);
  return load_edge_list(f);
}

inline Graph build_topology(const TopologySpec& spec) {
  using K = TopologyKind;
  std::vector<std::pair<NodeId, NodeId>> edges;
  const auto id = [](std::size_t v) { return static_cast<NodeId>(v); };

  switch (spec.kind) {
    case K::cycle: {
      if (spec.n < 3) throw SpecError("cycle: n must be >= 3");
      for (std::size_t i = 0; i < spec.n; ++i) edges.emplace_back(id(i), id((i + 1) % spec.n));
      return Graph(spec.n, std::move(edges), spec.sink.value_or(0), spec.sources, K::cycle);
    }
    case K::path: {
      if (spec.n < 2) throw SpecError("path: n must be >= 2");
      for (std::size_t i = 0; i + 1 < spec.n; ++i) edges.emplace_back(id(i), id(i + 1));
      return Graph(spec.n, std::move(edges), spec.sink.value_or(0), spec.sources, K::path);
    }
    case K::star_center_sink:
    case K::star_outer_sink: {
      if (spec.n < 3) throw SpecError("star: n must be >= 3");
      // node 0 is the hub, 1..n-1 are the leaves
      for (std::size_t i = 1; i < spec.n; ++i) edges.emplace_back(id(0), id(i));
      if (spec.kind == K::star_center_sink) {
        const NodeId sink = spec.sink.value_or(0);
        if (sink != 0) throw SpecError("star_center_sink: sink must be the hub (node 0)");
        return Graph(spec.n, std::move(edges), sink, spec.sources, K::star_center_sink);
      }
      const NodeId sink = spec.sink.value_or(1);
      if (sink == 0) throw SpecError("star_outer_sink: sink must be a leaf");
      return Graph(spec.n, std::move(edges), sink, spec.sources, K::star_outer_sink);
    }
    case K::complete: {
      if (spec.n < 2) throw SpecError("complete: n must be >= 2");
      for (std::size_t i = 0; i < spec.n; ++i)
        for (std::size_t j = i + 1; j < spec.n; ++j) edges.emplace_back(id(i), id(j));
      return Graph(spec.n, std::move(edges), spec.sink.value_or(0), spec.sources, K::complete);
    }
    case K::hypercube: {
      unsigned x = spec.x;
      if (x == 0 && spec.n > 0) {
        while ((1ull << x) < spec.n) ++x;
        if ((1ull << x) != spec.n) throw SpecError("hypercube: n must be a power of two");
      }
      if (x == 0) throw SpecError("hypercube: dimension x must be >= 1");
      if (spec.n != 0 && spec.n != (1ull << x))
        throw SpecError("hypercube: n and x disagree");
      const std::size_t n = 1ull << x;
      for (std::size_t v = 0; v < n; ++v)
        for (unsigned b = 0; b < x; ++b) {
          const std::size_t w = v ^ (1ull << b);
          if (v < w) edges.emplace_back(id(v), id(w));
        }
      // default sink: the all-zero label
      return Graph(n, std::move(edges), spec.sink.value_or(0), spec.sources, K::hypercube);
    }
    case K::rgg:
      return detail::build_rgg(spec);
    case K::edge_list_file:
      return load_edge_list_file(spec.path);
  }
  throw SpecError("build_topology: unhandled kind");
}

}  // namespace randcollect
