// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <string_view>
#include <vector>

#include "starmm/algorithms.hpp"
#include "starmm/config.hpp"
#include "starmm/error.hpp"
#include "starmm/strassen.hpp"

// Explicit task graphs, built by unrolling a schedule symbolically. An
// independent check on the span and work recurrences.
namespace starmm::analysis {

enum class NodeKind : std::uint8_t {
  Join,        // fork/join point, free
  Base,        // one base kernel
  Leaf,        // base kernel into a private block plus its tile-exclusive merge
  Merge,       // one parallel matrix addition level
  Accumulate,  // one tile-exclusive accumulation of a product into C
  Form,        // forming Strassen operands
  Assemble,    // forming one C quadrant from the products
  Fill,        // zeroing the output
};

constexpr std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Join: return "join";
    case NodeKind::Base: return "base";
    case NodeKind::Leaf: return "leaf";
    case NodeKind::Merge: return "merge";
    case NodeKind::Accumulate: return "accumulate";
    case NodeKind::Form: return "form";
    case NodeKind::Assemble: return "assemble";
    case NodeKind::Fill: return "fill";
  }
  return "?";
}

struct DagNode {
  NodeKind kind = NodeKind::Join;
  unsigned depth = 0;
  std::uint64_t cost = 0;  // contribution to span
  std::uint64_t work = 0;
};

struct TaskDag {
  std::vector<DagNode> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t add(NodeKind kind, unsigned depth, std::uint64_t cost, std::uint64_t work) {
    nodes.push_back({kind, depth, cost, work});
    return nodes.size() - 1;
  }
  void edge(std::size_t from, std::size_t to) { edges.emplace_back(from, to); }

  std::size_t count(NodeKind kind) const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [&](const DagNode& n) { return n.kind == kind; }));
  }

  // Base-kernel executions, with or without a private block.
  std::size_t multiplications() const { return count(NodeKind::Base) + count(NodeKind::Leaf); }

  std::uint64_t work() const {
    std::uint64_t w = 0;
    for (const auto& n : nodes) w += n.work;
    return w;
  }
};

// Heaviest path by node cost. Kahn order; a leftover node means a cycle.
inline std::uint64_t longest_path(const TaskDag& dag) {
  const std::size_t n = dag.nodes.size();
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> indeg(n, 0);
  for (auto [from, to] : dag.edges) {
    require(from < n && to < n, ErrorCode::InternalError, "edge references a missing node");
    out[from].push_back(to);
    ++indeg[to];
  }
  std::vector<std::uint64_t> finish(n, 0);
  std::queue<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) {
      finish[i] = dag.nodes[i].cost;
      ready.push(i);
    }
  std::size_t seen = 0;
  std::uint64_t best = 0;
  while (!ready.empty()) {
    std::size_t u = ready.front();
    ready.pop();
    ++seen;
    best = std::max(best, finish[u]);
    for (std::size_t v : out[u]) {
      finish[v] = std::max(finish[v], finish[u] + dag.nodes[v].cost);
      if (--indeg[v] == 0) ready.push(v);
    }
  }
  require(seen == n, ErrorCode::InternalError, "task graph has a cycle");
  return best;
}

namespace detail {

// Entry and exit node of a sub-graph.
struct Span {
  std::size_t in, out;
};

class DagBuilder {
 public:
  DagBuilder(TaskDag& dag, std::uint64_t b, unsigned k) : g_(dag), b_(b), k_(k) {}

  Span co2(std::uint64_t v, unsigned d) {
    if (v == b_) return single(NodeKind::Base, d, 1, cube(b_));
    std::size_t s = join(d), m = join(d), e = join(d);
    for (int i = 0; i < 4; ++i) between(s, co2(v / 2, d + 1), m);
    for (int i = 0; i < 4; ++i) between(m, co2(v / 2, d + 1), e);
    return {s, e};
  }

  Span co3(std::uint64_t v, unsigned d) {
    if (v == b_) return single(NodeKind::Base, d, 1, cube(b_));
    std::size_t s = join(d), m = g_.add(NodeKind::Merge, d, 1, v * v);
    for (int i = 0; i < 8; ++i) between(s, co3(v / 2, d + 1), m);
    return {s, m};
  }

  // Products sharing an output quadrant run one after the other through the
  // quadrant's exclusion slots.
  Span tar(std::uint64_t v, unsigned d) {
    if (v == b_) return leaf(d);
    std::size_t s = join(d), e = join(d);
    for (int q = 0; q < 4; ++q) {
      Span first = tar(v / 2, d + 1), second = tar(v / 2, d + 1);
      g_.edge(s, first.in);
      g_.edge(first.out, second.in);
      g_.edge(second.out, e);
    }
    return {s, e};
  }

  // Both halves of a pair run concurrently and merge once.
  Span sar(std::uint64_t v, unsigned d) {
    if (v == b_) return single(NodeKind::Base, d, 1, cube(b_));
    std::size_t s = join(d), e = join(d);
    for (int q = 0; q < 4; ++q) {
      std::size_t acc = g_.add(NodeKind::Accumulate, d + 1, 1, (v / 2) * (v / 2));
      between(s, sar(v / 2, d + 1), acc);
      between(s, sar(v / 2, d + 1), acc);
      g_.edge(acc, e);
    }
    return {s, e};
  }

  Span star(std::uint64_t v, unsigned d) {
    if (d >= k_) return sar(v, d);
    if (v == b_) return leaf(d);
    std::size_t s = join(d), e = join(d);
    for (int q = 0; q < 4; ++q) {
      Span first = star(v / 2, d + 1), second = star(v / 2, d + 1);
      g_.edge(s, first.in);
      g_.edge(first.out, second.in);
      g_.edge(second.out, e);
    }
    return {s, e};
  }

  template <class Child>
  Span strassen_step(std::uint64_t v, unsigned d, Child&& child) {
    std::uint64_t h2 = (v / 2) * (v / 2);
    std::size_t s = join(d), e = join(d);
    std::size_t products[7];
    for (int r = 0; r < 7; ++r) {
      Span c = child(v / 2, d + 1);
      products[r] = c.out;
      bool linked = false;
      for (const auto* op : {&strassen_table::S[r], &strassen_table::T[r]}) {
        if (op->bare()) continue;
        std::size_t f = g_.add(NodeKind::Form, d, 1, h2);
        g_.edge(s, f);
        g_.edge(f, c.in);
        linked = true;
      }
      if (!linked) g_.edge(s, c.in);
    }
    for (int q = 0; q < 4; ++q) {
      const auto& terms = strassen_table::C[q];
      std::size_t a = g_.add(NodeKind::Assemble, d, 1, (terms.size() - 1) * h2);
      for (const auto& t : terms) g_.edge(products[t.product], a);
      g_.edge(a, e);
    }
    return {s, e};
  }

  Span strassen(std::uint64_t v, unsigned d) {
    if (v == b_) return single(NodeKind::Base, d, 1, cube(b_));
    return strassen_step(v, d, [this](std::uint64_t w, unsigned dd) { return strassen(w, dd); });
  }

  // Contributions to one quadrant are merged in increasing product order.
  Span sar_strassen(std::uint64_t v, unsigned d) {
    if (v == b_) return single(NodeKind::Base, d, 1, cube(b_));
    std::uint64_t h2 = (v / 2) * (v / 2);
    std::size_t s = g_.add(NodeKind::Fill, d, 0, 0), e = join(d);
    std::size_t last[4];
    for (int q = 0; q < 4; ++q) last[q] = s;
    for (int r = 0; r < 7; ++r) {
      std::uint64_t ops = !strassen_table::S[r].bare() + !strassen_table::T[r].bare();
      std::size_t f = g_.add(NodeKind::Form, d + 1, 1, ops * h2);
      g_.edge(s, f);
      Span c = sar_strassen(v / 2, d + 1);
      g_.edge(f, c.in);
      for (const auto& t : strassen_table::targets(r)) {
        std::size_t acc = g_.add(NodeKind::Accumulate, d + 1, 1, h2);
        g_.edge(c.out, acc);
        g_.edge(last[t.quadrant], acc);
        last[t.quadrant] = acc;
      }
    }
    for (int q = 0; q < 4; ++q) g_.edge(last[q], e);
    return {s, e};
  }

  Span star_strassen_1(std::uint64_t v, unsigned d) {
    if (k_ == 0) return sar_strassen(v, d);
    if (d < k_ && v > b_) {
      std::size_t s = join(d), e = join(d);
      for (int q = 0; q < 4; ++q) {
        Span first = star_strassen_1(v / 2, d + 1), second = star_strassen_1(v / 2, d + 1);
        g_.edge(s, first.in);
        g_.edge(first.out, second.in);
        g_.edge(second.out, e);
      }
      return {s, e};
    }
    if (v == b_) return leaf(d);
    Span inner = sar_strassen(v, d);
    std::size_t acc = g_.add(NodeKind::Accumulate, d, 1, v * v);
    g_.edge(inner.out, acc);
    return {inner.in, acc};
  }

  Span star_strassen_2(std::uint64_t v, unsigned d) {
    if (d < k_ && v > b_)
      return strassen_step(v, d, [this](std::uint64_t w, unsigned dd) { return star_strassen_2(w, dd); });
    return sar_strassen(v, d);
  }

 private:
  static std::uint64_t cube(std::uint64_t x) { return x * x * x; }

  std::size_t join(unsigned d) { return g_.add(NodeKind::Join, d, 0, 0); }

  Span single(NodeKind kind, unsigned d, std::uint64_t cost, std::uint64_t work) {
    std::size_t x = g_.add(kind, d, cost, work);
    return {x, x};
  }

  Span leaf(unsigned d) { return single(NodeKind::Leaf, d, 1, cube(b_) + b_ * b_); }

  void between(std::size_t from, Span sub, std::size_t to) {
    g_.edge(from, sub.in);
    g_.edge(sub.out, to);
  }

  TaskDag& g_;
  std::uint64_t b_;
  unsigned k_;
};

}  // namespace detail

inline constexpr std::uint64_t max_dag_ratio = 64;

inline TaskDag build_dag(AlgoId algo, std::uint64_t n, std::uint64_t b, std::uint64_t p) {
  require(is_pow2(b) && is_pow2(n) && n >= b, ErrorCode::InvalidSplit, "n must be a power-of-two multiple of b");
  require(n / b <= max_dag_ratio, ErrorCode::TooLarge, "explicit task graphs are limited to n/b <= 64");
  require(p >= 1, ErrorCode::InvalidConfig, "worker count must be at least 1");
  TaskDag dag;
  detail::DagBuilder g(dag, b, switch_depth(static_cast<unsigned>(p)));
  switch (algo) {
    case AlgoId::Co2: g.co2(n, 0); break;
    case AlgoId::Co3: g.co3(n, 0); break;
    case AlgoId::Tar: g.tar(n, 0); break;
    case AlgoId::Sar: g.sar(n, 0); break;
    case AlgoId::Star: g.star(n, 0); break;
    case AlgoId::Strassen: g.strassen(n, 0); break;
    case AlgoId::SarStrassen: g.sar_strassen(n, 0); break;
    case AlgoId::StarStrassen1: g.star_strassen_1(n, 0); break;
    case AlgoId::StarStrassen2: g.star_strassen_2(n, 0); break;
  }
  return dag;
}

}  // namespace starmm::analysis
