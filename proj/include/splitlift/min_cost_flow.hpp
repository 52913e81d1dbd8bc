#pragma once

// Successive-shortest-path min-cost flow (Dijkstra on reduced costs).

#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace splitlift {

class MinCostFlow {
public:
  using Cost = std::int64_t;

  explicit MinCostFlow(int nodes) : graph_(nodes) {}

  /// Adds a directed edge; costs must be non-negative. Returns an edge id.
  int add_edge(int from, int to, int cap, Cost cost) {
    if (cost < 0) throw std::invalid_argument("negative edge cost");
    int id = static_cast<int>(edges_.size());
    edges_.push_back({to, cap, cost});
    graph_[from].push_back(id);
    edges_.push_back({from, 0, -cost});
    graph_[to].push_back(id + 1);
    return id;
  }

  /// Pushes up to `limit` units from s to t at minimum cost.
  std::pair<int, Cost> solve(int s, int t, int limit = std::numeric_limits<int>::max()) {
    const int n = static_cast<int>(graph_.size());
    constexpr Cost kInf = std::numeric_limits<Cost>::max() / 4;
    std::vector<Cost> pot(n, 0), dist(n);
    std::vector<int> via(n);
    int flow = 0;
    Cost cost = 0;
    while (flow < limit) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(via.begin(), via.end(), -1);
      using Item = std::pair<Cost, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      dist[s] = 0;
      pq.push({0, s});
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d != dist[u]) continue;
        for (int id : graph_[u]) {
          const Edge& e = edges_[id];
          if (e.cap <= 0) continue;
          Cost nd = d + e.cost + pot[u] - pot[e.to];
          if (nd < dist[e.to]) {
            dist[e.to] = nd;
            via[e.to] = id;
            pq.push({nd, e.to});
          }
        }
      }
      if (dist[t] >= kInf) break;
      for (int v = 0; v < n; ++v)
        if (dist[v] < kInf) pot[v] += dist[v];
      int push = limit - flow;
      for (int v = t; v != s; v = edges_[via[v] ^ 1].to) push = std::min(push, edges_[via[v]].cap);
      for (int v = t; v != s; v = edges_[via[v] ^ 1].to) {
        edges_[via[v]].cap -= push;
        edges_[via[v] ^ 1].cap += push;
        cost += static_cast<Cost>(push) * edges_[via[v]].cost;
      }
      flow += push;
    }
    return {flow, cost};
  }

  /// Units currently routed through edge `id`.
  int flow(int id) const { return edges_[id ^ 1].cap; }

private:
  struct Edge {
    int to;
    int cap;
    Cost cost;
  };
  std::vector<std::vector<int>> graph_;
  std::vector<Edge> edges_;
};

}  // namespace splitlift
