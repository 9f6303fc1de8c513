#include "nsplan/transport_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nsplan/errors.hpp"

namespace nsplan {

namespace {

struct Edge {
  std::size_t to;
  std::size_t rev;
  double capacity;
  double cost;
};

class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : adj_(nodes) {}

  void add_edge(std::size_t from, std::size_t to, double capacity, double cost) {
    adj_[from].push_back({to, adj_[to].size(), capacity, cost});
    adj_[to].push_back({from, adj_[from].size() - 1, 0.0, -cost});
  }

  // Pushes up to `target` units from s to t along cheapest residual paths.
  double min_cost_flow(std::size_t s, std::size_t t, double target, double eps) {
    const double inf = std::numeric_limits<double>::infinity();
    double pushed = 0.0;
    const std::size_t n = adj_.size();
    while (target - pushed > eps) {
      std::vector<double> dist(n, inf);
      std::vector<std::size_t> prev_node(n, n);
      std::vector<std::size_t> prev_edge(n, 0);
      dist[s] = 0.0;
      for (std::size_t round = 0; round + 1 < n; ++round) {
        bool changed = false;
        for (std::size_t u = 0; u < n; ++u) {
          if (dist[u] == inf) continue;
          for (std::size_t k = 0; k < adj_[u].size(); ++k) {
            const auto& e = adj_[u][k];
            if (e.capacity <= eps) continue;
            double nd = dist[u] + e.cost;
            // Strict improvement with a small slack avoids cycling on
            // zero-cost residual loops.
            if (nd < dist[e.to] - 1e-15) {
              dist[e.to] = nd;
              prev_node[e.to] = u;
              prev_edge[e.to] = k;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (dist[t] == inf) break;
      double amount = target - pushed;
      for (std::size_t v = t; v != s; v = prev_node[v]) {
        amount = std::min(amount, adj_[prev_node[v]][prev_edge[v]].capacity);
      }
      for (std::size_t v = t; v != s; v = prev_node[v]) {
        auto& e = adj_[prev_node[v]][prev_edge[v]];
        e.capacity -= amount;
        adj_[v][e.rev].capacity += amount;
      }
      pushed += amount;
    }
    return pushed;
  }

  const std::vector<Edge>& edges(std::size_t node) const { return adj_[node]; }

 private:
  std::vector<std::vector<Edge>> adj_;
};

}  // namespace

TransportPlan solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                              const std::vector<std::vector<double>>& cost) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (m == 0 || n == 0) throw ContractError("solve_transport: empty marginal");
  if (cost.size() != m) throw ContractError("solve_transport: cost matrix has wrong row count");
  for (const auto& row : cost) {
    if (row.size() != n) throw ContractError("solve_transport: cost matrix has wrong column count");
    for (double c : row) {
      if (!std::isfinite(c)) throw ContractError("solve_transport: non-finite cost");
    }
  }
  for (double x : supply) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ContractError("solve_transport: negative or non-finite supply");
  }
  for (double x : demand) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ContractError("solve_transport: negative or non-finite demand");
  }
  double total_supply = std::accumulate(supply.begin(), supply.end(), 0.0);
  double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
  double scale = std::max({1.0, total_supply, total_demand});
  if (std::abs(total_supply - total_demand) > 1e-9 * scale) {
    throw ContractError("solve_transport: supply and demand totals differ");
  }

  // Nodes: 0 = source, 1..m = rows, m+1..m+n = columns, m+n+1 = sink.
  const std::size_t source = 0;
  const std::size_t sink = m + n + 1;
  FlowNetwork net(m + n + 2);
  for (std::size_t i = 0; i < m; ++i) net.add_edge(source, 1 + i, supply[i], 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) net.add_edge(1 + i, 1 + m + j, total_supply + total_demand, cost[i][j]);
  }
  for (std::size_t j = 0; j < n; ++j) net.add_edge(1 + m + j, sink, demand[j], 0.0);

  const double eps = 1e-15 * scale;
  net.min_cost_flow(source, sink, std::min(total_supply, total_demand), eps);

  TransportPlan plan;
  plan.flow.assign(m, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& e : net.edges(1 + i)) {
      if (e.to >= 1 + m && e.to < 1 + m + n) {
        // Flow on a forward arc equals the capacity of its reverse arc.
        double f = net.edges(e.to)[e.rev].capacity;
        plan.flow[i][e.to - 1 - m] = f;
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) plan.cost += plan.flow[i][j] * cost[i][j];
  }
  return plan;
}

}  // namespace nsplan
