#pragma once

#include <vector>

namespace nsplan {

struct TransportPlan {
  /// flow[i][j]: mass moved from source i to sink j.
  std::vector<std::vector<double>> flow;
  double cost = 0.0;
};

/// Exact balanced transportation problem: minimize sum flow[i][j]*cost[i][j]
/// subject to row sums = supply and column sums = demand. Solved as a
/// min-cost flow by successive shortest paths (Bellman-Ford on the residual
/// graph). Masses must be nonnegative with equal totals (to 1e-9 relative);
/// costs must be finite. Throws ContractError otherwise.
TransportPlan solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                              const std::vector<std::vector<double>>& cost);

}  // namespace nsplan
