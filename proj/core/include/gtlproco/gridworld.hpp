#pragma once

#include "gtlproco/synthesis.hpp"

#include <vector>

namespace gtlproco {

/*
 * Single-swarm gridworld scenario: bins on a rows x cols grid (bin index
 * r * cols + c), 4-neighbor moves plus self-loops, obstacle bins knocked
 * out to their self-loop. Starts share the initial mass uniformly; targets
 * must eventually hold at least target_floor forever; obstacles stay
 * exactly empty; start and target bins are capped at protected_cap,
 * every other bin at transit_cap.
 */
struct GridworldSpec {
  int rows = 5;
  int cols = 7;
  std::vector<NodeId> starts;
  std::vector<NodeId> targets;
  std::vector<NodeId> obstacles;
  double target_floor = 0.2;
  double protected_cap = 0.25;
  double transit_cap = 0.15;
  int k_p = 8;
};

/* 4-neighbor grid with self-loops; obstacles keep only the self-loop */
Eigen::MatrixXi grid_adjacency(int rows, int cols,
                               const std::vector<NodeId> &obstacles);

/* instance with own-density labels and the four requirement groups */
ProblemInstance make_gridworld(const GridworldSpec &spec);

/* the reduced benchmark scenario on the 5 x 7 grid */
GridworldSpec default_gridworld();

} // namespace gtlproco
