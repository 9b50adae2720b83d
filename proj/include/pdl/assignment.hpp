#pragma once

#include <vector>

#include "pdl/types.hpp"

namespace pdl {

// Minimum-cost perfect matching on a dense square cost matrix
// (column reduction plus Dijkstra augmentation, Jonker-Volgenant style).
// Returns the column
// assigned to each row.
std::vector<int> solve_assignment(const Mat& cost);

}  // namespace pdl
