#pragma once

#include <cstdint>
#include <vector>

namespace spinach::eval {

/// Maximum-weight assignment on a dense rows × cols matrix of non-negative
/// integer weights (Hungarian method with potentials, O(n^2 m)).
///
/// Returns, for each row, the assigned column or -1. Every row is assigned
/// when rows <= cols, every column when cols < rows; callers drop zero-weight
/// pairs to obtain a partial matching.
std::vector<int> max_weight_assignment(const std::vector<std::vector<std::int64_t>>& weights);

} // namespace spinach::eval
