#pragma once

#include <cstddef>
#include <vector>

namespace mkvlab {

/// Exact minimum-cost perfect matching on a dense n x n cost matrix (row-major).
/// Returns the column assigned to each row. O(n^3) shortest augmenting paths with potentials.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

}  // namespace mkvlab
