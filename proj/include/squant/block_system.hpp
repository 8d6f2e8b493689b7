// Weakly geometric block system partitioning {1, ..., N} with
// N = floor(1/eps^2): first block of size ceil(log(1/eps)), later blocks
// growing by the factor (1 + 1/log(1/eps)), remainder assigned to the last.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace squant {

struct BlockSystem {
  double epsilon;
  std::size_t length;               // N
  double rho;                       // 1 / log(1/epsilon)
  std::vector<std::size_t> sizes;   // T_1..T_K
  std::vector<std::size_t> starts;  // j_1..j_K, 1-based first coordinate

  std::size_t count() const { return sizes.size(); }
};

BlockSystem build_blocks(double epsilon);

// View of the k-th block (0-based k) of a sequence laid out from coordinate 1.
std::span<const double> block_slice(std::span<const double> x, std::size_t k,
                                    const BlockSystem& blocks);

}  // namespace squant
