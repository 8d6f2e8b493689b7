#include "squant/block_system.hpp"

#include <cmath>
#include <stdexcept>

#include "squant/sequence_model.hpp"

namespace squant {

BlockSystem build_blocks(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("build_blocks: epsilon must lie in (0, 1)");

  BlockSystem out;
  out.epsilon = epsilon;
  out.length = sequence_length(epsilon);
  const double log_inv = std::log(1.0 / epsilon);
  out.rho = 1.0 / log_inv;

  const std::size_t n = out.length;
  const auto first = static_cast<std::size_t>(std::ceil(log_inv));
  if (first >= n) {
    out.sizes = {n};
    out.starts = {1};
    return out;
  }

  // T_k = floor(T_1 (1+rho)^{k-1}) until the running sum would reach N; the
  // final block takes the remainder and may be smaller than its predecessor.
  std::size_t used = 0;
  for (std::size_t k = 1;; ++k) {
    const double geometric =
        static_cast<double>(first) * std::pow(1.0 + out.rho, static_cast<double>(k - 1));
    const auto size = (k == 1) ? first : static_cast<std::size_t>(std::floor(geometric));
    if (used + size >= n) {
      out.starts.push_back(used + 1);
      out.sizes.push_back(n - used);
      break;
    }
    out.starts.push_back(used + 1);
    out.sizes.push_back(size);
    used += size;
  }
  return out;
}

std::span<const double> block_slice(std::span<const double> x, std::size_t k,
                                    const BlockSystem& blocks) {
  if (k >= blocks.count()) throw std::out_of_range("block_slice: block index out of range");
  const std::size_t offset = blocks.starts[k] - 1;
  if (x.size() < offset + blocks.sizes[k])
    throw std::invalid_argument("block_slice: sequence shorter than block extent");
  return x.subspan(offset, blocks.sizes[k]);
}

}  // namespace squant
