#include "squant/codec.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "squant/bit_allocation.hpp"
#include "squant/rng.hpp"

namespace squant {

namespace {

// Stream 0 of a key is reserved for observation noise (sequence_model); base
// code row r draws from stream r + 1.
constexpr std::uint64_t row_stream(std::uint64_t row) { return row + 1; }

constexpr std::array<std::uint8_t, 4> magic = {'S', 'Q', 'E', 'B'};
constexpr std::uint8_t format_version = 1;

unsigned ceil_bits(double per_block_rate) {
  // ceil(T_k b_k) with a relative nudge so that products a hair above an
  // integer due to multiplier bisection round-off do not widen the index.
  const double nudged = per_block_rate - 1e-9 * std::fmax(1.0, per_block_rate);
  return static_cast<unsigned>(std::ceil(std::fmax(nudged, 0.0)));
}

double block_norm(std::span<const double> y) {
  double ss = 0.0;
  for (double v : y) ss += v * v;
  return std::sqrt(ss);
}

struct BlockPlan {
  std::vector<double> quantized_radius;  // S-check_k
  std::vector<double> excess;            // S-check_k^2 - T_k eps^2
  std::vector<double> rates;             // b_k
  std::vector<unsigned> widths;          // ceil(T_k b_k)
  std::vector<std::uint64_t> row_begin;  // first base-code row of each block's run
};

// Deterministic replay of Steps 2.2 and 2.3's bookkeeping from quantized
// radii; shared by encoder and decoder.
BlockPlan plan_from_radii(const std::vector<std::uint32_t>& radius_indices,
                          const BlockSystem& blocks, const CodecConfig& cfg,
                          bool enforce_cap) {
  const std::size_t count = blocks.count();
  BlockPlan plan;
  plan.quantized_radius.resize(count);
  plan.excess.resize(count);
  AllocationProblem problem;
  problem.weights.resize(count);
  problem.sizes = blocks.sizes;
  problem.budget = static_cast<double>(cfg.budget);
  const double eps2 = cfg.epsilon * cfg.epsilon;
  for (std::size_t k = 0; k < count; ++k) {
    const RadiusCodebook grid = radius_codebook(k, blocks, cfg);
    if (radius_indices[k] > grid.last_index) {
      std::ostringstream msg;
      msg << "radius index " << radius_indices[k] << " exceeds grid size " << grid.last_index
          << " in block " << k;
      throw framing_error(msg.str());
    }
    const double s_check = grid.point(radius_indices[k]);
    plan.quantized_radius[k] = s_check;
    // Index 0 is the noise floor sqrt(T_k eps^2) itself, where the excess
    // cancels exactly; re-squaring the root would leave one-ulp residue that
    // the allocation would happily spend real bits on.
    const double excess =
        radius_indices[k] == 0
            ? 0.0
            : std::fmax(0.0, s_check * s_check - static_cast<double>(blocks.sizes[k]) * eps2);
    plan.excess[k] = excess;
    problem.weights[k] = excess * excess / (s_check * s_check);
  }

  const Allocation alloc = allocate_bits(problem);
  plan.rates = alloc.bits;
  plan.widths.resize(count);
  plan.row_begin.resize(count);
  std::uint64_t next_row = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned width = ceil_bits(static_cast<double>(blocks.sizes[k]) * alloc.bits[k]);
    if (enforce_cap && width > cfg.max_codebook_log2)
      throw enumeration_cap_error(k, width, cfg.max_codebook_log2);
    if (width > 62) throw framing_error("direction index width exceeds 62 bits");
    plan.widths[k] = width;
    plan.row_begin[k] = next_row;
    next_row += std::uint64_t{1} << width;
  }
  return plan;
}

class BitWriter {
 public:
  void append(std::uint64_t value, unsigned width) {
    for (unsigned b = width; b-- > 0;) push_bit((value >> b) & 1u);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  void push_bit(unsigned bit) {
    if (used_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (used_ % 8));
    ++used_;
  }
  std::vector<std::uint8_t> bytes_;
  std::size_t used_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t read(unsigned width) {
    std::uint64_t value = 0;
    for (unsigned b = 0; b < width; ++b) {
      if (pos_ >= bytes_.size() * 8) throw framing_error("payload truncated");
      const unsigned bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
      value = (value << 1) | bit;
      ++pos_;
    }
    return value;
  }
  std::size_t bits_read() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 7; b >= 0; --b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v = (v << 8) | in[offset + static_cast<std::size_t>(b)];
  return v;
}

CodecConfig header_config(const QuantizedMessage& msg) {
  CodecConfig cfg;
  cfg.epsilon = msg.epsilon;
  cfg.budget = msg.budget;
  cfg.seed = msg.seed;
  cfg.m0 = msg.m0;
  cfg.c0 = msg.c0;
  return cfg;
}

}  // namespace

enumeration_cap_error::enumeration_cap_error(std::size_t block_index, unsigned requested_bits,
                                             unsigned cap)
    : codec_error([&] {
        std::ostringstream msg;
        msg << "block " << block_index << " needs a 2^" << requested_bits
            << "-row codebook, above the enumeration cap 2^" << cap;
        return msg.str();
      }()),
      block(block_index),
      bits(requested_bits) {}

unsigned RadiusCodebook::index_bits() const {
  return last_index == 0 ? 0u : static_cast<unsigned>(std::bit_width(last_index));
}

RadiusCodebook radius_codebook(std::size_t k, const BlockSystem& blocks, const CodecConfig& cfg) {
  if (k >= blocks.count()) throw std::out_of_range("radius_codebook: block index out of range");
  const double eps2 = cfg.epsilon * cfg.epsilon;
  RadiusCodebook grid;
  grid.spacing = eps2;
  grid.origin = std::sqrt(static_cast<double>(blocks.sizes[k]) * eps2);
  grid.clamp_width = cfg.c0 * std::pow(static_cast<double>(blocks.starts[k]) * M_PI, -cfg.m0);
  grid.last_index = static_cast<std::size_t>(std::ceil(grid.clamp_width / eps2));
  return grid;
}

RadiusQuantization clip_and_quantize_radius(std::span<const double> y_block, std::size_t k,
                                            const BlockSystem& blocks, const CodecConfig& cfg) {
  if (y_block.size() != blocks.sizes[k])
    throw std::invalid_argument("clip_and_quantize_radius: block length mismatch");
  const RadiusCodebook grid = radius_codebook(k, blocks, cfg);
  const double lo = grid.origin;
  const double hi = grid.origin + grid.clamp_width;
  const double clamped = std::clamp(block_norm(y_block), lo, hi);
  // Nearest grid point; exact midpoints round toward the lower index.
  const double offset = (clamped - lo) / grid.spacing;
  const auto raw = static_cast<long long>(std::ceil(offset - 0.5));
  const std::size_t index =
      std::min<std::size_t>(grid.last_index, static_cast<std::size_t>(std::max(raw, 0ll)));
  return RadiusQuantization{clamped, index, grid.point(index)};
}

std::vector<double> base_code_row(std::uint64_t seed, std::uint64_t row, std::size_t length) {
  std::vector<double> out(length);
  for (std::size_t col = 0; col < length; ++col)
    out[col] = rng::normal(seed, row_stream(row), col);
  return out;
}

std::vector<double> base_code_row_unit(std::uint64_t seed, std::uint64_t row, std::size_t length) {
  std::vector<double> z = base_code_row(seed, row, length);
  double ss = 0.0;
  for (double v : z) ss += v * v;
  const double norm = std::sqrt(ss);
  if (norm > 0.0)
    for (double& v : z) v /= norm;
  return z;
}

namespace {

// Correlation of the truncated row with y, up to y's norm: <z, y> / ||z||.
double row_score(std::uint64_t seed, std::uint64_t row, std::span<const double> y) {
  double dot = 0.0;
  double ss = 0.0;
  const std::uint64_t stream = row_stream(row);
  for (std::size_t col = 0; col < y.size(); ++col) {
    const double v = rng::normal(seed, stream, col);
    dot += v * y[col];
    ss += v * v;
  }
  return ss > 0.0 ? dot / std::sqrt(ss) : -HUGE_VAL;
}

}  // namespace

std::uint64_t select_direction_serial(std::uint64_t seed, std::uint64_t row_begin,
                                      std::uint64_t row_count, std::span<const double> y) {
  if (row_count == 0) throw std::invalid_argument("select_direction: empty codebook");
  std::uint64_t best = 0;
  double best_score = -HUGE_VAL;
  for (std::uint64_t i = 0; i < row_count; ++i) {
    const double score = row_score(seed, row_begin + i, y);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

std::uint64_t select_direction(std::uint64_t seed, std::uint64_t row_begin,
                               std::uint64_t row_count, std::span<const double> y) {
  if (row_count == 0) throw std::invalid_argument("select_direction: empty codebook");
  if (row_count < 1024) return select_direction_serial(seed, row_begin, row_count, y);

  std::uint64_t best = 0;
  double best_score = -HUGE_VAL;
  const auto rows = static_cast<std::int64_t>(row_count);
#pragma omp parallel
  {
    std::uint64_t local_best = 0;
    double local_score = -HUGE_VAL;
#pragma omp for nowait
    for (std::int64_t i = 0; i < rows; ++i) {
      const double score = row_score(seed, row_begin + static_cast<std::uint64_t>(i), y);
      if (score > local_score ||
          (score == local_score && static_cast<std::uint64_t>(i) < local_best)) {
        local_score = score;
        local_best = static_cast<std::uint64_t>(i);
      }
    }
#pragma omp critical
    {
      if (local_score > best_score || (local_score == best_score && local_best < best)) {
        best_score = local_score;
        best = local_best;
      }
    }
  }
  return best;
}

QuantizedMessage encode(const ObservedSequence& y, const CodecConfig& cfg) {
  if (y.epsilon != cfg.epsilon)
    throw std::invalid_argument("encode: observation noise level differs from codec config");
  const BlockSystem blocks = build_blocks(cfg.epsilon);
  if (y.values.size() < blocks.length)
    throw std::invalid_argument("encode: observation shorter than the block partition");

  QuantizedMessage msg;
  msg.epsilon = cfg.epsilon;
  msg.budget = cfg.budget;
  msg.seed = cfg.seed;
  msg.m0 = cfg.m0;
  msg.c0 = cfg.c0;

  const std::size_t count = blocks.count();
  msg.radius_indices.resize(count);
  const std::span<const double> values(y.values);
  for (std::size_t k = 0; k < count; ++k) {
    const auto q = clip_and_quantize_radius(block_slice(values, k, blocks), k, blocks, cfg);
    msg.radius_indices[k] = static_cast<std::uint32_t>(q.index);
  }

  const BlockPlan plan = plan_from_radii(msg.radius_indices, blocks, cfg, /*enforce_cap=*/true);
  msg.direction_bits = plan.widths;
  msg.direction_indices.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (plan.widths[k] == 0) {
      msg.direction_indices[k] = 0;
      continue;
    }
    const std::uint64_t rows = std::uint64_t{1} << plan.widths[k];
    msg.direction_indices[k] =
        select_direction(cfg.seed, plan.row_begin[k], rows, block_slice(values, k, blocks));
  }
  return msg;
}

QuantizedEstimate decode(const QuantizedMessage& msg, const CodecConfig& cfg) {
  const CodecConfig header = header_config(msg);
  if (header.epsilon != cfg.epsilon || header.budget != cfg.budget || header.seed != cfg.seed ||
      header.m0 != cfg.m0 || header.c0 != cfg.c0)
    throw header_mismatch_error("decode: config does not match message header");

  const BlockSystem blocks = build_blocks(cfg.epsilon);
  const std::size_t count = blocks.count();
  if (msg.radius_indices.size() != count || msg.direction_indices.size() != count)
    throw framing_error("decode: per-block index count does not match the block system");

  const BlockPlan plan = plan_from_radii(msg.radius_indices, blocks, cfg, /*enforce_cap=*/false);

  QuantizedEstimate estimate{std::vector<double>(blocks.length, 0.0)};
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned width = plan.widths[k];
    const std::uint64_t index = msg.direction_indices[k];
    if (width == 0) {
      if (index != 0) throw framing_error("decode: nonzero index in zero-width block");
      continue;
    }
    if (index >> width) throw framing_error("decode: direction index out of range");
    const double s_check = plan.quantized_radius[k];
    const double factor =
        plan.excess[k] / s_check * std::sqrt(1.0 - std::exp2(-2.0 * plan.rates[k]));
    if (factor == 0.0) continue;
    const std::vector<double> z =
        base_code_row_unit(cfg.seed, plan.row_begin[k] + index, blocks.sizes[k]);
    double* out = estimate.coefficients.data() + (blocks.starts[k] - 1);
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = factor * z[i];
  }
  return estimate;
}

std::size_t QuantizedMessage::payload_bits(const BlockSystem& blocks,
                                           const CodecConfig& cfg) const {
  std::size_t bits = 0;
  for (std::size_t k = 0; k < blocks.count(); ++k)
    bits += radius_codebook(k, blocks, cfg).index_bits();
  for (unsigned w : direction_bits) bits += w;
  return bits;
}

std::vector<std::uint8_t> serialize(const QuantizedMessage& msg) {
  const CodecConfig cfg = header_config(msg);
  const BlockSystem blocks = build_blocks(cfg.epsilon);
  if (msg.radius_indices.size() != blocks.count() ||
      msg.direction_indices.size() != blocks.count())
    throw framing_error("serialize: per-block index count does not match the block system");
  const BlockPlan plan = plan_from_radii(msg.radius_indices, blocks, cfg, /*enforce_cap=*/false);

  std::vector<std::uint8_t> out(magic.begin(), magic.end());
  out.push_back(format_version);
  put_u64(out, std::bit_cast<std::uint64_t>(msg.epsilon));
  put_u64(out, msg.budget);
  put_u64(out, msg.seed);
  put_u64(out, std::bit_cast<std::uint64_t>(msg.m0));
  put_u64(out, std::bit_cast<std::uint64_t>(msg.c0));

  BitWriter writer;
  for (std::size_t k = 0; k < blocks.count(); ++k)
    writer.append(msg.radius_indices[k], radius_codebook(k, blocks, cfg).index_bits());
  for (std::size_t k = 0; k < blocks.count(); ++k)
    writer.append(msg.direction_indices[k], plan.widths[k]);
  const std::vector<std::uint8_t> payload = writer.take();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

QuantizedMessage deserialize(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t header_size = 4 + 1 + 5 * 8;
  if (bytes.size() < header_size) throw framing_error("deserialize: truncated header");
  if (!std::equal(magic.begin(), magic.end(), bytes.begin()))
    throw framing_error("deserialize: bad magic");
  if (bytes[4] != format_version) throw framing_error("deserialize: unsupported version");

  QuantizedMessage msg;
  msg.epsilon = std::bit_cast<double>(get_u64(bytes, 5));
  msg.budget = get_u64(bytes, 13);
  msg.seed = get_u64(bytes, 21);
  msg.m0 = std::bit_cast<double>(get_u64(bytes, 29));
  msg.c0 = std::bit_cast<double>(get_u64(bytes, 37));
  if (!(msg.epsilon > 0.0) || !(msg.epsilon < 1.0) || !(msg.m0 > 0.0) || !(msg.c0 > 0.0))
    throw framing_error("deserialize: header fields out of range");

  const CodecConfig cfg = header_config(msg);
  const BlockSystem blocks = build_blocks(cfg.epsilon);
  const std::size_t count = blocks.count();

  BitReader reader(bytes.subspan(header_size));
  msg.radius_indices.resize(count);
  std::size_t bits = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned width = radius_codebook(k, blocks, cfg).index_bits();
    msg.radius_indices[k] = static_cast<std::uint32_t>(reader.read(width));
    bits += width;
  }
  // Direction widths are derivable only after every radius index is read.
  const BlockPlan plan = plan_from_radii(msg.radius_indices, blocks, cfg, /*enforce_cap=*/false);
  msg.direction_bits = plan.widths;
  msg.direction_indices.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    msg.direction_indices[k] = reader.read(plan.widths[k]);
    bits += plan.widths[k];
  }
  if (bytes.size() - header_size != (bits + 7) / 8)
    throw framing_error("deserialize: payload length mismatch");
  return msg;
}

std::vector<double> james_stein_block(std::span<const double> y, double epsilon) {
  if (y.empty()) throw std::invalid_argument("james_stein_block: empty block");
  const double norm2 = [&] {
    double ss = 0.0;
    for (double v : y) ss += v * v;
    return ss;
  }();
  std::vector<double> out(y.size(), 0.0);
  const double noise = static_cast<double>(y.size()) * epsilon * epsilon;
  if (norm2 <= noise || norm2 == 0.0) return out;
  const double factor = (norm2 - noise) / norm2;
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = factor * y[i];
  return out;
}

double distortion_bound(double q, std::size_t t) {
  if (q < 0.0) throw std::invalid_argument("distortion_bound: rate must be >= 0");
  if (t == 0) throw std::invalid_argument("distortion_bound: dimension must be >= 1");
  const double td = static_cast<double>(t);
  const double denom = td - 6.0 * std::log(td) - 7.0;
  if (denom <= 0.0) throw std::domain_error("distortion_bound: bound vacuous at this dimension");
  const double nu = (6.0 * std::log(td) + 7.0) / denom;
  return std::exp2(-2.0 * q) * (1.0 + nu) + 2.0 * std::exp(-2.0 * td);
}

}  // namespace squant
