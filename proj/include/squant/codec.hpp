// Quantized estimator: radius quantization, adaptive bit allocation, spherical
// direction coding against a shared lazily-generated base code, bitstream
// serialization, and shrinkage decoding.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "squant/block_system.hpp"
#include "squant/sequence_model.hpp"

namespace squant {

struct CodecConfig {
  double epsilon = 0.0;
  std::uint64_t budget = 0;  // total direction bits B
  std::uint64_t seed = 0;    // shared base-code seed
  double m0 = 1.0;           // smoothness lower bound
  double c0 = 1.0;           // radius upper bound
  unsigned max_codebook_log2 = 26;  // enumeration cap per block

  friend bool operator==(const CodecConfig&, const CodecConfig&) = default;
};

struct codec_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A block's allocation asks for more codewords than the enumeration cap.
struct enumeration_cap_error : codec_error {
  enumeration_cap_error(std::size_t block_index, unsigned requested_bits, unsigned cap);
  std::size_t block;
  unsigned bits;
};

// Decoder config does not match the message header.
struct header_mismatch_error : codec_error {
  using codec_error::codec_error;
};

// Malformed or truncated bitstream.
struct framing_error : codec_error {
  using codec_error::codec_error;
};

// Radius grid for one block: points sqrt(T_k eps^2) + i eps^2, i = 0..s_k,
// with s_k = ceil(eps^{-2} c0 (j_k pi)^{-m0}).
struct RadiusCodebook {
  double origin;           // sqrt(T_k eps^2)
  double spacing;          // eps^2
  std::size_t last_index;  // s_k
  double clamp_width;      // c0 (j_k pi)^{-m0}

  double point(std::size_t i) const { return origin + static_cast<double>(i) * spacing; }
  unsigned index_bits() const;
};

RadiusCodebook radius_codebook(std::size_t k, const BlockSystem& blocks, const CodecConfig& cfg);

struct RadiusQuantization {
  double clamped;     // S_k
  std::size_t index;  // i_k
  double quantized;   // S-check_k
};

// Clamps ||y_block|| into the codebook range and snaps to the nearest grid
// point; exact midpoints round toward the lower index.
RadiusQuantization clip_and_quantize_radius(std::span<const double> y_block, std::size_t k,
                                            const BlockSystem& blocks, const CodecConfig& cfg);

// Row `row` of the conceptual 2^B x T_K standard-normal base code, realized
// lazily from the counter-based generator. Truncation to a prefix is stable:
// entry (row, col) does not depend on the requested length.
std::vector<double> base_code_row(std::uint64_t seed, std::uint64_t row, std::size_t length);

// Same row, normalized to the unit sphere.
std::vector<double> base_code_row_unit(std::uint64_t seed, std::uint64_t row, std::size_t length);

// Index of the row in [row_begin, row_begin + row_count) whose normalized
// truncation maximizes the inner product with y; ties go to the lowest row.
// The _serial variant is the reference implementation; the default may use
// OpenMP and returns identical results.
std::uint64_t select_direction(std::uint64_t seed, std::uint64_t row_begin,
                               std::uint64_t row_count, std::span<const double> y);
std::uint64_t select_direction_serial(std::uint64_t seed, std::uint64_t row_begin,
                                      std::uint64_t row_count, std::span<const double> y);

struct QuantizedMessage {
  // Header echoed into the bitstream for self-description.
  double epsilon = 0.0;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  double m0 = 1.0;
  double c0 = 1.0;

  std::vector<std::uint32_t> radius_indices;     // i_k, one per block
  std::vector<std::uint64_t> direction_indices;  // offset within the block's row run
  std::vector<unsigned> direction_bits;          // ceil(T_k b_k); derived, not serialized

  std::size_t payload_bits(const BlockSystem& blocks, const CodecConfig& cfg) const;
};

QuantizedMessage encode(const ObservedSequence& y, const CodecConfig& cfg);

struct QuantizedEstimate {
  std::vector<double> coefficients;  // length N, zero beyond the blocks
};

QuantizedEstimate decode(const QuantizedMessage& msg, const CodecConfig& cfg);

// Bitstream layout: 4-byte magic, 1-byte version, then big-endian header
// (epsilon f64, budget u64, seed u64, m0 f64, c0 f64), then the bit-packed
// payload: all radius indices in block order, then all direction indices in
// block order, zero-padded to a whole byte.
std::vector<std::uint8_t> serialize(const QuantizedMessage& msg);
QuantizedMessage deserialize(std::span<const std::uint8_t> bytes);

// Positive-part James-Stein shrinkage with n = block length, sigma^2 = eps^2.
std::vector<double> james_stein_block(std::span<const double> y, double epsilon);

// Expected-distortion bound for a random spherical codebook of 2^{q t} rows in
// dimension t: 2^{-2q} (1 + nu(t)) + 2 e^{-2t} with
// nu(t) = (6 log t + 7) / (t - 6 log t - 7). Throws std::domain_error when the
// denominator is <= 0 (bound vacuous).
double distortion_bound(double q, std::size_t t);

}  // namespace squant
