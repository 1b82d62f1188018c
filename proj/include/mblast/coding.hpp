#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mblast {

using Bits = std::vector<std::uint8_t>;

/// Rate-1/2 feedforward convolutional code with zero-tail termination.
/// Generators are given in the usual octal notation, most significant tap on
/// the current input bit.
struct ConvCode {
  int constraint_length = 7;
  std::array<unsigned, 2> generators{0133, 0171};

  int memory() const { return constraint_length - 1; }
  int num_states() const { return 1 << memory(); }
  std::size_t coded_length(std::size_t info_bits) const {
    return 2 * (info_bits + static_cast<std::size_t>(memory()));
  }
  void validate() const;
};

/// Parses "133" as octal 0133.
unsigned parse_octal(const std::string& s);

Bits conv_encode(std::span<const std::uint8_t> info, const ConvCode& code);

/// Soft-decision Viterbi. LLRs are log P(bit=0)/P(bit=1), i.e. positive favors
/// the +1 symbol that carries bit 0. Branch metric is sum llr * (1 - 2c);
/// equal path metrics keep the survivor from the lower predecessor state.
Bits viterbi_decode_soft(std::span<const double> llrs, const ConvCode& code);

/// Bit 0 -> +1, bit 1 -> -1.
inline double bpsk_map(std::uint8_t bit) { return bit ? -1.0 : 1.0; }

/// Seeded random permutation: out[i] = in[perm[i]].
std::vector<std::size_t> make_interleaver(std::size_t length, std::uint64_t seed);

template <typename T>
std::vector<T> interleave(const std::vector<T>& in, const std::vector<std::size_t>& perm) {
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = in[perm[i]];
  return out;
}

template <typename T>
std::vector<T> deinterleave(const std::vector<T>& in, const std::vector<std::size_t>& perm) {
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[perm[i]] = in[i];
  return out;
}

}  // namespace mblast
