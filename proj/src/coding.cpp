#include "mblast/coding.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mblast/rng.hpp"
#include "mblast/types.hpp"

namespace mblast {

void ConvCode::validate() const {
  if (constraint_length < 2 || constraint_length > 16) {
    throw ConfigError("constraint length must lie in [2, 16]");
  }
  for (auto g : generators) {
    if (g == 0 || std::bit_width(g) > static_cast<unsigned>(constraint_length)) {
      throw ConfigError("generator degree must be below the constraint length");
    }
  }
}

unsigned parse_octal(const std::string& s) {
  if (s.empty()) throw ConfigError("empty octal generator");
  unsigned v = 0;
  for (char c : s) {
    if (c < '0' || c > '7') throw ConfigError("generator '" + s + "' is not octal");
    v = v * 8 + static_cast<unsigned>(c - '0');
  }
  return v;
}

namespace {

// Register layout: bit (memory-1-i) holds the input i steps back, so the
// newest bit sits next to the current input in the generator's MSB order.
inline std::array<std::uint8_t, 2> branch_output(unsigned state, unsigned input, const ConvCode& code) {
  const unsigned reg = (input << code.memory()) | state;
  return {static_cast<std::uint8_t>(std::popcount(reg & code.generators[0]) & 1U),
          static_cast<std::uint8_t>(std::popcount(reg & code.generators[1]) & 1U)};
}

inline unsigned next_state(unsigned state, unsigned input, const ConvCode& code) {
  return ((input << code.memory()) | state) >> 1;
}

}  // namespace

Bits conv_encode(std::span<const std::uint8_t> info, const ConvCode& code) {
  code.validate();
  if (info.empty()) throw std::invalid_argument("conv_encode: empty input");
  Bits out;
  out.reserve(code.coded_length(info.size()));
  unsigned state = 0;
  auto push = [&](unsigned bit) {
    const auto c = branch_output(state, bit, code);
    out.push_back(c[0]);
    out.push_back(c[1]);
    state = next_state(state, bit, code);
  };
  for (auto b : info) push(b & 1U);
  for (int i = 0; i < code.memory(); ++i) push(0);
  return out;
}

Bits viterbi_decode_soft(std::span<const double> llrs, const ConvCode& code) {
  code.validate();
  if (llrs.size() % 2 != 0 || llrs.size() < code.coded_length(1)) {
    throw std::invalid_argument("viterbi_decode_soft: LLR length is not a valid codeword length");
  }
  const std::size_t steps = llrs.size() / 2;
  const std::size_t info_len = steps - static_cast<std::size_t>(code.memory());
  const int S = code.num_states();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // Precomputed trellis: for each next state, its two (prev, input) branches.
  struct Branch {
    unsigned prev;
    unsigned input;
    std::array<double, 2> sign;  // 1 - 2c per output bit
  };
  std::vector<std::array<Branch, 2>> incoming(S);
  std::vector<int> fill(S, 0);
  for (unsigned s = 0; s < static_cast<unsigned>(S); ++s) {
    for (unsigned b = 0; b < 2; ++b) {
      const unsigned ns = next_state(s, b, code);
      const auto c = branch_output(s, b, code);
      incoming[ns][fill[ns]++] = {s, b, {1.0 - 2.0 * c[0], 1.0 - 2.0 * c[1]}};
    }
  }
  // Predecessors are generated in increasing state order, so index 0 is the
  // lower state.

  std::vector<double> metric(S, kNegInf), next(S);
  metric[0] = 0.0;
  std::vector<std::uint8_t> decision(steps * static_cast<std::size_t>(S));

  for (std::size_t t = 0; t < steps; ++t) {
    const double l0 = llrs[2 * t];
    const double l1 = llrs[2 * t + 1];
    const bool tail = t >= info_len;
    for (int ns = 0; ns < S; ++ns) {
      double best = kNegInf;
      std::uint8_t pick = 0;
      for (std::uint8_t j = 0; j < 2; ++j) {
        const auto& br = incoming[ns][j];
        if (tail && br.input != 0) continue;
        const double pm = metric[br.prev];
        if (pm == kNegInf) continue;
        const double cand = pm + br.sign[0] * l0 + br.sign[1] * l1;
        if (cand > best) {
          best = cand;
          pick = j;
        }
      }
      next[ns] = best;
      decision[t * S + ns] = pick;
    }
    metric.swap(next);
  }

  Bits info(info_len);
  unsigned state = 0;
  for (std::size_t t = steps; t-- > 0;) {
    const auto& br = incoming[state][decision[t * S + state]];
    if (t < info_len) info[t] = static_cast<std::uint8_t>(br.input);
    state = br.prev;
  }
  return info;
}

std::vector<std::size_t> make_interleaver(std::size_t length, std::uint64_t seed) {
  std::vector<std::size_t> perm(length);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto rng = substream(seed, {0x1e7e5ULL, length});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace mblast
