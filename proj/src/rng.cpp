#include "hillgse/rng.hpp"

namespace hillgse {
namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(index), hi(index)};
  return std::mt19937_64(seq);
}

}  // namespace

SampleRng::SampleRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
    : engine_(seeded_engine(seed, stream, index)) {}

}  // namespace hillgse
