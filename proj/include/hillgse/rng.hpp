#pragma once

#include <cstdint>
#include <random>

namespace hillgse {

/// Random source for sample `index` of stream `stream` under a run seed. The
/// engine state is a pure function of (seed, stream, index), so a sample can
/// be regenerated on any worker in any order.
class SampleRng {
 public:
  SampleRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace hillgse
