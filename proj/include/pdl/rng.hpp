#pragma once

#include <cstdint>
#include <random>

#include "pdl/types.hpp"

namespace pdl {

// Per-chain normal stream. The stream for (master_seed, stream_id) does not
// depend on how many other streams exist or in which order they run.
class ChainRng {
 public:
  ChainRng(std::uint64_t master_seed, std::uint64_t stream_id);

  double normal() { return normal_(engine_); }
  void fill_normal(VecRef out) {
    for (Index i = 0; i < out.size(); ++i) out[i] = normal_(engine_);
  }
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace pdl
