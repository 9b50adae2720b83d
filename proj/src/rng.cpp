#include "pdl/rng.hpp"

namespace pdl {

namespace {

std::mt19937_64 make_engine(std::uint64_t master_seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                    0x70646c31u};
  return std::mt19937_64(seq);
}

}  // namespace

ChainRng::ChainRng(std::uint64_t master_seed, std::uint64_t stream_id)
    : engine_(make_engine(master_seed, stream_id)) {}

}  // namespace pdl
