#pragma once

#include <cstdint>
#include <random>

namespace bessreg {

using Rng = std::mt19937_64;

/// Stream purposes; keeps, e.g., covariate and response draws of one
/// replication on separate streams.
enum class StreamTag : std::uint32_t {
    covariates = 1,
    response = 2,
    contamination = 3,
    envelope = 4,
    partition = 5,
    jitter = 6,
};

/// Independent generator for task `index` under `master_seed`. The state
/// depends only on (master_seed, index, tag), never on scheduling.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t index, StreamTag tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(tag)};
    return Rng(seq);
}

}  // namespace bessreg
