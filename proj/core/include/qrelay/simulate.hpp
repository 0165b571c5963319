#pragma once

#include <cstdint>
#include <optional>

#include "qrelay/model.hpp"

namespace qrelay {

// Exact per-pulse statistics obtained by summing the complete discrete
// outcome space of one pulse: a photon-detection indicator per arm, a
// dark-count indicator per detector, a basis choice per party, and the
// Bell-analyzer acceptance. Deliberately independent of the closed forms in
// model.hpp so the two can be checked against each other.
struct ExactResult {
  double p_sift = 0.0;
  double p_signal = 0.0;
  double qber = 0.0;
};

ExactResult enumerate_exact(Scheme scheme, double transmission,
                            const LinkParams& params);

// Counts from a seeded per-pulse Monte Carlo run. qber_hat and
// standard_error are absent (not zero) when no pulse survived sifting.
struct McEstimate {
  std::uint64_t n_pulses = 0;
  std::uint64_t n_sifted = 0;
  std::uint64_t n_errors = 0;
  std::optional<double> qber_hat;       // n_errors / n_sifted
  std::optional<double> standard_error; // sqrt(q(1-q)/n_sifted), normal approx
  std::uint64_t seed = 0;
  std::uint32_t shard_count = 1;
};

// Samples n_pulses independent pulses of the same per-pulse model that
// enumerate_exact sums exactly, drawing every indicator in a fixed order.
// Bit-reproducible for a fixed (seed, shard_count): each shard owns a
// substream derived from (seed, shard index) and shard counters merge by
// addition, so changing shard_count changes the stream but never breaks
// reproducibility. Throws std::domain_error when n_pulses is zero.
McEstimate mc_estimate(Scheme scheme, double transmission, const LinkParams& params,
                       std::uint64_t n_pulses, std::uint64_t seed,
                       std::uint32_t shard_count = 1);

// SplitMix64 round used to derive independent substream seeds; exposed so
// sweeps can assign one seed per row from a single user seed.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream_index);

}  // namespace qrelay
