#include "qrelay/simulate.hpp"

#include <bit>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace qrelay {

namespace {

// Probability of one party's 4-bit dark pattern.
double dark_mask_prob(unsigned mask, double d) {
  double p = 1.0;
  for (int bit = 0; bit < 4; ++bit) {
    p *= ((mask >> bit) & 1u) ? d : (1.0 - d);
  }
  return p;
}

// Exactly-one-click rule for a party. Detector 0 is the one the photon
// reaches when present; a dark count there is absorbed into the photon
// click, so only detectors 1..3 must stay silent. Without the photon,
// exactly one of the four detectors may fire.
bool party_single_click(bool photon, unsigned dark_mask) {
  if (photon) {
    return (dark_mask & 0b1110u) == 0;
  }
  return std::popcount(dark_mask) == 1;
}

struct Tally {
  double sift = 0.0;
  double genuine = 0.0;  // sifted with every click photon-induced
};

Tally enumerate_direct(double x, double d) {
  Tally tally;
  for (int basis_a = 0; basis_a < 2; ++basis_a) {
    for (int basis_b = 0; basis_b < 2; ++basis_b) {
      if (basis_a != basis_b) continue;  // mismatched bases never sift
      for (int photon_a = 0; photon_a < 2; ++photon_a) {
        for (int photon_b = 0; photon_b < 2; ++photon_b) {
          const double p_photons = (photon_a ? x : 1.0 - x) * (photon_b ? x : 1.0 - x);
          for (unsigned dark_a = 0; dark_a < 16; ++dark_a) {
            if (!party_single_click(photon_a, dark_a)) continue;
            for (unsigned dark_b = 0; dark_b < 16; ++dark_b) {
              if (!party_single_click(photon_b, dark_b)) continue;
              const double p = 0.25 * p_photons *
                               dark_mask_prob(dark_a, d) * dark_mask_prob(dark_b, d);
              tally.sift += p;
              if (photon_a && photon_b) tally.genuine += p;
            }
          }
        }
      }
    }
  }
  return tally;
}

Tally enumerate_relay(double x, double y, double d) {
  Tally tally;
  for (int basis_a = 0; basis_a < 2; ++basis_a) {
    for (int basis_b = 0; basis_b < 2; ++basis_b) {
      if (basis_a != basis_b) continue;
      for (int photon_a = 0; photon_a < 2; ++photon_a) {
        for (int photon_b = 0; photon_b < 2; ++photon_b) {
          const double p_outer = (photon_a ? x : 1.0 - x) * (photon_b ? x : 1.0 - x);
          for (int bsm_2 = 0; bsm_2 < 2; ++bsm_2) {
            for (int bsm_4 = 0; bsm_4 < 2; ++bsm_4) {
              const double p_bsm_photons =
                  (bsm_2 ? y : 1.0 - y) * (bsm_4 ? y : 1.0 - y);
              for (unsigned dark_bsm = 0; dark_bsm < 4; ++dark_bsm) {
                const bool click_2 = bsm_2 || (dark_bsm & 1u);
                const bool click_4 = bsm_4 || (dark_bsm & 2u);
                if (!(click_2 && click_4)) continue;
                const double p_bsm_darks = ((dark_bsm & 1u) ? d : 1.0 - d) *
                                           ((dark_bsm & 2u) ? d : 1.0 - d);
                // Genuine double detections pass the projection with
                // probability 1/2; dark-assisted coincidences are accepted
                // outright.
                const double acceptance = (bsm_2 && bsm_4) ? 0.5 : 1.0;
                for (unsigned dark_a = 0; dark_a < 16; ++dark_a) {
                  if (!party_single_click(photon_a, dark_a)) continue;
                  for (unsigned dark_b = 0; dark_b < 16; ++dark_b) {
                    if (!party_single_click(photon_b, dark_b)) continue;
                    const double p = 0.25 * p_outer * p_bsm_photons * p_bsm_darks *
                                     acceptance * dark_mask_prob(dark_a, d) *
                                     dark_mask_prob(dark_b, d);
                    tally.sift += p;
                    if (photon_a && photon_b && bsm_2 && bsm_4) tally.genuine += p;
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return tally;
}

// [0, 1) uniform from the engine's raw 64-bit output; fully specified by the
// standard, so streams are identical across platforms.
inline double next_unit(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

struct ShardCounts {
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;
};

// One shard of the sampling run. Every indicator is drawn each pulse, in a
// fixed order, so the stream layout never depends on outcomes.
ShardCounts run_shard(Scheme scheme, double x, double y, double d,
                      double error_prob_genuine, std::uint64_t pulses,
                      std::uint64_t stream_seed) {
  std::mt19937_64 eng(stream_seed);
  ShardCounts counts;
  const bool relay = scheme == Scheme::Relay;
  for (std::uint64_t i = 0; i < pulses; ++i) {
    const bool basis_a = next_unit(eng) < 0.5;
    const bool basis_b = next_unit(eng) < 0.5;
    const bool photon_a = next_unit(eng) < x;
    const bool photon_b = next_unit(eng) < x;
    bool bsm_2 = false;
    bool bsm_4 = false;
    if (relay) {
      bsm_2 = next_unit(eng) < y;
      bsm_4 = next_unit(eng) < y;
    }
    unsigned dark_a = 0;
    unsigned dark_b = 0;
    for (int bit = 0; bit < 4; ++bit) {
      dark_a |= (next_unit(eng) < d ? 1u : 0u) << bit;
    }
    for (int bit = 0; bit < 4; ++bit) {
      dark_b |= (next_unit(eng) < d ? 1u : 0u) << bit;
    }
    bool bsm_accept = true;
    bool bsm_genuine = true;
    if (relay) {
      const bool dark_2 = next_unit(eng) < d;
      const bool dark_4 = next_unit(eng) < d;
      const bool coincidence = (bsm_2 || dark_2) && (bsm_4 || dark_4);
      bsm_genuine = bsm_2 && bsm_4;
      const bool projection = next_unit(eng) < 0.5;
      bsm_accept = coincidence && (bsm_genuine ? projection : true);
    }
    const double error_coin = next_unit(eng);

    if (basis_a != basis_b) continue;
    if (!party_single_click(photon_a, dark_a)) continue;
    if (!party_single_click(photon_b, dark_b)) continue;
    if (!bsm_accept) continue;
    ++counts.sifted;
    const bool genuine = photon_a && photon_b && bsm_genuine;
    const double error_prob = genuine ? error_prob_genuine : 0.5;
    if (error_coin < error_prob) ++counts.errors;
  }
  return counts;
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream_index) {
  std::uint64_t z = seed + (stream_index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

ExactResult enumerate_exact(Scheme scheme, double transmission,
                            const LinkParams& params) {
  params.validate();
  if (!(transmission > 0.0) || transmission > 1.0) {
    throw std::invalid_argument("transmission must be in (0, 1]");
  }
  const double d = params.dark_count_prob;
  Tally tally;
  double coincidence_visibility = 0.0;
  if (scheme == Scheme::Direct) {
    const double x = std::sqrt(transmission) * params.detector_efficiency;
    coincidence_visibility = params.pair_visibility();
    tally = enumerate_direct(x, d);
  } else {
    const double x = std::sqrt(std::sqrt(transmission)) * params.detector_efficiency;
    const double y = x * params.polarizer_transmission;
    coincidence_visibility = params.four_photon_visibility();
    tally = enumerate_relay(x, y, d);
  }
  ExactResult result;
  result.p_sift = tally.sift;
  // All-genuine events err with probability (1-V_k)/2, dark-assisted ones
  // with 1/2, which collapses to signal = V_k * genuine.
  result.p_signal = coincidence_visibility * tally.genuine;
  result.qber = result.p_sift > 0.0
                    ? 0.5 * (1.0 - result.p_signal / result.p_sift)
                    : std::numeric_limits<double>::quiet_NaN();
  return result;
}

McEstimate mc_estimate(Scheme scheme, double transmission, const LinkParams& params,
                       std::uint64_t n_pulses, std::uint64_t seed,
                       std::uint32_t shard_count) {
  params.validate();
  if (!(transmission > 0.0) || transmission > 1.0) {
    throw std::invalid_argument("transmission must be in (0, 1]");
  }
  if (n_pulses == 0) {
    throw std::domain_error("empty sample: n_pulses must be at least 1");
  }
  if (shard_count == 0) {
    throw std::invalid_argument("shard_count must be at least 1");
  }

  const double arm = scheme == Scheme::Direct
                         ? std::sqrt(transmission)
                         : std::sqrt(std::sqrt(transmission));
  const double x = arm * params.detector_efficiency;
  const double y = x * params.polarizer_transmission;
  const double d = params.dark_count_prob;
  const double v_k = scheme == Scheme::Direct ? params.pair_visibility()
                                              : params.four_photon_visibility();
  const double error_prob_genuine = 0.5 * (1.0 - v_k);

  std::vector<std::uint64_t> shard_pulses(shard_count, n_pulses / shard_count);
  for (std::uint64_t i = 0; i < n_pulses % shard_count; ++i) ++shard_pulses[i];

  ShardCounts total;
  if (shard_count == 1) {
    total = run_shard(scheme, x, y, d, error_prob_genuine, n_pulses,
                      derive_stream_seed(seed, 0));
  } else {
    std::vector<std::future<ShardCounts>> futures;
    futures.reserve(shard_count);
    for (std::uint32_t s = 0; s < shard_count; ++s) {
      futures.push_back(std::async(std::launch::async, run_shard, scheme, x, y, d,
                                   error_prob_genuine, shard_pulses[s],
                                   derive_stream_seed(seed, s)));
    }
    for (auto& f : futures) {
      const ShardCounts c = f.get();
      total.sifted += c.sifted;
      total.errors += c.errors;
    }
  }

  McEstimate estimate;
  estimate.n_pulses = n_pulses;
  estimate.n_sifted = total.sifted;
  estimate.n_errors = total.errors;
  estimate.seed = seed;
  estimate.shard_count = shard_count;
  if (total.sifted > 0) {
    const double q = static_cast<double>(total.errors) / static_cast<double>(total.sifted);
    estimate.qber_hat = q;
    estimate.standard_error =
        std::sqrt(q * (1.0 - q) / static_cast<double>(total.sifted));
  }
  return estimate;
}

}  // namespace qrelay
