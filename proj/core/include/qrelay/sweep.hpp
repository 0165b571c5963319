#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qrelay/model.hpp"
#include "qrelay/simulate.hpp"

namespace qrelay {

// QBER thresholds below which a secret key can still be distilled.
// Two-way classical post-processing tolerates 20%; the 11% one-way bound is
// exposed for comparison only.
inline constexpr double kTwoWaySecurityBound = 0.20;
inline constexpr double kOneWaySecurityBound = 0.11;

// MC columns are attached to sweep rows only where the sift probability is
// at least this large; below it any practical pulse count is starved of
// events and the enumeration engine is the reliable reference.
inline constexpr double kMcMinSiftProbability = 1e-5;

// An attenuation grid over one or more schemes, optionally with a seeded
// Monte Carlo column per row.
struct SweepSpec {
  std::vector<Scheme> schemes;
  double from_db = 0.0;
  double to_db = 0.0;
  double step_db = 1.0;
  bool include_mc = false;
  std::uint64_t mc_pulses = 0;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on an empty scheme list, from > to,
  // step <= 0, or a grid of more than 1e6 points.
  void validate() const;
};

struct SweepRow {
  QberPoint point;
  std::optional<McEstimate> mc;  // present only when requested and not starved
};

struct ThresholdResult {
  Scheme scheme = Scheme::Direct;
  double target_qber = 0.0;
  double crossing_db = 0.0;
  double crossing_km = 0.0;
  double achieved_qber = 0.0;
};

// a = -10*log10(t). Rejects t outside (0, 1].
double db_from_transmission(double transmission);
// t = 10^(-a/10). Rejects a < 0.
double transmission_from_db(double attenuation_db);
// Equivalent fiber length for a total attenuation: a / alpha.
double distance_km(double attenuation_db, double alpha_db_per_km);

// Full QberPoint for one scheme at one total attenuation.
QberPoint evaluate_point(Scheme scheme, double attenuation_db,
                         const LinkParams& params);

// One row per grid step per scheme, schemes in the given order, each in
// ascending attenuation. Rows are keyed to grid indices, so per-row MC seeds
// and therefore the whole sweep are reproducible from spec.seed alone.
std::vector<SweepRow> sweep_curve(const SweepSpec& spec, const LinkParams& params);

// Bisection on attenuation over [0, 200] dB for the point where the QBER
// reaches target_qber, to |qber - target| <= 1e-6. QBER is monotone in
// attenuation (covered by the test suite), so the bracket is valid whenever
// the target lies between the endpoint QBERs; otherwise throws
// std::domain_error (for example a target below the zero-attenuation
// visibility floor).
ThresholdResult find_threshold(Scheme scheme, double target_qber,
                               const LinkParams& params);

}  // namespace qrelay
