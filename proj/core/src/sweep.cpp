#include "qrelay/sweep.hpp"

#include <cmath>
#include <stdexcept>

namespace qrelay {

namespace {

constexpr double kBracketHighDb = 200.0;
constexpr double kQberTolerance = 1e-6;
constexpr std::uint64_t kMaxGridPoints = 1'000'000;

// Stream-index stride separating the per-scheme seed blocks of a sweep;
// larger than any legal grid, so rows never share a stream.
constexpr std::uint64_t kSchemeSeedStride = 2'000'003;

std::uint64_t grid_point_count(double from_db, double to_db, double step_db) {
  // Index-based grid; the epsilon keeps N*step endpoints inclusive despite
  // rounding in the division.
  return static_cast<std::uint64_t>(
             std::floor((to_db - from_db) / step_db + 1e-9)) + 1;
}

}  // namespace

void SweepSpec::validate() const {
  if (schemes.empty()) {
    throw std::invalid_argument("sweep needs at least one scheme");
  }
  if (!(step_db > 0.0)) {
    throw std::invalid_argument("step_db must be positive");
  }
  if (from_db < 0.0 || to_db < from_db) {
    throw std::invalid_argument("need 0 <= from_db <= to_db");
  }
  if (grid_point_count(from_db, to_db, step_db) > kMaxGridPoints) {
    throw std::invalid_argument("sweep grid exceeds 1e6 points");
  }
  if (include_mc && mc_pulses == 0) {
    throw std::invalid_argument("mc_pulses must be at least 1 when MC is enabled");
  }
}

double db_from_transmission(double transmission) {
  if (!(transmission > 0.0) || transmission > 1.0) {
    throw std::invalid_argument("transmission must be in (0, 1]");
  }
  return -10.0 * std::log10(transmission);
}

double transmission_from_db(double attenuation_db) {
  if (attenuation_db < 0.0) {
    throw std::invalid_argument("attenuation_db must be non-negative");
  }
  return std::pow(10.0, -attenuation_db / 10.0);
}

double distance_km(double attenuation_db, double alpha_db_per_km) {
  if (!(alpha_db_per_km > 0.0)) {
    throw std::invalid_argument("alpha_db_per_km must be positive");
  }
  return attenuation_db / alpha_db_per_km;
}

QberPoint evaluate_point(Scheme scheme, double attenuation_db,
                         const LinkParams& params) {
  const double t = transmission_from_db(attenuation_db);
  QberPoint point;
  point.scheme = scheme;
  point.attenuation_db = attenuation_db;
  point.transmission = t;
  point.distance_km = distance_km(attenuation_db, params.alpha_db_per_km);
  point.qber = qber(scheme, t, params);
  point.p_sift = sift_probability(scheme, t, params);
  point.sift_rate_hz = params.rep_rate_hz * point.p_sift;
  return point;
}

std::vector<SweepRow> sweep_curve(const SweepSpec& spec, const LinkParams& params) {
  spec.validate();
  params.validate();
  const std::uint64_t points = grid_point_count(spec.from_db, spec.to_db, spec.step_db);
  std::vector<SweepRow> rows;
  rows.reserve(points * spec.schemes.size());
  for (std::size_t scheme_index = 0; scheme_index < spec.schemes.size(); ++scheme_index) {
    const Scheme scheme = spec.schemes[scheme_index];
    for (std::uint64_t i = 0; i < points; ++i) {
      const double a_db = spec.from_db + static_cast<double>(i) * spec.step_db;
      SweepRow row;
      row.point = evaluate_point(scheme, a_db, params);
      if (spec.include_mc && row.point.p_sift >= kMcMinSiftProbability) {
        const std::uint64_t row_seed = derive_stream_seed(
            spec.seed, scheme_index * kSchemeSeedStride + i);
        row.mc = mc_estimate(scheme, row.point.transmission, params,
                             spec.mc_pulses, row_seed);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

ThresholdResult find_threshold(Scheme scheme, double target_qber,
                               const LinkParams& params) {
  params.validate();
  if (!(target_qber > 0.0) || !(target_qber < 0.5)) {
    throw std::invalid_argument("target_qber must be in (0, 0.5)");
  }
  const double qber_floor = qber(scheme, 1.0, params);
  if (qber_floor >= target_qber) {
    throw std::domain_error(
        "no crossing: target does not exceed the zero-attenuation QBER");
  }
  if (qber(scheme, transmission_from_db(kBracketHighDb), params) < target_qber) {
    throw std::domain_error("no crossing: target not reached within 200 dB");
  }

  double lo = 0.0;
  double hi = kBracketHighDb;
  double mid = 0.5 * (lo + hi);
  double q_mid = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    q_mid = qber(scheme, transmission_from_db(mid), params);
    if (std::abs(q_mid - target_qber) <= kQberTolerance) break;
    if (q_mid < target_qber) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  ThresholdResult result;
  result.scheme = scheme;
  result.target_qber = target_qber;
  result.crossing_db = mid;
  result.crossing_km = distance_km(mid, params.alpha_db_per_km);
  result.achieved_qber = q_mid;
  return result;
}

}  // namespace qrelay
