#include "qrelay/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qrelay {

namespace {

void require_range(bool ok, const char* field, const char* range) {
  if (!ok) {
    throw std::invalid_argument(std::string(field) + " must be in " + range);
  }
}

void require_transmission(double t) {
  if (!(t > 0.0) || t > 1.0) {
    throw std::invalid_argument("transmission must be in (0, 1]");
  }
}

double square(double v) { return v * v; }
double cube(double v) { return v * v * v; }

}  // namespace

const char* to_string(Scheme scheme) {
  return scheme == Scheme::Direct ? "direct" : "relay";
}

void LinkParams::validate() const {
  require_range(detector_efficiency > 0.0 && detector_efficiency <= 1.0,
                "detector_efficiency", "(0, 1]");
  require_range(dark_count_prob >= 0.0 && dark_count_prob < 1.0,
                "dark_count_prob", "[0, 1)");
  require_range(visibility >= 0.0 && visibility <= 1.0, "visibility", "[0, 1]");
  require_range(polarizer_transmission > 0.0 && polarizer_transmission <= 1.0,
                "polarizer_transmission", "(0, 1]");
  require_range(pair_rate_hz > 0.0, "pair_rate_hz", "(0, inf)");
  require_range(rep_rate_hz > 0.0, "rep_rate_hz", "(0, inf)");
  require_range(alpha_db_per_km > 0.0, "alpha_db_per_km", "(0, inf)");
  if (pair_rate_hz > rep_rate_hz * (detector_efficiency * detector_efficiency)) {
    throw std::invalid_argument(
        "pair_rate_hz exceeds rep_rate_hz * detector_efficiency^2; "
        "source-equivalent transmission would exceed 1");
  }
}

double source_equivalent_transmission(const LinkParams& params) {
  params.validate();
  const double eta2 = params.detector_efficiency * params.detector_efficiency;
  return std::min((params.pair_rate_hz / eta2) / params.rep_rate_hz, 1.0);
}

double total_transmission(Scheme scheme, double plate_transmission,
                          double source_transmission) {
  if (!(plate_transmission > 0.0) || plate_transmission > 1.0) {
    throw std::invalid_argument("plate_transmission must be in (0, 1]");
  }
  require_transmission(source_transmission);
  if (scheme == Scheme::Direct) {
    return source_transmission * square(plate_transmission);
  }
  return square(source_transmission) * square(square(plate_transmission));
}

double arm_transmission(Scheme scheme, double transmission) {
  require_transmission(transmission);
  const double half = std::sqrt(transmission);
  return scheme == Scheme::Direct ? half : std::sqrt(half);
}

double single_click_probability(double detection_prob, double dark_count_prob) {
  const double x = detection_prob;
  const double d = dark_count_prob;
  require_range(x >= 0.0 && x <= 1.0, "detection_prob", "[0, 1]");
  require_range(d >= 0.0 && d <= 1.0, "dark_count_prob", "[0, 1]");
  return (x + (1.0 - x) * 4.0 * d) * cube(1.0 - d);
}

double bell_coincidence_probability(double detection_prob, double dark_count_prob) {
  const double y = detection_prob;
  const double d = dark_count_prob;
  require_range(y >= 0.0 && y <= 1.0, "detection_prob", "[0, 1]");
  require_range(d >= 0.0 && d <= 1.0, "dark_count_prob", "[0, 1]");
  const double genuine = 0.5 * y * y;
  const double both_dark = square((1.0 - y) * d);
  const double one_photon_one_dark = 2.0 * y * (1.0 - y) * d;
  return genuine + both_dark + one_photon_one_dark;
}

double sift_probability(Scheme scheme, double transmission, const LinkParams& params) {
  params.validate();
  require_transmission(transmission);
  const double x = arm_transmission(scheme, transmission) * params.detector_efficiency;
  const double click = single_click_probability(x, params.dark_count_prob);
  const double both_click_one_basis = 0.5 * click * click;
  if (scheme == Scheme::Direct) {
    return both_click_one_basis;
  }
  const double y = x * params.polarizer_transmission;
  return bell_coincidence_probability(y, params.dark_count_prob) * both_click_one_basis;
}

double signal_probability(Scheme scheme, double transmission, const LinkParams& params) {
  params.validate();
  require_transmission(transmission);
  const double x = arm_transmission(scheme, transmission) * params.detector_efficiency;
  const double genuine_click = x * cube(1.0 - params.dark_count_prob);
  const double both_genuine_one_basis = 0.5 * square(genuine_click);
  if (scheme == Scheme::Direct) {
    return params.pair_visibility() * both_genuine_one_basis;
  }
  const double y = x * params.polarizer_transmission;
  return params.four_photon_visibility() * both_genuine_one_basis * (0.5 * y * y);
}

double qber(Scheme scheme, double transmission, const LinkParams& params) {
  const double sift = sift_probability(scheme, transmission, params);
  if (sift <= 0.0) {
    throw std::domain_error("qber undefined: sift probability is zero");
  }
  return 0.5 * (1.0 - signal_probability(scheme, transmission, params) / sift);
}

double sift_rate_hz(Scheme scheme, double transmission, const LinkParams& params) {
  return params.rep_rate_hz * sift_probability(scheme, transmission, params);
}

}  // namespace qrelay
