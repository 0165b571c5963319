#pragma once

#include <string>

namespace qrelay {

// How the entangled photons reach Alice and Bob. Direct sends one photon of
// a single pair to each party, so the total channel transmission t splits as
// t^(1/2) per arm. Relay inserts an entanglement-swapping station fed by a
// second pair; the same total t then splits over four arms as t^(1/4) each.
enum class Scheme { Direct, Relay };

const char* to_string(Scheme scheme);

// Detector, source and optics parameters defining one experiment
// configuration. Defaults are the reference parameter set used by the tests
// and the CLI.
struct LinkParams {
  double detector_efficiency = 0.15;    // eta, overall collection+detection, (0, 1]
  double dark_count_prob = 1.1e-4;      // D, per detector per coincidence window, [0, 1)
  double visibility = 0.95;             // V, single-photon optical visibility, [0, 1]
  double polarizer_transmission = 0.5;  // eta_p of the Bell-analyzer polarizers, (0, 1]
  double pair_rate_hz = 2.4e4;          // c, observed two-fold coincidence rate, > 0
  double rep_rate_hz = 7.6e7;           // f, pump repetition rate, > 0
  double alpha_db_per_km = 0.25;        // fiber loss coefficient, > 0

  // Visibility of a two-photon (pair) coincidence: V^2.
  double pair_visibility() const { return visibility * visibility; }
  // Visibility of a four-photon coincidence: V^4.
  double four_photon_visibility() const { return pair_visibility() * pair_visibility(); }

  // Throws std::invalid_argument naming the offending field. Also rejects
  // pair_rate_hz > rep_rate_hz * eta^2, which would imply a source-equivalent
  // transmission above unity.
  void validate() const;
};

// One row of a QBER-vs-attenuation curve.
struct QberPoint {
  Scheme scheme = Scheme::Direct;
  double attenuation_db = 0.0;  // total channel attenuation, -10*log10(t)
  double transmission = 1.0;    // t, total channel transmission
  double distance_km = 0.0;     // attenuation_db / alpha_db_per_km
  double qber = 0.0;
  double p_sift = 0.0;          // sifted-bit probability per pulse
  double sift_rate_hz = 0.0;    // rep_rate_hz * p_sift
};

// Transmission equivalent of the probabilistic pair source: (c / eta^2) / f.
// The probabilistic source looks like a perfect one-pair-per-pulse emitter
// behind a channel of this transmission. Result is clamped into (0, 1];
// validate() guarantees the unclamped value does not exceed 1 + rounding.
double source_equivalent_transmission(const LinkParams& params);

// Composes plate and source transmissions into the total channel
// transmission. Direct: t_s * plate^2 (one source, two plates);
// Relay: t_s^2 * plate^4 (two sources, four plates).
double total_transmission(Scheme scheme, double plate_transmission,
                          double source_transmission);

// Per-arm transmission for a given total: t^(1/2) Direct, t^(1/4) Relay.
double arm_transmission(Scheme scheme, double transmission);

// Probability that exactly one of a party's four detectors fires in a
// window, given per-arm photon detection probability x and dark-count
// probability d: [x + (1-x)*4d] * (1-d)^3. Either the photon is detected and
// the other three detectors stay silent (a dark count in the photon's own
// detector is absorbed into that click), or the photon is lost and exactly
// one of the four detectors fires a dark count.
double single_click_probability(double detection_prob, double dark_count_prob);

// Probability of a two-detector coincidence behind the Bell-analyzer PBS,
// given per-input detection probability y = t^(1/4)*eta*eta_p:
// (1/2)y^2 + [(1-y)d]^2 + 2y(1-y)d. The 1/2 on the genuine double-detection
// term is the projection acceptance of the analyzer; dark-assisted
// coincidences carry no such factor.
double bell_coincidence_probability(double detection_prob, double dark_count_prob);

// Probability per pulse that a round survives basis sifting.
// Direct: (1/2) * P_click^2.  Relay: P_bell * (1/2) * P_click^2.
double sift_probability(Scheme scheme, double transmission, const LinkParams& params);

// Probability per pulse of a sifted and correct key bit; at most
// sift_probability for the same inputs.
double signal_probability(Scheme scheme, double transmission, const LinkParams& params);

// Quantum bit error rate (1 - p_signal/p_sift) / 2, in [0, 1/2). Throws
// std::domain_error if the sift probability underflows to zero.
double qber(Scheme scheme, double transmission, const LinkParams& params);

// Sifted-key rate in events per second: rep_rate_hz * sift_probability.
double sift_rate_hz(Scheme scheme, double transmission, const LinkParams& params);

}  // namespace qrelay
