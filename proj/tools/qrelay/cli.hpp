#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrelay/model.hpp"
#include "qrelay/sweep.hpp"

namespace qrelay::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // argument/config errors
inline constexpr int kExitNumeric = 2;  // no crossing, undefined QBER, empty sample

// One optional override per link parameter. Precedence when materializing:
// command-line flags beat config-file values beat built-in defaults.
struct Config {
  std::optional<double> eta;
  std::optional<double> dark_count;
  std::optional<double> visibility;
  std::optional<double> polarizer;
  std::optional<double> pair_rate;
  std::optional<double> rep_rate;
  std::optional<double> alpha;
};

// Parses the line-oriented `key = value` config format; '#' starts a
// comment. Throws std::invalid_argument naming the offending key or line.
Config parse_config_text(std::string_view text);

// Overlay: fields set in overrides win.
Config merge(Config base, const Config& overrides);

// Built-in defaults plus overrides, range-checked with the user-facing key
// named on violation.
LinkParams to_link_params(const Config& config);

// Locale-independent rendering with 9 significant digits; used for every
// float the tool prints, so output is byte-reproducible.
std::string format_double(double value);

// Fixed-schema CSV: header plus one row per sweep entry, '\n' line endings.
// The three MC columns appear only when mc_columns is set; rows where MC was
// skipped leave them empty rather than zero, and a starved run (no sifted
// events) leaves qber_mc/mc_stderr empty while still reporting mc_pulses.
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows,
               bool mc_columns);

// Entry point shared by main() and the tests; args excludes the program
// name. Writes results to out, diagnostics to err, and returns one of the
// kExit* codes.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace qrelay::cli
