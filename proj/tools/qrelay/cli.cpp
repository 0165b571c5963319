#include "cli.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "qrelay/simulate.hpp"

namespace qrelay::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view value, const std::string& key) {
  double parsed = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw std::invalid_argument("malformed number for config key '" + key + "'");
  }
  return parsed;
}

std::optional<double> Config::* config_field(std::string_view key) {
  if (key == "eta") return &Config::eta;
  if (key == "dark_count") return &Config::dark_count;
  if (key == "visibility") return &Config::visibility;
  if (key == "polarizer") return &Config::polarizer;
  if (key == "pair_rate") return &Config::pair_rate;
  if (key == "rep_rate") return &Config::rep_rate;
  if (key == "alpha") return &Config::alpha;
  return nullptr;
}

void require_key_range(const std::optional<double>& value, const char* key,
                       bool ok_when_set, const char* range) {
  if (value && !ok_when_set) {
    throw std::invalid_argument(std::string("config key '") + key +
                                "' out of range: must be in " + range);
  }
}

std::vector<Scheme> parse_scheme_list(const std::string& name) {
  if (name == "direct") return {Scheme::Direct};
  if (name == "relay") return {Scheme::Relay};
  return {Scheme::Direct, Scheme::Relay};  // "both": direct rows sort first
}

void print_point(std::ostream& out, const QberPoint& point) {
  out << "scheme: " << to_string(point.scheme) << '\n'
      << "attenuation_db: " << format_double(point.attenuation_db) << '\n'
      << "transmission: " << format_double(point.transmission) << '\n'
      << "distance_km: " << format_double(point.distance_km) << '\n'
      << "qber: " << format_double(point.qber) << '\n'
      << "p_sift: " << format_double(point.p_sift) << '\n'
      << "sift_rate_hz: " << format_double(point.sift_rate_hz) << '\n';
}

void print_threshold(std::ostream& out, const ThresholdResult& result) {
  out << "scheme: " << to_string(result.scheme) << '\n'
      << "target_qber: " << format_double(result.target_qber) << '\n'
      << "crossing_db: " << format_double(result.crossing_db) << '\n'
      << "crossing_km: " << format_double(result.crossing_km) << '\n'
      << "achieved_qber: " << format_double(result.achieved_qber) << '\n';
}

void print_estimate(std::ostream& out, Scheme scheme, double attenuation_db,
                    const McEstimate& estimate) {
  out << "scheme: " << to_string(scheme) << '\n'
      << "attenuation_db: " << format_double(attenuation_db) << '\n'
      << "n_pulses: " << estimate.n_pulses << '\n'
      << "n_sifted: " << estimate.n_sifted << '\n'
      << "n_errors: " << estimate.n_errors << '\n'
      << "qber_hat: "
      << (estimate.qber_hat ? format_double(*estimate.qber_hat) : "undefined")
      << '\n'
      << "stderr: "
      << (estimate.standard_error ? format_double(*estimate.standard_error)
                                  : "undefined")
      << '\n'
      << "seed: " << estimate.seed << '\n'
      << "shard_count: " << estimate.shard_count << '\n';
}

// Resolves the total attenuation for subcommands accepting either
// --atten-db directly or the --plate-transmission/--include-source pair.
double resolve_attenuation_db(const std::optional<double>& atten_db,
                              const std::optional<double>& plate,
                              bool include_source, Scheme scheme,
                              const LinkParams& params) {
  if (atten_db && plate) {
    throw std::invalid_argument("--atten-db and --plate-transmission are exclusive");
  }
  if (atten_db) {
    if (*atten_db < 0.0) throw std::invalid_argument("--atten-db must be >= 0");
    return *atten_db;
  }
  if (plate) {
    const double source =
        include_source ? source_equivalent_transmission(params) : 1.0;
    return db_from_transmission(total_transmission(scheme, *plate, source));
  }
  throw std::invalid_argument("need --atten-db or --plate-transmission");
}

}  // namespace

Config parse_config_text(std::string_view text) {
  Config config;
  std::size_t line_number = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_number;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("malformed config line " +
                                  std::to_string(line_number) +
                                  ": expected 'key = value'");
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view value = trim(line.substr(eq + 1));
    const auto field = config_field(key);
    if (field == nullptr) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
    config.*field = parse_number(value, key);
  }
  return config;
}

Config merge(Config base, const Config& overrides) {
  if (overrides.eta) base.eta = overrides.eta;
  if (overrides.dark_count) base.dark_count = overrides.dark_count;
  if (overrides.visibility) base.visibility = overrides.visibility;
  if (overrides.polarizer) base.polarizer = overrides.polarizer;
  if (overrides.pair_rate) base.pair_rate = overrides.pair_rate;
  if (overrides.rep_rate) base.rep_rate = overrides.rep_rate;
  if (overrides.alpha) base.alpha = overrides.alpha;
  return base;
}

LinkParams to_link_params(const Config& config) {
  require_key_range(config.eta, "eta",
                    config.eta && *config.eta > 0.0 && *config.eta <= 1.0, "(0, 1]");
  require_key_range(config.dark_count, "dark_count",
                    config.dark_count && *config.dark_count >= 0.0 &&
                        *config.dark_count < 1.0,
                    "[0, 1)");
  require_key_range(config.visibility, "visibility",
                    config.visibility && *config.visibility >= 0.0 &&
                        *config.visibility <= 1.0,
                    "[0, 1]");
  require_key_range(config.polarizer, "polarizer",
                    config.polarizer && *config.polarizer > 0.0 &&
                        *config.polarizer <= 1.0,
                    "(0, 1]");
  require_key_range(config.pair_rate, "pair_rate",
                    config.pair_rate && *config.pair_rate > 0.0, "(0, inf)");
  require_key_range(config.rep_rate, "rep_rate",
                    config.rep_rate && *config.rep_rate > 0.0, "(0, inf)");
  require_key_range(config.alpha, "alpha",
                    config.alpha && *config.alpha > 0.0, "(0, inf)");

  LinkParams params;
  if (config.eta) params.detector_efficiency = *config.eta;
  if (config.dark_count) params.dark_count_prob = *config.dark_count;
  if (config.visibility) params.visibility = *config.visibility;
  if (config.polarizer) params.polarizer_transmission = *config.polarizer;
  if (config.pair_rate) params.pair_rate_hz = *config.pair_rate;
  if (config.rep_rate) params.rep_rate_hz = *config.rep_rate;
  if (config.alpha) params.alpha_db_per_km = *config.alpha;
  params.validate();
  return params;
}

std::string format_double(double value) {
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(),
                                       value, std::chars_format::general, 9);
  return std::string(buffer.data(), ptr);
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows,
               bool mc_columns) {
  out << "scheme,attenuation_db,transmission,distance_km,qber,p_sift,sift_rate_hz";
  if (mc_columns) out << ",qber_mc,mc_stderr,mc_pulses";
  out << '\n';
  for (const SweepRow& row : rows) {
    const QberPoint& p = row.point;
    out << to_string(p.scheme) << ',' << format_double(p.attenuation_db) << ','
        << format_double(p.transmission) << ',' << format_double(p.distance_km)
        << ',' << format_double(p.qber) << ',' << format_double(p.p_sift) << ','
        << format_double(p.sift_rate_hz);
    if (mc_columns) {
      out << ',';
      if (row.mc && row.mc->qber_hat) out << format_double(*row.mc->qber_hat);
      out << ',';
      if (row.mc && row.mc->standard_error) {
        out << format_double(*row.mc->standard_error);
      }
      out << ',';
      if (row.mc) out << row.mc->n_pulses;
    }
    out << '\n';
  }
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"QKD link-budget simulator: QBER curves for direct and "
               "relay-assisted entangled-photon distribution"};
  app.require_subcommand(1);

  std::string config_path;
  Config flag_config;
  app.add_option("--config", config_path, "key = value parameter file");
  app.add_option("--eta", flag_config.eta, "detector efficiency, (0, 1]");
  app.add_option("--dark-count", flag_config.dark_count,
                 "dark-count probability per detector per window, [0, 1)");
  app.add_option("--visibility", flag_config.visibility,
                 "single-photon optical visibility, [0, 1]");
  app.add_option("--polarizer", flag_config.polarizer,
                 "Bell-analyzer polarizer transmission, (0, 1]");
  app.add_option("--pair-rate", flag_config.pair_rate,
                 "observed two-fold coincidence rate, 1/s");
  app.add_option("--rep-rate", flag_config.rep_rate, "pump repetition rate, 1/s");
  app.add_option("--alpha", flag_config.alpha, "fiber loss coefficient, dB/km");

  std::string scheme_name;
  std::optional<double> atten_db;
  std::optional<double> plate;
  bool include_source = false;

  CLI::App* qber_cmd =
      app.add_subcommand("qber", "Evaluate one point of the QBER curve");
  qber_cmd->fallthrough();
  qber_cmd->add_option("--scheme", scheme_name)
      ->required()
      ->check(CLI::IsMember({"direct", "relay"}));
  qber_cmd->add_option("--atten-db", atten_db, "total channel attenuation, dB");
  qber_cmd->add_option("--plate-transmission", plate,
                       "per-plate transmission; total is composed per scheme");
  qber_cmd->add_flag("--include-source", include_source,
                     "fold the source-equivalent transmission into the total");

  double from_db = 0.0;
  double to_db = 0.0;
  double step_db = 1.0;
  std::uint64_t mc_pulses = 0;
  std::uint64_t seed = 0;
  std::string out_path;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Write a QBER-vs-attenuation CSV");
  sweep_cmd->fallthrough();
  sweep_cmd->add_option("--scheme", scheme_name)
      ->required()
      ->check(CLI::IsMember({"direct", "relay", "both"}));
  sweep_cmd->add_option("--from-db", from_db)->required();
  sweep_cmd->add_option("--to-db", to_db)->required();
  sweep_cmd->add_option("--step-db", step_db)->required();
  sweep_cmd->add_option("--mc-pulses", mc_pulses,
                        "attach a Monte Carlo column with this many pulses per row");
  sweep_cmd->add_option("--seed", seed, "base seed for the per-row substreams");
  sweep_cmd->add_option("--out", out_path, "output CSV path")->required();

  double target = 0.0;
  CLI::App* threshold_cmd = app.add_subcommand(
      "threshold", "Locate the attenuation where the QBER reaches a target");
  threshold_cmd->fallthrough();
  threshold_cmd->add_option("--scheme", scheme_name)
      ->required()
      ->check(CLI::IsMember({"direct", "relay", "both"}));
  threshold_cmd->add_option("--target", target, "target QBER, (0, 0.5)")->required();

  std::uint64_t pulses = 0;
  std::uint32_t shards = 1;
  CLI::App* mc_cmd =
      app.add_subcommand("mc", "Seeded Monte Carlo estimate at one point");
  mc_cmd->fallthrough();
  mc_cmd->add_option("--scheme", scheme_name)
      ->required()
      ->check(CLI::IsMember({"direct", "relay"}));
  mc_cmd->add_option("--atten-db", atten_db, "total channel attenuation, dB");
  mc_cmd->add_option("--plate-transmission", plate,
                     "per-plate transmission; total is composed per scheme");
  mc_cmd->add_flag("--include-source", include_source,
                   "fold the source-equivalent transmission into the total");
  mc_cmd->add_option("--pulses", pulses)->required();
  mc_cmd->add_option("--seed", seed);
  mc_cmd->add_option("--shards", shards, "deterministic substream count");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("qrelay");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    Config file_config;
    if (!config_path.empty()) {
      std::ifstream file(config_path, std::ios::binary);
      if (!file) {
        throw std::invalid_argument("cannot read config file '" + config_path + "'");
      }
      std::ostringstream contents;
      contents << file.rdbuf();
      file_config = parse_config_text(contents.str());
    }
    const LinkParams params = to_link_params(merge(file_config, flag_config));

    if (qber_cmd->parsed()) {
      const Scheme scheme = parse_scheme_list(scheme_name).front();
      const double a_db =
          resolve_attenuation_db(atten_db, plate, include_source, scheme, params);
      print_point(out, evaluate_point(scheme, a_db, params));
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      SweepSpec spec;
      spec.schemes = parse_scheme_list(scheme_name);
      spec.from_db = from_db;
      spec.to_db = to_db;
      spec.step_db = step_db;
      spec.include_mc = mc_pulses > 0;
      spec.mc_pulses = mc_pulses;
      spec.seed = seed;
      const std::vector<SweepRow> rows = sweep_curve(spec, params);
      std::ofstream csv(out_path, std::ios::binary);
      if (!csv) {
        throw std::invalid_argument("cannot write output file '" + out_path + "'");
      }
      write_csv(csv, rows, spec.include_mc);
      return kExitOk;
    }

    if (threshold_cmd->parsed()) {
      std::vector<ThresholdResult> results;
      for (const Scheme scheme : parse_scheme_list(scheme_name)) {
        results.push_back(find_threshold(scheme, target, params));
      }
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (i > 0) out << '\n';
        print_threshold(out, results[i]);
      }
      return kExitOk;
    }

    const Scheme scheme = parse_scheme_list(scheme_name).front();
    const double a_db =
        resolve_attenuation_db(atten_db, plate, include_source, scheme, params);
    const McEstimate estimate = mc_estimate(
        scheme, transmission_from_db(a_db), params, pulses, seed, shards);
    print_estimate(out, scheme, a_db, estimate);
    return kExitOk;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace qrelay::cli
