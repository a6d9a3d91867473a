#pragma once

#include <cctype>
#include <cstdint>
#include <sstream>
#include <string>

#include "art/errors.hpp"
#include "art/geometry.hpp"
#include "art/inner_overlay.hpp"
#include "art/keyspace.hpp"
#include "art/rng.hpp"

// Declarative experiment inputs.  Configs come from flat key=value text
// ('#' starts a comment); every field is validated up front and the config
// hash is stamped into every output row.

namespace art {

inline constexpr std::uint64_t kChurnAuto = ~std::uint64_t{0};  // ten steps per peer

struct ExperimentConfig {
  std::uint64_t n_clusters = 1024;
  std::uint64_t b = 4;
  std::uint32_t c = 1;
  InnerKind inner = InnerKind::finger_ring;
  DistKind distribution = DistKind::uniform;
  double dist_p1 = 0.0;
  double dist_p2 = 0.0;
  std::uint64_t queries = 1000;
  std::uint32_t alpha_max = 10;
  std::uint64_t churn_steps = kChurnAuto;
  double failure_fraction = 0.3;
  std::uint64_t data_multiplier = 20;
  std::uint64_t seed = 1;
  Key universe = 1'000'000'000;

  void validate() const {
    try {
      Fanout::validate(b);
    } catch (const InvalidFanout&) {
      throw ValidationError("b", "not of the form 2^(2^j)");
    }
    if (n_clusters == 0) throw ValidationError("n_clusters", "must be positive");
    if (c < 1) throw ValidationError("c", "must be at least 1");
    if (queries < 1) throw ValidationError("queries", "must be at least 1");
    if (alpha_max < 1 || alpha_max > 10)
      throw ValidationError("alpha_max", "must lie in [1, 10]");
    if (failure_fraction < 0.0 || failure_fraction >= 1.0)
      throw ValidationError("failure_fraction", "must lie in [0, 1)");
    if (universe == 0) throw ValidationError("universe", "must be positive");
    DistributionSpec spec{distribution, dist_p1, dist_p2, seed};
    spec.validate();
  }

  DistributionSpec distribution_spec() const {
    return {distribution, dist_p1, dist_p2, seed};
  }

  std::string canonical_text() const {
    std::ostringstream os;
    os << "n_clusters=" << n_clusters << ";b=" << b << ";c=" << c
       << ";inner=" << to_string(inner) << ";distribution=" << to_string(distribution)
       << ";dist_params=" << dist_p1 << "," << dist_p2 << ";queries=" << queries
       << ";alpha_max=" << alpha_max << ";churn_steps=" << churn_steps
       << ";failure_fraction=" << failure_fraction
       << ";data_multiplier=" << data_multiplier << ";seed=" << seed
       << ";universe=" << universe;
    return os.str();
  }

  // FNV-1a over the canonical form, hex-printed.
  std::string hash() const {
    const std::string text = canonical_text();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const unsigned char ch : text) {
      h ^= ch;
      h *= 0x100000001B3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError(key, "expected a non-negative integer, got '" + v + "'");
  }
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError(key, "expected a number, got '" + v + "'");
  }
}

}  // namespace detail

// Flat key=value config text -> validated ExperimentConfig.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash_pos = raw.find('#');
    if (hash_pos != std::string::npos) raw.erase(hash_pos);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (value.empty()) throw ParseError(line_no, "empty value for '" + key + "'");

    if (key == "n_clusters") {
      cfg.n_clusters = detail::parse_u64(key, value);
    } else if (key == "b") {
      cfg.b = detail::parse_u64(key, value);
    } else if (key == "c") {
      cfg.c = static_cast<std::uint32_t>(detail::parse_u64(key, value));
    } else if (key == "inner") {
      if (value == "finger-ring")
        cfg.inner = InnerKind::finger_ring;
      else if (value == "direct-oracle")
        cfg.inner = InnerKind::direct_oracle;
      else
        throw ValidationError(key, "expected finger-ring or direct-oracle");
    } else if (key == "distribution") {
      if (value == "uniform")
        cfg.distribution = DistKind::uniform;
      else if (value == "normal")
        cfg.distribution = DistKind::normal;
      else if (value == "beta")
        cfg.distribution = DistKind::beta;
      else if (value == "power-law")
        cfg.distribution = DistKind::power_law;
      else
        throw ValidationError(key, "unknown distribution '" + value + "'");
    } else if (key == "dist_params") {
      const std::size_t comma = value.find(',');
      if (comma == std::string::npos) {
        cfg.dist_p1 = detail::parse_double(key, value);
      } else {
        cfg.dist_p1 = detail::parse_double(key, detail::trim(value.substr(0, comma)));
        cfg.dist_p2 = detail::parse_double(key, detail::trim(value.substr(comma + 1)));
      }
    } else if (key == "queries") {
      cfg.queries = detail::parse_u64(key, value);
    } else if (key == "alpha_max") {
      cfg.alpha_max = static_cast<std::uint32_t>(detail::parse_u64(key, value));
    } else if (key == "churn_steps") {
      cfg.churn_steps = detail::parse_u64(key, value);
    } else if (key == "failure_fraction") {
      cfg.failure_fraction = detail::parse_double(key, value);
    } else if (key == "data_multiplier") {
      cfg.data_multiplier = detail::parse_u64(key, value);
    } else if (key == "seed") {
      cfg.seed = detail::parse_u64(key, value);
    } else {
      throw ParseError(line_no, "unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace art
