#pragma once

// Sweep configuration: flat "key = value" files, '#' starts a comment.
// Defaults are the Coulomb-diamond setting g = 1, γ = 2π·0.1, T = 1, U = 10
// on a 101 × 101 grid.

#include "exclab/dqd.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace exclab {

struct GridAxis {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 1;

    /// lo + (hi - lo) i / (n - 1); lo when n == 1.
    double at(std::size_t i) const;
};

struct SweepConfig {
    double g = 1.0;
    double gamma = 2.0 * 3.14159265358979323846 * 0.1;
    double temperature = 1.0;
    double U = 10.0;
    GridAxis vg{-15.0, 15.0, 101};
    GridAxis vsd{-30.0, 30.0, 101};
    bool blockade = false;
    /// Apply V_g -> V_g - U/2. Unset means the command default (on for
    /// sweeps, off for single points).
    std::optional<bool> gate_shift;
    std::vector<std::string> columns; ///< empty selects every column
    unsigned workers = 1;
    std::uint64_t seed = 1;
    std::size_t excursions = 1000000;

    /// Throws ConfigError.
    void validate() const;

    /// Model parameters at grid coordinate (vg, vsd).
    DqdParams params(double vg, double vsd, bool shift) const;
};

/// Parses "vg:lo:hi:n,vsd:lo:hi:n" (either part may be omitted).
void apply_grid(SweepConfig &cfg, const std::string &spec);

/// Sets one key. Throws ConfigError on unknown keys or bad values.
void apply_key(SweepConfig &cfg, const std::string &key, const std::string &value);

/// Reads key = value lines on top of `base`. Throws ConfigError with the
/// line number on malformed input.
SweepConfig parse_config(std::istream &in, SweepConfig base = {});

SweepConfig load_config(const std::string &path, SweepConfig base = {});

/// Worker count: explicit flag, then EXCLAB_WORKERS, then the config value.
unsigned resolve_workers(std::optional<unsigned> flag, unsigned configured);

} // namespace exclab
