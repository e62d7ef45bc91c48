#pragma once

// Subcommands of the exclab tool. Each returns the process exit code
// (0 success, 1 failed check) and throws exclab::Error on bad input.

#include "exclab/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace exclab {

/// Full report at one point: excursion statistics of the transport,
/// activity and entropy counts, outcomes (blockade), populations, mutual
/// information, Fano factor and bounds, then the sweep CSV row.
int cmd_analyze(const SweepConfig &cfg, double vg, double vsd, bool shift, std::ostream &out);

/// Writes the sweep CSV to `path` atomically.
int cmd_sweep(const SweepConfig &cfg, bool shift, unsigned workers, const std::string &path);

struct SimulateOptions {
    std::size_t excursions = 1000000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    /// Optional single-stream trajectory dump with the same seed.
    std::optional<std::string> dump_path;
};

/// Analytic vs Monte Carlo table with z-scores; returns 1 when some
/// |z| > 4. Throws TooFewRecords below 64 excursions.
int cmd_simulate(const SweepConfig &cfg, double vg, double vsd, bool shift, const SimulateOptions &opt,
                 std::ostream &out);

struct VerifyOptions {
    /// Test hook: the excursion noise is assembled with d2 scaled by this.
    double d2_scale = 1.0;
};

/// Invariant battery on the built-in 7 × 7 grid (V_g ∈ [-10, 10],
/// V_sd ∈ [-20, 20], unshifted) with the model parameters of `cfg`.
int cmd_verify(const SweepConfig &cfg, const VerifyOptions &opt, std::ostream &out);

int cmd_heatmap(const std::string &csv_path, const std::string &column, const std::string &out_path,
                std::ostream &out);

} // namespace exclab
