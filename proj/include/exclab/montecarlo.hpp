#pragma once

// Exact stochastic simulation of a rate matrix, excursion segmentation and
// empirical estimators with standard errors.
//
// Random numbers: xoshiro256** seeded through splitmix64. Uniforms are
// ((next() >> 11) + 0.5) * 2^-53, strictly inside (0, 1); holding times are
// -log(u) / Γ. Both are fixed here so runs are bit-reproducible everywhere.

#include "exclab/markov.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace exclab {

class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed);

    std::uint64_t next();
    double uniform();
    double exponential(double rate);
    /// Advances the state by 2^128 draws; used to split independent streams.
    void jump();

private:
    std::array<std::uint64_t, 4> s_{};
};

struct Trajectory {
    std::vector<std::uint32_t> states; ///< visited states, consecutive entries differ
    std::vector<double> holds;         ///< holds[i]: residence in states[i] before the next jump
    double tail = 0.0;                 ///< censored time in states.back() when stopped by max_time
    double total_time = 0.0;

    std::size_t jumps() const { return holds.size(); }
};

struct SimulationStop {
    double max_time = std::numeric_limits<double>::infinity();
    std::uint64_t max_jumps = std::numeric_limits<std::uint64_t>::max();
    /// Stop right after this many returns into region_a.
    std::uint64_t max_excursions = std::numeric_limits<std::uint64_t>::max();
    std::size_t region_a = 0;
};

/// Gillespie direct method started in state `start`. At least one stop
/// criterion must be finite.
Trajectory simulate(const RateMatrix &m, std::uint64_t seed, const SimulationStop &stop,
                    std::size_t start = 0);

/// Excursions in structure-of-arrays form. Record i is the residence in A
/// residences[i] followed by an excursion of length durations[i].
struct ExcursionLog {
    std::size_t states = 0;
    std::size_t region_a = 0;
    std::vector<double> residences;
    std::vector<double> durations;
    /// counts[i * n * n + to * n + from] = N(to <- from) within excursion i.
    std::vector<std::uint32_t> counts;
    /// Time before the first entry into A, an unpaired final residence and
    /// the incomplete final excursion.
    double discarded_time = 0.0;
    double total_time = 0.0;

    std::size_t size() const { return durations.size(); }
    std::uint32_t count(std::size_t i, std::size_t to, std::size_t from) const {
        return counts[(i * states + to) * states + from];
    }
    /// Appends another log (same chain and region).
    void append(const ExcursionLog &other);
};

/// Streaming segmentation of jumps into residences and excursions.
class ExcursionSegmenter {
public:
    ExcursionSegmenter(std::size_t states, std::size_t region_a, std::size_t start);

    /// The chain stayed `hold` in its current state and then jumped to `to`.
    /// Returns true when the jump closed an excursion.
    bool on_jump(double hold, std::size_t to);
    /// Closes the record with a censored final stretch of length `tail`.
    ExcursionLog finish(double tail);

private:
    enum class Phase { before_a, in_a, in_b };

    ExcursionLog log_;
    std::size_t current_;
    Phase phase_;
    double residence_ = 0.0;
    double excursion_time_ = 0.0;
    std::vector<std::uint32_t> tally_;
};

/// Requires a single-state region A; partial excursions are discarded.
ExcursionLog excursion_filter(const Trajectory &t, std::size_t region_a, std::size_t states);

/// Excursions needed per batch; batch b draws from the stream seeded by
/// `seed` and advanced by b jumps.
inline constexpr std::size_t kBatchExcursions = 1u << 14;

/// N excursions from fixed-size batches started in A. The output depends on
/// (m, region_a, seed, n) only, not on the worker count.
ExcursionLog sample_excursions(const RateMatrix &m, std::size_t region_a, std::uint64_t seed,
                               std::size_t n, unsigned workers = 1);

/// Q_i = Σ ν(x, y) N_i(x, y) for every record. Throws DimensionMismatch.
std::vector<double> q_values(const ExcursionLog &log, const WeightScheme &s);

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

struct EmpiricalMoments {
    std::size_t records = 0;
    Estimate e_q, var_q, e_t, var_t, cov_qt, mu, delta2, j, d;
    /// Long-run estimates: total Q over total cycle time, and batch-means
    /// noise over 32 contiguous batches. Present from 64 records on.
    std::optional<Estimate> j_direct;
    std::optional<Estimate> d_direct;
};

/// Sample moments with delete-one jackknife standard errors; J and D are
/// assembled from the sample moments. Throws TooFewRecords below 2 records.
EmpiricalMoments empirical_moments(const ExcursionLog &log, const WeightScheme &s);

struct OutcomeHistogram {
    int min_q = 0;
    std::vector<std::size_t> counts;
    std::vector<double> frequencies;
    std::vector<double> standard_errors; ///< sqrt(p (1 - p) / N)
    std::size_t records = 0;

    double frequency(int q) const;
};

/// Throws NonIntegerScheme or TooFewRecords (empty log).
OutcomeHistogram empirical_outcome_histogram(const ExcursionLog &log, const WeightScheme &s);

/// Fraction of time spent in each state, with batch-means standard errors
/// from 32 equal time windows.
std::vector<Estimate> occupation_fractions(const Trajectory &t, std::size_t states);

/// Mean and variance by Welford updates; merge() is Chan's pairwise rule.
class RunningMoments {
public:
    void add(double x);
    void merge(const RunningMoments &other);

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance; zero below two samples.
    double variance() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// One line per jump: "time\tfrom\tto" with the absolute jump time.
void write_trajectory(std::ostream &out, const Trajectory &t);

} // namespace exclab
