#include "exclab/montecarlo.hpp"

#include "exclab/errors.hpp"
#include "exclab/format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

namespace exclab {

namespace {

std::uint64_t splitmix64(std::uint64_t &x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
    for (auto &word : s_) {
        word = splitmix64(seed);
    }
}

std::uint64_t Xoshiro256::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256::uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Xoshiro256::exponential(double rate) { return -std::log(uniform()) / rate; }

void Xoshiro256::jump() {
    static constexpr std::uint64_t kJump[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                              0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
    std::array<std::uint64_t, 4> acc{};
    for (std::uint64_t word : kJump) {
        for (int b = 0; b < 64; ++b) {
            if (word & (std::uint64_t{1} << b)) {
                for (int i = 0; i < 4; ++i) {
                    acc[i] ^= s_[i];
                }
            }
            next();
        }
    }
    s_ = acc;
}

namespace {

// Per-state jump targets with cumulative probabilities W(x, y) / Γ_y.
class JumpTable {
public:
    explicit JumpTable(const RateMatrix &m) : rates_(m.escape_rates()) {
        const std::size_t n = m.size();
        targets_.resize(n);
        cumulative_.resize(n);
        for (std::size_t y = 0; y < n; ++y) {
            double acc = 0.0;
            for (std::size_t x = 0; x < n; ++x) {
                if (x != y && m.rate(x, y) > 0.0) {
                    acc += m.rate(x, y) / m.escape_rate(y);
                    targets_[y].push_back(static_cast<std::uint32_t>(x));
                    cumulative_[y].push_back(acc);
                }
            }
            cumulative_[y].back() = 1.0;
        }
    }

    double rate(std::size_t y) const { return rates_(static_cast<Eigen::Index>(y)); }

    std::uint32_t choose(std::size_t y, double u) const {
        const auto &cum = cumulative_[y];
        std::size_t k = 0;
        while (u > cum[k]) {
            ++k;
        }
        return targets_[y][k];
    }

private:
    Vector rates_;
    std::vector<std::vector<std::uint32_t>> targets_;
    std::vector<std::vector<double>> cumulative_;
};

} // namespace

Trajectory simulate(const RateMatrix &m, std::uint64_t seed, const SimulationStop &stop,
                    std::size_t start) {
    const std::size_t n = m.size();
    if (start >= n || stop.region_a >= n) {
        throw DimensionMismatch("start or region state outside the chain");
    }
    if (!std::isfinite(stop.max_time) && stop.max_jumps == std::numeric_limits<std::uint64_t>::max() &&
        stop.max_excursions == std::numeric_limits<std::uint64_t>::max()) {
        throw Error("simulate needs a finite stop criterion");
    }
    const JumpTable table(m);
    Xoshiro256 rng(seed);

    Trajectory t;
    t.states.push_back(static_cast<std::uint32_t>(start));
    std::size_t state = start;
    bool seen_a = start == stop.region_a;
    std::uint64_t returns = 0;
    double now = 0.0;
    while (t.holds.size() < stop.max_jumps && returns < stop.max_excursions) {
        const double hold = rng.exponential(table.rate(state));
        if (now + hold >= stop.max_time) {
            t.tail = stop.max_time - now;
            now = stop.max_time;
            break;
        }
        now += hold;
        const std::uint32_t to = table.choose(state, rng.uniform());
        t.holds.push_back(hold);
        t.states.push_back(to);
        if (to == stop.region_a) {
            if (seen_a) {
                ++returns;
            }
            seen_a = true;
        }
        state = to;
    }
    t.total_time = now;
    return t;
}

void ExcursionLog::append(const ExcursionLog &other) {
    residences.insert(residences.end(), other.residences.begin(), other.residences.end());
    durations.insert(durations.end(), other.durations.begin(), other.durations.end());
    counts.insert(counts.end(), other.counts.begin(), other.counts.end());
    discarded_time += other.discarded_time;
    total_time += other.total_time;
}

ExcursionSegmenter::ExcursionSegmenter(std::size_t states, std::size_t region_a, std::size_t start)
    : current_(start), phase_(start == region_a ? Phase::in_a : Phase::before_a),
      tally_(states * states, 0) {
    if (region_a >= states || start >= states) {
        throw BadPartition("region or start state outside the chain");
    }
    log_.states = states;
    log_.region_a = region_a;
}

bool ExcursionSegmenter::on_jump(double hold, std::size_t to) {
    const std::size_t n = log_.states;
    const std::size_t a = log_.region_a;
    log_.total_time += hold;
    bool closed = false;
    switch (phase_) {
    case Phase::before_a:
        log_.discarded_time += hold;
        if (to == a) {
            phase_ = Phase::in_a;
            residence_ = 0.0;
        }
        break;
    case Phase::in_a:
        residence_ += hold;
        excursion_time_ = 0.0;
        std::fill(tally_.begin(), tally_.end(), 0u);
        ++tally_[to * n + current_];
        phase_ = Phase::in_b;
        break;
    case Phase::in_b:
        excursion_time_ += hold;
        ++tally_[to * n + current_];
        if (to == a) {
            log_.residences.push_back(residence_);
            log_.durations.push_back(excursion_time_);
            log_.counts.insert(log_.counts.end(), tally_.begin(), tally_.end());
            residence_ = 0.0;
            phase_ = Phase::in_a;
            closed = true;
        }
        break;
    }
    current_ = to;
    return closed;
}

ExcursionLog ExcursionSegmenter::finish(double tail) {
    log_.total_time += tail;
    switch (phase_) {
    case Phase::before_a:
        log_.discarded_time += tail;
        break;
    case Phase::in_a:
        log_.discarded_time += residence_ + tail;
        break;
    case Phase::in_b:
        log_.discarded_time += residence_ + excursion_time_ + tail;
        break;
    }
    ExcursionLog out = std::move(log_);
    log_ = ExcursionLog{};
    return out;
}

ExcursionLog excursion_filter(const Trajectory &t, std::size_t region_a, std::size_t states) {
    if (t.states.empty()) {
        ExcursionLog empty;
        empty.states = states;
        empty.region_a = region_a;
        return empty;
    }
    ExcursionSegmenter seg(states, region_a, t.states.front());
    for (std::size_t i = 0; i < t.holds.size(); ++i) {
        seg.on_jump(t.holds[i], t.states[i + 1]);
    }
    return seg.finish(t.tail);
}

namespace {

ExcursionLog run_batch(const JumpTable &table, std::size_t states, std::size_t a, Xoshiro256 rng,
                       std::size_t quota) {
    ExcursionSegmenter seg(states, a, a);
    std::size_t state = a;
    std::size_t done = 0;
    while (done < quota) {
        const double hold = rng.exponential(table.rate(state));
        const std::uint32_t to = table.choose(state, rng.uniform());
        if (seg.on_jump(hold, to)) {
            ++done;
        }
        state = to;
    }
    return seg.finish(0.0);
}

} // namespace

ExcursionLog sample_excursions(const RateMatrix &m, std::size_t region_a, std::uint64_t seed,
                               std::size_t n, unsigned workers) {
    const std::size_t states = m.size();
    if (region_a >= states) {
        throw BadPartition("region state outside the chain");
    }
    const JumpTable table(m);
    const std::size_t batches = (n + kBatchExcursions - 1) / kBatchExcursions;

    std::vector<Xoshiro256> streams;
    streams.reserve(batches);
    Xoshiro256 rng(seed);
    for (std::size_t b = 0; b < batches; ++b) {
        streams.push_back(rng);
        rng.jump();
    }

    std::vector<ExcursionLog> results(batches);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t b = next++; b < batches; b = next++) {
            const std::size_t quota = std::min(kBatchExcursions, n - b * kBatchExcursions);
            results[b] = run_batch(table, states, region_a, streams[b], quota);
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(batches, 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < threads; ++w) {
        pool.emplace_back(work);
    }
    work();
    for (auto &th : pool) {
        th.join();
    }

    ExcursionLog out;
    out.states = states;
    out.region_a = region_a;
    out.residences.reserve(n);
    out.durations.reserve(n);
    out.counts.reserve(n * states * states);
    for (const auto &r : results) {
        out.append(r);
    }
    return out;
}

std::vector<double> q_values(const ExcursionLog &log, const WeightScheme &s) {
    const std::size_t n = log.states;
    if (s.size() != n) {
        throw DimensionMismatch("scheme does not match the chain");
    }
    struct Term {
        std::size_t index;
        double weight;
    };
    std::vector<Term> terms;
    for (std::size_t to = 0; to < n; ++to) {
        for (std::size_t from = 0; from < n; ++from) {
            if (to != from && s.weight(to, from) != 0.0) {
                terms.push_back({to * n + from, s.weight(to, from)});
            }
        }
    }
    std::vector<double> q(log.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const std::uint32_t *row = log.counts.data() + i * n * n;
        double acc = 0.0;
        for (const Term &term : terms) {
            acc += term.weight * row[term.index];
        }
        q[i] = acc;
    }
    return q;
}

namespace {

struct CenteredSums {
    double n = 0.0;
    double q = 0.0, qq = 0.0, t = 0.0, tt = 0.0, qt = 0.0, c = 0.0, cc = 0.0;
};

struct Centers {
    double q, t, c;
};

constexpr std::size_t kQuantities = 9;

std::array<double, kQuantities> assemble(const CenteredSums &s, const Centers &m) {
    const double n = s.n;
    const double eq = m.q + s.q / n;
    const double vq = (s.qq - s.q * s.q / n) / (n - 1.0);
    const double et = m.t + s.t / n;
    const double vt = (s.tt - s.t * s.t / n) / (n - 1.0);
    const double cqt = (s.qt - s.q * s.t / n) / (n - 1.0);
    const double mu = m.c + s.c / n;
    const double d2 = (s.cc - s.c * s.c / n) / (n - 1.0);
    const double j = eq / mu;
    const double d = vq / mu + d2 * eq * eq / (mu * mu * mu) - 2.0 * eq * cqt / (mu * mu);
    return {eq, vq, et, vt, cqt, mu, d2, j, d};
}

double mean_of(const std::vector<double> &v) {
    double acc = 0.0;
    for (double x : v) {
        acc += x;
    }
    return acc / static_cast<double>(v.size());
}

} // namespace

EmpiricalMoments empirical_moments(const ExcursionLog &log, const WeightScheme &s) {
    const std::size_t n = log.size();
    if (n < 2) {
        throw TooFewRecords("empirical moments need at least 2 excursions, got " + std::to_string(n));
    }
    const std::vector<double> q = q_values(log, s);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = log.durations[i] + log.residences[i];
    }
    const Centers centers{mean_of(q), mean_of(log.durations), mean_of(c)};

    CenteredSums full;
    full.n = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dq = q[i] - centers.q, dt = log.durations[i] - centers.t, dc = c[i] - centers.c;
        full.q += dq;
        full.qq += dq * dq;
        full.t += dt;
        full.tt += dt * dt;
        full.qt += dq * dt;
        full.c += dc;
        full.cc += dc * dc;
    }
    const auto estimate = assemble(full, centers);

    // Delete-one jackknife, two passes to avoid storing every replicate.
    auto leave_one = [&](std::size_t i) {
        const double dq = q[i] - centers.q, dt = log.durations[i] - centers.t, dc = c[i] - centers.c;
        CenteredSums r = full;
        r.n -= 1.0;
        r.q -= dq;
        r.qq -= dq * dq;
        r.t -= dt;
        r.tt -= dt * dt;
        r.qt -= dq * dt;
        r.c -= dc;
        r.cc -= dc * dc;
        return assemble(r, centers);
    };
    std::array<double, kQuantities> bar{}, sum_sq{};
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = leave_one(i);
        for (std::size_t k = 0; k < kQuantities; ++k) {
            bar[k] += r[k];
        }
    }
    for (double &b : bar) {
        b /= static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = leave_one(i);
        for (std::size_t k = 0; k < kQuantities; ++k) {
            sum_sq[k] += (r[k] - bar[k]) * (r[k] - bar[k]);
        }
    }
    std::array<Estimate, kQuantities> out{};
    const double factor = static_cast<double>(n - 1) / static_cast<double>(n);
    for (std::size_t k = 0; k < kQuantities; ++k) {
        out[k] = {estimate[k], std::sqrt(factor * sum_sq[k])};
    }

    EmpiricalMoments m;
    m.records = n;
    m.e_q = out[0];
    m.var_q = out[1];
    m.e_t = out[2];
    m.var_t = out[3];
    m.cov_qt = out[4];
    m.mu = out[5];
    m.delta2 = out[6];
    m.j = out[7];
    m.d = out[8];

    constexpr std::size_t kBatches = 32;
    if (n >= 2 * kBatches) {
        std::vector<double> qb(kBatches, 0.0), cb(kBatches, 0.0);
        for (std::size_t b = 0; b < kBatches; ++b) {
            for (std::size_t i = b * n / kBatches; i < (b + 1) * n / kBatches; ++i) {
                qb[b] += q[i];
                cb[b] += c[i];
            }
        }
        double total_q = 0.0, total_c = 0.0;
        for (std::size_t b = 0; b < kBatches; ++b) {
            total_q += qb[b];
            total_c += cb[b];
        }
        const double j = total_q / total_c;
        double resid = 0.0;
        for (std::size_t b = 0; b < kBatches; ++b) {
            const double r = qb[b] - j * cb[b];
            resid += r * r;
        }
        const double bsz = static_cast<double>(kBatches);
        const double mean_c = total_c / bsz;
        const double d = resid / (bsz - 1.0) / mean_c;
        m.j_direct = Estimate{j, std::sqrt(resid / (bsz * (bsz - 1.0))) / mean_c};
        m.d_direct = Estimate{d, d * std::sqrt(2.0 / (bsz - 1.0))};
    }
    return m;
}

double OutcomeHistogram::frequency(int q) const {
    const long k = static_cast<long>(q) - min_q;
    if (k < 0 || k >= static_cast<long>(frequencies.size())) {
        return 0.0;
    }
    return frequencies[static_cast<std::size_t>(k)];
}

OutcomeHistogram empirical_outcome_histogram(const ExcursionLog &log, const WeightScheme &s) {
    if (!s.integer_valued()) {
        throw NonIntegerScheme("outcome histogram needs integer weights: " + s.name());
    }
    if (log.size() == 0) {
        throw TooFewRecords("outcome histogram of an empty log");
    }
    const std::vector<double> q = q_values(log, s);
    std::vector<long> k(q.size());
    std::transform(q.begin(), q.end(), k.begin(), [](double v) { return std::lround(v); });
    const auto [lo, hi] = std::minmax_element(k.begin(), k.end());

    OutcomeHistogram h;
    h.records = q.size();
    h.min_q = static_cast<int>(*lo);
    h.counts.assign(static_cast<std::size_t>(*hi - *lo + 1), 0);
    for (long v : k) {
        ++h.counts[static_cast<std::size_t>(v - *lo)];
    }
    const double total = static_cast<double>(h.records);
    for (std::size_t c : h.counts) {
        const double p = static_cast<double>(c) / total;
        h.frequencies.push_back(p);
        h.standard_errors.push_back(std::sqrt(p * (1.0 - p) / total));
    }
    return h;
}

std::vector<Estimate> occupation_fractions(const Trajectory &t, std::size_t states) {
    constexpr std::size_t kWindows = 32;
    if (!(t.total_time > 0.0)) {
        throw TooFewRecords("occupation fractions of an empty trajectory");
    }
    const double width = t.total_time / kWindows;
    std::vector<std::vector<double>> per_window(kWindows, std::vector<double>(states, 0.0));
    std::vector<double> whole(states, 0.0);

    double now = 0.0;
    std::size_t w = 0;
    auto deposit = [&](std::size_t state, double length) {
        whole[state] += length;
        double end = now + length;
        while (w + 1 < kWindows && end > width * static_cast<double>(w + 1)) {
            const double boundary = width * static_cast<double>(w + 1);
            per_window[w][state] += boundary - now;
            now = boundary;
            ++w;
        }
        per_window[w][state] += end - now;
        now = end;
    };
    for (std::size_t i = 0; i < t.holds.size(); ++i) {
        deposit(t.states[i], t.holds[i]);
    }
    if (!t.states.empty()) {
        deposit(t.states.back(), t.tail);
    }

    std::vector<Estimate> out(states);
    for (std::size_t x = 0; x < states; ++x) {
        RunningMoments rm;
        for (std::size_t b = 0; b < kWindows; ++b) {
            rm.add(per_window[b][x] / width);
        }
        out[x] = {whole[x] / t.total_time, std::sqrt(rm.variance() / kWindows)};
    }
    return out;
}

void RunningMoments::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningMoments::merge(const RunningMoments &other) {
    if (other.n_ == 0) {
        return;
    }
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
    const double delta = other.mean_ - mean_;
    const double total = na + nb;
    mean_ += delta * nb / total;
    m2_ += other.m2_ + delta * delta * na * nb / total;
    n_ += other.n_;
}

double RunningMoments::variance() const {
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

void write_trajectory(std::ostream &out, const Trajectory &t) {
    double now = 0.0;
    for (std::size_t i = 0; i < t.holds.size(); ++i) {
        now += t.holds[i];
        out << format_double(now) << '\t' << t.states[i] << '\t' << t.states[i + 1] << '\n';
    }
}

} // namespace exclab
