#include "exclab/dqd.hpp"
#include "exclab/errors.hpp"
#include "exclab/excursion.hpp"
#include "exclab/observables.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace exclab;

namespace {

const double kGamma = 2.0 * M_PI * 0.1;

DqdParams reference(double vg, double vsd, bool blockade = false, double T = 2.0) {
    return DqdParams::symmetric(1.0, kGamma, T, 10.0, vg, vsd, blockade);
}

bool close(double a, double b, double rel, double floor) {
    return std::abs(a - b) <= rel * std::max(std::abs(b), floor);
}

std::vector<WeightScheme> schemes(const DqdParams &p, const RateMatrix &m) {
    const std::size_t n = m.size();
    return {transport_weights(Lead::right, n), transport_weights(Lead::left, n), activity_weights(n),
            entropy_weights(p), excess_time_weights(m)};
}

} // namespace

TEST_CASE("partition: blocks of the four-state model") {
    const RateMatrix m = build_dqd(reference(-1.0, 7.0));
    const BlockDecomposition d = partition(m, kEmpty);
    REQUIRE(d.states_b() == std::vector<std::size_t>{kLeft, kRight, kBoth});
    CHECK(d.escape_a() == m.escape_rate(kEmpty));
    for (Eigen::Index i = 0; i < 3; ++i) {
        const std::size_t x = d.states_b()[static_cast<std::size_t>(i)];
        CHECK(d.w_b()(i, i) == -m.escape_rate(x));
        CHECK(d.w_ab()(i) == m.rate(kEmpty, x));
        CHECK(d.w_ba()(i) == m.rate(x, kEmpty));
        for (Eigen::Index j = 0; j < 3; ++j) {
            if (i != j) {
                CHECK(d.w_b()(i, j) == m.rate(x, d.states_b()[static_cast<std::size_t>(j)]));
            }
        }
    }
    CHECK((d.fundamental().array() >= 0.0).all());
    CHECK((d.w_b() * d.fundamental() + Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    const double norm = (d.w_ab() * d.fundamental() * d.w_ba())(0);
    CHECK(close(norm, d.escape_a(), 1e-10, 0.0));
    const Vector col = d.w_b().colwise().sum().transpose();
    CHECK((col.array() <= 1e-15).all());
    CHECK((col.array() < 0.0).any());
}

TEST_CASE("partition: scalar blocks") {
    // 0 -> 1 at rate b, 1 -> 0 at rate a, region A = {1}.
    const double a = 0.8, b = 2.5;
    Matrix raw(2, 2);
    raw << 0.0, a, b, 0.0;
    const BlockDecomposition d = partition(validate_rate_matrix(raw), 1);
    CHECK(d.fundamental()(0, 0) == doctest::Approx(1.0 / b).epsilon(1e-15));
    CHECK(d.escape_a() == a);
    CHECK(close((d.w_ab() * d.fundamental() * d.w_ba())(0), a, 1e-15, 0.0));
    CHECK(time_moments(d).mean == doctest::Approx(1.0 / b).epsilon(1e-15));
}

TEST_CASE("partition: bad regions") {
    const RateMatrix m = build_dqd(reference(0.0, 1.0));
    CHECK_THROWS_AS(partition(m, std::vector<std::size_t>{}), BadPartition);
    CHECK_THROWS_AS(partition(m, std::vector<std::size_t>{0, 1, 2, 3}), BadPartition);
    CHECK_THROWS_AS(partition(m, std::vector<std::size_t>{0, 1}), BadPartition);
    CHECK_THROWS_AS(partition(m, 7), BadPartition);
}

TEST_CASE("mmatrix_inverse agrees with a dense solve") {
    const RateMatrix m = build_dqd(reference(4.0, -9.0));
    const BlockDecomposition d = partition(m, kEmpty);
    const Matrix ref = (-d.w_b()).inverse();
    CHECK((d.fundamental() - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
}

TEST_CASE("moments agree with first-step analysis") {
    for (bool blockade : {false, true}) {
        for (double vg : {-10.0, -3.0, 0.0, 6.0}) {
            for (double vsd : {-20.0, 0.0, 7.0, 15.0}) {
                const auto p = reference(vg, vsd, blockade);
                const RateMatrix m = build_model(p);
                const BlockDecomposition d = partition(m, kEmpty);
                const TimeMoments t = time_moments(d);
                const double jumps = std::sqrt(oracle::first_step_moments(m, activity_weights(m.size()), kEmpty).e_q2);
                CAPTURE(blockade);
                CAPTURE(vg);
                CAPTURE(vsd);
                for (const auto &s : schemes(p, m)) {
                    CAPTURE(s.name());
                    const oracle::Moments o = oracle::first_step_moments(m, s, kEmpty);
                    const ObservableMoments q = observable_moments(d, s);
                    CHECK(close(t.mean, o.e_t, 1e-10, 0.0));
                    CHECK(close(t.second_moment, o.e_t2, 1e-10, 0.0));
                    // natural size of |Q|: largest weight times the typical jump count
                    const double scale = s.weights().cwiseAbs().maxCoeff() * jumps;
                    CHECK(close(q.mean, o.e_q, 1e-9, scale));
                    CHECK(close(q.second_moment, o.e_q2, 1e-9, scale * scale));
                    CHECK(close(q.cross_moment, o.e_qt, 1e-9, scale * std::sqrt(o.e_t2)));
                }
            }
        }
    }
}

TEST_CASE("moments agree with finite differences of the tilted resolvent") {
    for (double vg : {-6.0, 0.0, 5.0}) {
        for (double vsd : {-10.0, 7.0}) {
            const auto p = reference(vg, vsd);
            const RateMatrix m = build_model(p);
            const BlockDecomposition d = partition(m, kEmpty);
            const TimeMoments t = time_moments(d);
            const double jumps = std::sqrt(observable_moments(d, activity_weights(4)).second_moment);
            for (const auto &s : schemes(p, m)) {
                CAPTURE(vg);
                CAPTURE(vsd);
                CAPTURE(s.name());
                const double scale = std::max(1.0, s.weights().cwiseAbs().maxCoeff()) * jumps;
                const oracle::Moments fd = oracle::resolvent_differences(d, s, 1e-2 / scale, 1e-3 / t.mean);
                const ObservableMoments q = observable_moments(d, s);
                CHECK(close(t.mean, fd.e_t, 1e-6, 0.0));
                CHECK(close(t.second_moment, fd.e_t2, 1e-6, 0.0));
                CHECK(close(q.mean, fd.e_q, 1e-6, 1e-4 * scale));
                CHECK(close(q.second_moment, fd.e_q2, 1e-6, 1e-4 * scale * scale));
                CHECK(close(q.cross_moment, fd.e_qt, 1e-6, 1e-4 * scale * t.mean));
            }
        }
    }
}

TEST_CASE("report invariants") {
    for (double vg : {-10.0, 0.0, 10.0}) {
        for (double vsd : {-20.0, 0.0, 20.0}) {
            const auto p = reference(vg, vsd);
            const RateMatrix m = build_model(p);
            const BlockDecomposition d = partition(m, kEmpty);
            for (const auto &s : schemes(p, m)) {
                const ExcursionReport r = excursion_report(d, s);
                CHECK(r.var_t >= 0.0);
                CHECK(r.var_q >= 0.0);
                CHECK(r.mu == r.e_t + r.e_tau);
                CHECK(r.delta2 == r.var_t + r.e_tau * r.e_tau);
                CHECK(r.e_tau == 1.0 / d.escape_a());
                CHECK(std::abs(r.d - (r.d1 + r.d2 + r.d3)) <= 1e-12 * std::abs(r.d) + 1e-300);
                const double wmax = std::max(1.0, s.weights().cwiseAbs().maxCoeff());
                CHECK(std::abs(r.cov_qt) <= std::sqrt(r.var_q * r.var_t) * (1.0 + 1e-10) + 1e-12 * wmax * r.mu);
                CHECK(r.j == r.e_q / r.mu);
            }
        }
    }
}

TEST_CASE("null scheme counts nothing") {
    const RateMatrix m = build_dqd(reference(1.0, 5.0));
    const BlockDecomposition d = partition(m, kEmpty);
    const auto r = excursion_report(d, WeightScheme::zeros(4));
    CHECK(r.e_q == 0.0);
    CHECK(r.var_q == 0.0);
    CHECK(r.cov_qt == 0.0);
    CHECK(r.j == 0.0);
    CHECK(r.d == 0.0);
    CHECK(r.d1 == 0.0);
    CHECK(r.d2 == 0.0);
    CHECK(r.d3 == 0.0);
    CHECK_THROWS_AS(observable_moments(d, WeightScheme::zeros(3)), DimensionMismatch);
}

TEST_CASE("transport at zero bias") {
    for (double vg : {-7.0, 0.0, 3.0}) {
        const RateMatrix m = build_dqd(reference(vg, 0.0));
        const BlockDecomposition d = partition(m, kEmpty);
        const auto tr = transport_weights(Lead::right, 4);
        CHECK(std::abs(current(d, tr)) < 1e-12);
        const auto n = noise_decomposition(d, tr);
        CHECK(std::abs(n.d2) < 1e-24);
        CHECK(std::abs(n.d3) < 1e-12);
        CHECK(n.d1 > 0.0);
        CHECK(std::abs(n.total - n.d1) < 1e-12 * n.d1);
    }
}

TEST_CASE("excursion versus residence time crossover at V_sd = 7") {
    for (double vg : {-8.0, -5.0, -3.0}) {
        const auto t = time_moments(partition(build_dqd(reference(vg, 7.0)), kEmpty));
        CAPTURE(vg);
        CHECK(t.mean > t.cycle_mean - t.mean);
    }
    for (double vg : {3.0, 5.0, 8.0}) {
        const auto t = time_moments(partition(build_dqd(reference(vg, 7.0)), kEmpty));
        CAPTURE(vg);
        CHECK(t.mean < t.cycle_mean - t.mean);
    }
}

TEST_CASE("particle conservation per excursion") {
    for (bool blockade : {false, true}) {
        for (double vg : {-5.0, 2.0}) {
            for (double vsd : {-8.0, 0.0, 11.0}) {
                const auto p = reference(vg, vsd, blockade);
                const RateMatrix m = build_model(p);
                const BlockDecomposition d = partition(m, kEmpty);
                const auto qr = transport_weights(Lead::right, m.size());
                const auto ql = transport_weights(Lead::left, m.size());
                const auto r = observable_moments(d, qr);
                const auto l = observable_moments(d, ql);
                const auto both = observable_moments(d, WeightScheme("sum", qr.weights() + ql.weights()));
                CHECK(std::abs(l.mean + r.mean) <= 1e-12 * std::max(1.0, r.variance));
                CHECK(close(l.variance, r.variance, 1e-10, 1e-12));
                // var(Q_L + Q_R) = 0 <=> cov(Q_L, Q_R) = -var(Q_R)
                CHECK(std::abs(both.variance) <= 1e-12 * std::max(1.0, r.variance));
            }
        }
    }
}

TEST_CASE("entropy is proportional to transport") {
    for (bool blockade : {false, true}) {
        for (double vg : {-10.0, -2.0, 4.0}) {
            for (double vsd : {-20.0, -5.0, 3.0, 20.0}) {
                const auto p = reference(vg, vsd, blockade);
                const RateMatrix m = build_model(p);
                const BlockDecomposition d = partition(m, kEmpty);
                const FermiSet f = fermi_set(p);
                const double zeta_l = std::log(f.left.complement / f.left.f);
                const double zeta_r = std::log(f.right.complement / f.right.f);
                const double k = zeta_r - zeta_l;
                const auto tr = excursion_report(d, transport_weights(Lead::right, m.size()));
                const auto en = excursion_report(d, entropy_weights(p));
                CAPTURE(vg);
                CAPTURE(vsd);
                CHECK(close(en.e_q, k * tr.e_q, 1e-10, 0.0));
                CHECK(close(en.var_q, k * k * tr.var_q, 1e-10, 0.0));
                CHECK(close(en.d / (en.j * en.j), tr.d / (tr.j * tr.j), 1e-10, 0.0));
                CHECK(en.e_q >= 0.0);
            }
        }
    }
}

TEST_CASE("joint_characteristic") {
    const auto p = reference(-2.0, 9.0);
    const RateMatrix m = build_model(p);
    const BlockDecomposition d = partition(m, kEmpty);
    for (const auto &s : schemes(p, m)) {
        const auto one = joint_characteristic(d, s, 0.0, 0.0);
        CHECK(std::abs(one - 1.0) < 1e-12);
        const double h = 1e-3 / std::max(1.0, s.weights().cwiseAbs().maxCoeff());
        auto M = [&](double xi) { return joint_characteristic(d, s, xi, 0.0); };
        const std::complex<double> dxi = (M(-2 * h) - 8.0 * M(-h) + 8.0 * M(h) - M(2 * h)) / (12 * h);
        const std::complex<double> e_q = std::complex<double>(0.0, 1.0) * dxi;
        const double mean = observable_moments(d, s).mean;
        CHECK(std::abs(e_q.real() - mean) <= 1e-6 * std::max(1.0, std::abs(mean)));
        CHECK(std::abs(e_q.imag()) <= 1e-8);
        const double hs = 1e-5;
        const double ds = -(joint_characteristic(d, s, 0.0, hs) - joint_characteristic(d, s, 0.0, 0.0)).real() / hs;
        CHECK(close(ds, time_moments(d).mean, 1e-3, 0.0));
    }
    CHECK_THROWS_AS(joint_characteristic(d, activity_weights(4), 0.1, -1.0), SingularResolvent);
    CHECK(std::abs(tilted_resolvent(d, activity_weights(4), 0.0, 0.0) - 1.0) < 1e-12);
}

TEST_CASE("outcome distribution in the blockade matches the closed forms and the exact propagation") {
    for (double vg : {-10.0, -3.0, 0.0, 5.0, 10.0}) {
        for (double vsd : {-20.0, -7.0, 0.0, 7.0, 20.0}) {
            const auto p = reference(vg, vsd, true);
            const RateMatrix m = build_model(p);
            const auto tr = transport_weights(Lead::right, 3);
            const auto dist = outcome_distribution(partition(m, kEmpty), tr);
            const auto exact = oracle::dp_outcomes(m, tr, kEmpty);
            const OutcomeTriple cf = success_fail_disaster(p);
            CAPTURE(vg);
            CAPTURE(vsd);
            for (int q = dist.min_q; q <= dist.max_q(); ++q) {
                if (q < -1 || q > 1) {
                    CHECK(std::abs(dist.at(q)) < 1e-12);
                }
            }
            CHECK(exact.size() <= 3);
            CHECK(std::abs(dist.at(1) - cf.p_suc) < 1e-8);
            CHECK(std::abs(dist.at(0) - cf.p_fail) < 1e-8);
            CHECK(std::abs(dist.at(-1) - cf.p_dis) < 1e-8);
            for (int q = -1; q <= 1; ++q) {
                const double e = exact.count(q) ? exact.at(q) : 0.0;
                CHECK(std::abs(dist.at(q) - e) < 1e-10);
            }
            const auto r = observable_moments(partition(m, kEmpty), tr);
            CHECK(r.mean >= -1.0);
            CHECK(r.mean <= 1.0);
        }
    }
}

TEST_CASE("outcome distribution: deterministic success limit") {
    const auto dist = outcome_distribution(partition(build_model(reference(0.0, -400.0, true)), kEmpty),
                                           transport_weights(Lead::right, 3));
    CHECK(dist.at(1) > 1.0 - 1e-8);
}

TEST_CASE("outcome distribution: four-state model at deep negative gate") {
    const auto p = reference(-6.0, 7.0);
    const RateMatrix m = build_model(p);
    const auto tr = transport_weights(Lead::right, 4);
    const auto dist = outcome_distribution(partition(m, kEmpty), tr);
    const auto exact = oracle::dp_outcomes(m, tr, kEmpty, 1e-15);
    double tail = 0.0;
    for (int q = dist.min_q; q <= dist.max_q(); ++q) {
        const double e = exact.count(q) ? exact.at(q) : 0.0;
        CHECK(std::abs(dist.at(q) - e) < 1e-9);
        if (std::abs(q) >= 2) {
            tail += dist.at(q);
        }
    }
    CHECK(tail > 0.1);
}

TEST_CASE("outcome distribution errors") {
    const auto p = reference(0.0, 7.0, true);
    const BlockDecomposition d = partition(build_model(p), kEmpty);
    CHECK_THROWS_AS(outcome_distribution(d, entropy_weights(p)), NonIntegerScheme);
    OutcomeOptions narrow;
    narrow.min_q = 0;
    narrow.max_q = 0;
    CHECK_THROWS_AS(outcome_distribution(d, transport_weights(Lead::right, 3), narrow), MassDeficit);
}

TEST_CASE("excess time") {
    for (double vg = -10.0; vg <= 10.0; vg += 5.0) {
        for (double vsd = -20.0; vsd <= 20.0; vsd += 10.0) {
            for (bool blockade : {false, true}) {
                const auto p = reference(vg, vsd, blockade);
                const RateMatrix m = build_model(p);
                const BlockDecomposition d = partition(m, kEmpty);
                const double tau = excess_time(d);
                const auto r = excursion_report(d, excess_time_weights(m));
                const auto act = excursion_report(d, activity_weights(m.size()));
                CHECK(tau > 0.0);
                CHECK(std::abs(r.j - 1.0) < 1e-10);
                CHECK(close(r.d, tau, 1e-8, 0.0));
                CHECK(tau >= 1.0 / act.j);
            }
        }
    }
}
