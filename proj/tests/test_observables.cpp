#include "exclab/dqd.hpp"
#include "exclab/errors.hpp"
#include "exclab/excursion.hpp"
#include "exclab/observables.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace exclab;

namespace {

const double kGamma = 2.0 * M_PI * 0.1;

DqdParams reference(double vg, double vsd, bool blockade = false, double T = 2.0) {
    return DqdParams::symmetric(1.0, kGamma, T, 10.0, vg, vsd, blockade);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("transport weights") {
    const WeightScheme r = transport_weights(Lead::right, 4);
    const WeightScheme l = transport_weights(Lead::left, 4);
    CHECK(r.weight(kEmpty, kRight) == 1.0);
    CHECK(r.weight(kRight, kEmpty) == -1.0);
    CHECK(r.weight(kLeft, kBoth) == 1.0);
    CHECK(r.weight(kBoth, kLeft) == -1.0);
    CHECK(l.weight(kEmpty, kLeft) == 1.0);
    CHECK(l.weight(kRight, kBoth) == 1.0);
    CHECK((r.weights() + r.weights().transpose()).isZero(0.0));
    CHECK((l.weights() + l.weights().transpose()).isZero(0.0));
    CHECK(r.weight(kLeft, kRight) == 0.0);
    CHECK(r.weight(kRight, kLeft) == 0.0);
    CHECK(l.weight(kLeft, kRight) == 0.0);
    // the two leads never share a transition
    CHECK((r.weights().cwiseProduct(l.weights())).isZero(0.0));
    const WeightScheme r3 = transport_weights(Lead::right, 3);
    CHECK(r3.size() == 3);
    CHECK(r3.weight(kEmpty, kRight) == 1.0);
    CHECK_THROWS(transport_weights(Lead::right, 5));
}

TEST_CASE("activity weights: at least two jumps per excursion") {
    const WeightScheme a = activity_weights(4);
    CHECK(a.weights().diagonal().isZero(0.0));
    CHECK(a.weight(kBoth, kEmpty) == 1.0);
    for (bool blockade : {false, true}) {
        const RateMatrix m = build_model(reference(-1.0, 6.0, blockade));
        const auto dist = oracle::dp_outcomes(m, activity_weights(m.size()), kEmpty, 1e-12);
        CHECK(dist.begin()->first == 2);
        CHECK(observable_moments(partition(m, kEmpty), activity_weights(m.size())).mean >= 2.0);
    }
}

TEST_CASE("entropy weights") {
    const auto p = reference(-2.5, 7.0);
    const WeightScheme s = entropy_weights(p);
    const FermiSet f = fermi_set(p);
    CHECK(s.weight(kLeft, kEmpty) == doctest::Approx(std::log(f.f_L() / (1.0 - f.f_L()))).epsilon(1e-12));
    CHECK(s.weight(kRight, kEmpty) == doctest::Approx(std::log(f.f_R() / (1.0 - f.f_R()))).epsilon(1e-12));
    CHECK(s.weight(kBoth, kLeft) == doctest::Approx(std::log(f.ft_R() / (1.0 - f.ft_R()))).epsilon(1e-12));
    CHECK(s.weight(kLeft, kRight) == 0.0);
    CHECK(s.weight(kRight, kLeft) == 0.0);
    CHECK(s.antisymmetric());
    CHECK_FALSE(s.integer_valued());

    // weights are log(W(x, y) / W(y, x)) on every lead transition
    const RateMatrix m = build_model(p);
    for (std::size_t x = 0; x < 4; ++x) {
        for (std::size_t y = 0; y < 4; ++y) {
            if (x != y && m.rate(x, y) > 0.0 && s.weight(x, y) != 0.0) {
                CHECK(s.weight(x, y) == doctest::Approx(std::log(m.rate(x, y) / m.rate(y, x))).epsilon(1e-10));
            }
        }
    }

    for (double vg : {-8.0, 0.0, 3.0}) {
        const auto q = reference(vg, 0.0);
        CHECK(std::abs(current(partition(build_model(q), kEmpty), entropy_weights(q))) < 1e-12);
    }
    CHECK_THROWS_AS(entropy_weights(reference(0.0, -4000.0)), DegenerateFermi);
}

TEST_CASE("state weights and the excess-time scheme") {
    const RateMatrix m = build_model(reference(1.0, 7.0));
    const Vector inv = m.escape_rates().cwiseInverse();
    const WeightScheme s = state_weights(inv);
    CHECK(s.kind() == SchemeKind::state);
    CHECK((s.weights() - excess_time_weights(m).weights()).isZero(0.0));
    CHECK(s.weight(kLeft, kEmpty) == inv(kEmpty));
    CHECK(s.weight(kEmpty, kEmpty) == 0.0);
    CHECK(state_weights(Vector::Zero(4)).is_null());
    CHECK(std::abs(current(partition(m, kEmpty), s) - 1.0) < 1e-10);
}

TEST_CASE("success, fail and disaster probabilities") {
    for (double vg = -12.0; vg <= 12.0; vg += 3.0) {
        for (double vsd = -30.0; vsd <= 30.0; vsd += 6.0) {
            const OutcomeTriple t = success_fail_disaster(reference(vg, vsd, true));
            CHECK(std::abs(t.p_suc + t.p_fail + t.p_dis - 1.0) <= 1e-12);
            CHECK(t.p_suc >= 0.0);
            CHECK(t.p_fail >= 0.0);
            CHECK(t.p_dis >= 0.0);
        }
    }
    const OutcomeTriple sym = success_fail_disaster(reference(2.0, 0.0, true));
    CHECK(sym.p_suc == doctest::Approx(sym.p_dis).epsilon(1e-14));
    CHECK(success_fail_disaster(reference(0.0, -400.0, true)).p_suc > 1.0 - 1e-8);
}

TEST_CASE("blockade closed forms against the three-state engine") {
    double worst_effective = 0.0;
    double worst_bare = 0.0;
    for (int i = 0; i < 7; ++i) {
        for (int k = 0; k < 7; ++k) {
            const auto p = reference(-10.0 + 20.0 * i / 6.0, -20.0 + 40.0 * k / 6.0, true);
            const RateMatrix m = build_model(p);
            const BlockDecomposition d = partition(m, kEmpty);
            const auto t = time_moments(d);
            const double e_qr = observable_moments(d, transport_weights(Lead::right, 3)).mean;
            const double e_a = observable_moments(d, activity_weights(3)).mean;
            const double e_sigma = observable_moments(d, entropy_weights(p)).mean;
            const Populations pop = populations(m);
            const auto a = blockade_analytics(p, CouplingReading::effective);
            const auto b = blockade_analytics(p, CouplingReading::bare);
            CAPTURE(p.vg_left);
            CAPTURE(p.vsd);
            const double scale = std::abs(e_a);
            const double pairs[][3] = {{a.e_t, t.mean, 1e-300},      {a.e_tau, 1.0 / d.escape_a(), 1e-300},
                                       {a.mu, t.cycle_mean, 1e-300}, {a.e_qr, e_qr, 1e-6 * scale},
                                       {a.e_a, e_a, 1e-300},         {a.p_left, pop.p_left, 1e-300},
                                       {a.p_right, pop.p_right, 1e-300}};
            for (const auto &c : pairs) {
                const double err = std::abs(c[0] - c[1]) / std::max(std::abs(c[1]), c[2]);
                CHECK(err <= 1e-10);
                worst_effective = std::max(worst_effective, err);
            }
            worst_bare = std::max(worst_bare, rel(b.e_t, t.mean));
            const double sigma_scale = 1e-6 * scale * std::max(1.0, entropy_weights(p).weights().cwiseAbs().maxCoeff());
            CHECK(std::abs(blockade_entropy_mean(p) - e_sigma) <= 1e-10 * std::max(std::abs(e_sigma), sigma_scale));
        }
    }
    CHECK(worst_effective < 1e-10);
    CHECK(worst_bare > 1e-2);
}

TEST_CASE("blockade closed forms: simple limits") {
    const auto p = reference(3.0, 0.0, true);
    const FermiSet f = fermi_set(p);
    const auto a = blockade_analytics(p);
    CHECK(a.e_tau == doctest::Approx(1.0 / (kGamma * (f.f_L() + f.f_R()))).epsilon(1e-15));
    CHECK(a.e_qr == 0.0);
    CHECK(blockade_entropy_mean(p) == 0.0);
}

TEST_CASE("populations") {
    for (bool blockade : {false, true}) {
        const auto pop = populations(build_model(reference(-3.0, 0.0, blockade)));
        CHECK(std::abs(pop.p00 + pop.p10 + pop.p01 + pop.p11 - 1.0) < 1e-12);
        CHECK(std::abs(pop.p10 - pop.p01) < 1e-14);
        CHECK(pop.p_left == pop.p10 + pop.p11);
        if (blockade) {
            CHECK(pop.p11 == 0.0);
        }
    }
}

TEST_CASE("mutual information") {
    // product distributions carry no information
    for (double a : {0.1, 0.5, 0.83}) {
        for (double b : {0.02, 0.4, 0.9}) {
            Populations pop{(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b, a, b};
            CHECK(std::abs(mutual_information(pop)) < 1e-15);
        }
    }
    // hand-computed case: p00 = p11 = 0.5 gives log 2
    Populations corr{0.5, 0.0, 0.0, 0.5, 0.5, 0.5};
    CHECK(mutual_information(corr) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    Populations block{0.4, 0.3, 0.3, 0.0, 0.3, 0.3};
    CHECK(mutual_information(block) > 0.0);
    CHECK(mutual_information_exclusive(block) == doctest::Approx(mutual_information(block)).epsilon(1e-14));
    for (double vg = -15.0; vg <= 15.0; vg += 5.0) {
        for (double vsd = -30.0; vsd <= 30.0; vsd += 10.0) {
            const auto pop = populations(build_model(reference(vg, vsd, false, 1.0)));
            CHECK(mutual_information(pop) >= 0.0);
            CHECK(mutual_information_exclusive(pop) >= 0.0);
        }
    }
}

TEST_CASE("fano factor") {
    // A nearly one-way two-state cycle is close to a Poisson process.
    Matrix raw(2, 2);
    raw << 0.0, 1e6, 1.0, 0.0;
    const RateMatrix m = validate_rate_matrix(raw);
    Matrix w = Matrix::Zero(2, 2);
    w(1, 0) = 1.0;
    const auto r = excursion_report(partition(m, 0), WeightScheme("up", w));
    CHECK(fano(r.j, r.d) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(fano(0.3, 0.0) == 0.0);
    CHECK(fano(-2.0, 1.0) == 0.5);
    CHECK(fano(-2.0, 1.0, true) == -0.5);
    const auto eq = excursion_report(partition(build_model(reference(0.0, 0.0)), kEmpty), transport_weights(Lead::right, 4));
    CHECK_THROWS_AS(fano(eq.j, eq.d), DivergentFano);

    // continuity across the sign change of V_sd
    auto at = [](double vsd) {
        const auto x = excursion_report(partition(build_model(reference(1.0, vsd)), kEmpty),
                                        transport_weights(Lead::right, 4));
        return fano(x.j, x.d);
    };
    CHECK(std::abs(at(1e-3) - at(-1e-3)) < 1e-6 * at(1e-3));
}

TEST_CASE("uncertainty bounds hold and order as expected") {
    for (double vg = -10.0; vg <= 10.0; vg += 2.5) {
        for (double vsd = -20.0; vsd <= 20.0; vsd += 5.0) {
            for (bool blockade : {false, true}) {
                const auto p = reference(vg, vsd, blockade);
                const RateMatrix m = build_model(p);
                const BlockDecomposition d = partition(m, kEmpty);
                for (const auto &s : {transport_weights(Lead::right, m.size()), activity_weights(m.size()), entropy_weights(p)}) {
                    const BoundsReport b = uncertainty_bounds(d, p, s);
                    CHECK(b.kur_satisfied);
                    CHECK(b.cur_satisfied);
                    CHECK(b.cur_rhs >= b.kur_rhs);
                    CHECK(b.tur_satisfied.has_value() == s.antisymmetric());
                    if (b.tur_satisfied) {
                        CHECK(*b.tur_satisfied);
                    }
                }
            }
        }
    }
    const auto p = reference(2.0, 0.0);
    const auto b = uncertainty_bounds(partition(build_model(p), kEmpty), p, transport_weights(Lead::right, 4));
    CHECK(b.lhs == std::numeric_limits<double>::infinity());
    CHECK(b.tur_rhs == std::numeric_limits<double>::infinity());
    CHECK(*b.tur_satisfied);
}

TEST_CASE("lhs is shared by transport and entropy") {
    for (double vg : {-9.0, -1.0, 6.0}) {
        for (double vsd : {-15.0, 4.0}) {
            const auto p = reference(vg, vsd);
            const BlockDecomposition d = partition(build_model(p), kEmpty);
            const auto t = uncertainty_bounds(d, p, transport_weights(Lead::right, 4));
            const auto e = uncertainty_bounds(d, p, entropy_weights(p));
            CHECK(rel(e.lhs, t.lhs) < 1e-10);
        }
    }
}

TEST_CASE("tightest bound along V_g cuts") {
    // V_g in the shifted convention x = V_g + U/2
    auto bounds = [](double x, double vsd) {
        const auto p = reference(x - 5.0, vsd);
        return uncertainty_bounds(partition(build_model(p), kEmpty), p, transport_weights(Lead::right, 4));
    };
    for (double x = -25.0; x <= 25.0; x += 2.5) {
        const auto b = bounds(x, 7.0);
        CAPTURE(x);
        CHECK(b.tur_rhs > b.cur_rhs);
        CHECK(b.tur_rhs > b.kur_rhs);
    }
    for (double x : {-25.0, -20.0, -15.0, 0.0, 15.0, 20.0, 25.0}) {
        const auto b = bounds(x, -20.0);
        CAPTURE(x);
        CHECK(b.cur_rhs > b.tur_rhs);
    }
}

TEST_CASE("sign of the transport current follows -V_sd") {
    for (double vg = -10.0; vg <= 10.0; vg += 2.0) {
        for (double vsd : {-25.0, -3.0, -0.5, 0.5, 3.0, 25.0}) {
            for (bool blockade : {false, true}) {
                const auto p = reference(vg, vsd, blockade);
                const RateMatrix m = build_model(p);
                const double j = current(partition(m, kEmpty), transport_weights(Lead::right, m.size()));
                const FermiSet f = fermi_set(p);
                CHECK(std::signbit(j) == (vsd > 0));
                CHECK(std::signbit(j) == (f.f_L() < f.f_R()));
            }
        }
    }
}
