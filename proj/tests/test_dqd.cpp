#include "exclab/dqd.hpp"
#include "exclab/errors.hpp"
#include "exclab/markov.hpp"

#include <doctest.h>

#include <cmath>

using namespace exclab;

namespace {

const double kGamma = 2.0 * M_PI * 0.1;

DqdParams reference(double vg, double vsd, bool blockade = false) {
    return DqdParams::symmetric(1.0, kGamma, 2.0, 10.0, vg, vsd, blockade);
}

} // namespace

TEST_CASE("fermi") {
    CHECK(fermi(3.0, 3.0, 1.7) == 0.5);
    CHECK(fermi(2.0, 0.0, 2.0) == doctest::Approx(1.0 / (M_E + 1.0)).epsilon(1e-15));
    CHECK(std::abs(fermi(2.0, 0.0, 2.0) - 0.268941) < 1e-6);
    const double tail = fermi(200.0, 0.0, 2.0);
    CHECK(tail < 1e-40);
    CHECK(tail > 0.0);
    CHECK(fermi(-200.0, 0.0, 2.0) == 1.0);
    const Occupation o = occupation(-200.0, 0.0, 2.0);
    CHECK(o.complement > 0.0);
    CHECK(o.complement < 1e-40);
}

TEST_CASE("effective_coupling") {
    CHECK(effective_coupling(1.0, kGamma, 0.0, 0.0) == doctest::Approx(10.0 / M_PI).epsilon(1e-14));
    CHECK(std::abs(effective_coupling(1.0, kGamma, 0.0, 0.0) - 3.18310) < 1e-5);
    CHECK(effective_coupling(1.0, kGamma, 1e8, -1e8) < 1e-15);
    CHECK(effective_coupling(0.0, kGamma, 1.0, 2.0) == 0.0);
}

TEST_CASE("build_dqd: rate placement") {
    for (double vg : {-8.0, 0.0, 3.5}) {
        const auto p = reference(vg, 7.0);
        const RateMatrix m = build_dqd(p);
        const FermiSet f = fermi_set(p);
        CHECK(m.labels()[kLeft] == "10");
        CHECK(m.rate(kLeft, kEmpty) == doctest::Approx(p.gamma * f.f_L()).epsilon(1e-15));
        CHECK(m.rate(kBoth, kLeft) == doctest::Approx(p.gamma * f.ft_R()).epsilon(1e-15));
        CHECK(m.rate(kEmpty, kRight) == doctest::Approx(p.gamma * (1.0 - f.f_R())).epsilon(1e-12));
        CHECK(m.rate(kLeft, kRight) == doctest::Approx(effective_coupling(p)).epsilon(1e-15));
        CHECK(m.rate(kBoth, kEmpty) == 0.0);
        CHECK(m.rate(kEmpty, kBoth) == 0.0);
    }
}

TEST_CASE("build_dqd: left-right swap symmetry at zero bias") {
    const RateMatrix m = build_dqd(reference(1.3, 0.0));
    const std::size_t swap[] = {kEmpty, kRight, kLeft, kBoth};
    for (std::size_t x = 0; x < 4; ++x) {
        for (std::size_t y = 0; y < 4; ++y) {
            CHECK(m.rate(x, y) == doctest::Approx(m.rate(swap[x], swap[y])).epsilon(1e-15));
        }
    }
}

TEST_CASE("fermi_set: repulsion") {
    auto p = reference(-2.0, 5.0);
    p.U = 0.0;
    FermiSet f = fermi_set(p);
    CHECK(f.ft_L() == f.f_L());
    CHECK(f.ft_R() == f.f_R());
    for (double U : {0.1, 1.0, 10.0}) {
        p.U = U;
        f = fermi_set(p);
        CHECK(f.ft_L() < f.f_L());
        CHECK(f.ft_R() < f.f_R());
    }
}

TEST_CASE("build_dqd_blockade") {
    for (double vg : {-5.0, 0.0, 5.0}) {
        for (double vsd : {-12.0, 0.0, 7.0}) {
            const auto p = reference(vg, vsd, true);
            const RateMatrix m = build_dqd_blockade(p);
            const FermiSet f = fermi_set(p);
            CHECK(m.size() == 3);
            CHECK(m.escape_rate(kEmpty) == doctest::Approx(p.gamma * (f.f_L() + f.f_R())).epsilon(1e-14));
        }
    }
    // f_L -> 1, f_R -> 0: the empty state is fed only from the right dot.
    const RateMatrix m = build_dqd_blockade(reference(0.0, -2000.0, true));
    CHECK(m.rate(kEmpty, kLeft) < 1e-200 * m.rate(kEmpty, kRight));
    CHECK(m.rate(kEmpty, kRight) > 0.0);
}

TEST_CASE("large U limit of the four-state model") {
    for (double vg : {-4.0, 1.0}) {
        for (double vsd : {-9.0, 6.0}) {
            auto p = reference(vg, vsd);
            // 1e6 underflows the rates into 11 to zero and disconnects it.
            p.U = 1e3;
            const RateMatrix full = build_dqd(p);
            p.blockade = true;
            const RateMatrix three = build_dqd_blockade(p);
            for (std::size_t x = 0; x < 3; ++x) {
                for (std::size_t y = 0; y < 3; ++y) {
                    CHECK(std::abs(full.rate(x, y) - three.rate(x, y)) <= 1e-10 * three.rate(x, y));
                }
            }
        }
    }
}

TEST_CASE("common energy shift leaves the rates unchanged") {
    const auto p = reference(-1.0, 6.0);
    auto q = p;
    q.vg_left += 3.25;
    q.vg_right += 3.25;
    q.potential_offset = 3.25;
    const Matrix diff = build_dqd(p).rates() - build_dqd(q).rates();
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("builders give irreducible chains across parameters") {
    for (double vg = -40.0; vg <= 40.0; vg += 8.0) {
        for (double vsd = -80.0; vsd <= 80.0; vsd += 16.0) {
            CHECK_NOTHROW(build_dqd(reference(vg, vsd)));
            CHECK_NOTHROW(build_dqd_blockade(reference(vg, vsd, true)));
        }
    }
}

TEST_CASE("invalid parameters") {
    auto p = reference(0.0, 1.0);
    p.temperature = 0.0;
    CHECK_THROWS_AS(build_dqd(p), InvalidParameters);
    p = reference(0.0, 1.0);
    p.gamma = -1.0;
    CHECK_THROWS_AS(build_dqd(p), InvalidParameters);
    p = reference(0.0, 1.0);
    p.U = -1.0;
    CHECK_THROWS_AS(build_dqd(p), InvalidParameters);
    p = reference(0.0, NAN);
    CHECK_THROWS_AS(build_dqd(p), InvalidParameters);
    CHECK_THROWS_AS(build_dqd_blockade(reference(0.0, 1.0)), InvalidParameters);
    CHECK_THROWS_AS(build_dqd(reference(0.0, 1.0, true)), InvalidParameters);
}
