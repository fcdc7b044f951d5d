#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qeraser/mz_eraser.hpp"

using namespace qeraser;

namespace {

constexpr double tol = 1e-12;
const double two_pi = 2.0 * std::numbers::pi;

bool near(double a, double b, double t = tol) { return std::abs(a - b) <= t; }
bool cnear(complex_t a, complex_t b, double t = tol) { return std::abs(a - b) <= t; }

double unit_draw(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// |<a|b>| between equal-layout states
double state_overlap(const state_vector& a, const state_vector& b) {
    complex_t s{0, 0};
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a.amp(i)) * b.amp(i);
    return std::abs(s);
}

}  // namespace

TEST_CASE("config validation") {
    REQUIRE_THROWS_AS(mz::mz_config(0.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(mz::mz_config(0.0, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(mz::mz_config(std::nan(""), 1.0), std::invalid_argument);
    REQUIRE(near(mz::mz_config(0.25, 1.0).phase(), std::numbers::pi / 2.0));
}

TEST_CASE("initial state") {
    const auto s = mz::initial_state();
    const double r = 1.0 / std::numbers::sqrt2;
    REQUIRE(near(s.norm(), 1.0));
    REQUIRE(s.stage() == path_stage::source);
    REQUIRE(cnear(s.amp(2), complex_t{r, 0}));  // H_s V_i
    REQUIRE(cnear(s.amp(4), complex_t{r, 0}));  // V_s H_i
    REQUIRE(cnear(s.amp(0), complex_t{0, 0}));  // H_s H_i absent
    REQUIRE(cnear(s.amp(6), complex_t{0, 0}));  // V_s V_i absent
    REQUIRE(near(reduced_purity(s, idler_pol), 0.5));
}

TEST_CASE("evolution up to the recombining splitter") {
    const double r = 1.0 / std::numbers::sqrt2;

    SECTION("zero displacement") {
        const auto s = mz::evolve_pre_bs2(mz::mz_config(0.0, 1.0));
        REQUIRE(s.stage() == path_stage::arms);
        REQUIRE(cnear(s.amp(5), complex_t{r, 0}));  // V_s H_i psi2
        REQUIRE(cnear(s.amp(6), complex_t{r, 0}));  // V_s V_i psi1
    }

    SECTION("circular expansion of the zero-displacement state") {
        const auto s = mz::evolve_pre_bs2(mz::mz_config(0.0, 1.0));
        const auto rl = basis_pair::make(basis_family::circular_rl);
        const auto ex = expand_in_basis(s, idler_pol, rl);
        // remaining layout [signal_pol, signal_path]; partners (psi2 -+ i psi1)/2 with V_s
        REQUIRE(cnear(ex.partners[0][2], complex_t{0, -0.5}));  // R partner, V psi1
        REQUIRE(cnear(ex.partners[0][3], complex_t{0.5, 0}));   // R partner, V psi2
        REQUIRE(cnear(ex.partners[1][2], complex_t{0, 0.5}));   // L partner, V psi1
        REQUIRE(cnear(ex.partners[1][3], complex_t{0.5, 0}));
        REQUIRE(near(ex.weight(0), 0.5));
        REQUIRE(near(ex.weight(1), 0.5));
    }

    SECTION("half-wavelength displacement") {
        const auto s = mz::evolve_pre_bs2(mz::mz_config(0.5, 1.0));
        REQUIRE(cnear(s.amp(5), complex_t{-r, 0}));
        REQUIRE(cnear(s.amp(6), complex_t{r, 0}));
    }

    SECTION("signal polarization is disentangled, idler is not") {
        std::mt19937_64 gen(5);
        for (int i = 0; i < 50; ++i) {
            const auto s = mz::evolve_pre_bs2(mz::mz_config(unit_draw(gen), 1.0));
            REQUIRE(near(reduced_purity(s, signal_pol), 1.0));
            REQUIRE(near(reduced_purity(s, idler_pol), 0.5));
        }
    }
}

TEST_CASE("final state") {
    SECTION("zero displacement matches the perfectly correlated form") {
        const auto s = mz::evolve_final(mz::mz_config(0.0, 1.0));
        REQUIRE(s.stage() == path_stage::detectors);
        // i|D1>|L> /sqrt2 + |D2>|R> /sqrt2, polarization V_s throughout
        const double r = 1.0 / std::numbers::sqrt2;
        std::vector<complex_t> amps(8, complex_t{0, 0});
        const complex_t i_unit{0, 1};
        // |L> = (|H> - i|V>)/sqrt2 on idler, D1 = path 0
        amps[4] = i_unit * complex_t{r, 0} * complex_t{r, 0};            // V_s H_i D1
        amps[6] = i_unit * complex_t{0, -r} * complex_t{r, 0};          // V_s V_i D1
        // |R> = (|H> + i|V>)/sqrt2 on idler, D2 = path 1
        amps[5] = complex_t{r, 0} * complex_t{r, 0};                     // V_s H_i D2
        amps[7] = complex_t{0, r} * complex_t{r, 0};                     // V_s V_i D2
        const state_vector target({signal_pol, idler_pol, signal_path}, amps,
                                  path_stage::detectors);
        REQUIRE(near(state_overlap(target, s), 1.0));
    }

    SECTION("detectors are equally likely at any displacement") {
        std::mt19937_64 gen(9);
        for (int i = 0; i < 200; ++i) {
            const auto s = mz::evolve_final(mz::mz_config(unit_draw(gen), 1.0));
            for (mz::detector det : {mz::detector::d1, mz::detector::d2})
                REQUIRE(near(
                    born_probability(s, {{signal_path, mz::detector_state(det)}}), 0.5));
        }
    }

    SECTION("quarter-wavelength displacement equalizes the circular joints") {
        const mz::mz_config cfg(0.25, 1.0);
        const auto rl = basis_pair::make(basis_family::circular_rl);
        for (mz::detector det : {mz::detector::d1, mz::detector::d2})
            for (std::size_t o = 0; o < 2; ++o)
                REQUIRE(near(mz::joint_probability(cfg, det, rl, o), 0.25));
    }
}

TEST_CASE("joint probabilities") {
    const auto rl = basis_pair::make(basis_family::circular_rl);

    SECTION("landmark displacements") {
        REQUIRE(near(mz::joint_probability(mz::mz_config(0.0, 1.0), mz::detector::d1, rl, 0),
                     0.0));
        REQUIRE(near(mz::joint_probability(mz::mz_config(0.5, 1.0), mz::detector::d1, rl, 0),
                     0.5));
    }

    SECTION("circular joints follow the closed form") {
        std::mt19937_64 gen(21);
        for (int i = 0; i < 200; ++i) {
            const mz::mz_config cfg(unit_draw(gen) * 2.0, 2.0);
            for (mz::detector det : {mz::detector::d1, mz::detector::d2})
                for (std::size_t o = 0; o < 2; ++o)
                    REQUIRE(near(mz::joint_probability(cfg, det, rl, o),
                                 mz::analytic_joint_circular(cfg, det, o)));
        }
    }

    SECTION("linear joints are flat at 1/4") {
        std::mt19937_64 gen(27);
        const auto hv = basis_pair::make(basis_family::linear_hv);
        for (int i = 0; i < 200; ++i) {
            const mz::mz_config cfg(unit_draw(gen), 1.0);
            for (mz::detector det : {mz::detector::d1, mz::detector::d2})
                for (std::size_t o = 0; o < 2; ++o)
                    REQUIRE(near(mz::joint_probability(cfg, det, hv, o), 0.25));
        }
    }

    SECTION("invalid inputs") {
        const mz::mz_config cfg(0.0, 1.0);
        REQUIRE_THROWS_AS(
            mz::joint_probability(cfg, mz::detector::d1,
                                  basis_pair::make(basis_family::detector_pm), 0),
            std::invalid_argument);
        REQUIRE_THROWS_AS(mz::joint_probability(cfg, mz::detector::d1, rl, 2),
                          std::invalid_argument);
    }
}

TEST_CASE("adaptive basis angle") {
    REQUIRE(near(mz::mub_for_position(mz::mz_config(0.0, 1.0)), 0.0));
    REQUIRE(near(mz::mub_for_position(mz::mz_config(0.25, 1.0)), std::numbers::pi / 2.0));
    REQUIRE(near(mz::mub_for_position(mz::mz_config(1.0, 1.0)), 0.0));
}

TEST_CASE("correlation tables") {
    SECTION("zero displacement in the circular basis") {
        const auto t = mz::correlation_table(mz::mz_config(0.0, 1.0),
                                             basis_pair::make(basis_family::circular_rl));
        REQUIRE(near(t.at(mz::detector::d1, 0), 0.0));
        REQUIRE(near(t.at(mz::detector::d1, 1), 0.5));
        REQUIRE(near(t.at(mz::detector::d2, 0), 0.5));
        REQUIRE(near(t.at(mz::detector::d2, 1), 0.0));
    }

    SECTION("quarter wavelength in the circular basis") {
        const auto t = mz::correlation_table(mz::mz_config(0.25, 1.0),
                                             basis_pair::make(basis_family::circular_rl));
        for (double p : t.p) REQUIRE(near(p, 0.25));
    }

    SECTION("position-adapted basis restores perfect correlation everywhere") {
        std::mt19937_64 gen(33);
        for (int i = 0; i < 200; ++i) {
            const mz::mz_config cfg(unit_draw(gen), 1.0);
            const auto t = mz::correlation_table(cfg, mz::adaptive_basis(cfg));
            REQUIRE(near(t.at(mz::detector::d1, 0), 0.0));  // P never fires with D1
            REQUIRE(near(t.at(mz::detector::d2, 1), 0.0));  // Q never fires with D2
            REQUIRE(near(t.at(mz::detector::d1, 1), 0.5));
            REQUIRE(near(t.at(mz::detector::d2, 0), 0.5));
        }
    }

    SECTION("entries depend only on the phase difference") {
        for (int ix = 0; ix < 20; ++ix) {
            for (int it = 0; it < 20; ++it) {
                const double x = static_cast<double>(ix) / 20.0;
                const double theta = two_pi * static_cast<double>(it) / 20.0;
                const auto a = mz::correlation_table(
                    mz::mz_config(x, 1.0),
                    basis_pair::make(basis_family::polarization_pq, theta));
                const auto b = mz::correlation_table(
                    mz::mz_config(x - theta / two_pi, 1.0),
                    basis_pair::make(basis_family::polarization_pq, 0.0));
                for (std::size_t c = 0; c < 4; ++c) REQUIRE(near(a.p[c], b.p[c]));
            }
        }
    }
}

TEST_CASE("measurement order is immaterial") {
    SECTION("landmark cases") {
        REQUIRE(mz::mode_equivalence_check(mz::mz_config(0.0, 1.0),
                                           basis_pair::make(basis_family::circular_rl)) < tol);
        REQUIRE(mz::mode_equivalence_check(
                    mz::mz_config(0.3, 1.0),
                    basis_pair::make(basis_family::polarization_pq, 0.6 * std::numbers::pi)) <
                tol);
    }

    SECTION("random displacements and bases") {
        std::mt19937_64 gen(41);
        for (int i = 0; i < 100; ++i) {
            const mz::mz_config cfg(unit_draw(gen), 1.0);
            basis_pair b = basis_pair::make(basis_family::linear_hv);
            const auto pick = i % 3;
            if (pick == 1) b = basis_pair::make(basis_family::circular_rl);
            if (pick == 2)
                b = basis_pair::make(basis_family::polarization_pq, unit_draw(gen) * two_pi);
            REQUIRE(mz::mode_equivalence_check(cfg, b) < tol);
        }
    }

    SECTION("both orderings match the direct joint table") {
        const mz::mz_config cfg(0.125, 1.0);
        const auto b = basis_pair::make(basis_family::circular_rl);
        const auto direct = mz::correlation_table(cfg, b);
        for (auto order : {mz::measurement_order::signal_first,
                           mz::measurement_order::idler_first}) {
            const auto t = mz::ordered_joint_table(cfg, b, order);
            for (std::size_t c = 0; c < 4; ++c) REQUIRE(near(t[c], direct.p[c]));
        }
    }
}
