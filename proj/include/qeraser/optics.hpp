// optics.hpp
// Polarization bases, mutually unbiased basis families, and the optical
// elements of the interferometer (polarizing beam splitter, conditional
// polarization flip, movable-mirror path phase, recombining beam splitter),
// each expressed as a local unitary on labeled registers.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hilbert.hpp"

namespace qeraser {

inline constexpr complex_t cplx_i{0.0, 1.0};

// Wrap an angle into [0, 2*pi).
inline double canonical_angle(double theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("canonical_angle: non-finite angle");
    const double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, two_pi);
    if (t < 0.0) t += two_pi;
    if (t == two_pi) t = 0.0;
    return t;
}

inline constexpr qubit_state pol_h{complex_t{1.0, 0.0}, complex_t{0.0, 0.0}};
inline constexpr qubit_state pol_v{complex_t{0.0, 0.0}, complex_t{1.0, 0.0}};

enum class basis_family { linear_hv, circular_rl, polarization_pq, detector_pm };

inline std::string_view family_name(basis_family f) {
    switch (f) {
        case basis_family::linear_hv: return "linear";
        case basis_family::circular_rl: return "circular";
        case basis_family::polarization_pq: return "pq";
        case basis_family::detector_pm: return "detector";
    }
    return "?";
}

// An orthonormal two-outcome measurement basis. theta parameterizes the
// polarization_pq and detector_pm families; the other two ignore it.
struct basis_pair {
    basis_family family = basis_family::linear_hv;
    double theta = 0.0;
    std::array<qubit_state, 2> states{};

    static basis_pair make(basis_family f, double theta = 0.0) {
        basis_pair b;
        b.family = f;
        const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
        switch (f) {
            case basis_family::linear_hv:
                b.theta = 0.0;
                b.states = {pol_h, pol_v};
                break;
            case basis_family::circular_rl:
                b.theta = 0.0;
                b.states = {qubit_state{complex_t{inv_sqrt2, 0.0}, complex_t{0.0, inv_sqrt2}},
                            qubit_state{complex_t{inv_sqrt2, 0.0}, complex_t{0.0, -inv_sqrt2}}};
                break;
            case basis_family::polarization_pq: {
                b.theta = canonical_angle(theta);
                const complex_t front = std::polar(inv_sqrt2, b.theta);
                b.states = {qubit_state{front, complex_t{0.0, inv_sqrt2}},
                            qubit_state{front, complex_t{0.0, -inv_sqrt2}}};
                break;
            }
            case basis_family::detector_pm: {
                b.theta = canonical_angle(theta);
                const complex_t front = std::polar(inv_sqrt2, b.theta);
                b.states = {qubit_state{front, complex_t{inv_sqrt2, 0.0}},
                            qubit_state{front, complex_t{-inv_sqrt2, 0.0}}};
                break;
            }
        }
        return b;
    }

    std::string_view label(std::size_t outcome) const {
        static constexpr std::array<std::array<std::string_view, 2>, 4> names{{
            {"H", "V"},
            {"R", "L"},
            {"P", "Q"},
            {"plus", "minus"},
        }};
        return names[static_cast<std::size_t>(family)].at(outcome);
    }
};

// |<a|b>|, insensitive to global phase
inline double overlap(const qubit_state& a, const qubit_state& b) {
    return std::abs(std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1]);
}

inline qubit_state circular_r() { return basis_pair::make(basis_family::circular_rl).states[0]; }
inline qubit_state circular_l() { return basis_pair::make(basis_family::circular_rl).states[1]; }

// --- element unitaries ---

// PBS1: transmits H into psi1, reflects V into psi2. On pol (x) path this is
// a controlled path flip; the source spatial mode is relabeled psi1.
inline local_operator pbs_route() {
    std::vector<complex_t> m(16, complex_t{0.0, 0.0});
    m[0 * 4 + 0] = 1.0;  // H,psi1 -> H,psi1
    m[1 * 4 + 1] = 1.0;  // H,psi2 -> H,psi2
    m[3 * 4 + 2] = 1.0;  // V,psi1 -> V,psi2
    m[2 * 4 + 3] = 1.0;  // V,psi2 -> V,psi1
    return local_operator({signal_pol, signal_path}, std::move(m));
}

// Half-wave rotator in arm psi1 only: swaps H and V there, so path ends up
// carrying the which-way record instead of polarization.
inline local_operator conditional_pol_flip() {
    std::vector<complex_t> m(16, complex_t{0.0, 0.0});
    m[2 * 4 + 0] = 1.0;  // H,psi1 -> V,psi1
    m[0 * 4 + 2] = 1.0;  // V,psi1 -> H,psi1
    m[1 * 4 + 1] = 1.0;  // H,psi2 -> H,psi2
    m[3 * 4 + 3] = 1.0;  // V,psi2 -> V,psi2
    return local_operator({signal_pol, signal_path}, std::move(m));
}

// Mirror displacement x lengthens arm psi2 by a phase exp(i 2 pi x / lambda).
inline local_operator path_phase(double x, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("path_phase: wavelength must be positive");
    if (!std::isfinite(x)) throw std::invalid_argument("path_phase: non-finite displacement");
    const double phi = 2.0 * std::numbers::pi * x / lambda;
    std::vector<complex_t> m(4, complex_t{0.0, 0.0});
    m[0] = 1.0;
    m[3] = std::polar(1.0, phi);
    return local_operator({signal_path}, std::move(m));
}

// Symmetric 50/50 beam splitter, (1/sqrt2) [[1, i], [i, 1]] on the path.
inline local_operator beam_splitter() {
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    std::vector<complex_t> m{
        complex_t{inv_sqrt2, 0.0}, complex_t{0.0, inv_sqrt2},
        complex_t{0.0, inv_sqrt2}, complex_t{inv_sqrt2, 0.0},
    };
    return local_operator({signal_path}, std::move(m));
}

// --- stage-checked appliers ---
// These advance the path_stage tag so a pipeline cannot apply an element to
// a state that is in the wrong leg of the apparatus.

inline state_vector apply_pbs1(const state_vector& s) {
    if (s.stage() != path_stage::source)
        throw std::invalid_argument("apply_pbs1: state is not at the source stage");
    return apply_local(pbs_route(), s).with_stage(path_stage::arms);
}

inline state_vector apply_rotator(const state_vector& s) {
    if (s.stage() != path_stage::arms)
        throw std::invalid_argument("apply_rotator: state is not in the arms");
    return apply_local(conditional_pol_flip(), s);
}

inline state_vector apply_path_phase(const state_vector& s, double x, double lambda) {
    if (s.stage() != path_stage::arms)
        throw std::invalid_argument("apply_path_phase: state is not in the arms");
    return apply_local(path_phase(x, lambda), s);
}

// After BS2 the path basis labels mean {D1, D2}. Applying it to a state that
// already passed BS2 is rejected unless explicitly unchecked.
inline state_vector apply_bs2(const state_vector& s, bool unchecked = false) {
    if (!unchecked && s.stage() != path_stage::arms)
        throw std::invalid_argument("apply_bs2: state is not in the arms");
    return apply_local(beam_splitter(), s).with_stage(path_stage::detectors);
}

// Expansion of a register in a named basis pair.
inline basis_expansion expand_in_basis(const state_vector& s, const subsystem& sub,
                                       const basis_pair& b) {
    return expand_in_basis(s, sub, b.states[0], b.states[1]);
}

}  // namespace qeraser
