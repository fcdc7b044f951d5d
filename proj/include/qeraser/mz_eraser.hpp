// mz_eraser.hpp
// End-to-end Mach-Zehnder eraser scenario: polarization-entangled pair,
// PBS1 -> rotator -> movable-mirror phase -> BS2, and joint detector/idler
// statistics in any idler basis, including the position-adapted basis that
// restores perfect correlation at every mirror displacement.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "optics.hpp"

namespace qeraser::mz {

struct mz_config {
    double x = 0.0;
    double lambda = 1.0;

    mz_config(double x_, double lambda_) : x(x_), lambda(lambda_) {
        if (!(lambda > 0.0)) throw std::invalid_argument("mz_config: lambda must be positive");
        if (!std::isfinite(x)) throw std::invalid_argument("mz_config: non-finite displacement");
        if (!std::isfinite(phase())) throw std::invalid_argument("mz_config: non-finite phase");
    }

    double phase() const { return 2.0 * std::numbers::pi * x / lambda; }
};

enum class detector { d1 = 0, d2 = 1 };

inline qubit_state detector_state(detector d) {
    return d == detector::d1 ? qubit_state{complex_t{1.0, 0.0}, complex_t{0.0, 0.0}}
                             : qubit_state{complex_t{0.0, 0.0}, complex_t{1.0, 0.0}};
}

inline std::string_view detector_name(detector d) {
    return d == detector::d1 ? "D1" : "D2";
}

// The idler is a polarization qubit; the detector_pm family lives on the
// path register and is not a valid idler measurement.
inline void require_idler_basis(const basis_pair& b) {
    if (b.family == basis_family::detector_pm)
        throw std::invalid_argument("idler basis: detector_pm acts on the path register");
}

// (|H_s>|V_i> + |V_s>|H_i>)/sqrt2, path register in the source mode.
inline state_vector initial_state() {
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    std::vector<complex_t> amps(8, complex_t{0.0, 0.0});
    amps[2] = complex_t{inv_sqrt2, 0.0};  // H_s, V_i
    amps[4] = complex_t{inv_sqrt2, 0.0};  // V_s, H_i
    return state_vector({signal_pol, idler_pol, signal_path}, std::move(amps),
                        path_stage::source);
}

// State just before BS2: (e^{i 2 pi x / lambda}|H_i>|psi2> + |V_i>|psi1>)|V_s>/sqrt2
inline state_vector evolve_pre_bs2(const mz_config& cfg) {
    state_vector s = apply_pbs1(initial_state());
    s = apply_rotator(s);
    return apply_path_phase(s, cfg.x, cfg.lambda);
}

inline state_vector evolve_final(const mz_config& cfg) {
    return apply_bs2(evolve_pre_bs2(cfg));
}

inline double joint_probability(const mz_config& cfg, detector det, const basis_pair& idler_basis,
                                std::size_t outcome) {
    require_idler_basis(idler_basis);
    if (outcome > 1) throw std::invalid_argument("joint_probability: outcome index out of range");
    const state_vector s = evolve_final(cfg);
    return born_probability(s, {{signal_path, detector_state(det)},
                                {idler_pol, idler_basis.states[outcome]}});
}

// Reference curve for the circular idler basis: (1 - cos phi)/4 when the
// detector and outcome indices coincide (D1 with R, D2 with L), else
// (1 + cos phi)/4.
inline double analytic_joint_circular(const mz_config& cfg, detector det, std::size_t outcome) {
    if (outcome > 1) throw std::invalid_argument("analytic_joint_circular: bad outcome index");
    const double c = std::cos(cfg.phase());
    const bool aligned = (det == detector::d1) == (outcome == 0);
    return aligned ? (1.0 - c) / 4.0 : (1.0 + c) / 4.0;
}

// Basis angle that restores perfect correlation at displacement x.
inline double mub_for_position(const mz_config& cfg) {
    return canonical_angle(cfg.phase());
}

inline basis_pair adaptive_basis(const mz_config& cfg) {
    return basis_pair::make(basis_family::polarization_pq, mub_for_position(cfg));
}

struct joint_table {
    mz_config config;
    basis_pair basis;
    std::array<double, 4> p{};  // cell = detector_index * 2 + outcome_index

    static std::size_t cell(detector det, std::size_t outcome) {
        return static_cast<std::size_t>(det) * 2 + outcome;
    }

    double at(detector det, std::size_t outcome) const { return p[cell(det, outcome)]; }
};

inline joint_table correlation_table(const mz_config& cfg, const basis_pair& idler_basis) {
    require_idler_basis(idler_basis);
    joint_table t{cfg, idler_basis, {}};
    const state_vector s = evolve_final(cfg);
    for (detector det : {detector::d1, detector::d2})
        for (std::size_t outcome = 0; outcome < 2; ++outcome)
            t.p[joint_table::cell(det, outcome)] =
                born_probability(s, {{signal_path, detector_state(det)},
                                     {idler_pol, idler_basis.states[outcome]}});
    double sum = 0.0;
    for (double v : t.p) {
        if (v < -tolerance() || v > 1.0 + tolerance())
            throw std::logic_error("correlation_table: probability out of range");
        sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance())
        throw std::logic_error("correlation_table: entries do not sum to 1");
    // both local marginals are unbiased
    for (std::size_t i = 0; i < 2; ++i) {
        if (std::abs(t.p[2 * i] + t.p[2 * i + 1] - 0.5) > tolerance())
            throw std::logic_error("correlation_table: detector marginal != 1/2");
        if (std::abs(t.p[i] + t.p[i + 2] - 0.5) > tolerance())
            throw std::logic_error("correlation_table: idler marginal != 1/2");
    }
    return t;
}

// delayed = signal detected first, advanced = idler measured first
enum class measurement_order { signal_first, idler_first };

inline std::array<double, 4> ordered_joint_table(const mz_config& cfg,
                                                 const basis_pair& idler_basis,
                                                 measurement_order order) {
    require_idler_basis(idler_basis);
    const state_vector s = evolve_final(cfg);
    std::array<double, 4> out{};
    for (detector det : {detector::d1, detector::d2}) {
        for (std::size_t outcome = 0; outcome < 2; ++outcome) {
            double joint = 0.0;
            if (order == measurement_order::signal_first) {
                const auto first = post_select(s, signal_path, detector_state(det));
                if (first.state)
                    joint = first.probability *
                            born_probability(*first.state,
                                             {{idler_pol, idler_basis.states[outcome]}});
            } else {
                const auto first = post_select(s, idler_pol, idler_basis.states[outcome]);
                if (first.state)
                    joint = first.probability *
                            born_probability(*first.state,
                                             {{signal_path, detector_state(det)}});
            }
            out[joint_table::cell(det, outcome)] = joint;
        }
    }
    return out;
}

// Sup-norm disagreement between the two measurement orderings (and the
// order-free joint table). The orderings commute, so this is ~0.
inline double mode_equivalence_check(const mz_config& cfg, const basis_pair& idler_basis) {
    const auto delayed = ordered_joint_table(cfg, idler_basis, measurement_order::signal_first);
    const auto advanced = ordered_joint_table(cfg, idler_basis, measurement_order::idler_first);
    const auto direct = correlation_table(cfg, idler_basis).p;
    double dev = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        dev = std::max(dev, std::abs(delayed[i] - advanced[i]));
        dev = std::max(dev, std::abs(delayed[i] - direct[i]));
    }
    return dev;
}

}  // namespace qeraser::mz
