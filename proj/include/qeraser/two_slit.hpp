// two_slit.hpp
// Two-slit which-way analysis: Gaussian-envelope fringe patterns conditioned
// on the which-way detector outcome, the position-dependent erasure angle
// theta*(x), and the certification that the minus outcome never fires when
// the basis is adapted to the detection position.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "optics.hpp"

namespace qeraser::twoslit {

enum class ww_outcome { plus, minus };

inline std::string_view ww_outcome_name(ww_outcome o) {
    return o == ww_outcome::plus ? "plus" : "minus";
}

struct two_slit_config {
    double slit_separation;  // d
    double screen_distance;  // D
    double lambda;
    double envelope_sigma;
    std::vector<double> grid;  // screen positions, strictly increasing

    // default envelope width: five fringe periods
    static double auto_sigma(double d, double dist, double lambda) {
        return 5.0 * lambda * dist / d;
    }

    two_slit_config(double d, double dist, double lambda_, double sigma,
                    std::vector<double> grid_ = {})
        : slit_separation(d), screen_distance(dist), lambda(lambda_), envelope_sigma(sigma),
          grid(std::move(grid_)) {
        if (!(slit_separation > 0.0) || !std::isfinite(slit_separation))
            throw std::invalid_argument("two_slit_config: slit separation must be positive");
        if (!(screen_distance > 0.0) || !std::isfinite(screen_distance))
            throw std::invalid_argument("two_slit_config: screen distance must be positive");
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("two_slit_config: wavelength must be positive");
        if (!(envelope_sigma > 0.0) || !std::isfinite(envelope_sigma))
            throw std::invalid_argument("two_slit_config: envelope width must be positive");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!std::isfinite(grid[i]))
                throw std::invalid_argument("two_slit_config: non-finite grid position");
            if (i > 0 && !(grid[i] > grid[i - 1]))
                throw std::invalid_argument("two_slit_config: grid not strictly increasing");
        }
    }

    double fringe_period() const { return lambda * screen_distance / slit_separation; }
};

// Equispaced grid; endpoints exact, symmetric ranges hit their midpoint exactly.
inline std::vector<double> linspace(double min, double max, std::size_t steps) {
    if (steps < 2) throw std::invalid_argument("linspace: need at least 2 points");
    if (!(min < max)) throw std::invalid_argument("linspace: min must be below max");
    std::vector<double> out(steps);
    const auto n = static_cast<double>(steps - 1);
    for (std::size_t i = 0; i < steps; ++i)
        out[i] = (min * (n - static_cast<double>(i)) + max * static_cast<double>(i)) / n;
    return out;
}

inline double envelope(const two_slit_config& cfg, double x) {
    const double s = x / cfg.envelope_sigma;
    return std::exp(-0.5 * s * s);
}

// Total fringe phase 2 pi x d / (lambda D); both the pattern and theta_star
// derive from this one expression so their difference is an exact multiple
// of the stored 2 pi.
inline double fringe_phase(const two_slit_config& cfg, double x) {
    return 2.0 * std::numbers::pi * x * cfg.slit_separation / (cfg.lambda * cfg.screen_distance);
}

// psi1(x) = sqrt(A) e^{+i pi x d/(lambda D)}, psi2(x) = sqrt(A) e^{-i ...}
inline std::pair<complex_t, complex_t> slit_amplitudes(const two_slit_config& cfg, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("slit_amplitudes: non-finite position");
    const double root_a = std::sqrt(envelope(cfg, x));
    const double alpha = fringe_phase(cfg, x) / 2.0;
    return {std::polar(root_a, alpha), std::polar(root_a, -alpha)};
}

struct pattern_sample {
    double x = 0.0;
    double p_plus = 0.0;
    double p_minus = 0.0;
};

// p_pm(x) = A(x) [1 +- cos(2 pi x d/(lambda D) - theta)], evaluated both from
// the closed form and from the which-way register amplitudes; the two routes
// must agree or the state model is wrong.
inline pattern_sample pattern_at(const two_slit_config& cfg, double theta, double x) {
    if (!std::isfinite(theta)) throw std::invalid_argument("pattern_at: non-finite angle");
    const double a = envelope(cfg, x);
    if (a == 0.0) return {x, 0.0, 0.0};

    const double c = std::cos(fringe_phase(cfg, x) - theta);
    const double closed_plus = a * (1.0 + c);
    const double closed_minus = a * (1.0 - c);

    // amplitude route: which-way register prepared in the slit superposition,
    // measured in the erasure basis
    const auto [psi1, psi2] = slit_amplitudes(cfg, x);
    const double root = std::sqrt(2.0 * a);
    const state_vector ww({ww_detector}, {psi1 / root, psi2 / root});
    const basis_pair erasure = basis_pair::make(basis_family::detector_pm, theta);
    const double amp_plus = 2.0 * a * born_probability(ww, {{ww_detector, erasure.states[0]}});
    const double amp_minus = 2.0 * a * born_probability(ww, {{ww_detector, erasure.states[1]}});

    if (std::abs(amp_plus - closed_plus) > tolerance() ||
        std::abs(amp_minus - closed_minus) > tolerance())
        throw std::logic_error("pattern_at: closed form and amplitude form disagree");
    if (std::abs(closed_plus + closed_minus - 2.0 * a) > tolerance())
        throw std::logic_error("pattern_at: envelope sum rule violated");
    return {x, closed_plus, closed_minus};
}

inline std::vector<pattern_sample> pattern(const two_slit_config& cfg, double theta) {
    if (cfg.grid.empty()) throw std::invalid_argument("pattern: config has no grid");
    std::vector<pattern_sample> out;
    out.reserve(cfg.grid.size());
    for (double x : cfg.grid) out.push_back(pattern_at(cfg, theta, x));
    return out;
}

// Erasure angle that cancels the minus pattern at screen position x.
inline double theta_star(const two_slit_config& cfg, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("theta_star: non-finite position");
    return canonical_angle(fringe_phase(cfg, x));
}

struct erased_check {
    double theta = 0.0;
    double p_minus = 0.0;
    ww_outcome outcome = ww_outcome::plus;
};

// With theta = theta_star(x), a photon found at x forces the which-way
// detector into the plus state; p_minus there is zero up to rounding.
inline erased_check erased_basis_check(const two_slit_config& cfg, double x) {
    const double theta = theta_star(cfg, x);
    const pattern_sample s = pattern_at(cfg, theta, x);
    if (s.p_minus > 1e-12 * envelope(cfg, x))
        throw std::logic_error("erased_basis_check: minus pattern did not vanish");
    return {theta, s.p_minus, ww_outcome::plus};
}

}  // namespace qeraser::twoslit
