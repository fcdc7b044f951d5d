// montecarlo.hpp
// Seeded Born-rule sampling of joint detection events, coincidence scans
// over the mirror displacement, and screen-position sampling for the
// two-slit variant. Identical seed and configuration yield bit-identical
// event streams on any platform: the raw engine output is mapped to doubles
// by hand and no library distributions are used.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "mz_eraser.hpp"
#include "two_slit.hpp"

namespace qeraser::mc {

using seed_t = std::uint64_t;

// One substream per scan step, derived by counter through the splitmix64
// finalizer; adding steps never perturbs the draws of existing steps.
inline seed_t substream_seed(seed_t master, std::uint64_t index) {
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class uniform_stream {
public:
    explicit uniform_stream(seed_t seed) : gen_(seed) {}

    // uniform in [0,1) with 53 significant bits
    double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

// Probabilities below the zero threshold are clipped to exactly 0 before the
// cumulative table is built, so impossible outcomes can never be drawn at
// any sample size; the remainder is renormalized.
template <std::size_t N>
inline std::array<double, N> clipped_cells(const std::array<double, N>& p) {
    std::array<double, N> out{};
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = (p[i] < zero_probability_threshold) ? 0.0 : p[i];
        sum += out[i];
    }
    if (!(sum > 0.0)) throw std::invalid_argument("clipped_cells: no probability mass");
    for (auto& v : out) v /= sum;
    return out;
}

// Inverse CDF over an explicit cell table. Zero cells are unreachable: the
// cumulative value does not advance across them.
template <std::size_t N>
inline std::size_t draw_cell(const std::array<double, N>& p, double u) {
    double acc = 0.0;
    std::size_t last_live = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (p[i] <= 0.0) continue;
        acc += p[i];
        last_live = i;
        if (u < acc) return i;
    }
    return last_live;  // guards cumulative rounding below 1
}

struct event_record {
    std::uint64_t trial = 0;
    double x = 0.0;
    mz::detector det = mz::detector::d1;
    std::size_t idler_outcome = 0;
    double basis_theta = 0.0;
    basis_family family = basis_family::circular_rl;
};

inline std::vector<event_record> sample_joint(const mz::mz_config& cfg, const basis_pair& basis,
                                              std::uint64_t n, seed_t seed) {
    if (n < 1) throw std::invalid_argument("sample_joint: need at least one draw");
    const auto cells = clipped_cells(mz::correlation_table(cfg, basis).p);
    uniform_stream u(seed);
    std::vector<event_record> events;
    events.reserve(n);
    for (std::uint64_t t = 0; t < n; ++t) {
        const std::size_t cell = draw_cell(cells, u.next());
        events.push_back({t, cfg.x, static_cast<mz::detector>(cell / 2), cell % 2, basis.theta,
                          basis.family});
    }
    return events;
}

struct basis_policy {
    enum class kind { fixed, adaptive_mub };
    kind mode = kind::fixed;
    basis_family family = basis_family::circular_rl;
    double theta = 0.0;  // fixed polarization_pq only

    static basis_policy fixed(basis_family f, double theta = 0.0) {
        if (f == basis_family::detector_pm)
            throw std::invalid_argument("basis_policy: detector_pm is not an idler basis");
        return {kind::fixed, f, theta};
    }

    static basis_policy adaptive() {
        return {kind::adaptive_mub, basis_family::polarization_pq, 0.0};
    }

    basis_pair basis_for(const mz::mz_config& cfg) const {
        if (mode == kind::adaptive_mub) return mz::adaptive_basis(cfg);
        return basis_pair::make(family, theta);
    }
};

struct scan_spec {
    double x_min;
    double x_max;
    std::size_t steps;
    std::uint64_t shots;
    basis_policy policy;
    bool poisson = false;

    scan_spec(double x_min_, double x_max_, std::size_t steps_, std::uint64_t shots_,
              basis_policy policy_, bool poisson_ = false)
        : x_min(x_min_), x_max(x_max_), steps(steps_), shots(shots_), policy(policy_),
          poisson(poisson_) {
        if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max))
            throw std::invalid_argument("scan_spec: need finite x_min < x_max");
        if (steps < 2) throw std::invalid_argument("scan_spec: need at least 2 steps");
        if (shots < 1) throw std::invalid_argument("scan_spec: need at least 1 shot");
    }
};

struct coincidence_histogram {
    std::vector<double> x;
    std::vector<double> theta;  // idler basis angle used at each step
    basis_family family = basis_family::circular_rl;
    std::vector<std::uint64_t> shots;  // draws taken at each step
    std::vector<std::array<std::uint64_t, 4>> counts;  // cell = detector*2 + outcome
};

// Knuth's method in exponential space: count unit-rate arrivals until the
// accumulated waiting time passes the mean. Exact for the modest means used
// here and fully determined by the stream.
inline std::uint64_t poisson_draw(uniform_stream& u, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("poisson_draw: bad mean");
    double acc = 0.0;
    std::uint64_t k = 0;
    while (true) {
        acc += -std::log1p(-u.next());
        if (acc > mean) return k;
        ++k;
    }
}

// cfg_template supplies the wavelength; x is overridden at each step.
inline coincidence_histogram scan(const mz::mz_config& cfg_template, const scan_spec& spec,
                                  seed_t seed) {
    coincidence_histogram h;
    h.x = twoslit::linspace(spec.x_min, spec.x_max, spec.steps);
    h.theta.resize(spec.steps);
    h.shots.resize(spec.steps);
    h.counts.assign(spec.steps, {});
    for (std::size_t i = 0; i < spec.steps; ++i) {
        const mz::mz_config cfg{h.x[i], cfg_template.lambda};
        const basis_pair basis = spec.policy.basis_for(cfg);
        if (i == 0) h.family = basis.family;
        h.theta[i] = basis.theta;
        const auto cells = clipped_cells(mz::correlation_table(cfg, basis).p);
        uniform_stream u(substream_seed(seed, i));
        const std::uint64_t shots = spec.poisson ? poisson_draw(u, static_cast<double>(spec.shots))
                                                 : spec.shots;
        h.shots[i] = shots;
        for (std::uint64_t t = 0; t < shots; ++t) ++h.counts[i][draw_cell(cells, u.next())];
    }
    return h;
}

struct two_slit_event {
    std::uint64_t trial = 0;
    double x = 0.0;
    double theta = 0.0;  // erasure angle adapted to x
    twoslit::ww_outcome outcome = twoslit::ww_outcome::plus;
};

// Screen positions are drawn from the grid-discretized marginal density
// (proportional to twice the envelope; the erasure split never changes the
// marginal), then the which-way outcome is drawn in the basis adapted to
// the landing position.
inline std::vector<two_slit_event> sample_two_slit(const twoslit::two_slit_config& cfg,
                                                   std::uint64_t n, seed_t seed) {
    if (n < 1) throw std::invalid_argument("sample_two_slit: need at least one draw");
    if (cfg.grid.empty()) throw std::invalid_argument("sample_two_slit: config has no grid");

    std::vector<double> weight(cfg.grid.size());
    double total = 0.0;
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        weight[i] = 2.0 * twoslit::envelope(cfg, cfg.grid[i]);
        total += weight[i];
    }
    if (!(total > 0.0))
        throw std::invalid_argument("sample_two_slit: grid carries no probability mass");
    for (auto& w : weight) w /= total;

    uniform_stream u(seed);
    std::vector<two_slit_event> events;
    events.reserve(n);
    for (std::uint64_t t = 0; t < n; ++t) {
        // inverse CDF over grid bins; zero-weight bins are unreachable
        const double draw = u.next();
        double acc = 0.0;
        std::size_t bin = 0;
        for (std::size_t i = 0; i < weight.size(); ++i) {
            if (weight[i] <= 0.0) continue;
            acc += weight[i];
            bin = i;
            if (draw < acc) break;
        }
        const double x = cfg.grid[bin];
        const double theta = twoslit::theta_star(cfg, x);
        const twoslit::pattern_sample s = twoslit::pattern_at(cfg, theta, x);
        const double denom = s.p_plus + s.p_minus;
        std::array<double, 2> split{0.5, 0.5};
        if (denom > 0.0) split = {s.p_plus / denom, s.p_minus / denom};
        const std::size_t o = draw_cell(clipped_cells(split), u.next());
        events.push_back({t, x, theta, o == 0 ? twoslit::ww_outcome::plus
                                              : twoslit::ww_outcome::minus});
    }
    return events;
}

struct cell_stat {
    std::size_t cell = 0;
    double expected = 0.0;
    std::uint64_t count = 0;
    double freq = 0.0;
    double z = 0.0;
    bool violation = false;  // impossible cell observed, or certain cell missed
};

struct frequency_report {
    std::uint64_t n = 0;
    std::vector<cell_stat> cells;
    double max_abs_z = 0.0;
    bool any_violation = false;
};

// Per-cell z-scores of observed frequencies against an expected table.
// Exact-zero cells must have exactly zero counts.
inline frequency_report frequency_check(const std::vector<event_record>& events,
                                        const std::vector<double>& expected) {
    if (events.empty()) throw std::invalid_argument("frequency_check: no events");
    if (expected.empty()) throw std::invalid_argument("frequency_check: empty expected table");
    double sum = 0.0;
    for (double p : expected) {
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("frequency_check: expected probability out of range");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("frequency_check: expected table does not sum to 1");

    std::vector<std::uint64_t> counts(expected.size(), 0);
    for (const auto& e : events) {
        const std::size_t cell = static_cast<std::size_t>(e.det) * 2 + e.idler_outcome;
        if (cell >= expected.size())
            throw std::invalid_argument("frequency_check: event cell outside expected table");
        ++counts[cell];
    }

    frequency_report report;
    report.n = events.size();
    const auto n = static_cast<double>(events.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        cell_stat cs;
        cs.cell = i;
        cs.expected = expected[i];
        cs.count = counts[i];
        cs.freq = static_cast<double>(counts[i]) / n;
        const double denom = std::sqrt(expected[i] * (1.0 - expected[i]) / n);
        if (denom > 0.0) {
            cs.z = (cs.freq - expected[i]) / denom;
        } else {
            cs.z = 0.0;
            cs.violation = (expected[i] == 0.0 && counts[i] > 0) ||
                           (expected[i] == 1.0 && counts[i] < events.size());
        }
        report.max_abs_z = std::max(report.max_abs_z, std::abs(cs.z));
        report.any_violation = report.any_violation || cs.violation;
        report.cells.push_back(cs);
    }
    return report;
}

}  // namespace qeraser::mc
