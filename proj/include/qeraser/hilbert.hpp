// hilbert.hpp
// Exact finite-dimensional complex state algebra: composite systems of
// labeled qubit registers, local unitaries, Born probabilities,
// post-selection and reduced-state purity. Dense vectors only; every
// operation is a pure function returning a fresh value.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qeraser {

using complex_t = std::complex<double>;
using qubit_state = std::array<complex_t, 2>;

// Absolute tolerance used by all invariant checks. Configurable once at
// startup; not meant to be changed while states are in flight.
inline double& tolerance() {
    static double tol = 1e-12;
    return tol;
}

// Post-selection probabilities below this are treated as exactly zero.
inline constexpr double zero_probability_threshold = 1e-14;

enum class subsystem_id {
    signal_path,
    signal_pol,
    idler_pol,
    detector_register,
    ww_detector,
};

inline std::string_view subsystem_name(subsystem_id id) {
    switch (id) {
        case subsystem_id::signal_path: return "signal_path";
        case subsystem_id::signal_pol: return "signal_pol";
        case subsystem_id::idler_pol: return "idler_pol";
        case subsystem_id::detector_register: return "detector_register";
        case subsystem_id::ww_detector: return "ww_detector";
    }
    return "?";
}

struct subsystem {
    subsystem_id id;
    int dim = 2;

    bool operator==(const subsystem&) const = default;
};

inline constexpr subsystem signal_path{subsystem_id::signal_path, 2};
inline constexpr subsystem signal_pol{subsystem_id::signal_pol, 2};
inline constexpr subsystem idler_pol{subsystem_id::idler_pol, 2};
inline constexpr subsystem detector_register{subsystem_id::detector_register, 2};
inline constexpr subsystem ww_detector{subsystem_id::ww_detector, 2};

// The signal-path register keeps one set of amplitudes but its basis labels
// are reinterpreted as the photon moves through the interferometer:
// pre-PBS1 spatial mode at the source, {psi1, psi2} in the arms,
// {D1, D2} past the recombining beam splitter.
enum class path_stage { source, arms, detectors };

namespace detail {

inline bool finite(complex_t z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline double norm2(const std::vector<complex_t>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return s;
}

}  // namespace detail

class state_vector {
public:
    state_vector(std::vector<subsystem> layout, std::vector<complex_t> amps,
                 path_stage stage = path_stage::source)
        : layout_(std::move(layout)), amps_(std::move(amps)), stage_(stage) {
        if (layout_.empty()) throw std::invalid_argument("state_vector: empty layout");
        std::size_t d = 1;
        for (std::size_t i = 0; i < layout_.size(); ++i) {
            if (layout_[i].dim < 1) throw std::invalid_argument("state_vector: bad subsystem dim");
            for (std::size_t j = i + 1; j < layout_.size(); ++j)
                if (layout_[i].id == layout_[j].id)
                    throw std::invalid_argument("state_vector: duplicate subsystem label");
            d *= static_cast<std::size_t>(layout_[i].dim);
        }
        if (amps_.size() != d)
            throw std::invalid_argument("state_vector: amplitude count does not match layout");
        for (const auto& z : amps_)
            if (!detail::finite(z)) throw std::invalid_argument("state_vector: non-finite amplitude");
        if (std::abs(std::sqrt(detail::norm2(amps_)) - 1.0) > tolerance())
            throw std::invalid_argument("state_vector: not normalized");
    }

    static state_vector normalized(std::vector<subsystem> layout, std::vector<complex_t> amps,
                                   path_stage stage = path_stage::source) {
        const double n = std::sqrt(detail::norm2(amps));
        if (!(n > 0.0) || !std::isfinite(n))
            throw std::invalid_argument("state_vector: cannot normalize zero or non-finite vector");
        for (auto& z : amps) z /= n;
        return state_vector(std::move(layout), std::move(amps), stage);
    }

    static state_vector basis_state(std::vector<subsystem> layout, std::size_t index,
                                    path_stage stage = path_stage::source) {
        std::size_t d = 1;
        for (const auto& s : layout) d *= static_cast<std::size_t>(s.dim);
        if (index >= d) throw std::invalid_argument("state_vector: basis index out of range");
        std::vector<complex_t> amps(d, complex_t{0.0, 0.0});
        amps[index] = complex_t{1.0, 0.0};
        return state_vector(std::move(layout), std::move(amps), stage);
    }

    std::size_t dim() const { return amps_.size(); }
    const std::vector<subsystem>& layout() const { return layout_; }
    const std::vector<complex_t>& amps() const { return amps_; }
    complex_t amp(std::size_t i) const { return amps_.at(i); }
    path_stage stage() const { return stage_; }

    state_vector with_stage(path_stage s) const {
        state_vector copy = *this;
        copy.stage_ = s;
        return copy;
    }

    double norm() const { return std::sqrt(detail::norm2(amps_)); }

    std::optional<std::size_t> position_of(subsystem_id id) const {
        for (std::size_t i = 0; i < layout_.size(); ++i)
            if (layout_[i].id == id) return i;
        return std::nullopt;
    }

    // First subsystem in the layout varies slowest.
    std::size_t stride_of(std::size_t pos) const {
        std::size_t s = 1;
        for (std::size_t i = pos + 1; i < layout_.size(); ++i)
            s *= static_cast<std::size_t>(layout_[i].dim);
        return s;
    }

    std::size_t digit(std::size_t flat, std::size_t pos) const {
        return (flat / stride_of(pos)) % static_cast<std::size_t>(layout_[pos].dim);
    }

private:
    std::vector<subsystem> layout_;
    std::vector<complex_t> amps_;
    path_stage stage_;
};

class local_operator {
public:
    local_operator(std::vector<subsystem> targets, std::vector<complex_t> matrix)
        : targets_(std::move(targets)), matrix_(std::move(matrix)) {
        if (targets_.empty()) throw std::invalid_argument("local_operator: no targets");
        dim_ = 1;
        for (std::size_t i = 0; i < targets_.size(); ++i) {
            for (std::size_t j = i + 1; j < targets_.size(); ++j)
                if (targets_[i].id == targets_[j].id)
                    throw std::invalid_argument("local_operator: duplicate target");
            dim_ *= static_cast<std::size_t>(targets_[i].dim);
        }
        if (matrix_.size() != dim_ * dim_)
            throw std::invalid_argument("local_operator: matrix size does not match targets");
        for (const auto& z : matrix_)
            if (!detail::finite(z)) throw std::invalid_argument("local_operator: non-finite entry");
        if (!is_unitary()) throw std::invalid_argument("local_operator: matrix is not unitary");
    }

    std::size_t dim() const { return dim_; }
    const std::vector<subsystem>& targets() const { return targets_; }
    const std::vector<complex_t>& matrix() const { return matrix_; }
    complex_t at(std::size_t r, std::size_t c) const { return matrix_[r * dim_ + c]; }

private:
    bool is_unitary() const {
        // U^dagger U = I entrywise
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t j = 0; j < dim_; ++j) {
                complex_t s{0.0, 0.0};
                for (std::size_t k = 0; k < dim_; ++k)
                    s += std::conj(at(k, i)) * at(k, j);
                const complex_t expect = (i == j) ? complex_t{1.0, 0.0} : complex_t{0.0, 0.0};
                if (std::abs(s - expect) > tolerance()) return false;
            }
        }
        return true;
    }

    std::vector<subsystem> targets_;
    std::vector<complex_t> matrix_;
    std::size_t dim_ = 0;
};

struct density_matrix {
    std::size_t dim = 0;
    std::vector<complex_t> entries;  // row-major

    complex_t at(std::size_t r, std::size_t c) const { return entries[r * dim + c]; }

    double trace_real() const {
        double t = 0.0;
        for (std::size_t i = 0; i < dim; ++i) t += at(i, i).real();
        return t;
    }

    // Tr(rho^2) for Hermitian rho
    double purity() const {
        double p = 0.0;
        for (const auto& z : entries) p += std::norm(z);
        return p;
    }

    bool is_hermitian(double tol) const {
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c)
                if (std::abs(at(r, c) - std::conj(at(c, r))) > tol) return false;
        return true;
    }

    // Closed form for a single qubit; returned ascending.
    std::pair<double, double> qubit_eigenvalues() const {
        if (dim != 2) throw std::invalid_argument("qubit_eigenvalues: dim != 2");
        const double t = trace_real();
        const complex_t det = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
        const double disc = std::max(0.0, t * t - 4.0 * det.real());
        const double r = std::sqrt(disc);
        return {(t - r) / 2.0, (t + r) / 2.0};
    }
};

namespace detail {

// Contract one subsystem with conj(phi), yielding the unnormalized relative
// amplitudes over the remaining layout.
inline std::vector<complex_t> contract_qubit(const state_vector& s, std::size_t pos,
                                             const qubit_state& phi) {
    if (s.layout()[pos].dim != 2)
        throw std::invalid_argument("contract_qubit: subsystem is not a qubit");
    const std::size_t stride = s.stride_of(pos);
    const std::size_t dim = s.dim();
    std::vector<complex_t> out(dim / 2, complex_t{0.0, 0.0});
    std::size_t r = 0;
    for (std::size_t flat = 0; flat < dim; ++flat) {
        if (s.digit(flat, pos) != 0) continue;
        out[r] = std::conj(phi[0]) * s.amp(flat) + std::conj(phi[1]) * s.amp(flat + stride);
        ++r;
    }
    return out;
}

inline std::vector<subsystem> layout_without(const std::vector<subsystem>& layout, std::size_t pos) {
    std::vector<subsystem> rest;
    rest.reserve(layout.size() - 1);
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (i != pos) rest.push_back(layout[i]);
    return rest;
}

inline void require_normalized(const qubit_state& phi, const char* what) {
    const double n = std::sqrt(std::norm(phi[0]) + std::norm(phi[1]));
    if (std::abs(n - 1.0) > tolerance())
        throw std::invalid_argument(std::string(what) + ": outcome state not normalized");
}

}  // namespace detail

// --- operations ---

inline state_vector tensor(const state_vector& a, const state_vector& b) {
    for (const auto& sa : a.layout())
        for (const auto& sb : b.layout())
            if (sa.id == sb.id)
                throw std::invalid_argument("tensor: overlapping subsystem labels");
    std::vector<subsystem> layout = a.layout();
    layout.insert(layout.end(), b.layout().begin(), b.layout().end());
    std::vector<complex_t> amps(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j)
            amps[i * b.dim() + j] = a.amp(i) * b.amp(j);
    // the stage tag follows the factor that carries the path register
    path_stage stage = path_stage::source;
    if (a.position_of(subsystem_id::signal_path)) stage = a.stage();
    else if (b.position_of(subsystem_id::signal_path)) stage = b.stage();
    return state_vector(std::move(layout), std::move(amps), stage);
}

inline state_vector apply_local(const local_operator& op, const state_vector& s) {
    std::vector<std::size_t> tpos;
    tpos.reserve(op.targets().size());
    for (const auto& t : op.targets()) {
        auto p = s.position_of(t.id);
        if (!p) throw std::invalid_argument("apply_local: unknown target label");
        if (s.layout()[*p].dim != t.dim)
            throw std::invalid_argument("apply_local: target dimension mismatch");
        tpos.push_back(*p);
    }

    const std::size_t m = op.dim();
    std::vector<std::size_t> tstride(tpos.size());
    for (std::size_t k = 0; k < tpos.size(); ++k) tstride[k] = s.stride_of(tpos[k]);

    // offset of op basis index j within the full space (first target varies slowest)
    std::vector<std::size_t> offset(m, 0);
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t rem = j;
        for (std::size_t k = tpos.size(); k-- > 0;) {
            const auto d = static_cast<std::size_t>(op.targets()[k].dim);
            offset[j] += (rem % d) * tstride[k];
            rem /= d;
        }
    }

    std::vector<complex_t> out(s.dim(), complex_t{0.0, 0.0});
    std::vector<complex_t> in(m);
    for (std::size_t base = 0; base < s.dim(); ++base) {
        bool is_base = true;
        for (std::size_t k = 0; k < tpos.size() && is_base; ++k)
            if (s.digit(base, tpos[k]) != 0) is_base = false;
        if (!is_base) continue;
        for (std::size_t j = 0; j < m; ++j) in[j] = s.amp(base + offset[j]);
        for (std::size_t r = 0; r < m; ++r) {
            complex_t acc{0.0, 0.0};
            for (std::size_t c = 0; c < m; ++c) acc += op.at(r, c) * in[c];
            out[base + offset[r]] = acc;
        }
    }
    return state_vector(s.layout(), std::move(out), s.stage());
}

inline double born_probability(const state_vector& s,
                               const std::vector<std::pair<subsystem, qubit_state>>& outcome) {
    if (outcome.empty()) throw std::invalid_argument("born_probability: empty outcome list");
    for (std::size_t i = 0; i < outcome.size(); ++i) {
        detail::require_normalized(outcome[i].second, "born_probability");
        for (std::size_t j = i + 1; j < outcome.size(); ++j)
            if (outcome[i].first.id == outcome[j].first.id)
                throw std::invalid_argument("born_probability: repeated subsystem in outcome");
    }
    std::vector<subsystem> layout = s.layout();
    std::vector<complex_t> amps = s.amps();
    for (const auto& [sub, phi] : outcome) {
        std::size_t pos = layout.size();
        for (std::size_t i = 0; i < layout.size(); ++i)
            if (layout[i].id == sub.id) pos = i;
        if (pos == layout.size())
            throw std::invalid_argument("born_probability: unknown subsystem label");
        // same contraction as detail::contract_qubit, over a bare vector
        const std::size_t d = amps.size();
        std::size_t stride = 1;
        for (std::size_t i = pos + 1; i < layout.size(); ++i)
            stride *= static_cast<std::size_t>(layout[i].dim);
        std::vector<complex_t> next(d / 2);
        std::size_t r = 0;
        for (std::size_t flat = 0; flat < d; ++flat) {
            if ((flat / stride) % 2 != 0) continue;
            next[r++] = std::conj(phi[0]) * amps[flat] + std::conj(phi[1]) * amps[flat + stride];
        }
        amps = std::move(next);
        layout.erase(layout.begin() + static_cast<std::ptrdiff_t>(pos));
    }
    return detail::norm2(amps);
}

struct post_select_result {
    double probability = 0.0;
    // empty when the projection probability is below zero_probability_threshold
    std::optional<state_vector> state;
};

inline post_select_result post_select(const state_vector& s, const subsystem& sub,
                                      const qubit_state& onto) {
    detail::require_normalized(onto, "post_select");
    auto pos = s.position_of(sub.id);
    if (!pos) throw std::invalid_argument("post_select: unknown subsystem label");
    std::vector<complex_t> c = detail::contract_qubit(s, *pos, onto);
    const double prob = detail::norm2(c);
    if (prob < zero_probability_threshold) return {0.0, std::nullopt};
    const double scale = 1.0 / std::sqrt(prob);
    for (auto& z : c) z *= scale;
    return {prob, state_vector(detail::layout_without(s.layout(), *pos), std::move(c), s.stage())};
}

inline density_matrix partial_trace(const state_vector& s, const subsystem& keep) {
    auto pos = s.position_of(keep.id);
    if (!pos) throw std::invalid_argument("partial_trace: unknown subsystem label");
    const auto d = static_cast<std::size_t>(s.layout()[*pos].dim);
    const std::size_t stride = s.stride_of(*pos);
    density_matrix rho;
    rho.dim = d;
    rho.entries.assign(d * d, complex_t{0.0, 0.0});
    for (std::size_t flat = 0; flat < s.dim(); ++flat) {
        const std::size_t a = s.digit(flat, *pos);
        const std::size_t rest = flat - a * stride;
        for (std::size_t b = 0; b < d; ++b)
            rho.entries[a * d + b] += s.amp(flat) * std::conj(s.amp(rest + b * stride));
    }
    if (!rho.is_hermitian(tolerance()))
        throw std::logic_error("partial_trace: result not Hermitian");
    if (std::abs(rho.trace_real() - 1.0) > tolerance())
        throw std::logic_error("partial_trace: trace != 1");
    if (d == 2 && rho.qubit_eigenvalues().first < -tolerance())
        throw std::logic_error("partial_trace: negative eigenvalue");
    return rho;
}

inline double reduced_purity(const state_vector& s, const subsystem& keep) {
    return partial_trace(s, keep).purity();
}

struct basis_expansion {
    std::vector<subsystem> remaining;
    // unnormalized partner amplitudes for each of the two basis outcomes
    std::array<std::vector<complex_t>, 2> partners;
    path_stage stage = path_stage::source;

    double weight(std::size_t i) const { return detail::norm2(partners.at(i)); }
};

inline basis_expansion expand_in_basis(const state_vector& s, const subsystem& sub,
                                       const qubit_state& b0, const qubit_state& b1) {
    detail::require_normalized(b0, "expand_in_basis");
    detail::require_normalized(b1, "expand_in_basis");
    const complex_t ov = std::conj(b0[0]) * b1[0] + std::conj(b0[1]) * b1[1];
    if (std::abs(ov) > tolerance())
        throw std::invalid_argument("expand_in_basis: non-orthonormal basis");
    auto pos = s.position_of(sub.id);
    if (!pos) throw std::invalid_argument("expand_in_basis: unknown subsystem label");
    basis_expansion ex;
    ex.remaining = detail::layout_without(s.layout(), *pos);
    ex.partners[0] = detail::contract_qubit(s, *pos, b0);
    ex.partners[1] = detail::contract_qubit(s, *pos, b1);
    ex.stage = s.stage();
    return ex;
}

}  // namespace qeraser
