// cli.hpp
// Command-line front end: parses subcommands, runs the scenario modules and
// emits CSV/JSON tables. Exit codes: 0 success, 2 usage error, 1 internal
// invariant violation or I/O failure.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "emit.hpp"
#include "montecarlo.hpp"
#include "version.hpp"

namespace qeraser::cli {

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct common_opts {
    double lambda = 1.0;
    std::uint64_t seed = 0;
    std::string format = "csv";
    std::string out;  // empty = stdout
};

namespace detail {

inline void add_common(CLI::App* sub, common_opts& c) {
    sub->add_option("--lambda", c.lambda, "wavelength, in the length unit of all positions")
        ->capture_default_str();
    sub->add_option("--seed", c.seed, "64-bit RNG seed")->capture_default_str();
    sub->add_option("--format", c.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--out", c.out, "output file (default: stdout)");
}

inline void require_finite(double v, const char* flag) {
    if (!std::isfinite(v)) throw usage_error(std::string(flag) + " must be finite");
}

inline void require_lambda(const common_opts& c) {
    require_finite(c.lambda, "--lambda");
    if (!(c.lambda > 0.0)) throw usage_error("--lambda must be positive");
}

inline void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.flush();
    if (!f) throw std::runtime_error("failed while writing output file: " + path);
}

inline void emit(const io::dataset& ds, const common_opts& c, const std::string& command,
                 const nlohmann::json& params) {
    const std::string text =
        (c.format == "json") ? io::to_json(ds, command, params, c.seed) : io::to_csv(ds);
    write_text(c.out, text);
}

inline basis_family family_from_name(const std::string& name) {
    if (name == "linear") return basis_family::linear_hv;
    if (name == "circular") return basis_family::circular_rl;
    if (name == "pq") return basis_family::polarization_pq;
    throw usage_error("unknown basis: " + name);
}

inline double parse_sigma(const std::string& text, double d, double dist, double lambda) {
    if (text == "auto") return twoslit::two_slit_config::auto_sigma(d, dist, lambda);
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size() || !std::isfinite(v) || !(v > 0.0))
            throw std::invalid_argument("bad sigma");
        return v;
    } catch (const std::exception&) {
        throw usage_error("--sigma must be a positive length or 'auto'");
    }
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
    CLI::App app{"exact simulator of delayed-choice quantum-eraser experiments", "qeraser"};
    app.set_version_flag("--version", artifact_version);
    app.require_subcommand(1);

    // mz-joint
    common_opts joint_c;
    double joint_x = 0.0, joint_theta = 0.0;
    std::string joint_basis;
    bool joint_adaptive = false;
    auto* joint = app.add_subcommand(
        "mz-joint", "joint detector/idler probability table at one mirror displacement");
    detail::add_common(joint, joint_c);
    joint->add_option("--x", joint_x, "mirror displacement")->required();
    auto* joint_basis_opt =
        joint->add_option("--basis", joint_basis, "idler basis: linear, circular or pq")
            ->check(CLI::IsMember({"linear", "circular", "pq"}));
    auto* joint_theta_opt =
        joint->add_option("--theta", joint_theta, "basis angle in radians (pq only)");
    joint->add_flag("--adaptive", joint_adaptive,
                    "measure the idler in the basis adapted to x (restores correlation)");

    // mz-scan
    common_opts scan_c;
    double scan_xmin = 0.0, scan_xmax = 0.0, scan_theta = 0.0;
    std::size_t scan_steps = 0;
    std::uint64_t scan_shots = 0;
    std::string scan_policy;
    bool scan_poisson = false;
    auto* scan = app.add_subcommand(
        "mz-scan", "sampled coincidence counts over a range of mirror displacements");
    detail::add_common(scan, scan_c);
    scan->add_option("--x-min", scan_xmin, "first displacement")->required();
    scan->add_option("--x-max", scan_xmax, "last displacement")->required();
    scan->add_option("--steps", scan_steps, "number of scan positions")->required();
    scan->add_option("--shots", scan_shots, "samples per position")->required();
    scan->add_option("--policy", scan_policy,
                     "idler basis policy: fixed-linear, fixed-circular, fixed-pq or adaptive")
        ->required()
        ->check(CLI::IsMember({"fixed-linear", "fixed-circular", "fixed-pq", "adaptive"}));
    auto* scan_theta_opt =
        scan->add_option("--theta", scan_theta, "basis angle in radians (fixed-pq only)");
    scan->add_flag("--poisson", scan_poisson, "draw the per-position shot count from Poisson");

    // mz-check
    common_opts check_c;
    auto* check = app.add_subcommand(
        "mz-check", "run the analytic invariant suite; nonzero exit on any violation");
    detail::add_common(check, check_c);

    // two-slit geometry shared by both two-slit commands
    struct twoslit_opts {
        common_opts c;
        double theta = 0.0;
        double d = 0.0, dist = 0.0;
        std::string sigma = "auto";
        double grid_min = 0.0, grid_max = 0.0;
        std::size_t grid_steps = 601;
        CLI::Option* grid_min_opt = nullptr;
        CLI::Option* grid_max_opt = nullptr;
    };
    const auto add_geometry = [](CLI::App* sub, twoslit_opts& o) {
        detail::add_common(sub, o.c);
        sub->add_option("--d", o.d, "slit separation")->required();
        sub->add_option("--D", o.dist, "slit-to-screen distance")->required();
        sub->add_option("--sigma", o.sigma,
                        "envelope width, a length or 'auto' (5 fringe periods)")
            ->capture_default_str();
        o.grid_min_opt =
            sub->add_option("--grid-min", o.grid_min, "first screen position (default: -3 sigma)");
        o.grid_max_opt =
            sub->add_option("--grid-max", o.grid_max, "last screen position (default: +3 sigma)");
        sub->add_option("--grid-steps", o.grid_steps, "number of screen positions")
            ->capture_default_str();
    };

    twoslit_opts pat_o;
    bool pat_normalize = false;
    auto* pat = app.add_subcommand("twoslit-pattern",
                                   "conditional screen patterns for a fixed erasure angle");
    add_geometry(pat, pat_o);
    pat->add_option("--theta", pat_o.theta, "erasure basis angle in radians")
        ->capture_default_str();
    pat->add_flag("--normalize", pat_normalize,
                  "scale so the two patterns sum to 1 over the grid");

    twoslit_opts samp_o;
    std::uint64_t samp_n = 0;
    auto* samp = app.add_subcommand(
        "twoslit-sample",
        "sample screen hits; each reports its adapted erasure angle and which-way outcome");
    add_geometry(samp, samp_o);
    samp->add_option("--n", samp_n, "number of events to draw")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help / --version
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const auto resolve_grid = [](twoslit_opts& o) {
        detail::require_lambda(o.c);
        detail::require_finite(o.d, "--d");
        detail::require_finite(o.dist, "--D");
        if (!(o.d > 0.0)) throw usage_error("--d must be positive");
        if (!(o.dist > 0.0)) throw usage_error("--D must be positive");
        const double sigma = detail::parse_sigma(o.sigma, o.d, o.dist, o.c.lambda);
        if (o.grid_min_opt->count() == 0) o.grid_min = -3.0 * sigma;
        if (o.grid_max_opt->count() == 0) o.grid_max = 3.0 * sigma;
        detail::require_finite(o.grid_min, "--grid-min");
        detail::require_finite(o.grid_max, "--grid-max");
        if (!(o.grid_min < o.grid_max)) throw usage_error("--grid-min must be below --grid-max");
        if (o.grid_steps < 2) throw usage_error("--grid-steps must be at least 2");
        return twoslit::two_slit_config(o.d, o.dist, o.c.lambda, sigma,
                                        twoslit::linspace(o.grid_min, o.grid_max, o.grid_steps));
    };

    try {
        if (joint->parsed()) {
            detail::require_lambda(joint_c);
            detail::require_finite(joint_x, "--x");
            detail::require_finite(joint_theta, "--theta");
            if (joint_adaptive && joint_basis_opt->count() > 0)
                throw usage_error("--adaptive excludes --basis");
            if (!joint_adaptive && joint_basis_opt->count() == 0)
                throw usage_error("one of --basis or --adaptive is required");
            if (joint_theta_opt->count() > 0 && (joint_adaptive || joint_basis != "pq"))
                throw usage_error("--theta applies only to --basis pq");

            const mz::mz_config cfg(joint_x, joint_c.lambda);
            const basis_pair basis =
                joint_adaptive
                    ? mz::adaptive_basis(cfg)
                    : basis_pair::make(detail::family_from_name(joint_basis), joint_theta);
            const mz::joint_table table = mz::correlation_table(cfg, basis);

            io::dataset ds;
            ds.columns = {"detector", "outcome", "probability"};
            for (mz::detector det : {mz::detector::d1, mz::detector::d2})
                for (std::size_t o = 0; o < 2; ++o)
                    ds.rows.push_back({std::string(mz::detector_name(det)),
                                       std::string(basis.label(o)), table.at(det, o)});
            nlohmann::json params;
            params["x"] = joint_x;
            params["lambda"] = joint_c.lambda;
            params["basis"] = std::string(family_name(basis.family));
            params["theta"] = basis.theta;
            params["adaptive"] = joint_adaptive;
            detail::emit(ds, joint_c, "mz-joint", params);
            return 0;
        }

        if (scan->parsed()) {
            detail::require_lambda(scan_c);
            detail::require_finite(scan_xmin, "--x-min");
            detail::require_finite(scan_xmax, "--x-max");
            detail::require_finite(scan_theta, "--theta");
            if (!(scan_xmin < scan_xmax)) throw usage_error("--x-min must be below --x-max");
            if (scan_steps < 2) throw usage_error("--steps must be at least 2");
            if (scan_shots < 1) throw usage_error("--shots must be at least 1");
            if (scan_theta_opt->count() > 0 && scan_policy != "fixed-pq")
                throw usage_error("--theta applies only to --policy fixed-pq");

            const mc::basis_policy policy =
                (scan_policy == "adaptive")
                    ? mc::basis_policy::adaptive()
                    : mc::basis_policy::fixed(detail::family_from_name(scan_policy.substr(6)),
                                              scan_theta);
            const mc::scan_spec spec(scan_xmin, scan_xmax, scan_steps, scan_shots, policy,
                                     scan_poisson);
            const mc::coincidence_histogram h =
                mc::scan(mz::mz_config(0.0, scan_c.lambda), spec, scan_c.seed);
            const basis_pair labels = basis_pair::make(h.family);

            io::dataset ds;
            ds.columns = {"x", "theta", "detector", "outcome", "count", "shots", "frequency"};
            for (std::size_t i = 0; i < h.x.size(); ++i) {
                for (mz::detector det : {mz::detector::d1, mz::detector::d2}) {
                    for (std::size_t o = 0; o < 2; ++o) {
                        const std::uint64_t count = h.counts[i][mz::joint_table::cell(det, o)];
                        const double freq =
                            h.shots[i]
                                ? static_cast<double>(count) / static_cast<double>(h.shots[i])
                                : 0.0;
                        ds.rows.push_back({h.x[i], h.theta[i],
                                           std::string(mz::detector_name(det)),
                                           std::string(labels.label(o)), count, h.shots[i],
                                           freq});
                    }
                }
            }
            nlohmann::json params;
            params["x_min"] = scan_xmin;
            params["x_max"] = scan_xmax;
            params["steps"] = scan_steps;
            params["shots"] = scan_shots;
            params["policy"] = scan_policy;
            params["theta"] = scan_theta;
            params["poisson"] = scan_poisson;
            params["lambda"] = scan_c.lambda;
            detail::emit(ds, scan_c, "mz-scan", params);
            return 0;
        }

        if (check->parsed()) {
            detail::require_lambda(check_c);
            const double tol = tolerance();
            const double two_pi = 2.0 * std::numbers::pi;
            mc::uniform_stream u(check_c.seed);
            io::dataset ds;
            ds.columns = {"check", "samples", "max_abs_deviation", "tolerance", "status"};
            bool all_pass = true;
            const auto add_row = [&](const char* name, std::int64_t samples, double dev) {
                const bool ok = dev <= tol;
                all_pass = all_pass && ok;
                ds.rows.push_back(
                    {std::string(name), samples, dev, tol, std::string(ok ? "pass" : "fail")});
            };
            const auto random_x = [&] { return u.next() * check_c.lambda; };

            {
                const mz::mz_config cfg(0.0, check_c.lambda);
                const auto t =
                    mz::correlation_table(cfg, basis_pair::make(basis_family::circular_rl));
                double dev = std::abs(t.at(mz::detector::d1, 0));
                dev = std::max(dev, std::abs(t.at(mz::detector::d2, 1)));
                dev = std::max(dev, std::abs(t.at(mz::detector::d1, 1) - 0.5));
                dev = std::max(dev, std::abs(t.at(mz::detector::d2, 0) - 0.5));
                add_row("circular_zeros_at_origin", 1, dev);
            }
            {
                double dev = 0.0;
                for (int i = 0; i < 200; ++i) {
                    const auto s = mz::evolve_final(mz::mz_config(random_x(), check_c.lambda));
                    for (mz::detector det : {mz::detector::d1, mz::detector::d2})
                        dev = std::max(
                            dev, std::abs(born_probability(
                                              s, {{signal_path, mz::detector_state(det)}}) -
                                          0.5));
                }
                add_row("detector_marginals", 200, dev);
            }
            {
                double dev = 0.0;
                const auto rl = basis_pair::make(basis_family::circular_rl);
                for (int i = 0; i < 200; ++i) {
                    const mz::mz_config cfg(random_x(), check_c.lambda);
                    const auto t = mz::correlation_table(cfg, rl);
                    for (mz::detector det : {mz::detector::d1, mz::detector::d2})
                        for (std::size_t o = 0; o < 2; ++o)
                            dev = std::max(dev, std::abs(t.at(det, o) -
                                                         mz::analytic_joint_circular(cfg, det, o)));
                }
                add_row("circular_closed_form", 200, dev);
            }
            {
                double dev = 0.0;
                const auto hv = basis_pair::make(basis_family::linear_hv);
                for (int i = 0; i < 200; ++i) {
                    const auto t =
                        mz::correlation_table(mz::mz_config(random_x(), check_c.lambda), hv);
                    for (double p : t.p) dev = std::max(dev, std::abs(p - 0.25));
                }
                add_row("hv_flatness", 200, dev);
            }
            {
                double dev = 0.0;
                for (int i = 0; i < 200; ++i) {
                    const mz::mz_config cfg(random_x(), check_c.lambda);
                    const auto t = mz::correlation_table(cfg, mz::adaptive_basis(cfg));
                    dev = std::max(dev, std::abs(t.at(mz::detector::d1, 0)));
                    dev = std::max(dev, std::abs(t.at(mz::detector::d2, 1)));
                    dev = std::max(dev, std::abs(t.at(mz::detector::d1, 1) - 0.5));
                    dev = std::max(dev, std::abs(t.at(mz::detector::d2, 0) - 0.5));
                }
                add_row("adaptive_erasure", 200, dev);
            }
            {
                double dev = 0.0;
                for (int i = 0; i < 50; ++i) {
                    const auto s = mz::evolve_pre_bs2(mz::mz_config(random_x(), check_c.lambda));
                    dev = std::max(dev, std::abs(reduced_purity(s, signal_pol) - 1.0));
                    dev = std::max(dev, std::abs(reduced_purity(s, idler_pol) - 0.5));
                }
                add_row("signal_idler_purity", 50, dev);
            }
            {
                double dev = 0.0;
                for (int i = 0; i < 100; ++i) {
                    const mz::mz_config cfg(random_x(), check_c.lambda);
                    const auto pick = static_cast<std::size_t>(u.next() * 3.0);
                    basis_pair b = basis_pair::make(basis_family::linear_hv);
                    if (pick == 1) b = basis_pair::make(basis_family::circular_rl);
                    if (pick >= 2)
                        b = basis_pair::make(basis_family::polarization_pq, u.next() * two_pi);
                    dev = std::max(dev, mz::mode_equivalence_check(cfg, b));
                }
                add_row("mode_order_equivalence", 100, dev);
            }

            nlohmann::json params;
            params["lambda"] = check_c.lambda;
            detail::emit(ds, check_c, "mz-check", params);
            return all_pass ? 0 : 1;
        }

        if (pat->parsed()) {
            const twoslit::two_slit_config cfg = resolve_grid(pat_o);
            detail::require_finite(pat_o.theta, "--theta");
            const auto samples = twoslit::pattern(cfg, pat_o.theta);
            double scale = 1.0;
            if (pat_normalize) {
                double total = 0.0;
                for (const auto& s : samples) total += s.p_plus + s.p_minus;
                if (!(total > 0.0)) throw usage_error("--normalize: grid carries no intensity");
                scale = 1.0 / total;
            }
            io::dataset ds;
            ds.columns = {"x", "p_plus", "p_minus"};
            for (const auto& s : samples)
                ds.rows.push_back({s.x, s.p_plus * scale, s.p_minus * scale});
            nlohmann::json params;
            params["theta"] = pat_o.theta;
            params["d"] = pat_o.d;
            params["D"] = pat_o.dist;
            params["lambda"] = pat_o.c.lambda;
            params["sigma"] = cfg.envelope_sigma;
            params["grid_min"] = pat_o.grid_min;
            params["grid_max"] = pat_o.grid_max;
            params["grid_steps"] = pat_o.grid_steps;
            params["normalize"] = pat_normalize;
            detail::emit(ds, pat_o.c, "twoslit-pattern", params);
            return 0;
        }

        if (samp->parsed()) {
            const twoslit::two_slit_config cfg = resolve_grid(samp_o);
            if (samp_n < 1) throw usage_error("--n must be at least 1");
            const auto events = mc::sample_two_slit(cfg, samp_n, samp_o.c.seed);
            io::dataset ds;
            ds.columns = {"trial", "x", "theta", "outcome"};
            for (const auto& e : events)
                ds.rows.push_back(
                    {e.trial, e.x, e.theta, std::string(twoslit::ww_outcome_name(e.outcome))});
            nlohmann::json params;
            params["n"] = samp_n;
            params["d"] = samp_o.d;
            params["D"] = samp_o.dist;
            params["lambda"] = samp_o.c.lambda;
            params["sigma"] = cfg.envelope_sigma;
            params["grid_min"] = samp_o.grid_min;
            params["grid_max"] = samp_o.grid_max;
            params["grid_steps"] = samp_o.grid_steps;
            detail::emit(ds, samp_o.c, "twoslit-sample", params);
            return 0;
        }
    } catch (const usage_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;  // unreachable: a subcommand is required
}

inline int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qeraser::cli
