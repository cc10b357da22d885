#include "delaynorm/cli.hpp"

#include <cmath>
#include <ostream>

#include "delaynorm/transfer.hpp"

namespace delaynorm {

namespace {

StrongNormOptions to_options(const RunConfig& config) {
    StrongNormOptions opts;
    opts.extrema.N = config.N;
    opts.extrema.axis_tol = config.axis_tol;
    opts.extrema.rank_tol = config.rank_tol;
    opts.extrema.corrector.tol = config.corrector_tol;
    opts.extrema.corrector.max_iterations = config.max_iter;
    opts.grid.density_override = config.grid_density;
    opts.grid.allow_high_dimension = config.grid_density > 0;
    return opts;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_parse;
    } catch (const CausalityError& e) {
        err << "error: " << e.what() << "\n";
        return exit_causality;
    } catch (const StabilityError& e) {
        err << "error: " << e.what() << "\n";
        return exit_stability;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
}

}  // namespace

int cmd_norm(const std::string& path, const RunConfig& config, std::ostream& out,
             std::ostream& err) {
    return guarded(err, [&]() {
        const DdaeSystem sys = load_system(path);
        const StrongNormResult result = strong_hinf_norm(sys, to_options(config));
        for (const auto& w : result.warnings) err << "warning: " << w << "\n";
        write_norm_result(result, config, out);
        return exit_ok;
    });
}

int cmd_extrema(const std::string& path, const RunConfig& config, bool include_unconverged,
                std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        const DdaeSystem sys = load_system(path);
        const StrongNormOptions opts = to_options(config);
        ExtremaDiagnostics diag;
        std::vector<ExtremumPoint> points = compute_extrema(sys, opts.extrema, &diag);
        for (const auto& w : diag.warnings) err << "warning: " << w << "\n";
        if (!include_unconverged) {
            std::erase_if(points, [](const ExtremumPoint& p) { return !p.converged; });
        }
        write_extrema_result(points, config, out);
        return exit_ok;
    });
}

int cmd_bode(const std::string& path, const BodeOptions& options, std::ostream& out,
             std::ostream& err) {
    return guarded(err, [&]() {
        if (!(options.wmin >= 0.0) || !(options.wmin < options.wmax) || options.points < 2) {
            throw ParseError("bode requires 0 <= wmin < wmax and points >= 2");
        }
        if (options.log_spacing && options.wmin <= 0.0) {
            throw ParseError("bode with logarithmic spacing requires wmin > 0");
        }
        const DdaeSystem sys = load_system(path);

        out << "omega,magnitude\n";
        for (int i = 0; i < options.points; ++i) {
            const double t = static_cast<double>(i) / (options.points - 1);
            const double w = options.log_spacing
                                 ? options.wmin * std::pow(options.wmax / options.wmin, t)
                                 : options.wmin + t * (options.wmax - options.wmin);
            out << format_double(w) << ",";
            try {
                out << format_double(std::abs(eval_transfer(sys, Complex{0.0, w})));
            } catch (const PoleProximityError&) {
                out << "nan";
            }
            out << "\n";
        }
        return exit_ok;
    });
}

int cmd_convert(const std::string& path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        const DdaeSystem sys = load_system(path);
        emit_ddae_json(sys, out);
        return exit_ok;
    });
}

}  // namespace delaynorm
