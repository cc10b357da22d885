#include "delaynorm/strongnorm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "delaynorm/transfer.hpp"

namespace delaynorm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int default_density(int dimension) {
    if (dimension <= 2) return 128;
    return 32;
}

// Golden-section maximization of f on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

std::vector<int> active_delay_indices(const DdaeSystem& sys, const NullspaceBases& bases,
                                      double tol) {
    std::vector<int> active;
    if (bases.nu == 0) return active;
    for (size_t i = 1; i < sys.terms.size(); ++i) {
        const Eigen::MatrixXd reduced = bases.U.transpose() * sys.terms[i].coeff * bases.V;
        if (reduced.norm() > tol * std::max(1.0, sys.terms[i].coeff.norm())) {
            active.push_back(static_cast<int>(i));
        }
    }
    return active;
}

AsymptoticNormResult asymptotic_norm(const DdaeSystem& sys, const NullspaceBases& bases,
                                     const GridOptions& opts) {
    AsymptoticNormResult out;
    if (bases.nu == 0) return out;

    out.active = active_delay_indices(sys, bases, opts.active_tol);
    const int d = static_cast<int>(out.active.size());
    const AsymptoticSystem asys = build_asymptotic_system(sys, bases);
    const int m = sys.delay_count();

    auto magnitude = [&](const std::vector<double>& theta_active) {
        std::vector<double> theta(static_cast<size_t>(m), 0.0);
        for (int i = 0; i < d; ++i) {
            theta[static_cast<size_t>(out.active[static_cast<size_t>(i)]) - 1] =
                theta_active[static_cast<size_t>(i)];
        }
        return std::abs(eval_asymptotic_transfer(asys, theta));
    };

    if (d == 0) {
        out.value = magnitude({});
        return out;
    }
    if (d > 4 && !opts.allow_high_dimension) {
        std::ostringstream msg;
        msg << "asymptotic norm gridding over " << d
            << " active delays refused; set an explicit grid density to override";
        throw Error(msg.str());
    }

    const int density = opts.density_override > 0 ? opts.density_override : default_density(d);

    // Exhaustive grid scan; ties resolved toward the lexicographically
    // smallest angle vector by strict improvement in scan order.
    std::vector<double> theta(static_cast<size_t>(d), 0.0);
    std::vector<double> best = theta;
    double best_val = -1.0;
    std::vector<int> idx(static_cast<size_t>(d), 0);
    while (true) {
        for (int i = 0; i < d; ++i) {
            theta[static_cast<size_t>(i)] = kTwoPi * idx[static_cast<size_t>(i)] / density;
        }
        const double val = magnitude(theta);
        if (val > best_val) {
            best_val = val;
            best = theta;
        }
        int pos = d - 1;
        while (pos >= 0 && ++idx[static_cast<size_t>(pos)] == density) {
            idx[static_cast<size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }

    // Coordinate-wise golden-section ascent from the best grid point.
    const double cell = kTwoPi / density;
    for (int pass = 0; pass < 200; ++pass) {
        double moved = 0.0;
        for (int i = 0; i < d; ++i) {
            auto slice = [&](double angle) {
                std::vector<double> probe = best;
                probe[static_cast<size_t>(i)] = angle;
                return magnitude(probe);
            };
            const double center = best[static_cast<size_t>(i)];
            const double refined =
                golden_max(slice, center - cell, center + cell, opts.refine_tol * 0.1);
            if (slice(refined) > best_val) {
                moved = std::max(moved, std::abs(refined - center));
                best[static_cast<size_t>(i)] = refined;
                best_val = slice(refined);
            }
        }
        if (moved < opts.refine_tol) break;
    }

    for (double& angle : best) {
        angle = std::fmod(angle, kTwoPi);
        if (angle < 0.0) angle += kTwoPi;
    }
    out.value = best_val;
    out.theta = best;
    return out;
}

StrongNormResult strong_hinf_norm(const DdaeSystem& sys, const StrongNormOptions& opts) {
    const NullspaceBases bases = nullspace_bases(sys, opts.extrema.rank_tol);
    const CausalityCheck cc = check_causality(sys, bases);
    if (!cc.causal) {
        std::ostringstream msg;
        msg << "causality check failed: U^T A0 V is singular (rcond = " << cc.rcond << ")";
        throw CausalityError(msg.str());
    }

    StrongNormResult out;
    const AsymptoticNormResult asym = asymptotic_norm(sys, bases, opts.grid);
    out.asymptotic_norm = asym.value;
    out.theta_star = asym.theta;
    out.active_delays = asym.active;

    out.extrema = compute_extrema(sys, opts.extrema, &out.diagnostics);
    out.warnings = out.diagnostics.warnings;

    bool have_peak = false;
    for (const auto& p : out.extrema) {
        if (!p.converged) continue;
        if (!have_peak || p.xi > out.standard_peak) {
            out.standard_peak = p.xi;
            out.standard_peak_frequency = p.omega;
            have_peak = true;
        }
    }
    if (!have_peak) {
        out.warnings.push_back(
            "no converged extremum point; the standard peak falls back to the best "
            "predicted value");
        for (const auto& p : out.extrema) {
            if (p.xi > out.standard_peak) {
                out.standard_peak = p.xi;
                out.standard_peak_frequency = p.omega;
            }
        }
    }

    const double asymptotic =
        opts.asymptotic_norm_override ? *opts.asymptotic_norm_override : out.asymptotic_norm;
    out.strong_norm = std::max(out.standard_peak, asymptotic);
    if (out.standard_peak > asymptotic) {
        out.frequency_infinite = false;
        out.frequency = out.standard_peak_frequency;
    } else {
        out.frequency_infinite = true;
        out.frequency = 0.0;
    }
    return out;
}

}  // namespace delaynorm
