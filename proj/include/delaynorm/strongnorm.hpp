#pragma once

#include <optional>
#include <string>
#include <vector>

#include "delaynorm/extrema.hpp"
#include "delaynorm/model.hpp"

namespace delaynorm {

struct GridOptions {
    int density_override = 0;      // 0 selects the per-dimension default
    double refine_tol = 1e-8;      // stop refinement when angles move less than this
    double active_tol = 1e-12;     // threshold for U^T Ai V to count as active
    bool allow_high_dimension = false;  // required beyond 4 active delays
};

/// Indices (into the delay terms, 1-based over i >= 1) whose reduced matrix
/// U^T Ai V survives the activity threshold. Only these affect the
/// asymptotic transfer function and need gridding.
std::vector<int> active_delay_indices(const DdaeSystem& sys, const NullspaceBases& bases,
                                      double tol = 1e-12);

struct AsymptoticNormResult {
    double value = 0.0;
    std::vector<double> theta;  // attaining angles, one per active delay
    std::vector<int> active;    // active delay indices
};

/// Maximum of the asymptotic transfer function magnitude over the delay
/// angle torus: uniform grid plus coordinate-wise golden-section ascent.
/// Returns 0 for nonsingular E and the constant's modulus when no delay is
/// active. Throws StabilityError when the asymptotic pencil is singular.
AsymptoticNormResult asymptotic_norm(const DdaeSystem& sys, const NullspaceBases& bases,
                                     const GridOptions& opts = {});

struct StrongNormOptions {
    ExtremaOptions extrema;
    GridOptions grid;
    /// Replaces the computed asymptotic norm in the final max composition.
    std::optional<double> asymptotic_norm_override;
};

struct StrongNormResult {
    double standard_peak = 0.0;            // max |G(j omega)| over computed extrema
    double standard_peak_frequency = 0.0;
    double asymptotic_norm = 0.0;
    std::vector<double> theta_star;
    std::vector<int> active_delays;
    double strong_norm = 0.0;
    bool frequency_infinite = false;
    double frequency = 0.0;                // valid when not infinite
    std::vector<ExtremumPoint> extrema;
    ExtremaDiagnostics diagnostics;
    std::vector<std::string> warnings;
};

/// Strong H-infinity norm: the max of the finite-frequency peak and the
/// asymptotic norm; the attained frequency is infinite when the asymptotic
/// part dominates. The caller asserts strong exponential stability; a
/// heuristic warning is issued when an approximant pole sits near or right
/// of the imaginary axis.
StrongNormResult strong_hinf_norm(const DdaeSystem& sys, const StrongNormOptions& opts = {});

}  // namespace delaynorm
