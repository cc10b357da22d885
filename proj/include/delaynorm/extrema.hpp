#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "delaynorm/discretize.hpp"
#include "delaynorm/model.hpp"

namespace delaynorm {

/// One corrected stationary point of the magnitude response.
struct ExtremumPoint {
    enum class Kind { maximum, minimum, undetermined };

    double omega = 0.0;            // corrected frequency, rad/s, >= 0
    double xi = 0.0;               // |G(j omega)| at the corrected point
    Kind kind = Kind::undetermined;
    double predictor_omega = 0.0;  // frequency the correction started from
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

std::string to_string(ExtremumPoint::Kind kind);

/// Unknowns of the correction equations: frequency, candidate singular value
/// and the singular vector pair, plus the frozen normalization vector.
struct CorrectorState {
    double omega = 0.0;
    double xi = 0.0;
    Eigen::VectorXcd u, v;  // length n each
    Eigen::VectorXcd q;     // length 2n, frozen at the starting vector
};

/// Diagonal realization of the rational function sharing the imaginary axis
/// zeros of the approximant's extremum function: one first-order term per
/// reflected zero/pole of the zero-pole-gain form. Zeros found on the axis
/// are excluded and reported as direct minimum candidates.
struct StationaritySystem {
    Eigen::VectorXcd A_diag;  // diag(-conj(z_i), z_i, -conj(p_k), p_k)
    Eigen::VectorXcd B;       // all ones
    Eigen::RowVectorXcd C;    // +1 for zero terms, -1 for pole terms
    std::vector<double> axis_zero_frequencies;

    int size() const { return static_cast<int>(A_diag.size()); }
    Complex eval(Complex s) const;
};

/// Throws StabilityError when a pole sits on the imaginary axis.
StationaritySystem build_stationarity_system(const ZpkForm& zpk);

/// Imaginary-axis eigenvalues of the bordered pencil, collapsed to
/// nonnegative frequencies, deduplicated, with 0 always included.
std::vector<double> predict_frequencies(const StationaritySystem& delta, double axis_tol = 1e-6);

/// The 2n x 2n matrix that is singular exactly when xi is a singular value
/// of the transfer function at frequency omega.
Eigen::MatrixXcd build_singular_value_matrix(const DdaeSystem& sys, double omega, double xi);

/// Stacked real residual of the correction equations, length 4n + 3.
Eigen::VectorXd corrector_residual(const DdaeSystem& sys, const CorrectorState& st);

/// Analytic Jacobian of corrector_residual with respect to
/// (omega, xi, Re u, Im u, Re v, Im v); size (4n+3) x (4n+2).
Eigen::MatrixXd corrector_jacobian(const DdaeSystem& sys, const CorrectorState& st);

struct CorrectorOptions {
    double tol = 1e-10;   // residual tolerance scale; accepted at tol * (1 + xi)
    int max_iterations = 50;
    int max_halvings = 20;
};

/// Damped Gauss-Newton refinement started from the smallest singular vector
/// of the singular-value matrix at the predicted point. A predicted value of
/// |G| below 1e-12 short-circuits to a converged minimum.
ExtremumPoint gauss_newton_correct(const DdaeSystem& sys, double omega0, double xi0,
                                   const CorrectorOptions& opts = {});

/// Diagnostic fallback: scalar Newton iteration on the imaginary part of the
/// extremum function, equivalent at the root for SISO systems.
ExtremumPoint newton_correct_scalar(const DdaeSystem& sys, double omega0,
                                    const CorrectorOptions& opts = {});

struct ExtremaOptions {
    int N = 20;
    double axis_tol = 1e-6;
    double rank_tol = 1e-10;
    CorrectorOptions corrector;
};

/// Optional run details for reporting and structural checks.
struct ExtremaDiagnostics {
    int discretization_order = 0;
    int pole_count = 0;
    int zero_count = 0;
    int pencil_size = 0;
    std::vector<double> predicted;
    std::vector<std::string> warnings;
};

/// Full pipeline: discretize, extract zeros/poles, predict candidate
/// frequencies, evaluate |G| and run the correction per candidate. Output is
/// deduplicated on the corrected frequency and sorted.
std::vector<ExtremumPoint> compute_extrema(const DdaeSystem& sys, const ExtremaOptions& opts = {},
                                           ExtremaDiagnostics* diag = nullptr);

}  // namespace delaynorm
