#pragma once

// Independent reference computations for the test suites. Everything here
// evaluates closed-form expressions or brute-force searches and never calls
// into the code paths it is used to check.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "delaynorm/model.hpp"

namespace oracles {

using Complex = std::complex<double>;

/// Closes the delay loop of an interconnection form directly:
/// H11 + H12 L (I - H22 L)^{-1} H21 with L = diag(e^{-s tau_i}), times the
/// external input/output delay factors.
Complex lft_loop_closure(const delaynorm::LftDelaySystem& sys, Complex s);

/// (s + 2.1) / ((s + 0.1)(1 - 0.25 e^{-s} + 0.5 e^{-2s}) + 1).
Complex tsh_closed_form(Complex s);

/// Symbolic derivative of the closed form above.
Complex tsh_closed_form_derivative(Complex s);

/// Shipped 2-state realization of the closed form.
delaynorm::DdaeSystem tsh_system();

/// Scalar x' = -x - 0.5 x(t-1) + u, y = x.
delaynorm::DdaeSystem one_delay_system();

/// 1/(s+1) as a one-state system.
delaynorm::DdaeSystem first_order_system();

/// Closed-loop transfer of the Smith predictor configuration evaluated from
/// scalar subsystem formulas: P / (1/C + Gp + F (P - Gp Dp)).
Complex smith_scalar_oracle(Complex s);

/// Dense sweep of f over [lo, hi] followed by golden-section refinement of
/// the best bracket. Returns the maximum value; argmax optionally reported.
double sweep_maximum(const std::function<double(double)>& f, double lo, double hi, int points,
                     double* argmax = nullptr);

/// All interior local maxima/minima locations of f found by a dense sweep.
std::vector<double> sweep_stationary_points(const std::function<double(double)>& f, double lo,
                                            double hi, int points);

/// Newton iteration on an analytic scalar function; returns the refined root.
Complex newton_refine(const std::function<Complex(Complex)>& f,
                      const std::function<Complex(Complex)>& fprime, Complex start,
                      int max_iter = 50);

/// Seeded random stable retarded system: E = I, n <= 4, m <= 2, delays in
/// [0.1, 2]; the log-norm of A0 dominates the delayed terms so every delay
/// configuration is exponentially stable.
delaynorm::DdaeSystem random_stable_retarded(std::mt19937& rng);

/// Random well-posed interconnection form with internal, input and output
/// delays for loop-closure comparisons.
delaynorm::LftDelaySystem random_lft(std::mt19937& rng);

}  // namespace oracles
