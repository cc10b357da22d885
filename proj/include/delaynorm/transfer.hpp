#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "delaynorm/model.hpp"

namespace delaynorm {

using Complex = std::complex<double>;

/// Value and s-derivative of the delay matrix sum A0 + sum_i Ai exp(-s tau_i).
struct PencilValue {
    Eigen::MatrixXcd value;
    Eigen::MatrixXcd derivative;  // -sum_i tau_i Ai exp(-s tau_i)
};

PencilValue eval_delay_pencil(const DdaeSystem& sys, Complex s);

/// Transfer function G(s) = C (sE - A0 - sum Ai e^{-s tau_i})^{-1} B.
/// Throws PoleProximityError when the solve is numerically singular
/// (reciprocal condition estimate below 1e-14).
Complex eval_transfer(const DdaeSystem& sys, Complex s);

/// dG/ds via the factored product form: two solves with one factorization.
Complex eval_transfer_derivative(const DdaeSystem& sys, Complex s);

/// Odd transcendental function G'(s)G(-s) - G'(-s)G(s) whose imaginary axis
/// zeros are the stationary points of the magnitude response.
Complex eval_extremum_function(const DdaeSystem& sys, Complex s);

/// Descriptor-style realization of the extremum function: a 6n x 6n pencil
/// with constant E_z = blkdiag(-E, E, E, -E, E, E) and an s-dependent block
/// diagonal built from the delay pencil and its derivative.
class ExtremumFunctionRealization {
   public:
    explicit ExtremumFunctionRealization(const DdaeSystem& sys);

    const Eigen::MatrixXd& Ez() const { return Ez_; }
    const Eigen::VectorXd& Bz() const { return Bz_; }
    const Eigen::RowVectorXd& Cz() const { return Cz_; }

    /// The s-dependent 6n x 6n block diagonal of the pencil.
    Eigen::MatrixXcd Az(Complex s) const;

    /// Cz (s Ez - Az(s))^{-1} Bz; must agree with eval_extremum_function.
    Complex eval(Complex s) const;

   private:
    DdaeSystem sys_;
    Eigen::MatrixXd Ez_;
    Eigen::VectorXd Bz_;
    Eigen::RowVectorXd Cz_;
};

ExtremumFunctionRealization build_extremum_realization(const DdaeSystem& sys);

/// Reduced matrices of the asymptotic (high-frequency) transfer function
/// living on the nullspaces of E.
struct AsymptoticSystem {
    Eigen::MatrixXd M0;                                 // U^T A0 V
    std::vector<std::pair<double, Eigen::MatrixXd>> M;  // (tau_i, U^T Ai V), i >= 1
    Eigen::VectorXd b;                                  // U^T B
    Eigen::RowVectorXd c;                               // C V
    bool empty() const { return M0.rows() == 0; }
};

AsymptoticSystem build_asymptotic_system(const DdaeSystem& sys, const NullspaceBases& bases);

/// Asymptotic transfer function -CV (U^T A0 V + sum U^T Ai V e^{-s tau_i})^{-1} U^T B.
/// Returns exactly 0 when E is nonsingular. Throws StabilityError when the
/// inner matrix is singular at the given argument.
Complex eval_asymptotic_transfer(const DdaeSystem& sys, const NullspaceBases& bases, Complex s);

/// Angle form: substitutes e^{j theta_i} for e^{-s tau_i} term by term.
/// theta must hold one angle per delay term (i >= 1).
Complex eval_asymptotic_transfer(const DdaeSystem& sys, const NullspaceBases& bases,
                                 const std::vector<double>& theta);

/// Angle form on a prebuilt reduced system.
Complex eval_asymptotic_transfer(const AsymptoticSystem& asys, const std::vector<double>& theta);

}  // namespace delaynorm
