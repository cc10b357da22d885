#pragma once

#include <Eigen/Dense>
#include <vector>

#include "delaynorm/errors.hpp"

namespace delaynorm {

/// One delay term tau -> A of the right-hand side sum.
struct DelayTerm {
    double delay = 0.0;
    Eigen::MatrixXd coeff;
};

/// SISO time-delay system in delay differential algebraic form
///
///   E x'(t) = A0 x(t) + sum_i Ai x(t - tau_i) + B u(t),   y(t) = C x(t),
///
/// with a possibly singular descriptor matrix E. The constructor normalizes
/// the term list: the tau = 0 entry always exists (possibly zero), delays are
/// strictly positive for i >= 1, sorted ascending, and terms whose delays
/// agree to relative tolerance 1e-12 are merged by matrix addition.
/// Instances are treated as immutable after construction; all operations on
/// them are pure functions and safe to call concurrently.
struct DdaeSystem {
    Eigen::MatrixXd E;
    std::vector<DelayTerm> terms;  // terms[0].delay == 0 always
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;

    DdaeSystem(Eigen::MatrixXd E_, std::vector<DelayTerm> terms_, Eigen::VectorXd B_,
               Eigen::RowVectorXd C_);

    int dim() const { return static_cast<int>(E.rows()); }
    int delay_count() const { return static_cast<int>(terms.size()) - 1; }

    /// Largest delay, 0 if the system is delay free.
    double max_delay() const { return terms.back().delay; }
};

/// Orthonormal bases of the left and right nullspaces of E.
struct NullspaceBases {
    int nu = 0;         // dimension of the nullspace of E
    Eigen::MatrixXd U;  // n x nu, U^T E = 0
    Eigen::MatrixXd V;  // n x nu, E V = 0
};

struct CausalityCheck {
    bool causal = false;
    double rcond = 0.0;  // reciprocal condition number of U^T A0 V (1 when nu = 0)
};

/// Delay system as a linear fractional interconnection of a delay-free
/// descriptor block with pure delay channels:
///
///   F x' = A x + B1 u + B2 w,   y = C1 x + D11 u + D12 w,
///   z    = C2 x + D21 u + D22 w,   w_i(t) = z_i(t - tau_i).
///
/// The external channel is scalar; input_delays / output_delays hold at most
/// one entry each (the delay applied to u respectively y).
struct LftDelaySystem {
    Eigen::MatrixXd F;
    Eigen::MatrixXd A;
    Eigen::VectorXd B1;
    Eigen::MatrixXd B2;
    Eigen::RowVectorXd C1;
    Eigen::MatrixXd C2;
    double D11 = 0.0;
    Eigen::RowVectorXd D12;
    Eigen::VectorXd D21;
    Eigen::MatrixXd D22;
    std::vector<double> internal_delays;
    std::vector<double> input_delays;
    std::vector<double> output_delays;

    LftDelaySystem(Eigen::MatrixXd F_, Eigen::MatrixXd A_, Eigen::VectorXd B1_,
                   Eigen::MatrixXd B2_, Eigen::RowVectorXd C1_, Eigen::MatrixXd C2_, double D11_,
                   Eigen::RowVectorXd D12_, Eigen::VectorXd D21_, Eigen::MatrixXd D22_,
                   std::vector<double> internal_delays_, std::vector<double> input_delays_ = {},
                   std::vector<double> output_delays_ = {});

    int state_dim() const { return static_cast<int>(F.rows()); }
    int channel_count() const { return static_cast<int>(internal_delays.size()); }
};

/// Rewrites external input/output channel delays as additional internal
/// delay channels, leaving the transfer function unchanged.
LftDelaySystem absorb_channel_delays(const LftDelaySystem& sys);

/// Converts the interconnection form to the standard delay descriptor form
/// with the augmented state [x; gamma_u; w; z]. The gamma_u variable is
/// always introduced, so the resulting E is singular whenever the original
/// block has a state or any delay channel exists.
DdaeSystem lft_to_ddae(const LftDelaySystem& sys);

/// Orthonormal nullspace bases of E via singular value decomposition.
/// nu counts singular values below rank_tol * max(sigma_max, sigma_max > 0 ? sigma_max : 1).
/// Throws ConstructionError when E is numerically zero (nu = n not allowed).
NullspaceBases nullspace_bases(const DdaeSystem& sys, double rank_tol = 1e-10);

/// True iff nu = 0 or U^T A0 V is nonsingular; the reciprocal condition
/// number of U^T A0 V returned as a diagnostic.
CausalityCheck check_causality(const DdaeSystem& sys, const NullspaceBases& bases);

/// Series interconnection: transfer equals G2(s) * G1(s) (g1 feeds g2).
DdaeSystem series(const DdaeSystem& g1, const DdaeSystem& g2);

/// Parallel interconnection: transfer equals G1(s) + G2(s).
DdaeSystem parallel(const DdaeSystem& g1, const DdaeSystem& g2);

/// Feedback loop around g1 with g2 in the return path. sign = -1 gives the
/// negative feedback law G1 / (1 + G2 G1), sign = +1 gives G1 / (1 - G2 G1).
/// The loop signal becomes an extra algebraic variable; nothing is inverted.
DdaeSystem feedback(const DdaeSystem& g1, const DdaeSystem& g2, int sign = -1);

}  // namespace delaynorm
