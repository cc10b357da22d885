#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "delaynorm/model.hpp"
#include "delaynorm/transfer.hpp"

namespace delaynorm {

/// Finite-dimensional SISO descriptor realization E_N, A_N, B_N, C_N.
struct DescriptorRealization {
    Eigen::MatrixXd E;
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;

    int order() const { return static_cast<int>(E.rows()); }
};

/// Rational approximation of the delay system by collocation on N + 1
/// Chebyshev extremal points scaled to [-tau_max, 0]. The boundary block row
/// carries the system equation with delayed values obtained by barycentric
/// interpolation; all other block rows collocate the shift (transport)
/// action with the Chebyshev differentiation matrix. A system without delays
/// is returned unchanged as its own exact realization.
DescriptorRealization spectral_discretize(const DdaeSystem& sys, int N);

/// Transfer function of the descriptor realization at one point.
Complex eval_descriptor(const DescriptorRealization& g, Complex s);

struct GevpOptions {
    double infinite_cap = 1e8;  // eigenvalues larger than this count as infinite
    double beta_tol = 1e-12;    // |beta| threshold relative to max(|alpha|, |beta|)
    bool with_vectors = false;
};

struct GevpResult {
    std::vector<Complex> values;
    Eigen::MatrixXcd vectors;  // columns, only filled when requested
};

/// All finite generalized eigenvalues of (A, E) by the dense QZ algorithm.
/// Finite means a well-conditioned beta and |lambda| below the infinite cap.
GevpResult solve_gevp(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& E,
                      const GevpOptions& opts = {});

/// Zeros, poles and gain of a SISO rational function. Complex entries occur
/// in conjugate pairs up to the pairing tolerance; k b(s)/a(s) reproduces the
/// source realization on a validation grid.
struct ZpkForm {
    std::vector<Complex> zeros;
    std::vector<Complex> poles;
    Complex gain{0.0, 0.0};
};

/// Pole/zero extraction from a descriptor realization. Poles are the finite
/// eigenvalues of (A, E); zeros come from the bordered system pencil. Exact
/// pole-zero cancellations (relative distance below 1e-8) are removed in
/// pairs, which strips the unobservable collocation modes of interconnected
/// systems. Throws ExtractionError when the extracted form fails to
/// reproduce the realization to 1e-6 relative on the validation grid.
ZpkForm to_zpk(const DescriptorRealization& g);

/// k b(s)/a(s) evaluated in log space to avoid overflow for large orders.
Complex eval_zpk(const ZpkForm& zpk, Complex s);

}  // namespace delaynorm
