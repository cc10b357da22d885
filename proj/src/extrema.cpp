#include "delaynorm/extrema.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "delaynorm/transfer.hpp"

namespace delaynorm {

namespace {

constexpr Complex kImag{0.0, 1.0};
constexpr double kAxisPoleTol = 1e-8;       // pole-on-axis rejection
constexpr double kAxisZeroTol = 1e-8;       // zeros treated as on-axis
constexpr double kTinyMagnitude = 1e-12;    // short-circuit to a direct minimum
constexpr double kDedupTol = 1e-6;          // relative merge distance for corrected points
constexpr double kPredictDedupTol = 1e-8;   // relative merge distance for predictions
constexpr double kStabilityWarnMargin = -1e-8;

// d/ds of the pencil derivative: sum tau_i^2 Ai e^{-s tau_i}.
Eigen::MatrixXcd pencil_second_derivative(const DdaeSystem& sys, Complex s) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(sys.dim(), sys.dim());
    for (size_t i = 1; i < sys.terms.size(); ++i) {
        const double tau = sys.terms[i].delay;
        out += (tau * tau) * std::exp(-s * tau) * sys.terms[i].coeff.cast<Complex>();
    }
    return out;
}

ExtremumPoint::Kind classify(const DdaeSystem& sys, double omega, double xi) {
    const double h = 1e-4 * (1.0 + std::abs(omega));
    try {
        const double left = std::abs(eval_transfer(sys, kImag * (omega - h)));
        const double mid = std::abs(eval_transfer(sys, kImag * omega));
        const double right = std::abs(eval_transfer(sys, kImag * (omega + h)));
        const double d2 = left - 2.0 * mid + right;
        if (std::abs(d2) <= 1e-13 * (1.0 + xi)) return ExtremumPoint::Kind::undetermined;
        return d2 < 0.0 ? ExtremumPoint::Kind::maximum : ExtremumPoint::Kind::minimum;
    } catch (const PoleProximityError&) {
        return ExtremumPoint::Kind::undetermined;
    }
}

}  // namespace

std::string to_string(ExtremumPoint::Kind kind) {
    switch (kind) {
        case ExtremumPoint::Kind::maximum: return "maximum";
        case ExtremumPoint::Kind::minimum: return "minimum";
        default: return "undetermined";
    }
}

Complex StationaritySystem::eval(Complex s) const {
    Complex sum{0.0, 0.0};
    for (Eigen::Index i = 0; i < A_diag.size(); ++i) sum += C(i) * B(i) / (s - A_diag(i));
    return sum;
}

StationaritySystem build_stationarity_system(const ZpkForm& zpk) {
    StationaritySystem out;
    std::vector<Complex> diag;
    std::vector<double> weights;

    for (const auto& z : zpk.zeros) {
        if (std::abs(z.real()) < kAxisZeroTol * (1.0 + std::abs(z))) {
            out.axis_zero_frequencies.push_back(std::abs(z.imag()));
            continue;
        }
        diag.push_back(-std::conj(z));
        weights.push_back(1.0);
        diag.push_back(z);
        weights.push_back(1.0);
    }
    for (const auto& p : zpk.poles) {
        if (std::abs(p.real()) < kAxisPoleTol * (1.0 + std::abs(p))) {
            std::ostringstream msg;
            msg << "pole on the imaginary axis at (" << p.real() << ", " << p.imag()
                << "): system is not exponentially stable";
            throw StabilityError(msg.str());
        }
        diag.push_back(-std::conj(p));
        weights.push_back(-1.0);
        diag.push_back(p);
        weights.push_back(-1.0);
    }

    const auto m = static_cast<Eigen::Index>(diag.size());
    out.A_diag.resize(m);
    out.B = Eigen::VectorXcd::Ones(m);
    out.C.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        out.A_diag(i) = diag[static_cast<size_t>(i)];
        out.C(i) = weights[static_cast<size_t>(i)];
    }
    std::sort(out.axis_zero_frequencies.begin(), out.axis_zero_frequencies.end());
    return out;
}

std::vector<double> predict_frequencies(const StationaritySystem& delta, double axis_tol) {
    const int m = delta.size();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(m + 1, m + 1);
    A.topLeftCorner(m, m) = delta.A_diag.asDiagonal();
    A.topRightCorner(m, 1) = delta.B;
    A.bottomLeftCorner(1, m) = delta.C;
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Identity(m + 1, m + 1);
    E(m, m) = 0.0;

    std::vector<double> freqs{0.0};  // the extremum function is odd: 0 is structural
    for (const Complex& lam : solve_gevp(A, E).values) {
        if (std::abs(lam.real()) <= axis_tol * (1.0 + std::abs(lam))) {
            freqs.push_back(std::abs(lam.imag()));
        }
    }
    std::sort(freqs.begin(), freqs.end());
    std::vector<double> dedup;
    for (double w : freqs) {
        if (dedup.empty() || w - dedup.back() > kPredictDedupTol * (1.0 + w)) dedup.push_back(w);
    }
    return dedup;
}

Eigen::MatrixXcd build_singular_value_matrix(const DdaeSystem& sys, double omega, double xi) {
    const int n = sys.dim();
    const Complex s = kImag * omega;
    const PencilValue pos = eval_delay_pencil(sys, s);
    const PencilValue neg = eval_delay_pencil(sys, -s);

    Eigen::MatrixXcd H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = s * sys.E.cast<Complex>() - pos.value;
    H.topRightCorner(n, n) = -(1.0 / xi) * (sys.B * sys.B.transpose()).cast<Complex>();
    H.bottomLeftCorner(n, n) = (1.0 / xi) * (sys.C.transpose() * sys.C).cast<Complex>();
    H.bottomRightCorner(n, n) = s * sys.E.transpose().cast<Complex>() + neg.value.transpose();
    return H;
}

Eigen::VectorXd corrector_residual(const DdaeSystem& sys, const CorrectorState& st) {
    const int n = sys.dim();
    const Eigen::MatrixXcd H = build_singular_value_matrix(sys, st.omega, st.xi);
    Eigen::VectorXcd w(2 * n);
    w << st.u, st.v;
    const Eigen::VectorXcd h = H * w;

    const Eigen::MatrixXcd M =
        sys.E.cast<Complex>() - eval_delay_pencil(sys, kImag * st.omega).derivative;
    const Complex pairing = st.v.adjoint() * (M * st.u);
    const Complex norm = st.q.adjoint() * w;

    Eigen::VectorXd r(4 * n + 3);
    r.segment(0, 2 * n) = h.real();
    r.segment(2 * n, 2 * n) = h.imag();
    r(4 * n) = pairing.imag();
    r(4 * n + 1) = norm.real() - 1.0;
    r(4 * n + 2) = norm.imag();
    return r;
}

Eigen::MatrixXd corrector_jacobian(const DdaeSystem& sys, const CorrectorState& st) {
    const int n = sys.dim();
    const Complex s = kImag * st.omega;
    const PencilValue pos = eval_delay_pencil(sys, s);
    const PencilValue neg = eval_delay_pencil(sys, -s);
    const Eigen::MatrixXcd H = build_singular_value_matrix(sys, st.omega, st.xi);
    const Eigen::MatrixXcd Ec = sys.E.cast<Complex>();

    Eigen::VectorXcd w(2 * n);
    w << st.u, st.v;

    // d(H w)/d omega.
    Eigen::VectorXcd dh_domega(2 * n);
    dh_domega.head(n) = kImag * ((Ec - pos.derivative) * st.u);
    dh_domega.tail(n) = kImag * ((Ec.transpose() - neg.derivative.transpose()) * st.v);

    // d(H w)/d xi.
    const double inv_xi2 = 1.0 / (st.xi * st.xi);
    Eigen::VectorXcd dh_dxi(2 * n);
    dh_dxi.head(n) = inv_xi2 * ((sys.B * sys.B.transpose()).cast<Complex>() * st.v);
    dh_dxi.tail(n) = -inv_xi2 * ((sys.C.transpose() * sys.C).cast<Complex>() * st.u);

    // Pairing row pieces.
    const Eigen::MatrixXcd M = Ec - pos.derivative;
    const Eigen::MatrixXcd dM_domega = -kImag * pencil_second_derivative(sys, s);
    const Eigen::RowVectorXcd g_row = st.v.adjoint() * M;        // d pairing / d u
    const Eigen::VectorXcd f_col = M * st.u;                     // d pairing / d conj(v)
    const Complex pairing_domega = (st.v.adjoint() * (dM_domega * st.u))(0);

    const int cols = 4 * n + 2;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4 * n + 3, cols);
    const int c_omega = 0, c_xi = 1, c_ur = 2, c_ui = 2 + n, c_vr = 2 + 2 * n, c_vi = 2 + 3 * n;

    auto set_h_column = [&](int col, const Eigen::VectorXcd& dh) {
        J.block(0, col, 2 * n, 1) = dh.real();
        J.block(2 * n, col, 2 * n, 1) = dh.imag();
    };
    set_h_column(c_omega, dh_domega);
    set_h_column(c_xi, dh_dxi);
    for (int k = 0; k < 2 * n; ++k) {
        const Eigen::VectorXcd h_col = H.col(k);
        const int cr = (k < n) ? c_ur + k : c_vr + (k - n);
        const int ci = (k < n) ? c_ui + k : c_vi + (k - n);
        set_h_column(cr, h_col);
        set_h_column(ci, Eigen::VectorXcd(kImag * h_col));
    }

    J(4 * n, c_omega) = pairing_domega.imag();
    for (int k = 0; k < n; ++k) {
        J(4 * n, c_ur + k) = g_row(k).imag();
        J(4 * n, c_ui + k) = g_row(k).real();
        J(4 * n, c_vr + k) = f_col(k).imag();
        J(4 * n, c_vi + k) = -f_col(k).real();
    }

    for (int k = 0; k < 2 * n; ++k) {
        const Complex qk = st.q(k);
        const int cr = (k < n) ? c_ur + k : c_vr + (k - n);
        const int ci = (k < n) ? c_ui + k : c_vi + (k - n);
        J(4 * n + 1, cr) = qk.real();
        J(4 * n + 1, ci) = qk.imag();
        J(4 * n + 2, cr) = -qk.imag();
        J(4 * n + 2, ci) = qk.real();
    }
    return J;
}

ExtremumPoint gauss_newton_correct(const DdaeSystem& sys, double omega0, double xi0,
                                   const CorrectorOptions& opts) {
    const int n = sys.dim();
    ExtremumPoint point;
    point.predictor_omega = omega0;
    point.omega = omega0;
    point.xi = xi0;

    if (xi0 < kTinyMagnitude) {
        point.kind = ExtremumPoint::Kind::minimum;
        point.converged = true;
        point.residual = 0.0;
        return point;
    }

    // Start vector: right singular vector for the smallest singular value.
    const Eigen::MatrixXcd H0 = build_singular_value_matrix(sys, omega0, xi0);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H0, Eigen::ComputeThinV);
    const Eigen::VectorXcd start = svd.matrixV().col(2 * n - 1);

    CorrectorState st;
    st.omega = omega0;
    st.xi = xi0;
    st.u = start.head(n);
    st.v = start.tail(n);
    st.q = start;

    Eigen::VectorXd r = corrector_residual(sys, st);
    double rnorm = r.norm();
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        if (rnorm <= opts.tol * (1.0 + std::abs(st.xi))) break;

        const Eigen::MatrixXd J = corrector_jacobian(sys, st);
        const Eigen::VectorXd step = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(J).solve(-r);

        double alpha = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, alpha *= 0.5) {
            CorrectorState trial = st;
            trial.omega += alpha * step(0);
            trial.xi += alpha * step(1);
            if (trial.xi <= 0.0) continue;
            for (int k = 0; k < n; ++k) {
                trial.u(k) += alpha * Complex(step(2 + k), step(2 + n + k));
                trial.v(k) += alpha * Complex(step(2 + 2 * n + k), step(2 + 3 * n + k));
            }
            const Eigen::VectorXd r_trial = corrector_residual(sys, trial);
            if (r_trial.norm() < rnorm) {
                st = std::move(trial);
                r = r_trial;
                rnorm = r.norm();
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // stalled
    }

    point.omega = std::abs(st.omega);  // magnitude response is even in omega
    point.xi = st.xi;
    point.iterations = iter;
    point.residual = rnorm;
    point.converged = rnorm <= opts.tol * (1.0 + std::abs(st.xi));
    point.kind = classify(sys, point.omega, point.xi);
    return point;
}

ExtremumPoint newton_correct_scalar(const DdaeSystem& sys, double omega0,
                                    const CorrectorOptions& opts) {
    ExtremumPoint point;
    point.predictor_omega = omega0;
    double omega = omega0;
    double f = eval_extremum_function(sys, kImag * omega).imag();
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        if (std::abs(f) <= opts.tol) break;
        const double h = 1e-6 * (1.0 + std::abs(omega));
        const double fp = (eval_extremum_function(sys, kImag * (omega + h)).imag() -
                           eval_extremum_function(sys, kImag * (omega - h)).imag()) /
                          (2.0 * h);
        if (fp == 0.0) break;
        omega -= f / fp;
        f = eval_extremum_function(sys, kImag * omega).imag();
    }
    point.omega = std::abs(omega);
    point.xi = std::abs(eval_transfer(sys, kImag * point.omega));
    point.iterations = iter;
    point.residual = std::abs(f);
    point.converged = std::abs(f) <= opts.tol;
    point.kind = classify(sys, point.omega, point.xi);
    return point;
}

std::vector<ExtremumPoint> compute_extrema(const DdaeSystem& sys, const ExtremaOptions& opts,
                                           ExtremaDiagnostics* diag) {
    const NullspaceBases bases = nullspace_bases(sys, opts.rank_tol);
    const CausalityCheck cc = check_causality(sys, bases);
    if (!cc.causal) {
        std::ostringstream msg;
        msg << "causality check failed: U^T A0 V is singular (rcond = " << cc.rcond << ")";
        throw CausalityError(msg.str());
    }

    const DescriptorRealization disc = spectral_discretize(sys, opts.N);
    const ZpkForm zpk = to_zpk(disc);
    const StationaritySystem delta = build_stationarity_system(zpk);

    std::vector<double> candidates = predict_frequencies(delta, opts.axis_tol);
    candidates.insert(candidates.end(), delta.axis_zero_frequencies.begin(),
                      delta.axis_zero_frequencies.end());
    std::sort(candidates.begin(), candidates.end());

    if (diag) {
        diag->discretization_order = disc.order();
        diag->pole_count = static_cast<int>(zpk.poles.size());
        diag->zero_count = static_cast<int>(zpk.zeros.size());
        diag->pencil_size = delta.size() + 1;
        diag->predicted = candidates;
        for (const auto& p : zpk.poles) {
            if (p.real() > kStabilityWarnMargin) {
                std::ostringstream msg;
                msg << "approximant pole with real part " << p.real()
                    << ": the system may not be exponentially stable";
                diag->warnings.push_back(msg.str());
                break;
            }
        }
    }

    std::vector<ExtremumPoint> points;
    for (double w : candidates) {
        double mag = 0.0;
        try {
            mag = std::abs(eval_transfer(sys, kImag * w));
        } catch (const PoleProximityError&) {
            ExtremumPoint failed;
            failed.predictor_omega = w;
            failed.omega = w;
            failed.converged = false;
            failed.residual = std::numeric_limits<double>::infinity();
            points.push_back(failed);
            continue;
        }
        points.push_back(gauss_newton_correct(sys, w, mag, opts.corrector));
    }

    // Deduplicate on the corrected frequency, keeping the smaller residual.
    std::sort(points.begin(), points.end(), [](const ExtremumPoint& a, const ExtremumPoint& b) {
        if (a.omega != b.omega) return a.omega < b.omega;
        return a.residual < b.residual;
    });
    std::vector<ExtremumPoint> dedup;
    for (const auto& p : points) {
        if (!dedup.empty() && p.omega - dedup.back().omega <= kDedupTol * (1.0 + p.omega)) {
            if (p.residual < dedup.back().residual) dedup.back() = p;
        } else {
            dedup.push_back(p);
        }
    }
    return dedup;
}

}  // namespace delaynorm
