#include "delaynorm/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/LU>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace delaynorm {

namespace {

constexpr double kCancelTol = 1e-8;      // relative pole-zero cancellation distance
constexpr double kValidationTol = 1e-6;  // relative mismatch allowed on the grid
constexpr int kValidationPoints = 200;

// Chebyshev extremal points cos(k pi / N) mapped to [-tau_max, 0].
Eigen::VectorXd chebyshev_points(int N, double tau_max) {
    Eigen::VectorXd t(N + 1);
    for (int k = 0; k <= N; ++k) {
        t(k) = (std::cos(std::numbers::pi * k / N) - 1.0) * tau_max / 2.0;
    }
    return t;
}

// Differentiation matrix on the mapped grid.
Eigen::MatrixXd chebyshev_diff(int N, double tau_max) {
    Eigen::VectorXd x(N + 1);
    for (int k = 0; k <= N; ++k) x(k) = std::cos(std::numbers::pi * k / N);
    auto c = [N](int i) { return (i == 0 || i == N) ? 2.0 : 1.0; };

    Eigen::MatrixXd D(N + 1, N + 1);
    for (int i = 0; i <= N; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j <= N; ++j) {
            if (i == j) continue;
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            D(i, j) = (c(i) / c(j)) * sign / (x(i) - x(j));
            row_sum += D(i, j);
        }
        D(i, i) = -row_sum;  // negative sum trick for the diagonal
    }
    return D * (2.0 / tau_max);
}

// Barycentric interpolation weights of the grid evaluated at theta.
Eigen::RowVectorXd barycentric_row(const Eigen::VectorXd& t, double theta) {
    const int m = static_cast<int>(t.size());
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m);
    for (int j = 0; j < m; ++j) {
        if (theta == t(j) || std::abs(theta - t(j)) < 1e-300) {
            row(j) = 1.0;
            return row;
        }
    }
    double denom = 0.0;
    for (int j = 0; j < m; ++j) {
        double w = (j == 0 || j == m - 1) ? 0.5 : 1.0;
        if (j % 2 == 1) w = -w;
        const double term = w / (theta - t(j));
        row(j) = term;
        denom += term;
    }
    row /= denom;
    return row;
}

bool keep_eigenvalue(Complex alpha, Complex beta, const GevpOptions& opts) {
    const double scale = std::max(std::abs(alpha), std::abs(beta));
    if (scale == 0.0) return false;
    if (std::abs(beta) <= opts.beta_tol * scale) return false;
    return std::abs(alpha / beta) <= opts.infinite_cap;
}

// Generalized Schur decomposition A = Q S Z^H, E = Q T Z^H. Gives both the
// finite eigenvalues and an O(n^2) transfer-function evaluator.
class PencilSchur {
   public:
    PencilSchur(const Eigen::MatrixXd& A, const Eigen::MatrixXd& E)
        : S_(A.cast<Complex>()), T_(E.cast<Complex>()) {
        const auto n = static_cast<lapack_int>(A.rows());
        Q_.resize(n, n);
        Z_.resize(n, n);
        alpha_.resize(n);
        beta_.resize(n);
        lapack_int sdim = 0;
        const lapack_int info = LAPACKE_zgges(
            LAPACK_COL_MAJOR, 'V', 'V', 'N', nullptr, n, S_.data(), n, T_.data(), n, &sdim,
            alpha_.data(), beta_.data(), Q_.data(), n, Z_.data(), n);
        if (info != 0) {
            std::ostringstream msg;
            msg << "generalized Schur decomposition failed (info = " << info << ", size = " << n
                << ")";
            throw EigensolverError(msg.str());
        }
    }

    std::vector<Complex> finite_eigenvalues(const GevpOptions& opts) const {
        std::vector<Complex> out;
        for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
            if (keep_eigenvalue(alpha_(i), beta_(i), opts)) out.push_back(alpha_(i) / beta_(i));
        }
        return out;
    }

    Complex eval(const Eigen::RowVectorXd& C, const Eigen::VectorXd& B, Complex s) const {
        const Eigen::VectorXcd rhs = Q_.adjoint() * B.cast<Complex>();
        const Eigen::MatrixXcd M = s * T_ - S_;  // upper triangular
        const Eigen::VectorXcd x = M.triangularView<Eigen::Upper>().solve(rhs);
        return (C.cast<Complex>() * (Z_ * x))(0);
    }

   private:
    Eigen::MatrixXcd S_, T_, Q_, Z_;
    Eigen::VectorXcd alpha_, beta_;
};

}  // namespace

DescriptorRealization spectral_discretize(const DdaeSystem& sys, int N) {
    if (N < 1) throw std::invalid_argument("spectral_discretize: N must be >= 1");
    const int n = sys.dim();

    if (sys.delay_count() == 0) {
        return DescriptorRealization{sys.E, sys.terms.front().coeff, sys.B, sys.C};
    }

    const double tau_max = sys.max_delay();
    const Eigen::VectorXd t = chebyshev_points(N, tau_max);
    const Eigen::MatrixXd D = chebyshev_diff(N, tau_max);

    const int order = n * (N + 1);
    Eigen::MatrixXd EN = Eigen::MatrixXd::Zero(order, order);
    Eigen::MatrixXd AN = Eigen::MatrixXd::Zero(order, order);

    // Boundary block row at t_0 = 0 carries the system equation.
    EN.topLeftCorner(n, n) = sys.E;
    AN.topLeftCorner(n, n) = sys.terms.front().coeff;
    for (size_t i = 1; i < sys.terms.size(); ++i) {
        const Eigen::RowVectorXd w = barycentric_row(t, -sys.terms[i].delay);
        for (int j = 0; j <= N; ++j) {
            if (w(j) != 0.0) AN.block(0, n * j, n, n) += w(j) * sys.terms[i].coeff;
        }
    }

    // Remaining block rows collocate the transport action.
    for (int k = 1; k <= N; ++k) {
        EN.block(n * k, n * k, n, n).setIdentity();
        for (int j = 0; j <= N; ++j) {
            AN.block(n * k, n * j, n, n) = D(k, j) * Eigen::MatrixXd::Identity(n, n);
        }
    }

    Eigen::VectorXd BN = Eigen::VectorXd::Zero(order);
    BN.head(n) = sys.B;
    Eigen::RowVectorXd CN = Eigen::RowVectorXd::Zero(order);
    CN.head(n) = sys.C;
    return DescriptorRealization{std::move(EN), std::move(AN), std::move(BN), std::move(CN)};
}

Complex eval_descriptor(const DescriptorRealization& g, Complex s) {
    const Eigen::MatrixXcd M = s * g.E.cast<Complex>() - g.A.cast<Complex>();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const Eigen::VectorXcd x = lu.solve(g.B.cast<Complex>());
    return (g.C.cast<Complex>() * x)(0);
}

GevpResult solve_gevp(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& E,
                      const GevpOptions& opts) {
    if (A.rows() != A.cols() || E.rows() != E.cols() || A.rows() != E.rows()) {
        throw ConstructionError("solve_gevp: matrices must be square and of equal size");
    }
    const auto n = static_cast<lapack_int>(A.rows());
    GevpResult out;
    if (n == 0) return out;

    Eigen::MatrixXcd a = A, e = E;
    Eigen::VectorXcd alpha(n), beta(n);
    Eigen::MatrixXcd vr;
    if (opts.with_vectors) vr.resize(n, n);
    const lapack_int info = LAPACKE_zggev(
        LAPACK_COL_MAJOR, 'N', opts.with_vectors ? 'V' : 'N', n, a.data(), n, e.data(), n,
        alpha.data(), beta.data(), nullptr, 1, opts.with_vectors ? vr.data() : nullptr,
        opts.with_vectors ? n : 1);
    if (info != 0) {
        std::ostringstream msg;
        msg << "QZ iteration failed (info = " << info << ", size = " << n << ")";
        throw EigensolverError(msg.str());
    }

    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (keep_eigenvalue(alpha(i), beta(i), opts)) kept.push_back(i);
    }
    out.values.reserve(kept.size());
    for (auto i : kept) out.values.push_back(alpha(i) / beta(i));
    if (opts.with_vectors) {
        out.vectors.resize(n, static_cast<Eigen::Index>(kept.size()));
        for (size_t c = 0; c < kept.size(); ++c) out.vectors.col(c) = vr.col(kept[c]);
    }
    return out;
}

Complex eval_zpk(const ZpkForm& zpk, Complex s) {
    if (zpk.gain == Complex{0.0, 0.0}) return {0.0, 0.0};
    Complex log_sum = std::log(zpk.gain);
    for (const auto& z : zpk.zeros) log_sum += std::log(s - z);
    for (const auto& p : zpk.poles) log_sum -= std::log(s - p);
    return std::exp(log_sum);
}

namespace {

// Remove matched pole-zero pairs closer than the cancellation tolerance,
// nearest pairs first.
void remove_cancellations(std::vector<Complex>& zeros, std::vector<Complex>& poles) {
    struct Pair {
        double dist;
        size_t zi, pi;
    };
    std::vector<Pair> pairs;
    for (size_t zi = 0; zi < zeros.size(); ++zi) {
        for (size_t pi = 0; pi < poles.size(); ++pi) {
            const double d = std::abs(zeros[zi] - poles[pi]);
            if (d < kCancelTol * (1.0 + std::abs(poles[pi]))) pairs.push_back({d, zi, pi});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return std::tie(a.zi, a.pi) < std::tie(b.zi, b.pi);
    });
    std::vector<bool> z_used(zeros.size(), false), p_used(poles.size(), false);
    for (const auto& pr : pairs) {
        if (z_used[pr.zi] || p_used[pr.pi]) continue;
        z_used[pr.zi] = true;
        p_used[pr.pi] = true;
    }
    std::vector<Complex> z2, p2;
    for (size_t i = 0; i < zeros.size(); ++i) {
        if (!z_used[i]) z2.push_back(zeros[i]);
    }
    for (size_t i = 0; i < poles.size(); ++i) {
        if (!p_used[i]) p2.push_back(poles[i]);
    }
    zeros = std::move(z2);
    poles = std::move(p2);
}

void sort_complex(std::vector<Complex>& v) {
    std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

}  // namespace

ZpkForm to_zpk(const DescriptorRealization& g) {
    const int order = g.order();
    const PencilSchur schur(g.A, g.E);

    ZpkForm out;
    out.poles = schur.finite_eigenvalues(GevpOptions{});

    // Zeros from the bordered system pencil [[A, B], [C, 0]] vs blkdiag(E, 0).
    Eigen::MatrixXcd Az = Eigen::MatrixXcd::Zero(order + 1, order + 1);
    Az.topLeftCorner(order, order) = g.A.cast<Complex>();
    Az.topRightCorner(order, 1) = g.B.cast<Complex>();
    Az.bottomLeftCorner(1, order) = g.C.cast<Complex>();
    Eigen::MatrixXcd Ez = Eigen::MatrixXcd::Zero(order + 1, order + 1);
    Ez.topLeftCorner(order, order) = g.E.cast<Complex>();
    out.zeros = solve_gevp(Az, Ez).values;

    remove_cancellations(out.zeros, out.poles);
    sort_complex(out.zeros);
    sort_complex(out.poles);

    // Validation point away from all poles and zeros; the golden-ratio step
    // keeps retries from landing on another root.
    const double golden = 1.6180339887498949;
    Complex s0{0.0, golden + 1.0};
    for (int attempt = 0; attempt < 64; ++attempt) {
        double dmin = 1e300;
        for (const auto& z : out.zeros) dmin = std::min(dmin, std::abs(s0 - z));
        for (const auto& p : out.poles) dmin = std::min(dmin, std::abs(s0 - p));
        if (dmin > 1e-6 * (1.0 + std::abs(s0))) break;
        s0 = Complex{0.05 * (attempt + 1), s0.imag() * golden};
    }

    const Complex g0 = schur.eval(g.C, g.B, s0);
    if (std::abs(g0) == 0.0) {
        out.gain = {0.0, 0.0};
        return out;
    }
    Complex log_gain = std::log(g0);
    for (const auto& p : out.poles) log_gain += std::log(s0 - p);
    for (const auto& z : out.zeros) log_gain -= std::log(s0 - z);
    out.gain = std::exp(log_gain);

    // Validation grid: the extracted form must reproduce the realization.
    const double tau_scale = 1.0;
    const double w_hi = 10.0 * tau_scale;
    for (int i = 0; i < kValidationPoints; ++i) {
        const double w = w_hi * i / (kValidationPoints - 1);
        const Complex s{0.0, w};
        const Complex lhs = eval_zpk(out, s);
        const Complex rhs = schur.eval(g.C, g.B, s);
        if (std::abs(lhs - rhs) > kValidationTol * (1.0 + std::abs(rhs))) {
            std::ostringstream msg;
            msg << "zero-pole-gain extraction failed validation at omega = " << w << " (|diff| = "
                << std::abs(lhs - rhs) << ", |G_N| = " << std::abs(rhs) << ")";
            throw ExtractionError(msg.str());
        }
    }
    return out;
}

}  // namespace delaynorm
