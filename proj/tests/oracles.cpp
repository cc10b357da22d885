#include "oracles.hpp"

#include <Eigen/LU>
#include <cmath>

namespace oracles {

namespace {
constexpr Complex kImag{0.0, 1.0};
}

Complex lft_loop_closure(const delaynorm::LftDelaySystem& sys, Complex s) {
    const int k = sys.channel_count();
    const Eigen::MatrixXcd resolvent =
        (s * sys.F.cast<Complex>() - sys.A.cast<Complex>()).fullPivLu().inverse();

    const Complex h11 = (sys.C1.cast<Complex>() * resolvent * sys.B1.cast<Complex>())(0) + sys.D11;
    const Eigen::RowVectorXcd h12 =
        sys.C1.cast<Complex>() * resolvent * sys.B2.cast<Complex>() + sys.D12.cast<Complex>();
    const Eigen::VectorXcd h21 =
        sys.C2.cast<Complex>() * resolvent * sys.B1.cast<Complex>() + sys.D21.cast<Complex>();
    const Eigen::MatrixXcd h22 =
        sys.C2.cast<Complex>() * resolvent * sys.B2.cast<Complex>() + sys.D22.cast<Complex>();

    Eigen::VectorXcd lambda(k);
    for (int i = 0; i < k; ++i) lambda(i) = std::exp(-s * sys.internal_delays[static_cast<size_t>(i)]);

    Complex value = h11;
    if (k > 0) {
        const Eigen::MatrixXcd closed =
            Eigen::MatrixXcd::Identity(k, k) - h22 * lambda.asDiagonal().toDenseMatrix();
        value += (h12 * lambda.asDiagonal().toDenseMatrix() * closed.fullPivLu().solve(h21))(0);
    }

    double external = 0.0;
    for (double tau : sys.input_delays) external += tau;
    for (double tau : sys.output_delays) external += tau;
    return value * std::exp(-s * external);
}

Complex tsh_closed_form(Complex s) {
    const Complex p = 1.0 - 0.25 * std::exp(-s) + 0.5 * std::exp(-2.0 * s);
    return (s + 2.1) / ((s + 0.1) * p + 1.0);
}

Complex tsh_closed_form_derivative(Complex s) {
    const Complex p = 1.0 - 0.25 * std::exp(-s) + 0.5 * std::exp(-2.0 * s);
    const Complex pp = 0.25 * std::exp(-s) - std::exp(-2.0 * s);
    const Complex num = s + 2.1;
    const Complex den = (s + 0.1) * p + 1.0;
    const Complex dden = p + (s + 0.1) * pp;
    return (den - num * dden) / (den * den);
}

delaynorm::DdaeSystem tsh_system() {
    Eigen::MatrixXd E(2, 2), A0(2, 2), A1(2, 2), A2(2, 2);
    E << 1, 0, 0, 0;
    A0 << -0.1, 1, -1, -1;
    A1 << 0, 0, 0, 0.25;
    A2 << 0, 0, 0, -0.5;
    Eigen::VectorXd B(2);
    B << 0, 1;
    Eigen::RowVectorXd C(2);
    C << 2, 1;
    return delaynorm::DdaeSystem(E, {{0.0, A0}, {1.0, A1}, {2.0, A2}}, B, C);
}

delaynorm::DdaeSystem one_delay_system() {
    Eigen::MatrixXd E(1, 1), A0(1, 1), A1(1, 1);
    E << 1;
    A0 << -1;
    A1 << -0.5;
    Eigen::VectorXd B(1);
    B << 1;
    Eigen::RowVectorXd C(1);
    C << 1;
    return delaynorm::DdaeSystem(E, {{0.0, A0}, {1.0, A1}}, B, C);
}

delaynorm::DdaeSystem first_order_system() {
    Eigen::MatrixXd E(1, 1), A0(1, 1);
    E << 1;
    A0 << -1;
    Eigen::VectorXd B(1);
    B << 1;
    Eigen::RowVectorXd C(1);
    C << 1;
    return delaynorm::DdaeSystem(E, {{0.0, A0}}, B, C);
}

Complex smith_scalar_oracle(Complex s) {
    const Complex P = 6.0 * std::exp(-106.0 * s) / (37.0 * s + 1.0);
    const Complex Gp = 5.6 / (40.2 * s + 1.0);
    const Complex Dp = std::exp(-93.9 * s);
    const Complex F = 1.0 / (20.0 * s + 1.0);
    // 1/C = 80 s / (40 s + 1) stays finite at s = 0 where C itself blows up.
    const Complex inv_C = 80.0 * s / (40.0 * s + 1.0);
    return P / (inv_C + Gp + F * (P - Gp * Dp));
}

double sweep_maximum(const std::function<double(double)>& f, double lo, double hi, int points,
                     double* argmax) {
    double best = -1e300;
    double best_x = lo;
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        const double v = f(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    // Golden-section refinement inside the winning bracket.
    const double step = (hi - lo) / (points - 1);
    double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
    const double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-12 * (1.0 + std::abs(b))) {
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
    const double xc = 0.5 * (a + b);
    const double fc = f(xc);
    if (argmax) *argmax = fc > best ? xc : best_x;
    return std::max(fc, best);
}

std::vector<double> sweep_stationary_points(const std::function<double(double)>& f, double lo,
                                            double hi, int points) {
    std::vector<double> found;
    double prev_x = lo, prev = f(lo);
    double x = lo + (hi - lo) / (points - 1);
    double cur = f(x);
    for (int i = 2; i < points; ++i) {
        const double next_x = lo + (hi - lo) * i / (points - 1);
        const double next = f(next_x);
        const double dl = cur - prev, dr = next - cur;
        if ((dl > 0 && dr < 0) || (dl < 0 && dr > 0)) found.push_back(x);
        prev = cur;
        prev_x = x;
        cur = next;
        x = next_x;
    }
    (void)prev_x;
    return found;
}

Complex newton_refine(const std::function<Complex(Complex)>& f,
                      const std::function<Complex(Complex)>& fprime, Complex start, int max_iter) {
    Complex s = start;
    for (int i = 0; i < max_iter; ++i) {
        const Complex value = f(s);
        if (std::abs(value) < 1e-14) break;
        s -= value / fprime(s);
    }
    return s;
}

delaynorm::DdaeSystem random_stable_retarded(std::mt19937& rng) {
    std::uniform_int_distribution<int> n_dist(1, 4), m_dist(1, 2);
    std::uniform_real_distribution<double> entry(-1.0, 1.0), delay_dist(0.1, 2.0);
    const int n = n_dist(rng);
    const int m = m_dist(rng);

    std::vector<delaynorm::DelayTerm> terms;
    double delayed_norm = 0.0;
    for (int i = 0; i < m; ++i) {
        Eigen::MatrixXd Ai(n, n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) Ai(r, c) = 0.4 * entry(rng);
        }
        delayed_norm += Ai.norm();
        terms.push_back({delay_dist(rng), Ai});
    }

    Eigen::MatrixXd A0(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) A0(r, c) = entry(rng);
    }
    // Push the log norm of A0 below -(sum of delayed norms + margin): every
    // characteristic root then satisfies Re < -margin for any delays.
    const Eigen::MatrixXd sym = 0.5 * (A0 + A0.transpose());
    const double mu = sym.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
    A0 -= (mu + delayed_norm + 0.3) * Eigen::MatrixXd::Identity(n, n);
    terms.insert(terms.begin(), {0.0, A0});

    Eigen::VectorXd B(n);
    Eigen::RowVectorXd C(n);
    for (int i = 0; i < n; ++i) {
        B(i) = entry(rng);
        C(i) = entry(rng);
    }
    return delaynorm::DdaeSystem(Eigen::MatrixXd::Identity(n, n), std::move(terms), B, C);
}

delaynorm::LftDelaySystem random_lft(std::mt19937& rng) {
    std::uniform_int_distribution<int> n_dist(1, 3), k_dist(0, 2);
    std::uniform_real_distribution<double> entry(-1.0, 1.0), delay_dist(0.1, 2.0);
    const int nx = n_dist(rng);
    const int k = k_dist(rng);

    Eigen::MatrixXd A(nx, nx);
    for (int r = 0; r < nx; ++r) {
        for (int c = 0; c < nx; ++c) A(r, c) = entry(rng);
    }
    A -= (2.0 + nx) * Eigen::MatrixXd::Identity(nx, nx);

    auto rand_mat = [&](int r, int c, double scale) {
        Eigen::MatrixXd m(r, c);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c; ++j) m(i, j) = scale * entry(rng);
        }
        return m;
    };

    std::vector<double> internal;
    for (int i = 0; i < k; ++i) internal.push_back(delay_dist(rng));
    std::vector<double> input_delays{delay_dist(rng)};
    std::vector<double> output_delays{delay_dist(rng)};

    return delaynorm::LftDelaySystem(
        Eigen::MatrixXd::Identity(nx, nx), A, rand_mat(nx, 1, 1.0).col(0), rand_mat(nx, k, 0.5),
        rand_mat(1, nx, 1.0).row(0), rand_mat(k, nx, 0.5), entry(rng), rand_mat(1, k, 0.3).row(0),
        rand_mat(k, 1, 0.3).col(0), rand_mat(k, k, 0.2), internal, input_delays, output_delays);
}

}  // namespace oracles
