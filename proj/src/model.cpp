#include "delaynorm/model.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

namespace delaynorm {

namespace {

constexpr double kDelayMergeTol = 1e-12;  // relative tolerance for equal delays
constexpr double kCausalityRcondFloor = 1e-12;

bool same_delay(double a, double b) {
    return std::abs(a - b) <= kDelayMergeTol * std::max({1.0, a, b});
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConstructionError(msg);
}

// Finds the coefficient of `sys` at delay tau, or a zero matrix.
Eigen::MatrixXd term_at(const DdaeSystem& sys, double tau) {
    for (const auto& t : sys.terms) {
        if (same_delay(t.delay, tau)) return t.coeff;
    }
    return Eigen::MatrixXd::Zero(sys.dim(), sys.dim());
}

// Sorted union of the delays of two systems (0 included once).
std::vector<double> merged_delays(const DdaeSystem& g1, const DdaeSystem& g2) {
    std::vector<double> delays;
    for (const auto& t : g1.terms) delays.push_back(t.delay);
    for (const auto& t : g2.terms) {
        bool found = false;
        for (double d : delays) {
            if (same_delay(d, t.delay)) {
                found = true;
                break;
            }
        }
        if (!found) delays.push_back(t.delay);
    }
    std::sort(delays.begin(), delays.end());
    return delays;
}

}  // namespace

DdaeSystem::DdaeSystem(Eigen::MatrixXd E_, std::vector<DelayTerm> terms_, Eigen::VectorXd B_,
                       Eigen::RowVectorXd C_)
    : E(std::move(E_)), terms(std::move(terms_)), B(std::move(B_)), C(std::move(C_)) {
    const auto n = E.rows();
    require(n > 0, "DdaeSystem: empty state");
    require(E.cols() == n, "DdaeSystem: E must be square");
    require(B.rows() == n, "DdaeSystem: B must have n rows");
    require(C.cols() == n, "DdaeSystem: C must have n columns");
    for (const auto& t : terms) {
        require(std::isfinite(t.delay) && t.delay >= 0.0, "DdaeSystem: delays must be nonnegative");
        require(t.coeff.rows() == n && t.coeff.cols() == n,
                "DdaeSystem: coefficient matrix dimension mismatch");
    }

    // Normalize: sort ascending, merge equal delays, guarantee the tau = 0 term.
    std::stable_sort(terms.begin(), terms.end(),
                     [](const DelayTerm& a, const DelayTerm& b) { return a.delay < b.delay; });
    std::vector<DelayTerm> merged;
    for (auto& t : terms) {
        if (!merged.empty() && same_delay(merged.back().delay, t.delay)) {
            merged.back().coeff += t.coeff;
        } else {
            merged.push_back(std::move(t));
        }
    }
    if (merged.empty() || merged.front().delay > 0.0) {
        merged.insert(merged.begin(), DelayTerm{0.0, Eigen::MatrixXd::Zero(n, n)});
    }
    merged.front().delay = 0.0;
    terms = std::move(merged);
}

LftDelaySystem::LftDelaySystem(Eigen::MatrixXd F_, Eigen::MatrixXd A_, Eigen::VectorXd B1_,
                               Eigen::MatrixXd B2_, Eigen::RowVectorXd C1_, Eigen::MatrixXd C2_,
                               double D11_, Eigen::RowVectorXd D12_, Eigen::VectorXd D21_,
                               Eigen::MatrixXd D22_, std::vector<double> internal_delays_,
                               std::vector<double> input_delays_,
                               std::vector<double> output_delays_)
    : F(std::move(F_)),
      A(std::move(A_)),
      B1(std::move(B1_)),
      B2(std::move(B2_)),
      C1(std::move(C1_)),
      C2(std::move(C2_)),
      D11(D11_),
      D12(std::move(D12_)),
      D21(std::move(D21_)),
      D22(std::move(D22_)),
      internal_delays(std::move(internal_delays_)),
      input_delays(std::move(input_delays_)),
      output_delays(std::move(output_delays_)) {
    const auto nx = F.rows();
    const auto k = static_cast<Eigen::Index>(internal_delays.size());
    require(F.cols() == nx, "LftDelaySystem: F must be square");
    require(A.rows() == nx && A.cols() == nx, "LftDelaySystem: A must be n_x x n_x");
    require(B1.rows() == nx, "LftDelaySystem: B1 must have n_x rows");
    require(B2.rows() == nx && B2.cols() == k, "LftDelaySystem: B2 must be n_x x k");
    require(C1.cols() == nx, "LftDelaySystem: C1 must have n_x columns");
    require(C2.rows() == k && C2.cols() == nx, "LftDelaySystem: C2 must be k x n_x");
    require(D12.cols() == k, "LftDelaySystem: D12 must have k columns");
    require(D21.rows() == k, "LftDelaySystem: D21 must have k rows");
    require(D22.rows() == k && D22.cols() == k, "LftDelaySystem: D22 must be k x k");
    for (double tau : internal_delays) {
        require(std::isfinite(tau) && tau > 0.0, "LftDelaySystem: internal delays must be positive");
    }
    require(input_delays.size() <= 1, "LftDelaySystem: input_delays must hold at most one entry");
    require(output_delays.size() <= 1, "LftDelaySystem: output_delays must hold at most one entry");
    for (double tau : input_delays) {
        require(std::isfinite(tau) && tau >= 0.0, "LftDelaySystem: input delay must be nonnegative");
    }
    for (double tau : output_delays) {
        require(std::isfinite(tau) && tau >= 0.0,
                "LftDelaySystem: output delay must be nonnegative");
    }
}

LftDelaySystem absorb_channel_delays(const LftDelaySystem& sys) {
    LftDelaySystem out = sys;

    const double tau_in = out.input_delays.empty() ? 0.0 : out.input_delays.front();
    out.input_delays.clear();
    if (tau_in > 0.0) {
        // New channel z_new = u, w_new = u(t - tau_in); every former use of u
        // is rerouted through w_new.
        const auto k = static_cast<Eigen::Index>(out.internal_delays.size());
        Eigen::MatrixXd B2(out.B2.rows(), k + 1);
        B2 << out.B2, out.B1;
        Eigen::RowVectorXd D12(k + 1);
        D12 << out.D12, out.D11;
        Eigen::MatrixXd D22(k + 1, k + 1);
        D22.setZero();
        D22.topLeftCorner(k, k) = out.D22;
        D22.topRightCorner(k, 1) = out.D21;
        Eigen::MatrixXd C2(k + 1, out.state_dim());
        C2 << out.C2, Eigen::RowVectorXd::Zero(out.state_dim());
        Eigen::VectorXd D21(k + 1);
        D21.setZero();
        D21(k) = 1.0;

        out.B1.setZero();
        out.D11 = 0.0;
        out.B2 = std::move(B2);
        out.C2 = std::move(C2);
        out.D12 = std::move(D12);
        out.D21 = std::move(D21);
        out.D22 = std::move(D22);
        out.internal_delays.push_back(tau_in);
    }

    const double tau_out = out.output_delays.empty() ? 0.0 : out.output_delays.front();
    out.output_delays.clear();
    if (tau_out > 0.0) {
        // New channel z_new = (undelayed output expression), y = w_new.
        const auto k = static_cast<Eigen::Index>(out.internal_delays.size());
        Eigen::MatrixXd C2(k + 1, out.state_dim());
        C2 << out.C2, out.C1;
        Eigen::VectorXd D21(k + 1);
        D21 << out.D21, out.D11;
        Eigen::MatrixXd D22(k + 1, k + 1);
        D22.setZero();
        D22.topLeftCorner(k, k) = out.D22;
        D22.bottomLeftCorner(1, k) = out.D12;
        Eigen::MatrixXd B2(out.B2.rows(), k + 1);
        B2 << out.B2, Eigen::VectorXd::Zero(out.state_dim());

        out.C1.setZero();
        out.D11 = 0.0;
        Eigen::RowVectorXd D12(k + 1);
        D12.setZero();
        D12(k) = 1.0;
        out.B2 = std::move(B2);
        out.C2 = std::move(C2);
        out.D12 = std::move(D12);
        out.D21 = std::move(D21);
        out.D22 = std::move(D22);
        out.internal_delays.push_back(tau_out);
    }

    return out;
}

DdaeSystem lft_to_ddae(const LftDelaySystem& input) {
    const LftDelaySystem sys = absorb_channel_delays(input);
    const int nx = sys.state_dim();
    const int k = sys.channel_count();
    const int n = nx + 1 + 2 * k;

    // Augmented state columns [x; gamma_u; w; z]; equation rows ordered as
    // (dynamics, z definition, w definition, gamma_u definition).
    const int cx = 0, cg = nx, cw = nx + 1, cz = nx + 1 + k;
    const int rx = 0, rz = nx, rw = nx + k, rg = nx + 2 * k;

    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
    E.block(rx, cx, nx, nx) = sys.F;

    Eigen::MatrixXd A0 = Eigen::MatrixXd::Zero(n, n);
    A0.block(rx, cx, nx, nx) = sys.A;
    A0.block(rx, cg, nx, 1) = sys.B1;
    A0.block(rx, cw, nx, k) = sys.B2;
    // z rows: C2 x + D21 gamma_u + D22 w - z = 0.
    A0.block(rz, cx, k, nx) = sys.C2;
    A0.block(rz, cg, k, 1) = sys.D21;
    A0.block(rz, cw, k, k) = sys.D22;
    A0.block(rz, cz, k, k) = -Eigen::MatrixXd::Identity(k, k);
    // w rows: -w + sum_i S_i z(t - tau_i) = 0 (delay terms added below).
    A0.block(rw, cw, k, k) = -Eigen::MatrixXd::Identity(k, k);
    // gamma_u row: -gamma_u + u = 0.
    A0(rg, cg) = -1.0;

    // One delay term per distinct channel delay; the selector picks the
    // channels sharing that delay.
    std::vector<DelayTerm> terms;
    terms.push_back(DelayTerm{0.0, A0});
    for (int i = 0; i < k; ++i) {
        const double tau = sys.internal_delays[static_cast<size_t>(i)];
        Eigen::MatrixXd Ai = Eigen::MatrixXd::Zero(n, n);
        Ai(rw + i, cz + i) = 1.0;
        terms.push_back(DelayTerm{tau, Ai});
    }

    Eigen::VectorXd B = Eigen::VectorXd::Zero(n);
    B(rg) = 1.0;
    Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(n);
    C.segment(cx, nx) = sys.C1;
    C(cg) = sys.D11;
    C.segment(cw, k) = sys.D12;

    return DdaeSystem(std::move(E), std::move(terms), std::move(B), std::move(C));
}

NullspaceBases nullspace_bases(const DdaeSystem& sys, double rank_tol) {
    const int n = sys.dim();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
    const double threshold = rank_tol * (smax > 0.0 ? smax : 1.0);

    int nu = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) < threshold) ++nu;
    }
    if (nu == n) throw ConstructionError("nullspace_bases: E is numerically zero (nu = n)");

    NullspaceBases bases;
    bases.nu = nu;
    bases.U = svd.matrixU().rightCols(nu);
    bases.V = svd.matrixV().rightCols(nu);
    return bases;
}

CausalityCheck check_causality(const DdaeSystem& sys, const NullspaceBases& bases) {
    if (bases.nu == 0) return CausalityCheck{true, 1.0};
    const Eigen::MatrixXd M = bases.U.transpose() * sys.terms.front().coeff * bases.V;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sigma = svd.singularValues();
    const double smax = sigma(0);
    const double smin = sigma(sigma.size() - 1);
    const double rcond = smax > 0.0 ? smin / smax : 0.0;
    return CausalityCheck{rcond > kCausalityRcondFloor, rcond};
}

DdaeSystem series(const DdaeSystem& g1, const DdaeSystem& g2) {
    const int n1 = g1.dim(), n2 = g2.dim();
    const int n = n1 + n2;

    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
    E.topLeftCorner(n1, n1) = g1.E;
    E.bottomRightCorner(n2, n2) = g2.E;

    std::vector<DelayTerm> terms;
    for (double tau : merged_delays(g1, g2)) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        A.topLeftCorner(n1, n1) = term_at(g1, tau);
        A.bottomRightCorner(n2, n2) = term_at(g2, tau);
        if (tau == 0.0) A.bottomLeftCorner(n2, n1) = g2.B * g1.C;
        terms.push_back(DelayTerm{tau, std::move(A)});
    }

    Eigen::VectorXd B = Eigen::VectorXd::Zero(n);
    B.head(n1) = g1.B;
    Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(n);
    C.tail(n2) = g2.C;
    return DdaeSystem(std::move(E), std::move(terms), std::move(B), std::move(C));
}

DdaeSystem parallel(const DdaeSystem& g1, const DdaeSystem& g2) {
    const int n1 = g1.dim(), n2 = g2.dim();
    const int n = n1 + n2;

    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
    E.topLeftCorner(n1, n1) = g1.E;
    E.bottomRightCorner(n2, n2) = g2.E;

    std::vector<DelayTerm> terms;
    for (double tau : merged_delays(g1, g2)) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        A.topLeftCorner(n1, n1) = term_at(g1, tau);
        A.bottomRightCorner(n2, n2) = term_at(g2, tau);
        terms.push_back(DelayTerm{tau, std::move(A)});
    }

    Eigen::VectorXd B(n);
    B << g1.B, g2.B;
    Eigen::RowVectorXd C(n);
    C << g1.C, g2.C;
    return DdaeSystem(std::move(E), std::move(terms), std::move(B), std::move(C));
}

DdaeSystem feedback(const DdaeSystem& g1, const DdaeSystem& g2, int sign) {
    require(sign == 1 || sign == -1, "feedback: sign must be +1 or -1");
    const int n1 = g1.dim(), n2 = g2.dim();
    const int n = n1 + n2 + 1;  // extra algebraic variable for the loop signal

    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
    E.topLeftCorner(n1, n1) = g1.E;
    E.block(n1, n1, n2, n2) = g2.E;

    std::vector<DelayTerm> terms;
    for (double tau : merged_delays(g1, g2)) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        A.topLeftCorner(n1, n1) = term_at(g1, tau);
        A.block(n1, n1, n2, n2) = term_at(g2, tau);
        if (tau == 0.0) {
            A.block(0, n1 + n2, n1, 1) = g1.B;           // g1 driven by the loop signal
            A.block(n1, 0, n2, n1) = g2.B * g1.C;        // g2 driven by y = C1 x1
            A.block(n1 + n2, n1, 1, n2) = sign * g2.C;   // loop: e = u + sign * C2 x2
            A(n1 + n2, n1 + n2) = -1.0;
        }
        terms.push_back(DelayTerm{tau, std::move(A)});
    }

    Eigen::VectorXd B = Eigen::VectorXd::Zero(n);
    B(n1 + n2) = 1.0;
    Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(n);
    C.head(n1) = g1.C;
    return DdaeSystem(std::move(E), std::move(terms), std::move(B), std::move(C));
}

}  // namespace delaynorm
