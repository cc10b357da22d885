#include "delaynorm/transfer.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>

namespace delaynorm {

namespace {

constexpr double kPoleRcondFloor = 1e-14;
constexpr Complex kImag{0.0, 1.0};

Eigen::PartialPivLU<Eigen::MatrixXcd> factor_pencil(const DdaeSystem& sys, Complex s,
                                                    const Eigen::MatrixXcd& pencil_value) {
    Eigen::MatrixXcd M = s * sys.E.cast<Complex>() - pencil_value;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const double rc = lu.rcond();
    if (!(rc > kPoleRcondFloor)) {
        std::ostringstream msg;
        msg << "transfer evaluation too close to a pole at s = (" << s.real() << ", " << s.imag()
            << "), rcond = " << rc;
        throw PoleProximityError(msg.str(), s);
    }
    return lu;
}

}  // namespace

PencilValue eval_delay_pencil(const DdaeSystem& sys, Complex s) {
    PencilValue out;
    out.value = sys.terms.front().coeff.cast<Complex>();
    out.derivative = Eigen::MatrixXcd::Zero(sys.dim(), sys.dim());
    for (size_t i = 1; i < sys.terms.size(); ++i) {
        const double tau = sys.terms[i].delay;
        const Complex w = std::exp(-s * tau);
        out.value += w * sys.terms[i].coeff;
        out.derivative -= (tau * w) * sys.terms[i].coeff;
    }
    return out;
}

Complex eval_transfer(const DdaeSystem& sys, Complex s) {
    const PencilValue pv = eval_delay_pencil(sys, s);
    auto lu = factor_pencil(sys, s, pv.value);
    const Eigen::VectorXcd x = lu.solve(sys.B.cast<Complex>());
    return (sys.C.cast<Complex>() * x)(0);
}

Complex eval_transfer_derivative(const DdaeSystem& sys, Complex s) {
    const PencilValue pv = eval_delay_pencil(sys, s);
    auto lu = factor_pencil(sys, s, pv.value);
    const Eigen::VectorXcd x = lu.solve(sys.B.cast<Complex>());
    const Eigen::MatrixXcd inner = sys.E.cast<Complex>() - pv.derivative;
    const Eigen::VectorXcd y = lu.solve(inner * x);
    return -(sys.C.cast<Complex>() * y)(0);
}

Complex eval_extremum_function(const DdaeSystem& sys, Complex s) {
    const Complex g_pos = eval_transfer(sys, s);
    const Complex gp_pos = eval_transfer_derivative(sys, s);
    const Complex g_neg = eval_transfer(sys, -s);
    const Complex gp_neg = eval_transfer_derivative(sys, -s);
    return gp_pos * g_neg - gp_neg * g_pos;
}

ExtremumFunctionRealization::ExtremumFunctionRealization(const DdaeSystem& sys) : sys_(sys) {
    const int n = sys.dim();
    Ez_ = Eigen::MatrixXd::Zero(6 * n, 6 * n);
    const double sign[6] = {-1, 1, 1, -1, 1, 1};
    for (int b = 0; b < 6; ++b) Ez_.block(b * n, b * n, n, n) = sign[b] * sys.E;

    Bz_ = Eigen::VectorXd::Zero(6 * n);
    Bz_.segment(0, n) = sys.B;
    Bz_.segment(3 * n, n) = sys.B;

    Cz_ = Eigen::RowVectorXd::Zero(6 * n);
    Cz_.segment(n, n) = sys.C;
    Cz_.segment(4 * n, n) = sys.C;
}

Eigen::MatrixXcd ExtremumFunctionRealization::Az(Complex s) const {
    const int n = sys_.dim();
    const PencilValue pos = eval_delay_pencil(sys_, s);
    const PencilValue neg = eval_delay_pencil(sys_, -s);
    const Eigen::MatrixXcd Ec = sys_.E.cast<Complex>();
    const Eigen::MatrixXcd BC = (sys_.B * sys_.C).cast<Complex>();

    // Template block for one half of the realization:
    //   [ A(-s)   0      0     ]
    //   [ 0       A(s)   A'(s)-E ]
    //   [ BC      0      A(s)  ]
    // The second half carries the negated template evaluated at -s; the sign
    // flip is what makes the difference of the two product terms come out
    // (fixed against the direct evaluation of the extremum function).
    Eigen::MatrixXcd Az = Eigen::MatrixXcd::Zero(6 * n, 6 * n);
    auto fill_half = [&](int base, const PencilValue& at_s, const PencilValue& at_neg_s,
                         double scale) {
        Az.block(base + 0 * n, base + 0 * n, n, n) = scale * at_neg_s.value;
        Az.block(base + 1 * n, base + 1 * n, n, n) = scale * at_s.value;
        Az.block(base + 1 * n, base + 2 * n, n, n) = scale * (at_s.derivative - Ec);
        Az.block(base + 2 * n, base + 0 * n, n, n) = scale * BC;
        Az.block(base + 2 * n, base + 2 * n, n, n) = scale * at_s.value;
    };
    fill_half(0, pos, neg, 1.0);
    fill_half(3 * n, neg, pos, -1.0);
    return Az;
}

Complex ExtremumFunctionRealization::eval(Complex s) const {
    Eigen::MatrixXcd M = s * Ez_.cast<Complex>() - Az(s);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const double rc = lu.rcond();
    if (!(rc > kPoleRcondFloor)) {
        std::ostringstream msg;
        msg << "extremum-function realization singular at s = (" << s.real() << ", " << s.imag()
            << ")";
        throw PoleProximityError(msg.str(), s);
    }
    const Eigen::VectorXcd x = lu.solve(Bz_.cast<Complex>());
    return (Cz_.cast<Complex>() * x)(0);
}

ExtremumFunctionRealization build_extremum_realization(const DdaeSystem& sys) {
    return ExtremumFunctionRealization(sys);
}

AsymptoticSystem build_asymptotic_system(const DdaeSystem& sys, const NullspaceBases& bases) {
    AsymptoticSystem out;
    if (bases.nu == 0) {
        out.M0.resize(0, 0);
        return out;
    }
    out.M0 = bases.U.transpose() * sys.terms.front().coeff * bases.V;
    for (size_t i = 1; i < sys.terms.size(); ++i) {
        out.M.emplace_back(sys.terms[i].delay, bases.U.transpose() * sys.terms[i].coeff * bases.V);
    }
    out.b = bases.U.transpose() * sys.B;
    out.c = sys.C * bases.V;
    return out;
}

namespace {

Complex eval_asymptotic_inner(const AsymptoticSystem& asys, const std::vector<Complex>& factors) {
    Eigen::MatrixXcd M = asys.M0.cast<Complex>();
    for (size_t i = 0; i < asys.M.size(); ++i) M += factors[i] * asys.M[i].second.cast<Complex>();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    if (!(lu.rcond() > kPoleRcondFloor)) {
        throw StabilityError(
            "asymptotic pencil singular: the asymptotic transfer function is unbounded "
            "(strong stability violated)");
    }
    const Eigen::VectorXcd x = lu.solve(asys.b.cast<Complex>());
    return -(asys.c.cast<Complex>() * x)(0);
}

}  // namespace

Complex eval_asymptotic_transfer(const AsymptoticSystem& asys, const std::vector<double>& theta) {
    if (asys.empty()) return Complex{0.0, 0.0};
    if (theta.size() != asys.M.size()) {
        throw ConstructionError("asymptotic transfer: one angle per delay term required");
    }
    std::vector<Complex> factors(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) factors[i] = std::exp(kImag * theta[i]);
    return eval_asymptotic_inner(asys, factors);
}

Complex eval_asymptotic_transfer(const DdaeSystem& sys, const NullspaceBases& bases, Complex s) {
    const AsymptoticSystem asys = build_asymptotic_system(sys, bases);
    if (asys.empty()) return Complex{0.0, 0.0};
    std::vector<Complex> factors(asys.M.size());
    for (size_t i = 0; i < asys.M.size(); ++i) factors[i] = std::exp(-s * asys.M[i].first);
    return eval_asymptotic_inner(asys, factors);
}

Complex eval_asymptotic_transfer(const DdaeSystem& sys, const NullspaceBases& bases,
                                 const std::vector<double>& theta) {
    return eval_asymptotic_transfer(build_asymptotic_system(sys, bases), theta);
}

}  // namespace delaynorm
