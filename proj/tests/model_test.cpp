#include "delaynorm/model.hpp"

#include <complex>
#include <random>

#include "delaynorm/transfer.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace delaynorm;
using oracles::Complex;

namespace {
constexpr Complex kImag{0.0, 1.0};

DdaeSystem scalar_system(double a, double b, double c) {
    Eigen::MatrixXd E(1, 1), A0(1, 1);
    E << 1;
    A0 << a;
    Eigen::VectorXd B(1);
    B << b;
    Eigen::RowVectorXd C(1);
    C << c;
    return DdaeSystem(E, {{0.0, A0}}, B, C);
}
}  // namespace

TEST_CASE("construction normalizes the term list") {
    Eigen::MatrixXd E(1, 1), A0(1, 1), A1(1, 1), A1b(1, 1);
    E << 1;
    A0 << -1;
    A1 << 0.25;
    A1b << 0.5;

    SUBCASE("duplicate delays merge by addition") {
        DdaeSystem sys(E, {{0.0, A0}, {1.0, A1}, {1.0, A1b}}, Eigen::VectorXd::Ones(1),
                       Eigen::RowVectorXd::Ones(1));
        REQUIRE(sys.delay_count() == 1);
        CHECK(sys.terms[1].coeff(0, 0) == doctest::Approx(0.75));
    }
    SUBCASE("missing zero-delay term is inserted") {
        DdaeSystem sys(E, {{1.0, A1}}, Eigen::VectorXd::Ones(1), Eigen::RowVectorXd::Ones(1));
        REQUIRE(sys.terms.front().delay == 0.0);
        CHECK(sys.terms.front().coeff.isZero());
        CHECK(sys.delay_count() == 1);
    }
    SUBCASE("terms are sorted ascending") {
        DdaeSystem sys(E, {{2.0, A1}, {0.0, A0}, {1.0, A1b}}, Eigen::VectorXd::Ones(1),
                       Eigen::RowVectorXd::Ones(1));
        CHECK(sys.terms[1].delay == 1.0);
        CHECK(sys.terms[2].delay == 2.0);
    }
    SUBCASE("negative delay rejected") {
        CHECK_THROWS_AS(DdaeSystem(E, {{-1.0, A1}}, Eigen::VectorXd::Ones(1),
                                   Eigen::RowVectorXd::Ones(1)),
                        ConstructionError);
    }
    SUBCASE("dimension mismatch rejected") {
        CHECK_THROWS_AS(DdaeSystem(E, {{0.0, Eigen::MatrixXd::Zero(2, 2)}},
                                   Eigen::VectorXd::Ones(1), Eigen::RowVectorXd::Ones(1)),
                        ConstructionError);
    }
}

TEST_CASE("lft_to_ddae: delay-free block") {
    Eigen::MatrixXd F(1, 1), A(1, 1);
    F << 1;
    A << -1;
    LftDelaySystem lft(F, A, Eigen::VectorXd::Ones(1), Eigen::MatrixXd(1, 0),
                       Eigen::RowVectorXd::Ones(1), Eigen::MatrixXd(0, 1), 0.0,
                       Eigen::RowVectorXd(0), Eigen::VectorXd(0), Eigen::MatrixXd(0, 0), {});
    const DdaeSystem sys = lft_to_ddae(lft);

    REQUIRE(sys.dim() == 2);
    CHECK(sys.E(0, 0) == 1.0);
    CHECK(sys.E(1, 1) == 0.0);
    CHECK(sys.E(0, 1) == 0.0);
    CHECK(sys.E(1, 0) == 0.0);

    for (double w : {0.0, 0.3, 1.7, 8.0}) {
        const Complex expected = 1.0 / (kImag * w + 1.0);
        CHECK(std::abs(eval_transfer(sys, kImag * w) - expected) < 1e-13);
    }
}

TEST_CASE("lft_to_ddae matches the loop-closure evaluation on random systems") {
    std::mt19937 rng(20240517);
    std::uniform_real_distribution<double> w_dist(-5.0, 5.0);
    for (int trial = 0; trial < 10; ++trial) {
        const LftDelaySystem lft = oracles::random_lft(rng);
        const DdaeSystem sys = lft_to_ddae(lft);
        for (int i = 0; i < 20; ++i) {
            const Complex s = kImag * w_dist(rng);
            const Complex expected = oracles::lft_loop_closure(lft, s);
            const Complex got = eval_transfer(sys, s);
            CHECK(std::abs(got - expected) <= 1e-10 * (1.0 + std::abs(expected)));
        }
    }
}

TEST_CASE("lft_to_ddae reproduces the two-delay plant's closed form") {
    // One state, two delay channels carrying the output back into the block.
    Eigen::MatrixXd F(1, 1), A(1, 1), B2(1, 2), C2(2, 1), D22(2, 2);
    F << 1;
    A << -1.1;
    B2 << -0.25, 0.5;
    C2 << 1, 1;
    D22 << 0.25, -0.5, 0.25, -0.5;
    Eigen::VectorXd B1(1), D21(2);
    B1 << 1;
    D21 << 1, 1;
    Eigen::RowVectorXd C1(1), D12(2);
    C1 << 1;
    D12 << 0.25, -0.5;
    LftDelaySystem lft(F, A, B1, B2, C1, C2, 1.0, D12, D21, D22, {1.0, 2.0});
    const DdaeSystem sys = lft_to_ddae(lft);

    for (double w : {0.0, 0.4, 1.3, 2.9, 6.0}) {
        const Complex s = kImag * w;
        const Complex expected = oracles::tsh_closed_form(s);
        CHECK(std::abs(eval_transfer(sys, s) - expected) <= 1e-12 * (1.0 + std::abs(expected)));
    }
}

TEST_CASE("nullspace_bases") {
    SUBCASE("coordinate nullspace") {
        Eigen::MatrixXd E = Eigen::MatrixXd::Identity(3, 3);
        E(2, 2) = 0.0;
        DdaeSystem sys(E, {{0.0, Eigen::MatrixXd::Identity(3, 3)}}, Eigen::VectorXd::Ones(3),
                       Eigen::RowVectorXd::Ones(3));
        const NullspaceBases bases = nullspace_bases(sys);
        REQUIRE(bases.nu == 1);
        CHECK(std::abs(std::abs(bases.U(2, 0)) - 1.0) < 1e-14);
        CHECK(std::abs(std::abs(bases.V(2, 0)) - 1.0) < 1e-14);
    }
    SUBCASE("nonsingular E") {
        const NullspaceBases bases = nullspace_bases(oracles::first_order_system());
        CHECK(bases.nu == 0);
        CHECK(bases.U.cols() == 0);
        CHECK(bases.V.cols() == 0);
    }
    SUBCASE("augmentation size from lft_to_ddae") {
        std::mt19937 rng(7);
        const LftDelaySystem lft = oracles::random_lft(rng);
        const DdaeSystem sys = lft_to_ddae(lft);
        const NullspaceBases bases = nullspace_bases(sys);
        CHECK(bases.nu == sys.dim() - lft.state_dim());
    }
    SUBCASE("numerically zero E rejected") {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(1, 1);
        DdaeSystem sys(E, {{0.0, -Eigen::MatrixXd::Identity(1, 1)}}, Eigen::VectorXd::Ones(1),
                       Eigen::RowVectorXd::Ones(1));
        CHECK_THROWS_AS(nullspace_bases(sys), ConstructionError);
    }
    SUBCASE("orthonormality and annihilation") {
        const DdaeSystem sys = oracles::tsh_system();
        const NullspaceBases bases = nullspace_bases(sys);
        const double scale = std::max(1.0, sys.E.norm());
        CHECK((bases.U.transpose() * sys.E).norm() <= 1e-12 * scale);
        CHECK((sys.E * bases.V).norm() <= 1e-12 * scale);
        CHECK((bases.U.transpose() * bases.U - Eigen::MatrixXd::Identity(bases.nu, bases.nu))
                  .norm() <= 1e-12);
        CHECK((bases.V.transpose() * bases.V - Eigen::MatrixXd::Identity(bases.nu, bases.nu))
                  .norm() <= 1e-12);
    }
}

TEST_CASE("check_causality") {
    SUBCASE("nonsingular E is vacuously causal") {
        const DdaeSystem sys = oracles::first_order_system();
        const auto check = check_causality(sys, nullspace_bases(sys));
        CHECK(check.causal);
        CHECK(check.rcond == 1.0);
    }
    SUBCASE("shipped two-delay plant") {
        const DdaeSystem sys = oracles::tsh_system();
        const auto check = check_causality(sys, nullspace_bases(sys));
        CHECK(check.causal);
        CHECK(check.rcond == doctest::Approx(1.0));  // U^T A0 V = -1, scalar
    }
    SUBCASE("zeroed algebraic block fails") {
        Eigen::MatrixXd E(2, 2), A0(2, 2);
        E << 1, 0, 0, 0;
        A0 << -1, 0, 0, 0;  // algebraic row and column wiped out
        DdaeSystem sys(E, {{0.0, A0}}, Eigen::VectorXd::Ones(2), Eigen::RowVectorXd::Ones(2));
        const auto check = check_causality(sys, nullspace_bases(sys));
        CHECK_FALSE(check.causal);
        CHECK(check.rcond == 0.0);
    }
}

TEST_CASE("series/parallel/feedback transfer algebra") {
    const DdaeSystem g1 = scalar_system(-1.0, 1.0, 1.0);  // 1/(s+1)
    const DdaeSystem g2 = scalar_system(-2.0, 1.0, 1.0);  // 1/(s+2)

    SUBCASE("series is the product") {
        const DdaeSystem cascade = series(g1, g2);
        for (double w : {0.0, 0.5, 1.0, 3.0, 10.0}) {
            const Complex s = kImag * w;
            const Complex expected = 1.0 / ((s + 1.0) * (s + 2.0));
            CHECK(std::abs(eval_transfer(cascade, s) - expected) <= 1e-12);
        }
    }
    SUBCASE("parallel with the negated copy cancels") {
        DdaeSystem neg = scalar_system(-1.0, 1.0, -1.0);
        const DdaeSystem sum = parallel(g1, neg);
        for (double w : {0.0, 0.7, 2.0, 9.0}) {
            CHECK(std::abs(eval_transfer(sum, kImag * w)) <= 1e-13);
        }
    }
    SUBCASE("feedback sign convention") {
        const DdaeSystem closed = feedback(g1, g2, -1);
        for (double w : {0.0, 0.5, 2.0}) {
            const Complex s = kImag * w;
            const Complex G1 = 1.0 / (s + 1.0), G2 = 1.0 / (s + 2.0);
            const Complex expected = G1 / (1.0 + G2 * G1);
            CHECK(std::abs(eval_transfer(closed, s) - expected) <= 1e-12);
        }
        const DdaeSystem positive = feedback(g1, g2, 1);
        const Complex s{0.0, 0.5};
        const Complex G1 = 1.0 / (s + 1.0), G2 = 1.0 / (s + 2.0);
        CHECK(std::abs(eval_transfer(positive, s) - G1 / (1.0 - G2 * G1)) <= 1e-12);
    }
}

TEST_CASE("interconnection transfer equals scalar arithmetic at random points") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> w_dist(-20.0, 20.0);
    const DdaeSystem a = oracles::tsh_system();
    const DdaeSystem b = oracles::one_delay_system();

    const DdaeSystem cascade = series(a, b);
    const DdaeSystem sum = parallel(a, b);
    const DdaeSystem closed = feedback(b, a, -1);

    for (int i = 0; i < 50; ++i) {
        const Complex s = kImag * w_dist(rng);
        const Complex ga = eval_transfer(a, s);
        const Complex gb = eval_transfer(b, s);
        const Complex prod = eval_transfer(cascade, s);
        const Complex add = eval_transfer(sum, s);
        const Complex loop = eval_transfer(closed, s);
        CHECK(std::abs(prod - gb * ga) <= 1e-10 * (1.0 + std::abs(gb * ga)));
        CHECK(std::abs(add - (ga + gb)) <= 1e-10 * (1.0 + std::abs(ga + gb)));
        const Complex expected = gb / (1.0 + ga * gb);
        CHECK(std::abs(loop - expected) <= 1e-10 * (1.0 + std::abs(expected)));
    }
}

TEST_CASE("delays merge across interconnections") {
    const DdaeSystem a = oracles::one_delay_system();
    const DdaeSystem b = oracles::one_delay_system();
    const DdaeSystem cascade = series(a, b);
    CHECK(cascade.delay_count() == 1);  // both operands delay by 1.0
}

TEST_CASE("Smith predictor loop matches the scalar formula at s = 0") {
    Eigen::MatrixXd pE(2, 2), pA0(2, 2), pA1(2, 2);
    pE << 1, 0, 0, 0;
    pA0 << -1.0 / 37.0, 0, 0, -1;
    pA1 << 0, 0, 1, 0;
    Eigen::VectorXd pB(2);
    pB << 6.0 / 37.0, 0;
    Eigen::RowVectorXd pC(2);
    pC << 0, 1;
    const DdaeSystem plant(pE, {{0.0, pA0}, {106.0, pA1}}, pB, pC);

    Eigen::MatrixXd gE(1, 1), gA(1, 1);
    gE << 1;
    gA << -1.0 / 40.2;
    const DdaeSystem model(gE, {{0.0, gA}}, Eigen::VectorXd::Constant(1, 5.6 / 40.2),
                           Eigen::RowVectorXd::Ones(1));

    Eigen::MatrixXd dE = Eigen::MatrixXd::Zero(2, 2), dA0(2, 2), dA1(2, 2);
    dA0 << -1, 0, 0, -1;
    dA1 << 0, 0, 1, 0;
    Eigen::VectorXd dB(2);
    dB << 1, 0;
    Eigen::RowVectorXd dC(2);
    dC << 0, 1;
    const DdaeSystem model_delay(dE, {{0.0, dA0}, {93.9, dA1}}, dB, dC);

    Eigen::MatrixXd cE(2, 2), cA(2, 2);
    cE << 1, 0, 0, 0;
    cA << 0, 0, 0, -1;
    Eigen::VectorXd cB(2);
    cB << 1, 1;
    Eigen::RowVectorXd cC(2);
    cC << 1.0 / 80.0, 0.5;
    const DdaeSystem controller(cE, {{0.0, cA}}, cB, cC);

    Eigen::MatrixXd fE(1, 1), fA(1, 1);
    fE << 1;
    fA << -0.05;
    const DdaeSystem filter(fE, {{0.0, fA}}, Eigen::VectorXd::Constant(1, 0.05),
                            Eigen::RowVectorXd::Ones(1));

    Eigen::MatrixXd nE = Eigen::MatrixXd::Zero(1, 1), nA(1, 1);
    nA << -1;
    const DdaeSystem negate(nE, {{0.0, nA}}, -Eigen::VectorXd::Ones(1), Eigen::RowVectorXd::Ones(1));

    const DdaeSystem fp = series(plant, filter);
    const DdaeSystem gpdp = series(model_delay, model);
    const DdaeSystem fgpdp = series(gpdp, filter);
    const DdaeSystem minus_fgpdp = series(fgpdp, negate);
    const DdaeSystem path = parallel(parallel(model, fp), minus_fgpdp);
    const DdaeSystem loop = feedback(controller, path, -1);
    const DdaeSystem closed = series(loop, plant);

    CHECK(std::abs(eval_transfer(closed, Complex{0.0, 0.0})) ==
          doctest::Approx(std::abs(oracles::smith_scalar_oracle(Complex{0.0, 0.0})))
              .epsilon(1e-10));

    // Away from the integrator frequency the scalar loop formula must agree too.
    for (double w : {0.01, 0.05, 0.21}) {
        const Complex s = kImag * w;
        const Complex expected = oracles::smith_scalar_oracle(s);
        CHECK(std::abs(eval_transfer(closed, s) - expected) <=
              1e-9 * (1.0 + std::abs(expected)));
    }
}
