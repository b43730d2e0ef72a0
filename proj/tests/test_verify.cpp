#include <gtest/gtest.h>

#include <numbers>

#include "dil/gen.hpp"
#include "dil/verify.hpp"
#include "test_support.hpp"

using namespace dil;

namespace {

PolySample mono(int n, int degree, std::vector<int> k, cplx c = 1.0) {
    PolySample p{n, degree, {}};
    p.add(k, c);
    return p;
}

CMatrix diag(std::initializer_list<cplx> v) {
    CVector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (cplx a : v) x(i++) = a;
    return x.asDiagonal();
}

OperatorTuple sample_tuple() {
    return gen_poly_of_one({.seed = 11, .n = 3, .d = 3, .radius_cap = 0.5, .require_class = true}).T;
}

}  // namespace

TEST(EvalPoly, ConstantAndCoordinate) {
    const OperatorTuple T = sample_tuple();
    EXPECT_LT((eval_poly_at_tuple(mono(3, 0, {0, 0, 0}), T) - CMatrix::Identity(3, 3)).norm(), 1e-15);
    EXPECT_LT((eval_poly_at_tuple(mono(3, 1, {1, 0, 0}), T) - T.op(1)).norm(), 1e-15);
}

TEST(EvalPoly, OrderOfFactorsIsImmaterial) {
    const OperatorTuple T = sample_tuple();
    PolySample p = mono(3, 2, {2, 1, 1}, cplx(0.5, -1.0));
    const CMatrix want = cplx(0.5, -1.0) * T.op(3) * T.op(2) * T.op(1) * T.op(1);
    EXPECT_LT((eval_poly_at_tuple(p, T) - want).norm(), 1e-14);
    EXPECT_LT((T.op(1) * T.op(2) - T.op(2) * T.op(1)).norm(), 1e-14);
}

TEST(EvalPoly, ArityMismatch) {
    EXPECT_THROW(eval_poly_at_tuple(mono(2, 1, {1, 0}), sample_tuple()), Error);
}

TEST(SupOnTorus, ClosedForms) {
    EXPECT_NEAR(sup_on_torus(mono(2, 0, {0, 0}, cplx(3, 4)), 8), 5.0, 1e-14);
    EXPECT_NEAR(sup_on_torus(mono(2, 1, {1, 0}), 8), 1.0, 1e-14);
    PolySample p{2, 1, {}};
    for (auto k : std::vector<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}, {1, 1}}) p.add(k, 0.25);
    EXPECT_NEAR(sup_on_torus(p, 64), 1.0, 1e-3);
}

TEST(SupOnTorus, MatchesDirectGridEvaluation) {
    SplitMix64 rng(3);
    PolySample p = random_poly(rng, 3, 3, 16);
    const int g = 10;
    double best = 0.0;
    for (int a = 0; a < g; ++a)
        for (int b = 0; b < g; ++b)
            for (int c = 0; c < g; ++c) {
                auto z = [&](int t) { return std::polar(1.0, 2 * std::numbers::pi * t / g); };
                best = std::max(best, std::abs(p({z(a), z(b), z(c)})));
            }
    EXPECT_NEAR(sup_on_torus(p, g), best, 1e-12);
}

TEST(SupOnTorus, NestedGridsIncrease) {
    SplitMix64 rng(4);
    PolySample p = random_poly(rng, 2, 3, 8);
    EXPECT_LE(sup_on_torus(p, 8), sup_on_torus(p, 16) + 1e-15);
    EXPECT_LE(sup_on_torus(p, 16), sup_on_torus(p, 64) + 1e-15);
}

TEST(VonNeumann, ClassTupleRandomCubics) {
    const OperatorTuple T = sample_tuple();
    SplitMix64 rng(5);
    std::vector<PolySample> ps;
    for (int i = 0; i < 50; ++i) ps.push_back(random_poly(rng, 3, 3));
    ResidualLedger led = von_neumann_check(T, ps, {.grid = 64});
    EXPECT_EQ(led.entries().size(), 50u);
    EXPECT_TRUE(led.pass());
}

TEST(VonNeumann, NormalTupleAndPowers) {
    const OperatorTuple U({diag({std::polar(1.0, 0.4), std::polar(1.0, 2.9)}),
                           diag({std::polar(1.0, -1.3), std::polar(1.0, 0.1)})});
    SplitMix64 rng(6);
    std::vector<PolySample> ps;
    for (int i = 0; i < 20; ++i) ps.push_back(random_poly(rng, 2, 3));
    EXPECT_TRUE(von_neumann_check(U, ps).pass());
    // single contraction, z^m
    CMatrix J = CMatrix::Zero(2, 2);
    J(0, 1) = 1.0;
    const OperatorTuple T1({0.9 * J + 0.1 * CMatrix::Identity(2, 2)});
    std::vector<PolySample> powers;
    for (int m = 1; m <= 5; ++m) powers.push_back(mono(1, 5, {m}));
    EXPECT_TRUE(von_neumann_check(T1, powers).pass());
}

TEST(VonNeumann, ViolationIsReported) {
    // not a contraction, so no dilation; the checker must flag p = z
    const OperatorTuple T({2.0 * CMatrix::Identity(2, 2)}, default_tol(), false);
    EXPECT_FALSE(von_neumann_check(T, {mono(1, 1, {1})}).pass());
}

TEST(SignedIndices, Counts) {
    EXPECT_EQ(signed_indices(2, 1, 1).size(), 5u);
    EXPECT_EQ(signed_indices(2, 2, 4).size(), 25u);
    EXPECT_EQ(signed_indices(3, 1, 3).size(), 27u);
}

TEST(StarRegular, UnitaryTupleIsExact) {
    const CMatrix A = diag({std::polar(1.0, 0.4), std::polar(1.0, 2.9)});
    const CMatrix B = diag({std::polar(1.0, -1.3), std::polar(1.0, 0.1)});
    const OperatorTuple T({A, B});
    const CompressionFn W = matrix_compression({A, B}, CMatrix::Identity(2, 2));
    const auto alphas = signed_indices(2, 3, 6);
    EXPECT_TRUE(star_regular_residual(T, W, alphas, 1e-12).pass());
    EXPECT_TRUE(regular_residual(T, W, alphas, 1e-12).pass());
}

TEST(StarRegular, ZeroAlphaAndPlainDilation) {
    // truncated shift on three coordinates; compressed to e_0 it dilates the zero contraction
    CMatrix S = CMatrix::Zero(3, 3);
    S(1, 0) = 1.0;
    S(2, 1) = 1.0;
    CMatrix E = CMatrix::Zero(3, 1);
    E(0, 0) = 1.0;
    const OperatorTuple T({CMatrix::Zero(1, 1)});
    const CompressionFn W = matrix_compression({S}, E);
    EXPECT_TRUE(star_regular_residual(T, W, {{0}, {1}, {2}, {-1}}, 1e-15).pass());
    // a wrong target must not pass
    const OperatorTuple Bad({CMatrix::Constant(1, 1, 0.5)});
    EXPECT_FALSE(star_regular_residual(Bad, W, {{1}}, 1e-6).pass());
}
