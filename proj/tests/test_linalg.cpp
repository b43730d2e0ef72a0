#include <gtest/gtest.h>

#include "dil/linalg.hpp"
#include "test_support.hpp"

using namespace dil;
using dil::testing::random_hermitian;
using dil::testing::random_matrix;
using dil::testing::random_unitary;

namespace {

CMatrix diag(std::initializer_list<double> v) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) d(i++) = x;
    return d.cast<cplx>().asDiagonal();
}

}  // namespace

TEST(HermEigen, IdentityHasUnitEigenvalues) {
    HermEigen he = herm_eigen(CMatrix::Identity(3, 3));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(he.eigenvalues(i), 1.0, 1e-15);
    EXPECT_LE((he.eigenvectors.adjoint() * he.eigenvectors - CMatrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(HermEigen, DiagonalSortedAscending) {
    HermEigen he = herm_eigen(diag({2.0, -1.0}));
    EXPECT_DOUBLE_EQ(he.eigenvalues(0), -1.0);
    EXPECT_DOUBLE_EQ(he.eigenvalues(1), 2.0);
}

TEST(HermEigen, RandomReconstructionAndOracle) {
    std::mt19937_64 rng(11);
    for (int n : {1, 2, 6, 17, 40}) {
        CMatrix A = random_hermitian(rng, n);
        HermEigen he = herm_eigen(A);
        const CMatrix& V = he.eigenvectors;
        double nrm = spectral_norm(A);
        EXPECT_LE((V * he.eigenvalues.cast<cplx>().asDiagonal() * V.adjoint() - A).norm(), 1e-12 * std::max(1.0, nrm));
        EXPECT_LE((V.adjoint() * V - CMatrix::Identity(n, n)).norm(), 1e-12);
        for (int i = 0; i < n; ++i) {
            EXPECT_LE((A * V.col(i) - he.eigenvalues(i) * V.col(i)).norm(), 1e-12 * nrm);
            if (i > 0) EXPECT_LE(he.eigenvalues(i - 1), he.eigenvalues(i));
        }
        // independent oracle: Eigen's tridiagonal QR solver
        Eigen::SelfAdjointEigenSolver<CMatrix> ref(A);
        EXPECT_LE((ref.eigenvalues() - he.eigenvalues).norm(), 1e-11 * nrm);
    }
}

TEST(HermEigen, RejectsNonHermitian) {
    CMatrix A(2, 2);
    A << 1.0, 2.0, 0.0, 1.0;
    try {
        herm_eigen(A);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotHermitian);
    }
}

TEST(PsdSqrt, ZeroAndDiagonal) {
    EXPECT_EQ(psd_sqrt(CMatrix::Zero(3, 3)).norm(), 0.0);
    EXPECT_LE((psd_sqrt(diag({4.0, 9.0})) - diag({2.0, 3.0})).norm(), 1e-14);
}

TEST(PsdSqrt, KnownFactor) {
    std::mt19937_64 rng(3);
    for (int n : {2, 5, 9}) {
        CMatrix B = random_matrix(rng, n, n);
        CMatrix A = B * B.adjoint();
        CMatrix S = psd_sqrt(A);
        EXPECT_LE((S * S - A).norm(), 1e-10 * spectral_norm(A));
        EXPECT_LE((S - S.adjoint()).norm(), 1e-14 * S.norm());
        EXPECT_GE(herm_eigen(S).eigenvalues(0), -1e-12);
    }
}

TEST(PsdSqrt, ClampsTinyNegativeAndRejectsLarge) {
    ClampInfo info;
    CMatrix S = psd_sqrt(diag({1.0, -1e-12}), 1e-10, &info);
    EXPECT_EQ(info.count, 1);
    EXPECT_LT(info.most_negative, 0.0);
    EXPECT_NEAR(std::abs(S(1, 1)), 0.0, 1e-15);
    try {
        psd_sqrt(diag({1.0, -1e-3}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotPSD);
    }
}

TEST(RangeBasis, Cases) {
    EXPECT_EQ(range_basis(CMatrix::Identity(2, 2)).cols(), 2);
    EXPECT_EQ(range_basis(CMatrix::Zero(3, 3)).cols(), 0);

    std::mt19937_64 rng(5);
    CVector u = random_matrix(rng, 4, 1).col(0), v = random_matrix(rng, 4, 1).col(0);
    CMatrix Q = range_basis(u * v.adjoint());
    ASSERT_EQ(Q.cols(), 1);
    EXPECT_NEAR(std::abs(Q.col(0).dot(u)), u.norm(), 1e-12 * u.norm());

    for (int r = 1; r <= 5; ++r) {
        CMatrix A = random_matrix(rng, 7, r) * random_matrix(rng, r, 7);
        CMatrix B = range_basis(A);
        ASSERT_EQ(B.cols(), r);
        EXPECT_LE((B.adjoint() * B - CMatrix::Identity(r, r)).norm(), 1e-13);
        EXPECT_LE((A - B * (B.adjoint() * A)).norm(), 1e-12 * A.norm());
    }
}

TEST(UnitaryComplete, Cases) {
    CMatrix e1 = CMatrix::Identity(2, 2).leftCols(1);
    CMatrix U = unitary_complete(e1);
    EXPECT_LE((U.col(0) - e1.col(0)).norm(), 0.0);
    EXPECT_LE((U.adjoint() * U - CMatrix::Identity(2, 2)).norm(), 1e-14);

    std::mt19937_64 rng(7);
    CMatrix W = random_unitary(rng, 3);
    EXPECT_LE((unitary_complete(W) - W).norm(), 0.0);

    for (int trial = 0; trial < 20; ++trial) {
        CMatrix V = random_unitary(rng, 4).leftCols(2);
        CMatrix U4 = unitary_complete(V);
        EXPECT_LE((U4.adjoint() * U4 - CMatrix::Identity(4, 4)).norm(), 1e-12);
        EXPECT_EQ((U4.leftCols(2) - V).norm(), 0.0);
    }

    try {
        unitary_complete(2.0 * e1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotIsometric);
    }
}

TEST(PivotedCholesky, Cases) {
    CMatrix L = pivoted_cholesky(CMatrix::Identity(3, 3));
    EXPECT_LE((L * L.adjoint() - CMatrix::Identity(3, 3)).norm(), 1e-15);
    EXPECT_EQ(pivoted_cholesky(CMatrix::Zero(4, 4)).cols(), 0);

    std::mt19937_64 rng(9);
    CMatrix X = random_matrix(rng, 8, 5);
    CMatrix G = X.adjoint() * X;
    CMatrix F = pivoted_cholesky(G);
    EXPECT_EQ(F.cols(), 5);
    EXPECT_LE((F * F.adjoint() - G).norm(), 1e-11 * spectral_norm(G));

    // rank-deficient Gram
    CMatrix Y = random_matrix(rng, 3, 6);
    CMatrix H = Y.adjoint() * Y;
    CMatrix FH = pivoted_cholesky(H);
    EXPECT_EQ(FH.cols(), 3);
    EXPECT_LE((FH * FH.adjoint() - H).norm(), 1e-10 * spectral_norm(H));

    try {
        pivoted_cholesky(diag({1.0, -0.5}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotPSD);
    }
}

TEST(Norms, Examples) {
    EXPECT_NEAR(spectral_norm(CMatrix::Identity(3, 3)), 1.0, 1e-15);
    EXPECT_NEAR(spectral_radius(CMatrix::Identity(3, 3)), 1.0, 1e-15);

    CMatrix J(2, 2);
    J << 0.0, 1.0, 0.0, 0.0;
    EXPECT_NEAR(spectral_norm(J), 1.0, 1e-15);
    EXPECT_EQ(spectral_radius(J), 0.0);
    EXPECT_EQ(spectral_radius_bound(J), 0.0);

    std::mt19937_64 rng(13);
    CMatrix U = 0.5 * random_unitary(rng, 4);
    EXPECT_NEAR(spectral_norm(U), 0.5, 1e-12);
    EXPECT_NEAR(spectral_radius(U), 0.5, 1e-12);
}

TEST(Norms, OracleAgainstLibrarySvdAndEigenvalues) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix A = random_matrix(rng, 5, 3 + trial % 4);
        Eigen::JacobiSVD<CMatrix> svd(A);
        EXPECT_NEAR(spectral_norm(A), svd.singularValues()(0), 1e-12 * svd.singularValues()(0));

        CMatrix B = random_matrix(rng, 5, 5);
        Eigen::ComplexEigenSolver<CMatrix> ces(B);
        double rho = ces.eigenvalues().cwiseAbs().maxCoeff();
        double got = 0.0;
        try {
            got = spectral_radius(B, 200000, 1e-14);
        } catch (const Error&) {
            got = spectral_radius_bound(B, 16);
        }
        EXPECT_NEAR(got, rho, 1e-6 * rho);
        EXPECT_GE(spectral_radius_bound(B) + 1e-12, rho);
        EXPECT_LE(got, spectral_norm(B) + 1e-12);
    }
}

TEST(LeastSquares, Cases) {
    std::mt19937_64 rng(19);
    CMatrix A = random_matrix(rng, 3, 3);
    auto r1 = least_squares_map(CMatrix::Identity(3, 3), A);
    EXPECT_LE((r1.map - A).norm(), 1e-13);
    EXPECT_LE(r1.residual, 1e-13);

    auto r0 = least_squares_map(CMatrix::Zero(3, 4), CMatrix::Zero(2, 4));
    EXPECT_EQ(r0.map.norm(), 0.0);
    EXPECT_EQ(r0.residual, 0.0);

    // consistent: Y = M0 X with X of rank 3 in C^5
    CMatrix M0 = random_matrix(rng, 4, 5);
    CMatrix X = random_matrix(rng, 5, 3) * random_matrix(rng, 3, 9);
    CMatrix Y = M0 * X;
    auto r = least_squares_map(X, Y);
    EXPECT_LE(r.residual, 1e-10 * spectral_norm(Y));
    CMatrix P = range_basis(X);
    EXPECT_LE((r.map * P - M0 * P).norm(), 1e-10 * spectral_norm(M0));
    // zero on the orthogonal complement of ran X
    CMatrix Pc = unitary_complete(P).rightCols(2);
    EXPECT_LE((r.map * Pc).norm(), 1e-10 * spectral_norm(M0));
}

TEST(LinalgProperties, RandomizedInvariants) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 1 + static_cast<int>(rng() % 12);
        CMatrix A = random_hermitian(rng, n) * std::exp(static_cast<double>(rng() % 9) - 4.0);
        HermEigen he = herm_eigen(A);
        EXPECT_LE((he.eigenvectors * he.eigenvalues.cast<cplx>().asDiagonal() * he.eigenvectors.adjoint() - A).norm(),
                  1e-11 * std::max(1.0, spectral_norm(A)));
        CMatrix P = A * A.adjoint();
        CMatrix S = psd_sqrt(P);
        EXPECT_LE((S * S - P).norm(), 1e-10 * spectral_norm(P));
        CMatrix L = pivoted_cholesky(P);
        EXPECT_LE((L * L.adjoint() - P).norm(), 1e-10 * spectral_norm(P));
        int k = static_cast<int>(rng() % (n + 1));
        CMatrix V = random_unitary(rng, n).leftCols(k);
        CMatrix U = unitary_complete(V);
        EXPECT_LE((U.adjoint() * U - CMatrix::Identity(n, n)).norm(), 1e-12);
    }
}

TEST(RangeBasis, RankDeficientProductConverges) {
    std::mt19937_64 rng(77);
    CMatrix V = dil::testing::random_unitary(rng, 6);
    CMatrix q = dil::testing::random_unitary(rng, 6).leftCols(2);
    CMatrix A = V * q * q.adjoint();
    CMatrix B = range_basis(A);
    EXPECT_EQ(B.cols(), 2);
    EXPECT_LT((B * B.adjoint() * V * q - V * q).norm(), 1e-12);
    LeastSquaresResult ls = least_squares_map(q, V * q);
    EXPECT_LT(ls.residual, 1e-12);
}
