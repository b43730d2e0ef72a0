#pragma once

#include <random>

#include <bit>
#include <cmath>

#include "dil/linalg.hpp"
#include "dil/tuple.hpp"

namespace dil::testing {

inline CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> nd;
    CMatrix A(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) A(i, j) = cplx(nd(rng), nd(rng));
    return A;
}

inline CMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
    CMatrix A = random_matrix(rng, n, n);
    return 0.5 * (A + A.adjoint());
}

// Unitary from the QR factor of a Gaussian matrix.
inline CMatrix random_unitary(std::mt19937_64& rng, Eigen::Index n) {
    CMatrix A = random_matrix(rng, n, n);
    Eigen::HouseholderQR<CMatrix> qr(A);
    return qr.householderQ() * CMatrix::Identity(n, n);
}

inline double opnorm(const CMatrix& A) { return spectral_norm(A); }

// Oracle: enumerate every F subset of G and sum (-1)^{|F|} T_F T_F^*.
inline CMatrix brute_force_delta(const OperatorTuple& T, SubsetMask G) {
    CMatrix D = CMatrix::Zero(T.dim(), T.dim());
    for (std::uint32_t f = 0; f < (1u << T.n()); ++f) {
        if ((f & ~G.bits) != 0) continue;
        CMatrix P = CMatrix::Identity(T.dim(), T.dim());
        for (int i = 1; i <= T.n(); ++i)
            if (f & (1u << (i - 1))) P = P * T.op(i);
        D += (std::popcount(f) % 2 ? -1.0 : 1.0) * P * P.adjoint();
    }
    return D;
}

inline CMatrix jordan() {
    CMatrix J = CMatrix::Zero(2, 2);
    J(0, 1) = 1.0;
    return J;
}

inline OperatorTuple random_diagonal(std::mt19937_64& rng, int n, int d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<CMatrix> ops;
    for (int i = 0; i < n; ++i) {
        CVector v(d);
        for (int k = 0; k < d; ++k) v(k) = std::polar(std::sqrt(u(rng)), 2 * M_PI * u(rng));
        ops.push_back(v.asDiagonal());
    }
    return OperatorTuple(ops);
}

// Commuting tuple: polynomials in one random matrix, scaled to norm <= cap.
inline OperatorTuple random_poly_tuple(std::mt19937_64& rng, int n, int d, double cap) {
    CMatrix A = random_matrix(rng, d, d);
    A /= spectral_norm(A);
    std::normal_distribution<double> nd;
    std::vector<CMatrix> ops;
    for (int i = 0; i < n; ++i) {
        CMatrix P = cplx(nd(rng), nd(rng)) * CMatrix::Identity(d, d) + cplx(nd(rng), nd(rng)) * A +
                    cplx(nd(rng), nd(rng)) * A * A;
        ops.push_back(P * (cap / spectral_norm(P)));
    }
    return OperatorTuple(ops);
}


}  // namespace dil::testing
