#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dil/error.hpp"

namespace dil {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct Tolerances {
    double eig = 1e-12;
    double rank = 1e-10;
    double clamp = 1e-10;
    double herm = 1e-10;
    double contr = 1e-10;
    double comm = 1e-10;
};

inline const Tolerances& default_tol() {
    static const Tolerances t{};
    return t;
}

struct HermEigen {
    Eigen::VectorXd eigenvalues;  // ascending
    CMatrix eigenvectors;         // orthonormal columns
};

/// Record of negative eigenvalues that were clamped to zero.
struct ClampInfo {
    int count = 0;
    double most_negative = 0.0;
    double scale = 0.0;
};

bool all_finite(const CMatrix& A);
CMatrix adjoint(const CMatrix& A);
double frob_norm(const CMatrix& A);

/// Cyclic Jacobi eigensolver for Hermitian matrices.
HermEigen herm_eigen(const CMatrix& A, double tol_herm = 1e-10, int max_sweeps = 100);

CMatrix psd_sqrt(const CMatrix& A, double clamp_tol = 1e-10, ClampInfo* clamp = nullptr);

/// Orthonormal basis of the column space; singular values below rank_tol*sigma_max are dropped.
CMatrix range_basis(const CMatrix& A, double rank_tol = 1e-10);

/// Extends k orthonormal columns of height m to an m x m unitary.
CMatrix unitary_complete(const CMatrix& V, double tol_iso = 1e-10);

/// L with L L^* = G; column count equals numerical rank.
CMatrix pivoted_cholesky(const CMatrix& G, double clamp_tol = 1e-10, ClampInfo* clamp = nullptr);

double spectral_norm(const CMatrix& A);

/// Power iteration on A; throws NoConvergence past the cap.
double spectral_radius(const CMatrix& A, int max_iter = 20000, double rel_tol = 1e-12);

/// Upper bound ||A^m||^{1/m} with m a power of two; fallback for spectral_radius.
double spectral_radius_bound(const CMatrix& A, int log2_m = 10);

struct LeastSquaresResult {
    CMatrix map;
    double residual = 0.0;
};

/// Minimises ||M X - Y|| over maps on ran X, extended by zero on its complement.
LeastSquaresResult least_squares_map(const CMatrix& X, const CMatrix& Y, double rank_tol = 1e-10);

}  // namespace dil
