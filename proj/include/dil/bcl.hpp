#pragma once

#include <array>
#include <vector>

#include "dil/hardy.hpp"
#include "dil/tuple.hpp"

namespace dil {

/// Coordinates of D h in an orthonormal basis of the defect space: coords = basis^* D (rank x d).
struct DefectCoords {
    CMatrix coords;
    int rank = 0;
};

DefectCoords defect_coords(const OperatorTuple& T, SubsetMask G, const Tolerances& tol = default_tol());

/// Gamma maps coordinates of D_{1n} h to (coordinates of D_n h, coordinates of D_1 T_1^* h).
/// K' = D_n (+) D_1: the first rank_n coordinates belong to D_n, the remaining rank_1 to D_1.
struct GammaData {
    CMatrix gamma;
    int src_rank = 0;
    int dst_dim = 0;
    int rank_n = 0;
    int rank_1 = 0;
    double residual = 0.0;
    double isometry_defect = 0.0;
    DefectCoords c1n, cn, c1;
};

/// Requires T in class B_{1,n} and 1 in G, G inside {1..n-1}.
GammaData build_gamma(const OperatorTuple& T, SubsetMask G, double tol = 1e-8);

struct UPrimeData {
    CMatrix uprime;        // ambient x ambient, zero off Q
    CMatrix q_span;        // columns (D_n h, D_1 T_1^* h) over h = e_i
    CMatrix qtilde_span;   // columns (D_n T_n^* h, D_1 h)
    CMatrix q_basis;
    CMatrix qtilde_basis;
    double residual = 0.0;
    double isometry_defect = 0.0;
};

UPrimeData build_uprime(const OperatorTuple& T, SubsetMask G, const GammaData& g, double tol = 1e-8);

/// W'_j = W_{j,n} (+) W_{j,1} for j outside G in {2..n-1}, from the Douglas relations W^* D h = D T_j^* h.
/// Throws HypothesisViolated if some W'_j is not unitary (T_j must be a co-isometry).
std::vector<CMatrix> build_w_prime(const OperatorTuple& T, SubsetMask G, const GammaData& g, double tol = 1e-8);

struct LiftData {
    CMatrix h_basis;
    CMatrix htilde_basis;
    CMatrix u_dd;  // ambient x ambient, maps H onto H~, zero on the complement of H
    double residual = 0.0;
    double welldef_residual = 0.0;
    double intertwine_residual = 0.0;
    int rounds = 0;
};

/// Krylov closure of Q under the W's and their adjoints, with U'' fixed by W^a q -> W^a U' q.
LiftData lift_uprime(const CMatrix& uprime, const CMatrix& q_basis, const std::vector<CMatrix>& w_ops, double tol = 1e-8);

/// Unitary on K' extending U''; the complements are paired by deterministic orthonormal completions.
CMatrix complete_unitary_pair(const LiftData& lift, int ambient, double tol = 1e-8);

struct BCLData {
    int ambient_dim = 0;
    CMatrix P, U;
    CMatrix phi0, phi1, psi0, psi1;
    std::array<double, 3> identity_residual{};  // phi0 psi0, phi0 psi1 + phi1 psi0 - I, phi1 psi1
    double u1_block_residual = 0.0;
};

/// Phi(z) = (P + z1 P^perp) U, Psi(z) = U^* (P^perp + z1 P).
BCLData bcl_pair(const CMatrix& U, const CMatrix& P, double tol = 1e-12);

/// Projection onto the D_1 summand of K'.
CMatrix summand_projection(const GammaData& g);

struct FactorizationResidual {
    double phi = 0.0;  // (I(x)Gamma) Pi T_1^* vs M_Phi^* (I(x)Gamma) Pi
    double psi = 0.0;  // same with T_n, M_Psi
};

/// Rows restricted to z_1-degree <= N-1, where M_Phi^*, M_Psi^* are exact.
FactorizationResidual factorization_check(const OperatorTuple& T, SubsetMask G, const GammaData& g, const BCLData& b,
                                          int degree);

}  // namespace dil
