#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "dil/linalg.hpp"
#include "dil/tuple.hpp"

namespace dil {

using SpMatrix = Eigen::SparseMatrix<cplx>;

/// Degree-capped coefficient model of H^2_E(D^r).  Blocks are indexed by k in {0..N}^r in
/// lexicographic order (k_1 most significant); element (k, c) sits at flat_block(k)*e + c.
/// r = 0 is allowed and denotes the coefficient space E itself.
class TruncatedHardy {
public:
    TruncatedHardy(int vars, int degree, int coeff_dim);

    int vars() const { return vars_; }
    int degree() const { return degree_; }
    int coeff_dim() const { return coeff_dim_; }
    int num_blocks() const { return num_blocks_; }
    int total_dim() const { return num_blocks_ * coeff_dim_; }

    int flat_block(const std::vector<int>& k) const;
    std::vector<int> multi_index(int block) const;

private:
    int vars_, degree_, coeff_dim_, num_blocks_;
};

/// Operator on a truncated Hardy space.  exact_degree g: agrees with the untruncated operator on
/// coefficients of degree <= N - g.
struct HardyOp {
    TruncatedHardy space;
    SpMatrix matrix;
    int exact_degree = 0;
};

/// Degree-<=1 symbol description of a block operator, so it can be rebuilt on another truncation.
struct OpSymbol {
    enum class Kind { Shift, Mult, Kron } kind = Kind::Kron;
    int var = 0;      // Shift
    CMatrix A0, A1;   // Mult: A0 + z_1 A1; Kron: I (x) A0
    static OpSymbol shift(int i) { return {Kind::Shift, i, {}, {}}; }
    static OpSymbol mult(CMatrix a0, CMatrix a1) { return {Kind::Mult, 0, std::move(a0), std::move(a1)}; }
    static OpSymbol kron(CMatrix a) { return {Kind::Kron, 0, std::move(a), {}}; }
};

/// Forward shift in variable i (1-based); annihilates blocks with k_i = N.
HardyOp shift(const TruncatedHardy& space, int i);

/// I (x) A on every coefficient block.
HardyOp kron_identity(const TruncatedHardy& space, const CMatrix& A);

/// Multiplier with symbol A0 + z_1 A1.
HardyOp mult_op(const TruncatedHardy& space, const CMatrix& A0, const CMatrix& A1);

HardyOp realize(const OpSymbol& sym, const TruncatedHardy& space);

/// Block k of the result applied to h is basis^* D X^{*k} h.  X must have space.vars() entries.
CMatrix canonical_dilation(const OperatorTuple& X, const CMatrix& D, const CMatrix& basis, const TruncatedHardy& space);

/// Canonical dilation of T(G); throws NotPSD when the defect of T(G) is not positive.
CMatrix canonical_dilation(const OperatorTuple& T, SubsetMask G, const TruncatedHardy& space,
                           const Tolerances& tol = default_tol());

/// I (x) Gamma from coeff_dim = Gamma.cols() to Gamma.rows(); throws NotIsometric.
HardyOp embed_coeff(const TruncatedHardy& small, const CMatrix& gamma, double tol_iso = 1e-8);

/// Flat element indices whose block multi-index satisfies k_i <= caps[i-1] for every variable.
std::vector<int> rows_with_degree_at_most(const TruncatedHardy& space, const std::vector<int>& caps);

/// Elements whose blocks have every degree <= N - g.
std::vector<int> trusted_rows(const TruncatedHardy& space, int g);

/// Isometric injection from a lower-degree model into a higher-degree one with the same vars and coefficients.
SpMatrix pad_degree(const TruncatedHardy& from, const TruncatedHardy& to);

CMatrix select_rows(const CMatrix& A, const std::vector<int>& rows);

}  // namespace dil
