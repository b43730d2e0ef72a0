#pragma once

#include <vector>

#include "dil/dilation.hpp"
#include "dil/hardy.hpp"
#include "dil/report.hpp"

namespace dil {

/// Orbit of a base subspace under a commuting pair: Y(a,b) = A^a B^b base, for a, b in {0..M}.
/// Only the two edges Y(a,0), Y(0,b) are stored; interior points are recomputed on demand.
class PairOrbit {
public:
    PairOrbit(SpMatrix A, SpMatrix B, CMatrix base, int M);
    int window() const { return M_; }
    int base_dim() const { return static_cast<int>(base_.cols()); }
    const CMatrix& base() const { return base_; }
    const SpMatrix& A() const { return A_; }
    const SpMatrix& B() const { return B_; }
    CMatrix at(int a, int b) const;

private:
    SpMatrix A_, B_;
    CMatrix base_;
    int M_;
    std::vector<CMatrix> row_;  // Y(a,0)
};

/// Window model of the regular dilation of a commuting pair over the base subspace.  Kolmogorov vector
/// vec(k, b_i) is column col(k, i) of factor; its inner products reproduce
/// <vec(k,h), vec(l,h')> = <T^{(k-l)+} h, T^{(l-k)+} h'> with T^a = A^{a1} B^{a2}.
struct WindowDilation {
    int M = 0;
    int base_dim = 0;
    CMatrix gram;        // gram(col(k,i), col(l,j)) = <vec(l,b_j), vec(k,b_i)>
    CMatrix factor;      // r x base_dim (M+1)^2, factor^* factor = gram
    ClampInfo clamp;
    double gram_norm = 0.0;
    double chol_residual = 0.0;
    double adjoint_pair_defect = 0.0;  // most negative eigenvalue of the adjoint pair's Brehmer defects on the base
    CMatrix W0, W1;      // r x r, empty until window_shifts
    double w0_welldef = 0.0, w1_welldef = 0.0;

    int col(int k1, int k2, int i) const { return (k1 * (M + 1) + k2) * base_dim + i; }
    /// Columns vec(k, .) for every k with k1 <= c1, k2 <= c2.
    std::vector<int> columns_within(int c1, int c2) const;
    CMatrix slot(int k1, int k2) const { return factor.middleCols(col(k1, k2, 0), base_dim); }
};

/// Builds the window gram from exact pair powers on the base (orthonormal columns).
/// Throws PreconditionViolated if the adjoint pair is not Brehmer on the base, NotPSD past clamp_rel*||gram||.
WindowDilation regular_gram(const PairOrbit& orbit, double clamp_rel = 1e-9);
/// Small-pair convenience: base = whole space.
WindowDilation regular_gram(const CMatrix& A, const CMatrix& B, int M, double clamp_rel = 1e-9);

/// W0, W1 as least-squares maps vec(k) -> vec(k+e1), vec(k) -> vec(k+e2) on columns where the target exists.
void window_shifts(WindowDilation& wd, double tol = 1e-8);

struct LiftedIsometry {
    CMatrix U;  // r x r
    double welldef = 0.0;
    double isometry_defect = 0.0;
    double extension = 0.0;
    double coextension = 0.0;
};

/// U vec(k, b) = vec(k, S b) for b in the domain (coordinates in the base), S given by its base matrix.
LiftedIsometry lift_doubly_commuting(const WindowDilation& wd, const CMatrix& S_coords, const CMatrix& domain,
                                     double tol = 1e-8);

/// Whole-space form for a small dense pair (base = identity): checks that S is an isometry doubly commuting
/// with A and B (HypothesisViolated otherwise) and also fills coextension = ||U^* vec(0,.) - vec(0, S^* .)||.
LiftedIsometry lift_doubly_commuting(const CMatrix& A, const CMatrix& B, const WindowDilation& wd, const CMatrix& S,
                                     double tol = 1e-8);

/// W0^{a0} W1^{a1} U^{beta} X with all exponents >= 0; U[i] is the lift of the i-th middle operator.
CMatrix apply_word(const CMatrix& W0, const CMatrix& W1, const std::vector<CMatrix>& U, int a0, int a1,
                   const std::vector<int>& beta, const CMatrix& X);

struct TheoremOptions {
    int M = 4;
    int margin = 1;
    double tol_final = 1e-6;
    double tol_window = 1e-8;
    double tol_cross = 1e-10;
    bool throw_on_failure = true;
    PredilOptions predil{};
};

struct FinalDilation {
    int n = 0;
    int M = 0;
    CoExtensionModel model;
    WindowDilation wd;
    std::vector<CMatrix> W;  // W[j-1] = W_j; W[n-1] = W1^* W0 as a matrix (exact on interior columns only)
    std::vector<CMatrix> U;  // lifts of the middle operators, U[i] = W_{i+2}
    CMatrix embed;           // r x d: h -> vec(0, Pi h)
    int base_dim = 0;
    ResidualLedger report;
};

/// End-to-end isometric dilation on a window: co-extension, regular dilation of (V0, V1), lifts, W_n = W1^* W0.
FinalDilation assemble_theorem(const OperatorTuple& T, int N, const TheoremOptions& opts = {});

/// <W^k embed h, embed h'> for the dilation word W_1^{k_1}...W_n^{k_n}, using the branch split on k_1 vs k_n.
CMatrix compress_dilation_word(const FinalDilation& fd, const std::vector<int>& k);

}  // namespace dil
