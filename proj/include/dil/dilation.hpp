#pragma once

#include <json.hpp>
#include <optional>
#include <vector>

#include "dil/bcl.hpp"
#include "dil/hardy.hpp"
#include "dil/report.hpp"
#include "dil/tuple.hpp"

namespace dil {

/// Q^2 = lim X^m X^{*m} with X the product of the (T1 Tn, T2, ..., T_{n-1}) entries over Gbar, and the
/// compressed tuple S on ran Q defined by S_j^* Q h = Q T_j^* h.  Everything on ran Q is in the coordinates
/// of ran_basis, so coords = ran_basis^* Q maps H onto them.
struct QCompression {
    CMatrix Q;
    CMatrix ran_basis;  // d x q
    CMatrix coords;     // q x d
    OperatorTuple tilde_ops;
    int iters = 0;
    double conv_residual = 0.0;
    bool slow = false;               // cap reached; Q^2 taken as the mean of the last two iterates
    double coisometry_defect = 0.0;  // max over j in Gbar of ||S_j S_j^* - I|| (S_1 and S_n when 1 in Gbar)
    double douglas_residual = 0.0;
    int rank() const { return static_cast<int>(ran_basis.cols()); }
};

QCompression q_limit(const OperatorTuple& T, SubsetMask Gbar, double tol = 1e-12, int max_iters = 100000);

enum class BlockKind { Empty, OneInG, OneNotInG };
const char* to_string(BlockKind k);

struct SubsetBlock {
    SubsetMask G;
    BlockKind kind = BlockKind::Empty;
    TruncatedHardy space{0, 0, 0};
    CMatrix Pi;                 // total_dim x d
    std::vector<HardyOp> V;     // V[j-1] = V_{G,j}
    std::optional<HardyOp> V0;
    std::vector<OpSymbol> V_sym;  // symbols of V, for rebuilding at another degree
    OpSymbol V0_sym;
    QCompression q;
    std::optional<GammaData> gamma;
    std::optional<BCLData> bcl;
    int h_dim = 0;              // coefficient dimension of the block
    ResidualLedger residuals;
};

/// 1 in G; S = q.tilde_ops must lie in B_{1,n}.  Intertwinings with T are verified on degrees <= N-1.
SubsetBlock build_block_one_in_g(const OperatorTuple& T, const QCompression& q, SubsetMask G, int N,
                                 double tol = 1e-8);
/// 1 not in G; S_j for j outside G (and S_n) must be co-isometries.
SubsetBlock build_block_one_not_in_g(const OperatorTuple& T, const QCompression& q, SubsetMask G, int N,
                                     double tol = 1e-10);

struct PredilOptions {
    double intertwine_tol = 1e-6;
    double identity_tol = 1e-8;
    int telescoping_samples = 100;
    std::uint64_t seed = 0x5eed;
};

struct CoExtensionModel {
    int n = 0;
    int d = 0;
    int degree = 0;
    std::vector<SubsetBlock> blocks;  // every G, including Empty ones (no rows)
    std::vector<int> offsets;         // row offset of each block
    int total_dim = 0;
    CMatrix Pi;                       // total_dim x d
    std::vector<SpMatrix> V;          // V[j-1]
    SpMatrix V0;
    std::vector<int> trusted;         // rows whose block degrees are all <= N-1
    double rho_max = 0.0;
    double tol_iso = 0.0;
    ResidualLedger residuals;
};

/// The model's operators rebuilt on Hardy spaces of a larger degree, with Pi zero-padded.  Operators act
/// exactly on every vector whose degrees stay within the padded range.
struct PaddedModel {
    int degree = 0;
    int total_dim = 0;
    std::vector<int> offsets;
    std::vector<TruncatedHardy> spaces;  // per block (Empty blocks have total_dim 0)
    std::vector<SpMatrix> V;
    SpMatrix V0;
    SpMatrix pad;  // model rows -> padded rows
    CMatrix Pi;
};

PaddedModel pad_model(const CoExtensionModel& m, int degree);

/// tol_iso(N) = max(1e-8, 3 rho^{2(N+1)} d).
double isometry_tolerance(double rho, int N, int d);

CoExtensionModel assemble_predil(const OperatorTuple& T, int N, const PredilOptions& opts = {});

/// Per-block dimensions, Pi and the residual ledger; with_ops adds V_j and V0 as sparse triplets.
nlohmann::json model_to_json(const CoExtensionModel& m, bool with_ops = false);
nlohmann::json sparse_to_json(const SpMatrix& A);

/// Selection matrix picking `rows` out of dim coordinates.
SpMatrix selector(const std::vector<int>& rows, int dim);

}  // namespace dil
