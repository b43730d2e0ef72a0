#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dil/linalg.hpp"

namespace dil {

/// Subset of {1,...,n}; element i is bit (i-1).
struct SubsetMask {
    std::uint32_t bits = 0;

    static SubsetMask of(std::initializer_list<int> elems);
    static SubsetMask full(int n);
    bool contains(int i) const { return i >= 1 && ((bits >> (i - 1)) & 1u); }
    int size() const;
    bool empty() const { return bits == 0; }
    int max_element() const;  // 0 when empty
    std::vector<int> elements() const;  // ascending, 1-based
    SubsetMask with(int i) const { return {bits | (1u << (i - 1))}; }
    SubsetMask without(int i) const { return {bits & ~(1u << (i - 1))}; }
    bool subset_of(SubsetMask o) const { return (bits & ~o.bits) == 0; }
    bool operator==(const SubsetMask&) const = default;
    std::string str() const;
};

struct ValidationReport {
    double max_norm = 0.0;        // max_i ||T_i||
    double max_commutator = 0.0;  // max_{i,j} ||T_iT_j - T_jT_i|| / max(1, ||T_i|| ||T_j||)
    bool contractive = true;
    bool commuting = true;
    bool finite = true;
    bool ok() const { return contractive && commuting && finite; }
};

class OperatorTuple {
public:
    OperatorTuple() = default;
    /// Validates; throws PreconditionViolated for non-commuting, non-contractive or non-finite input
    /// unless `strict` is false (the report is kept either way).
    explicit OperatorTuple(std::vector<CMatrix> ops, const Tolerances& tol = default_tol(), bool strict = true);

    int dim() const { return dim_; }
    int n() const { return static_cast<int>(ops_.size()); }
    /// 1-based access.
    const CMatrix& op(int i) const;
    const std::vector<CMatrix>& ops() const { return ops_; }
    const ValidationReport& report() const { return report_; }

private:
    int dim_ = 0;
    std::vector<CMatrix> ops_;
    ValidationReport report_;
};

ValidationReport validate(const std::vector<CMatrix>& ops, const Tolerances& tol = default_tol());

struct DefectData {
    CMatrix delta;
    std::optional<CMatrix> sqrt;   // absent when not PSD
    std::optional<CMatrix> basis;  // orthonormal columns spanning ran(sqrt)
    int rank = 0;
    bool not_psd = false;
    double min_eigenvalue = 0.0;
    ClampInfo clamp;
};

CMatrix subset_product(const OperatorTuple& T, SubsetMask F);
OperatorTuple hat(const OperatorTuple& T, int i);
OperatorTuple hat1n(const OperatorTuple& T);
/// The tuple (T_{j} : j in G) in ascending order of G.
OperatorTuple sub_tuple(const OperatorTuple& T, SubsetMask G);
/// Reorders (p,q) to positions (1,n) keeping the others in ascending order.
OperatorTuple reindex_pq(const OperatorTuple& T, int p, int q);

/// Defect via the recursion Delta_{G+j} = Delta_G - T_j Delta_G T_j^*.
CMatrix defect_delta(const OperatorTuple& T, SubsetMask G);
DefectData defect(const OperatorTuple& T, SubsetMask G, const Tolerances& tol = default_tol());

struct BrehmerResult {
    bool ok = true;
    SubsetMask witness;       // violating subset when !ok
    double eigenvalue = 0.0;  // its minimal eigenvalue
    double min_eigenvalue = 0.0;  // minimum over all subsets (scaled margin)
};

BrehmerResult is_brehmer(const OperatorTuple& T, double tol = 1e-10);
BrehmerResult is_szego(const OperatorTuple& T, double tol = 1e-10);
bool is_pure(const OperatorTuple& T, double tol = 1e-10);

struct ClassResult {
    bool ok = true;
    int failing_hat = 0;  // p or q of the first failing hat, 0 when ok
    BrehmerResult hat_p;
    BrehmerResult hat_q;
};

ClassResult class_Bnpq(const OperatorTuple& T, int p, int q, double tol = 1e-10);

/// The (n-1)-tuple with T_n in the first slot: (T_n, T_2, ..., T_{n-1}).  This is the
/// ordering under which the defect identities hold slot by slot with hat(T,n) and hat1n(T).
OperatorTuple hat1_aligned(const OperatorTuple& T);

struct DefectIdentityResidual {
    double first = 0.0;   // ||D_n + T1 D_1 T1^* - D_1n||
    double second = 0.0;  // ||D_1 + Tn D_n Tn^* - D_1n||
};

/// G is a subset of {1,...,n-1} containing 1.
DefectIdentityResidual check_defect_identity(const OperatorTuple& T, SubsetMask G, double tol = 1e-10);

}  // namespace dil
