#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dil/rng.hpp"
#include "dil/tuple.hpp"

namespace dil {

enum class Recipe { Diagonal, PolyOfOne, ScaledUnitaries, JordanPair, Custom };
const char* to_string(Recipe r);
Recipe recipe_from_string(const std::string& s);  // throws ParseError

struct GenSpec {
    std::uint64_t seed = 0;
    int n = 3;
    int d = 3;
    Recipe recipe = Recipe::PolyOfOne;
    double radius_cap = 0.5;
    // Diagonal: how many diagonal entries of T_1 sit on the unit circle
    int unit_entries = 0;
    // PolyOfOne: degree of each p_i, and a scale on the base matrix (0 gives scalar tuples)
    int poly_degree = 2;
    double base_scale = 1.0;
    // PolyOfOne: resample until class B_{1,n} holds (and purity, if asked)
    bool require_class = false;
    bool require_pure = false;
    int max_rejections = 1000;
    std::vector<CMatrix> custom;
};

struct Generated {
    OperatorTuple T;
    int attempts = 1;                    // draws used, including the accepted one
    std::vector<CVector> diagonals;      // Diagonal recipe: the eigenvalue lists
    std::optional<bool> brehmer_oracle;  // closed-form labels where a recipe has them
    std::optional<bool> pure_oracle;
};

/// Diagonal entries of defect(T, G) by the product formula prod_{i in G} (1 - |lambda_i|^2).
CVector diagonal_defect_oracle(const std::vector<CVector>& diagonals, SubsetMask G);

Generated gen_diagonal(const GenSpec& spec);
/// Throws RejectionBudgetExceeded when require_class cannot be met within max_rejections draws.
Generated gen_poly_of_one(const GenSpec& spec);
Generated gen_scaled_unitaries(const GenSpec& spec);
Generated gen_jordan_pair(const GenSpec& spec);
Generated generate(const GenSpec& spec);

/// Reproducible stream of tuples: the i-th uses seed mix(spec.seed, i).
std::vector<Generated> gen_corpus(GenSpec spec, int count);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct SeparatingWitness {
    OperatorTuple T;
    SubsetMask witness;  // subset where Brehmer positivity fails
    double eigenvalue = 0.0;
    std::uint64_t seed = 0;
    int attempt = 0;
};

struct SeparatingSearch {
    std::optional<SeparatingWitness> found;
    int attempts = 0;
    int class_hits = 0;  // draws that landed in B_{1,n}
};

/// Looks for T in B_{1,n} that is not Brehmer; `budget` draws of the recipe with derived seeds.
SeparatingSearch gen_separating_search(const GenSpec& spec, int budget);

}  // namespace dil
