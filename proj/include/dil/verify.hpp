#pragma once

#include <functional>
#include <map>
#include <vector>

#include "dil/report.hpp"
#include "dil/rng.hpp"
#include "dil/tuple.hpp"

namespace dil {

/// Polynomial in n commuting variables; every exponent is at most `degree`.
struct PolySample {
    int n = 0;
    int degree = 0;
    std::map<std::vector<int>, cplx> coeffs;

    void add(const std::vector<int>& k, cplx c);
    /// Sum over monomials of |c_k| * |k|_1, a bound for the sum of the partial derivative sups on the torus.
    double gradient_bound() const;
    cplx operator()(const std::vector<cplx>& z) const;
};

/// T^k with factors in ascending index order.
CMatrix tuple_power(const OperatorTuple& T, const std::vector<int>& k);
CMatrix eval_poly_at_tuple(const PolySample& p, const OperatorTuple& T);

/// max |p| over the g^n grid of torus points; a lower bound for the sup over the polydisc.
double sup_on_torus(const PolySample& p, int g);

/// i.i.d. complex Gaussian coefficients for every exponent in {0..degree}^n, rescaled so the grid sup is 1.
PolySample random_poly(SplitMix64& rng, int n, int degree, int g = 32);

struct VonNeumannOptions {
    int grid = 64;
    double slack = 1e-6;
    int jobs = 1;  // worker threads over samples; the ledger order never depends on it
};

/// One entry per polynomial: residual = ||p(T)|| - sup_grid, tolerance = slack + gradient_bound * pi / g.
ResidualLedger von_neumann_check(const OperatorTuple& T, const std::vector<PolySample>& samples,
                                 const VonNeumannOptions& opts = {});

/// Signed multi-indices alpha with |alpha_i| <= amax and sum |alpha_i| <= total.
std::vector<std::vector<int>> signed_indices(int vars, int amax, int total);
std::vector<int> positive_part(const std::vector<int>& a);
std::vector<int> negative_part(const std::vector<int>& a);

/// alpha -> embed^* W^{*alpha-} W^{alpha+} embed, however the caller realizes the dilation.
using CompressionFn = std::function<CMatrix(const std::vector<int>& alpha)>;

/// Compression through plain matrices: (W^{alpha-} E)^* (W^{alpha+} E).
CompressionFn matrix_compression(std::vector<CMatrix> W, CMatrix embed);

/// Entry per alpha against T^{alpha+} T^{*alpha-}.
ResidualLedger star_regular_residual(const OperatorTuple& T_sub, const CompressionFn& W,
                                     const std::vector<std::vector<int>>& alphas, double tol,
                                     const std::string& name = "star_regular", const std::string& anchor = "");
/// Entry per alpha against T^{*alpha-} T^{alpha+}.
ResidualLedger regular_residual(const OperatorTuple& T_pair, const CompressionFn& W,
                                const std::vector<std::vector<int>>& alphas, double tol,
                                const std::string& name = "regular", const std::string& anchor = "");

/// Generic form: targets supplied by the caller (used when the dilated pair is only known through its orbit).
ResidualLedger signed_residual(const CompressionFn& target, const CompressionFn& W,
                               const std::vector<std::vector<int>>& alphas, double tol, const std::string& name,
                               const std::string& anchor);

std::string index_string(const std::vector<int>& k);

}  // namespace dil
