#include "dil/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

namespace dil {

void PolySample::add(const std::vector<int>& k, cplx c) {
    if (static_cast<int>(k.size()) != n) throw Error(ErrorKind::DimensionMismatch, "monomial arity");
    for (int e : k) {
        if (e < 0 || e > degree) throw Error(ErrorKind::IndexOutOfRange, "exponent outside the degree bound");
    }
    coeffs[k] += c;
}

double PolySample::gradient_bound() const {
    double s = 0.0;
    for (const auto& [k, c] : coeffs) {
        int deg = 0;
        for (int e : k) deg += e;
        s += std::abs(c) * deg;
    }
    return s;
}

cplx PolySample::operator()(const std::vector<cplx>& z) const {
    cplx s = 0.0;
    for (const auto& [k, c] : coeffs) {
        cplx t = c;
        for (int i = 0; i < n; ++i) t *= std::pow(z[i], k[i]);
        s += t;
    }
    return s;
}

CMatrix tuple_power(const OperatorTuple& T, const std::vector<int>& k) {
    if (static_cast<int>(k.size()) != T.n()) throw Error(ErrorKind::DimensionMismatch, "power arity");
    CMatrix P = CMatrix::Identity(T.dim(), T.dim());
    for (int i = 0; i < T.n(); ++i) {
        if (k[i] < 0) throw Error(ErrorKind::IndexOutOfRange, "negative exponent");
        for (int e = 0; e < k[i]; ++e) P = P * T.op(i + 1);
    }
    return P;
}

CMatrix eval_poly_at_tuple(const PolySample& p, const OperatorTuple& T) {
    if (p.n != T.n()) throw Error(ErrorKind::DimensionMismatch, "polynomial and tuple arity differ");
    const int d = T.dim();
    // powers[i][e] = T_i^e
    std::vector<std::vector<CMatrix>> powers(T.n());
    for (int i = 0; i < T.n(); ++i) {
        powers[i].push_back(CMatrix::Identity(d, d));
        for (int e = 1; e <= p.degree; ++e) powers[i].push_back(powers[i].back() * T.op(i + 1));
    }
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto& [k, c] : p.coeffs) {
        CMatrix t = CMatrix::Identity(d, d);
        for (int i = 0; i < T.n(); ++i)
            if (k[i] > 0) t = t * powers[i][k[i]];
        out += c * t;
    }
    return out;
}

double sup_on_torus(const PolySample& p, int g) {
    if (g < 1) throw Error(ErrorKind::PreconditionViolated, "grid size must be positive");
    const int n = p.n, D = p.degree + 1;
    if (n == 0) return p.coeffs.empty() ? 0.0 : std::abs(p.coeffs.begin()->second);
    // twiddle[a][e] = exp(2 pi i a e / g)
    std::vector<cplx> tw(static_cast<size_t>(g) * D);
    for (int a = 0; a < g; ++a)
        for (int e = 0; e < D; ++e)
            tw[a * D + e] = std::polar(1.0, 2.0 * std::numbers::pi * double((long long)a * e % g) / g);
    // Dense coefficient tensor, variable 1 most significant; contract the last variable first.
    std::vector<cplx> cur(static_cast<size_t>(std::pow(D, n)), 0.0);
    for (const auto& [k, c] : p.coeffs) {
        size_t idx = 0;
        for (int i = 0; i < n; ++i) idx = idx * D + k[i];
        cur[idx] += c;
    }
    // layout: [exponents of vars 1..m] x [grid points of vars m+1..n]
    size_t grid_block = 1;
    for (int m = n - 1; m >= 0; --m) {
        const size_t lead = cur.size() / (D * grid_block);
        std::vector<cplx> next(lead * g * grid_block, 0.0);
        for (size_t L = 0; L < lead; ++L)
            for (int e = 0; e < D; ++e) {
                const cplx* src = &cur[(L * D + e) * grid_block];
                for (int a = 0; a < g; ++a) {
                    const cplx w = tw[a * D + e];
                    cplx* dst = &next[(L * g + a) * grid_block];
                    for (size_t t = 0; t < grid_block; ++t) dst[t] += w * src[t];
                }
            }
        cur.swap(next);
        grid_block *= g;
    }
    double best = 0.0;
    for (const cplx& v : cur) best = std::max(best, std::abs(v));
    return best;
}

PolySample random_poly(SplitMix64& rng, int n, int degree, int g) {
    PolySample p;
    p.n = n;
    p.degree = degree;
    std::vector<int> k(n, 0);
    while (true) {
        p.coeffs[k] = rng.complex_normal();
        int i = n - 1;
        while (i >= 0 && k[i] == degree) k[i--] = 0;
        if (i < 0) break;
        ++k[i];
    }
    const double s = sup_on_torus(p, g);
    if (s > 0)
        for (auto& [kk, c] : p.coeffs) c /= s;
    return p;
}

ResidualLedger von_neumann_check(const OperatorTuple& T, const std::vector<PolySample>& samples,
                                 const VonNeumannOptions& opts) {
    struct Row {
        double lhs, sup, slack;
    };
    std::vector<Row> rows(samples.size());
    auto work = [&](size_t first, size_t step) {
        for (size_t s = first; s < samples.size(); s += step) {
            const PolySample& p = samples[s];
            rows[s] = {spectral_norm(eval_poly_at_tuple(p, T)), sup_on_torus(p, opts.grid),
                       opts.slack + p.gradient_bound() * std::numbers::pi / opts.grid};
        }
    };
    const size_t jobs = std::clamp<size_t>(opts.jobs, 1, std::max<size_t>(samples.size(), 1));
    if (jobs == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (size_t w = 0; w < jobs; ++w) pool.emplace_back(work, w, jobs);
        for (auto& t : pool) t.join();
    }
    ResidualLedger out;
    for (size_t s = 0; s < rows.size(); ++s) {
        std::ostringstream ctx;
        ctx << "sample " << s << " grid " << opts.grid << " norm " << rows[s].lhs << " sup " << rows[s].sup;
        out.add("von_neumann", "polynomial functional calculus", rows[s].lhs - rows[s].sup, rows[s].slack, ctx.str());
    }
    return out;
}

std::vector<std::vector<int>> signed_indices(int vars, int amax, int total) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(vars, -amax);
    if (vars == 0) return {{}};
    while (true) {
        int s = 0;
        for (int v : a) s += std::abs(v);
        if (s <= total) out.push_back(a);
        int i = vars - 1;
        while (i >= 0 && a[i] == amax) a[i--] = -amax;
        if (i < 0) break;
        ++a[i];
    }
    return out;
}

std::vector<int> positive_part(const std::vector<int>& a) {
    std::vector<int> p(a.size());
    for (size_t i = 0; i < a.size(); ++i) p[i] = std::max(a[i], 0);
    return p;
}

std::vector<int> negative_part(const std::vector<int>& a) {
    std::vector<int> p(a.size());
    for (size_t i = 0; i < a.size(); ++i) p[i] = std::max(-a[i], 0);
    return p;
}

std::string index_string(const std::vector<int>& k) {
    std::ostringstream s;
    s << "(";
    for (size_t i = 0; i < k.size(); ++i) s << (i ? "," : "") << k[i];
    s << ")";
    return s.str();
}

namespace {

CMatrix word(const std::vector<CMatrix>& W, const std::vector<int>& k, CMatrix X) {
    // rightmost factor first; all factors commute in exact arithmetic, fixed order keeps it deterministic
    for (int i = static_cast<int>(W.size()) - 1; i >= 0; --i)
        for (int e = 0; e < k[i]; ++e) X = W[i] * X;
    return X;
}

CompressionFn tuple_target(const OperatorTuple& T, bool star) {
    return [&T, star](const std::vector<int>& a) -> CMatrix {
        if (static_cast<int>(a.size()) != T.n()) throw Error(ErrorKind::DimensionMismatch, "alpha arity");
        const CMatrix P = tuple_power(T, positive_part(a));
        const CMatrix M = tuple_power(T, negative_part(a));
        return star ? CMatrix(P * M.adjoint()) : CMatrix(M.adjoint() * P);
    };
}

}  // namespace

CompressionFn matrix_compression(std::vector<CMatrix> W, CMatrix embed) {
    return [W = std::move(W), E = std::move(embed)](const std::vector<int>& a) -> CMatrix {
        return word(W, negative_part(a), E).adjoint() * word(W, positive_part(a), E);
    };
}

ResidualLedger signed_residual(const CompressionFn& target, const CompressionFn& W,
                               const std::vector<std::vector<int>>& alphas, double tol, const std::string& name,
                               const std::string& anchor) {
    ResidualLedger out;
    for (const auto& a : alphas)
        out.add(name, anchor, spectral_norm(W(a) - target(a)), tol, "alpha " + index_string(a));
    return out;
}

ResidualLedger star_regular_residual(const OperatorTuple& T_sub, const CompressionFn& W,
                                     const std::vector<std::vector<int>>& alphas, double tol,
                                     const std::string& name, const std::string& anchor) {
    return signed_residual(tuple_target(T_sub, true), W, alphas, tol, name, anchor);
}

ResidualLedger regular_residual(const OperatorTuple& T_pair, const CompressionFn& W,
                                const std::vector<std::vector<int>>& alphas, double tol, const std::string& name,
                                const std::string& anchor) {
    return signed_residual(tuple_target(T_pair, false), W, alphas, tol, name, anchor);
}

}  // namespace dil
