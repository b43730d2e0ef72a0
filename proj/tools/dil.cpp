// Command-line front end: classify, dilate, vn, gen.
// Exit codes: 0 all checks pass, 1 a verification failed, 2 parse or construction error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "dil/gen.hpp"
#include "dil/tuple_io.hpp"
#include "dil/verify.hpp"
#include "dil/window.hpp"

using namespace dil;
using nlohmann::json;

namespace {

struct RunConfig {
    std::string input;
    std::string recipe = "poly_of_one";
    int n = 3, d = 3;
    double cap = 0.5;
    std::uint64_t seed = 1;
    int degree = 12, window = 4;
    double tol = 1e-6;
    int p = 0, q = 0;  // 0: default (1, n)
    std::string out;
    int jobs = 1;
    // vn
    int samples = 50, poly_degree = 3, grid = 64;
    double slack = 1e-6;
    bool dump_model = false;
};

OperatorTuple load_input(const RunConfig& c) {
    if (!c.input.empty()) return load_tuple(c.input);
    GenSpec s;
    s.seed = c.seed;
    s.n = c.n;
    s.d = c.d;
    s.recipe = recipe_from_string(c.recipe);
    s.radius_cap = c.cap;
    return generate(s).T;
}

void write_out(const RunConfig& c, const json& j) {
    if (c.out.empty()) return;
    std::ofstream f(c.out);
    if (!f) throw Error(ErrorKind::ParseError, "cannot write " + c.out);
    f << j.dump(2) << "\n";
}

json brehmer_json(const BrehmerResult& r) {
    json j{{"ok", r.ok}, {"min_eigenvalue", r.min_eigenvalue}};
    if (!r.ok) j["witness"] = {{"subset", r.witness.str()}, {"eigenvalue", r.eigenvalue}};
    return j;
}

std::pair<int, int> resolve_pq(const RunConfig& c, int n) {
    const int p = c.p ? c.p : 1, q = c.q ? c.q : n;
    if (!(1 <= p && p < q && q <= n))
        throw Error(ErrorKind::PreconditionViolated, "need 1 <= p < q <= n (got p=" + std::to_string(p) +
                                                         ", q=" + std::to_string(q) + ")");
    return {p, q};
}

int cmd_classify(const RunConfig& c) {
    // validation problems are reported rather than thrown
    const OperatorTuple T = c.input.empty() ? load_input(c) : load_tuple(c.input, default_tol(), false);
    const ValidationReport& v = T.report();
    json rep{{"n", T.n()},
             {"dim", T.dim()},
             {"validation",
              {{"contractive", v.contractive}, {"commuting", v.commuting}, {"finite", v.finite},
               {"max_norm", v.max_norm}, {"max_commutator", v.max_commutator}}}};
    std::printf("tuple: n = %d, dim = %d\n", T.n(), T.dim());
    std::printf("contractive: %s (max norm %.6g), commuting: %s (max commutator %.3g)\n",
                v.contractive ? "true" : "false", v.max_norm, v.commuting ? "true" : "false", v.max_commutator);
    if (!v.ok()) {
        rep["error"] = "not a commuting contractive tuple";
        write_out(c, rep);
        std::printf("not a commuting contractive tuple; positivity checks skipped\n");
        return 2;
    }
    const BrehmerResult sz = is_szego(T), br = is_brehmer(T);
    const bool pure = is_pure(T);
    rep["szego"] = brehmer_json(sz);
    rep["brehmer"] = brehmer_json(br);
    rep["pure"] = pure;
    std::printf("Szego: %s", sz.ok ? "true\n" : "false");
    if (!sz.ok) std::printf(" (witness %s, eigenvalue %.6g)\n", sz.witness.str().c_str(), sz.eigenvalue);
    std::printf("Brehmer: %s", br.ok ? "true\n" : "false");
    if (!br.ok) std::printf(" (witness %s, eigenvalue %.6g)\n", br.witness.str().c_str(), br.eigenvalue);
    std::printf("pure: %s\n", pure ? "true" : "false");
    if (T.n() < 3) {
        std::printf("class B_{p,q}: needs n >= 3\n");
        write_out(c, rep);
        return 0;
    }
    const auto [p, q] = resolve_pq(c, T.n());
    const ClassResult cl = class_Bnpq(T, p, q);
    rep["class"] = {{"p", p}, {"q", q}, {"ok", cl.ok}, {"hat_p", brehmer_json(cl.hat_p)},
                    {"hat_q", brehmer_json(cl.hat_q)}};
    std::printf("class B_{%d,%d}: %s\n", p, q, cl.ok ? "true" : "false");
    if (cl.ok) {
        const OperatorTuple R = reindex_pq(T, p, q);
        json ids = json::array();
        double worst = 0.0;
        for (std::uint32_t bits = 1; bits < (1u << (T.n() - 1)); bits += 2) {
            const DefectIdentityResidual r = check_defect_identity(R, SubsetMask{bits});
            ids.push_back({{"G", SubsetMask{bits}.str()}, {"first", r.first}, {"second", r.second}});
            worst = std::max({worst, r.first, r.second});
        }
        rep["defect_identities"] = ids;
        std::printf("defect identities: worst residual %.3g over %zu subsets\n", worst, ids.size());
    }
    write_out(c, rep);
    return 0;
}

int cmd_dilate(const RunConfig& c) {
    if (c.degree < c.window + 1) throw Error(ErrorKind::PreconditionViolated, "need degree >= window + 1");
    const OperatorTuple T0 = load_input(c);
    const auto [p, q] = resolve_pq(c, T0.n());
    const ClassResult cl = class_Bnpq(T0, p, q);
    if (!cl.ok) {
        const BrehmerResult& bad = cl.failing_hat == p ? cl.hat_p : cl.hat_q;
        std::printf("tuple is not in B_{%d,%d}: hat %d fails Brehmer positivity on %s (eigenvalue %.6g)\n", p, q,
                    cl.failing_hat, bad.witness.str().c_str(), bad.eigenvalue);
        write_out(c, {{"error", "ClassViolation"}, {"failing_hat", cl.failing_hat},
                      {"witness", bad.witness.str()}, {"eigenvalue", bad.eigenvalue}});
        return 2;
    }
    const OperatorTuple T = reindex_pq(T0, p, q);
    TheoremOptions opts;
    opts.M = c.window;
    opts.tol_final = c.tol;
    opts.predil.seed = c.seed;
    opts.throw_on_failure = false;
    const FinalDilation fd = assemble_theorem(T, c.degree, opts);
    const ResidualLedger& led = fd.report;
    json rep{{"config", {{"degree", c.degree}, {"window", c.window}, {"tol", c.tol}, {"p", p}, {"q", q},
                         {"seed", c.seed}}},
             {"n", T.n()},
             {"dim", T.dim()},
             {"model", model_to_json(fd.model, c.dump_model)},
             {"window", {{"base_dim", fd.base_dim}, {"rank", fd.wd.factor.rows()}}},
             {"ledger", led.to_json()},
             {"pass", led.pass()}};
    if (c.dump_model) {
        rep["embed"] = matrix_to_json(fd.embed);
        json W = json::array();
        for (const auto& w : fd.W) W.push_back(matrix_to_json(w));
        rep["W"] = W;
    }
    write_out(c, rep);
    std::printf("dilation of a %d-tuple on C^%d (p = %d, q = %d), degree %d, window %d\n", T.n(), T.dim(), p, q,
                c.degree, c.window);
    std::printf("co-extension dim %d, window base %d, window rank %d\n", fd.model.total_dim, fd.base_dim,
                static_cast<int>(fd.wd.factor.rows()));
    for (const char* name : {"dilation_identity", "case_cross_check", "star_regular_hat1", "star_regular_hatn",
                             "pair_regular", "w0_isometry", "w1_isometry", "w0_w1_commute"})
        std::printf("  %-20s max residual %.3g\n", name, led.max_residual(name));
    std::printf("%zu checks, %s\n", led.entries().size(), led.pass() ? "all pass" : "FAILURES");
    if (const ResidualEntry* w = led.worst_failure())
        std::printf("worst failure: %s [%s] %.3g > %.3g\n", w->name.c_str(), w->context.c_str(), w->residual, w->tol);
    return led.pass() ? 0 : 1;
}

int cmd_vn(const RunConfig& c) {
    const OperatorTuple T = load_input(c);
    SplitMix64 rng(c.seed);
    std::vector<PolySample> ps;
    for (int i = 0; i < c.samples; ++i) ps.push_back(random_poly(rng, T.n(), c.poly_degree));
    const ResidualLedger led = von_neumann_check(T, ps, {.grid = c.grid, .slack = c.slack, .jobs = c.jobs});
    double worst = -1e300;
    for (const auto& e : led.entries()) worst = std::max(worst, e.residual - e.tol);
    if (!c.out.empty() && c.out.size() > 4 && c.out.substr(c.out.size() - 4) == ".csv") {
        std::ofstream f(c.out);
        if (!f) throw Error(ErrorKind::ParseError, "cannot write " + c.out);
        f << "sample,norm_minus_sup,slack,pass,grid\n";
        for (size_t i = 0; i < led.entries().size(); ++i) {
            const auto& e = led.entries()[i];
            f << i << "," << e.residual << "," << e.tol << "," << (e.pass ? 1 : 0) << "," << c.grid << "\n";
        }
    } else {
        write_out(c, {{"grid", c.grid}, {"slack", c.slack}, {"samples", c.samples},
                      {"poly_degree", c.poly_degree}, {"seed", c.seed}, {"ledger", led.to_json()},
                      {"pass", led.pass()}});
    }
    std::printf("von Neumann: %d polynomials (degree <= %d per variable), grid %d^%d, slack %.1e + grid term\n",
                c.samples, c.poly_degree, c.grid, T.n(), c.slack);
    std::printf("largest ||p(T)|| - sup - slack: %.3g; %s\n", worst, led.pass() ? "all pass" : "FAILURES");
    return led.pass() ? 0 : 1;
}

int cmd_gen(const RunConfig& c) {
    GenSpec s;
    s.seed = c.seed;
    s.n = c.n;
    s.d = c.d;
    s.recipe = recipe_from_string(c.recipe);
    s.radius_cap = c.cap;
    const Generated g = generate(s);
    const json j = tuple_to_json(g.T);
    if (c.out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_out(c, j);
    return 0;
}

void add_source(CLI::App* sub, RunConfig& c) {
    sub->add_option("input", c.input, "tuple JSON file (omit to generate one)");
    sub->add_option("--recipe", c.recipe, "generator recipe when no input is given")
        ->check(CLI::IsMember({"diagonal", "poly_of_one", "scaled_unitaries", "jordan_pair"}));
    sub->add_option("--n", c.n, "number of operators")->check(CLI::Range(1, 8));
    sub->add_option("--d", c.d, "matrix dimension")->check(CLI::Range(1, 64));
    sub->add_option("--cap", c.cap, "radius cap")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--out", c.out, "output path");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Isometric dilations of commuting contraction tuples"};
    app.require_subcommand(1);
    RunConfig c;

    auto* classify = app.add_subcommand("classify", "validation, Szego/Brehmer positivity, purity, class B_{p,q}");
    add_source(classify, c);
    classify->add_option("--p", c.p, "p of the class B_{p,q} (default 1)");
    classify->add_option("--q", c.q, "q of the class B_{p,q} (default n)");

    auto* dilate = app.add_subcommand("dilate", "co-extension, window dilation and residual ledger");
    add_source(dilate, c);
    dilate->add_option("--degree", c.degree, "Hardy truncation degree N")->check(CLI::Range(1, 64));
    dilate->add_option("--window", c.window, "window size M")->check(CLI::Range(1, 16));
    dilate->add_option("--tol", c.tol, "tolerance for the dilation identities");
    dilate->add_option("--p", c.p, "p of the class B_{p,q} (default 1)");
    dilate->add_option("--q", c.q, "q of the class B_{p,q} (default n)");
    dilate->add_option("--jobs", c.jobs, "parallelism hint");
    dilate->add_flag("--dump-model", c.dump_model, "include Pi, V_j and W_j in the JSON");

    auto* vn = app.add_subcommand("vn", "von Neumann inequality on random polynomials");
    add_source(vn, c);
    vn->add_option("--samples", c.samples, "random polynomials")->check(CLI::Range(1, 100000));
    vn->add_option("--poly-degree", c.poly_degree, "degree per variable")->check(CLI::Range(0, 16));
    vn->add_option("--grid", c.grid, "torus grid points per variable")->check(CLI::Range(2, 4096));
    vn->add_option("--slack", c.slack, "base slack added to the grid bound");
    vn->add_option("--jobs", c.jobs, "worker threads")->check(CLI::Range(1, 256));

    auto* gen = app.add_subcommand("gen", "write a generated tuple as JSON");
    add_source(gen, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        if (*classify) return cmd_classify(c);
        if (*dilate) return cmd_dilate(c);
        if (*vn) return cmd_vn(c);
        if (*gen) return cmd_gen(c);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
