// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
// usage: typeiii_acceptance [path-to-typeiii-cli]

#include "typeiii/typeiii.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

using namespace typeiii;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

char buf[256];

template <class... Args>
std::string fmt(const char* f, Args... args) {
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double x, double y) {
    const double m = std::max(std::fabs(x), std::fabs(y));
    return m == 0.0 ? 0.0 : std::fabs(x - y) / m;
}

TwoFactorLayout layout_of(const Dataset& d) { return make_layout(d, "A", "B"); }

TermList saturated() { return parse_formula("y ~ A*B"); }

// 1. 200 seeded all-filled layouts, four SS routes for both main effects.
Verdict criterion1() {
    SimulationConfig cfg;
    cfg.runs = 200;
    cfg.seed = 42;
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = simulate(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool errors = false;
    for (const auto& r : s.runs) errors = errors || !r.error.empty() || r.n_empty != 0;
    const bool ok = !errors && s.runs.size() == 200 && s.worst <= 1e-8 && s.all_passed() && secs < 10.0;
    return {ok, fmt("%zu/200 runs, worst rel %.3e, %.2fs", s.passed, s.worst, secs)};
}

// 2. The 2x2 fixture, A effect.
Verdict criterion2() {
    VectorXd y(6);
    y << 2, 1, 3, 4, 6, 7;
    const Dataset d("y", y, {{"A", {"a1", "a1", "a1", "a2", "a2", "a2"}}, {"B", {"b1", "b2", "b2", "b1", "b1", "b2"}}});
    const auto L = layout_of(d);
    const auto design = build_design(d, saturated());
    const SSResult r[] = {type3_ss(y, type3_components(design, Term({"A"}))), rmfm_ss(y, L, h_matrices(2, 2).H10),
                          mwsm_ss(y, L), contrast_ss(y, L, a_contrasts(2, 2))};
    double worst = 0.0;
    bool df_ok = true;
    for (const auto& x : r) {
        worst = std::max(worst, rel(x.ss, 64.0 / 3.0));
        df_ok = df_ok && x.df == 1;
    }
    return {df_ok && worst <= 1e-10,
            fmt("type3 %.12g rmfm %.12g mwsm %.12g contrast %.12g, worst rel %.2e", r[0].ss, r[1].ss, r[2].ss, r[3].ss,
                worst)};
}

// 3. One empty cell: Type III keeps a-1 df, RMFM drops to a-2, and the SSs differ.
Verdict criterion3() {
    const LayoutSpec spec{.a_min = 3, .a_max = 5, .b_min = 3, .b_max = 5, .empty_cells = 1};
    int df_ok = 0, differ = 0;
    for (std::uint64_t run = 0; run < 100; ++run) {
        Rng rng = Rng::for_run(2026, run);
        const auto n = random_counts(rng, spec);
        const auto data = dataset_from_counts(n, rng.normal_vector(n.sum()));
        const auto L = layout_of(data);
        const auto design = build_design(data, saturated());
        const auto t3 = type3_ss(data.response(), type3_components(design, Term({"A"})));
        const auto rm = rmfm_ss(data.response(), L, h_matrices(L.a, L.b).H10);
        if (L.n_empty() == 1 && t3.df == L.a - 1 && rm.df == L.a - 2) ++df_ok;
        if (rel(t3.ss, rm.ss) > 1e-6) ++differ;
    }
    return {df_ok == 100 && differ >= 95, fmt("df split in %d/100, SS differs in %d/100", df_ok, differ)};
}

// 4. Type III for A on sp(K): zero on H10-null cell vectors, nonzero under row-marginal spread.
Verdict criterion4() {
    double worst_null = 0.0, min_alt = 1e300;
    for (std::uint64_t run = 0; run < 100; ++run) {
        Rng rng = Rng::for_run(4, run);
        const auto n = random_counts(rng, LayoutSpec{});
        const auto data = dataset_from_counts(n, VectorXd::Zero(n.sum()));
        const auto L = layout_of(data);
        const auto P3 = type3_components(build_design(data, saturated()), Term({"A"})).p3();
        const auto h = h_matrices(L.a, L.b);
        const Index c = L.a * L.b;

        const VectorXd null = (MatrixXd::Identity(c, c) - h.H10) * rng.normal_vector(c);
        worst_null = std::max(worst_null, P3.apply(L.K * null).norm() / null.norm());

        VectorXd alt = rng.normal_vector(c);
        VectorXd row_means(L.a);
        for (Index i = 0; i < L.a; ++i) row_means(i) = alt.segment(i * L.b, L.b).mean();
        if (row_means.maxCoeff() - row_means.minCoeff() < 0.5) // lift row 0 clear of the rest
            alt.segment(0, L.b).array() += row_means.maxCoeff() - row_means(0) + 0.5;
        min_alt = std::min(min_alt, P3.apply(L.K * alt).norm());
    }
    return {worst_null <= 1e-10 && min_alt > 1e-3,
            fmt("null max |P3 K eta|/|eta| %.2e, alternative min |P3 K eta| %.3g", worst_null, min_alt)};
}

// 5. H algebra, the weighted projector identity, and P_A = P_{K D_ab (S_a (x) 1_b)}.
Verdict criterion5() {
    double h_err = 0.0;
    for (Index a = 2; a <= 8; ++a) {
        for (Index b = 2; b <= 8; ++b) {
            const auto h = h_matrices(a, b);
            const MatrixXd* hs[] = {&h.H00, &h.H10, &h.H01, &h.H11};
            MatrixXd sum = MatrixXd::Zero(a * b, a * b);
            for (int i = 0; i < 4; ++i) {
                h_err = std::max(h_err, max_abs_diff(*hs[i] * *hs[i], *hs[i]));
                h_err = std::max(h_err, max_abs_diff(*hs[i], hs[i]->transpose()));
                for (int j = i + 1; j < 4; ++j) h_err = std::max(h_err, max_abs(*hs[i] * *hs[j]));
                sum += *hs[i];
            }
            h_err = std::max(h_err, max_abs_diff(sum, MatrixXd::Identity(a * b, a * b)));
        }
    }

    double weighted_err = 0.0;
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Index m = rng.uniform_int(2, 8);
        const Index k = rng.uniform_int(1, m - 1);
        MatrixXd R(m, k), G(m, m);
        for (Index j = 0; j < k; ++j) R.col(j) = rng.normal_vector(m);
        for (Index j = 0; j < m; ++j) G.col(j) = rng.normal_vector(m);
        const MatrixXd D = G * G.transpose() + 0.5 * MatrixXd::Identity(m, m);
        const MatrixXd M = complement_within(R, MatrixXd::Identity(m, m));
        const auto sides = prop1_projector(R, M, D);
        weighted_err = std::max(weighted_err, max_abs_diff(sides.left, sides.right));
    }

    double pa_err = 0.0;
    for (std::uint64_t run = 0; run < 100; ++run) {
        Rng r = Rng::for_run(55, run);
        const auto n = random_counts(r, LayoutSpec{});
        const auto L = make_layout(r.normal_vector(n.sum()), incidence_from_counts(n), n.rows(), n.cols());
        const MatrixXd PA = rmfm_projector(L, h_matrices(L.a, L.b).H10).dense();
        const MatrixXd Dab = L.d_ab().asDiagonal();
        const MatrixXd span = projector_onto(L.K * Dab * a_contrasts(L.a, L.b)).dense();
        pa_err = std::max(pa_err, max_abs_diff(PA, span));
    }
    return {h_err <= 1e-8 && weighted_err <= 1e-8 && pa_err <= 1e-8,
            fmt("H %.2e, weighted projector %.2e, P_A %.2e", h_err, weighted_err, pa_err)};
}

// 6. Balanced layouts: Types I, II and III coincide and Type I sums to y'y.
Verdict criterion6() {
    double type_err = 0.0, sum_err = 0.0;
    for (std::uint64_t run = 0; run < 50; ++run) {
        Rng rng = Rng::for_run(6, run);
        const auto n = random_counts(rng, LayoutSpec{.balanced = true});
        const auto data = dataset_from_counts(n, rng.normal_vector(n.sum()) + VectorXd::Constant(n.sum(), 3.0));
        const auto design = build_design(data, saturated());
        const VectorXd& y = data.response();
        const auto t1 = anova(design, y, SsType::I);
        const auto t2 = anova(design, y, SsType::II);
        const auto t3 = anova(design, y, SsType::III);
        double total = t1.sse;
        for (const auto& r : t1.rows) total += r.ss;
        sum_err = std::max(sum_err, rel(total, y.squaredNorm()));
        for (const auto& r : t3.rows) {
            type_err = std::max(type_err, rel(r.ss, t1.row(r.term).ss));
            type_err = std::max(type_err, rel(r.ss, t2.row(r.term).ss));
        }
    }
    return {type_err <= 1e-10 && sum_err <= 1e-10, fmt("types max rel %.2e, decomposition rel %.2e", type_err, sum_err)};
}

std::string capture(const std::string& cmd, int& status) {
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        status = -1;
        return out;
    }
    char chunk[4096];
    std::size_t got;
    while ((got = fread(chunk, 1, sizeof chunk, p)) > 0) out.append(chunk, got);
    const int st = pclose(p);
    status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return out;
}

// 7. simulate with seed 42 is byte-identical across invocations.
Verdict criterion7(const std::string& cli) {
    SimulationConfig cfg;
    cfg.seed = 42;
    const std::string a = render_text(simulate(cfg)) + to_json(simulate(cfg)).dump();
    cfg.threads = 4;
    const std::string b = render_text(simulate(cfg)) + to_json(simulate(cfg)).dump();
    const bool in_process = a == b;
    if (cli.empty()) return {false, fmt("in-process %s, no CLI path given", in_process ? "identical" : "DIFFERENT")};
    int s1 = 0, s2 = 0;
    const std::string c1 = capture(cli + " simulate --seed 42", s1);
    const std::string c2 = capture(cli + " simulate --seed 42", s2);
    const bool via_cli = s1 == 0 && s2 == 0 && !c1.empty() && c1 == c2;
    const bool matches = c1 == render_text(simulate(cfg));
    return {in_process && via_cli && matches,
            fmt("in-process %s, CLI %s (%zu bytes), CLI matches library %s", in_process ? "identical" : "DIFFERENT",
                via_cli ? "identical" : "DIFFERENT", c1.size(), matches ? "yes" : "no")};
}

} // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    int failed = 0;
    auto report = [&](int id, const char* what, auto&& fn) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::cout << "[" << (v.pass ? "PASS" : "FAIL") << "] criterion " << id << ": " << what << " -- " << v.detail
                  << std::endl;
    };
    report(1, "four SS routes agree on 200 random all-filled layouts", criterion1);
    report(2, "2x2 fixture gives 64/3 by every route", criterion2);
    report(3, "single empty cell splits Type III and RMFM", criterion3);
    report(4, "Type III for A tests the row-marginal hypothesis", criterion4);
    report(5, "hypothesis-matrix and projector identities", criterion5);
    report(6, "balanced layouts: Types I, II, III coincide", criterion6);
    report(7, "simulate is reproducible for a fixed seed", [&] { return criterion7(cli); });
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
