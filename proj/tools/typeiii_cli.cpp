// typeiii: ANOVA tables (Types I/II/III), two-factor equivalence checks, and a
// random-layout simulator.
//
// Exit codes: 0 success, 1 domain error (bad data, bad formula, failed check), 2 usage error.

#include "typeiii/typeiii.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <string>

namespace {

enum class Format { text, json };

struct RunConfig {
    std::string data;
    std::string formula;
    std::string type = "III";
    std::string format = "text";
    double tol = -1.0; // negative: command default
    typeiii::SimulationConfig sim;
};

constexpr int exit_domain = 1;
constexpr int exit_usage = 2;

Format parse_format(const std::string& s) { return s == "json" ? Format::json : Format::text; }

int cmd_anova(const RunConfig& cfg) {
    const auto model = typeiii::parse_formula(cfg.formula);
    if (!model.hierarchical())
        std::cerr << "warning: formula '" << typeiii::render(model) << "' is not hierarchical\n";
    const auto type = typeiii::parse_ss_type(cfg.type);
    const auto data = typeiii::load_csv(cfg.data, model.response, model.factor_names());
    const auto design = typeiii::build_design(data, model);
    const double tol = cfg.tol > 0 ? cfg.tol : typeiii::default_rank_tol;
    const auto table = typeiii::anova(design, data.response(), type, tol);
    if (parse_format(cfg.format) == Format::json)
        std::cout << typeiii::to_json(table).dump(2) << '\n';
    else
        std::cout << typeiii::render_text(table);
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    const auto model = typeiii::parse_formula(cfg.formula);
    const auto factors = model.factor_names();
    if (factors.size() != 2) {
        std::cerr << "verify: formula must name exactly two factors, got " << factors.size() << '\n';
        return exit_usage;
    }
    const auto data = typeiii::load_csv(cfg.data, model.response, factors);
    const auto report = typeiii::equivalence_report(data, factors[0], factors[1], cfg.tol > 0 ? cfg.tol : 1e-8);
    if (parse_format(cfg.format) == Format::json)
        std::cout << typeiii::to_json(report).dump(2) << '\n';
    else
        std::cout << typeiii::render_text(report);
    return report.pass ? 0 : exit_domain;
}

int cmd_simulate(RunConfig cfg) {
    if (cfg.tol > 0) cfg.sim.tol = cfg.tol;
    const auto& l = cfg.sim.layout;
    if (l.a_min < 2 || l.b_min < 2 || l.a_min > l.a_max || l.b_min > l.b_max || l.n_min < 1 || l.n_min > l.n_max ||
        l.empty_prob < 0.0 || l.empty_prob > 1.0 || l.empty_cells < 0) {
        std::cerr << "simulate: invalid layout ranges\n";
        return exit_usage;
    }
    const auto summary = typeiii::simulate(cfg.sim);
    if (parse_format(cfg.format) == Format::json)
        std::cout << typeiii::to_json(summary).dump(2) << '\n';
    else
        std::cout << typeiii::render_text(summary);
    return summary.all_passed() ? 0 : exit_domain;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Type I/II/III sums of squares for factorial linear models"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* anova = app.add_subcommand("anova", "ANOVA table for a model formula");
    anova->add_option("--data", cfg.data, "CSV file with a header row")->required();
    anova->add_option("--formula", cfg.formula, "model formula, e.g. \"y ~ A*B\"")->required();
    anova->add_option("--type", cfg.type, "sum of squares type: I, II or III")
        ->check(CLI::IsMember({"I", "II", "III", "1", "2", "3"}));
    anova->add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    anova->add_option("--tol", cfg.tol, "relative rank tolerance");

    auto* verify = app.add_subcommand("verify", "check Type III against the classical two-factor SSs");
    verify->add_option("--data", cfg.data, "CSV file with a header row")->required();
    verify->add_option("--formula", cfg.formula, "formula naming the response and two factors")->required();
    verify->add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    verify->add_option("--tol", cfg.tol, "relative tolerance for SS agreement");

    auto* simulate = app.add_subcommand("simulate", "verify on random two-factor layouts");
    auto& sim = cfg.sim;
    auto& lay = sim.layout;
    simulate->add_option("--runs", sim.runs, "number of layouts");
    simulate->add_option("--seed", sim.seed, "PRNG seed (default 42)");
    simulate->add_option("--a-min", lay.a_min);
    simulate->add_option("--a-max", lay.a_max);
    simulate->add_option("--b-min", lay.b_min);
    simulate->add_option("--b-max", lay.b_max);
    simulate->add_option("--n-min", lay.n_min, "smallest cell count");
    simulate->add_option("--n-max", lay.n_max, "largest cell count");
    simulate->add_option("--empty-prob", lay.empty_prob, "per-cell probability of an empty cell");
    simulate->add_option("--empty-cells", lay.empty_cells, "number of cells to empty in every layout");
    simulate->add_flag("--balanced", lay.balanced, "equal counts in every cell");
    simulate->add_option("--threads", sim.threads, "worker threads (output order is fixed)");
    simulate->add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    simulate->add_option("--tol", cfg.tol, "relative tolerance for SS agreement");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*anova) return cmd_anova(cfg);
        if (*verify) return cmd_verify(cfg);
        return cmd_simulate(cfg);
    } catch (const typeiii::formula_error& e) {
        std::cerr << "formula error: " << e.what() << '\n';
    } catch (const typeiii::data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return exit_domain;
}
