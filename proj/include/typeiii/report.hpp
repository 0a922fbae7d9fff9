#pragma once

// Text and JSON renderings. Every real number is written with 12 significant digits in
// both forms; JSON numbers are rounded to 12 digits first so that the shortest
// round-trip representation never carries more.

#include "typeiii/simulate.hpp"
#include "typeiii/sstypes.hpp"
#include "typeiii/twofactor.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>

namespace typeiii {

using Json = nlohmann::ordered_json;

inline std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline double round12(double x) { return std::strtod(fmt12(x).c_str(), nullptr); }

inline Json json_number(std::optional<double> x) {
    if (!x || !std::isfinite(*x)) return nullptr;
    return round12(*x);
}

inline Json to_json(const AnovaTable& t) {
    Json terms = Json::array();
    for (const auto& r : t.rows) {
        terms.push_back({{"term", r.term.label()},
                         {"ss", json_number(r.ss)},
                         {"df", r.df},
                         {"f", json_number(r.f)},
                         {"p", json_number(r.p)}});
    }
    return {{"type", to_string(t.type)},
            {"terms", terms},
            {"sse", json_number(t.sse)},
            {"dfe", t.dfe},
            {"mse", json_number(t.mse)}};
}

namespace detail {

inline std::string cell(const std::optional<double>& x) { return x ? fmt12(*x) : "-"; }

inline std::string pad(std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}

} // namespace detail

inline std::string render_text(const AnovaTable& t) {
    std::ostringstream out;
    std::size_t w = 8;
    for (const auto& r : t.rows) w = std::max(w, r.term.label().size() + 2);
    out << "Type " << to_string(t.type) << " sums of squares\n";
    out << detail::pad("Term", w) << detail::pad("SS", 20) << detail::pad("df", 6) << detail::pad("F", 20) << "p\n";
    for (const auto& r : t.rows) {
        out << detail::pad(r.term.label(), w) << detail::pad(fmt12(r.ss), 20) << detail::pad(std::to_string(r.df), 6)
            << detail::pad(detail::cell(r.f), 20) << detail::cell(r.p) << '\n';
    }
    out << detail::pad("Error", w) << detail::pad(fmt12(t.sse), 20) << detail::pad(std::to_string(t.dfe), 6) << '\n';
    out << "MSE " << detail::cell(t.mse) << '\n';
    return out.str();
}

namespace detail {

inline Json ss_json(const std::optional<SSResult>& r) {
    if (!r) return nullptr;
    return {{"ss", json_number(r->ss)}, {"df", r->df}};
}

inline Json effect_json(const EffectReport& e) {
    Json notes = Json::array();
    for (const auto& n : e.notes) notes.push_back(n);
    return {{"term", e.term.label()},
            {"levels", e.levels},
            {"type3", ss_json(e.type3)},
            {"type2", ss_json(e.type2)},
            {"rmfm", ss_json(e.rmfm)},
            {"mwsm", ss_json(e.mwsm)},
            {"contrast", ss_json(e.contrast)},
            {"type1", ss_json(e.type1)},
            {"max_rel_discrepancy", json_number(e.max_rel_discrepancy)},
            {"pass", e.pass},
            {"notes", notes}};
}

inline void effect_text(std::ostream& out, const EffectReport& e) {
    auto line = [&](const char* name, const std::optional<SSResult>& r) {
        out << "  " << pad(name, 10);
        if (r)
            out << pad(fmt12(r->ss), 20) << "df " << r->df << '\n';
        else
            out << "undefined\n";
    };
    out << "Effect " << e.term.label() << " (" << e.levels << " levels)\n";
    line("Type III", e.type3);
    line("Type II", e.type2);
    line("RMFM", e.rmfm);
    line("MWSM", e.mwsm);
    line("contrast", e.contrast);
    if (e.type1) line("Type I", e.type1);
    for (const auto& n : e.notes) out << "  note: " << n << '\n';
    out << "  max relative discrepancy " << fmt12(e.max_rel_discrepancy) << "  " << (e.pass ? "PASS" : "FAIL")
        << '\n';
}

} // namespace detail

inline Json to_json(const EquivalenceReport& r) {
    return {{"response", r.response},
            {"factors", {r.a_name, r.b_name}},
            {"levels", {r.a, r.b}},
            {"n_obs", r.n_obs},
            {"empty_cells", r.n_empty},
            {"balanced", r.balanced},
            {"tolerance", r.tol},
            {"effects", {detail::effect_json(r.effect_a), detail::effect_json(r.effect_b)}},
            {"max_rel_discrepancy", json_number(r.max_rel_discrepancy)},
            {"verdict", r.pass ? "pass" : "fail"}};
}

inline std::string render_text(const EquivalenceReport& r) {
    std::ostringstream out;
    out << "Two-factor layout " << r.a_name << " x " << r.b_name << ": " << r.a << " x " << r.b << ", n = " << r.n_obs
        << ", empty cells " << r.n_empty << (r.balanced ? ", balanced" : "") << '\n';
    detail::effect_text(out, r.effect_a);
    detail::effect_text(out, r.effect_b);
    out << "verdict: " << (r.pass ? "PASS" : "FAIL") << " (max relative discrepancy " << fmt12(r.max_rel_discrepancy)
        << ", tolerance " << fmt12(r.tol) << ")\n";
    return out.str();
}

inline std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

inline std::string render_text(const SimulationSummary& s) {
    const auto& c = s.config;
    const auto& l = c.layout;
    std::ostringstream out;
    out << "simulate: runs=" << c.runs << " seed=" << c.seed << " a=[" << l.a_min << "," << l.a_max << "] b=["
        << l.b_min << "," << l.b_max << "] n=[" << l.n_min << "," << l.n_max << "] empty_prob=" << fmt12(l.empty_prob)
        << " empty_cells=" << l.empty_cells << " tol=" << fmt12(c.tol) << '\n';
    for (const auto& r : s.runs) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "run %4zu  a=%ld b=%ld n=%4ld empty=%ld  max_rel=%s  %s", r.index,
                      static_cast<long>(r.a), static_cast<long>(r.b), static_cast<long>(r.n_obs),
                      static_cast<long>(r.n_empty), sci(r.max_rel_discrepancy).c_str(), r.pass ? "PASS" : "FAIL");
        out << buf;
        if (!r.error.empty()) out << "  error: " << r.error;
        out << '\n';
    }
    out << "passed " << s.passed << "/" << s.runs.size() << "  worst max_rel=" << sci(s.worst) << '\n';
    return out.str();
}

inline Json to_json(const SimulationSummary& s) {
    Json runs = Json::array();
    for (const auto& r : s.runs)
        runs.push_back({{"run", r.index},
                        {"a", r.a},
                        {"b", r.b},
                        {"n_obs", r.n_obs},
                        {"empty_cells", r.n_empty},
                        {"max_rel_discrepancy", json_number(r.max_rel_discrepancy)},
                        {"pass", r.pass},
                        {"error", r.error.empty() ? Json(nullptr) : Json(r.error)}});
    return {{"runs", runs},
            {"seed", s.config.seed},
            {"passed", s.passed},
            {"total", s.runs.size()},
            {"worst_max_rel_discrepancy", json_number(s.worst)}};
}

} // namespace typeiii
