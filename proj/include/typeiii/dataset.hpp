#pragma once

#include "typeiii/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace typeiii {

// A classification variable. Levels are kept in order of first appearance.
struct Factor {
    std::string name;
    std::vector<std::string> levels;
    std::vector<int> codes; // per observation, index into levels

    std::size_t n_levels() const noexcept { return levels.size(); }

    static Factor from_labels(std::string name, const std::vector<std::string>& labels) {
        Factor f{std::move(name), {}, {}};
        f.codes.reserve(labels.size());
        for (const auto& l : labels) {
            auto it = std::find(f.levels.begin(), f.levels.end(), l);
            if (it == f.levels.end()) {
                f.levels.push_back(l);
                it = f.levels.end() - 1;
            }
            f.codes.push_back(static_cast<int>(it - f.levels.begin()));
        }
        return f;
    }
};

class Dataset {
public:
    using Column = std::pair<std::string, std::vector<std::string>>;

    Dataset(std::string response_name, Eigen::VectorXd y, const std::vector<Column>& factor_columns)
        : response_name_(std::move(response_name)), y_(std::move(y)) {
        if (y_.size() < 1) throw data_error("dataset has no observations");
        for (const auto& [name, labels] : factor_columns) {
            if (labels.size() != static_cast<std::size_t>(y_.size()))
                throw data_error("factor '" + name + "' has " + std::to_string(labels.size()) +
                                 " values, expected " + std::to_string(y_.size()));
            if (has_factor(name)) throw data_error("duplicate factor '" + name + "'");
            factors_.push_back(Factor::from_labels(name, labels));
        }
    }

    std::size_t n_obs() const noexcept { return static_cast<std::size_t>(y_.size()); }
    const std::string& response_name() const noexcept { return response_name_; }
    const Eigen::VectorXd& response() const noexcept { return y_; }
    const std::vector<Factor>& factors() const noexcept { return factors_; }

    bool has_factor(std::string_view name) const {
        return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.name == name; });
    }

    const Factor& factor(std::string_view name) const {
        for (const auto& f : factors_)
            if (f.name == name) return f;
        throw data_error("unknown factor '" + std::string(name) + "'");
    }

    // Same classification, different response (used by simulations and scale checks).
    Dataset with_response(Eigen::VectorXd y) const {
        if (y.size() != y_.size()) throw data_error("response length mismatch");
        Dataset copy = *this;
        copy.y_ = std::move(y);
        return copy;
    }

private:
    std::string response_name_;
    Eigen::VectorXd y_;
    std::vector<Factor> factors_;
};

namespace csv {

// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
inline std::vector<std::vector<std::string>> read_records(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    char c;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field_started) throw data_error("unexpected quote inside unquoted field");
            quoted = true;
            field_started = true;
            break;
        case ',': end_field(); break;
        case '\r':
            if (in.peek() == '\n') in.get(c);
            end_row();
            break;
        case '\n': end_row(); break;
        default:
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw data_error("unterminated quoted field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline bool parse_real(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return false;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

inline std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace csv

// Reads a header-prefixed CSV. Factor columns are taken verbatim as level labels.
inline Dataset read_csv(std::istream& in, const std::string& response_name,
                        const std::vector<std::string>& factor_names) {
    const auto records = csv::read_records(in);
    if (records.empty()) throw data_error("empty file");
    const auto& header = records.front();
    auto column_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (csv::trim(header[i]) == name) return i;
        throw data_error("missing column '" + name + "'");
    };
    const std::size_t ycol = column_of(response_name);
    std::vector<std::size_t> fcols;
    for (const auto& f : factor_names) fcols.push_back(column_of(f));

    const std::size_t n = records.size() - 1;
    if (n == 0) throw data_error("file has a header but no data rows");
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    std::vector<Dataset::Column> columns;
    for (const auto& f : factor_names) columns.push_back({f, {}});
    for (std::size_t r = 0; r < n; ++r) {
        const auto& rec = records[r + 1];
        const std::size_t row_no = r + 2; // 1-based, header is row 1
        if (rec.size() != header.size())
            throw data_error("row " + std::to_string(row_no) + " has " + std::to_string(rec.size()) +
                             " fields, expected " + std::to_string(header.size()));
        double v;
        if (!csv::parse_real(rec[ycol], v))
            throw data_error("non-numeric response '" + rec[ycol] + "' in row " + std::to_string(row_no));
        y(static_cast<Eigen::Index>(r)) = v;
        for (std::size_t k = 0; k < fcols.size(); ++k) {
            const auto label = std::string(csv::trim(rec[fcols[k]]));
            if (label.empty())
                throw data_error("empty level for factor '" + factor_names[k] + "' in row " +
                                 std::to_string(row_no));
            columns[k].second.push_back(label);
        }
    }
    return Dataset(response_name, std::move(y), columns);
}

inline Dataset load_csv(const std::string& path, const std::string& response_name,
                        const std::vector<std::string>& factor_names) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "'");
    return read_csv(in, response_name, factor_names);
}

inline void write_csv(std::ostream& out, const Dataset& data) {
    out << csv::quote(data.response_name());
    for (const auto& f : data.factors()) out << ',' << csv::quote(f.name);
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < data.n_obs(); ++i) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, data.response()(static_cast<Eigen::Index>(i)));
        out << std::string_view(buf, static_cast<std::size_t>(end - buf));
        for (const auto& f : data.factors()) out << ',' << csv::quote(f.levels[static_cast<std::size_t>(f.codes[i])]);
        out << '\n';
    }
}

} // namespace typeiii
