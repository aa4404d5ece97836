#ifndef QHIST_REPORT_HPP
#define QHIST_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qhist {

// ── Report model ─────────────────────────────────────────────────────────────

// One numeric result; cells that back an assertion carry their tolerance.
struct ReportCell {
    double value = 0;
    std::optional<double> tol;
    std::optional<bool> pass;

    ReportCell() = default;
    ReportCell(double v) : value(v) {}  // implicit, so table rows read as numeric literals
    ReportCell(double v, double t, bool p) : value(v), tol(t), pass(p) {}
};

struct ReportRow {
    std::string label;
    std::vector<ReportCell> cells;
};

struct ReportTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<ReportRow> rows;
};

struct ReportAssertion {
    std::string name;
    double value = 0;
    double expected = 0;
    double tol = 0;
    bool pass = false;
};

struct ScenarioEcho {
    std::string name;
    std::string kind;
    std::uint64_t seed = 0;
    // resolved parameters in canonical order; values are JSON fragments
    std::vector<std::pair<std::string, std::string>> parameters;
};

struct Report {
    ScenarioEcho scenario;
    std::vector<ReportTable> tables;
    std::vector<ReportAssertion> assertions;
    std::vector<std::string> notes;
    double duration_ms = 0;  // excluded from the canonical json form

    bool passed() const {
        for (const auto& a : assertions)
            if (!a.pass) return false;
        return true;
    }

    ReportTable& add_table(std::string name, std::vector<std::string> columns) {
        tables.push_back(ReportTable{std::move(name), std::move(columns), {}});
        return tables.back();
    }

    // records the assertion and returns its outcome
    bool assert_near(std::string name, double value, double expected, double tol) {
        const bool ok = std::abs(value - expected) <= tol;
        assertions.push_back(ReportAssertion{std::move(name), value, expected, tol, ok});
        return ok;
    }

    bool assert_le(std::string name, double value, double bound) {
        const bool ok = value <= bound;
        assertions.push_back(ReportAssertion{std::move(name), value, bound, 0.0, ok});
        return ok;
    }
};

// ── Emission ─────────────────────────────────────────────────────────────────
//
// The json form is the canonical schema: fixed key order, floats at 17
// significant digits (exact double round-trip). Wall-clock duration is
// deliberately not part of it, so identical (scenario, seed) inputs produce
// byte-identical json; the text form carries the duration instead.

enum class ReportFormat { json, csv, text };

inline ReportFormat parse_format(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    if (s == "text") return ReportFormat::text;
    throw std::invalid_argument("unknown report format '" + s + "'");
}

namespace detail {

inline std::string json_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // bare integers and specials stay valid json numbers
    if (s == "inf" || s == "nan" || s == "-inf" || s == "-nan")
        throw std::invalid_argument("report: non-finite value cannot be emitted");
    return s;
}

inline std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out + "\"";
}

}  // namespace detail

inline std::string emit_json(const Report& r) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"scenario\": {\n";
    os << "    \"name\": " << detail::json_string(r.scenario.name) << ",\n";
    os << "    \"kind\": " << detail::json_string(r.scenario.kind) << ",\n";
    os << "    \"seed\": " << r.scenario.seed << ",\n";
    os << "    \"parameters\": {";
    for (size_t i = 0; i < r.scenario.parameters.size(); ++i) {
        os << (i ? ", " : "") << detail::json_string(r.scenario.parameters[i].first) << ": "
           << r.scenario.parameters[i].second;
    }
    os << "}\n  },\n";

    os << "  \"tables\": [";
    for (size_t t = 0; t < r.tables.size(); ++t) {
        const auto& tab = r.tables[t];
        os << (t ? ",\n" : "\n") << "    {\n      \"name\": " << detail::json_string(tab.name)
           << ",\n      \"columns\": [";
        for (size_t c = 0; c < tab.columns.size(); ++c)
            os << (c ? ", " : "") << detail::json_string(tab.columns[c]);
        os << "],\n      \"rows\": [";
        for (size_t i = 0; i < tab.rows.size(); ++i) {
            const auto& row = tab.rows[i];
            os << (i ? ",\n" : "\n") << "        {\"label\": " << detail::json_string(row.label)
               << ", \"cells\": [";
            for (size_t c = 0; c < row.cells.size(); ++c) {
                const auto& cell = row.cells[c];
                os << (c ? ", " : "") << "{\"value\": " << detail::json_double(cell.value);
                if (cell.tol) os << ", \"tol\": " << detail::json_double(*cell.tol);
                if (cell.pass) os << ", \"pass\": " << (*cell.pass ? "true" : "false");
                os << "}";
            }
            os << "]}";
        }
        os << (tab.rows.empty() ? "]" : "\n      ]") << "\n    }";
    }
    os << (r.tables.empty() ? "]" : "\n  ]") << ",\n";

    os << "  \"assertions\": [";
    for (size_t i = 0; i < r.assertions.size(); ++i) {
        const auto& a = r.assertions[i];
        os << (i ? ",\n" : "\n") << "    {\"name\": " << detail::json_string(a.name)
           << ", \"value\": " << detail::json_double(a.value)
           << ", \"expected\": " << detail::json_double(a.expected)
           << ", \"tol\": " << detail::json_double(a.tol) << ", \"pass\": "
           << (a.pass ? "true" : "false") << "}";
    }
    os << (r.assertions.empty() ? "]" : "\n  ]") << ",\n";

    os << "  \"notes\": [";
    for (size_t i = 0; i < r.notes.size(); ++i)
        os << (i ? ", " : "") << detail::json_string(r.notes[i]);
    os << "],\n";
    os << "  \"passed\": " << (r.passed() ? "true" : "false") << "\n";
    os << "}\n";
    return os.str();
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

// One header line, then one line per table row across all tables.
inline std::string emit_csv(const Report& r) {
    std::ostringstream os;
    os << "table,row,values...\n";
    for (const auto& tab : r.tables) {
        for (const auto& row : tab.rows) {
            os << detail::csv_field(tab.name) << "," << detail::csv_field(row.label);
            for (const auto& cell : row.cells) os << "," << detail::json_double(cell.value);
            os << "\n";
        }
    }
    return os.str();
}

inline std::string emit_text(const Report& r) {
    std::ostringstream os;
    os << "scenario " << r.scenario.name << " (kind " << r.scenario.kind << ", seed "
       << r.scenario.seed << ")\n";
    for (const auto& [k, v] : r.scenario.parameters) os << "  param " << k << " = " << v << "\n";
    for (const auto& tab : r.tables) {
        os << "\n[" << tab.name << "]\n";
        os << "  " << "row";
        for (const auto& c : tab.columns) os << "  |  " << c;
        os << "\n";
        for (const auto& row : tab.rows) {
            os << "  " << row.label;
            for (const auto& cell : row.cells) {
                char buf[48];
                std::snprintf(buf, sizeof buf, "  |  %.12g", cell.value);
                os << buf;
                if (cell.tol) {
                    std::snprintf(buf, sizeof buf, " (tol %.3g)", *cell.tol);
                    os << buf;
                }
                if (cell.pass) os << (*cell.pass ? " ok" : " FAIL");
            }
            os << "\n";
        }
    }
    if (!r.assertions.empty()) os << "\nassertions:\n";
    for (const auto& a : r.assertions) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "  [%s] %s: value %.12g vs %.12g (tol %.3g)\n",
                      a.pass ? "pass" : "FAIL", a.name.c_str(), a.value, a.expected, a.tol);
        os << buf;
    }
    for (const auto& n : r.notes) os << "note: " << n << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "result: %s in %.1f ms\n", r.passed() ? "PASS" : "FAIL",
                  r.duration_ms);
    os << buf;
    return os.str();
}

inline std::string emit_report(const Report& r, ReportFormat format) {
    switch (format) {
        case ReportFormat::json: return emit_json(r);
        case ReportFormat::csv: return emit_csv(r);
        case ReportFormat::text: return emit_text(r);
    }
    throw std::logic_error("emit_report: unreachable");
}

}  // namespace qhist

#endif
