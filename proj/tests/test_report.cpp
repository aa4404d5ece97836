#include <doctest.h>

#include "qhist/scenario.hpp"

using namespace qhist;

TEST_SUITE("report") {

TEST_CASE("empty report emits a valid json skeleton") {
    Report r;
    r.scenario = {"empty", "epr", 7, {}};
    const std::string json = emit_json(r);
    const Report back = parse_report(json);
    CHECK(back.scenario.name == "empty");
    CHECK(back.tables.empty());
    CHECK(back.assertions.empty());
    CHECK(reports_equal(r, back));
}

TEST_CASE("json round-trip preserves every field exactly") {
    Report r;
    r.scenario = {"roundtrip", "golf", 1729, {{"dims", "[2, 3]"}}};
    auto& t = r.add_table("numbers", {"x", "y"});
    t.rows.push_back(ReportRow{"row \"quoted\"", {{0.1}, {1e-300, 1e-12, true}}});
    t.rows.push_back(ReportRow{"row2", {{-2.0 * std::sqrt(2.0)}, {0.30000000000000004}}});
    r.assert_near("pi-ish", 3.141592653589793, 3.0, 0.2);
    r.assert_le("small", 1e-13, 1e-12);
    r.notes.push_back("a note\nwith a newline and a\ttab");
    r.duration_ms = 42.0;  // not part of the canonical form

    const std::string json = emit_json(r);
    const Report back = parse_report(json);
    CHECK(reports_equal(r, back));

    // double emission is byte-identical (the determinism contract's core)
    CHECK(emit_json(r) == json);
}

TEST_CASE("csv row count equals the total table row count") {
    Report r;
    r.scenario = {"csv", "epr", 1, {}};
    auto& t1 = r.add_table("one", {"v"});
    t1.rows.push_back(ReportRow{"a", {{1.0}}});
    t1.rows.push_back(ReportRow{"label, with comma", {{2.0}}});
    auto& t2 = r.add_table("two", {"v", "w"});
    t2.rows.push_back(ReportRow{"c", {{3.0}, {4.0}}});
    const std::string csv = emit_csv(r);
    // json oracle: count rows across tables
    size_t json_rows = 0;
    for (const auto& t : parse_report(emit_json(r)).tables) json_rows += t.rows.size();
    const size_t lines = static_cast<size_t>(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(lines == json_rows + 1);  // header included
    CHECK(json_rows == 3);
    CHECK(csv.find("\"label, with comma\"") != std::string::npos);
}

TEST_CASE("scenario parsing validates kinds, keys and types") {
    CHECK_THROWS_AS(parse_scenario("not json at all"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(R"({"kind": "epr"})"), ScenarioError);  // missing name
    CHECK_THROWS_AS(parse_scenario(R"({"name": "x", "kind": "unknown"})"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(R"({"name": "x", "kind": "epr", "extra": 1})"), ScenarioError);
    CHECK_THROWS_AS(
        parse_scenario(R"({"name": "x", "kind": "epr", "parameters": {"zzz": 1}})"),
        ScenarioError);
    CHECK_THROWS_AS(  // parameter types and ranges are validated when the run resolves them
        run_scenario(parse_scenario(
            R"({"name": "x", "kind": "golf", "parameters": {"dims": "nope"}})")),
        ScenarioError);
    CHECK_THROWS_AS(
        run_scenario(parse_scenario(
            R"({"name": "x", "kind": "golf", "parameters": {"dims": [1]}})")),
        ScenarioError);
    CHECK_THROWS_AS(
        run_scenario(parse_scenario(
            R"({"name": "x", "kind": "hidden_search", "parameters": {"setup": "zzz"}})")),
        ScenarioError);

    const auto ok = parse_scenario(R"({"name": "x", "kind": "epr", "seed": 5})");
    CHECK(ok.seed == 5);
    CHECK(ok.kind == "epr");
}

TEST_CASE("same scenario and seed produce byte-identical json reports") {
    const auto file = parse_scenario(
        R"({"name": "det", "kind": "chsh", "seed": 99, "parameters": {"models": 50}})");
    const std::string first = emit_json(run_scenario(file));
    const std::string second = emit_json(run_scenario(file));
    CHECK(first == second);
    CHECK(first.find("\"seed\": 99") != std::string::npos);

    // a different seed changes the sweep values but not validity
    auto reseeded = file;
    reseeded.seed = 100;
    const auto report = run_scenario(reseeded);
    CHECK(report.passed());
}

TEST_CASE("every scenario kind runs green at defaults") {
    for (const std::string kind :
         {"epr", "golf", "chsh", "circuit", "hidden_search", "locality", "wavepacket"}) {
        ScenarioFile file;
        file.name = "defaults-" + kind;
        file.kind = kind;
        file.parameters = nlohmann::json::object();
        if (kind == "chsh") file.parameters["models"] = 100;   // keep the suite quick
        if (kind == "circuit") file.parameters["specs"] = 10;
        const auto report = run_scenario(file);
        CHECK_MESSAGE(report.passed(), "kind ", kind, " failed");
        CHECK(report.scenario.kind == kind);
        // every asserted cell carries its tolerance in the canonical form
        const auto back = parse_report(emit_json(report));
        for (const auto& table : back.tables)
            for (const auto& row : table.rows)
                for (const auto& cell : row.cells)
                    if (cell.pass.has_value()) CHECK(cell.tol.has_value());
    }
}

TEST_CASE("report format names parse and unknown ones are rejected") {
    CHECK(parse_format("json") == ReportFormat::json);
    CHECK(parse_format("csv") == ReportFormat::csv);
    CHECK(parse_format("text") == ReportFormat::text);
    CHECK_THROWS_AS(parse_format("yaml"), std::invalid_argument);
}

TEST_CASE("text form carries the duration and the verdict") {
    Report r;
    r.scenario = {"t", "epr", 1, {}};
    r.assert_near("always", 1.0, 1.0, 0.0);
    r.duration_ms = 12.5;
    const std::string text = emit_text(r);
    CHECK(text.find("12.5 ms") != std::string::npos);
    CHECK(text.find("PASS") != std::string::npos);
}

}  // TEST_SUITE
