// qhist command-line runner: executes named scenarios and emits reports.
//
//   qhist run <file> [--format json|csv|text] [--seed N] [--tol X] [--out PATH]
//   qhist suite <dir> [--format ...] [--seed N] [--out DIR]
//   qhist list
//
// Exit codes: 0 all assertions pass, 1 assertion failure, 2 validation error.
// QHIST_OUT_DIR names a default output directory when --out is not given.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qhist/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitAssertionFailure = 1;
constexpr int kExitValidationError = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qhist::ScenarioError("cannot open scenario file '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string extension_for(qhist::ReportFormat format) {
    switch (format) {
        case qhist::ReportFormat::json: return ".json";
        case qhist::ReportFormat::csv: return ".csv";
        case qhist::ReportFormat::text: return ".txt";
    }
    return ".out";
}

void write_output(const std::string& content, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report to '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::optional<fs::path> default_out_dir() {
    if (const char* env = std::getenv("QHIST_OUT_DIR"); env && *env) return fs::path(env);
    return std::nullopt;
}

struct RunOptions {
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<std::string> out;
};

qhist::ScenarioFile load_scenario(const fs::path& path, const RunOptions& opts) {
    auto file = qhist::parse_scenario(read_file(path));
    if (opts.seed) file.seed = *opts.seed;
    if (opts.tol) {
        if (file.kind != "hidden_search")
            throw qhist::ScenarioError("--tol applies only to kinds with a 'tol' parameter "
                                       "(hidden_search)");
        file.parameters["tol"] = *opts.tol;
    }
    return file;
}

// Returns the process exit code for one scenario run.
int run_one(const fs::path& path, const RunOptions& opts, bool announce) {
    const auto format = qhist::parse_format(opts.format);
    const auto file = load_scenario(path, opts);
    const auto report = qhist::run_scenario(file);
    const std::string rendered = qhist::emit_report(report, format);

    std::optional<fs::path> target;
    if (opts.out) {
        target = fs::path(*opts.out);
    } else if (const auto dir = default_out_dir()) {
        fs::create_directories(*dir);
        target = *dir / (file.name + extension_for(format));
    }
    if (target) {
        write_output(rendered, *target);
        if (announce)
            std::cout << file.name << ": " << (report.passed() ? "pass" : "FAIL") << " -> "
                      << target->string() << "\n";
    } else {
        std::cout << rendered;
        if (announce && format != qhist::ReportFormat::text)
            std::cerr << file.name << ": " << (report.passed() ? "pass" : "FAIL") << "\n";
    }
    return report.passed() ? kExitPass : kExitAssertionFailure;
}

int run_suite(const fs::path& dir, const RunOptions& opts) {
    if (!fs::is_directory(dir)) {
        std::cerr << "error: '" << dir.string() << "' is not a directory\n";
        return kExitValidationError;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "error: no .json scenarios in '" << dir.string() << "'\n";
        return kExitValidationError;
    }

    int worst = kExitPass;
    for (const auto& path : files) {
        RunOptions per_file = opts;
        if (per_file.out) {
            // --out names a directory in suite mode; reports land inside it
            const fs::path out_dir(*opts.out);
            fs::create_directories(out_dir);
            per_file.out = (out_dir / (path.stem().string() +
                                       extension_for(qhist::parse_format(opts.format))))
                               .string();
        }
        try {
            const int code = run_one(path, per_file, /*announce=*/true);
            worst = std::max(worst, code);
        } catch (const qhist::ScenarioError& e) {
            std::cerr << path.string() << ": validation error: " << e.what() << "\n";
            worst = kExitValidationError;
        }
    }
    std::cout << (worst == kExitPass ? "suite: all scenarios passed"
                                     : "suite: FAILURES present")
              << "\n";
    return worst;
}

void list_kinds() {
    std::cout << "scenario kinds and parameters (defaults in brackets):\n"
              << "  epr            singlet sample space, three probability routes, conditioning\n"
              << "  golf           normalized-spin commutator scaling; dims [2,3,5,9,17,41]\n"
              << "  chsh           classical bound sweep + operator spectrum; models [1000]\n"
              << "  circuit        route agreement, deferred measurement; specs [50], dim [2]\n"
              << "  hidden_search  setup [commuting_local|singlet_von_neumann|singlet_zx|\n"
              << "                 singlet_tilted], class [von_neumann|local_basis_a|\n"
              << "                 local_basis_b|product_grid], resolution [4], tol [1e-10]\n"
              << "  locality       isolation invariance; variations [10], event_times [2],\n"
              << "                 dims [2,2,2]\n"
              << "  wavepacket     interval projector noncommutation; points [64]\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qhist: projector-algebra and consistent-histories scenario runner"};
    app.require_subcommand(1);

    RunOptions opts;
    std::string target;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--format", opts.format, "Report format: json, csv or text")
            ->check(CLI::IsMember({"json", "csv", "text"}));
        cmd->add_option("--seed", opts.seed, "Override the scenario seed");
        cmd->add_option("--tol", opts.tol, "Override the scenario 'tol' parameter");
        cmd->add_option("--out", opts.out, "Output file (run) or directory (suite)");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "Run a single scenario file");
    run_cmd->add_option("file", target, "Scenario .json file")->required();
    add_common(run_cmd);

    CLI::App* suite_cmd = app.add_subcommand("suite", "Run every scenario in a directory");
    suite_cmd->add_option("dir", target, "Directory of scenario .json files")->required();
    add_common(suite_cmd);

    app.add_subcommand("list", "List scenario kinds and their parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitValidationError;
    }

    try {
        if (app.got_subcommand("list")) {
            list_kinds();
            return kExitPass;
        }
        if (app.got_subcommand("run")) return run_one(target, opts, /*announce=*/false);
        return run_suite(target, opts);
    } catch (const qhist::ScenarioError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidationError;
    }
}
