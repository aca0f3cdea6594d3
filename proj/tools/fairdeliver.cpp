// Scenario runner CLI. All protocol work happens behind the C API in
// libfairdeliver; this binary only parses arguments, shells scenarios
// through the engine, renders verdicts and aggregates suite reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairdeliver.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Options {
    std::string scenario;
    std::string suite_dir;
    std::optional<uint64_t> seed;
    std::string mode;
    std::optional<uint64_t> n;
    std::optional<uint64_t> eta;
    std::string out_path;
    std::string transcript_path;
    bool quiet = false;
};

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << text;
    return bool(out);
}

fdl_options* make_engine_options(const Options& opt) {
    fdl_options* eopt = fdl_options_new();
    if (opt.seed) fdl_options_set_seed(eopt, *opt.seed);
    if (!opt.mode.empty()) fdl_options_set_mode(eopt, opt.mode.c_str());
    if (opt.n) fdl_options_set_chunk_count(eopt, *opt.n);
    if (opt.eta) fdl_options_set_chunk_size(eopt, *opt.eta);
    return eopt;
}

void print_report(const json& report, bool quiet) {
    const auto& sc = report["scenario"];
    std::cout << "scenario " << sc["name"].get<std::string>() << " (mode "
              << sc["mode"].get<std::string>() << ", n " << sc["n"] << ", eta " << sc["eta"]
              << ", seed " << sc["seed"] << ")\n";
    for (const auto& run : report["runs"]) {
        if (report["runs"].size() > 1)
            std::cout << " rep " << run["rep"] << " (seed " << run["seed"] << ")\n";
        for (const auto& v : run["verdicts"]) {
            bool pass = v["pass"].get<bool>();
            if (quiet && pass) continue;
            std::cout << "  [" << (pass ? "PASS" : "FAIL") << "] "
                      << v["name"].get<std::string>() << " — " << v["property"].get<std::string>();
            std::string detail = v["detail"].get<std::string>();
            if (!detail.empty()) std::cout << " (" << detail << ")";
            std::cout << "\n";
        }
    }
    const auto& sum = report["summary"];
    std::cout << "result: " << (sum["pass"].get<bool>() ? "PASS" : "FAIL") << " ("
              << sum["passed"] << "/" << sum["runs"] << " runs)\n";
}

int run_one(const Options& opt) {
    fdl_options* eopt = make_engine_options(opt);
    fdl_result* res = nullptr;
    fdl_status st = fdl_run_scenario_file(opt.scenario.c_str(), eopt, &res);
    fdl_options_free(eopt);
    if (st != FDL_OK) {
        std::cerr << "error: " << fdl_status_name(st) << ": " << fdl_last_error() << "\n";
        return kExitUsage;
    }
    json report = json::parse(fdl_result_report_json(res));
    print_report(report, opt.quiet);
    bool ok = fdl_result_passed(res) == 1;
    if (!opt.out_path.empty() && !write_file(opt.out_path, fdl_result_report_json(res))) {
        std::cerr << "error: cannot write " << opt.out_path << "\n";
        fdl_result_free(res);
        return kExitUsage;
    }
    if (!opt.transcript_path.empty() &&
        !write_file(opt.transcript_path, fdl_result_transcript_jsonl(res))) {
        std::cerr << "error: cannot write " << opt.transcript_path << "\n";
        fdl_result_free(res);
        return kExitUsage;
    }
    fdl_result_free(res);
    return ok ? kExitPass : kExitFail;
}

int run_suite(const Options& opt) {
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(opt.suite_dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    if (ec) {
        std::cerr << "error: cannot read directory " << opt.suite_dir << "\n";
        return kExitUsage;
    }
    if (files.empty()) {
        std::cerr << "error: no scenario files in " << opt.suite_dir << "\n";
        return kExitUsage;
    }
    std::sort(files.begin(), files.end());

    json aggregate;
    aggregate["schema"] = 1;
    aggregate["build"] = json::parse(fdl_build_info());
    aggregate["suite"] = opt.suite_dir;
    json scenarios = json::array();
    size_t passed = 0, failed = 0;
    for (const auto& path : files) {
        fdl_options* eopt = make_engine_options(opt);
        fdl_result* res = nullptr;
        fdl_status st = fdl_run_scenario_file(path.c_str(), eopt, &res);
        fdl_options_free(eopt);
        if (st != FDL_OK) {
            std::cerr << "error in " << path.filename().string() << ": " << fdl_status_name(st)
                      << ": " << fdl_last_error() << "\n";
            return kExitUsage;
        }
        json report = json::parse(fdl_result_report_json(res));
        bool ok = fdl_result_passed(res) == 1;
        ok ? ++passed : ++failed;
        std::cout << "[" << (ok ? "PASS" : "FAIL") << "] " << path.filename().string();
        if (!ok) {
            std::cout << " —";
            for (const auto& run : report["runs"])
                for (const auto& v : run["verdicts"])
                    if (!v["pass"].get<bool>()) std::cout << " " << v["name"].get<std::string>();
        }
        std::cout << "\n";
        json entry;
        entry["file"] = path.filename().string();
        entry["pass"] = ok;
        entry["report"] = report;
        scenarios.push_back(entry);
        fdl_result_free(res);
    }
    aggregate["scenarios"] = scenarios;
    aggregate["summary"] = {{"total", files.size()},
                            {"passed", passed},
                            {"failed", failed},
                            {"pass", failed == 0}};
    std::cout << "suite result: " << (failed == 0 ? "PASS" : "FAIL") << " (" << passed << "/"
              << files.size() << " scenarios)\n";
    if (!opt.out_path.empty() && !write_file(opt.out_path, aggregate.dump(2))) {
        std::cerr << "error: cannot write " << opt.out_path << "\n";
        return kExitUsage;
    }
    return failed == 0 ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairdeliver — blockchain-arbitrated fair p2p content delivery simulator"};
    Options opt;
    app.add_option("scenario", opt.scenario, "Scenario file to run (JSON)");
    app.add_option("--suite", opt.suite_dir, "Run every *.json scenario in a directory");
    uint64_t seed_val = 0;
    auto* seed_opt =
        app.add_option("--seed", seed_val, "Override the scenario seed (default: file value)");
    app.add_option("--mode", opt.mode, "Override the mode: download or stream")
        ->check(CLI::IsMember({"download", "stream"}));
    uint64_t n_val = 0;
    auto* n_opt = app.add_option("--n", n_val, "Override the chunk count (power of two)");
    uint64_t eta_val = 0;
    auto* eta_opt =
        app.add_option("--eta", eta_val, "Override the chunk size in bytes (multiple of 32)");
    app.add_option("--out", opt.out_path, "Write the report (JSON) to this file");
    app.add_option("--transcript", opt.transcript_path,
                   "Write round-by-round transcripts (JSON lines) to this file");
    app.add_flag("--quiet", opt.quiet, "Print failing verdicts only");
    app.add_flag_callback(
        "--build-info", [] { std::cout << fdl_build_info() << "\n"; },
        "Print primitive identifiers and schema versions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }
    if (seed_opt->count()) opt.seed = seed_val;
    if (n_opt->count()) opt.n = n_val;
    if (eta_opt->count()) opt.eta = eta_val;

    if (app.count("--build-info") && opt.scenario.empty() && opt.suite_dir.empty())
        return kExitPass;
    if (opt.scenario.empty() == opt.suite_dir.empty()) {
        std::cerr << "error: pass exactly one of a scenario file or --suite DIR\n";
        return kExitUsage;
    }
    return opt.suite_dir.empty() ? run_one(opt) : run_suite(opt);
}
