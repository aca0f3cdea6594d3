#include "fairdeliver.h"

#include <string>

#include "runner.hpp"

// Opaque handle definitions behind the C surface.

struct fdl_options {
    fdl::scn::Overrides overrides;
};

struct fdl_result {
    bool pass = false;
    std::string report;
    std::string transcripts;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& e) { g_last_error = e; }

fdl_status run_impl(const char* source, bool is_path, const fdl_options* opt, fdl_result** out) {
    if (!source || !out) {
        set_error("null argument");
        return FDL_ERR_ARG;
    }
    *out = nullptr;
    fdl::scn::Overrides ov;
    if (opt) ov = opt->overrides;
    try {
        fdl::scn::Scenario scenario = is_path ? fdl::scn::load_scenario_file(source, ov)
                                              : fdl::scn::load_scenario(source, ov);
        fdl::run::ScenarioResult result = fdl::run::run_scenario(scenario);
        auto* res = new fdl_result;
        res->pass = result.pass;
        res->report = result.report_json();
        res->transcripts = result.transcripts_jsonl();
        *out = res;
        return FDL_OK;
    } catch (const fdl::scn::ScenarioError& e) {
        set_error(e.what());
        std::string what = e.what();
        return what.find("cannot read") != std::string::npos ? FDL_ERR_IO : FDL_ERR_SCHEMA;
    } catch (const std::exception& e) {
        set_error(e.what());
        return FDL_ERR_INTERNAL;
    }
}

}  // namespace

extern "C" {

fdl_options* fdl_options_new(void) { return new fdl_options; }

void fdl_options_free(fdl_options* opt) { delete opt; }

fdl_status fdl_options_set_seed(fdl_options* opt, uint64_t seed) {
    if (!opt) return FDL_ERR_ARG;
    opt->overrides.seed = seed;
    return FDL_OK;
}

fdl_status fdl_options_set_mode(fdl_options* opt, const char* mode) {
    if (!opt || !mode) return FDL_ERR_ARG;
    std::string m = mode;
    if (m != "download" && m != "stream") {
        set_error("mode must be download or stream");
        return FDL_ERR_ARG;
    }
    opt->overrides.mode = m;
    return FDL_OK;
}

fdl_status fdl_options_set_chunk_count(fdl_options* opt, uint64_t n) {
    if (!opt) return FDL_ERR_ARG;
    opt->overrides.n = n;
    return FDL_OK;
}

fdl_status fdl_options_set_chunk_size(fdl_options* opt, uint64_t eta) {
    if (!opt) return FDL_ERR_ARG;
    opt->overrides.eta = eta;
    return FDL_OK;
}

fdl_status fdl_run_scenario_file(const char* path, const fdl_options* opt, fdl_result** out) {
    return run_impl(path, true, opt, out);
}

fdl_status fdl_run_scenario_json(const char* json_text, const fdl_options* opt, fdl_result** out) {
    return run_impl(json_text, false, opt, out);
}

int fdl_result_passed(const fdl_result* res) { return res && res->pass ? 1 : 0; }

const char* fdl_result_report_json(const fdl_result* res) {
    return res ? res->report.c_str() : "";
}

const char* fdl_result_transcript_jsonl(const fdl_result* res) {
    return res ? res->transcripts.c_str() : "";
}

void fdl_result_free(fdl_result* res) { delete res; }

const char* fdl_last_error(void) { return g_last_error.c_str(); }

const char* fdl_build_info(void) {
    static const std::string info = fdl::run::build_info_json();
    return info.c_str();
}

const char* fdl_status_name(fdl_status status) {
    switch (status) {
        case FDL_OK: return "ok";
        case FDL_ERR_ARG: return "invalid argument";
        case FDL_ERR_IO: return "io error";
        case FDL_ERR_SCHEMA: return "scenario schema error";
        case FDL_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

}  // extern "C"
