#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <string>

#include "fairdeliver.h"
#include "json.hpp"

using json = nlohmann::json;

static std::string scenario_path(const char* name) {
    return std::string(FDL_SOURCE_DIR) + "/scenarios/" + name;
}

TEST_CASE("run a bundled scenario through the shared-library surface") {
    fdl_result* res = nullptr;
    fdl_status st = fdl_run_scenario_file(scenario_path("dl_honest.json").c_str(), nullptr, &res);
    REQUIRE(st == FDL_OK);
    REQUIRE(res != nullptr);
    CHECK(fdl_result_passed(res) == 1);

    json report = json::parse(fdl_result_report_json(res));
    CHECK(report["schema"] == 1);
    CHECK(report["scenario"]["mode"] == "download");
    CHECK(report["summary"]["pass"] == true);
    CHECK(report["runs"][0]["final"]["phase"] == "sold");

    std::string transcript = fdl_result_transcript_jsonl(res);
    CHECK(transcript.find("\"record\":\"header\"") != std::string::npos);
    CHECK(transcript.find("\"record\":\"summary\"") != std::string::npos);
    fdl_result_free(res);
}

TEST_CASE("inline JSON with overrides") {
    const char* text = R"({
        "schema": 1, "name": "inline", "mode": "download", "n": 4, "eta": 64,
        "prices": {"delivery": 2, "content": 5, "penalty": 10}, "seed": 5
    })";
    fdl_options* opt = fdl_options_new();
    REQUIRE(fdl_options_set_mode(opt, "stream") == FDL_OK);
    REQUIRE(fdl_options_set_chunk_count(opt, 8) == FDL_OK);
    REQUIRE(fdl_options_set_seed(opt, 99) == FDL_OK);
    fdl_result* res = nullptr;
    REQUIRE(fdl_run_scenario_json(text, opt, &res) == FDL_OK);
    fdl_options_free(opt);
    json report = json::parse(fdl_result_report_json(res));
    CHECK(report["scenario"]["mode"] == "stream");
    CHECK(report["scenario"]["n"] == 8);
    CHECK(report["scenario"]["seed"] == 99);
    CHECK(fdl_result_passed(res) == 1);
    fdl_result_free(res);
}

TEST_CASE("repetitions multiply runs and vary the seed") {
    const char* text = R"({
        "schema": 1, "name": "reps", "mode": "download", "n": 4, "eta": 64,
        "prices": {"delivery": 2, "content": 5, "penalty": 10},
        "seed": 50, "repetitions": 3
    })";
    fdl_result* res = nullptr;
    REQUIRE(fdl_run_scenario_json(text, nullptr, &res) == FDL_OK);
    json report = json::parse(fdl_result_report_json(res));
    REQUIRE(report["runs"].size() == 3);
    CHECK(report["runs"][0]["seed"] == 50);
    CHECK(report["runs"][1]["seed"] == 51);
    CHECK(report["runs"][2]["seed"] == 52);
    CHECK(report["summary"]["runs"] == 3);
    CHECK(fdl_result_passed(res) == 1);
    // Padding metadata rides along for content accounting.
    CHECK(report["scenario"]["padded_chunks"] == 4);
    CHECK(report["scenario"]["effective_chunks"] == 4);
    fdl_result_free(res);
}

TEST_CASE("error mapping") {
    fdl_result* res = nullptr;

    SUBCASE("unreadable file") {
        CHECK(fdl_run_scenario_file("/nonexistent/p.json", nullptr, &res) == FDL_ERR_IO);
        CHECK(res == nullptr);
        CHECK(std::strlen(fdl_last_error()) > 0);
    }
    SUBCASE("schema violations") {
        CHECK(fdl_run_scenario_json("{\"n\": 3}", nullptr, &res) == FDL_ERR_SCHEMA);
        CHECK(fdl_run_scenario_json("not json at all", nullptr, &res) == FDL_ERR_SCHEMA);
        CHECK(fdl_run_scenario_json("{\"mode\": \"other\"}", nullptr, &res) == FDL_ERR_SCHEMA);
        CHECK(fdl_run_scenario_json(
                  "{\"prices\": {\"delivery\": 9, \"content\": 5}}", nullptr, &res) ==
              FDL_ERR_SCHEMA);
        CHECK(fdl_run_scenario_json(
                  "{\"adversary\": {\"corrupt\": [\"P\",\"D\",\"C\"]}}", nullptr, &res) ==
              FDL_ERR_SCHEMA);
    }
    SUBCASE("null arguments") {
        CHECK(fdl_run_scenario_file(nullptr, nullptr, &res) == FDL_ERR_ARG);
        CHECK(fdl_run_scenario_json("{}", nullptr, nullptr) == FDL_ERR_ARG);
        CHECK(fdl_options_set_mode(nullptr, "download") == FDL_ERR_ARG);
        fdl_options* opt = fdl_options_new();
        CHECK(fdl_options_set_mode(opt, "sideways") == FDL_ERR_ARG);
        fdl_options_free(opt);
    }
}

TEST_CASE("build info names the primitive suite") {
    json info = json::parse(fdl_build_info());
    CHECK(info["hash"] == "SHA-256");
    CHECK(info["signature"] == "Ed25519");
    CHECK(info["group"] == "NIST P-384");
    CHECK(std::string(fdl_status_name(FDL_ERR_SCHEMA)) == "scenario schema error");
}

TEST_CASE("determinism across calls") {
    fdl_result *a = nullptr, *b = nullptr;
    REQUIRE(fdl_run_scenario_file(scenario_path("st_honest.json").c_str(), nullptr, &a) == FDL_OK);
    REQUIRE(fdl_run_scenario_file(scenario_path("st_honest.json").c_str(), nullptr, &b) == FDL_OK);
    CHECK(std::string(fdl_result_report_json(a)) == fdl_result_report_json(b));
    CHECK(std::string(fdl_result_transcript_jsonl(a)) == fdl_result_transcript_jsonl(b));
    fdl_result_free(a);
    fdl_result_free(b);
}
