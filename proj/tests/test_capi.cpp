#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nplab.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

TEST_CASE("version and scenario listing") {
    CHECK(std::strlen(np_version()) > 0);
    char** names = nullptr;
    REQUIRE(np_list_scenarios(&names) == NP_OK);
    REQUIRE(names != nullptr);
    bool has_circle = false;
    int count = 0;
    for (char** p = names; *p; ++p, ++count)
        if (std::string(*p) == "circle")
            has_circle = true;
    CHECK(count == 7);
    CHECK(has_circle);
    np_string_list_free(names);
}

TEST_CASE("bundled scenario text") {
    char* text = nullptr;
    REQUIRE(np_bundled_scenario_text("circle", &text) == NP_OK);
    CHECK(std::string(text).find("\"name\": \"circle\"") != std::string::npos);
    np_string_free(text);

    CHECK(np_bundled_scenario_text("nope", &text) != NP_OK);
    CHECK(std::strlen(np_error_message()) > 0);
    CHECK(np_bundled_scenario_text(nullptr, &text) == NP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("run a bundled scenario through the C interface") {
    auto dir = fs::temp_directory_path() / "nplab_capi_out";
    fs::remove_all(dir);
    np_report* rep = nullptr;
    REQUIRE(np_run_bundled("circle", dir.string().c_str(), &rep) == NP_OK);
    REQUIRE(rep != nullptr);
    CHECK(std::string(np_report_name(rep)) == "circle");
    CHECK(np_report_all_passed(rep) == 1);
    CHECK(np_report_wall_seconds(rep) > 0.0);
    CHECK(std::strlen(np_report_config_hash(rep)) == 16);
    int n = np_report_verdict_count(rep);
    REQUIRE(n == 2);
    for (int i = 0; i < n; ++i) {
        CHECK(np_report_verdict_pass(rep, i) == 1);
        CHECK(std::strlen(np_report_verdict_name(rep, i)) > 0);
        CHECK(np_report_verdict_value(rep, i) < np_report_verdict_threshold(rep, i));
    }
    // Out-of-range verdict access is safe.
    CHECK(np_report_verdict_pass(rep, 99) == 0);
    CHECK(std::string(np_report_verdict_name(rep, -1)).empty());
    std::string j = np_report_json(rep);
    CHECK(j.find("\"verdicts\"") != std::string::npos);
    CHECK(fs::exists(fs::path(np_report_output_dir(rep)) / "report.json"));
    np_report_free(rep);
    fs::remove_all(dir);
}

TEST_CASE("run a scenario from a file") {
    char* text = nullptr;
    REQUIRE(np_bundled_scenario_text("circle", &text) == NP_OK);
    auto path = fs::temp_directory_path() / "nplab_capi_scenario.json";
    {
        std::ofstream f(path);
        f << text;
    }
    np_string_free(text);
    np_report* rep = nullptr;
    REQUIRE(np_run_scenario_file(path.string().c_str(), nullptr, &rep) == NP_OK);
    CHECK(np_report_all_passed(rep) == 1);
    np_report_free(rep);
    fs::remove(path);

    CHECK(np_run_scenario_file(path.string().c_str(), nullptr, &rep) == NP_ERR_IO);
    CHECK(std::strlen(np_error_message()) > 0);
}

TEST_CASE("error paths") {
    np_report* rep = nullptr;
    CHECK(np_run_bundled("no-such-scenario", nullptr, &rep) == NP_ERR_INVALID_ARGUMENT);
    CHECK(std::string(np_error_message()).find("no-such-scenario") != std::string::npos);
    CHECK(np_run_bundled(nullptr, nullptr, &rep) == NP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("convergence through the C interface") {
    char* csv = nullptr;
    REQUIRE(np_convergence_bundled("ellipse-3-7", "alpha_1", &csv) == NP_OK);
    std::string s(csv);
    np_string_free(csv);
    CHECK(s.rfind("level,value,diff,rate", 0) == 0);
    int lines = 0;
    for (char c : s)
        if (c == '\n')
            ++lines;
    CHECK(lines == 4); // header + 3 ladder levels

    CHECK(np_convergence_bundled("ellipse-3-7", "bogus", &csv) == NP_ERR_INVALID_ARGUMENT);
}
