// np-lab: command-line scenario runner for the Neumann-Poincare laboratory.
// Links only against the C interface.
#include <nplab.h>

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

void print_report(const np_report* rep) {
    std::printf("scenario: %s\n", np_report_name(rep));
    std::printf("config hash: %s\n", np_report_config_hash(rep));
    std::printf("wall time: %.2f s\n", np_report_wall_seconds(rep));
    const char* out = np_report_output_dir(rep);
    if (out[0])
        std::printf("artifacts: %s\n", out);
    int n = np_report_verdict_count(rep);
    for (int i = 0; i < n; ++i)
        std::printf("  [%s] %-30s value=%-12.6g threshold=%-12.6g %s\n",
                    np_report_verdict_pass(rep, i) ? "PASS" : "FAIL",
                    np_report_verdict_name(rep, i), np_report_verdict_value(rep, i),
                    np_report_verdict_threshold(rep, i), np_report_verdict_detail(rep, i));
    std::printf("result: %s\n", np_report_all_passed(rep) ? "PASS" : "FAIL");
}

int fail_with_error(np_status st) {
    std::fprintf(stderr, "error (%d): %s\n", int(st), np_error_message());
    return 2;
}

bool is_bundled(const std::string& name) {
    char** names = nullptr;
    if (np_list_scenarios(&names) != NP_OK)
        return false;
    bool found = false;
    for (char** p = names; *p; ++p)
        if (name == *p)
            found = true;
    np_string_list_free(names);
    return found;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"np-lab: Neumann-Poincare spectral laboratory"};
    app.require_subcommand(1);
    app.fallthrough(); // allow -o after the subcommand
    std::string output_dir;
    app.add_option("-o,--output", output_dir, "Artifact output directory override");

    std::string run_target;
    auto* cmd_run = app.add_subcommand("run", "Run a scenario (JSON config file or bundled name)");
    cmd_run->add_option("config", run_target, "Scenario file or bundled scenario name")
        ->required();

    auto* cmd_suite = app.add_subcommand("suite", "Run every bundled scenario");

    std::string conv_target, observable;
    auto* cmd_conv = app.add_subcommand("convergence", "Tabulate an observable over the ladder");
    cmd_conv->add_option("config", conv_target, "Scenario file or bundled scenario name")
        ->required();
    cmd_conv->add_option("observable", observable, "plemelj | lambda_half | alpha_1 | lambda_max")
        ->required();

    auto* cmd_list = app.add_subcommand("list-scenarios", "List the bundled scenario corpus");

    CLI11_PARSE(app, argc, argv);
    const char* out = output_dir.empty() ? nullptr : output_dir.c_str();

    if (cmd_list->parsed()) {
        char** names = nullptr;
        np_status st = np_list_scenarios(&names);
        if (st != NP_OK)
            return fail_with_error(st);
        for (char** p = names; *p; ++p)
            std::printf("%s\n", *p);
        np_string_list_free(names);
        return 0;
    }

    if (cmd_run->parsed()) {
        np_report* rep = nullptr;
        np_status st = is_bundled(run_target) ? np_run_bundled(run_target.c_str(), out, &rep)
                                              : np_run_scenario_file(run_target.c_str(), out, &rep);
        if (st != NP_OK)
            return fail_with_error(st);
        print_report(rep);
        int rc = np_report_all_passed(rep) ? 0 : 1;
        np_report_free(rep);
        return rc;
    }

    if (cmd_suite->parsed()) {
        char** names = nullptr;
        np_status st = np_list_scenarios(&names);
        if (st != NP_OK)
            return fail_with_error(st);
        int rc = 0;
        for (char** p = names; *p; ++p) {
            np_report* rep = nullptr;
            st = np_run_bundled(*p, out, &rep);
            if (st != NP_OK) {
                np_string_list_free(names);
                return fail_with_error(st);
            }
            print_report(rep);
            std::printf("\n");
            if (!np_report_all_passed(rep))
                rc = 1;
            np_report_free(rep);
        }
        np_string_list_free(names);
        return rc;
    }

    if (cmd_conv->parsed()) {
        char* csv = nullptr;
        np_status st = is_bundled(conv_target)
                           ? np_convergence_bundled(conv_target.c_str(), observable.c_str(), &csv)
                           : np_convergence_file(conv_target.c_str(), observable.c_str(), &csv);
        if (st != NP_OK)
            return fail_with_error(st);
        std::fputs(csv, stdout);
        np_string_free(csv);
        return 0;
    }
    return 2;
}
