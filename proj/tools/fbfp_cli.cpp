// Command-line front end. Talks to the solver only through the C interface.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "fbfp/fbfp.h"

namespace {

int report_failure(fbfp_status st) {
    std::fprintf(stderr, "fbfp: %s\n", fbfp_last_error());
    return static_cast<int>(st);
}

int cmd_validate(const std::string& path) {
    fbfp_config* cfg = nullptr;
    fbfp_status st = fbfp_config_load_file(path.c_str(), &cfg);
    if (st != FBFP_OK) return report_failure(st);
    char* report = nullptr;
    st = fbfp_validate(cfg, &report);
    if (report) {
        std::printf("%s\n", report);
        fbfp_string_free(report);
    }
    fbfp_config_free(cfg);
    return st == FBFP_OK ? 0 : report_failure(st);
}

int cmd_run(const std::string& path, long horizon) {
    fbfp_config* cfg = nullptr;
    fbfp_status st = fbfp_config_load_file(path.c_str(), &cfg);
    if (st != FBFP_OK) return report_failure(st);
    if (horizon >= 0 && (st = fbfp_config_set_certificate_horizon(cfg, horizon)) != FBFP_OK) {
        fbfp_config_free(cfg);
        return report_failure(st);
    }
    fbfp_result* res = nullptr;
    st = fbfp_run(cfg, &res);
    fbfp_config_free(cfg);
    if (res) {
        char* summary = nullptr;
        if (fbfp_result_summary_json(res, &summary) == FBFP_OK) {
            std::printf("%s\n", summary);
            fbfp_string_free(summary);
        }
        fbfp_result_free(res);
    }
    return st == FBFP_OK ? 0 : report_failure(st);
}

void print_line(const char* line, void*) {
    std::printf("%s\n", line);
    std::fflush(stdout);
}

int cmd_suite(const std::string& filter, bool json) {
    char* report = nullptr;
    int failures = 0;
    const fbfp_status st = fbfp_suite(filter.c_str(), print_line, nullptr, json ? &report : nullptr, &failures);
    if (report) {
        std::printf("%s\n", report);
        fbfp_string_free(report);
    }
    if (st == FBFP_OK) return 0;
    if (st == FBFP_FAILED) {
        std::fprintf(stderr, "fbfp: %d suite case(s) failed\n", failures);
        return 1;
    }
    return report_failure(st);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inertial forward-backward-forward penalty solver"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(fbfp_version()));

    std::string config_path;
    long horizon = -1;
    auto* run = app.add_subcommand("run", "Run the solver described by a JSON config");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--horizon", horizon, "Override the certificate horizon (0 disables)")->check(CLI::NonNegativeNumber);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check config schema and schedule feasibility without running");
    validate->add_option("config", validate_path, "Config file")->required();

    std::string filter;
    bool json = false;
    auto* suite = app.add_subcommand("suite", "Run the built-in acceptance battery");
    suite->add_option("--filter", filter, "Tag expression: a,b matches either, a+b matches both");
    suite->add_flag("--json", json, "Also print the aggregate report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : FBFP_ERR_CONFIG;
    }

    if (*run) return cmd_run(config_path, horizon);
    if (*validate) return cmd_validate(validate_path);
    return cmd_suite(filter, json);
}
