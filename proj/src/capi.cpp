#include "nplab.h"

#include "nplab/lab.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

namespace {

thread_local std::string g_error;

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (p)
        std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

template <typename F> np_status guarded(F&& f) {
    try {
        f();
        g_error.clear();
        return NP_OK;
    } catch (const std::invalid_argument& e) {
        g_error = e.what();
        return NP_ERR_INVALID_ARGUMENT;
    } catch (const std::ios_base::failure& e) {
        g_error = e.what();
        return NP_ERR_IO;
    } catch (const std::exception& e) {
        g_error = e.what();
        // File-open failures surface as runtime_errors with a path context.
        return std::strstr(e.what(), "cannot open") ? NP_ERR_IO : NP_ERR_RUNTIME;
    }
}

} // namespace

struct np_report {
    nplab::RunReport rep;
    std::string json_text;
};

extern "C" {

const char* np_version(void) { return nplab::kVersion; }

const char* np_error_message(void) { return g_error.c_str(); }

np_status np_list_scenarios(char*** names_out) {
    if (!names_out) {
        g_error = "names_out is null";
        return NP_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        auto names = nplab::bundled_scenarios();
        char** arr = static_cast<char**>(std::calloc(names.size() + 1, sizeof(char*)));
        if (!arr)
            throw std::bad_alloc();
        for (size_t i = 0; i < names.size(); ++i)
            arr[i] = dup_string(names[i]);
        *names_out = arr;
    });
}

void np_string_list_free(char** names) {
    if (!names)
        return;
    for (char** p = names; *p; ++p)
        std::free(*p);
    std::free(names);
}

np_status np_bundled_scenario_text(const char* name, char** text_out) {
    if (!name || !text_out) {
        g_error = "null argument";
        return NP_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] { *text_out = dup_string(nplab::bundled_scenario_text(name)); });
}

void np_string_free(char* s) { std::free(s); }

static np_status run_impl(nplab::Scenario sc, const char* output_dir, np_report** out) {
    auto* handle = new (std::nothrow) np_report;
    if (!handle) {
        g_error = "out of memory";
        return NP_ERR_RUNTIME;
    }
    np_status st = guarded([&] {
        handle->rep = nplab::run(sc, output_dir ? output_dir : "");
        handle->json_text = handle->rep.document.dump(2);
    });
    if (st != NP_OK) {
        delete handle;
        return st;
    }
    *out = handle;
    return NP_OK;
}

np_status np_run_scenario_file(const char* path, const char* output_dir, np_report** out) {
    if (!path || !out) {
        g_error = "null argument";
        return NP_ERR_INVALID_ARGUMENT;
    }
    nplab::Scenario sc;
    np_status st = guarded([&] { sc = nplab::load_scenario_file(path); });
    if (st != NP_OK)
        return st;
    return run_impl(std::move(sc), output_dir, out);
}

np_status np_run_bundled(const char* name, const char* output_dir, np_report** out) {
    if (!name || !out) {
        g_error = "null argument";
        return NP_ERR_INVALID_ARGUMENT;
    }
    nplab::Scenario sc;
    np_status st = guarded([&] { sc = nplab::load_bundled_scenario(name); });
    if (st != NP_OK)
        return st;
    return run_impl(std::move(sc), output_dir, out);
}

void np_report_free(np_report* r) { delete r; }

const char* np_report_name(const np_report* r) { return r ? r->rep.scenario_name.c_str() : ""; }
const char* np_report_config_hash(const np_report* r) {
    return r ? r->rep.config_hash.c_str() : "";
}
const char* np_report_json(const np_report* r) { return r ? r->json_text.c_str() : ""; }
const char* np_report_output_dir(const np_report* r) {
    return r ? r->rep.output_dir.c_str() : "";
}
double np_report_wall_seconds(const np_report* r) { return r ? r->rep.wall_seconds : 0.0; }
int np_report_all_passed(const np_report* r) { return r && r->rep.all_passed ? 1 : 0; }
int np_report_verdict_count(const np_report* r) {
    return r ? static_cast<int>(r->rep.verdicts.size()) : 0;
}

static const nplab::Verdict* verdict_at(const np_report* r, int i) {
    if (!r || i < 0 || i >= static_cast<int>(r->rep.verdicts.size()))
        return nullptr;
    return &r->rep.verdicts[i];
}

const char* np_report_verdict_name(const np_report* r, int i) {
    const auto* v = verdict_at(r, i);
    return v ? v->name.c_str() : "";
}
const char* np_report_verdict_detail(const np_report* r, int i) {
    const auto* v = verdict_at(r, i);
    return v ? v->detail.c_str() : "";
}
int np_report_verdict_pass(const np_report* r, int i) {
    const auto* v = verdict_at(r, i);
    return v && v->pass ? 1 : 0;
}
double np_report_verdict_value(const np_report* r, int i) {
    const auto* v = verdict_at(r, i);
    return v ? v->value : 0.0;
}
double np_report_verdict_threshold(const np_report* r, int i) {
    const auto* v = verdict_at(r, i);
    return v ? v->threshold : 0.0;
}

static np_status convergence_impl(nplab::Scenario sc, const char* observable, char** csv_out) {
    return guarded([&] {
        auto table = nplab::convergence_study(sc, observable);
        std::ostringstream os;
        os.precision(17);
        os << "level,value,diff,rate\n";
        for (const auto& row : table.rows)
            os << row.level << ',' << row.value << ',' << row.diff << ',' << row.rate << '\n';
        *csv_out = dup_string(os.str());
    });
}

np_status np_convergence_file(const char* path, const char* observable, char** csv_out) {
    if (!path || !observable || !csv_out) {
        g_error = "null argument";
        return NP_ERR_INVALID_ARGUMENT;
    }
    nplab::Scenario sc;
    np_status st = guarded([&] { sc = nplab::load_scenario_file(path); });
    if (st != NP_OK)
        return st;
    return convergence_impl(std::move(sc), observable, csv_out);
}

np_status np_convergence_bundled(const char* name, const char* observable, char** csv_out) {
    if (!name || !observable || !csv_out) {
        g_error = "null argument";
        return NP_ERR_INVALID_ARGUMENT;
    }
    nplab::Scenario sc;
    np_status st = guarded([&] { sc = nplab::load_bundled_scenario(name); });
    if (st != NP_OK)
        return st;
    return convergence_impl(std::move(sc), observable, csv_out);
}

} // extern "C"
