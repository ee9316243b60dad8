#include "fbfp/fbfp.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "fbfp/harness.hpp"

struct fbfp_config {
    fbfp::RunConfig cfg;
};

struct fbfp_result {
    fbfp::RunOutcome outcome;
};

namespace {

thread_local std::string g_last_error;

fbfp_status fail(fbfp_status s, std::string msg) {
    g_last_error = std::move(msg);
    return s;
}

// Like errno: success leaves the last message in place.
fbfp_status ok() { return FBFP_OK; }

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Maps exceptions escaping the library onto status codes.
template <class F>
fbfp_status guarded(F&& f) {
    try {
        return f();
    } catch (const fbfp::ConfigError& e) {
        return fail(FBFP_ERR_CONFIG, e.what());
    } catch (const fbfp::IoError& e) {
        return fail(FBFP_ERR_IO, e.what());
    } catch (const fbfp::InvalidInput& e) {
        return fail(FBFP_ERR_CONFIG, e.what());
    } catch (const std::bad_alloc&) {
        return fail(FBFP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(FBFP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(FBFP_ERR_INTERNAL, "unknown error");
    }
}

fbfp_status load(const std::string* path, const char* text, fbfp_config** out) {
    if (!out) return fail(FBFP_ERR_ARGUMENT, "output handle pointer is null");
    *out = nullptr;
    return guarded([&] {
        auto* c = new fbfp_config{path ? fbfp::load_config(*path) : fbfp::parse_config(text)};
        *out = c;
        return ok();
    });
}

// Forwards each completed line to a C callback.
class LineBuf : public std::stringbuf {
public:
    LineBuf(fbfp_line_callback cb, void* user) : cb_(cb), user_(user) {}

protected:
    int sync() override {
        std::string s = str();
        std::size_t start = 0;
        for (std::size_t nl; (nl = s.find('\n', start)) != std::string::npos; start = nl + 1) {
            if (cb_) cb_(s.substr(start, nl - start).c_str(), user_);
        }
        str(s.substr(start));
        return 0;
    }
    int_type overflow(int_type c) override {
        const int_type r = std::stringbuf::overflow(c);
        if (c == '\n') sync();
        return r;
    }

private:
    fbfp_line_callback cb_;
    void* user_;
};

}  // namespace

extern "C" {

const char* fbfp_version(void) { return "1.0.0"; }

const char* fbfp_last_error(void) { return g_last_error.c_str(); }

fbfp_status fbfp_config_load_file(const char* path, fbfp_config** out) {
    if (!path) return fail(FBFP_ERR_ARGUMENT, "path is null");
    const std::string p(path);
    return load(&p, nullptr, out);
}

fbfp_status fbfp_config_load_string(const char* json_text, fbfp_config** out) {
    if (!json_text) return fail(FBFP_ERR_ARGUMENT, "configuration text is null");
    return load(nullptr, json_text, out);
}

void fbfp_config_free(fbfp_config* cfg) { delete cfg; }

fbfp_status fbfp_config_set_certificate_horizon(fbfp_config* cfg, long horizon) {
    if (!cfg) return fail(FBFP_ERR_ARGUMENT, "configuration handle is null");
    if (horizon < 0) return fail(FBFP_ERR_ARGUMENT, "horizon must be >= 0");
    cfg->cfg.certificate_horizon = horizon;
    return ok();
}

fbfp_status fbfp_config_set_outputs(fbfp_config* cfg, const char* trace_path, const char* summary_path) {
    if (!cfg) return fail(FBFP_ERR_ARGUMENT, "configuration handle is null");
    if (trace_path) cfg->cfg.trace_path = trace_path;
    if (summary_path) cfg->cfg.summary_path = summary_path;
    return ok();
}

fbfp_status fbfp_validate(const fbfp_config* cfg, char** report_json) {
    if (!cfg) return fail(FBFP_ERR_ARGUMENT, "configuration handle is null");
    return guarded([&] {
        const auto out = fbfp::validate_config(cfg->cfg);
        if (report_json) *report_json = dup_string(out.summary.dump(2));
        if (out.exit_code != fbfp::kExitOk) return fail(static_cast<fbfp_status>(out.exit_code), out.message);
        return ok();
    });
}

fbfp_status fbfp_run(const fbfp_config* cfg, fbfp_result** out) {
    if (!cfg) return fail(FBFP_ERR_ARGUMENT, "configuration handle is null");
    if (!out) return fail(FBFP_ERR_ARGUMENT, "output handle pointer is null");
    *out = nullptr;
    return guarded([&] {
        auto* r = new fbfp_result{fbfp::execute(cfg->cfg)};
        const int code = r->outcome.exit_code;
        if (code == fbfp::kExitOk || code == fbfp::kExitDiverged || code == fbfp::kExitInfeasible) {
            *out = r;
        } else {
            std::string msg = r->outcome.message;
            delete r;
            return fail(static_cast<fbfp_status>(code), msg);
        }
        if (code != fbfp::kExitOk) return fail(static_cast<fbfp_status>(code), r->outcome.message);
        return ok();
    });
}

fbfp_status fbfp_result_status(const fbfp_result* res) {
    if (!res) return fail(FBFP_ERR_ARGUMENT, "result handle is null");
    return static_cast<fbfp_status>(res->outcome.exit_code);
}

long fbfp_result_iterations(const fbfp_result* res) {
    if (!res || res->outcome.trace.empty()) return 0;
    return res->outcome.trace.back().iteration;
}

fbfp_status fbfp_result_summary_json(const fbfp_result* res, char** out) {
    if (!res || !out) return fail(FBFP_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup_string(res->outcome.summary.dump(2));
        return *out ? ok() : fail(FBFP_ERR_INTERNAL, "out of memory");
    });
}

fbfp_status fbfp_result_write_trace(const fbfp_result* res, const char* path) {
    if (!res || !path) return fail(FBFP_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        fbfp::write_trace_csv(std::string(path), res->outcome.trace, res->outcome.dual_blocks);
        return ok();
    });
}

void fbfp_result_free(fbfp_result* res) { delete res; }

fbfp_status fbfp_suite(const char* filter, fbfp_line_callback on_line, void* user,
                       char** report_json, int* failures) {
    return guarded([&] {
        LineBuf buf(on_line, user);
        std::ostream progress(&buf);
        const auto rep = fbfp::run_suite(filter ? filter : "", on_line ? &progress : nullptr);
        buf.pubsync();
        if (report_json) *report_json = dup_string(rep.to_json().dump(2));
        if (failures) *failures = rep.failures();
        return rep.failures() == 0 ? ok() : fail(FBFP_FAILED, std::to_string(rep.failures()) + " suite case(s) failed");
    });
}

void fbfp_string_free(char* s) { std::free(s); }

}  // extern "C"
