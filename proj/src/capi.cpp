#include "fibstat/fibstat.h"

#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "fibstat/run.hpp"

struct fs_config {
    fibstat::RunConfig config;
};

struct fs_result {
    fibstat::RunOutput output;
    std::vector<std::string> csv;
    std::vector<std::string> json;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_json;

fs_status record(const std::exception& e)
{
    last_error = e.what();
    last_error_json = fibstat::error_record(e);
    return static_cast<fs_status>(fibstat::exit_code(e));
}

fs_status argument_error(const char* what)
{
    last_error = what;
    last_error_json = std::string(R"({"error":{"kind":"argument","code":1,"message":")") + what + "\"}}";
    return FS_ERR_ARGUMENT;
}

template <class F>
fs_status guarded(F&& f)
{
    try {
        f();
        return FS_OK;
    } catch (const std::exception& e) {
        return record(e);
    } catch (...) {
        return record(std::runtime_error("unknown exception"));
    }
}

}  // namespace

extern "C" {

const char* fs_version(void)
{
    return "fibstat 1.0 (format v1)";
}

fs_status fs_config_new(const char* command, fs_config** out)
{
    if (!command || !out) return argument_error("fs_config_new: null argument");
    *out = nullptr;
    return guarded([&] {
        auto cfg = std::make_unique<fs_config>();
        cfg->config.set("command", command);
        *out = cfg.release();
    });
}

void fs_config_free(fs_config* config)
{
    delete config;
}

fs_status fs_config_set(fs_config* config, const char* key, const char* value)
{
    if (!config || !key || !value) return argument_error("fs_config_set: null argument");
    return guarded([&] { config->config.set(key, value); });
}

fs_status fs_config_validate(const fs_config* config)
{
    if (!config) return argument_error("fs_config_validate: null config");
    return guarded([&] { config->config.validate(); });
}

fs_status fs_config_hash(const fs_config* config, char* buf, size_t len)
{
    if (!config || !buf) return argument_error("fs_config_hash: null argument");
    if (len < 17) return argument_error("fs_config_hash: buffer shorter than 17 bytes");
    return guarded([&] {
        const std::string h = config->config.hash();
        std::memcpy(buf, h.c_str(), h.size() + 1);
    });
}

fs_status fs_run(const fs_config* config, fs_result** out)
{
    if (!config || !out) return argument_error("fs_run: null argument");
    *out = nullptr;
    return guarded([&] {
        auto res = std::make_unique<fs_result>();
        res->output = fibstat::run(config->config);
        for (const auto& t : res->output.tables) {
            res->csv.push_back(fibstat::write_csv(t));
            res->json.push_back(fibstat::write_json(t));
        }
        if (!config->config.output.empty()) {
            fibstat::write_outputs(res->output, config->config.output, config->config.format);
        }
        *out = res.release();
    });
}

void fs_result_free(fs_result* result)
{
    delete result;
}

size_t fs_result_table_count(const fs_result* result)
{
    return result ? result->output.tables.size() : 0;
}

const char* fs_result_table_name(const fs_result* result, size_t index)
{
    if (!result || index >= result->output.tables.size()) return nullptr;
    return result->output.tables[index].name.c_str();
}

const char* fs_result_table_csv(const fs_result* result, size_t index)
{
    if (!result || index >= result->csv.size()) return nullptr;
    return result->csv[index].c_str();
}

const char* fs_result_table_json(const fs_result* result, size_t index)
{
    if (!result || index >= result->json.size()) return nullptr;
    return result->json[index].c_str();
}

const char* fs_result_manifest(const fs_result* result)
{
    return result ? result->output.manifest.c_str() : nullptr;
}

size_t fs_result_value_count(const fs_result* result)
{
    return result ? result->output.results.size() : 0;
}

const char* fs_result_value_key(const fs_result* result, size_t index)
{
    if (!result || index >= result->output.results.size()) return nullptr;
    return result->output.results[index].first.c_str();
}

const char* fs_result_value(const fs_result* result, const char* key)
{
    if (!result || !key) return nullptr;
    for (const auto& [k, v] : result->output.results) {
        if (k == key) return v.c_str();
    }
    return nullptr;
}

double fs_result_tainted_fraction(const fs_result* result)
{
    return result ? result->output.tainted_fraction : 0.0;
}

double fs_result_wall_seconds(const fs_result* result)
{
    return result ? result->output.wall_seconds : 0.0;
}

fs_status fs_result_write(const fs_result* result, const char* prefix, const char* format, size_t* files_written)
{
    if (!result || !prefix || !format) return argument_error("fs_result_write: null argument");
    return guarded([&] {
        const auto files = fibstat::write_outputs(result->output, prefix, format);
        if (files_written) *files_written = files.size();
    });
}

fs_status fs_hilbert_symbol(int64_t a, int64_t b, const char* place, int* out)
{
    if (!place || !out) return argument_error("fs_hilbert_symbol: null argument");
    return guarded([&] {
        fibstat::require(a != 0 && b != 0, "Hilbert symbol of zero");
        *out = fibstat::hilbert(a, b, fibstat::Place::parse(place));
    });
}

const char* fs_last_error(void)
{
    return last_error.c_str();
}

const char* fs_last_error_json(void)
{
    return last_error_json.c_str();
}

}  // extern "C"
