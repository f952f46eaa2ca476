// fibstat command-line front end. Talks to the library only through fibstat.h.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fibstat/fibstat.h"

namespace {

struct Opt {
    const char* key;
    const char* flags;
    const char* help;
    int arity = 1;  // >1: that many values, joined with commas; -1: a list; 0: flag
};

const std::vector<Opt> kCommon{
    {"threads", "--threads", "worker threads (default: FIBSTAT_THREADS or all cores)"},
    {"seed", "--seed", "RNG seed"},
    {"output", "-o,--output", "output path prefix; without it tables go to stdout"},
    {"format", "--format", "csv or json"},
};

const std::vector<Opt> kScan{
    {"family", "-f,--family", "diagonal-conics or diagonal-cubics"},
    {"B", "-B,--B", "height bound"},
    {"S", "-S,--S", "places excluded from omega, e.g. inf or 3,inf"},
    {"depth", "--depth", "p-adic search depth override"},
    {"taint_ceiling", "--taint-ceiling", "largest tolerated tainted fraction"},
};

const std::map<std::string, std::pair<std::string, std::vector<Opt>>> kCommands{
    {"enumerate",
     {"count points of P^n(Q) by height",
      {{"B", "-B,--B", "height bound"},
       {"n", "-n,--n", "dimension"},
       {"modulus", "--modulus", "per-class counts modulo a squarefree Q"},
       {"list", "--list", "emit the points", 0}}}},
    {"sigma",
     {"sigma_p table and beta fit",
      {{"family", "-f,--family", "family name"},
       {"p_max", "--p-max", "largest prime"},
       {"source", "--source", "exact, empirical or haar"},
       {"samples", "--samples", "residue disks per prime (empirical)"},
       {"precision", "--precision", "disk precision p^k (empirical)"}}}},
    {"ekac",
     {"moments, KS distance and histogram of the standardized omega",
      {{"r_max", "--r-max", "largest moment order (<= 12)"},
       {"samples", "--samples", "sampled points (default 100000)"},
       {"exhaustive", "--exhaustive", "scan every point instead of sampling", 0},
       {"centering", "--centering", "paper or empirical"},
       {"window", "--window", "truncation window t0,t1 or growth"}}}},
    {"tau",
     {"distribution of omega for Delta = 0 families, with the Euler-product prediction",
      {{"r_max", "--r-max", "largest N_r order (<= 12)"},
       {"samples", "--samples", "sample instead of scanning every point"},
       {"cutoff", "--cutoff", "prime cutoff of the prediction"},
       {"source", "--source", "local densities: haar or empirical"},
       {"precision", "--precision", "disk precision (empirical densities)"}}}},
    {"delta",
     {"delta per divisor and Delta from an action document",
      {{"input", "-i,--input", "action document"}}}},
    {"hilbert",
     {"Hilbert symbols and conic solubility",
      {{"symbol", "--symbol", "(a,b)_v for rationals a b", 2},
       {"conic", "--conic", "solubility of a x^2 + b y^2 = c z^2", 3},
       {"place", "--place", "a prime or inf (default: every relevant place)"}}}},
    {"baseline",
     {"Erdos-Kac statistics of omega(m) for m <= N",
      {{"N", "--N", "range bounds", -1},
       {"centering", "--centering", "paper or empirical"}}}},
};

int report(fs_status s)
{
    std::cerr << fs_last_error_json() << '\n';
    return static_cast<int>(s);
}

std::string cli_error(const std::string& message)
{
    std::string escaped;
    for (char c : message) {
        if (c == '"' || c == '\\') escaped += '\\';
        if (c == '\n') {
            escaped += "\\n";
            continue;
        }
        escaped += c;
    }
    return R"({"error":{"kind":"usage","code":2,"message":")" + escaped + "\"}}";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Local obstructions in families of varieties: counts, densities and limit laws"};
    app.require_subcommand(1);
    app.set_version_flag("--version", fs_version());

    std::map<std::string, std::map<std::string, std::vector<std::string>>> values;
    std::map<std::string, std::map<std::string, bool>> flags;
    for (const auto& [name, spec] : kCommands) {
        CLI::App* sub = app.add_subcommand(name, spec.first);
        auto add = [&, name = name](const Opt& o) {
            if (o.arity == 0) {
                sub->add_flag(o.flags, flags[name][o.key], o.help);
                return;
            }
            auto* opt = sub->add_option(o.flags, values[name][o.key], o.help);
            if (o.arity > 0) opt->expected(o.arity);
            if (o.arity < 0) opt->expected(1, 64)->delimiter(',');
            if (o.arity > 1) opt->allow_extra_args(false);
        };
        std::vector<Opt> opts = spec.second;
        if (name == "ekac" || name == "tau") {
            opts.insert(opts.begin(), kScan.begin(), kScan.end());
        }
        for (const auto& o : opts) add(o);
        for (const auto& o : kCommon) add(o);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << cli_error(e.what()) << '\n';
        return 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    fs_config* config = nullptr;
    if (fs_status s = fs_config_new(command.c_str(), &config); s != FS_OK) return report(s);
    for (const auto& [key, vals] : values[command]) {
        if (vals.empty()) continue;
        std::string joined;
        for (const auto& v : vals) joined += (joined.empty() ? "" : ",") + v;
        if (fs_status s = fs_config_set(config, key.c_str(), joined.c_str()); s != FS_OK) {
            fs_config_free(config);
            return report(s);
        }
    }
    for (const auto& [key, on] : flags[command]) {
        if (on) fs_config_set(config, key.c_str(), "true");
    }

    fs_result* result = nullptr;
    const fs_status s = fs_run(config, &result);
    const bool to_files = !values[command]["output"].empty();
    fs_config_free(config);
    if (s != FS_OK) return report(s);

    if (to_files) {
        const std::string prefix = values[command]["output"].front();
        std::string format = values[command]["format"].empty() ? "csv" : values[command]["format"].front();
        for (std::size_t i = 0; i < fs_result_table_count(result); ++i) {
            std::cout << "wrote " << prefix << '.' << fs_result_table_name(result, i) << '.' << format << '\n';
        }
        std::cout << "wrote " << prefix << ".manifest.json\n";
    } else {
        const bool json = !values[command]["format"].empty() && values[command]["format"].front() == "json";
        for (std::size_t i = 0; i < fs_result_table_count(result); ++i) {
            std::cout << (json ? fs_result_table_json(result, i) : fs_result_table_csv(result, i)) << '\n';
        }
    }
    for (std::size_t i = 0; i < fs_result_value_count(result); ++i) {
        const char* key = fs_result_value_key(result, i);
        std::cerr << key << ": " << fs_result_value(result, key) << '\n';
    }
    std::fprintf(stderr, "wall time: %.3f s\n", fs_result_wall_seconds(result));
    fs_result_free(result);
    return 0;
}
