#pragma once

// Reproducible runs: a validated configuration, the tables a command emits,
// the JSON manifest, and atomic file output.

#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "fibstat/table.hpp"

namespace fibstat {

enum class Command { Enumerate, Sigma, Ekac, Tau, Delta, Hilbert, Baseline };
std::string to_string(Command c);
Command parse_command(const std::string& text);

struct RunConfig {
    Command command = Command::Enumerate;
    std::string family = "diagonal-conics";
    i64 B = 100;
    std::string S = "inf";  // comma-separated places excluded from omega
    int r_max = 4;
    int depth = 0;         // p-adic search depth override, 0 = engine default
    unsigned threads = 0;  // 0 = FIBSTAT_THREADS, else the hardware count
    u64 seed = 1;
    std::string output;  // path prefix; empty = no files
    std::string format = "csv";

    // command-specific
    u64 samples = 0;          // ekac: default 100000; tau: 0 = exhaustive
    bool exhaustive = false;  // ekac: scan every point instead of sampling
    std::string centering = "empirical";
    std::string window;        // ekac: "t0,t1", "growth" or empty
    u64 p_max = 1000;          // sigma
    std::string source;        // sigma: exact|empirical|haar; tau: haar|empirical
    int precision = 4;         // empirical residue-disk precision
    u64 cutoff = 100;          // tau: prime cutoff of the prediction
    std::string input;         // delta: action document
    std::string symbol;        // hilbert: "a,b" (rationals allowed)
    std::string conic;         // hilbert: "a,b,c"
    std::string place;         // hilbert: a place, empty = every relevant place
    std::string N = "100000,1000000,10000000";  // baseline ranges
    int n = 2;                 // enumerate: dimension
    u64 modulus = 0;           // enumerate: per-class counts mod a squarefree Q
    bool list = false;         // enumerate: emit the points themselves
    double taint_ceiling = 0.001;

    /// Sets a field from its textual value; unknown keys and malformed values
    /// are rejected.
    void set(const std::string& key, const std::string& value);
    static std::vector<std::string> keys();

    /// Rejects unknown families, malformed S, r_max > 12, B < 3 for
    /// statistical commands, and similar.
    void validate() const;
    /// key=value lines for every field that affects results (not threads or output).
    std::string canonical() const;
    /// FNV-1a of canonical(), as 16 hex digits.
    std::string hash() const;
    unsigned effective_threads() const;
};

struct RunOutput {
    std::vector<Table> tables;
    std::vector<std::pair<std::string, std::string>> results;  // headline values
    double tainted_fraction = 0.0;
    double wall_seconds = 0.0;
    std::string manifest;  // JSON

    const Table& table(const std::string& name) const;
    const std::string& result(const std::string& key) const;
};

/// Validates and runs. Throws Error on rejected preconditions (Precondition,
/// Io, Overflow), on a tainted fraction above the ceiling (Taint) and on
/// internal inconsistencies (Invariant).
RunOutput run(const RunConfig& config);

/// Writes <prefix>.<table>.<csv|json> and <prefix>.manifest.json, each through
/// a temporary file renamed into place once everything has been written.
std::vector<std::string> write_outputs(const RunOutput& out, const std::string& prefix, const std::string& format);

/// 0 success, 2 configuration error, 3 taint ceiling exceeded, 4 internal error.
int exit_code(const std::exception& e);
/// {"error": {"kind", "code", "message"}}
std::string error_record(const std::exception& e);

}  // namespace fibstat
