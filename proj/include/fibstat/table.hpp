#pragma once

// Versioned CSV tables: writer, reader, and conversions to and from the
// report types.

#include <string>
#include <utility>
#include <vector>

#include "fibstat/stats.hpp"

namespace fibstat {

inline constexpr const char* kFormatVersion = "v1";

/// A named table with `#` header metadata. Cells never contain commas or newlines.
struct Table {
    std::string command;
    std::string name;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_meta(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }
    const std::string& meta_value(const std::string& key) const;
    std::size_t column(const std::string& name) const;
    const std::string& cell(std::size_t row, const std::string& col) const { return rows.at(row).at(column(col)); }
    friend bool operator==(const Table&, const Table&) = default;
};

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);
double parse_double(const std::string& s);
i64 parse_i64(const std::string& s);
u64 parse_u64(const std::string& s);

///   # fibstat v1 <command>
///   # table <name>
///   # key=value ...
///   col,col,...
///   rows
std::string write_csv(const Table& t);
Table read_csv(const std::string& text);
Table read_csv_file(const std::string& path);
/// {"fibstat": "v1", "command", "table", "meta": {...}, "columns": [...], "rows": [[...]]};
/// cells that read as numbers are emitted as numbers.
std::string write_json(const Table& t);

Table moments_table(const std::string& command, const std::vector<MomentReport>& reports);
std::vector<MomentReport> moments_from_table(const Table& t);

Table tau_table(const std::string& command, const TauHistogram& tau);
TauHistogram tau_from_table(const Table& t);

Table prediction_table(const std::string& command, const std::vector<TauPrediction>& predictions);
std::vector<TauPrediction> predictions_from_table(const Table& t);

Table sigma_table(const std::string& command, const SigmaTable& sigma);
SigmaTable sigma_from_table(const Table& t);

Table sigma_fit_table(const std::string& command, const SigmaFit& fit);
SigmaFit sigma_fit_from_table(const Table& t);

Table histogram_table(const std::string& command, const StandardizedHistogram& h);
StandardizedHistogram histogram_from_table(const Table& t);

Table baseline_table(const std::string& command, const std::vector<BaselineRange>& ranges);
std::vector<BaselineRange> baseline_from_table(const Table& t);

}  // namespace fibstat
