#include "fibstat/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fibstat {

const std::string& Table::meta_value(const std::string& key) const
{
    for (const auto& [k, v] : meta) {
        if (k == key) return v;
    }
    fail(Error::Kind::Precondition, "table '" + name + "' has no metadata '" + key + "'");
}

std::size_t Table::column(const std::string& col) const
{
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == col) return i;
    }
    fail(Error::Kind::Precondition, "table '" + name + "' has no column '" + col + "'");
}

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s)
{
    if (s == "nan") return NAN;
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        fail(Error::Kind::Precondition, "not a number: '" + s + "'");
    }
    return v;
}

i64 parse_i64(const std::string& s)
{
    i64 v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
        fail(Error::Kind::Precondition, "not an integer: '" + s + "'");
    }
    return v;
}

u64 parse_u64(const std::string& s)
{
    u64 v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
        fail(Error::Kind::Precondition, "not a non-negative integer: '" + s + "'");
    }
    return v;
}

namespace {

void check_cell(const std::string& s)
{
    if (s.find_first_of(",\n\r") != std::string::npos) {
        fail(Error::Kind::Invariant, "CSV cell contains a separator: '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

std::string write_csv(const Table& t)
{
    std::ostringstream out;
    out << "# fibstat " << kFormatVersion << ' ' << t.command << '\n';
    out << "# table " << t.name << '\n';
    for (const auto& [k, v] : t.meta) {
        check_cell(k);
        check_cell(v);
        out << "# " << k << '=' << v << '\n';
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        check_cell(t.columns[i]);
        out << (i ? "," : "") << t.columns[i];
    }
    out << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) fail(Error::Kind::Invariant, "CSV row width mismatch in " + t.name);
        for (std::size_t i = 0; i < row.size(); ++i) {
            check_cell(row[i]);
            out << (i ? "," : "") << row[i];
        }
        out << '\n';
    }
    return out.str();
}

Table read_csv(const std::string& text)
{
    Table t;
    std::istringstream in(text);
    std::string line;
    bool version_seen = false, header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (header_seen) fail(Error::Kind::Precondition, "CSV comment after the header row");
            const std::string body = line.size() > 2 ? line.substr(2) : "";
            if (!version_seen) {
                std::istringstream w(body);
                std::string tag, version;
                w >> tag >> version >> t.command;
                if (tag != "fibstat" || version != kFormatVersion) {
                    fail(Error::Kind::Precondition, "missing '# fibstat v1' header");
                }
                version_seen = true;
            } else if (body.rfind("table ", 0) == 0) {
                t.name = body.substr(6);
            } else {
                const auto eq = body.find('=');
                if (eq == std::string::npos) fail(Error::Kind::Precondition, "malformed CSV metadata: " + line);
                t.add_meta(body.substr(0, eq), body.substr(eq + 1));
            }
            continue;
        }
        if (!version_seen) fail(Error::Kind::Precondition, "missing '# fibstat v1' header");
        if (!header_seen) {
            t.columns = split(line, ',');
            header_seen = true;
            continue;
        }
        auto row = split(line, ',');
        if (row.size() != t.columns.size()) fail(Error::Kind::Precondition, "CSV row width mismatch: " + line);
        t.rows.push_back(std::move(row));
    }
    if (!header_seen) fail(Error::Kind::Precondition, "CSV without a header row");
    return t;
}

Table read_csv_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Error::Kind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_csv(ss.str());
}

namespace {

nlohmann::ordered_json cell_json(const std::string& s)
{
    if (s.empty()) return s;
    i64 i = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), i);
    if (r.ec == std::errc{} && r.ptr == s.data() + s.size()) return i;
    double d = 0;
    auto rd = std::from_chars(s.data(), s.data() + s.size(), d);
    if (rd.ec == std::errc{} && rd.ptr == s.data() + s.size() && std::isfinite(d)) return d;
    return s;
}

}  // namespace

std::string write_json(const Table& t)
{
    nlohmann::ordered_json j;
    j["fibstat"] = kFormatVersion;
    j["command"] = t.command;
    j["table"] = t.name;
    j["meta"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.meta) j["meta"][k] = cell_json(v);
    j["columns"] = t.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& c : row) r.push_back(cell_json(c));
        j["rows"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

namespace {

Table make(const std::string& command, const std::string& name, std::vector<std::string> columns)
{
    Table t;
    t.command = command;
    t.name = name;
    t.columns = std::move(columns);
    return t;
}

void expect_name(const Table& t, const std::string& name)
{
    if (t.name != name) fail(Error::Kind::Precondition, "expected table '" + name + "', got '" + t.name + "'");
}

}  // namespace

Table moments_table(const std::string& command, const std::vector<MomentReport>& reports)
{
    Table t = make(command, "moments", {"r", "value", "reference", "centering", "mean", "scale", "count", "B"});
    for (const auto& m : reports) {
        t.rows.push_back({std::to_string(m.r), format_double(m.value), format_double(m.mu_reference),
                          to_string(m.centering), format_double(m.mean), format_double(m.scale),
                          std::to_string(m.count), std::to_string(m.B)});
    }
    return t;
}

std::vector<MomentReport> moments_from_table(const Table& t)
{
    if (t.name != "truncated_moments") expect_name(t, "moments");
    std::vector<MomentReport> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        MomentReport m;
        m.r = static_cast<int>(parse_i64(t.cell(i, "r")));
        m.value = parse_double(t.cell(i, "value"));
        m.mu_reference = parse_double(t.cell(i, "reference"));
        m.centering = parse_centering(t.cell(i, "centering"));
        m.mean = parse_double(t.cell(i, "mean"));
        m.scale = parse_double(t.cell(i, "scale"));
        m.count = parse_u64(t.cell(i, "count"));
        m.B = parse_i64(t.cell(i, "B"));
        out.push_back(m);
    }
    return out;
}

Table tau_table(const std::string& command, const TauHistogram& tau)
{
    Table t = make(command, "tau", {"j", "count", "mass", "mass_float"});
    t.add_meta("B", std::to_string(tau.B));
    t.add_meta("point_count", std::to_string(tau.point_count));
    t.add_meta("singular_count", std::to_string(tau.singular_count));
    t.add_meta("tainted_count", std::to_string(tau.tainted_count));
    t.add_meta("untainted_smooth_fraction", tau.untainted_smooth_fraction().str());
    for (std::size_t j = 0; j < tau.counts.size(); ++j) {
        t.rows.push_back({std::to_string(j), std::to_string(tau.counts[j]), tau.masses[j].str(),
                          format_double(tau.masses[j].to_double())});
    }
    return t;
}

TauHistogram tau_from_table(const Table& t)
{
    expect_name(t, "tau");
    TauHistogram tau;
    tau.B = parse_i64(t.meta_value("B"));
    tau.point_count = parse_u64(t.meta_value("point_count"));
    tau.singular_count = parse_u64(t.meta_value("singular_count"));
    tau.tainted_count = parse_u64(t.meta_value("tainted_count"));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (parse_u64(t.cell(i, "j")) != i) fail(Error::Kind::Precondition, "tau rows out of order");
        tau.counts.push_back(parse_u64(t.cell(i, "count")));
        tau.masses.push_back(Rational::parse(t.cell(i, "mass")));
    }
    return tau;
}

Table prediction_table(const std::string& command, const std::vector<TauPrediction>& predictions)
{
    Table t = make(command, "prediction", {"j", "value", "std_error", "tail_bound"});
    for (const auto& p : predictions) {
        t.rows.push_back({std::to_string(p.j), format_double(p.value), format_double(p.std_error),
                          format_double(p.tail_bound)});
    }
    return t;
}

std::vector<TauPrediction> predictions_from_table(const Table& t)
{
    expect_name(t, "prediction");
    std::vector<TauPrediction> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        out.push_back({static_cast<int>(parse_i64(t.cell(i, "j"))), parse_double(t.cell(i, "value")),
                       parse_double(t.cell(i, "std_error")), parse_double(t.cell(i, "tail_bound"))});
    }
    return out;
}

Table sigma_table(const std::string& command, const SigmaTable& sigma)
{
    Table t = make(command, "sigma", {"p", "sigma", "exact", "std_error", "samples", "partial_sum"});
    t.add_meta("coverage", std::to_string(sigma.coverage()));
    for (const auto& [p, e] : sigma.entries()) {
        t.rows.push_back({std::to_string(p), format_double(e.value), e.exact ? e.exact->str() : "",
                          format_double(e.std_error), std::to_string(e.samples),
                          format_double(sigma.partial_sum(static_cast<double>(p)))});
    }
    return t;
}

SigmaTable sigma_from_table(const Table& t)
{
    expect_name(t, "sigma");
    SigmaTable s;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        SigmaEntry e;
        e.p = parse_u64(t.cell(i, "p"));
        e.value = parse_double(t.cell(i, "sigma"));
        if (!t.cell(i, "exact").empty()) e.exact = Rational::parse(t.cell(i, "exact"));
        e.std_error = parse_double(t.cell(i, "std_error"));
        e.samples = parse_u64(t.cell(i, "samples"));
        s.add(e);
    }
    return s;
}

Table sigma_fit_table(const std::string& command, const SigmaFit& fit)
{
    Table t = make(command, "sigma_fit", {"x", "partial_sum", "fitted", "residual", "envelope"});
    t.add_meta("beta", format_double(fit.beta));
    t.add_meta("beta_upper_spread", format_double(fit.beta_upper_spread));
    t.add_meta("slope", format_double(fit.slope));
    t.add_meta("intercept", format_double(fit.intercept));
    for (const auto& g : fit.grid) {
        t.rows.push_back({format_double(g.x), format_double(g.partial_sum), format_double(g.fitted),
                          format_double(g.residual), format_double(g.envelope)});
    }
    return t;
}

SigmaFit sigma_fit_from_table(const Table& t)
{
    expect_name(t, "sigma_fit");
    SigmaFit fit;
    fit.beta = parse_double(t.meta_value("beta"));
    fit.beta_upper_spread = parse_double(t.meta_value("beta_upper_spread"));
    fit.slope = parse_double(t.meta_value("slope"));
    fit.intercept = parse_double(t.meta_value("intercept"));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        fit.grid.push_back({parse_double(t.cell(i, "x")), parse_double(t.cell(i, "partial_sum")),
                            parse_double(t.cell(i, "fitted")), parse_double(t.cell(i, "residual")),
                            parse_double(t.cell(i, "envelope"))});
    }
    return fit;
}

Table histogram_table(const std::string& command, const StandardizedHistogram& h)
{
    Table t = make(command, "histogram", {"bin", "lo", "hi", "count"});
    const double width = (StandardizedHistogram::kHi - StandardizedHistogram::kLo) / StandardizedHistogram::kBins;
    t.rows.push_back({"underflow", "-inf", format_double(StandardizedHistogram::kLo), std::to_string(h.underflow)});
    for (int i = 0; i < StandardizedHistogram::kBins; ++i) {
        t.rows.push_back({std::to_string(i), format_double(StandardizedHistogram::kLo + i * width),
                          format_double(StandardizedHistogram::kLo + (i + 1) * width), std::to_string(h.counts[i])});
    }
    t.rows.push_back({"overflow", format_double(StandardizedHistogram::kHi), "inf", std::to_string(h.overflow)});
    return t;
}

StandardizedHistogram histogram_from_table(const Table& t)
{
    expect_name(t, "histogram");
    if (t.rows.size() != StandardizedHistogram::kBins + 2) fail(Error::Kind::Precondition, "histogram needs 43 rows");
    StandardizedHistogram h;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& bin = t.cell(i, "bin");
        const u64 c = parse_u64(t.cell(i, "count"));
        if (bin == "underflow") {
            h.underflow = c;
        } else if (bin == "overflow") {
            h.overflow = c;
        } else {
            const i64 b = parse_i64(bin);
            if (b < 0 || b >= StandardizedHistogram::kBins) fail(Error::Kind::Precondition, "bad histogram bin");
            h.counts[b] = c;
        }
    }
    return h;
}

Table baseline_table(const std::string& command, const std::vector<BaselineRange>& ranges)
{
    Table t = make(command, "baseline", {"N", "m1", "m2", "ks", "count"});
    for (const auto& b : ranges) {
        t.rows.push_back({std::to_string(b.N), format_double(b.m1), format_double(b.m2), format_double(b.ks),
                          std::to_string(b.count)});
    }
    return t;
}

std::vector<BaselineRange> baseline_from_table(const Table& t)
{
    expect_name(t, "baseline");
    std::vector<BaselineRange> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        out.push_back({parse_u64(t.cell(i, "N")), parse_double(t.cell(i, "m1")), parse_double(t.cell(i, "m2")),
                       parse_double(t.cell(i, "ks")), parse_u64(t.cell(i, "count"))});
    }
    return out;
}

}  // namespace fibstat
