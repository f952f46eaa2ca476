#include "fibstat/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fibstat/random.hpp"

namespace fibstat {

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::pair<Command, std::string>> kCommands{
    {Command::Enumerate, "enumerate"}, {Command::Sigma, "sigma"},     {Command::Ekac, "ekac"},
    {Command::Tau, "tau"},             {Command::Delta, "delta"},     {Command::Hilbert, "hilbert"},
    {Command::Baseline, "baseline"}};

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == ';' || c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

bool parse_bool(const std::string& v)
{
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    fail(Error::Kind::Precondition, "not a boolean: '" + v + "'");
}

std::set<Place> parse_places(const std::string& text)
{
    std::set<Place> out;
    for (const auto& tok : split_list(text)) out.insert(Place::parse(tok));
    return out;
}

std::string places_str(const std::set<Place>& S)
{
    std::string out;
    for (const auto& v : S) out += (out.empty() ? "" : ";") + v.str();
    return out;
}

bool statistical(Command c)
{
    return c == Command::Ekac || c == Command::Tau || c == Command::Enumerate;
}

}  // namespace

std::string to_string(Command c)
{
    for (const auto& [k, name] : kCommands) {
        if (k == c) return name;
    }
    return "?";
}

Command parse_command(const std::string& text)
{
    for (const auto& [k, name] : kCommands) {
        if (name == text) return k;
    }
    fail(Error::Kind::Precondition,
         "unknown command '" + text + "' (enumerate|sigma|ekac|tau|delta|hilbert|baseline)");
}

std::vector<std::string> RunConfig::keys()
{
    return {"command", "family",     "B",      "S",       "r_max",  "depth",   "threads",   "seed",
            "output",  "format",     "samples", "exhaustive", "centering", "window", "p_max", "source",
            "precision", "cutoff",   "input",  "symbol",  "conic",  "place",   "N",         "n",
            "modulus", "list",       "taint_ceiling"};
}

void RunConfig::set(const std::string& key, const std::string& value)
{
    auto int_in = [&](i64 lo, i64 hi) {
        const i64 v = parse_i64(value);
        if (v < lo || v > hi) {
            fail(Error::Kind::Precondition, key + " = " + value + " outside [" + std::to_string(lo) + ", " +
                                                std::to_string(hi) + "]");
        }
        return v;
    };
    if (key == "command") command = parse_command(value);
    else if (key == "family") family = value;
    else if (key == "B") B = int_in(1, i64(1) << 31);
    else if (key == "S") S = value;
    else if (key == "r_max") r_max = static_cast<int>(int_in(0, 1000));
    else if (key == "depth") depth = static_cast<int>(int_in(0, 1000));
    else if (key == "threads") threads = static_cast<unsigned>(int_in(0, 4096));
    else if (key == "seed") seed = parse_u64(value);
    else if (key == "output") output = value;
    else if (key == "format") format = value;
    else if (key == "samples") samples = parse_u64(value);
    else if (key == "exhaustive") exhaustive = parse_bool(value);
    else if (key == "centering") centering = value;
    else if (key == "window") window = value;
    else if (key == "p_max") p_max = static_cast<u64>(int_in(2, 100'000'000));
    else if (key == "source") source = value;
    else if (key == "precision") precision = static_cast<int>(int_in(1, 60));
    else if (key == "cutoff") cutoff = static_cast<u64>(int_in(2, 100'000'000));
    else if (key == "input") input = value;
    else if (key == "symbol") symbol = value;
    else if (key == "conic") conic = value;
    else if (key == "place") place = value;
    else if (key == "N") N = value;
    else if (key == "n") n = static_cast<int>(int_in(1, 16));
    else if (key == "modulus") modulus = parse_u64(value);
    else if (key == "list") list = parse_bool(value);
    else if (key == "taint_ceiling") {
        taint_ceiling = parse_double(value);
        require(taint_ceiling >= 0 && taint_ceiling <= 1, "taint_ceiling must lie in [0, 1]");
    } else {
        fail(Error::Kind::Precondition, "unknown configuration key '" + key + "'");
    }
}

void RunConfig::validate() const
{
    require(r_max <= 12, "r_max = " + std::to_string(r_max) + " exceeds 12");
    require(r_max >= 0, "r_max must be non-negative");
    require(format == "csv" || format == "json", "format must be csv or json");
    if (statistical(command)) require(B >= 3, "B must be at least 3 for " + to_string(command));
    if (command == Command::Ekac || command == Command::Tau || command == Command::Sigma) {
        const auto fam = FamilyDescriptor::by_name(family);
        parse_places(S);
        if (command == Command::Ekac) {
            parse_centering(centering);
            require(fam.Delta() > Rational(0), "ekac needs Delta > 0 (" + fam.name() + " has Delta = " +
                                                   fam.Delta().str() + "; use tau)");
        }
        if (command == Command::Tau) {
            require(source.empty() || source == "haar" || source == "empirical", "tau source must be haar|empirical");
        }
        if (command == Command::Sigma) {
            require(source.empty() || source == "exact" || source == "empirical" || source == "haar",
                    "sigma source must be exact|empirical|haar");
        }
    }
    if (command == Command::Baseline) {
        parse_centering(centering);
        const auto ranges = split_list(N);
        require(!ranges.empty(), "baseline needs at least one N");
        for (const auto& r : ranges) {
            const u64 v = parse_u64(r);
            require(v >= 100 && v <= 1'000'000'000, "baseline N must lie in [100, 1e9]");
        }
    }
    if (command == Command::Delta) require(!input.empty(), "delta needs an input action document");
    if (command == Command::Hilbert) {
        require(symbol.empty() != conic.empty(), "hilbert needs exactly one of symbol (a,b) or conic (a,b,c)");
        if (!place.empty()) Place::parse(place);
        const auto parts = split_list(symbol.empty() ? conic : symbol);
        require(parts.size() == (symbol.empty() ? 3u : 2u), "hilbert: wrong number of arguments");
        for (const auto& p : parts) {
            require(Rational::parse(p) != Rational(0), "hilbert arguments must be nonzero");
        }
    }
    if (command == Command::Enumerate && modulus > 0) {
        for (u64 p : prime_divisors(modulus)) require(modulus % (p * p) != 0, "modulus must be squarefree");
    }
}

std::string RunConfig::canonical() const
{
    std::ostringstream o;
    o << "command=" << to_string(command) << '\n'
      << "family=" << family << '\n'
      << "B=" << B << '\n'
      << "S=" << S << '\n'
      << "r_max=" << r_max << '\n'
      << "depth=" << depth << '\n'
      << "seed=" << seed << '\n'
      << "format=" << format << '\n'
      << "samples=" << samples << '\n'
      << "exhaustive=" << exhaustive << '\n'
      << "centering=" << centering << '\n'
      << "window=" << window << '\n'
      << "p_max=" << p_max << '\n'
      << "source=" << source << '\n'
      << "precision=" << precision << '\n'
      << "cutoff=" << cutoff << '\n'
      << "input=" << input << '\n'
      << "symbol=" << symbol << '\n'
      << "conic=" << conic << '\n'
      << "place=" << place << '\n'
      << "N=" << N << '\n'
      << "n=" << n << '\n'
      << "modulus=" << modulus << '\n'
      << "list=" << list << '\n'
      << "taint_ceiling=" << format_double(taint_ceiling) << '\n';
    return o.str();
}

std::string RunConfig::hash() const
{
    u64 h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

unsigned RunConfig::effective_threads() const
{
    if (threads > 0) return threads;
    if (const char* env = std::getenv("FIBSTAT_THREADS")) {
        const i64 v = parse_i64(env);
        require(v >= 1 && v <= 4096, "FIBSTAT_THREADS must lie in [1, 4096]");
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

const Table& RunOutput::table(const std::string& name) const
{
    for (const auto& t : tables) {
        if (t.name == name) return t;
    }
    fail(Error::Kind::Precondition, "run produced no table '" + name + "'");
}

const std::string& RunOutput::result(const std::string& key) const
{
    for (const auto& [k, v] : results) {
        if (k == key) return v;
    }
    fail(Error::Kind::Precondition, "run produced no result '" + key + "'");
}

namespace {

struct Context {
    const RunConfig& cfg;
    unsigned threads;
    RunOutput out;
    json window = nullptr;
    std::string command_name;

    Table table(const std::string& name, std::vector<std::string> columns)
    {
        Table t;
        t.command = command_name;
        t.name = name;
        t.columns = std::move(columns);
        return t;
    }
    void result(std::string k, std::string v) { out.results.emplace_back(std::move(k), std::move(v)); }
};

FamilyDescriptor family_of(const RunConfig& cfg)
{
    auto fam = FamilyDescriptor::by_name(cfg.family);
    return cfg.depth > 0 ? fam.with_search_depth(cfg.depth) : fam;
}

void check_taint(Context& ctx, const ScanResult& res)
{
    ctx.out.tainted_fraction = res.tainted_fraction();
    ctx.result("tainted_fraction", format_double(ctx.out.tainted_fraction));
    if (ctx.out.tainted_fraction > ctx.cfg.taint_ceiling) {
        fail(Error::Kind::Taint, "tainted fraction " + format_double(ctx.out.tainted_fraction) + " exceeds the ceiling " +
                                     format_double(ctx.cfg.taint_ceiling));
    }
}

void run_enumerate(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const u64 count = count_points(cfg.n, cfg.B, ctx.threads);
    const double cn = point_constant(cfg.n);
    const double ratio = static_cast<double>(count) / std::pow(static_cast<double>(cfg.B), cfg.n + 1);
    Table t = ctx.table("count", {"n", "B", "count", "ratio", "c_n", "relative_error"});
    t.rows.push_back({std::to_string(cfg.n), std::to_string(cfg.B), std::to_string(count), format_double(ratio),
                      format_double(cn), format_double(std::abs(ratio - cn) / cn)});
    ctx.out.tables.push_back(std::move(t));
    ctx.result("count", std::to_string(count));
    ctx.result("ratio", format_double(ratio));

    if (cfg.modulus > 0) {
        const ClassCounts cc(cfg.n, cfg.B, cfg.modulus, ctx.threads);
        Table c = ctx.table("classes", {"class", "count", "main_term", "relative_error"});
        c.add_meta("modulus", std::to_string(cfg.modulus));
        const double main = cn * std::pow(static_cast<double>(cfg.B), cfg.n + 1) /
                            static_cast<double>(proj_size(cfg.n, cfg.modulus));
        u64 total = 0;
        double worst = 0;
        for (std::size_t i = 0; i < cc.class_count(); ++i) {
            std::string label;
            for (u64 v : cc.residue_class(i).coords()) label += (label.empty() ? "" : " ") + std::to_string(v);
            const double err = relative_error(cc.count(i), main);
            c.rows.push_back({label, std::to_string(cc.count(i)), format_double(main), format_double(err)});
            total += cc.count(i);
            worst = std::max(worst, err);
        }
        if (total != count) fail(Error::Kind::Invariant, "class counts do not partition the points");
        ctx.out.tables.push_back(std::move(c));
        ctx.result("max_class_relative_error", format_double(worst));
    }
    if (cfg.list) {
        require(count <= 1'000'000, "list: more than 1e6 points");
        std::vector<std::string> cols;
        for (int i = 0; i <= cfg.n; ++i) cols.push_back("x" + std::to_string(i));
        cols.push_back("height");
        Table p = ctx.table("points", cols);
        for_each_point(cfg.n, cfg.B, [&](std::span<const i64> x, i64 h) {
            std::vector<std::string> row;
            for (i64 v : x) row.push_back(std::to_string(v));
            row.push_back(std::to_string(h));
            p.rows.push_back(std::move(row));
        });
        ctx.out.tables.push_back(std::move(p));
    }
}

void run_sigma(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto fam = family_of(cfg);
    const std::string source = cfg.source.empty() ? (fam.has_nonsplit_test() ? "exact" : "haar") : cfg.source;
    SigmaTable table;
    if (source == "exact") {
        require(fam.has_nonsplit_test(), "no exact sigma for " + fam.name() + " (use source empirical or haar)");
        table = SigmaTable::exact(fam, cfg.p_max);
    } else {
        const u64 samples = cfg.samples ? cfg.samples : 10000;
        for (u64 p : primes_up_to(cfg.p_max)) {
            if (source == "haar") {
                table.add({p, std::nullopt, insoluble_density(fam, p), 0.0, 0});
            } else {
                const auto e = sigma_empirical(fam, p, samples, cfg.precision, chunk_seed(cfg.seed, p));
                table.add({p, std::nullopt, e.estimate, e.std_error, e.samples});
            }
        }
    }
    Table st = sigma_table(ctx.command_name, table);
    st.add_meta("family", fam.name());
    st.add_meta("source", source);
    ctx.out.tables.push_back(std::move(st));
    ctx.result("source", source);
    ctx.result("primes", std::to_string(table.entries().size()));
    if (fam.Delta() > Rational(0) && table.entries().size() >= 25 && table.coverage() > 100) {
        const auto fit = sigma_partial_sums(table, fam.Delta());
        ctx.out.tables.push_back(sigma_fit_table(ctx.command_name, fit));
        ctx.result("beta", format_double(fit.beta));
        ctx.result("beta_upper_spread", format_double(fit.beta_upper_spread));
        ctx.result("slope", format_double(fit.slope));
    }
}

ScanResult collect(Context& ctx, const FamilyDescriptor& fam, bool sampled, u64 samples, bool keep)
{
    const auto S = parse_places(ctx.cfg.S);
    return sampled ? sample_scan(fam, ctx.cfg.B, S, samples, ctx.cfg.seed, ctx.threads, keep)
                   : scan(fam, ctx.cfg.B, S, ctx.threads, keep);
}

void run_ekac(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto fam = family_of(cfg);
    const Centering centering = parse_centering(cfg.centering);
    const bool sampled = !cfg.exhaustive;
    const u64 samples = cfg.samples ? cfg.samples : 100000;

    std::optional<TruncationWindow> window;
    if (cfg.window == "growth") {
        window = TruncationWindow::from_growth(cfg.r_max, cfg.B, fam.n());
    } else if (!cfg.window.empty()) {
        const auto parts = split_list(cfg.window);
        require(parts.size() == 2, "window must be 't0,t1' or 'growth'");
        window = TruncationWindow::explicit_window(cfg.r_max, parse_double(parts[0]), parse_double(parts[1]), cfg.B);
    }
    if (window) ctx.window = json::array({window->t0, window->t1});

    const auto res = collect(ctx, fam, sampled, samples, window.has_value());
    check_taint(ctx, res);
    std::optional<SigmaTable> sigma;
    if (centering == Centering::Empirical || window) {
        sigma = SigmaTable::exact(fam, static_cast<u64>(std::max<i64>(cfg.B, 100)));
    }
    const SigmaTable* sp = sigma ? &*sigma : nullptr;

    std::vector<MomentReport> reports;
    for (int r = 0; r <= cfg.r_max; ++r) reports.push_back(moments(res.tally, cfg.B, fam.Delta(), r, centering, sp));
    Table mt = moments_table(ctx.command_name, reports);
    mt.add_meta("family", fam.name());
    mt.add_meta("S", cfg.S);
    mt.add_meta("mode", sampled ? "sampled" : "exhaustive");
    mt.add_meta("samples", std::to_string(sampled ? samples : res.tally.point_count()));
    mt.add_meta("seed", std::to_string(cfg.seed));
    ctx.out.tables.push_back(std::move(mt));

    const double ks = gaussian_distance(res.tally, fam.Delta(), centering, sp);
    Table kt = ctx.table("distance", {"B", "centering", "ks", "records", "points", "singular", "tainted"});
    kt.rows.push_back({std::to_string(cfg.B), to_string(centering), format_double(ks),
                       std::to_string(reports.front().count), std::to_string(res.tally.point_count()),
                       std::to_string(res.tally.singular_count()), std::to_string(res.tally.tainted_count())});
    ctx.out.tables.push_back(std::move(kt));
    ctx.out.tables.push_back(
        histogram_table(ctx.command_name, standardized_histogram(res.tally, fam.Delta(), centering, sp)));

    if (window) {
        std::vector<MomentReport> trunc;
        for (int r = 0; r <= cfg.r_max; ++r) {
            trunc.push_back(truncated_moments(res.records, cfg.B, fam.Delta(), *window, *sigma, r));
        }
        Table tt = moments_table(ctx.command_name, trunc);
        tt.name = "truncated_moments";
        tt.add_meta("t0", format_double(window->t0));
        tt.add_meta("t1", format_double(window->t1));
        ctx.out.tables.push_back(std::move(tt));
    }
    ctx.result("ks", format_double(ks));
    if (cfg.r_max >= 1) ctx.result("m1", format_double(reports[1].value));
    if (cfg.r_max >= 2) ctx.result("m2", format_double(reports[2].value));
    ctx.result("records", std::to_string(reports.front().count));
}

void run_tau(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto fam = family_of(cfg);
    const bool sampled = cfg.samples > 0;
    const auto res = collect(ctx, fam, sampled, cfg.samples, false);
    check_taint(ctx, res);
    const auto tau = tau_histogram(res.tally, cfg.B);
    Table tt = tau_table(ctx.command_name, tau);
    tt.add_meta("family", fam.name());
    tt.add_meta("S", cfg.S);
    tt.add_meta("mode", sampled ? "sampled" : "exhaustive");
    ctx.out.tables.push_back(std::move(tt));

    Rational mass(0);
    for (const auto& m : tau.masses) mass += m;
    ctx.result("mass_total", mass.str());
    ctx.result("untainted_smooth_fraction", tau.untainted_smooth_fraction().str());
    for (std::size_t j = 0; j < tau.masses.size() && j <= 4; ++j) {
        ctx.result("tau" + std::to_string(j), format_double(tau.masses[j].to_double()));
    }

    if (cfg.r_max >= 1 && res.tally.untainted_count() > 0) {
        Table nt = ctx.table("n_moments", {"r", "n_moment", "n_moment_float", "tau_moment", "identity"});
        const Rational adjust(static_cast<i64>(tau.point_count), static_cast<i64>(res.tally.untainted_count()));
        for (int r = 1; r <= cfg.r_max; ++r) {
            const Rational nm = n_moments(res.tally, r), tm = tau_moment(tau, r);
            nt.rows.push_back({std::to_string(r), nm.str(), format_double(nm.to_double()), tm.str(),
                               nm == tm * adjust ? "exact" : "mismatch"});
        }
        ctx.out.tables.push_back(std::move(nt));
    }

    if (fam.Delta() == Rational(0)) {
        const std::string source = cfg.source.empty() ? "haar" : cfg.source;
        const auto dens = local_densities(fam, cfg.cutoff,
                                          source == "haar" ? DensitySource::Haar : DensitySource::Empirical,
                                          cfg.samples ? cfg.samples : 10000, cfg.precision, cfg.seed);
        std::vector<TauPrediction> preds;
        const int jmax = std::max<int>(4, static_cast<int>(tau.counts.size()) - 1);
        for (int j = 0; j <= jmax; ++j) preds.push_back(tau_limit_prediction(fam, j, dens));
        Table pt = prediction_table(ctx.command_name, preds);
        pt.add_meta("cutoff", std::to_string(cfg.cutoff));
        pt.add_meta("source", source);
        ctx.out.tables.push_back(std::move(pt));
        ctx.result("prediction1", format_double(preds[1].value));
    }
}

void run_delta(Context& ctx)
{
    const auto actions = load_action_document(ctx.cfg.input);
    Table t = ctx.table("delta", {"divisor", "delta", "one_minus_delta"});
    std::vector<ComponentAction> all;
    for (const auto& a : actions) {
        const Rational d = delta(a.action);
        t.rows.push_back({a.name, d.str(), (Rational(1) - d).str()});
        all.push_back(a.action);
    }
    const Rational total = delta_total(all);
    t.add_meta("Delta", total.str());
    ctx.out.tables.push_back(std::move(t));
    ctx.result("Delta", total.str());
}

void run_hilbert(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    Table t = ctx.table("hilbert", {"query", "place", "result"});
    if (!cfg.symbol.empty()) {
        const auto parts = split_list(cfg.symbol);
        const Rational a = Rational::parse(parts[0]), b = Rational::parse(parts[1]);
        std::set<Place> places;
        if (!cfg.place.empty()) {
            places.insert(Place::parse(cfg.place));
        } else {
            places = {Place::infinity(), Place::prime(2)};
            for (i64 v : {a.num(), a.den(), b.num(), b.den()}) {
                for (u64 p : prime_divisors(static_cast<u64>(v < 0 ? -v : v))) places.insert(Place::prime(p));
            }
        }
        int product = 1;
        const std::string q = "(" + a.str() + ";" + b.str() + ")";
        for (const auto& v : places) {
            const int h = hilbert(a, b, v);
            product *= h;
            t.rows.push_back({q, v.str(), std::to_string(h)});
        }
        if (cfg.place.empty()) {
            t.rows.push_back({q, "product", std::to_string(product)});
            ctx.result("product", std::to_string(product));
        } else {
            ctx.result("symbol", t.rows.front()[2]);
        }
    } else {
        const auto parts = split_list(cfg.conic);
        i64 c[3];
        for (int i = 0; i < 3; ++i) c[i] = parse_i64(parts[i]);
        std::set<Place> places;
        if (!cfg.place.empty()) {
            places.insert(Place::parse(cfg.place));
        } else {
            places = {Place::infinity(), Place::prime(2)};
            for (i64 v : c) {
                for (u64 p : prime_divisors(static_cast<u64>(v < 0 ? -v : v))) places.insert(Place::prime(p));
            }
        }
        const std::string q = parts[0] + " " + parts[1] + " " + parts[2];
        int insoluble = 0;
        for (const auto& v : places) {
            const bool ok = conic_soluble(c[0], c[1], c[2], v);
            insoluble += !ok;
            t.rows.push_back({q, v.str(), ok ? "soluble" : "insoluble"});
        }
        if (cfg.place.empty()) {
            ctx.result("insoluble_places", std::to_string(insoluble));
        } else {
            ctx.result("verdict", t.rows.front()[2]);
        }
    }
    ctx.out.tables.push_back(std::move(t));
}

void run_baseline(Context& ctx)
{
    const Centering centering = parse_centering(ctx.cfg.centering);
    std::vector<BaselineRange> ranges;
    for (const auto& tok : split_list(ctx.cfg.N)) ranges.push_back(baseline_omega(parse_u64(tok), centering));
    Table t = baseline_table(ctx.command_name, ranges);
    t.add_meta("centering", to_string(centering));
    ctx.out.tables.push_back(std::move(t));
    ctx.result("m2", format_double(ranges.back().m2));
    ctx.result("ks", format_double(ranges.back().ks));
}

}  // namespace

RunOutput run(const RunConfig& config)
{
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    Context ctx{config, config.effective_threads(), {}, nullptr, to_string(config.command)};
    switch (config.command) {
    case Command::Enumerate: run_enumerate(ctx); break;
    case Command::Sigma: run_sigma(ctx); break;
    case Command::Ekac: run_ekac(ctx); break;
    case Command::Tau: run_tau(ctx); break;
    case Command::Delta: run_delta(ctx); break;
    case Command::Hilbert: run_hilbert(ctx); break;
    case Command::Baseline: run_baseline(ctx); break;
    }
    ctx.out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json m;
    m["fibstat"] = kFormatVersion;
    m["command"] = ctx.command_name;
    m["family"] = config.family;
    m["B"] = config.B;
    m["S"] = places_str(parse_places(config.S));
    m["centering"] = config.centering;
    m["window"] = ctx.window;
    m["seed"] = config.seed;
    m["rng"] = "mt19937_64";
    m["threads"] = ctx.threads;
    m["config_hash"] = config.hash();
    m["tainted_fraction"] = ctx.out.tainted_fraction;
    m["wall_time_s"] = ctx.out.wall_seconds;
    m["tables"] = json::array();
    for (const auto& t : ctx.out.tables) m["tables"].push_back(t.name);
    m["results"] = json::object();
    for (const auto& [k, v] : ctx.out.results) m["results"][k] = v;
    m["config"] = json::object();
    std::istringstream lines(config.canonical());
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find('=');
        m["config"][line.substr(0, eq)] = line.substr(eq + 1);
    }
    ctx.out.manifest = m.dump(2) + "\n";
    return std::move(ctx.out);
}

std::vector<std::string> write_outputs(const RunOutput& out, const std::string& prefix, const std::string& format)
{
    namespace fs = std::filesystem;
    require(!prefix.empty(), "empty output prefix");
    require(format == "csv" || format == "json", "format must be csv or json");
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& t : out.tables) {
        files.emplace_back(prefix + "." + t.name + "." + format, format == "csv" ? write_csv(t) : write_json(t));
    }
    files.emplace_back(prefix + ".manifest.json", out.manifest);

    std::vector<std::string> temps;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [path, text] : files) {
        const std::string tmp = path + ".tmp";
        temps.push_back(tmp);
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << text;
        f.close();
        if (!f) {
            cleanup();
            fail(Error::Kind::Io, "cannot write " + tmp);
        }
    }
    std::vector<std::string> written;
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::error_code ec;
        fs::rename(temps[i], files[i].first, ec);
        if (ec) {
            cleanup();
            fail(Error::Kind::Io, "cannot rename " + temps[i] + ": " + ec.message());
        }
        written.push_back(files[i].first);
    }
    return written;
}

int exit_code(const std::exception& e)
{
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
        case Error::Kind::Taint: return 3;
        case Error::Kind::Invariant: return 4;
        default: return 2;
        }
    }
    return 4;
}

std::string error_record(const std::exception& e)
{
    std::string kind = "internal";
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
        case Error::Kind::Precondition: kind = "precondition"; break;
        case Error::Kind::Taint: kind = "taint"; break;
        case Error::Kind::Invariant: kind = "invariant"; break;
        case Error::Kind::Overflow: kind = "overflow"; break;
        case Error::Kind::Io: kind = "io"; break;
        }
    }
    json j;
    j["error"]["kind"] = kind;
    j["error"]["code"] = exit_code(e);
    j["error"]["message"] = e.what();
    return j.dump();
}

}  // namespace fibstat
