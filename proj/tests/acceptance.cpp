// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                 run all fourteen
//   acceptance --criterion N   run one

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fibstat/fibstat.h"
#include "fibstat/run.hpp"

using namespace fibstat;

namespace {

// tolerances
constexpr double kPointCountTol = 0.01;     // 1
constexpr double kPointCountSeconds = 60;   // 1
constexpr double kClassTol = 0.05;          // 2
constexpr int kReciprocityPairs = 10000;    // 3
constexpr i64 kFormulaRange = 200;          // 4
constexpr i64 kParityHeight = 200;          // 5
constexpr u64 kSigmaPrimeMax = 97;          // 6
constexpr double kSlopeTol = 0.15;          // 7
constexpr double kBetaSpread = 0.05;        // 7
constexpr u64 kSlopePrimeMax = 100000;      // 7
constexpr double kEkacM2Tol = 0.25;         // 8
constexpr double kEkacM1Tol = 0.1;          // 8
constexpr u64 kEkacSamples = 1'000'000;     // 8
constexpr double kBaselineM2Tol = 0.10;     // 9
constexpr i64 kTauHeight = 40;              // 10
constexpr double kTaintCeiling = 0.001;     // 10
constexpr double kTauSigmas = 3.0;          // 10
constexpr u64 kTauCutoff = 100;             // 10
constexpr u64 kDensitySamples = 10000;      // 10
constexpr int kCriterionVectors = 200;      // 11
constexpr u64 kCriterionPrimeMax = 31;      // 11

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what)
    {
        pass = pass && ok;
        note(std::string(ok ? "" : "FAILED ") + what);
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double x, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const FamilyDescriptor& conics()
{
    static const auto f = FamilyDescriptor::diagonal_conics();
    return f;
}

const FamilyDescriptor& cubics()
{
    static const auto f = FamilyDescriptor::diagonal_cubics();
    return f;
}

unsigned threads()
{
    return RunConfig{}.effective_threads();
}

Outcome point_count()
{
    Outcome o;
    const double target = 4.0 / zeta(3.0);
    constexpr double apery = 1.2020569031595942;
    o.check(std::abs(point_constant(2) - 4.0 / apery) < 1e-12, "c_2 = " + num(point_constant(2), 8));
    const auto t0 = std::chrono::steady_clock::now();
    const u64 count = count_points(2, 2000, 1);
    const double elapsed = seconds_since(t0);
    const double ratio = static_cast<double>(count) / 8e9;
    o.check(std::abs(ratio - target) / target < kPointCountTol,
            "count/B^3 = " + num(ratio, 6) + ", rel. err " + num(std::abs(ratio - target) / target, 3));
    o.check(elapsed < kPointCountSeconds, "single-threaded " + num(elapsed, 3) + " s");
    return o;
}

Outcome congruence_counts()
{
    Outcome o;
    const i64 B = 1000;
    const u64 total = count_points(2, B, threads());
    for (u64 p : {3, 5, 7}) {
        const ClassCounts cc(2, B, p, threads());
        const double main = point_constant(2) * 1e9 / static_cast<double>(proj_size(2, p));
        double worst = 0;
        u64 sum = 0;
        for (std::size_t i = 0; i < cc.class_count(); ++i) {
            worst = std::max(worst, relative_error(cc.count(i), main));
            sum += cc.count(i);
        }
        o.check(worst < kClassTol && cc.class_count() == proj_size(2, p),
                "p=" + std::to_string(p) + " max rel. err " + num(worst, 3));
        o.check(sum == total, "p=" + std::to_string(p) + " partition " + std::to_string(sum) + " = " +
                                  std::to_string(total));
    }
    return o;
}

Outcome reciprocity()
{
    Outcome o;
    std::mt19937_64 rng(20261016);
    std::uniform_int_distribution<i64> d(-1'000'000, 1'000'000);
    int bad = 0, nontrivial = 0;
    for (int i = 0; i < kReciprocityPairs; ++i) {
        i64 a = 0, b = 0;
        while (a == 0) a = d(rng);
        while (b == 0) b = d(rng);
        std::set<u64> primes{2};
        for (i64 v : {a, b}) {
            for (u64 p : prime_divisors(v)) primes.insert(p);
        }
        int product = hilbert(a, b, Place::infinity());
        bool minus = product < 0;
        for (u64 p : primes) {
            const int h = hilbert(a, b, Place::prime(p));
            product *= h;
            minus = minus || h < 0;
        }
        bad += product != 1;
        nontrivial += minus;
    }
    o.check(bad == 0, std::to_string(kReciprocityPairs) + " pairs, " + std::to_string(bad) + " violations");
    o.note(std::to_string(nontrivial) + " pairs with some symbol -1");
    return o;
}

Outcome formula_vs_engine()
{
    Outcome o;
    std::vector<i64> vals;
    for (i64 v = -kFormulaRange; v <= kFormulaRange; ++v) {
        if (v != 0 && mod_floor(v, 4) == 1 && moebius(static_cast<u64>(std::abs(v))) != 0) vals.push_back(v);
    }
    const std::set<Place> S{Place::infinity()};
    const FactorTable table(kFormulaRange);
    u64 triples = 0, mismatches = 0;
    for (i64 a : vals) {
        for (i64 b : vals) {
            if (gcd_abs(a, b) != 1) continue;
            for (i64 c : vals) {
                if (gcd_abs(a, c) != 1 || gcd_abs(b, c) != 1) continue;
                ++triples;
                const auto rec = omega_pi(conics(), ProjPoint::canonical({a, b, c}), S, &table);
                mismatches += rec.tainted || rec.omega != omega_formula_conics(a, b, c);
            }
        }
    }
    o.check(mismatches == 0, std::to_string(triples) + " triples, " + std::to_string(mismatches) + " disagreements");
    return o;
}

Outcome parity()
{
    Outcome o;
    const auto res = scan(conics(), kParityHeight, {}, threads());
    u64 odd = 0;
    for (const auto& [k, c] : res.tally.cells()) {
        if (k.first % 2) odd += c;
    }
    o.check(odd == 0 && res.tally.tainted_count() == 0,
            std::to_string(res.tally.untainted_count()) + " smooth fibres, " + std::to_string(odd) + " with odd omega");
    return o;
}

Outcome sigma_dual()
{
    Outcome o;
    int primes = 0, mismatch = 0, over = 0;
    for (u64 p : primes_up_to(kSigmaPrimeMax)) {
        if (p == 2) continue;
        ++primes;
        const Rational e = sigma_exact(conics(), p);
        mismatch += e != sigma_by_classification(conics(), p);
        over += e > Rational(3, static_cast<i64>(p));
    }
    o.check(mismatch == 0, std::to_string(primes) + " odd primes, " + std::to_string(mismatch) + " mismatches");
    o.check(over == 0, "sigma_p <= 3/p everywhere");
    return o;
}

Outcome sigma_slope()
{
    Outcome o;
    const auto table = SigmaTable::exact(conics(), kSlopePrimeMax);
    const auto fit = sigma_partial_sums(table, conics().Delta());
    o.check(std::abs(fit.slope - 1.5) / 1.5 < kSlopeTol, "slope " + num(fit.slope, 5) + " vs 3/2");
    o.check(fit.beta_upper_spread <= kBetaSpread, "beta " + num(fit.beta, 5) + ", spread over the upper half " +
                                                      num(fit.beta_upper_spread, 3));
    return o;
}

Outcome erdos_kac()
{
    Outcome o;
    const std::set<Place> S{Place::infinity()};
    const auto table = SigmaTable::exact(conics(), 100000);
    double last_ks = 2.0, last_paper = 2.0;
    bool decreasing = true, paper_decreasing = true;
    std::string trend, paper_trend;
    MomentReport m1, m2;
    for (i64 B : {1000, 10000, 100000}) {
        const auto res = sample_scan(conics(), B, S, kEkacSamples, 1, 4);
        const double ks = gaussian_distance(res.tally, conics().Delta(), Centering::Empirical, &table);
        const double ks_paper = gaussian_distance(res.tally, conics().Delta(), Centering::Paper);
        decreasing = decreasing && ks < last_ks;
        paper_decreasing = paper_decreasing && ks_paper < last_paper;
        last_ks = ks;
        last_paper = ks_paper;
        trend += (trend.empty() ? "" : " > ") + num(ks, 4);
        paper_trend += (paper_trend.empty() ? "" : ", ") + num(ks_paper, 4);
        if (B == 100000) {
            m1 = moments(res.tally, B, conics().Delta(), 1, Centering::Empirical, &table);
            m2 = moments(res.tally, B, conics().Delta(), 2, Centering::Empirical, &table);
        }
    }
    o.check(decreasing, "KS " + trend);
    o.check(std::abs(m2.value - 1.0) <= kEkacM2Tol, "M2 = " + num(m2.value, 4) + " at B=1e5");
    o.check(std::abs(m1.value) <= kEkacM1Tol, "M1 = " + num(m1.value, 3));
    o.note(std::string("paper-centred KS ") + paper_trend + (paper_decreasing ? " (decreasing)" : " (not decreasing)"));
    return o;
}

Outcome baseline()
{
    Outcome o;
    std::vector<BaselineRange> r;
    for (u64 N : {100000, 1000000, 10000000}) r.push_back(baseline_omega(N, Centering::Empirical));
    o.check(r[0].ks > r[1].ks && r[1].ks > r[2].ks,
            "KS " + num(r[0].ks) + " > " + num(r[1].ks) + " > " + num(r[2].ks));
    o.check(std::abs(r[2].m2 - 1.0) <= kBaselineM2Tol, "M2 = " + num(r[2].m2) + " at N=1e7");
    o.note("M1 = " + num(r[2].m1, 3));
    const auto paper = baseline_omega(10000000, Centering::Paper);
    o.note("paper-centred M2 = " + num(paper.m2));
    return o;
}

Outcome tau_law()
{
    Outcome o;
    const std::set<Place> S{Place::infinity()};
    const auto res = scan(cubics(), kTauHeight, S, threads());
    const auto tau = tau_histogram(res.tally, kTauHeight);
    Rational total(0);
    for (const auto& m : tau.masses) total += m;
    o.check(total == tau.untainted_smooth_fraction(), "sum tau = " + total.str() + " exactly");
    o.check(res.tainted_fraction() < kTaintCeiling, "tainted " + num(res.tainted_fraction(), 3));
    const double t1 = tau.masses.size() > 1 ? tau.masses[1].to_double() : 0.0;
    o.check(t1 > 0, "tau(1) = " + num(t1, 5));
    bool decreasing = true;
    std::string shape;
    for (std::size_t j = 1; j < tau.masses.size(); ++j) {
        shape += (j > 1 ? " > " : "") + num(tau.masses[j].to_double(), 3);
        if (j + 1 < tau.masses.size()) decreasing = decreasing && tau.masses[j + 1] < tau.masses[j];
    }
    o.check(decreasing, "tau(j>=1): " + shape);

    const auto dens =
        local_densities(cubics(), kTauCutoff, DensitySource::Empirical, kDensitySamples, 4, 20261016);
    const auto pred = tau_limit_prediction(cubics(), 1, dens);
    const double n = static_cast<double>(tau.point_count);
    const double se_scan = std::sqrt(t1 * (1 - t1) / n);
    const double se = std::hypot(se_scan, pred.std_error);
    const double gap = std::abs(pred.value - t1);
    o.check(gap <= kTauSigmas * se, "prediction " + num(pred.value, 4) + " +- " + num(pred.std_error, 2) + " vs tau(1," +
                                        std::to_string(kTauHeight) + ") " + num(t1, 4) + " +- " + num(se_scan, 2) +
                                        ": " + num(gap / se, 3) + " SE");

    const auto haar = tau_limit_prediction(cubics(), 1, local_densities(cubics(), kTauCutoff, DensitySource::Haar));
    const auto big = sample_scan(cubics(), 1000, S, 50000, 1, threads());
    const auto tb = tau_histogram(big.tally, 1000);
    const double b1 = tb.masses.size() > 1 ? tb.masses[1].to_double() : 0.0;
    o.note("Haar prediction " + num(haar.value, 4) + " (tail " + num(haar.tail_bound, 2) +
           "); sampled tau(1,1000) = " + num(b1, 4) + " +- " + num(std::sqrt(b1 * (1 - b1) / 50000), 2));
    return o;
}

Outcome cubic_soundness()
{
    Outcome o;
    std::mt19937_64 rng(7);
    int contradictions = 0, unknowns = 0, tested = 0;
    std::string per_prime;
    for (u64 p : primes_up_to(kCriterionPrimeMax)) {
        if (p % 3 != 1) continue;
        const i64 q = static_cast<i64>(p);
        std::uniform_int_distribution<i64> unit(1, q * q), sign(0, 1);
        int found = 0, attempts = 0;
        while (found < kCriterionVectors) {
            require(++attempts < 1'000'000, "no criterion vectors found");
            std::array<i64, 4> y{};
            for (int i = 0; i < 4; ++i) {
                y[i] = unit(rng) * (i >= 2 ? q : 1) * (sign(rng) ? -1 : 1);
            }
            if (!cubic_criterion(y, p)) continue;
            ++found;
            const auto v = padic_point_search(HomogeneousForm::diagonal(y, 3), p);
            contradictions += v.status == Solubility::Soluble;
            unknowns += v.status == Solubility::Unknown;
        }
        tested += found;
        per_prime += (per_prime.empty() ? "p=" : ",") + std::to_string(p);
    }
    o.check(contradictions == 0 && unknowns == 0, std::to_string(tested) + " vectors (" + per_prime + "), " +
                                                      std::to_string(contradictions) + " soluble, " +
                                                      std::to_string(unknowns) + " unknown");
    return o;
}

Outcome moment_identity()
{
    Outcome o;
    const std::set<Place> S{Place::infinity()};
    int checks = 0, bad = 0;
    for (i64 B : {10, 20, 30}) {
        const auto res = scan(cubics(), B, S, threads());
        const auto tau = tau_histogram(res.tally, B);
        const Rational adjust(static_cast<i64>(tau.point_count), static_cast<i64>(res.tally.untainted_count()));
        for (int r = 1; r <= 3; ++r) {
            ++checks;
            bad += n_moments(res.tally, r) != tau_moment(tau, r) * adjust;
        }
        if (B == 30) o.note("B=30: N_1 = " + n_moments(res.tally, 1).str());
    }
    o.check(bad == 0, std::to_string(checks) + " exact comparisons (B = 10, 20, 30; r = 1..3), " + std::to_string(bad) +
                          " mismatches");
    return o;
}

Outcome delta_examples()
{
    Outcome o;
    const std::string dir = FIBSTAT_DATA_DIR "/actions/";
    const std::pair<const char*, Rational> cases[] = {
        {"trivial.txt", Rational(1)}, {"swap.txt", Rational(1, 2)}, {"double_fibre.txt", Rational(0)}};
    for (const auto& [file, want] : cases) {
        const auto acts = load_action_document(dir + file);
        const Rational d = delta(acts.front().action);
        o.check(acts.size() == 1 && d == want, std::string(file) + " -> " + d.str());
    }
    std::vector<ComponentAction> conic;
    for (const auto& a : load_action_document(dir + "conic.txt")) conic.push_back(a.action);
    const Rational total = delta_total(conic);
    o.check(total == Rational(3, 2) && total == conics().Delta(), "conic Delta = " + total.str());
    return o;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct EkacRun {
    std::vector<std::string> bodies;
    std::vector<std::string> files;  // written CSV tables, manifest excluded
};

EkacRun ekac_run(const char* threads_value, const std::filesystem::path& dir)
{
    EkacRun out;
    fs_config* c = nullptr;
    if (fs_config_new("ekac", &c) != FS_OK) return out;
    const char* kv[][2] = {{"B", "1000"}, {"samples", "200000"}, {"seed", "42"}, {"r_max", "6"},
                           {"threads", threads_value}};
    for (const auto& p : kv) fs_config_set(c, p[0], p[1]);
    fs_result* r = nullptr;
    if (fs_run(c, &r) == FS_OK) {
        for (std::size_t i = 0; i < fs_result_table_count(r); ++i) out.bodies.push_back(fs_result_table_csv(r, i));
        const auto prefix = dir / (std::string("t") + threads_value);
        if (fs_result_write(r, prefix.string().c_str(), "csv", nullptr) == FS_OK) {
            for (std::size_t i = 0; i < fs_result_table_count(r); ++i) {
                out.files.push_back(slurp(prefix.string() + "." + fs_result_table_name(r, i) + ".csv"));
            }
        }
        fs_result_free(r);
    }
    fs_config_free(c);
    return out;
}

Outcome determinism()
{
    Outcome o;
    const auto dir = std::filesystem::temp_directory_path() / "fibstat_acceptance_determinism";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto a = ekac_run("1", dir);
    const auto b = ekac_run("2", dir);
    const auto c = ekac_run("4", dir);
    o.check(!a.bodies.empty() && a.files.size() == a.bodies.size(),
            std::to_string(a.bodies.size()) + " CSV tables per run");
    o.check(a.bodies == b.bodies && a.bodies == c.bodies, "threads 1, 2, 4 give byte-identical tables");
    o.check(a.files == b.files && a.files == c.files && a.files == a.bodies, "written files identical");
    std::filesystem::remove_all(dir);
    return o;
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"point count asymptotic", point_count},
    {"congruence counting", congruence_counts},
    {"Hilbert reciprocity", reciprocity},
    {"conic omega formula vs engine", formula_vs_engine},
    {"parity law", parity},
    {"sigma_p dual computation", sigma_dual},
    {"sigma partial-sum slope", sigma_slope},
    {"Erdos-Kac trend", erdos_kac},
    {"baseline omega(m)", baseline},
    {"Delta = 0 limit law", tau_law},
    {"cubic criterion soundness", cubic_soundness},
    {"moment identity", moment_identity},
    {"delta calculator", delta_examples},
    {"determinism", determinism},
};

bool run_one(std::size_t i)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = kCriteria[i].second();
    } catch (const std::exception& e) {
        o.check(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %2zu %s  %s: %s (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", kCriteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    return o.pass;
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
        const long n = std::strtol(argv[2], nullptr, 10);
        if (n < 1 || n > static_cast<long>(kCriteria.size())) {
            std::fprintf(stderr, "criterion must be 1..%zu\n", kCriteria.size());
            return 2;
        }
        return run_one(static_cast<std::size_t>(n - 1)) ? 0 : 1;
    }
    if (argc != 1) {
        std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
        return 2;
    }
    int failed = 0;
    for (std::size_t i = 0; i < kCriteria.size(); ++i) failed += !run_one(i);
    std::printf("%zu criteria, %d failed\n", kCriteria.size(), failed);
    return failed ? 1 : 0;
}
