#include "fibstat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "fibstat/parallel.hpp"
#include "fibstat/random.hpp"

namespace fibstat {

void OmegaTally::merge(OmegaTally&& o)
{
    points_ += o.points_;
    singular_ += o.singular_;
    tainted_ += o.tainted_;
    if (cells_.empty()) {
        cells_ = std::move(o.cells_);
        return;
    }
    for (const auto& [k, c] : o.cells_) cells_[k] += c;
}

std::vector<u64> OmegaTally::omega_counts() const
{
    std::vector<u64> out;
    for (const auto& [k, c] : cells_) {
        if (static_cast<std::size_t>(k.first) >= out.size()) out.resize(k.first + 1, 0);
        out[k.first] += c;
    }
    return out;
}

namespace {

struct ScanAcc {
    OmegaTally tally;
    std::vector<ObstructionRecord> records;
    void merge(ScanAcc&& o)
    {
        tally.merge(std::move(o.tally));
        if (records.empty()) {
            records = std::move(o.records);
        } else {
            records.insert(records.end(), std::make_move_iterator(o.records.begin()),
                           std::make_move_iterator(o.records.end()));
        }
    }
};

constexpr u64 kFactorTableLimit = 50'000'000;

std::unique_ptr<FactorTable> make_table(i64 B)
{
    if (static_cast<u64>(B) > kFactorTableLimit) return nullptr;
    return std::make_unique<FactorTable>(static_cast<u64>(std::max<i64>(B, 2)));
}

void record_point(const FamilyDescriptor& family, std::span<const i64> c, const std::set<Place>& S,
                  const FactorTable* table, bool keep, ScanAcc& acc)
{
    for (i64 v : c) {
        if (v == 0) {
            acc.tally.add_singular();
            return;
        }
    }
    ObstructionRecord rec = omega_pi(family, ProjPoint::canonical(c), S, table);
    if (rec.tainted) {
        acc.tally.add_tainted();
    } else {
        acc.tally.add(rec.omega, rec.point.height());
    }
    if (keep) acc.records.push_back(std::move(rec));
}

}  // namespace

ScanResult scan(const FamilyDescriptor& family, i64 B, const std::set<Place>& S, unsigned threads, bool keep_records)
{
    require(B >= 3, "scan: need B >= 3");
    const auto table = make_table(B);
    auto work = [&](std::size_t slab, ScanAcc& acc) {
        for_each_point_in_slab(family.n(), B, static_cast<i64>(slab), [&](std::span<const i64> c, i64) {
            record_point(family, c, S, table.get(), keep_records, acc);
        });
    };
    ScanAcc total = parallel_slabs<ScanAcc>(static_cast<std::size_t>(B) + 1, threads, [] { return ScanAcc{}; }, work);
    return {std::move(total.tally), std::move(total.records)};
}

ScanResult sample_scan(const FamilyDescriptor& family, i64 B, const std::set<Place>& S, u64 samples, u64 seed,
                       unsigned threads, bool keep_records)
{
    require(B >= 3, "sample_scan: need B >= 3");
    require(samples >= 1, "sample_scan: need at least one sample");
    require(B <= (i64(1) << 31), "sample_scan: B above 2^31");
    constexpr u64 kChunk = 4096;
    const u64 chunks = (samples + kChunk - 1) / kChunk;
    const auto table = make_table(B);
    const int dim = family.n() + 1;
    auto work = [&](std::size_t chunk, ScanAcc& acc) {
        std::mt19937_64 rng(chunk_seed(seed, chunk));
        const u64 quota = std::min<u64>(kChunk, samples - chunk * kChunk);
        std::vector<i64> v(static_cast<std::size_t>(dim));
        for (u64 s = 0; s < quota;) {
            u64 g = 0;
            for (auto& c : v) {
                c = static_cast<i64>(uniform_below(rng, static_cast<u64>(2 * B + 1))) - B;
                g = gcd(g, static_cast<u64>(c < 0 ? -c : c));
            }
            if (g != 1) continue;
            ++s;
            record_point(family, v, S, table.get(), keep_records, acc);
        }
    };
    ScanAcc total = parallel_slabs<ScanAcc>(static_cast<std::size_t>(chunks), threads, [] { return ScanAcc{}; }, work);
    return {std::move(total.tally), std::move(total.records)};
}

std::string to_string(Centering c)
{
    return c == Centering::Paper ? "paper" : "empirical";
}

Centering parse_centering(const std::string& text)
{
    if (text == "paper") return Centering::Paper;
    if (text == "empirical") return Centering::Empirical;
    fail(Error::Kind::Precondition, "unknown centering '" + text + "' (paper|empirical)");
}

double normal_moment(int r)
{
    require(r >= 0, "moment order must be non-negative");
    if (r % 2) return 0.0;
    double m = 1.0;
    for (int k = r - 1; k > 0; k -= 2) m *= k;  // (r-1)!!
    return m;
}

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double centre_at(double H, const Rational& Delta, Centering centering, const SigmaTable* sigma)
{
    if (centering == Centering::Paper) return Delta.to_double() * std::log(std::log(H));
    require(sigma != nullptr, "empirical centering needs a sigma table");
    return sigma->partial_sum(H);
}

MomentReport moments(const OmegaTally& tally, i64 B, const Rational& Delta, int r, Centering centering,
                     const SigmaTable* sigma)
{
    require(Delta > Rational(0), "moments: Delta = 0 (use tau_histogram)");
    require(r >= 0, "moments: r must be non-negative");
    require(B >= 3, "moments: need B >= 3");
    MomentReport rep;
    rep.B = B;
    rep.r = r;
    rep.centering = centering;
    rep.mu_reference = normal_moment(r);
    rep.mean = centre_at(static_cast<double>(B), Delta, centering, sigma);
    rep.scale = std::sqrt(Delta.to_double() * std::log(std::log(static_cast<double>(B))));
    long double sum = 0;
    for (const auto& [key, c] : tally.cells()) {
        if (key.second < 3) continue;
        rep.count += c;
        sum += static_cast<long double>(c) * std::pow(static_cast<long double>((key.first - rep.mean) / rep.scale), r);
    }
    require(rep.count > 0, "moments: no records with H >= 3");
    rep.value = r == 0 ? 1.0 : static_cast<double>(sum / static_cast<long double>(rep.count));
    return rep;
}

namespace {

double ks_weighted(std::vector<std::pair<double, u64>> values)
{
    std::sort(values.begin(), values.end());
    u64 total = 0;
    for (const auto& v : values) total += v.second;
    require(total > 0, "KS statistic of an empty sample");
    double d = 0.0;
    u64 below = 0;
    for (std::size_t i = 0; i < values.size();) {
        const double z = values[i].first;
        u64 here = 0;
        while (i < values.size() && values[i].first == z) here += values[i++].second;
        const double phi = normal_cdf(z);
        const double f_before = static_cast<double>(below) / static_cast<double>(total);
        below += here;
        const double f_at = static_cast<double>(below) / static_cast<double>(total);
        d = std::max({d, std::abs(f_at - phi), std::abs(f_before - phi)});
    }
    return d;
}

template <class F>
void for_each_standardized(const OmegaTally& tally, const Rational& Delta, Centering centering, const SigmaTable* sigma,
                           F&& f)
{
    require(Delta > Rational(0), "standardization needs Delta > 0");
    const double delta = Delta.to_double();
    i64 lastH = -1;
    double centre = 0, scale = 1;
    for (const auto& [key, c] : tally.cells()) {
        const i64 H = key.second;
        if (H < 3) continue;
        if (H != lastH) {
            centre = centre_at(static_cast<double>(H), Delta, centering, sigma);
            scale = std::sqrt(delta * std::log(std::log(static_cast<double>(H))));
            lastH = H;
        }
        f((key.first - centre) / scale, c);
    }
}

}  // namespace

double ks_statistic(std::vector<double> values)
{
    std::vector<std::pair<double, u64>> w;
    w.reserve(values.size());
    for (double v : values) w.emplace_back(v, 1);
    return ks_weighted(std::move(w));
}

double gaussian_distance(const OmegaTally& tally, const Rational& Delta, Centering centering, const SigmaTable* sigma)
{
    std::vector<std::pair<double, u64>> values;
    u64 n = 0;
    for_each_standardized(tally, Delta, centering, sigma, [&](double z, u64 c) {
        values.emplace_back(z, c);
        n += c;
    });
    require(n >= 100, "gaussian_distance: fewer than 100 records");
    return ks_weighted(std::move(values));
}

StandardizedHistogram standardized_histogram(const OmegaTally& tally, const Rational& Delta, Centering centering,
                                             const SigmaTable* sigma)
{
    StandardizedHistogram h;
    const double width = (StandardizedHistogram::kHi - StandardizedHistogram::kLo) / StandardizedHistogram::kBins;
    for_each_standardized(tally, Delta, centering, sigma, [&](double z, u64 c) {
        if (z < StandardizedHistogram::kLo) {
            h.underflow += c;
        } else if (z > StandardizedHistogram::kHi) {
            h.overflow += c;
        } else {
            const int bin = std::min(StandardizedHistogram::kBins - 1,
                                     static_cast<int>((z - StandardizedHistogram::kLo) / width));
            h.counts[bin] += c;
        }
    });
    return h;
}

TruncationWindow TruncationWindow::from_growth(int r, i64 B, int n)
{
    require(r >= 1 && n >= 1, "truncation window: need r >= 1 and n >= 1");
    require(B >= 16, "truncation window: need B >= 16");
    const double ll = std::log(std::log(static_cast<double>(B)));
    return explicit_window(r, std::pow(ll, 2.0 * r), std::pow(static_cast<double>(B), 1.0 / (5.0 * r * (n + 1))), B);
}

TruncationWindow TruncationWindow::explicit_window(int r, double t0, double t1, i64 B)
{
    require(r >= 0, "truncation window: r must be non-negative");
    if (!(1.0 < t0 && t0 < t1 && t1 < static_cast<double>(B))) {
        fail(Error::Kind::Precondition, "truncation window needs 1 < t0 < t1 < B (t0 = " + std::to_string(t0) +
                                            ", t1 = " + std::to_string(t1) + ", B = " + std::to_string(B) + ")");
    }
    return {r, t0, t1};
}

double truncated_omega(const ObstructionRecord& record, const TruncationWindow& window, const SigmaTable& sigma)
{
    double total = 0.0;
    const u64 lo = static_cast<u64>(std::floor(window.t0)) + 1;
    const u64 hi = static_cast<u64>(std::floor(window.t1));
    for (u64 p : primes_up_to(hi)) {
        if (p < lo) continue;
        require(sigma.contains(p), "truncated_omega: no sigma_p for p = " + std::to_string(p));
        total -= sigma.sigma(p);
    }
    for (const auto& v : record.insoluble_places) {
        if (v.is_infinite()) continue;
        const double p = static_cast<double>(v.prime_value());
        if (window.t0 < p && p <= window.t1) total += 1.0;
    }
    return total;
}

MomentReport truncated_moments(const std::vector<ObstructionRecord>& records, i64 B, const Rational& Delta,
                               const TruncationWindow& window, const SigmaTable& sigma, int r)
{
    require(Delta > Rational(0), "truncated_moments: Delta = 0");
    require(r >= 0, "truncated_moments: r must be non-negative");
    MomentReport rep;
    rep.B = B;
    rep.r = r;
    rep.centering = Centering::Empirical;
    rep.mu_reference = normal_moment(r);
    rep.scale = std::sqrt(Delta.to_double() * std::log(std::log(static_cast<double>(B))));
    // the sigma sum over the window is the same for every record
    ObstructionRecord empty{ProjPoint::canonical({1, 1}), {}, {}, 0, false};
    rep.mean = -truncated_omega(empty, window, sigma);
    long double sum = 0;
    for (const auto& rec : records) {
        if (rec.tainted || rec.point.height() < 3) continue;
        ++rep.count;
        sum += std::pow(static_cast<long double>(truncated_omega(rec, window, sigma) / rep.scale), r);
    }
    require(rep.count > 0, "truncated_moments: no records with H >= 3");
    rep.value = r == 0 ? 1.0 : static_cast<double>(sum / static_cast<long double>(rep.count));
    return rep;
}

Rational TauHistogram::untainted_smooth_fraction() const
{
    return Rational(static_cast<i64>(point_count - singular_count - tainted_count), static_cast<i64>(point_count));
}

namespace {

TauHistogram finish_tau(std::vector<u64> counts, u64 points, u64 singular, u64 tainted, i64 B)
{
    require(points > 0, "tau_histogram: no points");
    TauHistogram t;
    t.B = B;
    t.point_count = points;
    t.singular_count = singular;
    t.tainted_count = tainted;
    t.counts = std::move(counts);
    for (u64 c : t.counts) t.masses.emplace_back(static_cast<i64>(c), static_cast<i64>(points));
    u64 sum = singular + tainted;
    for (u64 c : t.counts) sum += c;
    if (sum != points) fail(Error::Kind::Invariant, "tau_histogram: partition identity violated");
    return t;
}

}  // namespace

TauHistogram tau_histogram(const OmegaTally& tally, i64 B)
{
    return finish_tau(tally.omega_counts(), tally.point_count(), tally.singular_count(), tally.tainted_count(), B);
}

TauHistogram tau_histogram(const std::vector<ObstructionRecord>& records, u64 point_count, u64 singular_count, i64 B)
{
    std::vector<u64> counts;
    u64 tainted = 0;
    for (const auto& r : records) {
        if (r.tainted) {
            ++tainted;
            continue;
        }
        if (static_cast<std::size_t>(r.omega) >= counts.size()) counts.resize(r.omega + 1, 0);
        ++counts[r.omega];
    }
    return finish_tau(std::move(counts), point_count, singular_count, tainted, B);
}

namespace {

i128 ipow(i64 b, int r)
{
    i128 v = 1;
    for (int i = 0; i < r; ++i) v *= b;
    return v;
}

Rational ratio(i128 num, u64 den)
{
    require(den > 0, "no untainted records");
    const i128 g = std::gcd(num < 0 ? -num : num, static_cast<i128>(den));
    const i128 n = num / (g ? g : 1), d = static_cast<i128>(den) / (g ? g : 1);
    if (n > INT64_MAX || d > INT64_MAX) fail(Error::Kind::Overflow, "moment numerator overflows 64 bits");
    return Rational(static_cast<i64>(n), static_cast<i64>(d));
}

}  // namespace

Rational n_moments(const OmegaTally& tally, int r)
{
    require(r >= 1, "n_moments: r must be positive");
    i128 sum = 0;
    for (const auto& [key, c] : tally.cells()) sum += ipow(key.first, r) * static_cast<i128>(c);
    return ratio(sum, tally.untainted_count());
}

Rational n_moments(const std::vector<ObstructionRecord>& records, int r)
{
    require(r >= 1, "n_moments: r must be positive");
    i128 sum = 0;
    u64 n = 0;
    for (const auto& rec : records) {
        if (rec.tainted) continue;
        sum += ipow(rec.omega, r);
        ++n;
    }
    return ratio(sum, n);
}

Rational tau_moment(const TauHistogram& tau, int r)
{
    Rational total(0);
    for (std::size_t j = 0; j < tau.masses.size(); ++j) {
        if (j == 0) continue;
        total += Rational(static_cast<i64>(ipow(static_cast<i64>(j), r))) * tau.masses[j];
    }
    return total;
}

SigmaFit sigma_partial_sums(const SigmaTable& sigma, const Rational& Delta, int grid_points)
{
    require(Delta > Rational(0), "sigma_partial_sums: Delta must be positive");
    require(sigma.entries().size() >= 25, "sigma_partial_sums: fewer than 25 primes");
    require(grid_points >= 4, "sigma_partial_sums: grid too small");
    const double top = static_cast<double>(sigma.coverage());
    require(top > 100.0, "sigma_partial_sums: table must extend past 100");
    const double delta = Delta.to_double();
    SigmaFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < grid_points; ++i) {
        const double x = 100.0 * std::pow(top / 100.0, static_cast<double>(i) / (grid_points - 1));
        SigmaFitPoint pt;
        pt.x = x;
        pt.partial_sum = sigma.partial_sum(std::min(x, top));
        pt.envelope = 1.0 / std::log(x);
        const double ll = std::log(std::log(x));
        fit.beta += pt.partial_sum - delta * ll;
        sx += ll;
        sy += pt.partial_sum;
        sxx += ll * ll;
        sxy += ll * pt.partial_sum;
        fit.grid.push_back(pt);
    }
    const double n = grid_points;
    fit.beta /= n;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i < grid_points; ++i) {
        auto& pt = fit.grid[i];
        const double ll = std::log(std::log(pt.x));
        pt.fitted = delta * ll + fit.beta;
        pt.residual = pt.partial_sum - pt.fitted;
        if (i >= grid_points / 2) {
            lo = std::min(lo, pt.partial_sum - delta * ll);
            hi = std::max(hi, pt.partial_sum - delta * ll);
        }
    }
    fit.beta_upper_spread = hi - lo;
    return fit;
}

std::string to_string(DensitySource d)
{
    return d == DensitySource::Haar ? "haar" : "empirical";
}

std::vector<LocalDensity> local_densities(const FamilyDescriptor& family, u64 cutoff, DensitySource source,
                                          u64 samples, int precision, u64 seed)
{
    require(cutoff >= 2, "local_densities: cutoff must be at least 2");
    std::vector<LocalDensity> out;
    for (u64 p : primes_up_to(cutoff)) {
        if (source == DensitySource::Haar) {
            out.push_back({p, insoluble_density(family, p), 0.0});
        } else {
            const auto est = sigma_empirical(family, p, samples, precision, chunk_seed(seed, p));
            if (est.unknown > 0) fail(Error::Kind::Taint, "local_densities: undecided disks at p = " + std::to_string(p));
            out.push_back({p, est.estimate, est.std_error});
        }
    }
    return out;
}

namespace {

// P(exactly j of the independent events occur), for j = 0..J.
std::vector<double> exact_counts(const std::vector<double>& probs, int J, std::size_t skip = SIZE_MAX)
{
    std::vector<double> dp(static_cast<std::size_t>(J) + 1, 0.0);
    dp[0] = 1.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (i == skip) continue;
        const double q = probs[i];
        for (int t = J; t >= 0; --t) dp[t] = dp[t] * (1 - q) + (t > 0 ? dp[t - 1] * q : 0.0);
    }
    return dp;
}

}  // namespace

TauPrediction tau_limit_prediction(const FamilyDescriptor& family, int j, const std::vector<LocalDensity>& densities)
{
    require(family.Delta() == Rational(0), "tau_limit_prediction: Delta > 0 (use moments)");
    require(j >= 0, "tau_limit_prediction: j must be non-negative");
    require(!densities.empty(), "tau_limit_prediction: no densities");
    std::vector<double> probs;
    u64 cutoff = 0;
    double K = 0.0;
    for (const auto& d : densities) {
        require(d.insoluble >= 0.0 && d.insoluble <= 1.0, "tau_limit_prediction: density outside [0, 1]");
        probs.push_back(d.insoluble);
        cutoff = std::max(cutoff, d.p);
        if (d.p > family.A()) K = std::max(K, d.insoluble * static_cast<double>(d.p) * static_cast<double>(d.p));
    }
    TauPrediction out;
    out.j = j;
    out.value = exact_counts(probs, j)[j];
    double var = 0.0;
    for (std::size_t i = 0; i < densities.size(); ++i) {
        if (densities[i].std_error == 0.0) continue;
        const auto others = exact_counts(probs, j, i);
        const double deriv = (j > 0 ? others[j - 1] : 0.0) - others[j];
        var += deriv * deriv * densities[i].std_error * densities[i].std_error;
    }
    out.std_error = std::sqrt(var);
    // primes above the cutoff: densities bounded by K / p^2
    constexpr u64 kTailLimit = 1'000'000;
    double tail = 0.0;
    for (u64 p : primes_up_to(kTailLimit)) {
        if (p > cutoff) tail += K / (static_cast<double>(p) * static_cast<double>(p));
    }
    out.tail_bound = tail + K / static_cast<double>(kTailLimit);
    return out;
}

BaselineRange baseline_omega(u64 N, Centering centering)
{
    require(N >= 100, "baseline_omega: need N >= 100");
    std::vector<std::uint8_t> omega(N + 1, 0);
    std::vector<double> recip_sum(N + 1, 0.0);  // sum_{p <= m} 1/p
    for (u64 p = 2; p <= N; ++p) {
        recip_sum[p] = recip_sum[p - 1];
        if (omega[p] != 0) continue;
        recip_sum[p] += 1.0 / static_cast<double>(p);
        for (u64 m = p; m <= N; m += p) ++omega[m];
    }
    const double llN = std::log(std::log(static_cast<double>(N)));
    const double centreN = centering == Centering::Paper ? llN : recip_sum[N];
    const double scaleN = std::sqrt(llN);
    BaselineRange out;
    out.N = N;
    long double s1 = 0, s2 = 0;
    std::vector<double> z;
    z.reserve(N - 2);
    for (u64 m = 3; m <= N; ++m) {
        const double w = (omega[m] - centreN) / scaleN;
        s1 += w;
        s2 += static_cast<long double>(w) * w;
        const double llm = std::log(std::log(static_cast<double>(m)));
        const double centre = centering == Centering::Paper ? llm : recip_sum[m];
        z.push_back((omega[m] - centre) / std::sqrt(llm));
    }
    out.count = N - 2;
    out.m1 = static_cast<double>(s1 / out.count);
    out.m2 = static_cast<double>(s2 / out.count);
    out.ks = ks_statistic(std::move(z));
    return out;
}

}  // namespace fibstat
