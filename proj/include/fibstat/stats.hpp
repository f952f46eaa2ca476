#pragma once

// Statistics of omega_pi over points of bounded height: scans, standardized
// and truncated moments, the discrete law tau(j, B), sigma_p partial sums and
// the Euler-product prediction of tau(j).

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fibstat/families.hpp"

namespace fibstat {

/// Sufficient statistics of a scan: counts of untainted smooth records by
/// (omega, height), plus the singular and tainted counts.
class OmegaTally {
public:
    void add_singular() { ++points_, ++singular_; }
    void add_tainted() { ++points_, ++tainted_; }
    void add(int omega, i64 height)
    {
        ++points_;
        ++cells_[{omega, height}];
    }
    void merge(OmegaTally&& o);

    u64 point_count() const noexcept { return points_; }
    u64 singular_count() const noexcept { return singular_; }
    u64 tainted_count() const noexcept { return tainted_; }
    u64 untainted_count() const noexcept { return points_ - singular_ - tainted_; }
    /// (omega, height) -> count over untainted smooth records
    const std::map<std::pair<int, i64>, u64>& cells() const noexcept { return cells_; }
    /// counts by omega
    std::vector<u64> omega_counts() const;

private:
    u64 points_ = 0, singular_ = 0, tainted_ = 0;
    std::map<std::pair<int, i64>, u64> cells_;
};

struct ScanResult {
    OmegaTally tally;
    std::vector<ObstructionRecord> records;  // filled only on request
    double tainted_fraction() const
    {
        return tally.point_count() ? static_cast<double>(tally.tainted_count()) / static_cast<double>(tally.point_count())
                                   : 0.0;
    }
};

/// Every point of height <= B, in slabs of the first coordinate.
ScanResult scan(const FamilyDescriptor& family, i64 B, const std::set<Place>& S, unsigned threads = 1,
                bool keep_records = false);

/// `samples` points drawn uniformly from {H(x) <= B}: uniform vectors in
/// [-B, B]^{n+1}, non-primitive ones rejected, sign-normalised. Work is split
/// in fixed chunks with seeds derived from (seed, chunk), so the result does
/// not depend on the thread count.
ScanResult sample_scan(const FamilyDescriptor& family, i64 B, const std::set<Place>& S, u64 samples, u64 seed,
                       unsigned threads = 1, bool keep_records = false);

enum class Centering { Paper, Empirical };
std::string to_string(Centering c);
Centering parse_centering(const std::string& text);

/// r!/(2^{r/2} (r/2)!) for even r, 0 for odd r.
double normal_moment(int r);
double normal_cdf(double z);

struct MomentReport {
    i64 B = 0;
    int r = 0;
    double value = 0.0;
    Centering centering = Centering::Paper;
    double mu_reference = 0.0;
    double mean = 0.0;   // centre used
    double scale = 0.0;  // sqrt(Delta log log B)
    u64 count = 0;       // records averaged over
};

/// M_r: average over untainted smooth records with H(x) >= 3 of
/// ((omega - mean) / sqrt(Delta log log B))^r; mean = Delta log log B (paper)
/// or sum_{p <= B} sigma_p (empirical, needs `sigma`).
MomentReport moments(const OmegaTally& tally, i64 B, const Rational& Delta, int r, Centering centering,
                     const SigmaTable* sigma = nullptr);

/// Centre and scale for a given height, per the chosen centering.
double centre_at(double H, const Rational& Delta, Centering centering, const SigmaTable* sigma);

/// Kolmogorov-Smirnov distance of the sample to the standard normal.
double ks_statistic(std::vector<double> values);

/// KS distance of (omega - centre(H)) / sqrt(Delta log log H(x)) over the
/// records with H >= 3. Needs at least 100 of them.
double gaussian_distance(const OmegaTally& tally, const Rational& Delta, Centering centering,
                         const SigmaTable* sigma = nullptr);

/// 41 equal bins over [-5, 5] of the per-point standardized values, plus
/// underflow and overflow counts.
struct StandardizedHistogram {
    static constexpr int kBins = 41;
    static constexpr double kLo = -5.0, kHi = 5.0;
    std::vector<u64> counts = std::vector<u64>(kBins, 0);
    u64 underflow = 0, overflow = 0;
};
StandardizedHistogram standardized_histogram(const OmegaTally& tally, const Rational& Delta, Centering centering,
                                             const SigmaTable* sigma = nullptr);

struct TruncationWindow {
    int r = 0;
    double t0 = 0.0, t1 = 0.0;

    /// t0 = (log log B)^{2r}, t1 = B^{1/(5 r (n+1))}; rejected unless 1 < t0 < t1 < B.
    static TruncationWindow from_growth(int r, i64 B, int n);
    static TruncationWindow explicit_window(int r, double t0, double t1, i64 B);
};

/// sum over primes t0 < p <= t1 of (theta_p(x) - sigma_p).
double truncated_omega(const ObstructionRecord& record, const TruncationWindow& window, const SigmaTable& sigma);

/// Average of truncated_omega^r / (Delta log log B)^{r/2} over the untainted
/// records with H >= 3.
MomentReport truncated_moments(const std::vector<ObstructionRecord>& records, i64 B, const Rational& Delta,
                               const TruncationWindow& window, const SigmaTable& sigma, int r);

struct TauHistogram {
    i64 B = 0;
    u64 point_count = 0, singular_count = 0, tainted_count = 0;
    std::vector<u64> counts;       // by j
    std::vector<Rational> masses;  // counts[j] / point_count
    Rational untainted_smooth_fraction() const;
};

TauHistogram tau_histogram(const OmegaTally& tally, i64 B);
TauHistogram tau_histogram(const std::vector<ObstructionRecord>& records, u64 point_count, u64 singular_count, i64 B);

/// N_r / #records: average of omega^r over untainted smooth records, exact.
Rational n_moments(const OmegaTally& tally, int r);
Rational n_moments(const std::vector<ObstructionRecord>& records, int r);
/// sum_j j^r tau(j, B), exact.
Rational tau_moment(const TauHistogram& tau, int r);

struct SigmaFitPoint {
    double x = 0.0, partial_sum = 0.0, fitted = 0.0, residual = 0.0, envelope = 0.0;
};

struct SigmaFit {
    double beta = 0.0;               // mean of S(x) - Delta log log x over the grid
    double beta_upper_spread = 0.0;  // max - min of that over the upper half of the grid
    double slope = 0.0;              // free least-squares slope of S(x) on log log x
    double intercept = 0.0;
    std::vector<SigmaFitPoint> grid;
};

/// Fits S(x) = sum_{p <= x} sigma_p ~ Delta log log x + beta over a log-spaced
/// grid of cutoffs from 100 to the largest prime in the table.
SigmaFit sigma_partial_sums(const SigmaTable& sigma, const Rational& Delta, int grid_points = 60);

enum class DensitySource { Haar, Empirical };
std::string to_string(DensitySource d);

struct LocalDensity {
    u64 p = 0;
    double insoluble = 0.0;
    double std_error = 0.0;
};

/// theta_p(insoluble) for every prime <= cutoff.
std::vector<LocalDensity> local_densities(const FamilyDescriptor& family, u64 cutoff, DensitySource source,
                                          u64 samples = 10000, int precision = 4, u64 seed = 1);

struct TauPrediction {
    int j = 0;
    double value = 0.0;
    double std_error = 0.0;   // delta method over the per-prime standard errors
    double tail_bound = 0.0;  // mass that primes above the cutoff could move
};

/// Truncated Euler-product law: sum over j-sets T of primes <= cutoff of
/// prod_{p in T} theta_p prod_{p not in T} (1 - theta_p).
TauPrediction tau_limit_prediction(const FamilyDescriptor& family, int j, const std::vector<LocalDensity>& densities);

struct BaselineRange {
    u64 N = 0;
    double m1 = 0.0, m2 = 0.0;  // standardized by sqrt(log log N)
    double ks = 0.0;            // per-m standardization by log log m
    u64 count = 0;
};

/// omega(m) = number of distinct prime factors, 3 <= m <= N, with sigma_p = 1/p
/// and Delta = 1.
BaselineRange baseline_omega(u64 N, Centering centering);

}  // namespace fibstat
