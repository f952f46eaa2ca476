#pragma once

// Concrete fibrations over P^n: diagonal conics a x^2 + b y^2 = c z^2 over P^2
// and diagonal cubic surfaces y0 x0^3 + y1 x1^3 + y2 x2^3 + y3 x3^3 = 0 over P^3.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fibstat/arith.hpp"
#include "fibstat/grouptheory.hpp"
#include "fibstat/localsolve.hpp"
#include "fibstat/projective.hpp"

namespace fibstat {

enum class FamilyKind { DiagonalConics, DiagonalCubics };

class FamilyDescriptor {
public:
    static FamilyDescriptor diagonal_conics();
    static FamilyDescriptor diagonal_cubics();
    /// "diagonal-conics" / "diagonal-cubics" (underscores accepted).
    static FamilyDescriptor by_name(const std::string& name);
    static std::vector<std::string> names();

    FamilyKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    int n() const noexcept { return n_; }
    /// Discriminant form on the base: the product of the coordinates.
    const HomogeneousForm& f() const noexcept { return f_; }
    int degree_f() const noexcept { return f_.degree(); }
    u64 A() const noexcept { return A_; }
    const Rational& Delta() const noexcept { return delta_; }
    const std::vector<ComponentAction>& divisor_actions() const noexcept { return actions_; }

    /// p-adic search depth for tree-decided places; 0 means the engine default.
    int search_depth() const noexcept { return depth_; }
    FamilyDescriptor with_search_depth(int depth) const;

    bool smooth(const ProjPoint& x) const;
    /// Solubility of the fibre over x at v. Unknown is only possible where the
    /// decision uses the residue-tree search.
    Solubility fibre_solubility(const ProjPoint& x, const Place& v) const;
    /// theta_v(x): true iff the fibre has no Q_v point. Throws Invariant on Unknown.
    bool theta(const ProjPoint& x, const Place& v) const;

    /// Primes that can obstruct at x: p <= A and p | f(x), ascending.
    std::vector<u64> candidate_primes(const ProjPoint& x, const FactorTable* table = nullptr) const;

    /// Whether the fibre over a point of P^n(F_p) is non-split (conics, odd p).
    bool has_nonsplit_test() const noexcept { return kind_ == FamilyKind::DiagonalConics; }
    bool nonsplit_mod_p(std::span<const u64> residues, u64 p) const;

    /// Precision (in powers of p) of the unit part that fixes a coefficient's
    /// class: squares for conics, cubes for cubics.
    int class_precision(u64 p) const;

private:
    FamilyDescriptor(FamilyKind kind, std::string name, int n, HomogeneousForm f, u64 A, Rational delta,
                     std::vector<ComponentAction> actions);

    FamilyKind kind_;
    std::string name_;
    int n_;
    HomogeneousForm f_;
    u64 A_;
    Rational delta_;
    std::vector<ComponentAction> actions_;
    int depth_ = 0;
};

struct ObstructionRecord {
    ProjPoint point;
    std::vector<Place> insoluble_places;  // ascending, real place last
    std::vector<Place> unknown_places;    // non-empty iff tainted
    int omega = 0;
    bool tainted = false;
};

/// omega_{pi,S}(x): the candidate places outside S at which the fibre has no
/// local point. Candidates are p <= A, p | f(x) and the real place.
ObstructionRecord omega_pi(const FamilyDescriptor& family, const ProjPoint& x, const std::set<Place>& S,
                           const FactorTable* table = nullptr);

/// Closed-form omega for diagonal conics with pairwise coprime, squarefree
/// coefficients, each = 1 mod 4.
int omega_formula_conics(i64 a, i64 b, i64 c);

/// sigma_p = #non-split fibres over P^n(F_p) / #P^n(F_p), p > A. For diagonal
/// conics the count is 3 + 3(p-1)/2: the three double lines plus, on each
/// coordinate line, the (p-1)/2 conjugate line pairs.
Rational sigma_exact(const FamilyDescriptor& family, u64 p);
/// The same ratio by running nonsplit_mod_p over every point of P^n(F_p).
Rational sigma_by_classification(const FamilyDescriptor& family, u64 p);

struct SigmaEstimate {
    u64 p = 0;
    int precision = 0;
    u64 samples = 0;
    u64 insoluble = 0;
    u64 undetermined = 0;  // theta not constant on the sampled disk at this precision
    u64 unknown = 0;       // engine returned Unknown
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo density of residue disks mod p^precision on which the fibre is
/// insoluble at p. Only disks whose coordinates fix the relevant power class
/// are decided; the estimate is insoluble / decided.
SigmaEstimate sigma_empirical(const FamilyDescriptor& family, u64 p, u64 sample_size, int precision, u64 seed);

/// Haar measure of {x in P^n(Z_p) : fibre insoluble at p}, from the
/// distribution of coordinate power classes (valuation mod k, unit class).
double insoluble_density(const FamilyDescriptor& family, u64 p);

struct Calibration {
    u64 A = 1;
    std::vector<std::pair<ProjPoint, u64>> exceptions;  // (x, p): p does not divide f(x), theta true
    std::vector<std::pair<u64, std::string>> aborted;   // primes with Unknown verdicts
};

/// Largest prime p <= p_max with some x of height <= B_cal, p not dividing
/// f(x), and theta_p(x) true (1 if none).
Calibration calibrate_A(const FamilyDescriptor& family, u64 p_max, i64 B_cal, unsigned threads = 1);

struct SigmaEntry {
    u64 p = 0;
    std::optional<Rational> exact;
    double value = 0.0;
    double std_error = 0.0;
    u64 samples = 0;
};

/// sigma_p by prime, with cumulative sums.
class SigmaTable {
public:
    void add(SigmaEntry e);
    const std::map<u64, SigmaEntry>& entries() const noexcept { return entries_; }
    bool contains(u64 p) const { return entries_.count(p) > 0; }
    double sigma(u64 p) const;
    /// sum of sigma_p over p <= x; x must not exceed coverage().
    double partial_sum(double x) const;
    u64 max_prime() const { return entries_.empty() ? 0 : entries_.rbegin()->first; }
    /// Bound up to which every prime above the family's A has an entry.
    u64 coverage() const { return coverage_ ? coverage_ : max_prime(); }

    /// Exact table for a family with a non-split test, all primes in (A, p_max].
    static SigmaTable exact(const FamilyDescriptor& family, u64 p_max);

private:
    std::map<u64, SigmaEntry> entries_;
    u64 coverage_ = 0;
    mutable std::vector<std::pair<u64, double>> cumulative_;
};

}  // namespace fibstat
