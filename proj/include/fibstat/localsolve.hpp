#pragma once

// Local solubility over Q_p and R: residue symbols, Hilbert symbols, and a
// certified residue-tree search for primitive p-adic zeros of homogeneous
// forms.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fibstat/arith.hpp"

namespace fibstat {

/// A place of Q: a prime p or the real place.
class Place {
public:
    static Place infinity() { return Place(0); }
    /// Rejects non-primes.
    static Place prime(u64 p);
    /// "inf" or a decimal prime.
    static Place parse(const std::string& text);

    bool is_infinite() const noexcept { return p_ == 0; }
    u64 prime_value() const;
    std::string str() const;

    /// Primes ascending, the real place last.
    friend bool operator==(const Place&, const Place&) = default;
    friend bool operator<(const Place& a, const Place& b)
    {
        if (a.p_ == 0 || b.p_ == 0) return a.p_ != 0 && b.p_ == 0;
        return a.p_ < b.p_;
    }

private:
    explicit Place(u64 p) : p_(p) {}
    u64 p_;
};

/// Legendre symbol (a/p) for an odd prime p.
int legendre(i64 a, u64 p);

/// Hilbert symbol (a,b)_v of nonzero integers.
int hilbert(i64 a, i64 b, const Place& v);
/// Hilbert symbol of nonzero rationals, via bilinearity over numerators and denominators.
int hilbert(const Rational& a, const Rational& b, const Place& v);

/// Product of (a,b)_v over the real place, 2, and every odd prime dividing a
/// numerator or denominator equals +1.
bool hilbert_reciprocity_check(const Rational& a, const Rational& b);

/// Whether a x^2 + b y^2 = c z^2 has a nontrivial Q_v point (exact).
bool conic_soluble(i64 a, i64 b, i64 c, const Place& v);

/// Whether a is a k-th power modulo the prime p (p must not divide a).
bool is_kth_power_residue(i64 a, u64 p, u64 k);

struct Monomial {
    i64 coeff;
    std::vector<int> exponents;
};

/// Homogeneous integer form in a fixed number of variables.
class HomogeneousForm {
public:
    HomogeneousForm(int nvars, std::vector<Monomial> terms);
    /// sum_i coeffs[i] * x_i^degree
    static HomogeneousForm diagonal(std::span<const i64> coeffs, int degree);
    static HomogeneousForm diagonal(std::initializer_list<i64> coeffs, int degree)
    {
        return diagonal(std::span<const i64>(coeffs.begin(), coeffs.size()), degree);
    }

    int variables() const noexcept { return nvars_; }
    int degree() const noexcept { return degree_; }
    const std::vector<Monomial>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    u64 content() const;
    HomogeneousForm primitive_part() const;
    HomogeneousForm derivative(int var) const;

    /// F(x) mod m for residues x_i in [0, m).
    u64 eval_mod(std::span<const u64> x, u64 m) const;
    /// Exact F(x) when it fits in 128 bits (checked).
    std::optional<i128> eval_exact(std::span<const i64> x) const;

private:
    int nvars_;
    int degree_ = 0;
    std::vector<Monomial> terms_;
};

enum class Solubility { Soluble, Insoluble, Unknown };
std::string to_string(Solubility s);

/// Residue point x (a Z_p-vector with a unit coordinate) with
/// v_p(F(x)) > 2 v_p(dF/dx_i (x)); Hensel's lemma then gives a Q_p zero.
struct HenselCertificate {
    std::vector<u64> point;
    int variable = 0;
    int level = 0;
    int value_valuation = 0;       // capped at the working precision
    int derivative_valuation = 0;  // exact
};

struct SolubilityVerdict {
    Solubility status = Solubility::Unknown;
    std::optional<HenselCertificate> witness;
    int depth = 0;  // Soluble: level of the witness; Insoluble: level by which every branch died
    u64 nodes = 0;
    bool exact_symbol = false;  // decided by a closed-form symbol, not the tree
};

/// 2 * (sum of v_p of the coefficients) + 3.
int default_search_depth(const HomogeneousForm& form, u64 p);

inline constexpr u64 kDefaultNodeBudget = 50'000'000;

/// Depth-first search over primitive residue vectors mod p, p^2, ... A node
/// at level k survives iff F vanishes mod p^k. Soluble carries a Hensel
/// certificate, Insoluble means every branch died by `depth`, Unknown means
/// the depth bound, the working precision or the node budget was hit.
SolubilityVerdict padic_point_search(const HomogeneousForm& form, u64 p, int depth_bound,
                                     u64 node_budget = kDefaultNodeBudget);
SolubilityVerdict padic_point_search(const HomogeneousForm& form, u64 p);

/// Sufficient condition for y0 x0^3 + y1 x1^3 + y2 x2^3 + y3 x3^3 = 0 to have
/// no Q_p point: p = 1 mod 3, p does not divide y0 y1, p exactly divides y2
/// and y3, and neither -y1/y0 nor -y3/y2 is a cube mod p.
bool cubic_criterion(std::span<const i64> y, u64 p);

bool real_soluble_conic(i64 a, i64 b, i64 c);
/// Odd degree: always true.
bool real_soluble_diagonal_cubic(std::span<const i64> y);

}  // namespace fibstat
