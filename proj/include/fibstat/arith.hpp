#pragma once

// Integer arithmetic shared by the enumeration, solubility and statistics
// layers: 128-bit modular products, primality, factorisation, prime sieves
// and a small exact rational type.

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fibstat {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

/// Error raised for rejected preconditions. `code` follows the CLI exit-code
/// contract (2 config / precondition, 3 taint ceiling, 4 internal invariant).
class Error : public std::runtime_error {
public:
    enum class Kind { Precondition = 2, Taint = 3, Invariant = 4, Overflow = 5, Io = 6 };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

[[noreturn]] void fail(Error::Kind kind, const std::string& what);
inline void require(bool cond, const std::string& what)
{
    if (!cond) fail(Error::Kind::Precondition, what);
}

constexpr u64 mulmod(u64 a, u64 b, u64 m)
{
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

constexpr u64 powmod(u64 base, u64 exp, u64 m)
{
    u64 result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

/// Least non-negative residue of a signed value.
constexpr u64 mod_floor(i64 a, u64 m)
{
    i128 r = static_cast<i128>(a) % static_cast<i128>(m);
    if (r < 0) r += m;
    return static_cast<u64>(r);
}

u64 gcd(u64 a, u64 b);
inline u64 gcd_abs(i64 a, i64 b) { return gcd(a < 0 ? -static_cast<u64>(a) : a, b < 0 ? -static_cast<u64>(b) : b); }
u64 inverse_mod(u64 a, u64 m);

/// Deterministic Miller-Rabin for the full 64-bit range.
bool is_prime(u64 n);

/// p-adic valuation of a nonzero integer; the unit part is returned through `unit`.
int valuation(i64 a, u64 p, i64* unit = nullptr);

struct PrimePower {
    u64 prime;
    int exponent;
};

/// Trial-division factorisation of |n|; n != 0.
std::vector<PrimePower> factor(i64 n);
std::vector<u64> prime_divisors(i64 n);

/// Smallest-prime-factor table up to `limit`, for fast repeated factoring.
class FactorTable {
public:
    explicit FactorTable(u64 limit);

    u64 limit() const noexcept { return spf_.size() - 1; }
    /// Distinct primes dividing |n|, ascending; |n| <= limit, n != 0.
    void prime_divisors(u64 n, std::vector<u64>& out) const;
    u64 smallest_factor(u64 n) const { return spf_[n]; }

private:
    std::vector<std::uint32_t> spf_;
};

std::vector<u64> primes_up_to(u64 limit);

/// Moebius function of a positive integer (trial division).
int moebius(u64 n);

/// Exact rational with a positive denominator, always reduced.
class Rational {
public:
    Rational() = default;
    Rational(i64 num) : num_(num), den_(1) {}  // NOLINT(google-explicit-constructor)
    Rational(i64 num, i64 den);

    i64 num() const noexcept { return num_; }
    i64 den() const noexcept { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    /// Parses "p/q" or "p".
    static Rational parse(const std::string& text);

private:
    static Rational from_wide(i128 num, i128 den);
    i64 num_ = 0;
    i64 den_ = 1;
};

}  // namespace fibstat
