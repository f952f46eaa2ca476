#include "fibstat/arith.hpp"

#include <cstdlib>
#include <numeric>
#include <tuple>

namespace fibstat {

void fail(Error::Kind kind, const std::string& what)
{
    throw Error(kind, what);
}

u64 gcd(u64 a, u64 b)
{
    return std::gcd(a, b);
}

u64 inverse_mod(u64 a, u64 m)
{
    i128 t = 0, new_t = 1;
    i128 r = m, new_r = a % m;
    while (new_r != 0) {
        i128 q = r / new_r;
        std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
        std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
    }
    require(r == 1, "inverse_mod: value is not invertible");
    if (t < 0) t += m;
    return static_cast<u64>(t);
}

bool is_prime(u64 n)
{
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

int valuation(i64 a, u64 p, i64* unit)
{
    require(a != 0, "valuation of zero");
    int v = 0;
    const i64 sp = static_cast<i64>(p);
    while (a % sp == 0) {
        a /= sp;
        ++v;
    }
    if (unit) *unit = a;
    return v;
}

std::vector<PrimePower> factor(i64 n)
{
    require(n != 0, "factor: zero has no factorisation");
    u64 m = n < 0 ? -static_cast<u64>(n) : static_cast<u64>(n);
    std::vector<PrimePower> out;
    for (u64 p = 2; p * p <= m; p += (p == 2 ? 1 : 2)) {
        if (m % p) continue;
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    if (m > 1) out.push_back({m, 1});
    return out;
}

std::vector<u64> prime_divisors(i64 n)
{
    std::vector<u64> out;
    for (const auto& pp : factor(n)) out.push_back(pp.prime);
    return out;
}

FactorTable::FactorTable(u64 limit) : spf_(limit + 1, 0)
{
    for (u64 i = 2; i <= limit; ++i) {
        if (spf_[i] != 0) continue;
        for (u64 j = i; j <= limit; j += i) {
            if (spf_[j] == 0) spf_[j] = static_cast<std::uint32_t>(i);
        }
    }
}

void FactorTable::prime_divisors(u64 n, std::vector<u64>& out) const
{
    while (n > 1) {
        const u64 p = spf_[n];
        out.push_back(p);
        while (n % p == 0) n /= p;
    }
}

std::vector<u64> primes_up_to(u64 limit)
{
    std::vector<u64> out;
    if (limit < 2) return out;
    std::vector<bool> composite(limit + 1, false);
    for (u64 i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        out.push_back(i);
        for (u64 j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return out;
}

int moebius(u64 n)
{
    require(n >= 1, "moebius: argument must be positive");
    int mu = 1;
    for (const auto& pp : factor(static_cast<i64>(n))) {
        if (pp.exponent > 1) return 0;
        mu = -mu;
    }
    return mu;
}

// Rational

Rational::Rational(i64 num, i64 den)
{
    require(den != 0, "rational with zero denominator");
    *this = from_wide(num, den);
}

Rational Rational::from_wide(i128 num, i128 den)
{
    require(den != 0, "rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 a = num < 0 ? -num : num, b = den;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    constexpr i128 lim = static_cast<i128>(INT64_MAX);
    if (num > lim || num < -lim || den > lim) fail(Error::Kind::Overflow, "rational overflow");
    Rational r;
    r.num_ = static_cast<i64>(num);
    r.den_ = static_cast<i64>(den);
    return r;
}

Rational operator+(const Rational& a, const Rational& b)
{
    return Rational::from_wide(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                               static_cast<i128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b)
{
    return Rational::from_wide(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
                               static_cast<i128>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b)
{
    return Rational::from_wide(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b)
{
    require(b.num_ != 0, "rational division by zero");
    return Rational::from_wide(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b)
{
    const i128 l = static_cast<i128>(a.num_) * b.den_;
    const i128 r = static_cast<i128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string Rational::str() const
{
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(const std::string& text)
{
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stoll(text));
        return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
    } catch (const std::logic_error&) {
        fail(Error::Kind::Precondition, "malformed rational '" + text + "'");
    }
}

}  // namespace fibstat
