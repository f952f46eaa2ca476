#pragma once

// Rational points of P^n ordered by the naive height, their reductions
// modulo prime powers, and exact counting under congruence conditions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fibstat/arith.hpp"

namespace fibstat {

/// Primitive integer vector with its first nonzero coordinate positive.
/// Every point of P^n(Q) has exactly one such representative.
class ProjPoint {
public:
    /// Divides out the content and fixes the sign; rejects the zero vector.
    static ProjPoint canonical(std::span<const i64> coords);
    static ProjPoint canonical(std::initializer_list<i64> coords)
    {
        return canonical(std::span<const i64>(coords.begin(), coords.size()));
    }

    std::span<const i64> coords() const noexcept { return coords_; }
    i64 operator[](std::size_t i) const { return coords_[i]; }
    int dimension() const noexcept { return static_cast<int>(coords_.size()) - 1; }
    i64 height() const noexcept { return height_; }

    friend bool operator==(const ProjPoint&, const ProjPoint&) = default;
    friend auto operator<=>(const ProjPoint& a, const ProjPoint& b) { return a.coords_ <=> b.coords_; }

private:
    std::vector<i64> coords_;
    i64 height_ = 0;
};

/// A point of P^n(Z/mZ), stored in canonical form: modulo each prime power
/// dividing m the first unit coordinate is scaled to 1. Two classes compare
/// equal iff they differ by a unit scaling.
class ResidueClass {
public:
    /// Rejects vectors that vanish modulo some prime dividing `modulus`.
    ResidueClass(u64 modulus, std::span<const u64> coords);

    u64 modulus() const noexcept { return modulus_; }
    std::span<const u64> coords() const noexcept { return coords_; }
    u64 operator[](std::size_t i) const { return coords_[i]; }

    friend bool operator==(const ResidueClass&, const ResidueClass&) = default;

private:
    u64 modulus_;
    std::vector<u64> coords_;
};

ResidueClass reduce_point(const ProjPoint& x, u64 modulus);

/// #P^n(Z/QZ), multiplicative over prime powers. Throws Overflow past 64 bits.
u64 proj_size(int n, u64 modulus);

/// Riemann zeta at a real s > 1.
double zeta(double s);
/// Leading constant 2^n / zeta(n+1) of the point count #{H(x) <= B} ~ c_n B^{n+1}.
double point_constant(int n);

namespace detail {

template <class F>
void points_rec(std::vector<i64>& c, int i, i64 B, u64 g, bool leading, i64 h, F& f)
{
    const int last = static_cast<int>(c.size()) - 1;
    const i64 lo = leading ? 0 : -B;
    for (i64 v = lo; v <= B; ++v) {
        if (leading && v == 0 && i == last) continue;
        c[i] = v;
        const u64 g2 = gcd(g, static_cast<u64>(v < 0 ? -v : v));
        const i64 h2 = std::max(h, v < 0 ? -v : v);
        if (i == last) {
            if (g2 == 1) f(std::span<const i64>(c), h2);
        } else {
            points_rec(c, i + 1, B, g2, leading && v == 0, h2, f);
        }
    }
}

}  // namespace detail

/// Calls f(coords, height) for each canonical point whose first coordinate
/// equals `first` (0 <= first <= B). The slabs first = 0..B partition the
/// points of height <= B.
template <class F>
void for_each_point_in_slab(int n, i64 B, i64 first, F&& f)
{
    require(n >= 1 && B >= 1, "enumerate_points: need n >= 1 and B >= 1");
    std::vector<i64> c(static_cast<std::size_t>(n) + 1, 0);
    c[0] = first;
    detail::points_rec(c, 1, B, static_cast<u64>(first), first == 0, first, f);
}

template <class F>
void for_each_point(int n, i64 B, F&& f)
{
    for (i64 first = 0; first <= B; ++first) for_each_point_in_slab(n, B, first, f);
}

/// Pull-style stream over {x in P^n(Q) : H(x) <= B} in lexicographic order of
/// the canonical representatives. Holds O(n) state.
class PointEnumerator {
public:
    PointEnumerator(int n, i64 B);
    std::optional<ProjPoint> next();

private:
    bool advance();
    int n_;
    i64 B_;
    std::vector<i64> cur_;
    bool done_ = false;
    bool started_ = false;
};

std::vector<ProjPoint> enumerate_points(int n, i64 B);

/// #{x in P^n(Q) : H(x) <= B}, computed by enumerating the first n coordinates
/// and counting the last one by Moebius inversion over the prefix gcd.
u64 count_points(int n, i64 B, unsigned threads = 1);

struct CongruenceCount {
    u64 count = 0;
    double main_term = 0.0;
    double relative_error = 0.0;  // +inf when main_term == 0 < count
};

/// Point counts of height <= B per class of P^n(Z/QZ), Q squarefree.
class ClassCounts {
public:
    ClassCounts(int n, i64 B, u64 modulus, unsigned threads = 1);

    int n() const noexcept { return n_; }
    i64 bound() const noexcept { return B_; }
    u64 modulus() const noexcept { return Q_; }
    u64 total() const noexcept { return total_; }
    std::size_t class_count() const noexcept { return classes_.size(); }
    const ResidueClass& residue_class(std::size_t i) const { return classes_[i]; }
    u64 count(std::size_t i) const { return counts_[i]; }

    /// Main term c_n * (#classes selected / #P^n(Z/Q)) * B^{n+1}.
    CongruenceCount select(const std::function<bool(const ResidueClass&)>& predicate) const;

private:
    int n_;
    i64 B_;
    u64 Q_;
    u64 total_ = 0;
    std::vector<ResidueClass> classes_;
    std::vector<u64> counts_;
};

CongruenceCount count_congruence(int n, i64 B, u64 modulus,
                                 const std::function<bool(const ResidueClass&)>& predicate,
                                 unsigned threads = 1);

inline double relative_error(u64 count, double main_term)
{
    if (main_term == 0.0) return count == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(static_cast<double>(count) - main_term) / main_term;
}

}  // namespace fibstat
