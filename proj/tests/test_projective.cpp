#include "doctest.h"

#include <numeric>
#include <set>

#include "fibstat/projective.hpp"

using namespace fibstat;

namespace {

// Naive oracle: every vector in the box, gcd filter, first nonzero positive.
std::set<std::vector<i64>> naive_points(int n, i64 B)
{
    std::set<std::vector<i64>> out;
    std::vector<i64> v(n + 1, -B);
    for (;;) {
        u64 g = 0;
        for (i64 c : v) g = std::gcd(g, static_cast<u64>(std::abs(c)));
        i64 first = 0;
        for (i64 c : v) {
            if (c != 0) {
                first = c;
                break;
            }
        }
        if (g == 1 && first > 0) out.insert(v);
        int i = n;
        while (i >= 0 && v[i] == B) v[i--] = -B;
        if (i < 0) break;
        ++v[i];
    }
    return out;
}

u64 naive_proj_size(int n, u64 Q)
{
    // Count primitive vectors mod Q, divide by the number of units.
    std::vector<u64> primes;
    for (u64 p = 2; p <= Q; ++p) {
        if (Q % p == 0 && is_prime(p)) primes.push_back(p);
    }
    u64 units = 0;
    for (u64 u = 0; u < Q; ++u) units += std::gcd(u, Q) == 1;
    u64 vectors = 0;
    std::vector<u64> v(n + 1, 0);
    for (;;) {
        bool ok = true;
        for (u64 p : primes) {
            bool unit = false;
            for (u64 c : v) unit = unit || c % p != 0;
            ok = ok && unit;
        }
        vectors += ok;
        int i = n;
        while (i >= 0 && v[i] == Q - 1) v[i--] = 0;
        if (i < 0) break;
        ++v[i];
    }
    return vectors / units;
}

}  // namespace

TEST_CASE("canonical representatives")
{
    auto x = ProjPoint::canonical({-2, 4, -6});
    CHECK(std::vector<i64>(x.coords().begin(), x.coords().end()) == std::vector<i64>{1, -2, 3});
    CHECK(x.height() == 3);
    auto y = ProjPoint::canonical({0, -5, 10});
    CHECK(std::vector<i64>(y.coords().begin(), y.coords().end()) == std::vector<i64>{0, 1, -2});
    CHECK_THROWS_AS(ProjPoint::canonical({0, 0, 0}), Error);
}

TEST_CASE("small enumerations")
{
    auto pts = enumerate_points(1, 1);
    CHECK(pts.size() == 4);
    CHECK(enumerate_points(1, 3).size() == 16);
    CHECK(naive_points(1, 1).size() == 4);
    CHECK(naive_points(1, 3).size() == 16);
}

TEST_CASE("enumeration matches the naive oracle and has no duplicates")
{
    for (int n : {1, 2, 3}) {
        for (i64 B : {1, 2, 5}) {
            auto oracle = naive_points(n, B);
            auto pts = enumerate_points(n, B);
            std::set<std::vector<i64>> got;
            for (const auto& p : pts) {
                got.insert(std::vector<i64>(p.coords().begin(), p.coords().end()));
                CHECK(p.height() <= B);
            }
            CHECK(got.size() == pts.size());
            CHECK(got == oracle);

            std::set<std::vector<i64>> streamed;
            PointEnumerator it(n, B);
            while (auto p = it.next()) streamed.insert(std::vector<i64>(p->coords().begin(), p->coords().end()));
            CHECK(streamed == oracle);
            CHECK(count_points(n, B) == oracle.size());
        }
    }
}

TEST_CASE("count_points agrees with enumeration at moderate bounds")
{
    CHECK(count_points(2, 30, 3) == enumerate_points(2, 30).size());
    CHECK(count_points(3, 9, 2) == enumerate_points(3, 9).size());
    CHECK(count_points(1, 200) == enumerate_points(1, 200).size());
}

TEST_CASE("reduce_point")
{
    CHECK(reduce_point(ProjPoint::canonical({1, 1, 21}), 3) == ResidueClass(3, std::vector<u64>{1, 1, 0}));
    CHECK(reduce_point(ProjPoint::canonical({2, 1, 1}), 4) == ResidueClass(4, std::vector<u64>{2, 1, 1}));
    CHECK(reduce_point(ProjPoint::canonical({0, 5, 7}), 25) == ResidueClass(25, std::vector<u64>{0, 5, 7}));
    // unit scaling
    CHECK(ResidueClass(7, std::vector<u64>{2, 3, 4}) == ResidueClass(7, std::vector<u64>{4, 6, 1}));
    CHECK_FALSE(ResidueClass(7, std::vector<u64>{1, 3, 4}) == ResidueClass(7, std::vector<u64>{1, 4, 3}));
    CHECK_THROWS_AS(ResidueClass(9, std::vector<u64>{3, 6, 0}), Error);
}

TEST_CASE("proj_size")
{
    CHECK(proj_size(2, 5) == 31);
    CHECK(proj_size(2, 4) == 28);
    CHECK(proj_size(1, 6) == 12);
    for (int n = 1; n <= 3; ++n) {
        for (u64 Q = 1; Q <= 12; ++Q) CHECK(proj_size(n, Q) == naive_proj_size(n, Q));
    }
    CHECK_THROWS_AS(proj_size(4, 1'000'000'007ULL), Error);
}

TEST_CASE("proj_size multiplicativity and sandwich")
{
    for (int n = 1; n <= 4; ++n) {
        for (u64 a = 1; a <= 60; ++a) {
            for (u64 b = 1; b <= 60; ++b) {
                if (std::gcd(a, b) == 1) CHECK(proj_size(n, a * b) == proj_size(n, a) * proj_size(n, b));
            }
        }
        for (u64 Q = 1; Q <= 10000; ++Q) {
            const double qn = std::pow(static_cast<double>(Q), n);
            const double s = static_cast<double>(proj_size(n, Q));
            const double bound = std::ldexp(qn, static_cast<int>(prime_divisors(static_cast<i64>(std::max<u64>(Q, 2))).size() * (Q > 1)));
            REQUIRE(s >= qn);
            REQUIRE(s <= bound);
        }
    }
}

TEST_CASE("zeta and the point constant")
{
    CHECK(zeta(2.0) == doctest::Approx(M_PI * M_PI / 6).epsilon(1e-13));
    CHECK(zeta(3.0) == doctest::Approx(1.2020569031595942).epsilon(1e-13));
    CHECK(zeta(4.0) == doctest::Approx(std::pow(M_PI, 4) / 90).epsilon(1e-13));
    CHECK(point_constant(2) == doctest::Approx(3.3277).epsilon(1e-4));
    CHECK(point_constant(1) == doctest::Approx(12 / (M_PI * M_PI)).epsilon(1e-12));
}

TEST_CASE("count_congruence examples")
{
    auto all = count_congruence(1, 1000, 1, [](const ResidueClass&) { return true; });
    CHECK(all.count == count_points(1, 1000));
    CHECK(all.relative_error < 0.01);

    // P^2(F_3) points with x0 = 0: listed directly
    int listed = 0;
    {
        std::set<std::vector<u64>> seen;
        for (u64 a = 0; a < 3; ++a)
            for (u64 b = 0; b < 3; ++b)
                if (a || b) {
                    ResidueClass rc(3, std::vector<u64>{0, a, b});
                    seen.insert(std::vector<u64>(rc.coords().begin(), rc.coords().end()));
                }
        listed = static_cast<int>(seen.size());
    }
    CHECK(listed == 4);
    auto zero = count_congruence(2, 500, 3, [](const ResidueClass& r) { return r[0] == 0; }, 4);
    CHECK(zero.main_term == doctest::Approx(point_constant(2) * 4.0 / 13.0 * 500.0 * 500.0 * 500.0));
    CHECK(zero.relative_error < 0.05);

    auto none = count_congruence(2, 500, 35, [](const ResidueClass&) { return false; }, 4);
    CHECK(none.count == 0);
    CHECK(none.main_term == 0.0);
    CHECK(none.relative_error == 0.0);
    CHECK(relative_error(3, 0.0) == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(count_congruence(2, 1, 3, [](const ResidueClass&) { return true; }), Error);
    CHECK_THROWS_AS(count_congruence(2, 10, 12, [](const ResidueClass&) { return true; }), Error);
}

TEST_CASE("class counts match per-point reduction")
{
    for (u64 Q : {2ULL, 5ULL, 6ULL, 7ULL}) {
        ClassCounts cc(2, 25, Q, 3);
        std::vector<u64> naive(cc.class_count(), 0);
        for (const auto& x : enumerate_points(2, 25)) {
            const auto rc = reduce_point(x, Q);
            for (std::size_t i = 0; i < cc.class_count(); ++i) {
                if (cc.residue_class(i) == rc) {
                    ++naive[i];
                    break;
                }
            }
        }
        for (std::size_t i = 0; i < cc.class_count(); ++i) CHECK(cc.count(i) == naive[i]);
    }
}

TEST_CASE("partition identity over single-class predicates")
{
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
        for (i64 B : {37, 200}) {
            ClassCounts cc(2, B, p, 4);
            const u64 total = count_points(2, B, 4);
            u64 sum = 0;
            for (std::size_t i = 0; i < cc.class_count(); ++i) {
                const auto& target = cc.residue_class(i);
                sum += cc.select([&](const ResidueClass& r) { return r == target; }).count;
            }
            CHECK(sum == total);
            CHECK(cc.total() == total);
        }
    }
}

TEST_CASE("thread count does not change class counts")
{
    ClassCounts a(2, 120, 7, 1), b(2, 120, 7, 4);
    for (std::size_t i = 0; i < a.class_count(); ++i) CHECK(a.count(i) == b.count(i));
}

TEST_CASE("equidistribution trend for a single class")
{
    const ResidueClass target(5, std::vector<u64>{1, 2, 3});
    std::vector<double> errors;
    for (i64 B : {250, 500, 1000, 2000}) {
        errors.push_back(count_congruence(2, B, 5, [&](const ResidueClass& r) { return r == target; }, 4).relative_error);
    }
    int violations = 0;
    for (std::size_t i = 1; i < errors.size(); ++i) violations += errors[i] >= errors[i - 1];
    CHECK(violations <= 1);
}
