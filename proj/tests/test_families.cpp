#include "doctest.h"

#include <numeric>
#include <random>

#include "fibstat/families.hpp"

using namespace fibstat;

namespace {

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

std::set<Place> inf_only() { return {Place::infinity()}; }

// Non-split over F_p iff there is no smooth F_p-point on a x^2 + b y^2 = c z^2.
bool nonsplit_by_points(u64 a, u64 b, u64 c, u64 p)
{
    const u64 mc = (p - c % p) % p;
    for (u64 x = 0; x < p; ++x)
        for (u64 y = 0; y < p; ++y)
            for (u64 z = 0; z < p; ++z) {
                if (!x && !y && !z) continue;
                if ((a * x * x + b * y * y + mc * z * z) % p) continue;
                if ((a * x) % p || (b * y) % p || (mc * z) % p) return false;
            }
    return true;
}

bool admissible(i64 v)
{
    return mod_floor(v, 4) == 1 && moebius(static_cast<u64>(std::abs(v))) != 0;
}

}  // namespace

TEST_CASE("descriptor fields")
{
    CHECK(conics().n() == 2);
    CHECK(conics().degree_f() == 3);
    CHECK(conics().Delta() == Rational(3, 2));
    CHECK(conics().A() == 2);
    CHECK(cubics().n() == 3);
    CHECK(cubics().degree_f() == 4);
    CHECK(cubics().Delta() == Rational(0));
    CHECK(FamilyDescriptor::by_name("diagonal_cubics").name() == "diagonal-cubics");
    CHECK_THROWS_AS(FamilyDescriptor::by_name("quartics"), Error);
}

TEST_CASE("declared Delta matches the divisor actions")
{
    CHECK(delta_total(conics().divisor_actions()) == conics().Delta());
    CHECK(delta_total(cubics().divisor_actions()) == cubics().Delta());
    for (const auto& [file, fam] : {std::pair{"conic.txt", &conics()}, std::pair{"cubics.txt", &cubics()}}) {
        std::vector<ComponentAction> acts;
        for (auto& na : load_action_document(std::string(FIBSTAT_DATA_DIR) + "/actions/" + file)) acts.push_back(na.action);
        CHECK(delta_total(acts) == fam->Delta());
    }
}

TEST_CASE("theta and smoothness examples")
{
    CHECK(conics().theta(ProjPoint::canonical({1, 1, 21}), Place::prime(3)));
    CHECK_FALSE(conics().smooth(ProjPoint::canonical({1, 0, 1})));
    CHECK(cubics().theta(ProjPoint::canonical({1, 2, 7, 14}), Place::prime(7)));
    for (u64 p : primes_up_to(60)) CHECK_FALSE(cubics().theta(ProjPoint::canonical({1, 1, 1, 1}), Place::prime(p)));
    CHECK_FALSE(cubics().theta(ProjPoint::canonical({1, 1, 1, 1}), Place::infinity()));
    CHECK_THROWS_AS(conics().theta(ProjPoint::canonical({1, 0, 1}), Place::prime(3)), Error);
}

TEST_CASE("omega examples")
{
    auto r = omega_pi(conics(), ProjPoint::canonical({1, 1, 21}), inf_only());
    CHECK(r.omega == 2);
    REQUIRE(r.insoluble_places.size() == 2);
    CHECK(r.insoluble_places[0] == Place::prime(3));
    CHECK(r.insoluble_places[1] == Place::prime(7));
    CHECK_FALSE(r.tainted);
    CHECK(omega_pi(conics(), ProjPoint::canonical({1, 1, 1}), inf_only()).omega == 0);
    auto all = omega_pi(conics(), ProjPoint::canonical({1, 1, 21}), {});
    CHECK(all.omega == 2);
    CHECK(all.omega % 2 == 0);
    auto neg = omega_pi(conics(), ProjPoint::canonical({1, 1, -1}), {});
    CHECK(neg.omega == 2);  // 2 and the real place
    CHECK(neg.insoluble_places.back() == Place::infinity());
    auto S = omega_pi(conics(), ProjPoint::canonical({1, 1, 21}), {Place::prime(3), Place::infinity()});
    CHECK(S.omega == 1);
}

TEST_CASE("omega formula examples")
{
    CHECK(omega_formula_conics(1, 1, 21) == 2);
    CHECK(omega_formula_conics(5, 1, 1) == 0);
    CHECK(omega_formula_conics(1, 1, 1) == 0);
    CHECK_THROWS_AS(omega_formula_conics(3, 1, 1), Error);
    CHECK_THROWS_AS(omega_formula_conics(9, 1, 1), Error);
    CHECK_THROWS_AS(omega_formula_conics(5, 5, 1), Error);
}

TEST_CASE("omega formula agrees with the local scan")
{
    std::vector<i64> vals;
    for (i64 v = -60; v <= 60; ++v) {
        if (v != 0 && admissible(v)) vals.push_back(v);
    }
    for (i64 a : vals)
        for (i64 b : vals)
            for (i64 c : vals) {
                if (gcd_abs(a, b) != 1 || gcd_abs(a, c) != 1 || gcd_abs(b, c) != 1) continue;
                const auto x = ProjPoint::canonical({a, b, c});
                REQUIRE(omega_formula_conics(a, b, c) == omega_pi(conics(), x, inf_only()).omega);
            }
}

TEST_CASE("parity of the full obstruction set")
{
    for_each_point(2, 40, [](std::span<const i64> c, i64) {
        if (c[0] == 0 || c[1] == 0 || c[2] == 0) return;
        REQUIRE(omega_pi(conics(), ProjPoint::canonical(c), {}).omega % 2 == 0);
    });
}

TEST_CASE("bad primes divide f or lie below A")
{
    for (const auto* fam : {&conics(), &cubics()}) {
        const i64 B = fam == &conics() ? 30 : 8;
        for_each_point(fam->n(), B, [&](std::span<const i64> c, i64) {
            for (i64 v : c) {
                if (v == 0) return;
            }
            const auto x = ProjPoint::canonical(c);
            for (u64 p : primes_up_to(40)) {
                if (!fam->theta(x, Place::prime(p))) continue;
                bool divides = false;
                for (i64 v : c) divides = divides || v % static_cast<i64>(p) == 0;
                REQUIRE((p <= fam->A() || divides));
            }
        });
    }
}

TEST_CASE("sigma for conics")
{
    CHECK(sigma_exact(conics(), 5) == Rational(9, 31));
    CHECK(sigma_by_classification(conics(), 3) == Rational(6, 13));
    for (u64 p : primes_up_to(97)) {
        if (p == 2) continue;
        const Rational s = sigma_exact(conics(), p);
        CHECK(s == sigma_by_classification(conics(), p));
        CHECK(s > Rational(0));
        CHECK(s <= Rational(3, static_cast<i64>(p)));
    }
    for (u64 p : {3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
        i64 count = 0;
        for (u64 lead = 0; lead < 3; ++lead) {
            for (u64 s = 0; s < p; ++s)
                for (u64 t = 0; t < p; ++t) {
                    std::vector<u64> v(3, 0);
                    v[lead] = 1;
                    if (lead == 0) {
                        v[1] = s;
                        v[2] = t;
                    } else if (lead == 1) {
                        if (t) continue;
                        v[2] = s;
                    } else if (s || t) {
                        continue;
                    }
                    const bool ns = nonsplit_by_points(v[0], v[1], v[2], p);
                    CHECK(ns == conics().nonsplit_mod_p(v, p));
                    count += ns;
                }
        }
        CHECK(Rational(count, static_cast<i64>(proj_size(2, p))) == sigma_exact(conics(), p));
    }
    CHECK_THROWS_AS(sigma_exact(cubics(), 7), Error);
    CHECK_THROWS_AS(sigma_exact(conics(), 2), Error);
}

TEST_CASE("sigma table")
{
    auto t = SigmaTable::exact(conics(), 100);
    CHECK(t.contains(3));
    CHECK_FALSE(t.contains(2));
    CHECK(t.max_prime() == 97);
    CHECK(t.partial_sum(5.0) == doctest::Approx(6.0 / 13 + 9.0 / 31));
    CHECK(t.partial_sum(2.0) == 0.0);
    CHECK_THROWS_AS(t.sigma(101), Error);
}

TEST_CASE("Haar densities bracket exact disk counts")
{
    // Conics at p = 3, residues mod 27: decided classes give a lower bound,
    // adding undecided mass an upper bound.
    const u64 p = 3, pk = 27;
    const int k = 3;
    double insol = 0, undecided = 0, total = 0;
    for (u64 a = 0; a < pk; ++a)
        for (u64 b = 0; b < pk; ++b)
            for (u64 c = 0; c < pk; ++c) {
                if (a % p == 0 && b % p == 0 && c % p == 0) continue;
                total += 1;
                bool det = true;
                for (u64 v : {a, b, c}) det = det && v != 0 && k - valuation(static_cast<i64>(v), p) >= 1;
                if (!det) {
                    undecided += 1;
                    continue;
                }
                const auto x = ProjPoint::canonical({static_cast<i64>(a), static_cast<i64>(b), static_cast<i64>(c)});
                insol += conics().theta(x, Place::prime(p));
            }
    const double haar = insoluble_density(conics(), p);
    CHECK(haar >= insol / total - 1e-12);
    CHECK(haar <= (insol + undecided) / total + 1e-12);
    CHECK(insoluble_density(cubics(), 5) == 0.0);
    CHECK(insoluble_density(cubics(), 2) == 0.0);
    CHECK(insoluble_density(cubics(), 7) > 0.0);
    for (u64 q : {7ULL, 13ULL, 19ULL, 31ULL, 37ULL}) CHECK(insoluble_density(cubics(), q) < 4.0 / static_cast<double>(q * q));
}

TEST_CASE("empirical sigma")
{
    auto est = sigma_empirical(conics(), 5, 10000, 3, 42);
    CHECK(est.unknown == 0);
    // exact density of the decided disks mod 125, by exhaustion
    const u64 p = 5, pk = 125;
    double insol = 0, decided = 0;
    for (u64 a = 0; a < pk; ++a)
        for (u64 b = 0; b < pk; ++b)
            for (u64 c = 0; c < pk; ++c) {
                if (a % p == 0 && b % p == 0 && c % p == 0) continue;
                if (!a || !b || !c) continue;
                if (valuation(static_cast<i64>(a), p) > 2 || valuation(static_cast<i64>(b), p) > 2 ||
                    valuation(static_cast<i64>(c), p) > 2)
                    continue;
                decided += 1;
                insol += conics().theta(ProjPoint::canonical({static_cast<i64>(a), static_cast<i64>(b), static_cast<i64>(c)}),
                                        Place::prime(p));
            }
    CHECK(std::abs(est.estimate - insol / decided) <= 3 * est.std_error);
    CHECK(std::abs(est.estimate - insoluble_density(conics(), 5)) <= 3 * est.std_error + 0.01);

    auto cub = sigma_empirical(cubics(), 7, 10000, 4, 42);
    CHECK(cub.estimate > 0.0);
    CHECK(cub.unknown == 0);
    CHECK(std::abs(cub.estimate - insoluble_density(cubics(), 7)) <= 3 * cub.std_error + 1e-3);

    CHECK_THROWS_AS(sigma_empirical(conics(), 5, 0, 3, 1), Error);
    auto again = sigma_empirical(conics(), 5, 1000, 3, 42);
    auto again2 = sigma_empirical(conics(), 5, 1000, 3, 42);
    CHECK(again.insoluble == again2.insoluble);
}

TEST_CASE("cubic theta agrees with the raw-form search")
{
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<i64> dist(-60, 60);
    int compared = 0;
    for (int t = 0; t < 400; ++t) {
        std::vector<i64> y(4);
        for (auto& v : y) {
            while (v == 0) v = dist(rng);
        }
        const auto x = ProjPoint::canonical(y);
        const auto F = HomogeneousForm::diagonal(x.coords(), 3);
        for (u64 p : {3ULL, 7ULL, 13ULL, 2ULL, 5ULL}) {
            const auto raw = padic_point_search(F, p);
            if (raw.status == Solubility::Unknown) continue;
            ++compared;
            REQUIRE(raw.status == cubics().fibre_solubility(x, Place::prime(p)));
        }
    }
    CHECK(compared > 1500);
}

TEST_CASE("cubic class decisions never come back undecided")
{
    for (u64 p : primes_up_to(100)) CHECK_NOTHROW(insoluble_density(cubics(), p));
}

TEST_CASE("calibration")
{
    auto cal = calibrate_A(conics(), 50, 60, 4);
    CHECK(cal.A == 2);
    CHECK(cal.aborted.empty());
    for (const auto& [x, p] : cal.exceptions) CHECK(p <= cal.A);
    CHECK(calibrate_A(conics(), 3, 10).A <= 2);
    auto cub = calibrate_A(cubics(), 20, 10, 4);
    CHECK(cub.aborted.empty());
    CHECK(cub.A <= cubics().A());
    for (const auto& [x, p] : cub.exceptions) CHECK(p <= cub.A);
}
