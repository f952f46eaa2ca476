#include "fibstat/families.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>

#include "fibstat/parallel.hpp"
#include "fibstat/random.hpp"

namespace fibstat {

namespace {

std::vector<ComponentAction> swap_divisors(int count)
{
    std::vector<ComponentAction> out;
    for (int i = 0; i < count; ++i) out.emplace_back(std::vector<Permutation>{{0, 1}, {1, 0}}, std::vector<int>{1, 1});
    return out;
}

std::vector<ComponentAction> trivial_divisors(int count)
{
    std::vector<ComponentAction> out;
    for (int i = 0; i < count; ++i) out.emplace_back(std::vector<Permutation>{{0}}, std::vector<int>{1});
    return out;
}

HomogeneousForm coordinate_product(int vars)
{
    return HomogeneousForm(vars, {{1, std::vector<int>(static_cast<std::size_t>(vars), 1)}});
}

// Smallest positive representative of each class in F_p^* / (F_p^*)^k, indexed
// by the class character a^((p-1)/g).
u64 power_class_rep(u64 unit_mod_p, u64 p, u64 k)
{
    const u64 g = gcd(k, p - 1);
    if (g == 1) return 1;
    const u64 e = (p - 1) / g;
    const u64 target = powmod(unit_mod_p, e, p);
    for (u64 t = 1; t < p; ++t) {
        if (powmod(t, e, p) == target) return t;
    }
    fail(Error::Kind::Invariant, "no power class representative");
}

struct CubeClass {
    int r;
    u64 u;
    friend auto operator<=>(const CubeClass&, const CubeClass&) = default;
};

CubeClass cube_class(i64 y, u64 p)
{
    i64 unit = 0;
    const int v = valuation(y, p, &unit);
    if (p == 3) {
        // units mod 9 modulo cubes {1, 8}
        const u64 m = mod_floor(unit, 9);
        const u64 rep = (m == 1 || m == 8) ? 1 : (m == 2 || m == 7) ? 2 : 4;
        return {v % 3, rep};
    }
    return {v % 3, power_class_rep(mod_floor(unit, p), p, 3)};
}

using CubicKey = std::array<u64, 10>;

Solubility cubic_solubility(std::span<const i64> y, u64 p, int depth)
{
    if (p % 3 == 2) return Solubility::Soluble;  // every unit is a cube
    std::array<CubeClass, 4> cls;
    for (int i = 0; i < 4; ++i) cls[i] = cube_class(y[i], p);
    std::sort(cls.begin(), cls.end());
    for (int i = 0; i + 1 < 4; ++i) {
        if (cls[i] == cls[i + 1]) return Solubility::Soluble;  // y_i x^3 + y_j z^3 with -y_j/y_i a cube
    }
    const int shift = std::min({cls[0].r, cls[1].r, cls[2].r, cls[3].r});
    for (auto& c : cls) c.r -= shift;
    std::sort(cls.begin(), cls.end());

    CubicKey key{p, static_cast<u64>(depth)};
    for (int i = 0; i < 4; ++i) {
        key[2 + 2 * i] = static_cast<u64>(cls[i].r);
        key[3 + 2 * i] = cls[i].u;
    }
    thread_local std::map<CubicKey, Solubility> memo;
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    std::vector<i64> coeffs;
    for (const auto& c : cls) {
        i64 v = static_cast<i64>(c.u);
        for (int i = 0; i < c.r; ++i) v *= static_cast<i64>(p);
        coeffs.push_back(v);
    }
    const auto form = HomogeneousForm::diagonal(coeffs, 3);
    const int d = depth > 0 ? depth : default_search_depth(form, p);
    const Solubility s = padic_point_search(form, p, d).status;
    memo.emplace(key, s);
    return s;
}

void add_prime_divisors(i64 c, const FactorTable* table, std::vector<u64>& out)
{
    const u64 m = c < 0 ? -static_cast<u64>(c) : static_cast<u64>(c);
    if (m <= 1) return;
    if (table && m <= table->limit()) {
        table->prime_divisors(m, out);
    } else {
        for (u64 p : prime_divisors(c)) out.push_back(p);
    }
}

}  // namespace

FamilyDescriptor::FamilyDescriptor(FamilyKind kind, std::string name, int n, HomogeneousForm f, u64 A, Rational delta,
                                   std::vector<ComponentAction> actions)
    : kind_(kind), name_(std::move(name)), n_(n), f_(std::move(f)), A_(A), delta_(delta), actions_(std::move(actions))
{
}

FamilyDescriptor FamilyDescriptor::diagonal_conics()
{
    return FamilyDescriptor(FamilyKind::DiagonalConics, "diagonal-conics", 2, coordinate_product(3), 2, Rational(3, 2),
                            swap_divisors(3));
}

FamilyDescriptor FamilyDescriptor::diagonal_cubics()
{
    return FamilyDescriptor(FamilyKind::DiagonalCubics, "diagonal-cubics", 3, coordinate_product(4), 3, Rational(0),
                            trivial_divisors(4));
}

std::vector<std::string> FamilyDescriptor::names()
{
    return {"diagonal-conics", "diagonal-cubics"};
}

FamilyDescriptor FamilyDescriptor::by_name(const std::string& name)
{
    std::string key = name;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "diagonal-conics" || key == "conics") return diagonal_conics();
    if (key == "diagonal-cubics" || key == "cubics") return diagonal_cubics();
    fail(Error::Kind::Precondition, "unknown family '" + name + "'");
}

FamilyDescriptor FamilyDescriptor::with_search_depth(int depth) const
{
    require(depth >= 0, "search depth must be non-negative");
    FamilyDescriptor f = *this;
    f.depth_ = depth;
    return f;
}

bool FamilyDescriptor::smooth(const ProjPoint& x) const
{
    require(x.dimension() == n_, "point dimension does not match the family base");
    for (i64 c : x.coords()) {
        if (c == 0) return false;
    }
    return true;
}

Solubility FamilyDescriptor::fibre_solubility(const ProjPoint& x, const Place& v) const
{
    require(smooth(x), "fibre over a singular point");
    const auto c = x.coords();
    switch (kind_) {
    case FamilyKind::DiagonalConics:
        return conic_soluble(c[0], c[1], c[2], v) ? Solubility::Soluble : Solubility::Insoluble;
    case FamilyKind::DiagonalCubics:
        if (v.is_infinite()) return real_soluble_diagonal_cubic(c) ? Solubility::Soluble : Solubility::Insoluble;
        return cubic_solubility(c, v.prime_value(), depth_);
    }
    fail(Error::Kind::Invariant, "unhandled family");
}

bool FamilyDescriptor::theta(const ProjPoint& x, const Place& v) const
{
    const Solubility s = fibre_solubility(x, v);
    if (s == Solubility::Unknown) fail(Error::Kind::Invariant, "undecided local solubility at " + v.str());
    return s == Solubility::Insoluble;
}

std::vector<u64> FamilyDescriptor::candidate_primes(const ProjPoint& x, const FactorTable* table) const
{
    std::vector<u64> out;
    for (u64 p = 2; p <= A_; ++p) {
        if (is_prime(p)) out.push_back(p);
    }
    for (i64 c : x.coords()) add_prime_divisors(c, table, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool FamilyDescriptor::nonsplit_mod_p(std::span<const u64> r, u64 p) const
{
    require(has_nonsplit_test(), "family " + name_ + " has no non-split test");
    require(p > 2 && is_prime(p), "non-split test needs an odd prime");
    require(r.size() == 3, "conic fibre needs three coefficients");
    // diagonal entries of a x^2 + b y^2 - c z^2
    const std::array<u64, 3> diag{r[0] % p, r[1] % p, (p - r[2] % p) % p};
    std::vector<u64> units;
    for (u64 d : diag) {
        if (d != 0) units.push_back(d);
    }
    if (units.size() == 3) return false;
    if (units.size() <= 1) return true;
    const i64 minus_product = -static_cast<i64>(mulmod(units[0], units[1], p));
    return legendre(minus_product, p) == -1;
}

int FamilyDescriptor::class_precision(u64 p) const
{
    switch (kind_) {
    case FamilyKind::DiagonalConics: return p == 2 ? 3 : 1;
    case FamilyKind::DiagonalCubics: return p == 3 ? 2 : 1;
    }
    return 1;
}

ObstructionRecord omega_pi(const FamilyDescriptor& family, const ProjPoint& x, const std::set<Place>& S,
                           const FactorTable* table)
{
    require(family.smooth(x), "omega_pi: fibre is not smooth");
    ObstructionRecord rec{x, {}, {}, 0, false};
    auto visit = [&](const Place& v) {
        if (S.count(v)) return;
        switch (family.fibre_solubility(x, v)) {
        case Solubility::Insoluble: rec.insoluble_places.push_back(v); break;
        case Solubility::Unknown: rec.unknown_places.push_back(v); break;
        case Solubility::Soluble: break;
        }
    };
    for (u64 p : family.candidate_primes(x, table)) visit(Place::prime(p));
    visit(Place::infinity());
    rec.omega = static_cast<int>(rec.insoluble_places.size());
    rec.tainted = !rec.unknown_places.empty();
    return rec;
}

int omega_formula_conics(i64 a, i64 b, i64 c)
{
    for (i64 v : {a, b, c}) {
        require(v != 0 && mod_floor(v, 4) == 1, "omega_formula_conics: coefficients must be = 1 mod 4");
        require(moebius(static_cast<u64>(v < 0 ? -v : v)) != 0, "omega_formula_conics: coefficients must be squarefree");
    }
    require(gcd_abs(a, b) == 1 && gcd_abs(a, c) == 1 && gcd_abs(b, c) == 1,
            "omega_formula_conics: coefficients must be pairwise coprime");
    int twice = 0;
    auto term = [&](i64 m, i64 other) {
        for (u64 p : prime_divisors(m)) twice += 1 - legendre(other, p);
    };
    term(a, b * c);
    term(b, a * c);
    term(c, -a * b);
    return twice / 2;
}

Rational sigma_exact(const FamilyDescriptor& family, u64 p)
{
    require(family.has_nonsplit_test(), "sigma_exact: family " + family.name() + " has no non-split test");
    require(is_prime(p) && p > family.A(), "sigma_exact: p must be a prime above A");
    const i64 q = static_cast<i64>(p);
    return Rational(3 + 3 * (q - 1) / 2, q * q + q + 1);
}

Rational sigma_by_classification(const FamilyDescriptor& family, u64 p)
{
    require(family.has_nonsplit_test(), "sigma_by_classification: family " + family.name() + " has no non-split test");
    require(is_prime(p) && p > 2, "sigma_by_classification: need an odd prime");
    const int dim = family.n() + 1;
    i64 nonsplit = 0;
    std::vector<u64> v(dim);
    for (int lead = 0; lead < dim; ++lead) {
        std::fill(v.begin(), v.end(), 0);
        v[lead] = 1;
        for (;;) {
            nonsplit += family.nonsplit_mod_p(v, p);
            int i = dim - 1;
            while (i > lead && v[i] == p - 1) v[i--] = 0;
            if (i == lead) break;
            ++v[i];
        }
    }
    return Rational(nonsplit, static_cast<i64>(proj_size(family.n(), p)));
}

SigmaEstimate sigma_empirical(const FamilyDescriptor& family, u64 p, u64 sample_size, int precision, u64 seed)
{
    require(sample_size >= 1, "sigma_empirical: sample size must be positive");
    require(precision >= 1, "sigma_empirical: precision must be positive");
    require(is_prime(p), "sigma_empirical: p must be prime");
    u64 pk = 1;
    for (int i = 0; i < precision; ++i) {
        require(pk <= (u64(1) << 31) / p, "sigma_empirical: p^precision too large");
        pk *= p;
    }
    const int c = family.class_precision(p);
    const Place place = Place::prime(p);
    std::mt19937_64 rng(seed);
    SigmaEstimate est;
    est.p = p;
    est.precision = precision;
    est.samples = sample_size;
    std::vector<i64> y(static_cast<std::size_t>(family.n()) + 1);
    u64 decided = 0;
    for (u64 s = 0; s < sample_size; ++s) {
        bool primitive = false;
        do {
            for (auto& v : y) {
                v = static_cast<i64>(uniform_below(rng, pk));
                primitive = primitive || v % static_cast<i64>(p) != 0;
            }
        } while (!primitive);
        bool determined = true;
        for (i64 v : y) determined = determined && v != 0 && precision - valuation(v, p) >= c;
        if (!determined) {
            ++est.undetermined;
            continue;
        }
        switch (family.fibre_solubility(ProjPoint::canonical(y), place)) {
        case Solubility::Insoluble:
            ++est.insoluble;
            ++decided;
            break;
        case Solubility::Soluble: ++decided; break;
        case Solubility::Unknown: ++est.unknown; break;
        }
    }
    if (decided > 0) {
        est.estimate = static_cast<double>(est.insoluble) / static_cast<double>(decided);
        est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(decided));
    }
    return est;
}

double insoluble_density(const FamilyDescriptor& family, u64 p)
{
    require(is_prime(p), "insoluble_density: p must be prime");
    const int k = family.kind() == FamilyKind::DiagonalConics ? 2 : 3;
    std::vector<u64> units;
    if (family.kind() == FamilyKind::DiagonalConics) {
        if (p == 2) {
            units = {1, 3, 5, 7};
        } else {
            units = {1};
            for (u64 t = 2; units.size() < 2; ++t) {
                if (legendre(static_cast<i64>(t), p) == -1) units.push_back(t);
            }
        }
    } else if (p == 3) {
        units = {1, 2, 4};
    } else if (p % 3 == 1) {
        for (u64 t = 1; t < p && units.size() < 3; ++t) {
            const u64 rep = power_class_rep(t, p, 3);
            if (std::find(units.begin(), units.end(), rep) == units.end()) units.push_back(rep);
        }
    } else {
        return 0.0;
    }
    const long double q = static_cast<long double>(p);
    // P(v = r mod k) for a Haar-random element of Z_p
    std::vector<long double> w(k);
    for (int r = 0; r < k; ++r) w[r] = (1 - 1 / q) * std::pow(q, -static_cast<long double>(r)) / (1 - std::pow(q, -static_cast<long double>(k)));

    const int dim = family.n() + 1;
    const int per = k * static_cast<int>(units.size());
    std::size_t combos = 1;
    for (int i = 0; i < dim; ++i) combos *= static_cast<std::size_t>(per);
    const Place place = Place::prime(p);
    long double total = 0;
    std::vector<i64> y(dim);
    for (std::size_t idx = 0; idx < combos; ++idx) {
        std::size_t rest = idx;
        long double weight = 1;
        for (int i = 0; i < dim; ++i) {
            const int cls = static_cast<int>(rest % per);
            rest /= per;
            const int r = cls / static_cast<int>(units.size());
            i64 v = static_cast<i64>(units[cls % units.size()]);
            for (int j = 0; j < r; ++j) v *= static_cast<i64>(p);
            y[i] = v;
            weight *= w[r] / static_cast<long double>(units.size());
        }
        const Solubility s = family.fibre_solubility(ProjPoint::canonical(y), place);
        if (s == Solubility::Unknown) fail(Error::Kind::Taint, "insoluble_density: undecided class at p = " + std::to_string(p));
        if (s == Solubility::Insoluble) total += weight;
    }
    return static_cast<double>(total);
}

Calibration calibrate_A(const FamilyDescriptor& family, u64 p_max, i64 B_cal, unsigned threads)
{
    require(B_cal >= 1, "calibrate_A: B_cal must be positive");
    const auto primes = primes_up_to(p_max);
    constexpr std::size_t kWitnesses = 8;

    struct Acc {
        std::map<u64, std::vector<ProjPoint>> witnesses;
        std::map<u64, std::string> aborted;
        void merge(Acc&& o)
        {
            for (auto& [p, w] : o.witnesses) {
                auto& mine = witnesses[p];
                for (auto& x : w) {
                    if (mine.size() < kWitnesses) mine.push_back(std::move(x));
                }
            }
            for (auto& [p, why] : o.aborted) aborted.try_emplace(p, std::move(why));
        }
    };
    auto work = [&](std::size_t slab, Acc& acc) {
        for_each_point_in_slab(family.n(), B_cal, static_cast<i64>(slab), [&](std::span<const i64> c, i64) {
            for (i64 v : c) {
                if (v == 0) return;
            }
            const ProjPoint x = ProjPoint::canonical(c);
            for (u64 p : primes) {
                bool divides = false;
                for (i64 v : c) divides = divides || v % static_cast<i64>(p) == 0;
                if (divides || acc.aborted.count(p)) continue;
                switch (family.fibre_solubility(x, Place::prime(p))) {
                case Solubility::Insoluble: {
                    auto& w = acc.witnesses[p];
                    if (w.size() < kWitnesses) w.push_back(x);
                    break;
                }
                case Solubility::Unknown:
                    acc.aborted.emplace(p, "undecided fibre over the point with coordinates starting " + std::to_string(c[0]));
                    break;
                case Solubility::Soluble: break;
                }
            }
        });
    };
    Acc total = parallel_slabs<Acc>(static_cast<std::size_t>(B_cal) + 1, threads, [] { return Acc{}; }, work);
    Calibration cal;
    for (auto& [p, w] : total.witnesses) {
        cal.A = std::max(cal.A, p);
        for (auto& x : w) cal.exceptions.emplace_back(std::move(x), p);
    }
    for (auto& [p, why] : total.aborted) cal.aborted.emplace_back(p, std::move(why));
    return cal;
}

void SigmaTable::add(SigmaEntry e)
{
    require(is_prime(e.p), "sigma table entries are indexed by primes");
    require(e.value >= 0.0 && e.value <= 1.0, "sigma_p must lie in [0, 1]");
    entries_[e.p] = std::move(e);
    cumulative_.clear();
}

double SigmaTable::sigma(u64 p) const
{
    auto it = entries_.find(p);
    require(it != entries_.end(), "no sigma_p entry for p = " + std::to_string(p));
    return it->second.value;
}

double SigmaTable::partial_sum(double x) const
{
    require(x <= static_cast<double>(coverage()) + 0.5, "sigma table does not reach " + std::to_string(x));
    if (cumulative_.size() != entries_.size()) {
        cumulative_.clear();
        long double s = 0;
        for (const auto& [p, e] : entries_) {
            s += e.value;
            cumulative_.emplace_back(p, static_cast<double>(s));
        }
    }
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x,
                               [](double v, const std::pair<u64, double>& e) { return v < static_cast<double>(e.first); });
    return it == cumulative_.begin() ? 0.0 : std::prev(it)->second;
}

SigmaTable SigmaTable::exact(const FamilyDescriptor& family, u64 p_max)
{
    SigmaTable t;
    for (u64 p : primes_up_to(p_max)) {
        if (p <= family.A()) continue;
        const Rational s = sigma_exact(family, p);
        t.add({p, s, s.to_double(), 0.0, 0});
    }
    t.coverage_ = p_max;
    return t;
}

}  // namespace fibstat
