#include "fibstat/projective.hpp"

#include <map>

#include "fibstat/parallel.hpp"

namespace fibstat {

ProjPoint ProjPoint::canonical(std::span<const i64> coords)
{
    require(coords.size() >= 2, "a projective point needs at least two coordinates");
    u64 g = 0;
    for (i64 c : coords) g = gcd(g, static_cast<u64>(c < 0 ? -c : c));
    require(g != 0, "the zero vector is not a projective point");

    ProjPoint x;
    x.coords_.assign(coords.begin(), coords.end());
    int sign = 0;
    for (i64& c : x.coords_) {
        c /= static_cast<i64>(g);
        if (sign == 0 && c != 0) sign = c > 0 ? 1 : -1;
    }
    for (i64& c : x.coords_) {
        c *= sign;
        x.height_ = std::max(x.height_, c < 0 ? -c : c);
    }
    return x;
}

namespace {

u64 crt_combine(u64 a, u64 m, u64 b, u64 n)
{
    // x = a mod m, x = b mod n, gcd(m, n) = 1
    const u64 mn = m * n;
    const u64 t = mulmod((b + n - a % n) % n, inverse_mod(m % n, n), n);
    return (a + mulmod(m, t, mn)) % mn;
}

}  // namespace

ResidueClass::ResidueClass(u64 modulus, std::span<const u64> coords) : modulus_(modulus), coords_(coords.size(), 0)
{
    require(modulus >= 1, "residue class modulus must be positive");
    require(coords.size() >= 2, "a residue class needs at least two coordinates");
    if (modulus == 1) return;

    u64 done = 1;
    for (const auto& pp : factor(static_cast<i64>(modulus))) {
        u64 pk = 1;
        for (int i = 0; i < pp.exponent; ++i) pk *= pp.prime;
        std::vector<u64> local(coords.size());
        std::size_t lead = coords.size();
        for (std::size_t i = 0; i < coords.size(); ++i) {
            local[i] = coords[i] % pk;
            if (lead == coords.size() && local[i] % pp.prime != 0) lead = i;
        }
        require(lead != coords.size(), "residue vector is not primitive modulo " + std::to_string(pp.prime));
        const u64 inv = inverse_mod(local[lead], pk);
        for (std::size_t i = 0; i < coords.size(); ++i) {
            const u64 scaled = mulmod(local[i], inv, pk);
            coords_[i] = done == 1 ? scaled : crt_combine(coords_[i], done, scaled, pk);
        }
        done *= pk;
    }
}

ResidueClass reduce_point(const ProjPoint& x, u64 modulus)
{
    std::vector<u64> r(x.coords().size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = mod_floor(x[i], modulus);
    return ResidueClass(modulus, r);
}

u64 proj_size(int n, u64 modulus)
{
    require(n >= 1 && modulus >= 1, "proj_size: need n >= 1 and Q >= 1");
    u128 total = 1;
    constexpr u128 cap = std::numeric_limits<u64>::max();
    auto check = [&](u128 v) {
        if (v > cap) fail(Error::Kind::Overflow, "proj_size exceeds 64 bits");
        return v;
    };
    if (modulus == 1) return 1;
    for (const auto& pp : factor(static_cast<i64>(modulus))) {
        const u128 p = pp.prime;
        u128 geometric = 0;  // (p^{n+1} - 1) / (p - 1)
        u128 pw = 1;
        for (int i = 0; i <= n; ++i) {
            geometric = check(geometric + pw);
            if (i < n) pw = check(pw * p);
        }
        u128 local = geometric;
        for (int i = 0; i < n * (pp.exponent - 1); ++i) local = check(local * p);
        total = check(total * local);
    }
    return static_cast<u64>(total);
}

double zeta(double s)
{
    require(s > 1.0, "zeta: need s > 1");
    constexpr int N = 64;
    double sum = 0.0;
    for (int k = N - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
    const double n = N;
    sum += std::pow(n, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(n, -s);
    // Euler-Maclaurin tail with B2, B4, B6, B8.
    constexpr double bern[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0};
    double rising = s;  // s (s+1) ... (s+2j-2)
    double fact = 2.0;  // (2j)!
    for (int j = 1; j <= 4; ++j) {
        sum += bern[j - 1] / fact * rising * std::pow(n, -s - 2.0 * j + 1.0);
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    }
    return sum;
}

double point_constant(int n)
{
    return std::ldexp(1.0, n) / zeta(n + 1.0);
}

// PointEnumerator

PointEnumerator::PointEnumerator(int n, i64 B) : n_(n), B_(B), cur_(static_cast<std::size_t>(n) + 1, -B)
{
    require(n >= 1 && B >= 1, "enumerate_points: need n >= 1 and B >= 1");
    cur_[0] = 0;
}

bool PointEnumerator::advance()
{
    for (int i = n_; i >= 0; --i) {
        if (cur_[i] < B_) {
            ++cur_[i];
            return true;
        }
        cur_[i] = i == 0 ? 0 : -B_;
    }
    return false;
}

std::optional<ProjPoint> PointEnumerator::next()
{
    while (!done_) {
        if (started_ && !advance()) {
            done_ = true;
            break;
        }
        started_ = true;
        u64 g = 0;
        i64 first = 0;
        for (i64 c : cur_) {
            g = gcd(g, static_cast<u64>(c < 0 ? -c : c));
            if (first == 0) first = c;
        }
        if (g == 1 && first > 0) return ProjPoint::canonical(cur_);
    }
    return std::nullopt;
}

std::vector<ProjPoint> enumerate_points(int n, i64 B)
{
    std::vector<ProjPoint> out;
    for_each_point(n, B, [&](std::span<const i64> c, i64) { out.push_back(ProjPoint::canonical(c)); });
    return out;
}

// Class counting

namespace {

struct Tally {
    std::vector<u64> counts;
    void merge(Tally&& o)
    {
        if (counts.empty()) {
            counts = std::move(o.counts);
            return;
        }
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    }
};

i64 floor_div(i64 a, i64 b)
{
    i64 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// #{t in [-T, T] : t = s mod m}
i64 count_in_class(i64 T, i64 s, i64 m)
{
    return floor_div(T - s, m) - floor_div(-T - 1 - s, m);
}

struct Divisor {
    i64 d;
    int mu;
};

void squarefree_divisors(const std::vector<u64>& primes, std::vector<Divisor>& out)
{
    out.assign(1, {1, 1});
    for (u64 p : primes) {
        const std::size_t k = out.size();
        for (std::size_t i = 0; i < k; ++i) out.push_back({out[i].d * static_cast<i64>(p), -out[i].mu});
    }
}

}  // namespace

ClassCounts::ClassCounts(int n, i64 B, u64 modulus, unsigned threads) : n_(n), B_(B), Q_(modulus)
{
    require(n >= 1 && B >= 1, "class counting: need n >= 1 and B >= 1");
    require(modulus >= 1, "class counting: modulus must be positive");
    const auto qf = factor(static_cast<i64>(std::max<u64>(modulus, 2)));
    if (modulus > 1) {
        for (const auto& pp : qf) require(pp.exponent == 1, "class counting: modulus must be squarefree");
    }
    const std::size_t dim = static_cast<std::size_t>(n) + 1;
    u128 table_size = 1;
    for (std::size_t i = 0; i < dim; ++i) table_size *= modulus;
    require(table_size <= (u128(1) << 26), "class counting: Q^(n+1) too large for the class table");

    // Map every vector mod Q to the index of its class (or -1 if not primitive).
    std::vector<std::int32_t> class_of(static_cast<std::size_t>(table_size), -1);
    std::map<std::vector<u64>, std::int32_t> index;
    std::vector<u64> digits(dim);
    for (std::size_t idx = 0; idx < class_of.size(); ++idx) {
        std::size_t rest = idx;
        for (std::size_t i = dim; i-- > 0;) {
            digits[i] = rest % modulus;
            rest /= modulus;
        }
        bool primitive = true;
        if (modulus > 1) {
            for (const auto& pp : qf) {
                bool unit = false;
                for (u64 d : digits) unit = unit || d % pp.prime != 0;
                primitive = primitive && unit;
            }
        }
        if (!primitive) continue;
        ResidueClass rc(modulus, digits);
        auto [it, fresh] = index.try_emplace(std::vector<u64>(rc.coords().begin(), rc.coords().end()),
                                             static_cast<std::int32_t>(index.size()));
        class_of[idx] = it->second;
    }
    // Order classes by canonical coordinates.
    std::vector<std::int32_t> rank(index.size());
    {
        std::int32_t r = 0;
        for (const auto& [coords, id] : index) {
            rank[id] = r++;
            classes_.emplace_back(modulus, coords);
        }
    }
    for (auto& c : class_of) {
        if (c >= 0) c = rank[c];
    }
    if (proj_size(n, modulus) != classes_.size()) fail(Error::Kind::Invariant, "class table size mismatch");

    const FactorTable table(static_cast<u64>(B));
    const i64 Q = static_cast<i64>(modulus);
    const std::size_t nclasses = classes_.size();

    // Slab over the first coordinate; prefix = coordinates 0..n-1, the last
    // coordinate is counted per residue class. Vectors of both signs are
    // counted, so each class total is even.
    auto work = [&](std::size_t slab, Tally& acc) {
        acc.counts.assign(nclasses, 0);
        std::vector<i64> prefix(static_cast<std::size_t>(n), 0);
        prefix[0] = static_cast<i64>(slab) - B;
        std::vector<u64> primes;
        std::vector<Divisor> divs;
        std::vector<i64> per_residue(modulus);

        auto leaf = [&](u64 g) {
            std::size_t base = 0;
            for (i64 c : prefix) base = base * modulus + mod_floor(c, modulus);
            base *= modulus;
            if (g == 0) {
                // last coordinate must be +-1
                for (i64 v : {i64(1), i64(-1)}) acc.counts[class_of[base + mod_floor(v, modulus)]] += 1;
                return;
            }
            primes.clear();
            table.prime_divisors(g, primes);
            squarefree_divisors(primes, divs);
            std::fill(per_residue.begin(), per_residue.end(), 0);
            for (const auto& [d, mu] : divs) {
                const i64 T = B / d;
                const i64 e = static_cast<i64>(gcd(static_cast<u64>(d), modulus));
                const i64 Qe = Q / e;
                const i64 inv = Qe == 1 ? 0 : static_cast<i64>(inverse_mod(static_cast<u64>((d / e) % Qe), Qe));
                for (i64 r = 0; r < Q; r += e) {
                    const i64 s = Qe == 1 ? 0 : static_cast<i64>(mulmod(r / e, inv, Qe));
                    per_residue[r] += mu * count_in_class(T, s, Qe);
                }
            }
            for (i64 r = 0; r < Q; ++r) {
                if (per_residue[r] == 0) continue;
                const auto cls = class_of[base + r];
                if (cls < 0) fail(Error::Kind::Invariant, "primitive vector reduced to a non-primitive class");
                acc.counts[cls] += static_cast<u64>(per_residue[r]);
            }
        };

        auto rec = [&](auto&& self, std::size_t i, u64 g) -> void {
            if (i == prefix.size()) {
                leaf(g);
                return;
            }
            for (i64 v = -B; v <= B; ++v) {
                prefix[i] = v;
                self(self, i + 1, gcd(g, static_cast<u64>(v < 0 ? -v : v)));
            }
        };
        const i64 x0 = prefix[0];
        rec(rec, 1, static_cast<u64>(x0 < 0 ? -x0 : x0));
    };

    Tally total = parallel_slabs<Tally>(static_cast<std::size_t>(2 * B + 1), threads, [] { return Tally{}; }, work);
    counts_ = std::move(total.counts);
    counts_.resize(nclasses, 0);
    for (auto& c : counts_) {
        if (c % 2 != 0) fail(Error::Kind::Invariant, "odd vector count for a residue class");
        c /= 2;
        total_ += c;
    }
}

CongruenceCount ClassCounts::select(const std::function<bool(const ResidueClass&)>& predicate) const
{
    CongruenceCount out;
    std::size_t selected = 0;
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (!predicate(classes_[i])) continue;
        ++selected;
        out.count += counts_[i];
    }
    out.main_term = point_constant(n_) * static_cast<double>(selected) / static_cast<double>(classes_.size()) *
                    std::pow(static_cast<double>(B_), n_ + 1);
    out.relative_error = relative_error(out.count, out.main_term);
    return out;
}

u64 count_points(int n, i64 B, unsigned threads)
{
    return ClassCounts(n, B, 1, threads).total();
}

CongruenceCount count_congruence(int n, i64 B, u64 modulus,
                                 const std::function<bool(const ResidueClass&)>& predicate, unsigned threads)
{
    require(B >= 2, "count_congruence: need B >= 2");
    return ClassCounts(n, B, modulus, threads).select(predicate);
}

}  // namespace fibstat
