#include "fibstat/localsolve.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <set>

namespace fibstat {

Place Place::prime(u64 p)
{
    require(is_prime(p), "place " + std::to_string(p) + " is not prime");
    return Place(p);
}

Place Place::parse(const std::string& text)
{
    if (text == "inf" || text == "oo" || text == "infinity" || text == "\xe2\x88\x9e") return infinity();
    try {
        std::size_t used = 0;
        const unsigned long long p = std::stoull(text, &used);
        require(used == text.size(), "malformed place '" + text + "'");
        return prime(p);
    } catch (const std::logic_error&) {
        fail(Error::Kind::Precondition, "malformed place '" + text + "'");
    }
}

u64 Place::prime_value() const
{
    require(p_ != 0, "the real place has no prime");
    return p_;
}

std::string Place::str() const
{
    return p_ == 0 ? "inf" : std::to_string(p_);
}

int legendre(i64 a, u64 p)
{
    require(p > 2 && is_prime(p), "legendre: p must be an odd prime");
    const u64 r = mod_floor(a, p);
    if (r == 0) return 0;
    return powmod(r, (p - 1) / 2, p) == 1 ? 1 : -1;
}

namespace {

// For odd u: eps(u) = (u-1)/2 mod 2, omega(u) = (u^2-1)/8 mod 2.
int eps2(i64 u) { return static_cast<int>(mod_floor(u, 4) == 3); }
int omega2(i64 u)
{
    const u64 r = mod_floor(u, 8);
    return static_cast<int>(r == 3 || r == 5);
}

}  // namespace

int hilbert(i64 a, i64 b, const Place& v)
{
    require(a != 0 && b != 0, "hilbert: arguments must be nonzero");
    if (v.is_infinite()) return (a < 0 && b < 0) ? -1 : 1;
    const u64 p = v.prime_value();
    i64 u = 0, w = 0;
    const int alpha = valuation(a, p, &u);
    const int beta = valuation(b, p, &w);
    if (p == 2) {
        const int e = eps2(u) * eps2(w) + alpha * omega2(w) + beta * omega2(u);
        return (e & 1) ? -1 : 1;
    }
    int s = ((alpha & 1) && (beta & 1) && ((p - 1) / 2) % 2 == 1) ? -1 : 1;
    if (beta & 1) s *= legendre(u, p);
    if (alpha & 1) s *= legendre(w, p);
    return s;
}

int hilbert(const Rational& a, const Rational& b, const Place& v)
{
    require(a.num() != 0 && b.num() != 0, "hilbert: arguments must be nonzero");
    return hilbert(a.num(), b.num(), v) * hilbert(a.num(), b.den(), v) * hilbert(a.den(), b.num(), v) *
           hilbert(a.den(), b.den(), v);
}

bool hilbert_reciprocity_check(const Rational& a, const Rational& b)
{
    std::set<u64> primes{2};
    for (i64 n : {a.num(), a.den(), b.num(), b.den()}) {
        for (u64 p : prime_divisors(n)) primes.insert(p);
    }
    int product = hilbert(a, b, Place::infinity());
    for (u64 p : primes) product *= hilbert(a, b, Place::prime(p));
    return product == 1;
}

bool conic_soluble(i64 a, i64 b, i64 c, const Place& v)
{
    require(a != 0 && b != 0 && c != 0, "conic_soluble: coefficients must be nonzero");
    // z^2 = (a/c) x^2 + (b/c) y^2 ; (ac, bc) = (a,b)(a,c)(c,b)(c,-1)
    return hilbert(a, b, v) * hilbert(a, c, v) * hilbert(c, b, v) * hilbert(c, -1, v) == 1;
}

bool is_kth_power_residue(i64 a, u64 p, u64 k)
{
    require(is_prime(p), "is_kth_power_residue: p must be prime");
    require(k >= 1, "is_kth_power_residue: k must be positive");
    const u64 r = mod_floor(a, p);
    require(r != 0, "is_kth_power_residue: p divides a");
    const u64 g = gcd(k, p - 1);
    return powmod(r, (p - 1) / g, p) == 1;
}

// HomogeneousForm

HomogeneousForm::HomogeneousForm(int nvars, std::vector<Monomial> terms) : nvars_(nvars)
{
    require(nvars >= 1, "form needs at least one variable");
    bool first = true;
    for (auto& t : terms) {
        require(static_cast<int>(t.exponents.size()) == nvars, "monomial arity mismatch");
        if (t.coeff == 0) continue;
        int deg = 0;
        for (int e : t.exponents) {
            require(e >= 0, "negative exponent");
            deg += e;
        }
        if (first) degree_ = deg;
        require(deg == degree_, "form is not homogeneous");
        first = false;
        terms_.push_back(std::move(t));
    }
}

HomogeneousForm HomogeneousForm::diagonal(std::span<const i64> coeffs, int degree)
{
    std::vector<Monomial> terms;
    const int n = static_cast<int>(coeffs.size());
    for (int i = 0; i < n; ++i) {
        std::vector<int> e(n, 0);
        e[i] = degree;
        terms.push_back({coeffs[i], std::move(e)});
    }
    return HomogeneousForm(n, std::move(terms));
}

u64 HomogeneousForm::content() const
{
    u64 g = 0;
    for (const auto& t : terms_) g = gcd_abs(static_cast<i64>(g), t.coeff);
    return g;
}

HomogeneousForm HomogeneousForm::primitive_part() const
{
    const u64 g = content();
    require(g != 0, "primitive part of the zero form");
    std::vector<Monomial> terms = terms_;
    for (auto& t : terms) t.coeff /= static_cast<i64>(g);
    return HomogeneousForm(nvars_, std::move(terms));
}

HomogeneousForm HomogeneousForm::derivative(int var) const
{
    std::vector<Monomial> terms;
    for (const auto& t : terms_) {
        if (t.exponents[var] == 0) continue;
        Monomial m = t;
        m.coeff *= m.exponents[var];
        m.exponents[var] -= 1;
        terms.push_back(std::move(m));
    }
    HomogeneousForm d(nvars_, std::move(terms));
    if (d.is_zero()) d.degree_ = std::max(0, degree_ - 1);
    return d;
}

u64 HomogeneousForm::eval_mod(std::span<const u64> x, u64 m) const
{
    u64 total = 0;
    for (const auto& t : terms_) {
        u64 term = mod_floor(t.coeff, m);
        for (int i = 0; i < nvars_ && term != 0; ++i) {
            for (int e = 0; e < t.exponents[i]; ++e) term = mulmod(term, x[i] % m, m);
        }
        total += term;
        if (total >= m) total -= m;
    }
    return total;
}

std::optional<i128> HomogeneousForm::eval_exact(std::span<const i64> x) const
{
    i128 total = 0;
    for (const auto& t : terms_) {
        i128 term = t.coeff;
        for (int i = 0; i < nvars_; ++i) {
            for (int e = 0; e < t.exponents[i]; ++e) {
                if (__builtin_mul_overflow(term, static_cast<i128>(x[i]), &term)) return std::nullopt;
            }
        }
        if (__builtin_add_overflow(total, term, &total)) return std::nullopt;
    }
    return total;
}

std::string to_string(Solubility s)
{
    switch (s) {
    case Solubility::Soluble: return "soluble";
    case Solubility::Insoluble: return "insoluble";
    case Solubility::Unknown: return "unknown";
    }
    return "unknown";
}

int default_search_depth(const HomogeneousForm& form, u64 p)
{
    int total = 0;
    for (const auto& t : form.primitive_part().terms()) total += valuation(t.coeff, p);
    return 2 * total + 3;
}

namespace {

// Nodes are boxes x + p^{k_0} Z_p x ... x p^{k_{m-1}} Z_p with the leading unit
// coordinate fixed to 1. Writing F(x + h) = sum_a c_a(x) h^a (c_a = d^a F / a!,
// integral), F is constant mod p^L on the box with
// L = min_{a != 0} v(c_a(x)) + sum_i a_i k_i, so the box holds no zero when
// v(F(x)) < L. Otherwise the coordinate limiting L is refined by one digit.
class TreeSearch {
public:
    TreeSearch(const HomogeneousForm& form, u64 p, int depth_bound, u64 budget)
        : form_(form.primitive_part()), p_(p), m_(form.variables()), budget_(budget)
    {
        // Working precision: p^e < 2^63.
        while (modulus_ <= (std::numeric_limits<u64>::max() >> 1) / p_) {
            modulus_ *= p_;
            ++precision_;
        }
        depth_ = std::min(depth_bound, precision_);
        pk_.assign(static_cast<std::size_t>(precision_) + 1, 1);
        for (int k = 1; k <= precision_; ++k) pk_[k] = pk_[k - 1] * p_;
        build_taylor();
    }

    SolubilityVerdict run()
    {
        std::vector<u64> x(static_cast<std::size_t>(m_), 0);
        std::vector<int> k(static_cast<std::size_t>(m_), 0);
        for (int lead = 0; lead < m_ && !found_ && !budget_hit_; ++lead) {
            for (int i = 0; i < m_; ++i) {
                x[i] = i == lead ? 1 : 0;
                k[i] = i < lead ? 1 : (i == lead ? kFixed : 0);
            }
            visit(x, k);
        }
        SolubilityVerdict v;
        v.nodes = nodes_;
        if (found_) {
            v.status = Solubility::Soluble;
            v.witness = witness_;
            v.depth = witness_.level;
        } else if (budget_hit_ || frontier_hit_) {
            v.status = Solubility::Unknown;
            v.depth = depth_;
        } else {
            v.status = Solubility::Insoluble;
            v.depth = max_death_;
        }
        return v;
    }

private:
    static constexpr int kFixed = 1 << 20;

    struct Taylor {
        std::vector<int> alpha;
        std::vector<Monomial> terms;  // c_alpha as a polynomial in x
    };

    void build_taylor()
    {
        std::map<std::vector<int>, std::vector<Monomial>> by_alpha;
        for (const auto& t : form_.terms()) {
            std::vector<int> a(static_cast<std::size_t>(m_), 0);
            for (;;) {
                i64 c = t.coeff;
                std::vector<int> rest(t.exponents);
                for (int i = 0; i < m_; ++i) {
                    i64 binom = 1;
                    for (int j = 0; j < a[i]; ++j) binom = binom * (t.exponents[i] - j) / (j + 1);
                    c *= binom;
                    rest[i] -= a[i];
                }
                if (std::any_of(a.begin(), a.end(), [](int v) { return v > 0; })) by_alpha[a].push_back({c, rest});
                int i = m_ - 1;
                while (i >= 0 && a[i] == t.exponents[i]) a[i--] = 0;
                if (i < 0) break;
                ++a[i];
            }
        }
        for (auto& [a, terms] : by_alpha) taylor_.push_back({a, std::move(terms)});
    }

    u64 eval_terms(const std::vector<Monomial>& terms, const std::vector<u64>& x) const
    {
        u64 total = 0;
        for (const auto& t : terms) {
            u64 v = mod_floor(t.coeff, modulus_);
            for (int i = 0; i < m_ && v != 0; ++i) {
                for (int e = 0; e < t.exponents[i]; ++e) v = mulmod(v, x[i], modulus_);
            }
            total += v;
            if (total >= modulus_) total -= modulus_;
        }
        return total;
    }

    int vp(u64 value) const
    {
        if (value == 0) return precision_;
        int v = 0;
        while (value % p_ == 0) {
            value /= p_;
            ++v;
        }
        return v;
    }

    void visit(std::vector<u64>& x, std::vector<int>& k)
    {
        if (++nodes_ > budget_) {
            budget_hit_ = true;
            return;
        }
        const int vf = vp(form_.eval_mod(x, modulus_));
        int level = 0;
        for (int i = 0; i < m_; ++i) {
            if (k[i] != kFixed) level = std::max(level, k[i]);
        }
        // Hensel certificate at the representative x
        int s = precision_, best = 0;
        int L = precision_, split = -1, split_k = kFixed;
        for (const auto& tay : taylor_) {
            const int vc = vp(eval_terms(tay.terms, x));
            int order = 0, var = -1;
            long long bound = vc;
            for (int i = 0; i < m_; ++i) {
                if (tay.alpha[i] == 0) continue;
                order += tay.alpha[i];
                var = i;
                bound += static_cast<long long>(tay.alpha[i]) * k[i];
            }
            if (order == 1 && vc < s) {
                s = vc;
                best = var;
            }
            if (bound < L) L = static_cast<int>(bound);
        }
        if (s < precision_ && vf > 2 * s) {
            found_ = true;
            witness_ = {x, best, level, vf, s};
            return;
        }
        if (vf < L) {
            max_death_ = std::max(max_death_, vf + 1);
            return;
        }
        // refine the coarsest coordinate among the terms attaining the bound
        for (const auto& tay : taylor_) {
            const int vc = vp(eval_terms(tay.terms, x));
            long long bound = vc;
            for (int i = 0; i < m_; ++i) bound += static_cast<long long>(tay.alpha[i]) * k[i];
            if (bound > L) continue;
            for (int i = 0; i < m_; ++i) {
                if (tay.alpha[i] > 0 && k[i] < split_k) {
                    split = i;
                    split_k = k[i];
                }
            }
        }
        if (split < 0) {
            for (int i = 0; i < m_; ++i) {
                if (k[i] < split_k) {
                    split = i;
                    split_k = k[i];
                }
            }
        }
        if (split < 0) {
            frontier_hit_ = true;  // F(x) = 0 mod p^e at a fully fixed point
            return;
        }
        if (split_k >= depth_) {
            frontier_hit_ = true;
            return;
        }
        const u64 base = x[split];
        const u64 step = pk_[split_k];
        ++k[split];
        for (u64 d = 0; d < p_; ++d) {
            x[split] = base + d * step;
            visit(x, k);
            if (found_ || budget_hit_) break;
        }
        --k[split];
        x[split] = base;
    }

    HomogeneousForm form_;
    u64 p_;
    int m_;
    u64 budget_;
    int precision_ = 0;
    u64 modulus_ = 1;
    int depth_ = 0;
    std::vector<u64> pk_;
    std::vector<Taylor> taylor_;
    u64 nodes_ = 0;
    bool found_ = false;
    bool budget_hit_ = false;
    bool frontier_hit_ = false;
    int max_death_ = 0;
    HenselCertificate witness_;
};

}  // namespace

SolubilityVerdict padic_point_search(const HomogeneousForm& form, u64 p, int depth_bound, u64 node_budget)
{
    require(depth_bound >= 1, "padic_point_search: depth bound must be at least 1");
    require(!form.is_zero(), "padic_point_search: zero form");
    require(is_prime(p), "padic_point_search: p must be prime");
    return TreeSearch(form, p, depth_bound, node_budget).run();
}

SolubilityVerdict padic_point_search(const HomogeneousForm& form, u64 p)
{
    require(!form.is_zero(), "padic_point_search: zero form");
    return padic_point_search(form, p, default_search_depth(form, p));
}

bool cubic_criterion(std::span<const i64> y, u64 p)
{
    require(y.size() == 4, "cubic_criterion: need four coefficients");
    if (p % 3 != 1) return false;
    const i64 sp = static_cast<i64>(p);
    if (y[0] % sp == 0 || y[1] % sp == 0) return false;
    if (y[2] == 0 || y[3] == 0) return false;
    if (valuation(y[2], p) != 1 || valuation(y[3], p) != 1) return false;
    const u64 r01 = mulmod(mod_floor(-y[1], p), inverse_mod(mod_floor(y[0], p), p), p);
    const i64 u2 = y[2] / sp, u3 = y[3] / sp;
    const u64 r23 = mulmod(mod_floor(-u3, p), inverse_mod(mod_floor(u2, p), p), p);
    return !is_kth_power_residue(static_cast<i64>(r01), p, 3) && !is_kth_power_residue(static_cast<i64>(r23), p, 3);
}

bool real_soluble_conic(i64 a, i64 b, i64 c)
{
    require(a != 0 && b != 0 && c != 0, "real_soluble_conic: coefficients must be nonzero");
    const bool pa = a > 0, pb = b > 0, pc = -c > 0;
    return !(pa == pb && pb == pc);
}

bool real_soluble_diagonal_cubic(std::span<const i64> y)
{
    require(y.size() == 4, "real_soluble_diagonal_cubic: need four coefficients");
    return true;
}

}  // namespace fibstat
