#pragma once

// Exact coefficient rings: a small tower of carriers (integers, residue rings,
// p-local rationals, sparse polynomials with p-power fractional exponents,
// truncated power series, principal quotients). All values are immutable and
// in canonical sparse form; operations are pure.

#include "pwl/numeric.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pwl {

// ---------------------------------------------------------------------------
// Fractional exponents num / p^denpow, normalized so denpow == 0 or p ∤ num.

struct PExp {
    long long num = 0;
    int denpow = 0;

    bool is_zero() const { return num == 0; }
    bool is_integral() const { return denpow == 0; }
    friend bool operator==(const PExp& a, const PExp& b) = default;
};

inline PExp pexp_normalize(long long num, int denpow, long long p) {
    if (num == 0) return {0, 0};
    while (denpow > 0 && num % p == 0) {
        num /= p;
        --denpow;
    }
    return {num, denpow};
}

inline PExp pexp_make(long long num, int denpow, long long p) { return pexp_normalize(num, denpow, p); }

inline PExp pexp_add(const PExp& a, const PExp& b, long long p) {
    int d = std::max(a.denpow, b.denpow);
    __int128 na = (__int128)a.num, nb = (__int128)b.num;
    for (int i = a.denpow; i < d; ++i) na *= p;
    for (int i = b.denpow; i < d; ++i) nb *= p;
    __int128 s = na + nb;
    if (s > (__int128)1 << 62 || s < -((__int128)1 << 62)) throw cap_error("exponent overflow");
    return pexp_normalize((long long)s, d, p);
}

inline PExp pexp_neg(const PExp& a) { return {-a.num, a.denpow}; }

inline PExp pexp_scale_int(const PExp& a, long long m, long long p) {
    __int128 s = (__int128)a.num * m;
    if (s > (__int128)1 << 62 || s < -((__int128)1 << 62)) throw cap_error("exponent overflow");
    return pexp_normalize((long long)s, a.denpow, p);
}

// Multiply the exponent by p^j (j may be negative: divides, deepening the denominator).
inline PExp pexp_shift_p(const PExp& a, int j, long long p) {
    if (a.num == 0) return a;
    long long num = a.num;
    int d = a.denpow;
    if (j >= 0) {
        while (j > 0 && d > 0) {
            --d;
            --j;
        }
        for (; j > 0; --j) {
            __int128 s = (__int128)num * p;
            if (s > (__int128)1 << 62) throw cap_error("exponent overflow");
            num = (long long)s;
        }
    } else {
        d += -j;
    }
    return pexp_normalize(num, d, p);
}

// Compare as rationals.
inline int pexp_cmp(const PExp& a, const PExp& b, long long p) {
    int d = std::max(a.denpow, b.denpow);
    __int128 na = (__int128)a.num, nb = (__int128)b.num;
    for (int i = a.denpow; i < d; ++i) na *= p;
    for (int i = b.denpow; i < d; ++i) nb *= p;
    if (na < nb) return -1;
    if (na > nb) return 1;
    return 0;
}

// p-adic valuation; exponents are num/p^denpow. Returns INT_MAX/2 for zero.
inline int pexp_valuation(const PExp& a, long long p) {
    if (a.num == 0) return 1 << 20;
    long long n = a.num < 0 ? -a.num : a.num;
    int v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v - a.denpow;
}

inline Rat pexp_to_rat(const PExp& a, long long p) {
    Rat r(a.num);
    for (int i = 0; i < a.denpow; ++i) r /= p;
    return r;
}

using Monomial = std::vector<PExp>;

inline bool monomial_less(const Monomial& a, const Monomial& b, long long p) {
    std::size_t n = std::max(a.size(), b.size());
    static const PExp zero{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const PExp& x = i < a.size() ? a[i] : zero;
        const PExp& y = i < b.size() ? b[i] : zero;
        int c = pexp_cmp(x, y, p);
        if (c != 0) return c < 0;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Ring descriptors

enum class RingKind { Integers, IntegersMod, PLocalRationals, Poly, TruncatedSeries, Quotient };

enum class ExpMonoid { NonNegInt, AnyInt, PadicNonNeg };

struct RingDescriptor;
struct RingElement;
using RingPtr = std::shared_ptr<const RingDescriptor>;

struct RingDescriptor {
    RingKind kind;
    Int p = 2;                     // the distinguished prime
    Int modulus = 0;               // IntegersMod
    int denom_cap = 0;             // PLocalRationals / PadicNonNeg exponent cap
    RingPtr base;                  // Poly / TruncatedSeries / Quotient
    std::vector<std::string> vars; // Poly
    std::vector<ExpMonoid> monoids;
    std::string svar;              // TruncatedSeries variable
    int precision = 0;             // TruncatedSeries truncation order
    std::shared_ptr<const RingElement> qgen; // Quotient generator (monic-normalizable)
};

bool ring_equal(const RingPtr& a, const RingPtr& b);

struct RingElement {
    RingPtr ring;
    // canonical sparse form: no zero coefficients; keys sized to the variable count
    std::map<Monomial, Rat, bool (*)(const Monomial&, const Monomial&)> terms;
    bool truncated = false; // sticky: a series truncation dropped terms somewhere upstream

    explicit RingElement(RingPtr r);
};

namespace detail {
inline long long small_p(const RingPtr& r) { return (long long)r->p; }

// One comparator per prime (2,3,5,...); monomial order depends only on p.
inline bool mon_less_p2(const Monomial& a, const Monomial& b) { return monomial_less(a, b, 2); }
inline bool mon_less_p3(const Monomial& a, const Monomial& b) { return monomial_less(a, b, 3); }
inline bool mon_less_p5(const Monomial& a, const Monomial& b) { return monomial_less(a, b, 5); }
inline bool mon_less_p7(const Monomial& a, const Monomial& b) { return monomial_less(a, b, 7); }

inline bool (*mon_cmp_for(const Int& p))(const Monomial&, const Monomial&) {
    if (p == 2) return &mon_less_p2;
    if (p == 3) return &mon_less_p3;
    if (p == 5) return &mon_less_p5;
    if (p == 7) return &mon_less_p7;
    throw error("unsupported prime (expected one of 2,3,5,7)");
}
}  // namespace detail

inline RingElement::RingElement(RingPtr r) : ring(std::move(r)), terms(detail::mon_cmp_for(ring->p)) {}

// ---------------------------------------------------------------------------
// Descriptor constructors

inline RingPtr ring_integers(Int p = 2) {
    auto d = std::make_shared<RingDescriptor>();
    d->kind = RingKind::Integers;
    d->p = std::move(p);
    return d;
}

inline RingPtr ring_integers_mod(Int m, Int p) {
    if (m <= 1) throw error("IntegersMod: modulus must exceed 1");
    auto d = std::make_shared<RingDescriptor>();
    d->kind = RingKind::IntegersMod;
    d->modulus = std::move(m);
    d->p = std::move(p);
    return d;
}

inline RingPtr ring_plocal(Int p, int denom_cap) {
    if (denom_cap < 0) throw error("PLocalRationals: cap must be explicit and nonnegative");
    auto d = std::make_shared<RingDescriptor>();
    d->kind = RingKind::PLocalRationals;
    d->p = std::move(p);
    d->denom_cap = denom_cap;
    return d;
}

inline RingPtr ring_poly(RingPtr base, std::vector<std::string> vars, std::vector<ExpMonoid> monoids,
                         int denom_cap = 0) {
    if (base->kind == RingKind::Poly || base->kind == RingKind::TruncatedSeries ||
        base->kind == RingKind::Quotient)
        throw error("Poly: coefficients must be a scalar carrier");
    if (vars.empty() || vars.size() != monoids.size()) throw error("Poly: bad variable list");
    auto d = std::make_shared<RingDescriptor>();
    d->kind = RingKind::Poly;
    d->p = base->p;
    d->base = std::move(base);
    d->vars = std::move(vars);
    d->monoids = std::move(monoids);
    d->denom_cap = denom_cap;
    for (auto m : d->monoids)
        if (m == ExpMonoid::PadicNonNeg && d->denom_cap <= 0)
            throw error("Poly: fractional exponents need an explicit denominator cap");
    return d;
}

inline RingPtr ring_poly(RingPtr base, std::vector<std::string> vars, ExpMonoid monoid, int denom_cap = 0) {
    std::vector<ExpMonoid> ms(vars.size(), monoid);
    return ring_poly(std::move(base), std::move(vars), std::move(ms), denom_cap);
}

inline RingPtr ring_series(RingPtr base, std::string var, int precision) {
    if (precision <= 0) throw error("TruncatedSeries: precision must be positive and explicit");
    if (base->kind == RingKind::Poly || base->kind == RingKind::TruncatedSeries ||
        base->kind == RingKind::Quotient)
        throw error("TruncatedSeries: coefficients must be a scalar carrier");
    auto d = std::make_shared<RingDescriptor>();
    d->kind = RingKind::TruncatedSeries;
    d->p = base->p;
    d->base = std::move(base);
    d->svar = std::move(var);
    d->precision = precision;
    return d;
}

RingPtr ring_quotient(RingPtr base, const RingElement& gen);

// ---------------------------------------------------------------------------
// Introspection helpers

inline std::size_t var_count(const RingPtr& r) {
    switch (r->kind) {
        case RingKind::Poly: return r->vars.size();
        case RingKind::TruncatedSeries: return 1;
        case RingKind::Quotient: return var_count(r->base);
        default: return 0;
    }
}

inline RingPtr scalar_base(const RingPtr& r) {
    switch (r->kind) {
        case RingKind::Poly:
        case RingKind::TruncatedSeries: return r->base;
        case RingKind::Quotient: return scalar_base(r->base);
        default: return r;
    }
}

inline bool is_scalar_ring(const RingPtr& r) { return var_count(r) == 0; }

// The underlying Poly/Series layer of a quotient tower.
inline RingPtr poly_layer(const RingPtr& r) { return r->kind == RingKind::Quotient ? r->base : r; }

bool element_equal(const RingElement& a, const RingElement& b);

inline bool ring_equal(const RingPtr& a, const RingPtr& b) {
    if (a == b) return true;
    if (a->kind != b->kind || a->p != b->p) return false;
    switch (a->kind) {
        case RingKind::Integers: return true;
        case RingKind::IntegersMod: return a->modulus == b->modulus;
        case RingKind::PLocalRationals: return a->denom_cap == b->denom_cap;
        case RingKind::Poly:
            return a->vars == b->vars && a->monoids == b->monoids && a->denom_cap == b->denom_cap &&
                   ring_equal(a->base, b->base);
        case RingKind::TruncatedSeries:
            return a->svar == b->svar && a->precision == b->precision && ring_equal(a->base, b->base);
        case RingKind::Quotient:
            return ring_equal(a->base, b->base) && element_equal(*a->qgen, *b->qgen);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Canonicalization of scalar coefficients

namespace detail {

// Canonical coefficient for the scalar base; zero maps to an empty optional.
inline std::optional<Rat> canon_coeff(const Rat& c, const RingPtr& scalars) {
    if (c == 0) return std::nullopt;
    switch (scalars->kind) {
        case RingKind::Integers: {
            if (denominator(c) != 1) throw error("Integers: non-integral coefficient");
            return c;
        }
        case RingKind::IntegersMod: {
            const Int& m = scalars->modulus;
            Int den = denominator(c);
            Int num = numerator(c);
            Int r;
            if (den == 1) {
                r = mod_reduce(num, m);
            } else {
                r = mod_reduce(num * inv_mod(den, m), m);
            }
            if (r == 0) return std::nullopt;
            return Rat(r);
        }
        case RingKind::PLocalRationals: {
            if (valuation(c, scalars->p) < -scalars->denom_cap)
                throw error("PLocalRationals: denominator cap exceeded");
            return c;
        }
        default: throw error("canon_coeff: not a scalar carrier");
    }
}

inline void check_monomial(const Monomial& m, const RingPtr& ring) {
    const RingPtr layer = poly_layer(ring);
    if (layer->kind == RingKind::Poly) {
        if (m.size() != layer->vars.size()) throw error("monomial arity mismatch");
        for (std::size_t i = 0; i < m.size(); ++i) {
            switch (layer->monoids[i]) {
                case ExpMonoid::NonNegInt:
                    if (m[i].denpow != 0 || m[i].num < 0) throw error("exponent not in monoid (nonneg integers)");
                    break;
                case ExpMonoid::AnyInt:
                    if (m[i].denpow != 0) throw error("exponent not in monoid (integers)");
                    break;
                case ExpMonoid::PadicNonNeg:
                    if (m[i].num < 0) throw error("exponent not in monoid (nonneg)");
                    if (m[i].denpow > layer->denom_cap) throw error("exponent denominator cap exceeded");
                    break;
            }
        }
    } else if (layer->kind == RingKind::TruncatedSeries) {
        if (m.size() != 1) throw error("monomial arity mismatch");
        if (m[0].denpow != 0 || m[0].num < 0) throw error("series exponent not a nonnegative integer");
    } else {
        if (!m.empty()) throw error("scalar carrier takes empty monomials");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Element constructors

inline RingElement ring_zero(const RingPtr& r) { return RingElement(r); }

RingElement quotient_reduce_internal(RingElement x);

// Insert-or-add a raw term, canonicalizing the coefficient (no quotient reduction).
inline void add_term(RingElement& x, const Monomial& m, const Rat& c) {
    if (c == 0) return;
    detail::check_monomial(m, x.ring);
    auto it = x.terms.find(m);
    if (it == x.terms.end()) {
        auto cc = detail::canon_coeff(c, scalar_base(x.ring));
        if (cc) x.terms.emplace(m, *cc);
    } else {
        auto cc = detail::canon_coeff(it->second + c, scalar_base(x.ring));
        if (cc)
            it->second = *cc;
        else
            x.terms.erase(it);
    }
}

// Series truncation: drop terms at or above the precision; mark the flag.
inline void apply_series_truncation(RingElement& x) {
    const RingPtr layer = poly_layer(x.ring);
    if (layer->kind != RingKind::TruncatedSeries) return;
    for (auto it = x.terms.begin(); it != x.terms.end();) {
        if (it->first[0].num >= layer->precision) {
            it = x.terms.erase(it);
            x.truncated = true;
        } else {
            ++it;
        }
    }
}

inline RingElement make_element(const RingPtr& r, const std::vector<std::pair<Monomial, Rat>>& terms) {
    RingElement x(r);
    for (auto& [m, c] : terms) add_term(x, m, c);
    apply_series_truncation(x);
    if (r->kind == RingKind::Quotient) return quotient_reduce_internal(std::move(x));
    return x;
}

inline RingElement ring_scalar(const RingPtr& r, const Rat& c) {
    Monomial m(var_count(r));
    return make_element(r, {{m, c}});
}

inline RingElement ring_one(const RingPtr& r) { return ring_scalar(r, 1); }

// Monomial c * var_0^{e_0} ... in the polynomial layer.
inline RingElement ring_monomial(const RingPtr& r, const Monomial& m, const Rat& c = 1) {
    return make_element(r, {{m, c}});
}

inline RingElement ring_var(const RingPtr& r, std::size_t i, long long num = 1, int denpow = 0) {
    Monomial m(var_count(r));
    if (i >= m.size()) throw error("ring_var: index out of range");
    m[i] = pexp_make(num, denpow, detail::small_p(r));
    return ring_monomial(r, m);
}

inline bool is_zero(const RingElement& x) { return x.terms.empty(); }

inline bool element_equal(const RingElement& a, const RingElement& b) {
    if (a.terms.size() != b.terms.size()) return false;
    auto ia = a.terms.begin();
    auto ib = b.terms.begin();
    for (; ia != a.terms.end(); ++ia, ++ib)
        if (ia->first != ib->first || ia->second != ib->second) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Arithmetic

inline RingElement ring_add(const RingElement& a, const RingElement& b) {
    if (!ring_equal(a.ring, b.ring)) throw error("ring_add: descriptor mismatch");
    RingElement x(a.ring);
    x.truncated = a.truncated || b.truncated;
    x.terms = a.terms;
    for (auto& [m, c] : b.terms) {
        auto it = x.terms.find(m);
        if (it == x.terms.end()) {
            x.terms.emplace(m, c);
        } else {
            auto cc = detail::canon_coeff(it->second + c, scalar_base(x.ring));
            if (cc)
                it->second = *cc;
            else
                x.terms.erase(it);
        }
    }
    return x;  // sum of reduced representatives stays reduced; no series growth
}

inline RingElement ring_neg(const RingElement& a) {
    RingElement x(a.ring);
    x.truncated = a.truncated;
    for (auto& [m, c] : a.terms) {
        auto cc = detail::canon_coeff(-c, scalar_base(x.ring));
        if (cc) x.terms.emplace(m, *cc);
    }
    return x;
}

inline RingElement ring_sub(const RingElement& a, const RingElement& b) { return ring_add(a, ring_neg(b)); }

inline RingElement ring_mul(const RingElement& a, const RingElement& b) {
    if (!ring_equal(a.ring, b.ring)) throw error("ring_mul: descriptor mismatch");
    RingElement x(a.ring);
    x.truncated = a.truncated || b.truncated;
    const long long p = detail::small_p(a.ring);
    for (auto& [ma, ca] : a.terms) {
        for (auto& [mb, cb] : b.terms) {
            Monomial m(ma.size());
            for (std::size_t i = 0; i < ma.size(); ++i) m[i] = pexp_add(ma[i], mb[i], p);
            Rat c = ca * cb;
            auto it = x.terms.find(m);
            if (it == x.terms.end()) {
                auto cc = detail::canon_coeff(c, scalar_base(x.ring));
                if (cc) x.terms.emplace(std::move(m), *cc);
            } else {
                auto cc = detail::canon_coeff(it->second + c, scalar_base(x.ring));
                if (cc)
                    it->second = *cc;
                else
                    x.terms.erase(it);
            }
        }
    }
    apply_series_truncation(x);
    if (x.ring->kind == RingKind::Quotient) return quotient_reduce_internal(std::move(x));
    return x;
}

inline RingElement ring_scale(const RingElement& a, const Rat& c) {
    RingElement x(a.ring);
    x.truncated = a.truncated;
    for (auto& [m, v] : a.terms) {
        auto cc = detail::canon_coeff(v * c, scalar_base(x.ring));
        if (cc) x.terms.emplace(m, *cc);
    }
    return x;
}

std::optional<RingElement> try_inverse(const RingElement& x, int iter_cap = 64);

inline RingElement ring_pow(const RingElement& a, long long e) {
    if (e < 0) {
        auto inv = try_inverse(a);
        if (!inv) throw error("ring_pow: negative power of a non-unit");
        return ring_pow(*inv, -e);
    }
    RingElement r = ring_one(a.ring);
    RingElement b = a;
    unsigned long long k = (unsigned long long)e;
    while (k) {
        if (k & 1ull) r = ring_mul(r, b);
        b = (k >>= 1ull) ? ring_mul(b, b) : b;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Quotient reduction (univariate division by a monic-normalizable generator)

namespace detail {

inline PExp leading_exp(const RingElement& x) { return x.terms.rbegin()->first[0]; }

}  // namespace detail

// Quotients are taken by generators that are monic-normalizable in the FIRST
// polynomial variable: the lexicographically leading term is a pure power of
// var 0 with unit scalar coefficient and integral exponent; division then
// eliminates every monomial whose var-0 exponent reaches that degree.
inline RingPtr ring_quotient(RingPtr base, const RingElement& gen) {
    if (base->kind != RingKind::Poly)
        throw error("unsupported-quotient: only polynomial carriers");
    if (!ring_equal(gen.ring, base)) throw error("Quotient: generator not in base carrier");
    if (is_zero(gen)) throw error("Quotient: generator must be nonzero");
    const Monomial& lead = gen.terms.rbegin()->first;
    if (!lead[0].is_integral() || lead[0].num <= 0)
        throw error("unsupported-quotient: generator degree must be a positive integer");
    for (std::size_t i = 1; i < lead.size(); ++i)
        if (!lead[i].is_zero())
            throw error("unsupported-quotient: leading term must be a pure power of the first variable");
    Rat lc = gen.terms.rbegin()->second;
    RingPtr sb = scalar_base(base);
    if (!try_inverse(ring_scalar(sb, lc)))
        throw error("unsupported-quotient: leading coefficient is not a unit");
    auto d = std::make_shared<RingDescriptor>();
    d->kind = RingKind::Quotient;
    d->p = base->p;
    d->base = std::move(base);
    d->qgen = std::make_shared<RingElement>(gen);
    return d;
}

// Canonical representative of x modulo the generator of its quotient carrier.
inline RingElement quotient_reduce_internal(RingElement x) {
    const RingPtr& qr = x.ring;
    if (qr->kind != RingKind::Quotient) return x;
    const RingElement& gen = *qr->qgen;
    const long long p = detail::small_p(qr);
    const long long deg = gen.terms.rbegin()->first[0].num;
    const Rat lc = gen.terms.rbegin()->second;
    RingPtr sb = scalar_base(qr);
    Rat lcinv;
    {
        auto inv = try_inverse(ring_scalar(sb, lc));
        if (!inv) throw error("unsupported-quotient: leading coefficient is not a unit");
        lcinv = inv->terms.begin()->second;
    }
    while (!x.terms.empty()) {
        // the lex order puts the largest var-0 exponent last
        auto top = x.terms.rbegin();
        const Monomial& tm = top->first;
        if (pexp_cmp(tm[0], PExp{deg, 0}, p) < 0) break;
        Rat q = top->second * lcinv;
        Monomial shift = tm;
        shift[0] = pexp_add(tm[0], PExp{-deg, 0}, p);
        // x -= q * T^shift * gen
        for (auto& [gm, gc] : gen.terms) {
            Monomial m(shift.size());
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = pexp_add(gm[i], shift[i], p);
            Rat c = -q * gc;
            auto it = x.terms.find(m);
            if (it == x.terms.end()) {
                auto cc = detail::canon_coeff(c, sb);
                if (cc) x.terms.emplace(std::move(m), *cc);
            } else {
                auto cc = detail::canon_coeff(it->second + c, sb);
                if (cc)
                    it->second = *cc;
                else
                    x.terms.erase(it);
            }
        }
    }
    return x;
}

// Reduce x modulo an explicit generator (x taken in the generator's carrier).
inline RingElement quotient_reduce(const RingElement& x, const RingElement& gen) {
    RingPtr q = ring_quotient(x.ring, gen);
    RingElement y(q);
    y.truncated = x.truncated;
    for (auto& [m, c] : x.terms) y.terms.emplace(m, c);
    return quotient_reduce_internal(std::move(y));
}

// Move an element into a quotient carrier over its current ring.
inline RingElement into_quotient(const RingElement& x, const RingPtr& q) {
    if (!ring_equal(q->base, x.ring)) throw error("into_quotient: base mismatch");
    RingElement y(q);
    y.truncated = x.truncated;
    for (auto& [m, c] : x.terms) y.terms.emplace(m, c);
    return quotient_reduce_internal(std::move(y));
}

// Canonical representative in the base carrier.
inline RingElement from_quotient(const RingElement& x) {
    if (x.ring->kind != RingKind::Quotient) return x;
    RingElement y(x.ring->base);
    y.truncated = x.truncated;
    for (auto& [m, c] : x.terms) y.terms.emplace(m, c);
    return y;
}

// ---------------------------------------------------------------------------
// exact division by p^k

inline RingElement exact_div_p(const RingElement& x, int k) {
    if (k == 0) return x;
    if (k < 0) throw error("exact_div_p: negative exponent");
    RingPtr sb = scalar_base(x.ring);
    Int pk = pow_int(x.ring->p, (unsigned)k);
    RingElement y(x.ring);
    y.truncated = x.truncated;
    for (auto& [m, c] : x.terms) {
        switch (sb->kind) {
            case RingKind::Integers: {
                if (denominator(c) != 1 || numerator(c) % pk != 0)
                    throw divisibility_error("exact_div_p: coefficient not divisible by p^k");
                y.terms.emplace(m, Rat(numerator(c) / pk));
                break;
            }
            case RingKind::IntegersMod: {
                if (numerator(c) % pk != 0)
                    throw divisibility_error("exact_div_p: coefficient not divisible by p^k");
                auto cc = detail::canon_coeff(Rat(numerator(c) / pk), sb);
                if (cc) y.terms.emplace(m, *cc);
                break;
            }
            case RingKind::PLocalRationals: {
                auto cc = detail::canon_coeff(c / Rat(pk), sb);  // cap check inside
                if (cc) y.terms.emplace(m, *cc);
                break;
            }
            default: throw error("exact_div_p: unsupported scalar carrier");
        }
    }
    return y;
}

inline bool p_divides_all(const RingElement& x, int k) {
    Int pk = pow_int(x.ring->p, (unsigned)k);
    for (auto& [m, c] : x.terms) {
        if (denominator(c) != 1) return false;
        if (numerator(c) % pk != 0) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Units

RingElement lift_element(const RingElement& x, const RingPtr& target);
RingElement reduce_element(const RingElement& x, const RingPtr& target);

// Evaluate at vars -> subst_value (0 or 1), reducing the result to the scalar base.
inline Rat augmentation(const RingElement& x, int subst_value) {
    Rat acc = 0;
    for (auto& [m, c] : x.terms) {
        if (subst_value == 0) {
            bool constant = true;
            for (auto& e : m)
                if (!e.is_zero()) constant = false;
            if (constant) acc += c;
        } else {
            acc += c;
        }
    }
    return acc;
}

namespace detail {

// Division with remainder f = q*g + rem in a univariate carrier whose scalar
// base behaves like a field for the visited leading coefficients.
inline std::pair<RingElement, RingElement> poly_divmod(const RingElement& f, const RingElement& g) {
    if (is_zero(g)) throw error("poly_divmod: division by zero");
    const long long p = small_p(f.ring);
    RingElement q(f.ring), rem = f;
    PExp dg = leading_exp(g);
    Rat lg = g.terms.rbegin()->second;
    RingPtr sb = scalar_base(f.ring);
    while (!rem.terms.empty() && pexp_cmp(leading_exp(rem), dg, p) >= 0) {
        PExp e = leading_exp(rem);
        Rat c = rem.terms.rbegin()->second;
        auto lginv = try_inverse(ring_scalar(sb, lg));
        if (!lginv) throw error("poly_divmod: leading coefficient not invertible");
        Rat qc = c * lginv->terms.begin()->second;
        Monomial m(1);
        m[0] = pexp_add(e, pexp_neg(dg), p);
        RingElement t = ring_monomial(f.ring, m, qc);
        q = ring_add(q, t);
        rem = ring_sub(rem, ring_mul(t, g));
    }
    return {q, rem};
}

// Extended gcd in a univariate polynomial ring over a field-like scalar base.
// Returns {g, a, b} with a*f + b*h = g.
inline std::array<RingElement, 3> poly_ext_gcd(RingElement f, RingElement h) {
    RingElement a0 = ring_one(f.ring), a1 = ring_zero(f.ring);
    RingElement b0 = ring_zero(f.ring), b1 = ring_one(f.ring);
    while (!is_zero(h)) {
        auto [q, r] = poly_divmod(f, h);
        RingElement a2 = ring_sub(a0, ring_mul(q, a1));
        RingElement b2 = ring_sub(b0, ring_mul(q, b1));
        f = h;
        h = r;
        a0 = a1;
        a1 = a2;
        b0 = b1;
        b1 = b2;
    }
    return {f, a0, b0};
}

inline bool all_exponents_integral(const RingElement& x) {
    for (auto& [m, c] : x.terms)
        for (auto& e : m)
            if (!e.is_integral()) return false;
    return true;
}

}  // namespace detail

inline std::optional<RingElement> try_inverse(const RingElement& x, int iter_cap) {
    const RingPtr& r = x.ring;
    if (is_zero(x)) return std::nullopt;
    RingPtr sb = scalar_base(r);
    if (is_scalar_ring(r)) {
        const Rat& c = x.terms.begin()->second;
        switch (r->kind) {
            case RingKind::Integers:
                if (c == 1 || c == -1) return ring_scalar(r, c);
                return std::nullopt;
            case RingKind::IntegersMod: {
                Int num = numerator(c);
                Int g, a, b;
                g = ext_gcd(num, r->modulus, a, b);
                if (g != 1) return std::nullopt;
                return ring_scalar(r, Rat(mod_reduce(a, r->modulus)));
            }
            case RingKind::PLocalRationals: {
                if (valuation(c, r->p) != 0) return std::nullopt;
                return ring_scalar(r, Rat(1) / c);
            }
            default: return std::nullopt;
        }
    }

    Monomial cm(var_count(r));
    if (r->kind == RingKind::Poly && x.terms.size() == 1) {
        // a monomial inverts when its coefficient does and every exponent
        // sits in a group monoid (Laurent variable)
        const Monomial& m = x.terms.begin()->first;
        bool laurent_ok = true;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (!m[i].is_zero() && r->monoids[i] != ExpMonoid::AnyInt) laurent_ok = false;
        if (laurent_ok) {
            auto ci = try_inverse(ring_scalar(sb, x.terms.begin()->second));
            if (!ci) return std::nullopt;
            Monomial mi(m.size());
            for (std::size_t i = 0; i < m.size(); ++i) mi[i] = pexp_neg(m[i]);
            return ring_monomial(r, mi, ci->terms.begin()->second);
        }
    }
    if (r->kind == RingKind::Poly || r->kind == RingKind::TruncatedSeries) {
        // unit iff the constant term is a unit and the rest is (topologically) nilpotent
        RingElement tail = x;
        Rat c0 = 0;
        auto it = tail.terms.find(cm);
        if (it != tail.terms.end()) {
            c0 = it->second;
            tail.terms.erase(it);
        }
        auto c0inv = try_inverse(ring_scalar(sb, c0));
        if (!c0inv) return std::nullopt;
        if (r->kind == RingKind::Poly && !is_zero(tail)) {
            // nilpotent tail only over Z/p^N scalars
            if (sb->kind != RingKind::IntegersMod) return std::nullopt;
            for (auto& [m, c] : tail.terms)
                if (numerator(c) % sb->p != 0) return std::nullopt;
        }
        Rat ci = c0inv->terms.begin()->second;
        // geometric series in n = -ci*tail, which is nilpotent / truncated away
        RingElement n = ring_scale(tail, -ci);
        RingElement acc = ring_one(r), pw = ring_one(r);
        for (int i = 0; i < iter_cap; ++i) {
            pw = ring_mul(pw, n);
            if (is_zero(pw)) break;
            acc = ring_add(acc, pw);
        }
        RingElement y = ring_scale(acc, ci);
        if (element_equal(ring_mul(x, y), ring_one(r))) return y;
        return std::nullopt;
    }

    if (r->kind == RingKind::Quotient) {
        const RingElement& gen = *r->qgen;
        if (!detail::all_exponents_integral(x) || !detail::all_exponents_integral(gen))
            throw error("try_inverse: fractional exponents in a quotient carrier");
        if (poly_layer(r)->vars.size() != 1) return std::nullopt;  // no gcd route in several variables
        RingElement xrep = from_quotient(x);
        if (sb->kind == RingKind::PLocalRationals) {
            auto [g, a, b] = detail::poly_ext_gcd(xrep, gen);
            if (g.terms.size() != 1 || !g.terms.begin()->first[0].is_zero()) return std::nullopt;
            auto ginv = try_inverse(ring_scalar(sb, g.terms.begin()->second));
            if (!ginv) return std::nullopt;
            RingElement y = into_quotient(ring_scale(a, ginv->terms.begin()->second), r);
            if (element_equal(ring_mul(x, y), ring_one(r))) return y;
            return std::nullopt;
        }
        if (sb->kind == RingKind::IntegersMod) {
            // invert mod p by extended Euclid over F_p[q], then Hensel-lift
            RingPtr fp_poly = ring_poly(ring_integers_mod(r->p, r->p), poly_layer(r)->vars,
                                        std::vector<ExpMonoid>(poly_layer(r)->vars.size(), ExpMonoid::NonNegInt));
            RingElement xp = reduce_element(xrep, fp_poly);
            RingElement gp = reduce_element(gen, fp_poly);
            auto [g, a, b] = detail::poly_ext_gcd(xp, gp);
            if (g.terms.size() != 1 || !g.terms.begin()->first[0].is_zero()) return std::nullopt;
            auto ginv = try_inverse(ring_scalar(scalar_base(fp_poly), g.terms.begin()->second));
            if (!ginv) return std::nullopt;
            RingElement y = into_quotient(lift_element(ring_scale(a, ginv->terms.begin()->second), r->base), r);
            RingElement two = ring_scalar(r, 2);
            for (int i = 0; i < iter_cap; ++i) {
                RingElement e = ring_mul(x, y);
                if (element_equal(e, ring_one(r))) return y;
                y = ring_mul(y, ring_sub(two, e));
            }
            if (element_equal(ring_mul(x, y), ring_one(r))) return y;
            return std::nullopt;
        }
        // torsion-free quotient carriers: only scalar-like inverses
        if (xrep.terms.size() == 1 && xrep.terms.begin()->first[0].is_zero()) {
            auto ci = try_inverse(ring_scalar(sb, xrep.terms.begin()->second));
            if (ci) return ring_scalar(r, ci->terms.begin()->second);
        }
        return std::nullopt;
    }
    return std::nullopt;
}

inline bool is_unit(const RingElement& x) { return try_inverse(x).has_value(); }

// ---------------------------------------------------------------------------
// Substitution endomorphisms (variable -> image), coefficients fixed

struct Substitution {
    RingPtr ring;
    std::vector<RingElement> images;  // one per polynomial-layer variable
};

inline RingElement subst_apply(const RingElement& x, const Substitution& s) {
    if (!ring_equal(x.ring, s.ring)) throw error("subst: ring mismatch");
    const long long p = detail::small_p(x.ring);
    RingElement acc(x.ring);
    for (auto& [m, c] : x.terms) {
        RingElement term = ring_scalar(x.ring, c);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].is_zero()) continue;
            const RingElement& img = s.images[i];
            if (m[i].is_integral() && m[i].num >= 0) {
                term = ring_mul(term, ring_pow(img, m[i].num));
            } else {
                // fractional or negative power: image must be a single monomial with coefficient 1
                if (img.terms.size() != 1 || img.terms.begin()->second != 1)
                    throw error("subst: fractional power of a non-monomial image");
                const Monomial& im = img.terms.begin()->first;
                Monomial scaled(im.size());
                for (std::size_t j = 0; j < im.size(); ++j) {
                    // exponent = im[j] * m[i]
                    PExp e = pexp_scale_int(im[j], m[i].num, p);
                    e.denpow += m[i].denpow;
                    scaled[j] = pexp_normalize(e.num, e.denpow, p);
                }
                term = ring_mul(term, ring_monomial(x.ring, scaled));
            }
        }
        acc = ring_add(acc, term);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Lifts between torsion rings and their integral shadows

inline RingPtr lift_ring(const RingPtr& r);

inline RingElement lift_element(const RingElement& x, const RingPtr& target) {
    RingElement y(target);
    y.truncated = x.truncated;
    for (auto& [m, c] : x.terms) add_term(y, m, c);
    if (target->kind == RingKind::Quotient) return quotient_reduce_internal(std::move(y));
    return y;
}

inline RingPtr lift_ring(const RingPtr& r) {
    switch (r->kind) {
        case RingKind::Integers:
        case RingKind::PLocalRationals: return r;
        case RingKind::IntegersMod: return ring_integers(r->p);
        case RingKind::Poly: {
            auto d = std::make_shared<RingDescriptor>(*r);
            d->base = lift_ring(r->base);
            return d;
        }
        case RingKind::TruncatedSeries: {
            auto d = std::make_shared<RingDescriptor>(*r);
            d->base = lift_ring(r->base);
            return d;
        }
        case RingKind::Quotient: {
            RingPtr base = lift_ring(r->base);
            return ring_quotient(base, lift_element(*r->qgen, base));
        }
    }
    throw error("lift_ring: unreachable");
}

// Coefficientwise reduction into a target carrier of the same shape.
inline RingElement reduce_element(const RingElement& x, const RingPtr& target) {
    RingElement y(target);
    y.truncated = x.truncated;
    for (auto& [m, c] : x.terms) add_term(y, m, c);
    apply_series_truncation(y);
    if (target->kind == RingKind::Quotient) return quotient_reduce_internal(std::move(y));
    return y;
}

// ---------------------------------------------------------------------------
// Misc helpers

inline RingElement coeff_of(const RingElement& x, const Monomial& m) {
    auto it = x.terms.find(m);
    RingElement c(x.ring);
    if (it != x.terms.end()) c.terms.emplace(it->first, it->second);
    return c;
}

inline std::string to_string(const RingElement& x) {
    if (x.terms.empty()) return "0";
    const RingPtr layer = poly_layer(x.ring);
    std::string out;
    bool first = true;
    for (auto& [m, c] : x.terms) {
        if (!first) out += " + ";
        first = false;
        out += to_string(c);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].is_zero()) continue;
            std::string v = layer->kind == RingKind::Poly ? layer->vars[i] : layer->svar;
            out += "*" + v + "^";
            if (m[i].denpow == 0)
                out += std::to_string(m[i].num);
            else
                out += "(" + std::to_string(m[i].num) + "/p^" + std::to_string(m[i].denpow) + ")";
        }
    }
    return out;
}

}  // namespace pwl
