#pragma once

// Truncated p-typical Witt vectors W_n(R) over any supported carrier.
//
// Arithmetic is driven by the universal structural polynomials (sums,
// products, negations, Frobenius), computed once over the integers by ghost
// recursion with exact division by p-powers and then specialized to the
// carrier. This handles p-torsion carriers (F_p-algebras) uniformly. Where a
// carrier has a torsion-free integral shadow, a ghost-lift route (lift
// coordinates, operate on ghost vectors, invert the ghost map, reduce back)
// is available as an independent oracle and as a fallback beyond the
// symbolic caps.

#include "pwl/ring.hpp"

#include <mutex>
#include <vector>

namespace pwl {

// Practical caps for the symbolic structural polynomials; term blowup is
// exponential in n.
inline int structural_cap(const Int& p) {
    if (p == 2) return 5;
    if (p == 3) return 4;
    if (p == 5) return 3;
    return 2;
}

constexpr std::size_t kStructuralTermCap = 4'000'000;

struct StructuralPolySet {
    Int p;
    int n = 0;
    RingPtr xy_ring;             // Z[x_0..x_{n-1}, y_0..y_{n-1}]
    RingPtr x_ring;              // Z[x_0..x_{n-1}]
    std::vector<RingElement> S;  // sums
    std::vector<RingElement> P;  // products
    std::vector<RingElement> I;  // negations
    std::vector<RingElement> F;  // Frobenius: F_k in x_0..x_{k+1}, length n-1
};

namespace witt_detail {

inline RingElement ghost_poly(const RingPtr& ring, const Int& p, int k, int offset) {
    RingElement acc(ring);
    for (int i = 0; i <= k; ++i) {
        Monomial m(var_count(ring));
        m[offset + i] = PExp{(long long)pow_int(p, (unsigned)(k - i)), 0};
        acc = ring_add(acc, ring_monomial(ring, m, Rat(pow_int(p, (unsigned)i))));
    }
    return acc;
}

inline void check_term_cap(const RingElement& x) {
    if (x.terms.size() > kStructuralTermCap)
        throw cap_error("structural polynomial term count exceeds the resource cap");
}

inline RingElement pow_capped(const RingElement& x, long long e) {
    RingElement r = ring_one(x.ring);
    RingElement b = x;
    unsigned long long k = (unsigned long long)e;
    while (k) {
        if (k & 1ull) {
            r = ring_mul(r, b);
            check_term_cap(r);
        }
        k >>= 1ull;
        if (k) {
            b = ring_mul(b, b);
            check_term_cap(b);
        }
    }
    return r;
}

// Solve the ghost recursion: given target ghost values g_0..g_{n-1} (elements
// of `ring`), produce polynomials c_0..c_{n-1} with w_k(c) = g_k.
inline std::vector<RingElement> ghost_recursion(const std::vector<RingElement>& g, const Int& p) {
    std::vector<RingElement> c;
    for (std::size_t k = 0; k < g.size(); ++k) {
        RingElement acc = g[k];
        for (std::size_t i = 0; i < k; ++i) {
            RingElement t = pow_capped(c[i], (long long)pow_int(p, (unsigned)(k - i)));
            acc = ring_sub(acc, ring_scale(t, Rat(pow_int(p, (unsigned)i))));
        }
        c.push_back(exact_div_p(acc, (int)k));
        check_term_cap(c.back());
    }
    return c;
}

}  // namespace witt_detail

inline const StructuralPolySet& structural_polys(const Int& p, int n) {
    static std::mutex mu;
    static std::map<std::pair<Int, int>, std::shared_ptr<StructuralPolySet>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(p, n);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    if (n < 1) throw error("structural_polys: n must be >= 1");
    if (n > structural_cap(p))
        throw cap_error("structural_polys: length exceeds the practical cap for this prime");

    auto sp = std::make_shared<StructuralPolySet>();
    sp->p = p;
    sp->n = n;
    std::vector<std::string> xv, yv, xyv;
    for (int i = 0; i < n; ++i) xv.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) yv.push_back("y" + std::to_string(i));
    xyv = xv;
    xyv.insert(xyv.end(), yv.begin(), yv.end());
    RingPtr Z = ring_integers(p);
    sp->xy_ring = ring_poly(Z, xyv, ExpMonoid::NonNegInt);
    sp->x_ring = ring_poly(Z, xv, ExpMonoid::NonNegInt);

    std::vector<RingElement> gs, gp, gi, gf;
    for (int k = 0; k < n; ++k) {
        RingElement wx = witt_detail::ghost_poly(sp->xy_ring, p, k, 0);
        RingElement wy = witt_detail::ghost_poly(sp->xy_ring, p, k, n);
        gs.push_back(ring_add(wx, wy));
        gp.push_back(ring_mul(wx, wy));
        gi.push_back(ring_neg(witt_detail::ghost_poly(sp->x_ring, p, k, 0)));
    }
    for (int k = 0; k + 1 < n; ++k) gf.push_back(witt_detail::ghost_poly(sp->x_ring, p, k + 1, 0));
    sp->S = witt_detail::ghost_recursion(gs, p);
    sp->P = witt_detail::ghost_recursion(gp, p);
    sp->I = witt_detail::ghost_recursion(gi, p);
    sp->F = witt_detail::ghost_recursion(gf, p);
    cache.emplace(key, sp);
    return *cache.at(key);
}

// ---------------------------------------------------------------------------

struct WittVector {
    Int p = 2;
    RingPtr base;
    std::vector<RingElement> coords;

    int length() const { return (int)coords.size(); }
};

inline WittVector witt_zero(const Int& p, const RingPtr& base, int n) {
    WittVector w;
    w.p = p;
    w.base = base;
    w.coords.assign((std::size_t)n, ring_zero(base));
    return w;
}

inline WittVector teichmuller(const RingElement& x, int n) {
    WittVector w = witt_zero(x.ring->p, x.ring, n);
    w.coords[0] = x;
    return w;
}

inline WittVector witt_one(const Int& p, const RingPtr& base, int n) {
    return teichmuller(ring_one(base), n);
}

inline bool witt_eq(const WittVector& a, const WittVector& b) {
    if (a.length() != b.length()) return false;
    for (int i = 0; i < a.length(); ++i)
        if (!element_equal(a.coords[i], b.coords[i])) return false;
    return true;
}

inline void check_match(const WittVector& a, const WittVector& b) {
    if (a.p != b.p || a.length() != b.length() || !ring_equal(a.base, b.base))
        throw error("witt: operand mismatch (p, length, base)");
}

namespace witt_detail {

// Evaluate an integer polynomial at the given coordinate values.
inline RingElement specialize(const RingElement& poly, const std::vector<const RingElement*>& vals,
                              const RingPtr& base) {
    // power tables per variable
    std::vector<std::vector<RingElement>> pows(vals.size());
    for (auto& [m, c] : poly.terms)
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].is_zero()) continue;
            auto need = (std::size_t)m[i].num;
            auto& tab = pows[i];
            if (tab.empty()) tab.push_back(ring_one(base));
            while (tab.size() <= need) tab.push_back(ring_mul(tab.back(), *vals[i]));
        }
    RingElement acc(base);
    for (auto& [m, c] : poly.terms) {
        RingElement t = ring_scalar(base, c);
        for (std::size_t i = 0; i < m.size(); ++i)
            if (!m[i].is_zero()) t = ring_mul(t, pows[i][(std::size_t)m[i].num]);
        acc = ring_add(acc, t);
    }
    return acc;
}

}  // namespace witt_detail

inline std::vector<RingElement> ghost(const WittVector& x) {
    std::vector<RingElement> g;
    for (int k = 0; k < x.length(); ++k) {
        RingElement acc(x.base);
        for (int i = 0; i <= k; ++i) {
            RingElement t = ring_pow(x.coords[i], (long long)pow_int(x.p, (unsigned)(k - i)));
            acc = ring_add(acc, ring_scale(t, Rat(pow_int(x.p, (unsigned)i))));
        }
        g.push_back(acc);
    }
    return g;
}

// Inverse of the ghost map over a p-torsion-free carrier; throws
// divisibility_error if the ghost vector violates the integrality congruences.
inline WittVector witt_from_ghost(const std::vector<RingElement>& g, const Int& p, const RingPtr& base) {
    WittVector x;
    x.p = p;
    x.base = base;
    for (std::size_t k = 0; k < g.size(); ++k) {
        RingElement acc = g[k];
        for (std::size_t i = 0; i < k; ++i) {
            RingElement t = ring_pow(x.coords[i], (long long)pow_int(p, (unsigned)(k - i)));
            acc = ring_sub(acc, ring_scale(t, Rat(pow_int(p, (unsigned)i))));
        }
        x.coords.push_back(exact_div_p(acc, (int)k));
    }
    return x;
}

// ---------------------------------------------------------------------------
// Arithmetic: structural specialization (primary) and ghost-lift (oracle)

enum class WittRoute { Structural, GhostLift };

inline bool base_is_torsion_free(const RingPtr& base) {
    RingPtr sb = scalar_base(base);
    return sb->kind == RingKind::Integers || sb->kind == RingKind::PLocalRationals;
}

namespace witt_detail {

inline std::vector<const RingElement*> xy_vals(const WittVector& x, const WittVector& y) {
    std::vector<const RingElement*> v;
    for (auto& c : x.coords) v.push_back(&c);
    for (auto& c : y.coords) v.push_back(&c);
    return v;
}

inline std::vector<const RingElement*> x_vals(const WittVector& x) {
    std::vector<const RingElement*> v;
    for (auto& c : x.coords) v.push_back(&c);
    return v;
}

}  // namespace witt_detail

inline WittVector witt_add_lift(const WittVector& x, const WittVector& y);
inline WittVector witt_mul_lift(const WittVector& x, const WittVector& y);

inline WittVector witt_add(const WittVector& x, const WittVector& y) {
    check_match(x, y);
    int n = x.length();
    if (n > structural_cap(x.p)) {
        if (base_is_torsion_free(x.base) || scalar_base(x.base)->kind == RingKind::IntegersMod)
            return witt_add_lift(x, y);
    }
    const auto& sp = structural_polys(x.p, n);
    WittVector z = witt_zero(x.p, x.base, n);
    auto vals = witt_detail::xy_vals(x, y);
    for (int k = 0; k < n; ++k) z.coords[k] = witt_detail::specialize(sp.S[k], vals, x.base);
    return z;
}

inline WittVector witt_mul(const WittVector& x, const WittVector& y) {
    check_match(x, y);
    int n = x.length();
    if (n > structural_cap(x.p)) {
        if (base_is_torsion_free(x.base) || scalar_base(x.base)->kind == RingKind::IntegersMod)
            return witt_mul_lift(x, y);
    }
    const auto& sp = structural_polys(x.p, n);
    WittVector z = witt_zero(x.p, x.base, n);
    auto vals = witt_detail::xy_vals(x, y);
    for (int k = 0; k < n; ++k) z.coords[k] = witt_detail::specialize(sp.P[k], vals, x.base);
    return z;
}

inline WittVector witt_neg(const WittVector& x) {
    int n = x.length();
    const auto& sp = structural_polys(x.p, n);
    WittVector z = witt_zero(x.p, x.base, n);
    auto vals = witt_detail::x_vals(x);
    for (int k = 0; k < n; ++k) z.coords[k] = witt_detail::specialize(sp.I[k], vals, x.base);
    return z;
}

inline WittVector witt_sub(const WittVector& x, const WittVector& y) { return witt_add(x, witt_neg(y)); }

inline WittVector witt_scalar_int(Int k, const WittVector& x) {
    WittVector acc = witt_zero(x.p, x.base, x.length());
    WittVector b = x;
    bool neg = k < 0;
    if (neg) k = -k;
    while (k > 0) {
        if (k % 2 == 1) acc = witt_add(acc, b);
        k /= 2;
        if (k > 0) b = witt_add(b, b);
    }
    return neg ? witt_neg(acc) : acc;
}

// V: length n -> n+1. Prepends a zero coordinate.
inline WittVector witt_V(const WittVector& x) {
    WittVector z = witt_zero(x.p, x.base, x.length() + 1);
    for (int i = 0; i < x.length(); ++i) z.coords[i + 1] = x.coords[i];
    return z;
}

// R: drop the last coordinate (length n -> n-1).
inline WittVector witt_R(const WittVector& x) {
    if (x.length() < 2) throw error("witt_R: length must be >= 2");
    WittVector z = x;
    z.coords.pop_back();
    return z;
}

inline WittVector witt_F_lift(const WittVector& x);

// F: the unique ghost-shift map W_n -> W_{n-1}, via universal F-polynomials.
inline WittVector witt_F(const WittVector& x) {
    int n = x.length();
    if (n < 2) throw error("witt_F: length must be >= 2");
    if (n > structural_cap(x.p)) {
        if (base_is_torsion_free(x.base) || scalar_base(x.base)->kind == RingKind::IntegersMod)
            return witt_F_lift(x);
    }
    const auto& sp = structural_polys(x.p, n);
    WittVector z = witt_zero(x.p, x.base, n - 1);
    auto vals = witt_detail::x_vals(x);
    for (int k = 0; k + 1 < n; ++k) z.coords[k] = witt_detail::specialize(sp.F[k], vals, x.base);
    return z;
}

inline WittVector witt_V_iter(const WittVector& x, int j) {
    WittVector z = x;
    for (int i = 0; i < j; ++i) z = witt_V(z);
    return z;
}

inline WittVector witt_F_iter(const WittVector& x, int j) {
    WittVector z = x;
    for (int i = 0; i < j; ++i) z = witt_F(z);
    return z;
}

// ---------------------------------------------------------------------------
// Ghost-lift route: lift coordinates to the torsion-free shadow of the
// carrier, operate on ghost vectors there, invert the ghost map, reduce back.
// Over a torsion-free carrier this is exact; over Z/p^N-based carriers it is
// exact as well because the coordinate operations are integer polynomials.

namespace witt_detail {

inline WittVector lift_vector(const WittVector& x, const RingPtr& lifted) {
    WittVector y;
    y.p = x.p;
    y.base = lifted;
    for (auto& c : x.coords) y.coords.push_back(lift_element(c, lifted));
    return y;
}

inline WittVector reduce_vector(const WittVector& x, const RingPtr& target) {
    WittVector y;
    y.p = x.p;
    y.base = target;
    for (auto& c : x.coords) y.coords.push_back(reduce_element(c, target));
    return y;
}

template <typename GhostOp>
inline WittVector ghost_lift_binop(const WittVector& x, const WittVector& y, GhostOp op) {
    check_match(x, y);
    if (base_is_torsion_free(x.base)) {
        auto gx = ghost(x), gy = ghost(y);
        std::vector<RingElement> gz;
        for (int k = 0; k < x.length(); ++k) gz.push_back(op(gx[k], gy[k]));
        return witt_from_ghost(gz, x.p, x.base);
    }
    RingPtr lifted = lift_ring(x.base);
    WittVector lx = lift_vector(x, lifted), ly = lift_vector(y, lifted);
    auto gx = ghost(lx), gy = ghost(ly);
    std::vector<RingElement> gz;
    for (int k = 0; k < x.length(); ++k) gz.push_back(op(gx[k], gy[k]));
    return reduce_vector(witt_from_ghost(gz, x.p, lifted), x.base);
}

}  // namespace witt_detail

inline WittVector witt_add_lift(const WittVector& x, const WittVector& y) {
    return witt_detail::ghost_lift_binop(x, y, [](const RingElement& a, const RingElement& b) {
        return ring_add(a, b);
    });
}

inline WittVector witt_mul_lift(const WittVector& x, const WittVector& y) {
    return witt_detail::ghost_lift_binop(x, y, [](const RingElement& a, const RingElement& b) {
        return ring_mul(a, b);
    });
}

inline WittVector witt_F_lift(const WittVector& x) {
    if (x.length() < 2) throw error("witt_F: length must be >= 2");
    auto shift = [&](const WittVector& lx) {
        auto g = ghost(lx);
        g.erase(g.begin());
        return g;
    };
    if (base_is_torsion_free(x.base)) return witt_from_ghost(shift(x), x.p, x.base);
    RingPtr lifted = lift_ring(x.base);
    WittVector lx = witt_detail::lift_vector(x, lifted);
    return witt_detail::reduce_vector(witt_from_ghost(shift(lx), x.p, lifted), x.base);
}

inline WittVector witt_neg_lift(const WittVector& x) {
    auto negg = [&](const WittVector& lx) {
        auto g = ghost(lx);
        for (auto& v : g) v = ring_neg(v);
        return g;
    };
    if (base_is_torsion_free(x.base)) return witt_from_ghost(negg(x), x.p, x.base);
    RingPtr lifted = lift_ring(x.base);
    WittVector lx = witt_detail::lift_vector(x, lifted);
    return witt_detail::reduce_vector(witt_from_ghost(negg(lx), x.p, lifted), x.base);
}

}  // namespace pwl
