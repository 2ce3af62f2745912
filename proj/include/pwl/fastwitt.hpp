#pragma once

// Dense fixed-width engine for Witt arithmetic over carriers of the shape
// (Z/p^N)[z]/(monic generator). Coordinate operations are universal integer
// polynomials, so they can be evaluated through ghost coordinates at a
// working modulus p^K with K = N + n + 1; every division by p^k in the
// ghost inversion is then exact at the working precision and the result is
// correct mod p^N. Validated against the structural-polynomial route in the
// test suite.

#include "pwl/numeric.hpp"
#include "pwl/ring.hpp"

#include <cstdint>
#include <vector>

namespace pwl::fw {

using u64 = std::uint64_t;
using Dense = std::vector<u64>;

struct Carrier {
    long long p = 2;
    int N = 1;        // canonical coefficient precision p^N
    int dim = 1;      // z^dim reduces via rho
    Dense rho;        // z^dim = sum_j rho[j] z^j (coefficients mod p^maxK)
    int maxK = 60;    // largest supported working exponent

    u64 mod_at(int K) const {
        u64 m = 1;
        for (int i = 0; i < K; ++i) m *= (u64)p;
        return m;
    }
};

inline Carrier make_carrier(long long p, int N, int dim, const std::vector<long long>& rho_signed) {
    Carrier c;
    c.p = p;
    c.N = N;
    c.dim = dim;
    c.maxK = p == 2 ? 60 : (p == 3 ? 37 : 25);
    u64 big = c.mod_at(c.maxK);
    c.rho.assign((std::size_t)dim, 0);
    for (std::size_t j = 0; j < rho_signed.size(); ++j) {
        long long v = rho_signed[j] % (long long)big;
        if (v < 0) v += (long long)big;
        c.rho[j] = (u64)v;
    }
    return c;
}

// carrier for (Z/p^N)[z]/(z^dim + 1)
inline Carrier carrier_cyclo(long long p, int N, int dim) {
    std::vector<long long> rho((std::size_t)dim, 0);
    rho[0] = -1;
    return make_carrier(p, N, dim, rho);
}

// carrier for (Z/p^N)[z]/(z^dim): a truncation window
inline Carrier carrier_window(long long p, int N, int dim) {
    return make_carrier(p, N, dim, std::vector<long long>((std::size_t)dim, 0));
}

inline Dense dense_zero(const Carrier& c) { return Dense((std::size_t)c.dim, 0); }

inline Dense dense_scalar(const Carrier& c, u64 v, u64 M) {
    Dense d = dense_zero(c);
    d[0] = v % M;
    return d;
}

inline Dense dense_monomial(const Carrier& c, int i, u64 coeff, u64 M) {
    Dense d = dense_zero(c);
    d[(std::size_t)i % (std::size_t)c.dim] = coeff % M;  // caller keeps i < dim
    return d;
}

inline Dense dense_add(const Carrier& c, const Dense& a, const Dense& b, u64 M) {
    Dense r((std::size_t)c.dim);
    for (int i = 0; i < c.dim; ++i) r[(std::size_t)i] = (a[(std::size_t)i] + b[(std::size_t)i]) % M;
    return r;
}

inline Dense dense_sub(const Carrier& c, const Dense& a, const Dense& b, u64 M) {
    Dense r((std::size_t)c.dim);
    for (int i = 0; i < c.dim; ++i)
        r[(std::size_t)i] = (a[(std::size_t)i] + M - b[(std::size_t)i] % M) % M;
    return r;
}

inline Dense dense_scale(const Carrier& c, const Dense& a, u64 s, u64 M) {
    Dense r((std::size_t)c.dim);
    for (int i = 0; i < c.dim; ++i) r[(std::size_t)i] = (unsigned __int128)a[(std::size_t)i] * s % M;
    return r;
}

inline Dense dense_mul(const Carrier& c, const Dense& a, const Dense& b, u64 M) {
    std::size_t dim = (std::size_t)c.dim;
    std::vector<unsigned __int128> acc(2 * dim - 1, 0);
    for (std::size_t i = 0; i < dim; ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < dim; ++j) {
            if (b[j] == 0) continue;
            acc[i + j] += (unsigned __int128)(a[i] % M) * (b[j] % M);
        }
    }
    // fold degrees >= dim using z^dim = rho(z)
    for (std::size_t e = 2 * dim - 2; e >= dim && e < 2 * dim; --e) {
        unsigned __int128 v = acc[e] % M;
        if (v == 0) continue;
        acc[e] = 0;
        for (std::size_t j = 0; j < dim; ++j) {
            if (c.rho[j] == 0) continue;
            acc[e - dim + j] += v * (c.rho[j] % M);
        }
    }
    Dense r(dim);
    for (std::size_t i = 0; i < dim; ++i) r[i] = (u64)(acc[i] % M);
    return r;
}

inline Dense dense_pow(const Carrier& c, Dense b, unsigned long long e, u64 M) {
    Dense r = dense_scalar(c, 1, M);
    while (e) {
        if (e & 1ull) r = dense_mul(c, r, b, M);
        e >>= 1ull;
        if (e) b = dense_mul(c, b, b, M);
    }
    return r;
}

inline bool dense_eq(const Dense& a, const Dense& b) { return a == b; }

inline Dense dense_reduce(const Dense& a, u64 M) {
    Dense r = a;
    for (auto& v : r) v %= M;
    return r;
}

// Frobenius x -> x^p of the residue carrier mod p (exponent map on the basis;
// prime-field coefficients are fixed). Valid only at M = p.
inline Dense dense_frob_modp(const Carrier& c, const Dense& a) {
    std::size_t dim = (std::size_t)c.dim;
    u64 M = (u64)c.p;
    std::vector<unsigned __int128> acc(2 * dim - 1, 0);
    // compute a(z)^p as a(z^p) mod p, then fold
    Dense az(dim * 2 - 1, 0);
    std::vector<unsigned __int128> wide((std::size_t)(c.dim - 1) * (std::size_t)c.p + 1, 0);
    for (std::size_t i = 0; i < dim; ++i)
        if (a[i]) wide[i * (std::size_t)c.p] += a[i] % M;
    for (std::size_t e = wide.size(); e-- > dim;) {
        unsigned __int128 v = wide[e] % M;
        if (v == 0) continue;
        wide[e] = 0;
        for (std::size_t j = 0; j < dim; ++j)
            if (c.rho[j]) wide[e - dim + j] += v * (c.rho[j] % M);
    }
    Dense r(dim);
    for (std::size_t i = 0; i < dim; ++i) r[i] = (u64)(wide[i] % M);
    return r;
}

// ---------------------------------------------------------------------------
// Witt vectors over the dense carrier (coordinates canonical mod p^N).

struct WittVec {
    int n = 0;
    std::vector<Dense> coords;
};

inline WittVec wzero(const Carrier& c, int n) {
    WittVec w;
    w.n = n;
    w.coords.assign((std::size_t)n, dense_zero(c));
    return w;
}

inline WittVec wteich(const Carrier& c, const Dense& x, int n) {
    WittVec w = wzero(c, n);
    w.coords[0] = dense_reduce(x, c.mod_at(c.N));
    return w;
}

inline bool weq(const WittVec& a, const WittVec& b) { return a.n == b.n && a.coords == b.coords; }

inline int working_K(const Carrier& c, int n) {
    int K = c.N + n + 1;
    if (K > c.maxK) throw cap_error("fastwitt: working precision exceeds the carrier bound");
    return K;
}

inline std::vector<Dense> wghost(const Carrier& c, const WittVec& x, int K) {
    u64 M = c.mod_at(K);
    std::vector<Dense> g;
    for (int k = 0; k < x.n; ++k) {
        Dense acc = dense_zero(c);
        u64 pi = 1;
        for (int i = 0; i <= k; ++i) {
            unsigned long long e = 1;
            for (int t = 0; t < k - i; ++t) e *= (unsigned long long)c.p;
            Dense term = dense_pow(c, x.coords[(std::size_t)i], e, M);
            acc = dense_add(c, acc, dense_scale(c, term, pi, M), M);
            pi *= (u64)c.p;
        }
        g.push_back(acc);
    }
    return g;
}

inline WittVec wfrom_ghost(const Carrier& c, const std::vector<Dense>& g, int K) {
    u64 M = c.mod_at(K);
    WittVec x;
    x.n = (int)g.size();
    for (std::size_t k = 0; k < g.size(); ++k) {
        Dense acc = dense_reduce(g[k], M);
        u64 pi = 1;
        for (std::size_t i = 0; i < k; ++i) {
            unsigned long long e = 1;
            for (std::size_t t = 0; t < k - i; ++t) e *= (unsigned long long)c.p;
            Dense term = dense_pow(c, x.coords[i], e, M);
            acc = dense_sub(c, acc, dense_scale(c, term, pi, M), M);
            pi *= (u64)c.p;
        }
        // exact division by p^k at the working precision
        u64 pk = 1;
        for (std::size_t t = 0; t < k; ++t) pk *= (u64)c.p;
        Dense q((std::size_t)c.dim);
        for (int i = 0; i < c.dim; ++i) {
            if (acc[(std::size_t)i] % pk != 0)
                throw divisibility_error("fastwitt: ghost vector violates the integrality congruences");
            q[(std::size_t)i] = acc[(std::size_t)i] / pk;
        }
        x.coords.push_back(q);
    }
    return x;
}

inline WittVec wcanon(const Carrier& c, WittVec x) {
    u64 Mn = c.mod_at(c.N);
    for (auto& d : x.coords)
        for (auto& v : d) v %= Mn;
    return x;
}

template <typename Op>
inline WittVec wbinop(const Carrier& c, const WittVec& a, const WittVec& b, Op op) {
    if (a.n != b.n) throw error("fastwitt: length mismatch");
    int K = working_K(c, a.n);
    u64 M = c.mod_at(K);
    auto ga = wghost(c, a, K), gb = wghost(c, b, K);
    std::vector<Dense> gc;
    for (int k = 0; k < a.n; ++k) gc.push_back(op(ga[(std::size_t)k], gb[(std::size_t)k], M));
    return wcanon(c, wfrom_ghost(c, gc, K));
}

inline WittVec wadd(const Carrier& c, const WittVec& a, const WittVec& b) {
    return wbinop(c, a, b, [&](const Dense& x, const Dense& y, u64 M) { return dense_add(c, x, y, M); });
}

inline WittVec wsub(const Carrier& c, const WittVec& a, const WittVec& b) {
    return wbinop(c, a, b, [&](const Dense& x, const Dense& y, u64 M) { return dense_sub(c, x, y, M); });
}

inline WittVec wmul(const Carrier& c, const WittVec& a, const WittVec& b) {
    return wbinop(c, a, b, [&](const Dense& x, const Dense& y, u64 M) { return dense_mul(c, x, y, M); });
}

inline WittVec wneg(const Carrier& c, const WittVec& a) {
    int K = working_K(c, a.n);
    u64 M = c.mod_at(K);
    auto g = wghost(c, a, K);
    for (auto& v : g) v = dense_sub(c, dense_zero(c), v, M);
    return wcanon(c, wfrom_ghost(c, g, K));
}

inline WittVec wscale_int(const Carrier& c, long long s, const WittVec& a) {
    int K = working_K(c, a.n);
    u64 M = c.mod_at(K);
    u64 sv = (u64)((s % (long long)M + (long long)M) % (long long)M);
    auto g = wghost(c, a, K);
    for (auto& v : g) v = dense_scale(c, v, sv, M);
    return wcanon(c, wfrom_ghost(c, g, K));
}

inline WittVec wV(const Carrier& c, const WittVec& a) {
    WittVec r = wzero(c, a.n + 1);
    for (int i = 0; i < a.n; ++i) r.coords[(std::size_t)i + 1] = a.coords[(std::size_t)i];
    return r;
}

inline WittVec wR(const Carrier& c, const WittVec& a, int drop = 1) {
    (void)c;
    if (a.n - drop < 1) throw error("fastwitt: truncation below length 1");
    WittVec r = a;
    for (int i = 0; i < drop; ++i) r.coords.pop_back();
    r.n = a.n - drop;
    return r;
}

// F via ghost shift.
inline WittVec wF(const Carrier& c, const WittVec& a) {
    if (a.n < 2) throw error("fastwitt: F needs length >= 2");
    int K = working_K(c, a.n);
    auto g = wghost(c, a, K);
    g.erase(g.begin());
    return wcanon(c, wfrom_ghost(c, g, K));
}

// Teichmuller scaling [b] * x: coordinatewise (b^{p^i} x_i).
inline WittVec wteich_scale(const Carrier& c, const Dense& b, const WittVec& a) {
    int K = working_K(c, a.n);
    u64 M = c.mod_at(K);
    WittVec r = wzero(c, a.n);
    Dense bp = dense_reduce(b, M);
    for (int i = 0; i < a.n; ++i) {
        r.coords[(std::size_t)i] = dense_mul(c, bp, a.coords[(std::size_t)i], M);
        if (i + 1 < a.n) bp = dense_pow(c, bp, (unsigned long long)c.p, M);
    }
    return wcanon(c, r);
}

}  // namespace pwl::fw
