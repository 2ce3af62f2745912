#pragma once

// Delta-rings, Frobenius lifts, distinguished elements, and the four prism
// model presets (crystalline, q-de Rham, free-over-universal with truncated
// delta words, and perfect characteristic p). The delta map is derived from
// the Frobenius lift via exact division by p, computed on a torsion-free
// shadow where one exists and at the carrier precision otherwise.

#include "pwl/linalg.hpp"
#include "pwl/ring.hpp"
#include "pwl/witt.hpp"

#include <functional>
#include <optional>
#include <string>

namespace pwl {

struct DeltaRing {
    RingPtr carrier;
    RingPtr lift;  // torsion-free shadow; null when delta works at carrier precision
    Int p = 2;
    int N = 0;  // coefficient precision exponent of the carrier (0 = exact)
    std::function<RingElement(const RingElement&)> phi;
    std::function<RingElement(const RingElement&)> phi_on_lift;

    RingElement apply_phi(const RingElement& x) const { return phi(x); }

    // delta(x) = (phi(x) - x^p) / p. Exact over the lift; over a Z/p^N
    // carrier the value is canonical but only pinned mod p^{N-1}.
    RingElement delta(const RingElement& x) const {
        long long pp = (long long)p;
        if (phi_on_lift && lift) {
            RingElement xl = lift_element(x, lift);
            RingElement num = ring_sub(phi_on_lift(xl), ring_pow(xl, pp));
            return reduce_element(exact_div_p(num, 1), carrier);
        }
        RingElement num = ring_sub(phi(x), ring_pow(x, pp));
        return exact_div_p(num, 1);
    }
};

// Build a delta-ring from a Frobenius lift on a p-torsion-free carrier,
// checking phi(x) = x^p mod p on the generators.
inline DeltaRing delta_from_lift(const RingPtr& ring, const Substitution& phi_sub) {
    if (!base_is_torsion_free(ring)) throw error("delta_from_lift: carrier must be p-torsion-free");
    for (std::size_t i = 0; i < phi_sub.images.size(); ++i) {
        RingElement v = ring_var(ring, i);
        RingElement diff = ring_sub(phi_sub.images[i], ring_pow(v, (long long)ring->p));
        if (!p_divides_all(diff, 1)) throw error("delta_from_lift: phi is not a Frobenius lift");
    }
    DeltaRing dr;
    dr.carrier = ring;
    dr.p = ring->p;
    dr.N = 0;
    dr.phi = [phi_sub](const RingElement& x) { return subst_apply(x, phi_sub); };
    dr.lift = nullptr;
    dr.phi_on_lift = nullptr;
    // exact carrier: delta computes in place
    DeltaRing out = dr;
    out.lift = ring;
    out.phi_on_lift = dr.phi;
    return out;
}

inline DeltaRing delta_identity_on_integers(Int p) {
    RingPtr Z = ring_integers(p);
    DeltaRing dr;
    dr.carrier = Z;
    dr.lift = Z;
    dr.p = std::move(p);
    dr.N = 0;
    dr.phi = [](const RingElement& x) { return x; };
    dr.phi_on_lift = dr.phi;
    return dr;
}

// ---------------------------------------------------------------------------
// Prism models

enum class PrismPreset { Crystalline, QDeRham, FreeOverUniversal, CharpPerfect };

inline std::string preset_name(PrismPreset p) {
    switch (p) {
        case PrismPreset::Crystalline: return "crystalline";
        case PrismPreset::QDeRham: return "q-deRham";
        case PrismPreset::FreeOverUniversal: return "free-over-universal";
        case PrismPreset::CharpPerfect: return "charp-perfect";
    }
    return "?";
}

struct PrismModel {
    PrismPreset preset;
    Int p = 2;
    int N = 4;          // coefficient precision p^N
    int series_cut = 8; // series precision for unit tests / membership solving
    DeltaRing dr;       // carrier-level data (unused for charp-perfect)
    RingElement d;      // orientation
    // charp-perfect: the perfectoid base B = F_p[t^{1/p^depth}]
    RingPtr charp_base;
    int charp_depth = 0;

    PrismModel() : d(ring_integers(2)) {}
};

// [m]_q = 1 + q + ... + q^{m-1} in a carrier whose first variable is q.
inline RingElement q_analog(const RingPtr& R, long long m) {
    RingElement x(R);
    for (long long e = 0; e < m; ++e) {
        Monomial mo(var_count(R));
        mo[0] = PExp{e, 0};
        add_term(x, mo, 1);
    }
    return x;
}

inline PrismModel make_crystalline_prism(Int p, int N) {
    PrismModel P;
    P.preset = PrismPreset::Crystalline;
    P.p = p;
    P.N = N;
    RingPtr A = ring_integers_mod(pow_int(p, (unsigned)N), p);
    DeltaRing dr;
    dr.carrier = A;
    dr.lift = ring_integers(p);
    dr.p = p;
    dr.N = N;
    dr.phi = [](const RingElement& x) { return x; };
    dr.phi_on_lift = [](const RingElement& x) { return x; };
    P.dr = dr;
    P.d = ring_scalar(A, Rat(p));
    return P;
}

inline PrismModel make_qdr_prism(Int p, int N, int series_cut) {
    PrismModel P;
    P.preset = PrismPreset::QDeRham;
    P.p = p;
    P.N = N;
    P.series_cut = series_cut;
    RingPtr A = ring_poly(ring_integers_mod(pow_int(p, (unsigned)N), p), {"q"}, ExpMonoid::NonNegInt);
    RingPtr L = ring_poly(ring_integers(p), {"q"}, ExpMonoid::NonNegInt);
    Substitution sub{A, {ring_monomial(A, {PExp{(long long)p, 0}})}};
    Substitution subL{L, {ring_monomial(L, {PExp{(long long)p, 0}})}};
    DeltaRing dr;
    dr.carrier = A;
    dr.lift = L;
    dr.p = p;
    dr.N = N;
    dr.phi = [sub](const RingElement& x) { return subst_apply(x, sub); };
    dr.phi_on_lift = [subL](const RingElement& x) { return subst_apply(x, subL); };
    P.dr = dr;
    P.d = q_analog(A, (long long)p);
    return P;
}

// Truncated model of the universal oriented prism: delta words d_k = delta^k(d)
// are independent variables for k <= word_cap, with phi(d_k) = d_k^p + p d_{k+1}
// and delta(d_{word_cap}) truncated to zero; delta(d)^{-1} exists because d_1
// is a Laurent variable. An optional free variable t (with delta(t) = 0)
// provides a generic element.
inline PrismModel make_universal_prism(Int p, int N, int word_cap, bool with_t = true) {
    PrismModel P;
    P.preset = PrismPreset::FreeOverUniversal;
    P.p = p;
    P.N = N;
    std::vector<std::string> vars;
    std::vector<ExpMonoid> mono;
    for (int k = 0; k <= word_cap; ++k) {
        vars.push_back("d" + std::to_string(k));
        mono.push_back(k == 1 ? ExpMonoid::AnyInt : ExpMonoid::NonNegInt);
    }
    if (with_t) {
        vars.push_back("t");
        mono.push_back(ExpMonoid::NonNegInt);
    }
    RingPtr A = ring_poly(ring_integers_mod(pow_int(p, (unsigned)N), p), vars, mono);
    long long pp = (long long)p;

    // images of the generators under phi
    auto images = std::make_shared<std::vector<RingElement>>();
    for (int k = 0; k < (int)vars.size(); ++k) {
        RingElement img = ring_pow(ring_var(A, (std::size_t)k), pp);
        if (k < word_cap)
            img = ring_add(img, ring_scale(ring_var(A, (std::size_t)k + 1), Rat(p)));
        images->push_back(img);
    }
    // phi(d1^{-1}) as a geometric series mod p^N
    RingElement inv_phi_d1(A);
    {
        RingElement d1invp = ring_monomial(A, [&] {
            Monomial m(vars.size());
            m[1] = PExp{-pp, 0};
            return m;
        }());
        RingElement core(A);
        if (word_cap >= 2) {
            core = ring_scale(ring_mul(ring_var(A, 2), d1invp), Rat(p));  // p d2 d1^{-p}
        }
        RingElement acc = ring_one(A), pw = ring_one(A);
        for (int j = 1; j < N + 1; ++j) {
            pw = ring_mul(pw, ring_neg(core));
            if (is_zero(pw)) break;
            acc = ring_add(acc, pw);
        }
        inv_phi_d1 = ring_mul(d1invp, acc);
    }
    auto phi_fn = [A, images, inv_phi_d1, pp](const RingElement& x) {
        RingElement out(A);
        for (auto& [m, c] : x.terms) {
            RingElement t = ring_scalar(A, c);
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (m[i].is_zero()) continue;
                if (!m[i].is_integral()) throw error("universal prism: fractional exponent");
                long long e = m[i].num;
                if (e > 0)
                    t = ring_mul(t, ring_pow((*images)[i], e));
                else
                    t = ring_mul(t, ring_pow(inv_phi_d1, -e));  // only d1 is Laurent
            }
            out = ring_add(out, t);
        }
        return out;
    };
    DeltaRing dr;
    dr.carrier = A;
    dr.lift = nullptr;  // delta computed at carrier precision (mod p^{N-1})
    dr.p = p;
    dr.N = N;
    dr.phi = phi_fn;
    dr.phi_on_lift = nullptr;
    P.dr = dr;
    P.d = ring_var(A, 0);
    return P;
}

inline PrismModel make_charp_prism(Int p, int depth) {
    PrismModel P;
    P.preset = PrismPreset::CharpPerfect;
    P.p = p;
    P.N = 1;
    P.charp_depth = depth;
    P.charp_base = ring_poly(ring_integers_mod(p, p), {"t"}, ExpMonoid::PadicNonNeg, depth);
    DeltaRing dr;
    dr.carrier = P.charp_base;
    dr.p = p;
    dr.N = 1;
    P.dr = dr;
    P.d = ring_scalar(P.charp_base, Rat(p));  // placeholder: d = p lives on the Witt side
    return P;
}

// The residue ring A/d of the model.
inline RingPtr prism_residue_ring(const PrismModel& P) {
    switch (P.preset) {
        case PrismPreset::Crystalline: return ring_integers_mod(P.p, P.p);
        case PrismPreset::QDeRham: return ring_quotient(P.dr.carrier, P.d);
        case PrismPreset::FreeOverUniversal: return ring_quotient(P.dr.carrier, P.d);
        case PrismPreset::CharpPerfect: return P.charp_base;
    }
    throw error("prism_residue_ring: unreachable");
}

// ---------------------------------------------------------------------------
// Distinguished elements

struct DistinguishedReport {
    bool distinguished = false;
    std::optional<RingElement> delta_d;
    std::optional<RingElement> inverse;  // certificate, in the view ring
    std::string view;                    // where the unit test ran
};

// Translate a polynomial in q into the (q-1)-adic series view.
inline RingElement to_series_view(const RingElement& x, const RingPtr& series) {
    RingElement u = ring_var(series, 0);
    RingElement onepu = ring_add(ring_one(series), u);
    RingElement acc(series);
    for (auto& [m, c] : x.terms) {
        if (!m[0].is_integral() || m[0].num < 0) throw error("series view: exponent not a nonneg integer");
        acc = ring_add(acc, ring_scale(ring_pow(onepu, m[0].num), c));
    }
    return acc;
}

inline DistinguishedReport is_distinguished(const DeltaRing& dr, const RingElement& d, int series_cut = 8) {
    DistinguishedReport rep;
    RingElement dd = dr.delta(d);
    rep.delta_d = dd;
    if (is_scalar_ring(dr.carrier) || poly_layer(dr.carrier)->kind != RingKind::Poly) {
        auto inv = try_inverse(dd);
        rep.distinguished = inv.has_value();
        rep.inverse = inv;
        rep.view = "carrier";
        return rep;
    }
    // polynomial carriers: if delta(d) inverts in place (Laurent monomials,
    // nilpotent tails), accept; otherwise run the unit test in the
    // (q-1)-adic series view, where the carrier is actually complete
    if (auto inv = try_inverse(dd)) {
        rep.distinguished = true;
        rep.inverse = inv;
        rep.view = "carrier";
        return rep;
    }
    if (poly_layer(dr.carrier)->vars.size() == 1) {
        RingPtr series = ring_series(scalar_base(dr.carrier), "u", series_cut);
        RingElement sv = to_series_view(dd, series);
        auto inv = try_inverse(sv);
        rep.distinguished = inv.has_value();
        rep.inverse = inv;
        rep.view = "series(q-1), precision " + std::to_string(series_cut);
        return rep;
    }
    rep.distinguished = false;
    rep.view = "carrier";
    return rep;
}

// Certificate that p lies in (d, phi(d)).
struct OrientationCertificate {
    bool holds = false;
    std::string note;
};

inline OrientationCertificate check_p_in_ideal(const PrismModel& P) {
    OrientationCertificate cert;
    long long pp = (long long)P.p;
    switch (P.preset) {
        case PrismPreset::Crystalline:
        case PrismPreset::CharpPerfect: {
            cert.holds = true;
            cert.note = "d = p";
            return cert;
        }
        case PrismPreset::FreeOverUniversal: {
            // p = d1^{-1} (phi(d0) - d0^p): split as a*d + b*phi(d)
            const auto& A = P.dr.carrier;
            RingElement d1inv = *try_inverse(P.dr.delta(P.d));
            RingElement a = ring_neg(ring_mul(d1inv, ring_pow(P.d, pp - 1)));
            RingElement b = d1inv;
            RingElement lhs = ring_add(ring_mul(a, P.d), ring_mul(b, P.dr.apply_phi(P.d)));
            cert.holds = element_equal(lhs, ring_scalar(A, Rat(P.p)));
            cert.note = "closed-form certificate";
            return cert;
        }
        case PrismPreset::QDeRham: {
            // solve a*d + b*phi(d) = p in the series view mod u^cut
            int cut = P.series_cut;
            RingPtr series = ring_series(scalar_base(P.dr.carrier), "u", cut);
            RingElement ds = to_series_view(P.d, series);
            RingElement fs = to_series_view(P.dr.apply_phi(P.d), series);
            Int modulus = pow_int(P.p, (unsigned)P.N);
            // unknowns: coefficients of a and b (cut each); equations: cut
            IntMatrixModPN M((std::size_t)cut, (std::size_t)(2 * cut), P.p, P.N);
            auto put = [&](const RingElement& g, std::size_t col_base) {
                for (int j = 0; j < cut; ++j) {
                    // multiplying by u^j shifts coefficients
                    for (auto& [m, c] : g.terms) {
                        long long e = m[0].num + j;
                        if (e < cut) M.set((std::size_t)e, col_base + (std::size_t)j,
                                           mod_reduce(numerator(c), modulus));
                    }
                }
            };
            put(ds, 0);
            put(fs, (std::size_t)cut);
            std::vector<Int> rhs((std::size_t)cut, 0);
            rhs[0] = P.p;
            auto sol = howell_solve(M, rhs);
            cert.holds = sol.has_value();
            cert.note = "series solve at precision u^" + std::to_string(cut);
            return cert;
        }
    }
    throw error("check_p_in_ideal: unreachable");
}

// ---------------------------------------------------------------------------
// Iterated Frobenius-twist products d_n = d phi(d) ... phi^{n-1}(d)

struct PhiProductQuotient {
    int level = 0;
    RingElement generator;  // d_n in the carrier
    RingPtr ring;           // quotient carrier (null for charp-perfect)

    PhiProductQuotient() : generator(ring_integers(2)) {}
};

inline PhiProductQuotient phi_twist_product(const PrismModel& P, int n) {
    if (n < 0) throw error("phi_twist_product: negative level");
    PhiProductQuotient Q;
    Q.level = n;
    if (P.preset == PrismPreset::CharpPerfect) {
        Q.generator = ring_scalar(P.charp_base, Rat(pow_int(P.p, (unsigned)n)));  // p^n (vanishes mod p)
        Q.ring = nullptr;  // the quotient lives on the Witt side: W(B)/p^n = W_n(B)
        return Q;
    }
    const auto& A = P.dr.carrier;
    RingElement acc = ring_one(A);
    RingElement cur = P.d;
    for (int i = 0; i < n; ++i) {
        acc = ring_mul(acc, cur);
        if (i + 1 < n) cur = P.dr.apply_phi(cur);
    }
    Q.generator = acc;
    if (P.preset == PrismPreset::Crystalline) {
        if (n == 0) {
            Q.ring = nullptr;  // d_0 = 1: the zero ring
        } else {
            Q.ring = ring_integers_mod(pow_int(P.p, (unsigned)n), P.p);
        }
        return Q;
    }
    if (P.preset == PrismPreset::QDeRham) {
        // telescoping: d_n = [p^n]_q
        RingElement expect = q_analog(A, (long long)pow_int(P.p, (unsigned)n));
        if (!element_equal(acc, expect))
            throw error("phi_twist_product: q-analog telescoping failed");
    }
    Q.ring = n == 0 ? nullptr : ring_quotient(A, Q.generator);
    return Q;
}

}  // namespace pwl
