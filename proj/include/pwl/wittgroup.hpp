#pragma once

// Additive-subgroup machinery for truncated Witt vectors over dense carriers.
//
// A subgroup H of (W_n(A), +) with A = (Z/p^N)[z]/(g) is filtered by
// H ∩ V^j W; the graded pieces embed into A, where Witt addition becomes
// plain module addition. Generators are echelonized level by level with
// Howell-style closure (annihilator multiples re-enqueued), giving the order
// of H, a per-level pivot profile, and membership tests with certificates.
// Pivot elements can carry "shadow" preimages in a second Witt group so that
// membership certificates double as preimage solutions for additive maps.

#include "pwl/fastwitt.hpp"

#include <deque>
#include <optional>

namespace pwl {

struct SpanElem {
    fw::WittVec main;                  // element of W_n(A_main), V^level-peeled
    std::optional<fw::WittVec> shadow; // mirrored element of W_m(A_shadow)
};

struct GradedSpan {
    const fw::Carrier* cm = nullptr;
    const fw::Carrier* cs = nullptr;  // shadow carrier (optional)
    int n = 0;

    struct Pivot {
        int pos;          // leading coordinate index in A
        int val;          // valuation of the leading entry
        fw::Dense row;    // level coordinate vector, mod p^N
        SpanElem elem;    // peeled representative (length n - level)
    };
    std::vector<std::vector<Pivot>> levels;  // levels[j]: pivots at V^j / V^{j+1}

    long long log_order() const {
        long long s = 0;
        for (auto& lv : levels)
            for (auto& pv : lv) s += cm->N - pv.val;
        return s;
    }

    // per-level multiset of pivot valuations (a canonical profile of gr^j H)
    std::vector<std::vector<int>> profile() const {
        std::vector<std::vector<int>> out;
        for (auto& lv : levels) {
            std::vector<int> vs;
            for (auto& pv : lv) vs.push_back(pv.val);
            std::sort(vs.begin(), vs.end());
            out.push_back(vs);
        }
        return out;
    }
};

namespace span_detail {

inline int dense_leading(const fw::Dense& v, int* val_out, long long p, int N) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0) {
            int val = 0;
            fw::u64 x = v[i];
            while (x % (fw::u64)p == 0) {
                x /= (fw::u64)p;
                ++val;
            }
            (void)N;
            *val_out = val;
            return (int)i;
        }
    }
    return -1;
}

inline void elem_submul(const fw::Carrier& cm, const fw::Carrier* cs, SpanElem& x, long long q,
                        const SpanElem& piv) {
    x.main = fw::wsub(cm, x.main, fw::wscale_int(cm, q, piv.main));
    if (x.shadow && piv.shadow && cs)
        x.shadow = fw::wsub(*cs, *x.shadow, fw::wscale_int(*cs, q, *piv.shadow));
}

inline void elem_scale(const fw::Carrier& cm, const fw::Carrier* cs, SpanElem& x, long long u) {
    x.main = fw::wscale_int(cm, u, x.main);
    if (x.shadow && cs) x.shadow = fw::wscale_int(*cs, u, *x.shadow);
}

// peel one V: coords (0, y_0, ..) -> (y_0, ..); the caller guarantees the
// leading coordinate vanished at canonical precision
inline void elem_peel(SpanElem& x) {
    x.main.coords.erase(x.main.coords.begin());
    x.main.n -= 1;
}

inline long long mod_pow_ll(long long p, int e) {
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= p;
    return r;
}

inline long long inv_mod_ll(long long a, long long m) {
    long long g = m, x = 0, x1 = 1, a1 = a % m;
    while (a1) {
        long long q = g / a1;
        g -= q * a1;
        std::swap(g, a1);
        x -= q * x1;
        std::swap(x, x1);
    }
    if (g != 1) throw error("inv_mod_ll: not a unit");
    return ((x % m) + m) % m;
}

}  // namespace span_detail

// Build the graded span of the subgroup generated (under Witt addition) by
// the given elements of W_n(A_main). Shadows, when present, are mirrored.
inline GradedSpan graded_span(const fw::Carrier& cm, int n, std::vector<SpanElem> gens,
                              const fw::Carrier* cs = nullptr) {
    GradedSpan S;
    S.cm = &cm;
    S.cs = cs;
    S.n = n;
    S.levels.assign((std::size_t)n, {});
    const long long p = cm.p;
    const int N = cm.N;
    const long long modN = span_detail::mod_pow_ll(p, N);

    std::deque<SpanElem> work(gens.begin(), gens.end());
    std::vector<std::deque<SpanElem>> queued((std::size_t)n);
    for (auto& e : work) queued[0].push_back(std::move(e));

    for (int level = 0; level < n; ++level) {
        auto& pivots = S.levels[(std::size_t)level];
        auto& q = queued[(std::size_t)level];
        while (!q.empty()) {
            SpanElem x = std::move(q.front());
            q.pop_front();
            // reduce the leading coordinate against the pivots
            fw::Dense v = x.main.coords[0];
            for (auto& c : v) c %= (fw::u64)modN;
            bool placed = false;
            while (true) {
                int val = 0;
                int pos = span_detail::dense_leading(v, &val, p, N);
                if (pos < 0) break;
                // find pivot at pos
                std::size_t pi = pivots.size();
                for (std::size_t k = 0; k < pivots.size(); ++k)
                    if (pivots[k].pos == pos) pi = k;
                if (pi == pivots.size()) {
                    // new pivot: normalize leading unit
                    long long pv = span_detail::mod_pow_ll(p, val);
                    long long u = (long long)(v[(std::size_t)pos] / (fw::u64)pv) % modN;
                    long long uinv = span_detail::inv_mod_ll(u, modN);
                    span_detail::elem_scale(cm, cs, x, uinv);
                    for (auto& c : v) c = (fw::u64)((unsigned __int128)c * (unsigned long long)uinv % (unsigned long long)modN);
                    pivots.push_back({pos, val, v, x});
                    // the annihilator multiple p^{N-v} * pivot has vanishing
                    // leading coordinate but genuine deeper content
                    {
                        long long ann = span_detail::mod_pow_ll(p, N - val);
                        SpanElem a = pivots.back().elem;
                        span_detail::elem_scale(cm, cs, a, ann);
                        q.push_back(std::move(a));
                    }
                    placed = true;
                    break;
                }
                auto& piv = pivots[pi];
                if (val >= piv.val) {
                    long long pv = span_detail::mod_pow_ll(p, piv.val);
                    long long qq = (long long)(v[(std::size_t)pos] / (fw::u64)pv) % modN;
                    span_detail::elem_submul(cm, cs, x, qq, piv.elem);
                    for (std::size_t j = 0; j < v.size(); ++j) {
                        unsigned __int128 sub = (unsigned __int128)(unsigned long long)qq * piv.row[j] % (unsigned long long)modN;
                        v[j] = (fw::u64)((v[j] + (fw::u64)modN - (fw::u64)sub) % (fw::u64)modN);
                    }
                } else {
                    // x has a finer valuation: swap roles
                    long long pv = span_detail::mod_pow_ll(p, val);
                    long long u = (long long)(v[(std::size_t)pos] / (fw::u64)pv) % modN;
                    long long uinv = span_detail::inv_mod_ll(u, modN);
                    span_detail::elem_scale(cm, cs, x, uinv);
                    for (auto& c : v) c = (fw::u64)((unsigned __int128)c * (unsigned long long)uinv % (unsigned long long)modN);
                    SpanElem old_elem = piv.elem;
                    fw::Dense old_row = piv.row;
                    piv = {pos, val, v, x};
                    long long ann = span_detail::mod_pow_ll(p, N - val);
                    SpanElem a = piv.elem;
                    span_detail::elem_scale(cm, cs, a, ann);
                    q.push_back(std::move(a));
                    // old pivot re-enters as a generator
                    SpanElem back{std::move(old_elem.main), std::move(old_elem.shadow)};
                    (void)old_row;
                    q.push_back(std::move(back));
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                // leading coordinate vanished: descend one level
                bool zero = true;
                for (auto& c : v)
                    if (c % (fw::u64)modN != 0) zero = false;
                if (!zero) throw error("graded_span: reduction left a nonzero residue");
                if (level + 1 < n && x.main.n >= 2) {
                    // replace x's leading coordinate by the exact residue and peel
                    SpanElem y = std::move(x);
                    y.main = fw::wcanon(cm, y.main);
                    span_detail::elem_peel(y);
                    bool all_zero = true;
                    for (auto& d : y.main.coords)
                        for (auto& c : d)
                            if (c != 0) all_zero = false;
                    if (!all_zero) queued[(std::size_t)level + 1].push_back(std::move(y));
                }
            }
        }
    }
    return S;
}

// Reduce x against the span. Returns true iff x is a member; when a shadow
// accumulator is requested, it receives the mirrored combination (so that, if
// the generators' shadows are preimages under an additive map, the shadow is
// a preimage of x).
inline bool span_member(const GradedSpan& S, fw::WittVec x,
                        std::optional<fw::WittVec>* shadow_out = nullptr) {
    const fw::Carrier& cm = *S.cm;
    const long long p = cm.p;
    const int N = cm.N;
    const long long modN = span_detail::mod_pow_ll(p, N);
    std::optional<fw::WittVec> acc;
    x = fw::wcanon(cm, x);
    for (int level = 0; level < (int)S.levels.size() && x.n > 0; ++level) {
        while (true) {
            fw::Dense lead = x.coords[0];
            for (auto& c : lead) c %= (fw::u64)modN;
            int val = 0;
            int pos = span_detail::dense_leading(lead, &val, p, N);
            if (pos < 0) break;  // coordinate cleared; descend
            const GradedSpan::Pivot* piv = nullptr;
            for (auto& pv : S.levels[(std::size_t)level])
                if (pv.pos == pos) piv = &pv;
            if (!piv || val < piv->val) return false;
            long long pw = span_detail::mod_pow_ll(p, piv->val);
            long long q = (long long)(lead[(std::size_t)pos] / (fw::u64)pw) % modN;
            x = fw::wsub(cm, x, fw::wscale_int(cm, q, piv->elem.main));
            if (shadow_out && piv->elem.shadow && S.cs) {
                fw::WittVec s = fw::wscale_int(*S.cs, q, *piv->elem.shadow);
                acc = acc ? fw::wadd(*S.cs, *acc, s) : s;
            }
        }
        // peel one V
        fw::WittVec peeled;
        peeled.n = x.n - 1;
        for (int i = 1; i < x.n; ++i) peeled.coords.push_back(x.coords[(std::size_t)i]);
        x = std::move(peeled);
    }
    for (auto& d : x.coords)
        for (auto& c : d)
            if (c % (fw::u64)modN != 0) return false;
    if (shadow_out) *shadow_out = acc;
    return true;
}

}  // namespace pwl
