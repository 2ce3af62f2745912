#pragma once

// Linear algebra over Z/p^N: Howell normal form, solving, kernels, and
// span comparison. Z/p^N is local, so echelonization pivots on entries of
// minimal p-valuation; the Howell closure adds annihilator combinations so
// that membership in a row span is decided by reduction alone.

#include "pwl/numeric.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace pwl {

struct IntMatrixModPN {
    std::size_t rows = 0, cols = 0;
    Int p = 2;
    int N = 1;
    Int modulus = 2;  // p^N
    std::vector<Int> a;  // row-major, entries reduced to [0, modulus)

    IntMatrixModPN() = default;
    IntMatrixModPN(std::size_t r, std::size_t c, Int p_, int N_)
        : rows(r), cols(c), p(std::move(p_)), N(N_), modulus(pow_int(p, (unsigned)N_)), a(r * c, 0) {}

    Int& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const Int& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    void set(std::size_t i, std::size_t j, const Int& v) { at(i, j) = mod_reduce(v, modulus); }
};

namespace howell_detail {

inline int val_or_N(const Int& x, const Int& p, int N) {
    if (x == 0) return N;
    return valuation(x, p);
}

}  // namespace howell_detail

// Rows of the Howell form plus the pivot profile. Two generating sets span the
// same submodule of (Z/p^N)^cols iff their Howell forms are identical.
struct HowellForm {
    std::size_t cols = 0;
    Int p = 2;
    int N = 1;
    Int modulus = 2;
    std::vector<std::vector<Int>> rows;  // echelon rows, pivot columns strictly increasing
    std::vector<std::size_t> pivot_col;
    std::vector<int> pivot_val;          // valuation of the pivot entry

    // log_p of the span's order: sum over pivots of (N - v_i)
    long long log_order() const {
        long long s = 0;
        for (int v : pivot_val) s += N - v;
        return s;
    }

    std::vector<int> torsion_multiset() const {  // Z/p^{N-v} cyclic factors, sorted
        std::vector<int> t;
        for (int v : pivot_val)
            if (v < N) t.push_back(N - v);
        std::sort(t.begin(), t.end());
        return t;
    }
};

inline bool operator==(const HowellForm& x, const HowellForm& y) {
    return x.cols == y.cols && x.modulus == y.modulus && x.rows == y.rows;
}

// Compute the Howell normal form of the span of the given rows.
inline HowellForm howell_form(std::vector<std::vector<Int>> work, std::size_t cols, const Int& p, int N) {
    HowellForm H;
    H.cols = cols;
    H.p = p;
    H.N = N;
    H.modulus = pow_int(p, (unsigned)N);
    const Int& mod = H.modulus;

    for (auto& r : work)
        for (auto& x : r) x = mod_reduce(x, mod);

    // Repeat echelonization + annihilator closure until stable.
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::vector<Int>> placed;
        std::vector<std::size_t> pcol;
        std::vector<int> pval;

        for (std::size_t col = 0; col < cols && !work.empty(); ++col) {
            // find candidate with minimal valuation in this column
            int best_v = N;
            std::size_t best_i = work.size();
            for (std::size_t i = 0; i < work.size(); ++i) {
                int v = howell_detail::val_or_N(work[i][col], p, N);
                if (v < best_v) {
                    best_v = v;
                    best_i = i;
                }
            }
            if (best_i == work.size()) continue;
            std::vector<Int> piv = work[best_i];
            work.erase(work.begin() + (long)best_i);
            // normalize pivot to p^v
            Int pv = pow_int(p, (unsigned)best_v);
            Int u = piv[col] / pv;  // unit
            Int uinv = inv_mod(u, mod);
            for (auto& x : piv) x = mod_reduce(x * uinv, mod);
            // eliminate below
            for (auto& r : work) {
                if (r[col] == 0) continue;
                Int q = r[col] / pv;  // valuation >= best_v by minimality
                if (r[col] % pv != 0) throw error("howell: pivot minimality violated");
                for (std::size_t j = 0; j < cols; ++j) r[j] = mod_reduce(r[j] - q * piv[j], mod);
            }
            placed.push_back(std::move(piv));
            pcol.push_back(col);
            pval.push_back(best_v);
        }
        // drop zero rows remaining in work (all-zero leftovers)
        for (auto& r : work)
            for (auto& x : r)
                if (x != 0) throw error("howell: nonzero residue after echelon");

        // reduce entries above pivots: canonical representative mod p^{v}.
        // Ascending pivot order keeps already-reduced columns intact (each
        // pivot row has zeros in all earlier pivot columns).
        for (std::size_t i = 0; i < placed.size(); ++i) {
            for (std::size_t k = 0; k < i; ++k) {
                Int c = placed[k][pcol[i]];
                Int pv = pow_int(p, (unsigned)pval[i]);
                Int q = c / pv;
                if (q != 0)
                    for (std::size_t j = 0; j < cols; ++j)
                        placed[k][j] = mod_reduce(placed[k][j] - q * placed[i][j], mod);
            }
        }

        // Howell closure: annihilator multiples must reduce to zero in the span
        std::vector<std::vector<Int>> extra;
        for (std::size_t i = 0; i < placed.size(); ++i) {
            if (pval[i] == 0) continue;
            Int mult = pow_int(p, (unsigned)(N - pval[i]));
            std::vector<Int> r(cols, 0);
            for (std::size_t j = 0; j < cols; ++j) r[j] = mod_reduce(placed[i][j] * mult, mod);
            // reduce against placed rows
            for (std::size_t k = 0; k < placed.size(); ++k) {
                Int c = r[pcol[k]];
                if (c == 0) continue;
                Int pv = pow_int(p, (unsigned)pval[k]);
                if (c % pv != 0) continue;
                Int q = c / pv;
                for (std::size_t j = 0; j < cols; ++j) r[j] = mod_reduce(r[j] - q * placed[k][j], mod);
            }
            bool nz = false;
            for (auto& x : r)
                if (x != 0) nz = true;
            if (nz) {
                extra.push_back(std::move(r));
                grew = true;
            }
        }

        if (grew) {
            work = std::move(placed);
            for (auto& r : extra) work.push_back(std::move(r));
        } else {
            H.rows = std::move(placed);
            H.pivot_col = std::move(pcol);
            H.pivot_val = std::move(pval);
        }
    }
    return H;
}

inline HowellForm howell_form(const IntMatrixModPN& M) {
    std::vector<std::vector<Int>> rows(M.rows, std::vector<Int>(M.cols));
    for (std::size_t i = 0; i < M.rows; ++i)
        for (std::size_t j = 0; j < M.cols; ++j) rows[i][j] = M.at(i, j);
    return howell_form(std::move(rows), M.cols, M.p, M.N);
}

// Reduce v against the form; returns the residual (zero iff v lies in the span)
// and, when wanted, the combination used.
inline std::vector<Int> howell_reduce(const HowellForm& H, std::vector<Int> v,
                                      std::vector<Int>* combination = nullptr) {
    if (combination) combination->assign(H.rows.size(), 0);
    for (std::size_t k = 0; k < H.rows.size(); ++k) {
        Int c = v[H.pivot_col[k]];
        if (c == 0) continue;
        Int pv = pow_int(H.p, (unsigned)H.pivot_val[k]);
        if (c % pv != 0) continue;  // cannot reduce further with this pivot
        Int q = c / pv;
        if (combination) (*combination)[k] = mod_reduce(q, H.modulus);
        for (std::size_t j = 0; j < H.cols; ++j) v[j] = mod_reduce(v[j] - q * H.rows[k][j], H.modulus);
    }
    return v;
}

inline bool in_span(const HowellForm& H, const std::vector<Int>& v) {
    auto r = howell_reduce(H, v);
    for (auto& x : r)
        if (x != 0) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Solving M x = b over Z/p^N.
//
// Strategy: Howell form of the augmented transposed system [M^T | I]; the
// augmented block tracks which combination of the columns of M produced each
// reduced row, so membership of b in the column span yields a solution vector.

struct SolveContext {
    HowellForm H;           // Howell form of [M^T | I], split at `split`
    std::size_t split = 0;  // first `split` entries are the M^T part
    std::size_t ncols_of_M = 0;
};

inline SolveContext solve_context(const IntMatrixModPN& M) {
    SolveContext ctx;
    ctx.split = M.rows;
    ctx.ncols_of_M = M.cols;
    std::vector<std::vector<Int>> rows(M.cols, std::vector<Int>(M.rows + M.cols, 0));
    for (std::size_t j = 0; j < M.cols; ++j) {
        for (std::size_t i = 0; i < M.rows; ++i) rows[j][i] = M.at(i, j);
        rows[j][M.rows + j] = 1;
    }
    ctx.H = howell_form(std::move(rows), M.rows + M.cols, M.p, M.N);
    return ctx;
}

// First solution under the fixed pivot order, or nullopt if none exists.
inline std::optional<std::vector<Int>> howell_solve(const IntMatrixModPN& M, const std::vector<Int>& b) {
    if (b.size() != M.rows) throw error("howell_solve: dimension mismatch");
    SolveContext ctx = solve_context(M);
    std::vector<Int> v(ctx.H.cols, 0);
    for (std::size_t i = 0; i < M.rows; ++i) v[i] = mod_reduce(b[i], M.modulus);
    // reduce only within the M^T part; pivots inside the augmented block
    // correspond to kernel combinations and cannot help match b
    std::vector<Int> x(M.cols, 0);
    for (std::size_t k = 0; k < ctx.H.rows.size(); ++k) {
        std::size_t col = ctx.H.pivot_col[k];
        if (col >= ctx.split) break;
        Int c = v[col];
        if (c == 0) continue;
        Int pv = pow_int(M.p, (unsigned)ctx.H.pivot_val[k]);
        if (c % pv != 0) continue;
        Int q = c / pv;
        for (std::size_t j = 0; j < ctx.H.cols; ++j)
            v[j] = mod_reduce(v[j] - q * ctx.H.rows[k][j], M.modulus);
        for (std::size_t j = 0; j < M.cols; ++j)
            x[j] = mod_reduce(x[j] + q * ctx.H.rows[k][ctx.split + j], M.modulus);
    }
    for (std::size_t i = 0; i < ctx.split; ++i)
        if (v[i] != 0) return std::nullopt;
    return x;
}

// Generators of {x : M x = 0}.
inline std::vector<std::vector<Int>> kernel_generators(const IntMatrixModPN& M) {
    SolveContext ctx = solve_context(M);
    std::vector<std::vector<Int>> gens;
    for (std::size_t k = 0; k < ctx.H.rows.size(); ++k) {
        bool left_zero = true;
        for (std::size_t i = 0; i < ctx.split; ++i)
            if (ctx.H.rows[k][i] != 0) left_zero = false;
        if (!left_zero) continue;
        std::vector<Int> g(M.cols);
        for (std::size_t j = 0; j < M.cols; ++j) g[j] = ctx.H.rows[k][ctx.split + j];
        gens.push_back(std::move(g));
    }
    return gens;
}

// log_p |column span| (= log_p of the order of the image module of M).
inline long long image_log_order(const IntMatrixModPN& M) {
    std::vector<std::vector<Int>> rows(M.cols, std::vector<Int>(M.rows));
    for (std::size_t j = 0; j < M.cols; ++j)
        for (std::size_t i = 0; i < M.rows; ++i) rows[j][i] = M.at(i, j);
    return howell_form(std::move(rows), M.rows, M.p, M.N).log_order();
}

}  // namespace pwl
