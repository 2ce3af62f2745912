#include "pwl/witt.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace pwl;

namespace {

WittVector from_ints(const Int& p, const RingPtr& base, std::initializer_list<long long> cs) {
    WittVector w;
    w.p = p;
    w.base = base;
    for (long long c : cs) w.coords.push_back(ring_scalar(base, Rat(c)));
    return w;
}

std::vector<WittVector> all_vectors(const Int& p, const RingPtr& base, int n, long long msize) {
    std::vector<WittVector> out;
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= (std::size_t)msize;
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t t = idx;
        WittVector w = witt_zero(p, base, n);
        for (int i = 0; i < n; ++i) {
            w.coords[i] = ring_scalar(base, Rat((long long)(t % (std::size_t)msize)));
            t /= (std::size_t)msize;
        }
        out.push_back(w);
    }
    return out;
}

}  // namespace

TEST_CASE("structural polynomials: frozen small cases for p=2") {
    const auto& sp = structural_polys(2, 3);
    auto R = sp.xy_ring;
    auto var = [&](int i) { return ring_var(R, (std::size_t)i); };
    // S_0 = x0 + y0
    CHECK(element_equal(sp.S[0], ring_add(var(0), var(3))));
    // S_1 = x1 + y1 - x0*y0
    CHECK(element_equal(sp.S[1], ring_sub(ring_add(var(1), var(4)), ring_mul(var(0), var(3)))));
    // P_1 = x0^2 y1 + y0^2 x1 + 2 x1 y1
    auto expect = ring_add(ring_mul(ring_pow(var(0), 2), var(4)),
                           ring_add(ring_mul(ring_pow(var(3), 2), var(1)),
                                    ring_scale(ring_mul(var(1), var(4)), 2)));
    CHECK(element_equal(sp.P[1], expect));
}

TEST_CASE("ghost compatibility holds as polynomial identities") {
    for (auto [p, n] : std::vector<std::pair<int, int>>{{2, 4}, {3, 3}, {5, 2}}) {
        const auto& sp = structural_polys(p, n);
        // view S_k as Witt coordinates of a vector over the xy-ring itself
        WittVector s, x, y;
        s.p = x.p = y.p = p;
        s.base = x.base = y.base = sp.xy_ring;
        for (int i = 0; i < n; ++i) {
            s.coords.push_back(sp.S[(std::size_t)i]);
            x.coords.push_back(ring_var(sp.xy_ring, (std::size_t)i));
            y.coords.push_back(ring_var(sp.xy_ring, (std::size_t)(n + i)));
        }
        auto gs = ghost(s), gx = ghost(x), gy = ghost(y);
        for (int k = 0; k < n; ++k) CHECK(element_equal(gs[(std::size_t)k], ring_add(gx[(std::size_t)k], gy[(std::size_t)k])));
        WittVector prod = s;
        for (int i = 0; i < n; ++i) prod.coords[(std::size_t)i] = sp.P[(std::size_t)i];
        auto gp = ghost(prod);
        for (int k = 0; k < n; ++k) CHECK(element_equal(gp[(std::size_t)k], ring_mul(gx[(std::size_t)k], gy[(std::size_t)k])));
    }
}

TEST_CASE("ghost of V powers and Teichmuller lifts") {
    auto Z = ring_integers(2);
    SECTION("ghost(V(1)) = (0, p, p) at n=3") {
        auto v1 = witt_V(witt_one(2, Z, 2));
        auto g = ghost(v1);
        CHECK(element_equal(g[0], ring_zero(Z)));
        CHECK(element_equal(g[1], ring_scalar(Z, 2)));
        CHECK(element_equal(g[2], ring_scalar(Z, 2)));
    }
    SECTION("ghost([x]) = (x, x^p, ..., x^{p^{n-1}})") {
        auto P = ring_poly(Z, {"x"}, ExpMonoid::NonNegInt);
        auto g = ghost(teichmuller(ring_var(P, 0), 3));
        CHECK(element_equal(g[0], ring_var(P, 0)));
        CHECK(element_equal(g[1], ring_pow(ring_var(P, 0), 2)));
        CHECK(element_equal(g[2], ring_pow(ring_var(P, 0), 4)));
    }
    SECTION("ghost(V^j(1)) = j zeros then p^j") {
        for (int j = 0; j <= 2; ++j) {
            auto w = witt_V_iter(witt_one(2, Z, 3 - j), j);
            auto g = ghost(w);
            for (int k = 0; k < 3; ++k) {
                if (k < j)
                    CHECK(is_zero(g[(std::size_t)k]));
                else
                    CHECK(element_equal(g[(std::size_t)k], ring_scalar(Z, Rat(pow_int(2, (unsigned)j)))));
            }
        }
    }
}

TEST_CASE("witt_from_ghost inverts ghost over torsion-free carriers") {
    auto Z = ring_integers(2);
    SECTION("(0,p,p) -> V(1)") {
        auto w = witt_from_ghost({ring_zero(Z), ring_scalar(Z, 2), ring_scalar(Z, 2)}, 2, Z);
        CHECK(witt_eq(w, witt_V(witt_one(2, Z, 2))));
    }
    SECTION("roundtrip on random vectors in W_3(Z)") {
        std::mt19937_64 rng(37);
        for (int t = 0; t < 200; ++t) {
            auto x = from_ints(2, Z, {(long long)(rng() % 19) - 9, (long long)(rng() % 19) - 9,
                                      (long long)(rng() % 19) - 9});
            CHECK(witt_eq(witt_from_ghost(ghost(x), 2, Z), x));
        }
    }
    SECTION("non-integral ghost vector is rejected") {
        CHECK_THROWS_AS(witt_from_ghost({ring_zero(Z), ring_scalar(Z, 1)}, 2, Z), divisibility_error);
    }
}

TEST_CASE("witt arithmetic matches the ghost-lift oracle") {
    auto F2 = ring_integers_mod(2, 2);
    auto Z8 = ring_integers_mod(8, 2);
    SECTION("W_3(F_2): all products and sums agree with lift-to-Z route") {
        auto elems = all_vectors(2, F2, 3, 2);
        for (auto& x : elems)
            for (auto& y : elems) {
                CHECK(witt_eq(witt_mul(x, y), witt_mul_lift(x, y)));
                CHECK(witt_eq(witt_add(x, y), witt_add_lift(x, y)));
            }
    }
    SECTION("W_3(Z/8): sampled agreement") {
        std::mt19937_64 rng(41);
        for (int t = 0; t < 150; ++t) {
            auto x = from_ints(2, Z8, {(long long)(rng() % 8), (long long)(rng() % 8), (long long)(rng() % 8)});
            auto y = from_ints(2, Z8, {(long long)(rng() % 8), (long long)(rng() % 8), (long long)(rng() % 8)});
            CHECK(witt_eq(witt_mul(x, y), witt_mul_lift(x, y)));
            CHECK(witt_eq(witt_add(x, y), witt_add_lift(x, y)));
        }
    }
}

TEST_CASE("witt ring axioms") {
    SECTION("W_2(F_2) and W_2(F_3) exhaustive") {
        for (auto [p, m] : std::vector<std::pair<int, long long>>{{2, 2}, {3, 3}}) {
            auto F = ring_integers_mod(m, p);
            auto elems = all_vectors(p, F, 2, m);
            for (auto& a : elems)
                for (auto& b : elems) {
                    CHECK(witt_eq(witt_add(a, b), witt_add(b, a)));
                    CHECK(witt_eq(witt_mul(a, b), witt_mul(b, a)));
                    CHECK(witt_eq(witt_add(a, witt_neg(a)), witt_zero(p, F, 2)));
                    for (auto& c : elems) {
                        CHECK(witt_eq(witt_add(witt_add(a, b), c), witt_add(a, witt_add(b, c))));
                        CHECK(witt_eq(witt_mul(witt_mul(a, b), c), witt_mul(a, witt_mul(b, c))));
                        CHECK(witt_eq(witt_mul(a, witt_add(b, c)),
                                      witt_add(witt_mul(a, b), witt_mul(a, c))));
                    }
                }
        }
    }
    SECTION("add(x, 0) = x and mul([a],[b]) = [ab]") {
        auto Z9 = ring_integers_mod(9, 3);
        std::mt19937_64 rng(43);
        for (int t = 0; t < 50; ++t) {
            auto x = from_ints(3, Z9, {(long long)(rng() % 9), (long long)(rng() % 9)});
            CHECK(witt_eq(witt_add(x, witt_zero(3, Z9, 2)), x));
            auto a = ring_scalar(Z9, Rat((long long)(rng() % 9)));
            auto b = ring_scalar(Z9, Rat((long long)(rng() % 9)));
            CHECK(witt_eq(witt_mul(teichmuller(a, 2), teichmuller(b, 2)), teichmuller(ring_mul(a, b), 2)));
        }
    }
}

TEST_CASE("F, V, R structure maps") {
    auto Z8 = ring_integers_mod(8, 2);
    std::mt19937_64 rng(47);
    auto rand3 = [&] {
        return from_ints(2, Z8, {(long long)(rng() % 8), (long long)(rng() % 8), (long long)(rng() % 8)});
    };

    SECTION("F on length 2 is (a0, a1) -> a0^p + p a1") {
        for (int t = 0; t < 50; ++t) {
            auto a0 = (long long)(rng() % 8), a1 = (long long)(rng() % 8);
            auto x = from_ints(2, Z8, {a0, a1});
            auto f = witt_F(x);
            CHECK(element_equal(f.coords[0], ring_scalar(Z8, Rat((a0 * a0 + 2 * a1) % 8))));
        }
    }
    SECTION("FV = p and VF = V(1)*x") {
        for (int t = 0; t < 100; ++t) {
            auto x = rand3();
            CHECK(witt_eq(witt_F(witt_V(x)), witt_scalar_int(2, x)));
            auto v1 = witt_V(witt_one(2, Z8, 2));
            CHECK(witt_eq(witt_V(witt_F(x)), witt_mul(v1, x)));
        }
    }
    SECTION("projection formula V(F(x) y) = x V(y)") {
        for (int t = 0; t < 100; ++t) {
            auto x = rand3();
            auto y = from_ints(2, Z8, {(long long)(rng() % 8), (long long)(rng() % 8)});
            CHECK(witt_eq(witt_V(witt_mul(witt_F(x), y)), witt_mul(x, witt_V(y))));
        }
    }
    SECTION("F is a ring homomorphism; V is additive") {
        for (int t = 0; t < 100; ++t) {
            auto x = rand3(), y = rand3();
            CHECK(witt_eq(witt_F(witt_mul(x, y)), witt_mul(witt_F(x), witt_F(y))));
            CHECK(witt_eq(witt_F(witt_add(x, y)), witt_add(witt_F(x), witt_F(y))));
            CHECK(witt_eq(witt_V(witt_add(witt_R(x), witt_R(y))), witt_add(witt_V(witt_R(x)), witt_V(witt_R(y)))));
        }
    }
    SECTION("R commutes with F and V") {
        for (int t = 0; t < 100; ++t) {
            auto x = rand3();
            CHECK(witt_eq(witt_R(witt_F(x)), witt_F(witt_R(x))));
            CHECK(witt_eq(witt_R(witt_V(x)), witt_V(witt_R(x))));
        }
    }
    SECTION("length-1 inputs are rejected by F and R") {
        auto x = witt_one(2, Z8, 1);
        CHECK_THROWS_AS(witt_F(x), error);
        CHECK_THROWS_AS(witt_R(x), error);
    }
}

TEST_CASE("structural caps raise explicit errors") {
    CHECK_THROWS_AS(structural_polys(2, 6), cap_error);
    CHECK_THROWS_AS(structural_polys(3, 5), cap_error);
    CHECK_THROWS_AS(structural_polys(5, 4), cap_error);
}

TEST_CASE("F-polynomial route matches ghost-shift on torsion-free base") {
    auto Z = ring_integers(3);
    std::mt19937_64 rng(53);
    for (int t = 0; t < 50; ++t) {
        auto x = from_ints(3, Z, {(long long)(rng() % 9) - 4, (long long)(rng() % 9) - 4,
                                  (long long)(rng() % 9) - 4});
        auto f = witt_F(x);
        auto g = ghost(x);
        auto gf = ghost(f);
        CHECK(element_equal(gf[0], g[1]));
        CHECK(element_equal(gf[1], g[2]));
    }
}
