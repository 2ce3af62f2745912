#include "pwl/ring.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace pwl;

namespace {

RingElement q_poly(const RingPtr& R, std::initializer_list<long long> coeffs) {
    // coeffs[i] * q^i
    RingElement x(R);
    long long i = 0;
    for (long long c : coeffs) {
        Monomial m(1);
        m[0] = PExp{i, 0};
        add_term(x, m, Rat(c));
        ++i;
    }
    return x;
}

// Independent long-division oracle over Z (dense coefficient vectors).
std::vector<long long> longdiv_rem(std::vector<long long> f, const std::vector<long long>& g) {
    while (f.size() >= g.size() && !f.empty()) {
        while (!f.empty() && f.back() == 0) f.pop_back();
        if (f.size() < g.size()) break;
        long long lead = f.back();
        REQUIRE(g.back() == 1);  // oracle used with monic divisors only
        std::size_t shift = f.size() - g.size();
        for (std::size_t i = 0; i < g.size(); ++i) f[shift + i] -= lead * g[i];
    }
    while (!f.empty() && f.back() == 0) f.pop_back();
    return f;
}

}  // namespace

TEST_CASE("modular scalar arithmetic") {
    auto Z4 = ring_integers_mod(4, 2);
    CHECK(element_equal(ring_add(ring_scalar(Z4, 2), ring_scalar(Z4, 3)), ring_scalar(Z4, 1)));
    CHECK(element_equal(ring_mul(ring_scalar(Z4, 2), ring_scalar(Z4, 2)), ring_zero(Z4)));
}

TEST_CASE("(q-1)[p]_q = q^2-1 at p=2") {
    auto R = ring_poly(ring_integers(2), {"q"}, ExpMonoid::NonNegInt);
    auto qm1 = q_poly(R, {-1, 1});
    auto p_q = q_poly(R, {1, 1});  // [2]_q = 1+q
    auto prod = ring_mul(qm1, p_q);
    CHECK(element_equal(prod, q_poly(R, {-1, 0, 1})));
}

TEST_CASE("fractional exponents multiply by exponent addition") {
    auto R = ring_poly(ring_integers_mod(2, 2), {"T"}, ExpMonoid::PadicNonNeg, 4);
    auto th = ring_var(R, 0, 1, 1);  // T^{1/2}
    CHECK(element_equal(ring_pow(th, 2), ring_var(R, 0, 1, 0)));
    auto t14 = ring_var(R, 0, 1, 2);
    CHECK(element_equal(ring_mul(t14, t14), th));
    CHECK_THROWS_AS(ring_var(R, 0, 1, 5), error);  // beyond the denominator cap
}

TEST_CASE("quotient reduction") {
    auto Z27 = ring_integers_mod(27, 3);
    auto R = ring_poly(Z27, {"q"}, ExpMonoid::NonNegInt);
    auto gen = q_poly(R, {1, 1, 1});  // [3]_q
    auto q2 = q_poly(R, {0, 0, 1});

    SECTION("reduce(q^2, q^2+q+1) = -q-1") {
        auto r = quotient_reduce(q2, gen);
        auto expect = ring_neg(into_quotient(q_poly(R, {1, 1}), r.ring));
        CHECK(element_equal(r, expect));
    }
    SECTION("reduce(x, x) = 0") {
        auto r = quotient_reduce(gen, gen);
        CHECK(is_zero(r));
    }
    SECTION("reduce twice equals reduce once") {
        auto r = quotient_reduce(q2, gen);
        auto rr = quotient_reduce_internal(r);
        CHECK(element_equal(r, rr));
    }
    SECTION("reduction is a ring homomorphism") {
        std::mt19937_64 rng(7);
        auto Q = ring_quotient(R, gen);
        for (int t = 0; t < 50; ++t) {
            RingElement x(R), y(R);
            for (int i = 0; i < 5; ++i) {
                Monomial m(1);
                m[0] = PExp{(long long)(rng() % 7), 0};
                add_term(x, m, Rat((long long)(rng() % 27)));
                m[0] = PExp{(long long)(rng() % 7), 0};
                add_term(y, m, Rat((long long)(rng() % 27)));
            }
            auto red = [&](const RingElement& v) { return into_quotient(v, Q); };
            CHECK(element_equal(red(ring_mul(x, y)), ring_mul(red(x), red(y))));
        }
    }
}

TEST_CASE("q^8 modulo a product of cyclotomic-style factors matches long division") {
    auto R = ring_poly(ring_integers(2), {"q"}, ExpMonoid::NonNegInt);
    SECTION("(q^2+q+1)(q^4+q^2+1), degree < 6 remainder") {
        auto gen = ring_mul(q_poly(R, {1, 1, 1}), q_poly(R, {1, 0, 1, 0, 1}));
        auto r = quotient_reduce(q_poly(R, {0, 0, 0, 0, 0, 0, 0, 0, 1}), gen);
        std::vector<long long> f(9, 0);
        f[8] = 1;
        // independent dense convolution of the two factors
        std::vector<long long> g1{1, 1, 1}, g2{1, 0, 1, 0, 1}, gd(7, 0);
        for (std::size_t i = 0; i < g1.size(); ++i)
            for (std::size_t j = 0; j < g2.size(); ++j) gd[i + j] += g1[i] * g2[j];
        auto rem = longdiv_rem(f, gd);
        RingElement expect(r.ring);
        for (std::size_t i = 0; i < rem.size(); ++i) {
            Monomial m(1);
            m[0] = PExp{(long long)i, 0};
            add_term(expect, m, Rat(rem[i]));
        }
        for (auto& [m, c] : r.terms) CHECK(pexp_cmp(m[0], PExp{6, 0}, 2) < 0);
        CHECK(element_equal(r, expect));
    }
    SECTION("[4]_q [4]_{q^2}") {
        auto g1 = q_poly(R, {1, 1, 1, 1});
        auto g2 = q_poly(R, {1, 0, 1, 0, 1, 0, 1});
        auto gen = ring_mul(g1, g2);
        auto r = quotient_reduce(q_poly(R, {0, 0, 0, 0, 0, 0, 0, 0, 1}), gen);
        std::vector<long long> f(9, 0), g(10, 0);
        f[8] = 1;
        for (auto& [m, c] : gen.terms) g[(std::size_t)m[0].num] = (long long)numerator(c);
        auto rem = longdiv_rem(f, g);
        RingElement expect(r.ring);
        for (std::size_t i = 0; i < rem.size(); ++i) {
            Monomial m(1);
            m[0] = PExp{(long long)i, 0};
            add_term(expect, m, Rat(rem[i]));
        }
        CHECK(element_equal(r, expect));
    }
}

TEST_CASE("exact division by p powers") {
    auto R = ring_poly(ring_integers(2), {"T"}, ExpMonoid::NonNegInt);
    auto x = q_poly(R, {4, 8});
    CHECK(element_equal(exact_div_p(x, 2), q_poly(R, {1, 2})));
    auto Z = ring_integers(2);
    CHECK_THROWS_AS(exact_div_p(ring_scalar(Z, 3), 1), divisibility_error);
}

TEST_CASE("series truncation is recorded") {
    auto S = ring_series(ring_integers_mod(8, 2), "u", 4);
    auto u = ring_var(S, 0);
    auto x = ring_pow(u, 3);
    CHECK_FALSE(x.truncated);
    auto y = ring_mul(x, u);  // u^4 truncated away
    CHECK(y.truncated);
    CHECK(is_zero(y));
}

TEST_CASE("canonical form idempotence on random elements") {
    std::mt19937_64 rng(11);
    auto Z8 = ring_integers_mod(8, 2);
    auto P = ring_poly(Z8, {"a", "b"}, ExpMonoid::NonNegInt);
    auto F = ring_poly(ring_integers_mod(2, 2), {"T"}, ExpMonoid::PadicNonNeg, 3);
    auto L = ring_plocal(2, 4);
    for (int t = 0; t < 1000; ++t) {
        std::vector<std::pair<Monomial, Rat>> terms;
        for (int i = 0; i < 4; ++i) {
            Monomial m(2);
            m[0] = PExp{(long long)(rng() % 4), 0};
            m[1] = PExp{(long long)(rng() % 4), 0};
            terms.push_back({m, Rat((long long)(rng() % 16))});
        }
        auto x = make_element(P, terms);
        auto y = make_element(P, terms);
        CHECK(element_equal(x, y));
        auto z = ring_add(x, ring_zero(P));
        CHECK(element_equal(x, z));
        for (auto& [m, c] : x.terms) CHECK(c != 0);
    }
    for (int t = 0; t < 1000; ++t) {
        std::vector<std::pair<Monomial, Rat>> terms;
        for (int i = 0; i < 3; ++i) {
            Monomial m(1);
            m[0] = pexp_make((long long)(rng() % 9), (int)(rng() % 3), 2);
            terms.push_back({m, Rat((long long)(rng() % 2))});
        }
        auto x = make_element(F, terms);
        auto y = make_element(F, terms);
        CHECK(element_equal(x, y));
    }
    for (int t = 0; t < 200; ++t) {
        Rat c = Rat((long long)(rng() % 64)) / Rat((long long)(1 + rng() % 15));
        if (valuation(Rat(1 + (long long)(rng() % 15)), Int(2)) > 4) continue;
        try {
            auto x = ring_scalar(L, c);
            auto y = ring_scalar(L, c);
            CHECK(element_equal(x, y));
        } catch (const error&) {
            // cap exceeded: fine for this sampler
        }
    }
}

TEST_CASE("ring axioms hold on random triples in supported carriers") {
    std::mt19937_64 rng(13);
    auto check_ring = [&](const RingPtr& R, auto sample) {
        for (int t = 0; t < 60; ++t) {
            auto a = sample(), b = sample(), c = sample();
            CHECK(element_equal(ring_add(ring_add(a, b), c), ring_add(a, ring_add(b, c))));
            CHECK(element_equal(ring_mul(ring_mul(a, b), c), ring_mul(a, ring_mul(b, c))));
            CHECK(element_equal(ring_mul(a, ring_add(b, c)), ring_add(ring_mul(a, b), ring_mul(a, c))));
            CHECK(element_equal(ring_mul(a, b), ring_mul(b, a)));
            CHECK(element_equal(ring_add(a, ring_neg(a)), ring_zero(R)));
        }
    };
    {
        auto Z8 = ring_integers_mod(8, 2);
        check_ring(Z8, [&] { return ring_scalar(Z8, Rat((long long)(rng() % 8))); });
    }
    {
        auto F = ring_poly(ring_integers_mod(2, 2), {"T"}, ExpMonoid::PadicNonNeg, 3);
        check_ring(F, [&] {
            RingElement x(F);
            for (int i = 0; i < 3; ++i) {
                Monomial m(1);
                m[0] = pexp_make((long long)(rng() % 8), (int)(rng() % 4), 2);
                add_term(x, m, Rat((long long)(rng() % 2)));
            }
            return x;
        });
    }
    {
        auto Z16 = ring_integers_mod(16, 2);
        auto P = ring_poly(Z16, {"z"}, ExpMonoid::NonNegInt);
        RingElement gen(P);
        {
            Monomial m(1);
            m[0] = PExp{4, 0};
            add_term(gen, m, 1);
            add_term(gen, Monomial(1), 1);  // z^4 + 1
        }
        auto Q = ring_quotient(P, gen);
        check_ring(Q, [&] {
            RingElement x(P);
            for (int i = 0; i < 3; ++i) {
                Monomial m(1);
                m[0] = PExp{(long long)(rng() % 4), 0};
                add_term(x, m, Rat((long long)(rng() % 16)));
            }
            return into_quotient(x, Q);
        });
    }
    {
        auto S = ring_series(ring_integers_mod(4, 2), "u", 5);
        check_ring(S, [&] {
            RingElement x(S);
            for (int i = 0; i < 3; ++i) {
                Monomial m(1);
                m[0] = PExp{(long long)(rng() % 5), 0};
                add_term(x, m, Rat((long long)(rng() % 4)));
            }
            return x;
        });
    }
}

TEST_CASE("units and inverses") {
    auto Z16 = ring_integers_mod(16, 2);
    auto P = ring_poly(Z16, {"z"}, ExpMonoid::NonNegInt);
    SECTION("nilpotent-tail polynomial unit") {
        auto x = q_poly(P, {1, 2});  // 1 + 2z
        auto inv = try_inverse(x);
        REQUIRE(inv.has_value());
        CHECK(element_equal(ring_mul(x, *inv), ring_one(P)));
        CHECK_FALSE(try_inverse(q_poly(P, {1, 1})).has_value());
    }
    SECTION("quotient carrier with residue field F_4") {
        auto Z4 = ring_integers_mod(4, 2);
        auto R = ring_poly(Z4, {"q"}, ExpMonoid::NonNegInt);
        auto Q = ring_quotient(R, q_poly(R, {1, 1, 1}));
        auto q = ring_var(Q, 0);
        auto inv = try_inverse(q);
        REQUIRE(inv.has_value());
        CHECK(element_equal(ring_mul(q, *inv), ring_one(Q)));
        auto qm1 = ring_sub(q, ring_one(Q));  // a unit here: residue field is F_4
        auto inv2 = try_inverse(qm1);
        REQUIRE(inv2.has_value());
        CHECK(element_equal(ring_mul(qm1, *inv2), ring_one(Q)));
        CHECK_FALSE(try_inverse(ring_scalar(Q, 2)).has_value());
    }
}

TEST_CASE("substitution endomorphisms") {
    auto F = ring_poly(ring_integers_mod(2, 2), {"t"}, ExpMonoid::PadicNonNeg, 3);
    Substitution frob{F, {ring_monomial(F, {PExp{2, 0}})}};  // t -> t^2
    auto th = ring_var(F, 0, 1, 1);                          // t^{1/2}
    CHECK(element_equal(subst_apply(th, frob), ring_var(F, 0)));
    auto x = ring_add(th, ring_one(F));
    auto y = subst_apply(x, frob);
    CHECK(element_equal(y, ring_add(ring_var(F, 0), ring_one(F))));
}
