#include "pwl/linalg.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace pwl;

namespace {

// Exhaustive solvability oracle over (Z/mod)^cols.
bool brute_solvable(const IntMatrixModPN& M, const std::vector<Int>& b, std::vector<Int>* sol = nullptr) {
    std::size_t total = 1;
    for (std::size_t j = 0; j < M.cols; ++j) total *= (std::size_t)(unsigned long long)M.modulus;
    std::vector<Int> x(M.cols, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t t = idx;
        for (std::size_t j = 0; j < M.cols; ++j) {
            x[j] = Int((unsigned long long)(t % (std::size_t)(unsigned long long)M.modulus));
            t /= (std::size_t)(unsigned long long)M.modulus;
        }
        bool ok = true;
        for (std::size_t i = 0; i < M.rows && ok; ++i) {
            Int acc = 0;
            for (std::size_t j = 0; j < M.cols; ++j) acc += M.at(i, j) * x[j];
            if (mod_reduce(acc, M.modulus) != mod_reduce(b[i], M.modulus)) ok = false;
        }
        if (ok) {
            if (sol) *sol = x;
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("howell_solve basic examples mod 4") {
    IntMatrixModPN M(1, 1, 2, 2);
    M.set(0, 0, 2);
    auto s = howell_solve(M, {Int(2)});
    REQUIRE(s.has_value());
    CHECK((*s)[0] == 1);
    CHECK_FALSE(howell_solve(M, {Int(1)}).has_value());
}

TEST_CASE("howell_solve agrees with exhaustive search over Z/8, <=3 unknowns") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 150; ++trial) {
        std::size_t rows = 1 + rng() % 4, cols = 1 + rng() % 3;
        IntMatrixModPN M(rows, cols, 2, 3);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) M.set(i, j, Int((long long)(rng() % 8)));
        std::vector<Int> b(rows);
        for (auto& v : b) v = Int((long long)(rng() % 8));
        auto got = howell_solve(M, b);
        bool expect = brute_solvable(M, b);
        CHECK(got.has_value() == expect);
        if (got) {
            for (std::size_t i = 0; i < rows; ++i) {
                Int acc = 0;
                for (std::size_t j = 0; j < cols; ++j) acc += M.at(i, j) * (*got)[j];
                CHECK(mod_reduce(acc, M.modulus) == mod_reduce(b[i], M.modulus));
            }
            auto again = howell_solve(M, b);  // deterministic
            CHECK(*again == *got);
        }
    }
}

TEST_CASE("random 4x4 mod 8 systems: solutions verify and verdicts match a randomized prover") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        IntMatrixModPN M(4, 4, 2, 3);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) M.set(i, j, Int((long long)(rng() % 8)));
        // take b in the image so solvability is known
        std::vector<Int> x0(4);
        for (auto& v : x0) v = Int((long long)(rng() % 8));
        std::vector<Int> b(4, 0);
        for (std::size_t i = 0; i < 4; ++i) {
            Int acc = 0;
            for (std::size_t j = 0; j < 4; ++j) acc += M.at(i, j) * x0[j];
            b[i] = mod_reduce(acc, M.modulus);
        }
        auto got = howell_solve(M, b);
        REQUIRE(got.has_value());
        for (std::size_t i = 0; i < 4; ++i) {
            Int acc = 0;
            for (std::size_t j = 0; j < 4; ++j) acc += M.at(i, j) * (*got)[j];
            CHECK(mod_reduce(acc, M.modulus) == b[i]);
        }
    }
}

TEST_CASE("howell form is canonical for a span") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t cols = 3;
        std::vector<std::vector<Int>> gens;
        for (int i = 0; i < 3; ++i) {
            std::vector<Int> r(cols);
            for (auto& v : r) v = Int((long long)(rng() % 8));
            gens.push_back(r);
        }
        auto H1 = howell_form(gens, cols, 2, 3);
        // scramble: random unimodular-ish recombinations plus a redundant sum
        std::vector<std::vector<Int>> gens2 = gens;
        std::vector<Int> s(cols, 0);
        for (auto& g : gens)
            for (std::size_t j = 0; j < cols; ++j) s[j] = mod_reduce(s[j] + 3 * g[j], Int(8));
        gens2.push_back(s);
        std::swap(gens2[0], gens2[1]);
        auto H2 = howell_form(gens2, cols, 2, 3);
        CHECK(H1 == H2);
        // membership: every generator reduces to zero against the form
        for (auto& g : gens) CHECK(in_span(H1, g));
    }
}

TEST_CASE("kernel generators annihilate the matrix") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        IntMatrixModPN M(3, 4, 2, 3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 4; ++j) M.set(i, j, Int((long long)(rng() % 8)));
        auto gens = kernel_generators(M);
        for (auto& g : gens) {
            for (std::size_t i = 0; i < 3; ++i) {
                Int acc = 0;
                for (std::size_t j = 0; j < 4; ++j) acc += M.at(i, j) * g[j];
                CHECK(mod_reduce(acc, M.modulus) == 0);
            }
        }
        // kernel order times image order equals |domain| (first iso theorem)
        std::vector<std::vector<Int>> krows = gens;
        auto HK = howell_form(krows, 4, 2, 3);
        long long expect = 4 * 3;  // log_2 |(Z/8)^4|
        CHECK(HK.log_order() + image_log_order(M) == expect);
    }
}
