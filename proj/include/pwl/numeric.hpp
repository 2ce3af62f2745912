#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pwl {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a computation would exceed a declared resource cap.
struct cap_error : error {
    explicit cap_error(const std::string& what) : error(what) {}
};

// Raised when an exact division fails, i.e. an integrality claim is false.
struct divisibility_error : error {
    explicit divisibility_error(const std::string& what) : error(what) {}
};

inline Int pow_int(const Int& base, unsigned e) {
    Int r = 1, b = base;
    while (e) {
        if (e & 1u) r *= b;
        b *= b;
        e >>= 1u;
    }
    return r;
}

// p-adic valuation of a nonzero integer.
inline int valuation(const Int& x, const Int& p) {
    if (x == 0) throw error("valuation: zero has no finite valuation");
    Int v = x < 0 ? Int(-x) : x;
    int k = 0;
    while (v % p == 0) {
        v /= p;
        ++k;
    }
    return k;
}

// p-adic valuation of a nonzero rational (may be negative).
inline int valuation(const Rat& x, const Int& p) {
    if (x == 0) throw error("valuation: zero has no finite valuation");
    return valuation(numerator(x), p) - valuation(denominator(x), p);
}

inline Int mod_reduce(const Int& x, const Int& m) {
    Int r = x % m;
    if (r < 0) r += m;
    return r;
}

// Extended gcd: returns g = gcd(a,b) and x,y with a*x + b*y = g.
inline Int ext_gcd(const Int& a, const Int& b, Int& x, Int& y) {
    if (b == 0) {
        x = (a < 0) ? -1 : 1;
        y = 0;
        return a < 0 ? Int(-a) : a;
    }
    Int x1, y1;
    Int g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

// Inverse of x modulo m; throws if not a unit.
inline Int inv_mod(const Int& x, const Int& m) {
    Int a, b;
    Int g = ext_gcd(mod_reduce(x, m), m, a, b);
    if (g != 1) throw error("inv_mod: not a unit");
    return mod_reduce(a, m);
}

inline std::string to_string(const Int& x) { return x.str(); }
inline std::string to_string(const Rat& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

}  // namespace pwl
