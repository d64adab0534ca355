#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace inertia {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline bool is_prime(const Int& n) {
    if (n < 2) return false;
    if (n < 4) return true;
    if (n % 2 == 0) return false;
    // Deterministic Miller-Rabin; base set is exact for n < 3.3e24.
    Int d = n - 1;
    int s = 0;
    while (d % 2 == 0) { d /= 2; ++s; }
    for (unsigned a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n == a) return true;
        Int x = boost::multiprecision::powm(Int(a), d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i < s - 1; ++i) {
            x = x * x % n;
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

// p-adic valuation; n must be nonzero.
inline long valuation(Int n, const Int& p) {
    if (n == 0) throw std::invalid_argument("valuation of 0");
    long v = 0;
    while (n % p == 0) { n /= p; ++v; }
    return v;
}

// Valuation of a rational (may be negative); r must be nonzero.
inline long valuation(const Rat& r, const Int& p) {
    return valuation(num(r), p) - valuation(den(r), p);
}

inline std::vector<Int> factor(Int n) {
    std::vector<Int> out;
    if (n < 0) n = -n;
    for (Int d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) out.push_back(n);
    return out;
}

inline Int pow_int(const Int& base, long e) {
    Int r = 1, b = base;
    for (; e > 0; e >>= 1, b *= b)
        if (e & 1) r *= b;
    return r;
}

// Inverse of a mod m (m > 1, gcd(a,m)=1).
inline Int inv_mod(Int a, const Int& m) {
    a %= m;
    if (a < 0) a += m;
    Int g = a, h = m, u = 1, v = 0;
    while (h != 0) {
        Int q = g / h;
        Int t = g - q * h; g = h; h = t;
        t = u - q * v; u = v; v = t;
    }
    if (g != 1) throw std::invalid_argument("inv_mod: not invertible");
    u %= m;
    if (u < 0) u += m;
    return u;
}

// Finite set of primes, or the distinguished "all primes" value used by Q.
class PrimeSet {
public:
    PrimeSet() = default;
    explicit PrimeSet(std::set<Int> primes) : primes_(std::move(primes)) {
        for (const auto& p : primes_)
            if (!is_prime(p)) throw std::invalid_argument("PrimeSet: not a prime");
    }
    static PrimeSet all() { PrimeSet s; s.all_ = true; return s; }
    static PrimeSet of_integer(const Int& n) {
        auto f = factor(n);
        return PrimeSet(std::set<Int>(f.begin(), f.end()));
    }

    bool is_all() const { return all_; }
    bool contains(const Int& p) const { return all_ || primes_.count(p) > 0; }
    bool empty() const { return !all_ && primes_.empty(); }

    // Subset test; anything is a subset of "all".
    bool subset_of(const PrimeSet& other) const {
        if (other.all_) return true;
        if (all_) return false;
        for (const auto& p : primes_)
            if (!other.primes_.count(p)) return false;
        return true;
    }

    PrimeSet unite(const PrimeSet& o) const {
        if (all_ || o.all_) return all();
        std::set<Int> s = primes_;
        s.insert(o.primes_.begin(), o.primes_.end());
        return PrimeSet(std::move(s));
    }

    // Only valid for finite sets.
    const std::set<Int>& primes() const {
        if (all_) throw std::logic_error("PrimeSet: infinite");
        return primes_;
    }

    bool operator==(const PrimeSet& o) const = default;
    auto operator<=>(const PrimeSet& o) const = default;

private:
    bool all_ = false;
    std::set<Int> primes_;
};

// Is n a "pi-number": every prime factor of n lies in pi?
inline bool is_pi_number(const Int& n, const PrimeSet& pi) {
    if (n == 0) return false;
    if (pi.is_all()) return true;
    for (const auto& p : factor(n))
        if (!pi.contains(p)) return false;
    return true;
}

}  // namespace inertia
