#pragma once

// Exact integer arithmetic used by every other module: Kronecker symbols,
// primality, factorization and prime-power fundamental discriminants.
//
// All routines work on signed 128-bit integers; composite discriminants of
// triquadratic fields reach ~10^21 and do not fit in 64 bits.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mqe {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

/// Element of the field with two elements; addition is XOR.
struct F2 {
    bool bit = false;

    constexpr F2() = default;
    constexpr explicit F2(bool b) : bit(b) {}

    friend constexpr F2 operator+(F2 x, F2 y) { return F2(x.bit != y.bit); }
    friend constexpr F2 operator*(F2 x, F2 y) { return F2(x.bit && y.bit); }
    friend constexpr bool operator==(F2 x, F2 y) = default;
    constexpr bool is_zero() const { return !bit; }
    constexpr int value() const { return bit ? 1 : 0; }
};

std::string to_string(i128 v);
i128 parse_i128(std::string_view s);

i128 abs128(i128 v);
i128 gcd128(i128 a, i128 b);
/// Floor of the square root of n >= 0.
u128 isqrt128(u128 n);
u64 isqrt64(u64 n);
bool is_square128(i128 n);

u64 mulmod64(u64 a, u64 b, u64 m);
u64 powmod64(u64 base, u64 e, u64 m);

/// Kronecker symbol (a|n). Throws std::invalid_argument when n == 0.
int kronecker(i128 a, i128 n);

/// Deterministic for n < 2^64; above that a fixed 40-round Miller-Rabin.
bool is_prime(i128 n);

struct Factorization {
    i128 value = 1;
    std::vector<std::pair<i128, int>> factors; // ascending by prime

    i128 product() const;
    bool is_squarefree() const;
};

/// Complete factorization of n >= 1: trial division up to 10^6, then
/// Pollard-Brent rho with a deterministic sequence of polynomials.
Factorization factor(i128 n);

/// A prime-power fundamental discriminant: 8, -4, -8, or p* for odd p.
class PrimeStarDiscriminant
{
  public:
    /// Validates membership in P*; throws std::invalid_argument otherwise.
    static PrimeStarDiscriminant from_value(i128 value);

    i128 value() const { return value_; }
    i128 prime() const { return prime_; }
    bool is_negative() const { return value_ < 0; }

    friend bool operator==(PrimeStarDiscriminant const &,
                           PrimeStarDiscriminant const &) = default;

  private:
    PrimeStarDiscriminant(i128 v, i128 p) : value_(v), prime_(p) {}
    i128 value_;
    i128 prime_;
};

/// Canonical order used everywhere: by |value|, then by value.
bool canonical_less(PrimeStarDiscriminant const & x,
                    PrimeStarDiscriminant const & y);

/// p* = (-1)^((p-1)/2) p for an odd prime p. p = 2 is rejected.
PrimeStarDiscriminant p_star(i128 p);

/// Fundamental discriminant of Q(sqrt(d1*d2)).
i128 product_discriminant(PrimeStarDiscriminant d1, PrimeStarDiscriminant d2);

/// Fundamental discriminant of Q(sqrt(prod)) for a product of distinct
/// elements of P* (odd primes pairwise distinct, only powers of 2 repeat).
i128 product_discriminant(std::vector<PrimeStarDiscriminant> const & ds);

/// Squarefree kernel (sign preserved) of a nonzero integer, via factor().
i128 squarefree_kernel(i128 m);

/// Fundamental discriminant of Q(sqrt(m)) for any non-square m, via factor().
i128 field_discriminant(i128 m);

bool is_fundamental_discriminant(i128 d);

/// Parity of the index of y with respect to a primitive root mod p.
/// Computed with Euler's criterion; independent of kronecker().
F2 discrete_log_parity(i128 y, i128 p);

/// Primes up to n (inclusive), simple sieve.
std::vector<u64> primes_up_to(u64 n);

} // namespace mqe
