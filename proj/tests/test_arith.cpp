#include "doctest.h"

#include "mqe/arith.hpp"

#include <random>
#include <stdexcept>

using namespace mqe;

namespace {

// Slow reference: squarefree kernel by trial division.
i64 naive_kernel(i64 m)
{
    i64 sign = m < 0 ? -1 : 1;
    i64 n = m < 0 ? -m : m;
    i64 k = 1;
    for (i64 p = 2; p * p <= n; ++p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e % 2 == 1) {
            k *= p;
        }
    }
    return sign * k * n;
}

i64 naive_disc(i64 m)
{
    i64 k = naive_kernel(m);
    i64 r = ((k % 4) + 4) % 4;
    return r == 1 ? k : 4 * k;
}

int legendre_by_squares(i64 a, i64 p)
{
    i64 r = ((a % p) + p) % p;
    if (r == 0) {
        return 0;
    }
    for (i64 x = 1; x < p; ++x) {
        if (x * x % p == r) {
            return 1;
        }
    }
    return -1;
}

} // namespace

TEST_CASE("kronecker examples")
{
    CHECK(kronecker(7, 3) == 1);
    CHECK(kronecker(-1, 23) == -1);
    CHECK(kronecker(2, 7) == 1);
    CHECK_THROWS_AS(kronecker(5, 0), std::invalid_argument);
}

TEST_CASE("kronecker agrees with Legendre by squaring and is multiplicative")
{
    for (i64 p : {3, 5, 7, 11, 13, 101, 103, 4027}) {
        for (i64 a = -60; a <= 60; ++a) {
            CHECK(kronecker(a, p) == legendre_by_squares(a, p));
            for (i64 b : {-7, -1, 2, 3, 10}) {
                CHECK(kronecker(a * b, p) == kronecker(a, p) * kronecker(b, p));
            }
        }
    }
    // Kronecker at 2 follows the mod 8 rule.
    CHECK(kronecker(-23, 2) == 1);
    CHECK(kronecker(5, 2) == -1);
    CHECK(kronecker(-4, 2) == 0);
}

TEST_CASE("primality")
{
    CHECK(is_prime(2));
    CHECK(is_prime(4027));
    CHECK_FALSE(is_prime(5761140));
    CHECK_FALSE(is_prime(0));
    CHECK_FALSE(is_prime(1));
    CHECK(is_prime(static_cast<i128>(18446744073709551557ULL)));
    CHECK_FALSE(is_prime(static_cast<i128>(3215031751)));  // strong pseudoprime to 2,3,5,7
    i128 big = static_cast<i128>(1) << 89;
    CHECK(is_prime(big - 1));  // Mersenne prime
    CHECK_FALSE(is_prime((big - 1) * 3));
    // Sieve agreement below 10^5.
    auto ps = primes_up_to(100000);
    std::size_t idx = 0;
    for (u64 n = 0; n <= 100000; ++n) {
        bool expect = idx < ps.size() && ps[idx] == n;
        if (expect) {
            ++idx;
        }
        REQUIRE(is_prime(static_cast<i128>(n)) == expect);
    }
}

TEST_CASE("factor examples")
{
    Factorization f = factor(5761140);
    REQUIRE(f.factors.size() == 7);
    CHECK(f.factors[0] == std::pair<i128, int>{2, 2});
    CHECK(f.factors[6] == std::pair<i128, int>{43, 1});
    CHECK(factor(1).factors.empty());
    Factorization g = factor(6704790388321LL);
    REQUIRE(g.factors.size() == 2);
    CHECK(g.factors[0] == std::pair<i128, int>{643, 2});
    CHECK(g.factors[1] == std::pair<i128, int>{4027, 2});
    // A semiprime beyond trial division range.
    i128 p = 1000000007, q = 998244353;
    Factorization h = factor(p * q * q);
    REQUIRE(h.factors.size() == 2);
    CHECK(h.factors[0] == std::pair<i128, int>{q, 2});
    CHECK(h.factors[1] == std::pair<i128, int>{p, 1});
    CHECK(factor(parse_i128("977807264466179992321")).product() ==
          parse_i128("977807264466179992321"));
}

TEST_CASE("factor round-trips on random inputs below 10^18")
{
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<i64> dist(1, 1000000000000000000LL);
    for (int i = 0; i < 10000; ++i) {
        i64 n = dist(rng);
        Factorization f = factor(n);
        REQUIRE(f.product() == n);
        for (std::size_t j = 0; j < f.factors.size(); ++j) {
            REQUIRE(is_prime(f.factors[j].first));
            if (j > 0) {
                REQUIRE(f.factors[j - 1].first < f.factors[j].first);
            }
        }
    }
}

TEST_CASE("p_star and the P* type")
{
    CHECK(p_star(3).value() == -3);
    CHECK(p_star(5).value() == 5);
    CHECK(p_star(929).value() == 929);
    CHECK_THROWS(p_star(2));
    CHECK_THROWS(p_star(9));
    CHECK(PrimeStarDiscriminant::from_value(-8).prime() == 2);
    CHECK(PrimeStarDiscriminant::from_value(-4027).prime() == 4027);
    CHECK_THROWS(PrimeStarDiscriminant::from_value(4027));
    CHECK_THROWS(PrimeStarDiscriminant::from_value(4));
    auto m4 = PrimeStarDiscriminant::from_value(-4);
    auto m8 = PrimeStarDiscriminant::from_value(-8);
    auto p8 = PrimeStarDiscriminant::from_value(8);
    CHECK(canonical_less(m4, m8));
    CHECK(canonical_less(m8, p8));
    CHECK(canonical_less(p_star(3), m4));
}

TEST_CASE("product_discriminant examples and reference agreement")
{
    auto P = [](i64 v) { return PrimeStarDiscriminant::from_value(v); };
    CHECK(product_discriminant(P(-4), P(-8)) == 8);
    CHECK(product_discriminant(P(-3), P(5)) == -15);
    CHECK(product_discriminant(P(-3), P(929)) == -2787);
    CHECK(naive_disc(-2787) == -2787);
    CHECK(field_discriminant(-2787) == -2787);
    CHECK_THROWS(product_discriminant(P(-7), P(-7)));

    std::vector<i64> values{-4, -8, 8};
    for (u64 p : primes_up_to(200)) {
        if (p > 2) {
            values.push_back(static_cast<i64>(p_star(static_cast<i128>(p)).value()));
        }
    }
    for (i64 x : values) {
        for (i64 y : values) {
            if (x == y || (P(x).prime() == P(y).prime() && P(x).prime() != 2)) {
                continue;
            }
            i128 d = product_discriminant(P(x), P(y));
            CHECK(d == product_discriminant(P(y), P(x)));
            CHECK(d == naive_disc(x * y));
            CHECK(is_fundamental_discriminant(d));
        }
    }
}

TEST_CASE("field discriminant and kernel")
{
    CHECK(squarefree_kernel(-72) == -2);
    CHECK(field_discriminant(-72) == -8);
    CHECK(field_discriminant(12) == 12);
    CHECK(field_discriminant(-1) == -4);
    for (i64 m = -3000; m <= 3000; ++m) {
        if (m == 0 || naive_kernel(m) == 1) {
            continue;
        }
        REQUIRE(field_discriminant(m) == naive_disc(m));
    }
    CHECK(is_fundamental_discriminant(-4));
    CHECK(is_fundamental_discriminant(8));
    CHECK_FALSE(is_fundamental_discriminant(-16));
    CHECK_FALSE(is_fundamental_discriminant(1));
    CHECK_FALSE(is_fundamental_discriminant(-12 * 9));
}

TEST_CASE("discrete log parity is residuosity")
{
    CHECK(discrete_log_parity(7, 3).value() == 0);
    CHECK(discrete_log_parity(5, 3).value() == 1);
    CHECK(discrete_log_parity(2, 7).value() == 0);
    for (i64 p : {3, 5, 7, 11, 13, 17, 19, 23, 97, 4027}) {
        for (i64 a = -50; a <= 50; ++a) {
            if (a % p == 0) {
                continue;
            }
            CHECK((kronecker(a, p) == 1) == discrete_log_parity(a, p).is_zero());
        }
    }
    CHECK_THROWS(discrete_log_parity(9, 3));
}

TEST_CASE("i128 text round trip")
{
    i128 v = parse_i128("-977807264466179992321");
    CHECK(to_string(v) == "-977807264466179992321");
    CHECK(to_string(0) == "0");
    CHECK_THROWS(parse_i128("12a"));
    CHECK_THROWS(parse_i128(""));
}
