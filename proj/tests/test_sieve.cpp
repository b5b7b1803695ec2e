#include "doctest.h"

#include "mqe/bqf.hpp"
#include "mqe/families.hpp"
#include "mqe/sieve.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace mqe;

namespace {

PrimeStarDiscriminant P(i64 v)
{
    return PrimeStarDiscriminant::from_value(v);
}

std::set<i128> as_set(std::vector<PrimeStarDiscriminant> const & v)
{
    std::set<i128> out;
    for (auto const & x : v) {
        out.insert(x.value());
    }
    return out;
}

SieveConfig erh(i64 p, i64 u)
{
    SieveConfig c;
    c.p_star = P(p);
    c.u = u;
    return c;
}

SieveConfig partial(i64 p, i64 u, u64 lmax)
{
    SieveConfig c = erh(p, u);
    c.assume_erh = false;
    c.l_max = lmax;
    return c;
}

u64 smallest_split_prime(i128 D)
{
    for (u64 l = 2;; ++l) {
        if (is_prime(static_cast<i128>(l)) && kronecker(D, static_cast<i128>(l)) == 1) {
            return l;
        }
    }
}

// Order of the class of a prime form, by repeated composition.
u64 form_order(QuadForm f, i64 D)
{
    QuadForm id = principal_form(D);
    QuadForm g = f;
    u64 k = 1;
    while (!(g == id)) {
        g = compose(g, f, D);
        ++k;
    }
    return k;
}

bool has_solution(SieveEquation const & eq, u64 l, i64 m, i128 kernel)
{
    i128 C = eq.coeff;
    for (i64 i = 0; i < m; ++i) {
        C *= l;
    }
    u64 xmax = static_cast<u64>(isqrt128(static_cast<u128>(C - 1)) / static_cast<u128>(eq.scale));
    u64 start = eq.cond == XCond::odd ? 1 : eq.cond == XCond::two_mod_4 ? 2 : 0;
    u64 stride = eq.cond == XCond::odd ? 2 : 4;
    for (u64 x = start; x <= xmax; x += stride) {
        i128 sx = static_cast<i128>(eq.scale) * x;
        i128 V = sx * sx - C;
        if (V % kernel == 0 && is_square128(V / kernel)) {
            return true;
        }
    }
    return false;
}

} // namespace

TEST_CASE("redei_filter examples")
{
    CHECK(redei_filter(P(-3), 5));
    CHECK(class_number_imaginary(-15) % 4 != 0);
    CHECK(redei_filter(P(-4), 13));
    CHECK_FALSE(redei_filter(P(-4), 17));
    CHECK_THROWS(redei_filter(P(-3), 7));
    CHECK_THROWS(redei_filter(P(5), 13));
}

TEST_CASE("redei_filter agrees with 4-divisibility of the class number")
{
    for (i64 p : {-3, -4, -7, -8, -11, -19, -43, -4027}) {
        for (u64 q : primes_up_to(10000)) {
            if (q % 4 != 1 || static_cast<i128>(q) == P(p).prime()) {
                continue;
            }
            i64 D = static_cast<i64>(product_discriminant(P(p), P(static_cast<i64>(q))));
            REQUIRE_MESSAGE(redei_filter(P(p), q) == (class_number_imaginary(D) % 4 != 0), p << "," << q);
        }
    }
}

TEST_CASE("bach_sorenson values")
{
    CHECK(bach_sorenson(std::exp(25.0)) == doctest::Approx(53.205 * 53.205));
    CHECK(bach_sorenson(1e12) < bach_sorenson(1e15));
    CHECK(bach_sorenson(4.0 * 3 * 1e20) < 1e4);
    CHECK(bach_sorenson(4.0 * 3 * 1e20) > 9e3);
}

TEST_CASE("select_cases examples")
{
    // (2|3) = -1
    auto c = select_cases(P(-3), 5);
    REQUIRE(c.size() == 1);
    CHECK(c[0].id == 1);
    CHECK(c[0].doubled);
    REQUIRE(c[0].equations.size() == 2);
    CHECK(c[0].equations[0].scale == 3);
    CHECK(c[0].equations[0].coeff == 12);
    CHECK(c[0].equations[0].cond == XCond::odd);
    CHECK(c[0].equations[1].coeff == 3);
    CHECK(c[0].equations[1].cond == XCond::two_mod_4);     // 5 * 3 = 7 mod 8
    CHECK(select_cases(P(-3), 11)[0].equations[1].cond == XCond::odd);
    CHECK(select_cases(P(-3), 17)[0].equations[1].cond == XCond::zero_mod_4); // 17 * 3 = 3 mod 8
    CHECK(select_cases(P(-3), 7)[0].id == 4);
    CHECK(select_cases(P(-3), 7)[0].mod_p_wheel);

    auto m4 = select_cases(P(-4), 7);
    REQUIRE(m4.size() == 2);
    CHECK(m4[0].id == 3);
    REQUIRE(m4[0].equations.size() == 1);
    CHECK(m4[0].equations[0].cond == XCond::odd);
    CHECK(m4[1].id == 6);
    CHECK(m4[1].equations.empty());
    CHECK(select_cases(P(-4), 13)[1].equations.size() == 2);

    auto m8 = select_cases(P(-8), 17);
    CHECK(m8[0].id == 2);
    CHECK(m8[0].equations.empty());
    CHECK(m8[1].id == 5);
    CHECK(m8[1].equations.size() == 1);
    CHECK(select_cases(P(-8), 11)[0].equations.empty());
    CHECK(select_cases(P(-8), 13)[0].equations.size() == 1);
    CHECK(select_cases(P(-8), 13)[1].equations.empty());
    CHECK_THROWS(select_cases(P(-3), 3));
    CHECK_THROWS(select_cases(P(-3), 2));
}

TEST_CASE("smallest_split_check examples")
{
    CHECK(smallest_split_check(-15, 2));
    CHECK(smallest_split_check(-23, 2));
    CHECK(kronecker(-23, 2) == 1);
    CHECK_FALSE(smallest_split_check(-23, 3));
    i128 D = -4027 * 5;
    bool brute = true;
    for (i128 q : {2, 3, 5}) {
        brute = brute && kronecker(D, q) != 1;
    }
    CHECK(smallest_split_check(D, 7) == brute);
    for (i64 d : {-3, -4, -7, -8, -23, -47, -4027, -20135, 5, 12, 929}) {
        u64 l = smallest_split_prime(d);
        CHECK(smallest_split_check(d, l));
        CHECK_FALSE(smallest_split_check(d, l + 1));
    }
}

TEST_CASE("configuration needs exactly one stopping rule")
{
    SieveConfig c = erh(-3, 3);
    CHECK_NOTHROW(c.validate());
    c.l_max = 100;
    CHECK_THROWS(c.validate());
    c.assume_erh = false;
    CHECK_NOTHROW(c.validate());
    c.l_max.reset();
    CHECK_THROWS(c.validate());
    CHECK_THROWS(sieve_rp(erh(7, 3)));
    CHECK_THROWS(sieve_rp(erh(-3, 4)));
}

TEST_CASE("every case line is witnessed on a random panel")
{
    std::vector<i64> ps{-3, -4, -7, -8, -11, -19, -23, -31, -43, -47, -59, -67, -83};
    std::vector<u64> qs;
    for (u64 q : primes_up_to(20000)) {
        if (q % 4 == 1) {
            qs.push_back(q);
        }
    }
    std::mt19937_64 rng(61);
    int verified = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        PrimeStarDiscriminant p = P(ps[rng() % ps.size()]);
        u64 q = qs[rng() % qs.size()];
        i64 D = static_cast<i64>(product_discriminant(p, P(static_cast<i64>(q))));
        GroupStructure g = class_group(D).structure;
        // Shape C2 x (odd): exactly one even invariant factor, of 2-valuation 1.
        int even = 0;
        for (i64 d : g.divisors) {
            even += d % 2 == 0;
        }
        if (even != 1 || g.divisors.back() % 4 == 0) {
            continue;
        }
        u64 l = smallest_split_prime(D);
        if (l == 2) {
            continue;
        }
        i64 m = g.exponent() / 2;
        if (std::log(static_cast<double>(l)) * m > std::log(1e11)) {
            continue;
        }
        u64 o = form_order(prime_form(D, l), D);
        REQUIRE((o % 2 == 0 || static_cast<i64>(m) % static_cast<i64>(o) == 0));
        i128 kernel = D % 4 == 0 ? D / 4 : D;
        bool found = false;
        for (auto const & c : select_cases(p, l)) {
            // The selected case must agree with the genus of the prime above l.
            if (c.legendre) {
                REQUIRE(c.doubled == (o % 2 == 0));
            }
            for (auto const & eq : c.equations) {
                found = found || has_solution(eq, l, m, kernel);
            }
        }
        REQUIRE_MESSAGE(found, "p*=" << to_string(p.value()) << " q=" << q << " l=" << l << " m=" << m);
        ++verified;
    }
    CHECK(verified > 300);
}

TEST_CASE("sieve equals the direct scan for u = 3")
{
    for (i64 p : {-3, -4, -7, -8, -11}) {
        SieveResult r = sieve_rp(erh(p, 3));
        CHECK(r.exhaustive);
        CHECK(r.stop_l > 3000);
        CHECK(static_cast<double>(r.stop_l) > bach_sorenson(4.0 * std::pow(static_cast<double>(r.stop_l), 3) * static_cast<double>(P(p).prime())));
        CHECK_MESSAGE(as_set(r.rp) == as_set(rp_scan(P(p), 3, rp_qmax_u3(P(p)))), p);
    }
}

TEST_CASE("sieve output is sound")
{
    for (i64 p : {-19, -43}) {
        SieveResult r = sieve_rp(erh(p, 3));
        for (auto const & q : r.rp) {
            CHECK(exponent_divides(static_cast<i64>(product_discriminant(P(p), q)), 6));
        }
    }
}

TEST_CASE("partial sieve for u = 5")
{
    std::set<i128> row{8, 13, 17, 29, 73, 281, 569, 953};
    SieveResult r = sieve_rp(partial(-11, 5, 50));
    CHECK_FALSE(r.exhaustive);
    CHECK(r.last_l == 47);
    auto got = as_set(r.rp);
    for (i128 q : got) {
        CHECK(row.count(q));
    }
    // Against the scan: everything below the scan bound whose field has its
    // smallest splitting prime at most 50.
    std::set<i128> expect;
    for (auto const & q : rp_scan(P(-11), 5, 40000)) {
        i128 D = product_discriminant(P(-11), q);
        if (smallest_split_prime(D) <= 50) {
            expect.insert(q.value());
        }
    }
    std::set<i128> got_small;
    for (i128 q : got) {
        if (q <= 40000) {
            got_small.insert(q);
        }
    }
    CHECK(got_small == expect);
    CHECK(!expect.empty());

    // The single entry of the -103 row appears once its splitting prime is reached.
    u64 l = smallest_split_prime(product_discriminant(P(-103), P(37)));
    CHECK(as_set(sieve_rp(partial(-103, 5, l)).rp) == std::set<i128>{37});
}

TEST_CASE("checkpoint resume gives the same result")
{
    auto path = std::filesystem::temp_directory_path() / "mqe_sieve_checkpoint.jsonl";
    std::filesystem::remove(path);
    SieveConfig a = partial(-7, 3, 400);
    a.checkpoint = path.string();
    SieveResult first = sieve_rp(a);
    std::size_t lines = 0;
    {
        std::ifstream in(path);
        std::string s;
        while (std::getline(in, s)) {
            ++lines;
        }
    }
    // One line for l = 2 and one per odd prime l <= 400 other than 7.
    CHECK(lines == primes_up_to(400).size() - 1);
    {
        std::ofstream out(path, std::ios::app);
        out << "{\"p\":-7,\"u\":3,\"l\":";  // torn line
    }
    SieveConfig b = erh(-7, 3);
    b.checkpoint = path.string();
    SieveResult resumed = sieve_rp(b);
    SieveResult fresh = sieve_rp(erh(-7, 3));
    CHECK(as_set(resumed.rp) == as_set(fresh.rp));
    CHECK(as_set(first.rp).size() <= as_set(fresh.rp).size());
    std::filesystem::remove(path);
}

TEST_CASE("working width overflow is a range fault")
{
    CHECK_THROWS_AS(sieve_rp(partial(-3, 127, 10)), std::range_error);
}
