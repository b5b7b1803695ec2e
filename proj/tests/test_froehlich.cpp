#include "doctest.h"

#include "mqe/bqf.hpp"
#include "mqe/froehlich.hpp"

#include "biquadratic_oracle.hpp"

#include <map>
#include <optional>
#include <random>

using namespace mqe;

namespace {

FieldSpec field(std::vector<i128> v)
{
    return FieldSpec::from_values(v);
}

std::optional<FieldSpec> try_field(std::vector<i128> v)
{
    try {
        return FieldSpec::from_values(v);
    } catch (std::invalid_argument const &) {
        return std::nullopt;
    }
}

// Discrete log parity against an explicitly chosen primitive root, by table.
class IndexTable
{
  public:
    explicit IndexTable(bool largest_root) : largest_(largest_root) {}

    F2 parity(i128 y, i128 p)
    {
        auto & tab = tables_[static_cast<i64>(p)];
        i64 P = static_cast<i64>(p);
        if (tab.empty()) {
            i64 g = largest_ ? P - 1 : 2;
            while (!is_primitive(g, P)) {
                g += largest_ ? -1 : 1;
            }
            tab.assign(static_cast<std::size_t>(P), -1);
            i64 x = 1;
            for (i64 k = 0; k < P - 1; ++k) {
                tab[static_cast<std::size_t>(x)] = k;
                x = x * g % P;
            }
        }
        i64 r = static_cast<i64>(((y % p) + p) % p);
        return F2(tab[static_cast<std::size_t>(r)] % 2 == 1);
    }

  private:
    static bool is_primitive(i64 g, i64 p)
    {
        i64 x = 1;
        for (i64 k = 1; k < p - 1; ++k) {
            x = x * g % p;
            if (x == 1) {
                return false;
            }
        }
        return true;
    }

    bool largest_;
    std::map<i64, std::vector<i64>> tables_;
};

// 3x3 determinant over F2 as a sum over permutations.
F2 det3(F2 const (&m)[3][3])
{
    int const perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    F2 acc;
    for (auto const & s : perms) {
        acc = acc + m[0][s[0]] * m[1][s[1]] * m[2][s[2]];
    }
    return acc;
}

} // namespace

TEST_CASE("symbol examples")
{
    CHECK(symbol(3, 7).value() == 0);
    CHECK(kronecker(7, 3) == 1);
    CHECK(symbol(2, 7).value() == 0);
    CHECK(symbol(-1, 7).value() == 1);
    CHECK(symbol(2, 5).value() == 1);
    CHECK(symbol(-1, 5).value() == 0);
    CHECK(symbol(2, 3).value() == 1);
    CHECK(symbol(-1, 3).value() == 1);
    CHECK_THROWS(symbol(-1, 2));
    CHECK_THROWS(symbol(5, 5));
}

TEST_CASE("a_value examples")
{
    auto c1 = SymbolContext::of(field({-3, -7}));
    CHECK(a_value(c1, 7) == symbol(3, 7));
    auto c2 = SymbolContext::of(field({-4, 5}));
    CHECK(c2.two_type == TwoType::sqrt_m1);
    CHECK(a_value(c2, 5).value() == 0);
    auto c3 = SymbolContext::of(field({-8, 5}));
    CHECK(a_value(c3, 5).value() == 1);
    auto c4 = SymbolContext::of(field({-4, -8, 5}));
    CHECK(c4.two_type == TwoType::zeta8);
    CHECK_THROWS(a_value(c4, 5));
}

TEST_CASE("det_M examples")
{
    CHECK(det_M(SymbolContext::of(field({-3, 5, 13}))).value() == 0);
    auto ctx = SymbolContext::of(field({-3, -7, -11}));
    F2 m[3][3] = {
        {symbol(7, 3), F2(), symbol(11, 3)},
        {symbol(3, 7), symbol(11, 7), F2()},
        {F2(), symbol(7, 11), symbol(3, 11)},
    };
    CHECK(det_M(ctx) == det3(m));
    CHECK_THROWS(det_M(SymbolContext::of(field({-3, -7}))));
    // Zero middle column forces a zero determinant.
    for (i64 p : {5, 13, 17, 29, 37, 41}) {
        for (i64 q : {-7, -11, -19, -23, -31}) {
            auto c = SymbolContext::of(field({-3, q, p}));
            i128 p2 = c.S[1], p3 = c.S[2];
            if (symbol(p3, p2).is_zero() && symbol(p2, p3).is_zero()) {
                CHECK(det_M(c).is_zero());
            }
        }
    }
}

TEST_CASE("narrow_h_odd examples")
{
    CHECK(narrow_h_odd(field({-4, -8})));
    CHECK_FALSE(narrow_h_odd(field({-3, 5, 13})));
    CHECK(narrow_h_odd(field({-23})));
}

TEST_CASE("symbol identity with Legendre symbols for all primes up to 10^4")
{
    auto primes = primes_up_to(10000);
    for (u64 xu : primes) {
        for (u64 yu : primes) {
            i128 x = xu, y = yu;
            if (x == y) {
                continue;
            }
            int s = symbol(x, y).is_zero() ? 1 : -1;
            if (x == 2) {
                REQUIRE(s == kronecker(x, y));
            } else {
                REQUIRE(s == kronecker(y, x));
            }
        }
        if (xu != 2) {
            REQUIRE((symbol(-1, xu).is_zero() ? 1 : -1) == kronecker(-1, static_cast<i128>(xu)));
        }
    }
}

TEST_CASE("symbol is additive in y")
{
    for (i64 p : {3, 7, 11, 101, 4027}) {
        for (i64 a = 1; a < 60; ++a) {
            for (i64 b = 1; b < 60; ++b) {
                if (a % p == 0 || b % p == 0) {
                    continue;
                }
                REQUIRE(discrete_log_parity(a * b % p, p) ==
                        discrete_log_parity(a, p) + discrete_log_parity(b, p));
            }
        }
    }
}

TEST_CASE("det_M does not depend on the primitive root")
{
    IndexTable small(false), large(true);
    auto with = [](IndexTable & t) {
        return [&t](i128 x, i128 y) {
            if (x == 2 || x == -1) {
                return symbol(x, y);
            }
            return t.parity(y, x);
        };
    };
    std::vector<i128> pool;
    pool.push_back(-4);
    pool.push_back(-8);
    pool.push_back(8);
    for (u64 p : primes_up_to(120)) {
        if (p > 2) {
            pool.push_back(p_star(static_cast<i128>(p)).value());
        }
    }
    int checked = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            for (std::size_t k = j + 1; k < pool.size(); ++k) {
                auto f = try_field({pool[i], pool[j], pool[k]});
                if (!f || f->contains_zeta8()) {
                    continue;
                }
                auto ctx = SymbolContext::of(*f);
                F2 d0 = det_M(ctx);
                REQUIRE(det_M(ctx, with(small)) == d0);
                REQUIRE(det_M(ctx, with(large)) == d0);
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("no triquadratic with exactly two real generators has odd class number")
{
    std::vector<i128> neg{-4, -8}, pos{8};
    for (u64 p : primes_up_to(20000)) {
        if (p == 2) {
            continue;
        }
        i128 v = p_star(static_cast<i128>(p)).value();
        (v < 0 ? neg : pos).push_back(v);
    }
    std::mt19937_64 rng(11);
    int made = 0;
    while (made < 1000) {
        i128 a = neg[rng() % neg.size()];
        i128 b = pos[rng() % pos.size()];
        i128 c = pos[rng() % pos.size()];
        auto f = try_field({a, b, c});
        if (!f) {
            continue;
        }
        REQUIRE(f->n() == 3);
        REQUIRE_FALSE(narrow_h_odd(*f));
        ++made;
    }
}

TEST_CASE("parity criterion matches the class number formula for small biquadratics")
{
    std::vector<i128> pool{-4, -8, 8};
    for (u64 p : primes_up_to(1000)) {
        if (p > 2) {
            pool.push_back(p_star(static_cast<i128>(p)).value());
        }
    }
    int checked = 0, odd = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            i128 x = pool[i], y = pool[j];
            if (x > 0 && y > 0) {
                continue;
            }
            auto f = try_field({x, y});
            if (!f) {
                continue;
            }
            i64 d3 = static_cast<i64>(field_discriminant(x * y));
            i64 dx = static_cast<i64>(x), dy = static_cast<i64>(y);
            i128 comp = static_cast<i128>(dx) * dy * d3;
            if (abs128(comp) >= 1000000) {
                continue;
            }
            std::vector<i64> imag;
            i64 real = 0;
            for (i64 d : {dx, dy, d3}) {
                (d < 0 ? imag.push_back(d) : void(real = d));
            }
            REQUIRE(imag.size() == 2);
            i64 h = oracle::oracle_h(imag, real);
            REQUIRE_MESSAGE((h % 2 == 1) == narrow_h_odd(*f), f->to_string());
            ++checked;
            odd += h % 2;
        }
    }
    CHECK(checked > 100);
    CHECK(odd > 10);
}

TEST_CASE("class number oracle on known fields")
{
    CHECK(oracle::oracle_h({-4, -8}, 8) == 1);
    CHECK(oracle::oracle_h({-4, -3}, 12) == 1);
    CHECK(oracle::oracle_h({-3, -7}, 21) == 1);
    CHECK(oracle::oracle_h({-4, -20}, 5) == 1);  // Q(i, sqrt 5)
    CHECK(oracle::oracle_h({-3, -23}, 69) == 3);
}
