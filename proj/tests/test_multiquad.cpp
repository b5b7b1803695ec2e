#include "doctest.h"

#include "mqe/multiquad.hpp"

#include "biquadratic_oracle.hpp"

#include <optional>

using namespace mqe;

namespace {

FieldSpec field(std::vector<i128> v)
{
    return FieldSpec::from_values(v);
}

std::vector<i64> divs(GroupStructure const & g)
{
    return g.divisors;
}

} // namespace

TEST_CASE("FieldSpec validation and order")
{
    CHECK(field({-7, -3}).values() == std::vector<i128>{-3, -7});
}

TEST_CASE("FieldSpec rejects repeated primes")
{
    CHECK_THROWS(field({-4, 8}));
    CHECK_THROWS(field({-8, 8}));
    CHECK_THROWS(field({-3, -3}));
    CHECK_THROWS(field({-3, -7, -11, -19}));
    CHECK_NOTHROW(field({-4, -8}));
    CHECK_NOTHROW(field({-4, -8, 5}));
    CHECK(field({8, -3}).values() == std::vector<i128>{-3, 8});
    CHECK(field({-8, -4}).values() == std::vector<i128>{-4, -8});
}

TEST_CASE("quadratic subfields")
{
    CHECK(quadratic_subfields(field({-3, -7})) == std::vector<i128>{-3, -7, 21});
    CHECK(quadratic_subfields(field({-4, -8})) == std::vector<i128>{-4, -8, 8});
    CHECK(quadratic_subfields(field({-3, -7, -11})) ==
          std::vector<i128>{-3, -7, -11, 21, 33, 77, -231});
    CHECK(quadratic_subfields(field({-23})).size() == 1);
    CHECK(quadratic_subfields(field({-3, -7, 8})).size() == 7);
}

TEST_CASE("composite discriminants")
{
    CHECK(composite_discriminant(field({-163, -883})) == 20715557041LL);
    CHECK(composite_discriminant(field({-643, -4027})) == 6704790388321LL);
    CHECK(composite_discriminant(field({-3, 929})) == 7767369);
    CHECK(composite_discriminant(field({-8, 19301})) == 23841830464LL);
    CHECK(composite_discriminant(field({-4, -11, -23})) == 1048870932736LL);
    CHECK(composite_discriminant(field({-59, -107, 8})) == parse_i128("6505835909336928256"));
    CHECK(composite_discriminant(field({-11, -127, 29})) == parse_i128("2693876092569442561"));
    CHECK(composite_discriminant(field({-19, -227, 41})) == parse_i128("977807264466179992321"));
    CHECK(composite_discriminant(field({-4, -8})) == 256);
}

TEST_CASE("odd class group examples")
{
    CHECK(divs(odd_class_group(field({-163, -4027}))) == std::vector<i64>{3, 3});
    CHECK(divs(odd_class_group(field({-643, -4027}))) == std::vector<i64>{3, 3, 3, 3});
    CHECK(divs(odd_class_group(field({-4, -8}))).empty());
    CHECK(divs(odd_class_group(field({-12451, -37363}))) == std::vector<i64>{5, 5, 5, 5});
}

TEST_CASE("exponent membership examples")
{
    auto r1 = class_group_if_exponent_divides(field({-163, -883}), 3);
    REQUIRE(r1.accepted());
    CHECK(divs(r1.group) == std::vector<i64>{3});
    auto r2 = class_group_if_exponent_divides(field({-3, 5, 13}), 3);
    CHECK(r2.reason == Rejection::even_class_number);
    auto r3 = class_group_if_exponent_divides(field({-11, 953}), 5);
    REQUIRE(r3.accepted());
    CHECK(divs(r3.group) == std::vector<i64>{5});
    auto r4 = class_group_if_exponent_divides(field({-47, -79}), 3);
    CHECK(r4.reason == Rejection::exponent_too_large);
    CHECK_THROWS(class_group_if_exponent_divides(field({-3}), 4));
}

TEST_CASE("cache gives identical answers")
{
    StructureCache cache;
    for (auto v : std::vector<std::vector<i128>>{{-163, -4027}, {-643, -4027}, {-3, 929}, {-7, -8, 61}}) {
        FieldSpec f = field(v);
        CHECK(odd_class_group(f, &cache) == odd_class_group(f));
        CHECK(odd_class_group(f, &cache) == odd_class_group(f, &cache));
    }
    CHECK(cache.size() > 0);
}

TEST_CASE("odd part of the decomposition matches the class number formula")
{
    std::vector<i128> pool{-4, -8, 8};
    for (u64 p : primes_up_to(1000)) {
        if (p > 2) {
            pool.push_back(p_star(static_cast<i128>(p)).value());
        }
    }
    int checked = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            if (pool[i] > 0 && pool[j] > 0) {
                continue;
            }
            std::optional<FieldSpec> f;
            try {
                f = field({pool[i], pool[j]});
            } catch (std::invalid_argument const &) {
                continue;
            }
            auto subs = quadratic_subfields(*f);
            REQUIRE(subs.size() == 3);
            if (abs128(composite_discriminant(*f)) >= 1000000) {
                continue;
            }
            std::vector<i64> imag;
            i64 real = 0;
            for (i128 d : subs) {
                if (d < 0) {
                    imag.push_back(static_cast<i64>(d));
                } else {
                    real = static_cast<i64>(d);
                }
            }
            i64 h = oracle::oracle_h(imag, real);
            while (h % 2 == 0) {
                h /= 2;
            }
            REQUIRE_MESSAGE(odd_class_group(*f).order() == h, f->to_string());
            ++checked;
        }
    }
    CHECK(checked > 100);
}
