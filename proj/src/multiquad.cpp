#include "mqe/multiquad.hpp"

#include "mqe/froehlich.hpp"

#include <algorithm>
#include <stdexcept>

namespace mqe {

namespace {

i64 as_disc64(i128 d)
{
    if (d >= (static_cast<i128>(1) << 62) || d <= -(static_cast<i128>(1) << 62)) {
        throw std::range_error("subfield discriminant exceeds the 62-bit range: " + to_string(d));
    }
    return static_cast<i64>(d);
}

GroupStructure structure_of(i64 D, StructureCache * cache)
{
    return cache ? cache->structure(D) : class_group(D).structure;
}

} // namespace

std::vector<i128> quadratic_subfields(FieldSpec const & f)
{
    auto const & g = f.generators();
    std::size_t n = g.size();
    std::vector<i128> out;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<PrimeStarDiscriminant> sub;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) {
                sub.push_back(g[i]);
            }
        }
        i128 d = sub.size() == 1 ? sub[0].value() : product_discriminant(sub);
        if (std::find(out.begin(), out.end(), d) == out.end()) {
            out.push_back(d);
        }
    }
    std::sort(out.begin(), out.end(), [](i128 x, i128 y) {
        i128 ax = abs128(x), ay = abs128(y);
        return ax != ay ? ax < ay : x < y;
    });
    return out;
}

i128 composite_discriminant(FieldSpec const & f)
{
    i128 prod = 1;
    for (i128 d : quadratic_subfields(f)) {
        prod *= d;
    }
    return prod;
}

GroupStructure odd_class_group(FieldSpec const & f, StructureCache * cache)
{
    GroupStructure acc;
    for (i128 d : quadratic_subfields(f)) {
        acc = direct_product(acc, odd_part(structure_of(as_disc64(d), cache)));
    }
    return acc;
}

std::string to_string(Rejection r)
{
    switch (r) {
    case Rejection::none: return "accepted";
    case Rejection::even_class_number: return "even class number";
    case Rejection::exponent_too_large: return "odd part exponent does not divide u";
    }
    return "?";
}

ExponentResult class_group_if_exponent_divides(FieldSpec const & f, i64 u, StructureCache * cache)
{
    if (u < 1 || u % 2 == 0) {
        throw std::invalid_argument("class_group_if_exponent_divides: u must be odd");
    }
    ExponentResult res;
    if (!narrow_h_odd(f)) {
        res.reason = Rejection::even_class_number;
        return res;
    }
    GroupStructure acc;
    for (i128 d128 : quadratic_subfields(f)) {
        i64 d = as_disc64(d128);
        // Cheap form-order witnesses before the full structure of a new field.
        bool known = cache && cache->find(d).has_value();
        if (d < 0 && !known && refuted_by_prime_forms(d, static_cast<u64>(u) << 40)) {
            res.reason = Rejection::exponent_too_large;
            return res;
        }
        GroupStructure odd = odd_part(structure_of(d, cache));
        if (u % odd.exponent() != 0) {
            res.reason = Rejection::exponent_too_large;
            return res;
        }
        acc = direct_product(acc, odd);
    }
    res.group = acc;
    return res;
}

} // namespace mqe
