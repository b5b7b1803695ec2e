#pragma once

// Invariants of n-quadratic fields: quadratic subfields, the odd part of the
// class group as a product over subfields, and exponent-u membership.

#include "mqe/bqf.hpp"
#include "mqe/field.hpp"

#include <string>
#include <vector>

namespace mqe {

/// Discriminants of the 2^n - 1 quadratic subfields, sorted by (|d|, d).
std::vector<i128> quadratic_subfields(FieldSpec const & f);

/// Product of the discriminants of all quadratic subfields.
i128 composite_discriminant(FieldSpec const & f);

/// Odd part of Cl(K) as the product of the odd parts of the subfield class
/// groups (narrow for real subfields). Uses the cache when given.
GroupStructure odd_class_group(FieldSpec const & f, StructureCache * cache = nullptr);

enum class Rejection { none, even_class_number, exponent_too_large };

std::string to_string(Rejection r);

struct ExponentResult {
    Rejection reason = Rejection::none;
    GroupStructure group; // meaningful when accepted()

    bool accepted() const { return reason == Rejection::none; }
};

/// The odd class group when h+(K) is odd and its exponent divides the odd u.
ExponentResult class_group_if_exponent_divides(FieldSpec const & f, i64 u,
                                               StructureCache * cache = nullptr);

} // namespace mqe
