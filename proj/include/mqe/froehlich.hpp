#pragma once

// The F2-valued symbol [x,y] on ramified primes and the parity criterion for
// the narrow class number of an n-quadratic field built from P*.

#include "mqe/arith.hpp"
#include "mqe/field.hpp"

#include <functional>
#include <vector>

namespace mqe {

enum class TwoType { none, sqrt2, sqrt_m1, sqrt_m2, zeta8 };

struct SymbolContext {
    FieldSpec field;
    std::vector<i128> S; // ramified primes, ascending (2 first when present)
    TwoType two_type = TwoType::none;

    static SymbolContext of(FieldSpec const & field);
    bool has_two() const { return !S.empty() && S.front() == 2; }
};

/// [x,y] for x in S' = S (plus -1 when 2 in S), y in S, x != y, (x,y) != (-1,2).
/// Odd x: parity of the index of y mod x. x = 2 or -1: the bits r, s with
/// y = 5^r (-1)^s mod 8.
F2 symbol(i128 x, i128 y);

using SymbolFn = std::function<F2(i128, i128)>;

/// a_{p1}(p) for p1 = S[0] < p. Undefined (throws) for fields containing zeta_8.
F2 a_value(SymbolContext const & ctx, i128 p, SymbolFn const & sym = symbol);

/// Determinant over F2 of the 3x3 matrix M built from S = {p1 < p2 < p3}.
F2 det_M(SymbolContext const & ctx, SymbolFn const & sym = symbol);

/// h+(K) odd, for K the composite of the field's prime-power-conductor generators.
bool narrow_h_odd(FieldSpec const & field);

} // namespace mqe
