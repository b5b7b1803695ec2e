#include "mqe/froehlich.hpp"

#include <algorithm>
#include <stdexcept>

namespace mqe {

namespace {

// (r, s) with y = 5^r (-1)^s mod 8 for odd y.
std::pair<F2, F2> two_adic_bits(i128 y)
{
    switch (static_cast<int>(((y % 8) + 8) % 8)) {
    case 1: return {F2(false), F2(false)};
    case 3: return {F2(true), F2(true)};
    case 5: return {F2(true), F2(false)};
    case 7: return {F2(false), F2(true)};
    default: throw std::invalid_argument("symbol: y must be odd for x in {2, -1}");
    }
}

} // namespace

SymbolContext SymbolContext::of(FieldSpec const & field)
{
    SymbolContext ctx{field, {}, TwoType::none};
    for (auto const & g : field.generators()) {
        if (std::find(ctx.S.begin(), ctx.S.end(), g.prime()) == ctx.S.end()) {
            ctx.S.push_back(g.prime());
        }
        switch (static_cast<int>(g.value())) {
        case 8: ctx.two_type = TwoType::sqrt2; break;
        case -4: ctx.two_type = TwoType::sqrt_m1; break;
        case -8: ctx.two_type = TwoType::sqrt_m2; break;
        default: break;
        }
    }
    if (field.contains_zeta8()) {
        ctx.two_type = TwoType::zeta8;
    }
    std::sort(ctx.S.begin(), ctx.S.end());
    return ctx;
}

F2 symbol(i128 x, i128 y)
{
    if (x == y) {
        throw std::invalid_argument("symbol: x == y");
    }
    if (x == -1 && y == 2) {
        throw std::invalid_argument("symbol: [-1,2] is not defined");
    }
    if (x == 2) {
        return two_adic_bits(y).first;
    }
    if (x == -1) {
        return two_adic_bits(y).second;
    }
    return discrete_log_parity(y, x);
}

F2 a_value(SymbolContext const & ctx, i128 p, SymbolFn const & sym)
{
    if (ctx.two_type == TwoType::zeta8) {
        throw std::invalid_argument("a_value: undefined for fields containing Q(zeta_8)");
    }
    i128 p1 = ctx.S.front();
    if (!(p > p1)) {
        throw std::invalid_argument("a_value: p must exceed the smallest ramified prime");
    }
    if (p1 != 2 || ctx.two_type == TwoType::sqrt2) {
        return sym(p1, p);
    }
    if (ctx.two_type == TwoType::sqrt_m1) {
        return sym(-1, p);
    }
    return sym(2, p) + sym(-1, p);
}

F2 det_M(SymbolContext const & ctx, SymbolFn const & sym)
{
    if (ctx.S.size() != 3) {
        throw std::invalid_argument("det_M: needs exactly three ramified primes");
    }
    if (ctx.two_type == TwoType::zeta8) {
        throw std::invalid_argument("det_M: undefined for fields containing Q(zeta_8)");
    }
    i128 p1 = ctx.S[0], p2 = ctx.S[1], p3 = ctx.S[2];
    F2 const z;
    F2 m[3][3] = {
        {sym(p2, p1), z, sym(p3, p1)},
        {a_value(ctx, p2, sym), sym(p3, p2), z},
        {z, sym(p2, p3), a_value(ctx, p3, sym)},
    };
    return m[0][0] * (m[1][1] * m[2][2] + m[1][2] * m[2][1]) +
           m[0][1] * (m[1][0] * m[2][2] + m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] + m[1][1] * m[2][0]);
}

bool narrow_h_odd(FieldSpec const & field)
{
    SymbolContext ctx = SymbolContext::of(field);
    switch (field.n()) {
    case 1:
        return true;
    case 2:
        if (ctx.S.size() == 1) {
            return ctx.S.front() == 2; // Q(sqrt(-1), sqrt(-2))
        }
        return !symbol(ctx.S[1], ctx.S[0]).is_zero() || !a_value(ctx, ctx.S[1]).is_zero();
    case 3:
        if (ctx.S.size() == 2) {
            return ctx.S.front() == 2 && !symbol(ctx.S[1], 2).is_zero();
        }
        return !det_M(ctx).is_zero();
    default:
        return false;
    }
}

} // namespace mqe
