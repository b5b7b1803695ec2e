#pragma once

// Norm-equation sieve for the positive q* with E(Q(sqrt(p* q*))) | 2u.
//
// For each odd prime l that could be the smallest prime splitting in
// Q(sqrt(p* q)), a prime ideal above l has order dividing 2u in the class
// group, which gives a norm equation V = (sX)^2 - c l^u = p* q Y^2 < 0. The
// sieve scans X, keeps V whose field discriminant has the shape p* q, and
// certifies every hit with an exact class group computation.

#include "mqe/arith.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mqe {

enum class XCond { odd, two_mod_4, zero_mod_4 };

/// V = (scale * X)^2 - coeff * l^u with X restricted by cond.
struct SieveEquation {
    i64 scale = 1;
    i64 coeff = 1;
    XCond cond = XCond::odd;
};

struct SieveCase {
    int id = 0;                      // 1..6
    bool doubled = false;            // the prime above l has order 2u rather than u
    std::optional<int> legendre;     // required (l|p) for odd p
    bool mod_p_wheel = false;        // X^2 = coeff l^u (mod p) holds for every solution
    std::vector<SieveEquation> equations;
};

/// 4 does not divide h(p* q) for a prime q = 1 (mod 4), q != p.
bool redei_filter(PrimeStarDiscriminant p, i128 q);

/// (1.881 ln|D| + 6.18)^2, the ERH bound on the smallest splitting prime.
double bach_sorenson(double abs_d);

/// Cases that can hold for smallest splitting prime l (odd, l != p).
std::vector<SieveCase> select_cases(PrimeStarDiscriminant p, u64 l);

/// No prime below l splits in Q(sqrt D).
bool smallest_split_check(i128 D, u64 l);

struct SieveConfig {
    PrimeStarDiscriminant p_star = PrimeStarDiscriminant::from_value(-3);
    i64 u = 3;
    bool assume_erh = true;
    std::optional<u64> l_max;        // exclusive with assume_erh
    bool report_progress = false;
    unsigned jobs = 1;
    std::string checkpoint;          // append-only JSONL file; empty disables

    /// Throws std::invalid_argument unless exactly one stopping rule is set.
    void validate() const;
};

struct SieveResult {
    std::vector<PrimeStarDiscriminant> rp; // canonical order
    bool exhaustive = false;               // ERH stop reached
    u64 last_l = 2;                        // largest l fully processed
    u64 stop_l = 0;                        // first l beyond the ERH bound (0 if none)
    u64 survivors = 0;                     // candidates reaching the exact checks
};

SieveResult sieve_rp(SieveConfig const & cfg);

} // namespace mqe
