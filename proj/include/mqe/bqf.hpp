#pragma once

// Class groups of quadratic fields through binary quadratic forms.
//
// For D < 0 the form class group is Cl(D); for D > 0 it is the narrow class
// group Cl+(D). Only fundamental discriminants with |D| < 2^62 are handled.

#include "mqe/arith.hpp"

#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

namespace mqe {

struct QuadForm {
    i64 a = 1;
    i64 b = 1;
    i64 c = 1;

    friend bool operator==(QuadForm const &, QuadForm const &) = default;
    friend auto operator<=>(QuadForm const &, QuadForm const &) = default;
};

struct QuadFormHash {
    std::size_t operator()(QuadForm const & f) const noexcept
    {
        u64 h = static_cast<u64>(f.a) * 0x9e3779b97f4a7c15ULL;
        h ^= static_cast<u64>(f.b) + 0x7f4a7c159e3779b9ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

i128 discriminant(QuadForm const & f);

/// Finite abelian group given by invariant factors d1 | d2 | ... | dk, di >= 2.
struct GroupStructure {
    std::vector<i64> divisors;

    i64 order() const;
    i64 exponent() const;
    std::size_t rank() const { return divisors.size(); }
    bool is_trivial() const { return divisors.empty(); }

    friend bool operator==(GroupStructure const &, GroupStructure const &) = default;
};

/// Invariant factors of the product of cyclic groups of the given orders.
GroupStructure structure_from_cyclic(std::vector<i64> const & orders);
GroupStructure direct_product(GroupStructure const & x, GroupStructure const & y);
/// Strips every factor of 2; trivial factors are dropped.
GroupStructure odd_part(GroupStructure const & s);

struct ClassGroup {
    i64 discriminant = 0;
    GroupStructure structure;
    std::vector<QuadForm> generators;
};

/// Number of prime discriminants dividing D (t in genus theory).
int prime_discriminant_count(i64 D);

/// Checks |D| < 2^62 and fundamentality; throws std::invalid_argument.
void require_fundamental(i64 D);

QuadForm principal_form(i64 D);
QuadForm reduce_definite(QuadForm f);
bool is_reduced_indefinite(QuadForm const & f, i64 D);
/// One reduction step (c, b', c') with b' = -b mod 2|c| normalized.
QuadForm rho_step(QuadForm const & f, i64 D);
QuadForm reduce_indefinite(QuadForm f, i64 D);

/// Reduced representative of the product class. For D > 0 the result is a
/// reduced form somewhere on the cycle of the product class.
QuadForm compose(QuadForm const & f, QuadForm const & g, i64 D);
QuadForm inverse(QuadForm const & f, i64 D);
QuadForm power(QuadForm const & f, u64 e, i64 D);

/// Prime form of norm l (l split or ramified), reduced. Throws if l is inert.
QuadForm prime_form(i64 D, u64 l);

std::vector<QuadForm> reduced_forms_imaginary(i64 D);
i64 class_number_imaginary(i64 D);

/// One canonical representative (a > 0, minimal (a, b)) per rho-cycle of
/// reduced indefinite forms; the count is h+(D).
std::vector<QuadForm> narrow_cycles_indefinite(i64 D);

ClassGroup class_group(i64 D);

/// 4 | h+(D) for a discriminant with exactly two prime discriminant factors,
/// decided by the Redei symbol.
bool redei_four_divides(i64 D);

enum class ExponentMode { exact, fast };

struct FastFilterOptions {
    u64 prime_bound = 400;     // split primes considered for form-order tests
    int prime_form_tests = 12; // maximum number of prime forms powered
};

/// True when some split prime form f (D < 0) has f^e != 1, which proves the
/// exponent does not divide e. False is inconclusive.
bool refuted_by_prime_forms(i64 D, u64 e, FastFilterOptions const & opts = {});

/// Exponent of the (narrow) class group divides m.
bool exponent_divides(i64 D, i64 m, ExponentMode mode = ExponentMode::exact,
                      FastFilterOptions const & opts = {});

/// Exponent of the odd part of the (narrow) class group divides the odd u.
bool odd_exponent_divides(i64 D, i64 u, ExponentMode mode = ExponentMode::exact,
                          FastFilterOptions const & opts = {});

/// Thread-safe memo of class group structures keyed by discriminant.
class StructureCache
{
  public:
    GroupStructure structure(i64 D);
    std::optional<GroupStructure> find(i64 D) const;
    std::size_t size() const;

  private:
    mutable std::mutex mutex_;
    std::unordered_map<i64, GroupStructure> map_;
};

} // namespace mqe
