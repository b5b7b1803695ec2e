#pragma once

// An n-quadratic field given by 1-3 prime-power discriminant generators.

#include "mqe/arith.hpp"

#include <string>
#include <vector>

namespace mqe {

class FieldSpec
{
  public:
    /// Sorts canonically and validates: 1 to 3 generators, pairwise distinct
    /// underlying primes except the pair {-4, -8}.
    static FieldSpec from_generators(std::vector<PrimeStarDiscriminant> gens);
    static FieldSpec from_values(std::vector<i128> const & values);

    std::vector<PrimeStarDiscriminant> const & generators() const { return gens_; }
    std::size_t n() const { return gens_.size(); }
    std::vector<i128> values() const;
    /// Some generator is negative, so K has a totally imaginary subfield.
    bool is_imaginary() const;
    std::size_t negative_count() const;
    /// Contains Q(zeta_8), i.e. both -4 and -8 are generators.
    bool contains_zeta8() const;
    std::string to_string() const;

    friend bool operator==(FieldSpec const & x, FieldSpec const & y) { return x.values() == y.values(); }

  private:
    explicit FieldSpec(std::vector<PrimeStarDiscriminant> g) : gens_(std::move(g)) {}
    std::vector<PrimeStarDiscriminant> gens_;
};

} // namespace mqe
