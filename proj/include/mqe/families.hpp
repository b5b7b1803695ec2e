#pragma once

// Enumeration drivers for the imaginary quadratic, biquadratic and
// triquadratic fields whose class group has exponent dividing an odd u.

#include "mqe/multiquad.hpp"

#include <map>
#include <string>
#include <vector>

namespace mqe {

struct FamilyRecord {
    std::string family; // "1", "2a", "2b", "3a", "3b"
    FieldSpec field;
    i128 disc = 0;      // composite discriminant
    GroupStructure class_group;
};

/// Sort by (family, composite discriminant, generators).
void sort_records(std::vector<FamilyRecord> & records);

/// Histogram of class group ranks r = 0..4 (ranks above 4 are rejected).
std::vector<int> rank_histogram(std::vector<FamilyRecord> const & records);

/// Negative prime-power discriminants p* with |p*| <= dmax and E(Q(sqrt p*)) | u,
/// sorted canonically.
std::vector<PrimeStarDiscriminant> compute_I1(i64 u, i64 dmax, unsigned jobs = 1);

std::vector<FamilyRecord> i1_records(std::vector<PrimeStarDiscriminant> const & i1,
                                     StructureCache * cache = nullptr);

/// Pairs of I1 with |p*| < |q*| (and the pair (-4, -8)) whose class group has
/// odd order and exponent dividing u.
std::vector<FamilyRecord> compute_K2a(std::vector<PrimeStarDiscriminant> const & i1, i64 u,
                                      StructureCache * cache = nullptr, unsigned jobs = 1);

/// Positive q* <= qmax with a prime different from p and E(Q(sqrt(p* q*))) | 2u.
std::vector<PrimeStarDiscriminant> rp_scan(PrimeStarDiscriminant p, i64 u, i64 qmax,
                                           unsigned jobs = 1);

/// Complete scan bound for u = 3: floor(5761140 / |p*|), for |p*| <= 4027.
i64 rp_qmax_u3(PrimeStarDiscriminant p);

using RpTable = std::map<i64, std::vector<PrimeStarDiscriminant>>; // keyed by p*

std::vector<FamilyRecord> compute_K2b(std::vector<PrimeStarDiscriminant> const & i1,
                                      RpTable const & rp, i64 u,
                                      StructureCache * cache = nullptr, unsigned jobs = 1);

struct K3Result {
    std::vector<FamilyRecord> a;
    std::vector<FamilyRecord> b;
};

std::vector<FamilyRecord> compute_K3a(std::vector<FamilyRecord> const & k2a, i64 u,
                                      StructureCache * cache = nullptr, unsigned jobs = 1);
K3Result compute_K3(std::vector<FamilyRecord> const & k2a, std::vector<FamilyRecord> const & k2b,
                    i64 u, StructureCache * cache = nullptr, unsigned jobs = 1);

double crossover_f1(double x);
double crossover_f2(double x);

struct Crossover {
    double value = 0; // largest x with f1(x) >= f2(x), within the bracket
    double lo = 0;    // f1(lo) >= f2(lo)
    double hi = 0;    // f1(hi) < f2(hi)
};

/// Locates the last crossing of f1 and f2 to relative tolerance 1e-6. Only
/// u = 3 is supported.
Crossover crossover_bound(int u);

} // namespace mqe
