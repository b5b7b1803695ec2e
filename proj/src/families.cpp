#include "mqe/families.hpp"

#include "mqe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

namespace mqe {

namespace {

using Key = std::pair<i128, i128>;

Key key_of(i128 x, i128 y)
{
    return x < y ? Key{x, y} : Key{y, x};
}

Key key_of(FieldSpec const & f)
{
    auto v = f.values();
    return key_of(v.at(0), v.at(1));
}

FamilyRecord make_record(std::string family, FieldSpec const & f, GroupStructure g)
{
    return FamilyRecord{std::move(family), f, composite_discriminant(f), std::move(g)};
}

// Runs class_group_if_exponent_divides over candidate fields in parallel and
// keeps the accepted ones in a deterministic order.
std::vector<FamilyRecord> accept_all(std::vector<FieldSpec> const & fields, std::string const & family,
                                     i64 u, StructureCache * cache, unsigned jobs)
{
    std::vector<std::optional<FamilyRecord>> slots(fields.size());
    parallel_for(fields.size(), jobs, [&](std::size_t i) {
        ExponentResult r = class_group_if_exponent_divides(fields[i], u, cache);
        if (r.accepted()) {
            slots[i] = make_record(family, fields[i], r.group);
        }
    });
    std::vector<FamilyRecord> out;
    for (auto & s : slots) {
        if (s) {
            out.push_back(std::move(*s));
        }
    }
    sort_records(out);
    return out;
}

void require_odd(i64 u)
{
    if (u < 1 || u % 2 == 0) {
        throw std::invalid_argument("u must be odd and positive");
    }
}

} // namespace

void sort_records(std::vector<FamilyRecord> & records)
{
    std::sort(records.begin(), records.end(), [](FamilyRecord const & x, FamilyRecord const & y) {
        if (x.family != y.family) {
            return x.family < y.family;
        }
        if (x.disc != y.disc) {
            return x.disc < y.disc;
        }
        return x.field.values() < y.field.values();
    });
}

std::vector<int> rank_histogram(std::vector<FamilyRecord> const & records)
{
    std::vector<int> hist(5, 0);
    for (auto const & r : records) {
        std::size_t k = r.class_group.rank();
        if (k >= hist.size()) {
            throw std::logic_error("class group rank above 4 in " + r.field.to_string());
        }
        ++hist[k];
    }
    return hist;
}

std::vector<PrimeStarDiscriminant> compute_I1(i64 u, i64 dmax, unsigned jobs)
{
    require_odd(u);
    std::vector<PrimeStarDiscriminant> cands;
    for (i128 v : {-4, -8}) {
        if (-v <= dmax) {
            cands.push_back(PrimeStarDiscriminant::from_value(v));
        }
    }
    for (u64 p : primes_up_to(static_cast<u64>(std::max<i64>(dmax, 2)))) {
        if (p % 4 == 3) {
            cands.push_back(p_star(static_cast<i128>(p)));
        }
    }
    std::vector<char> keep(cands.size(), 0);
    parallel_for(cands.size(), jobs, [&](std::size_t i) {
        keep[i] = exponent_divides(static_cast<i64>(cands[i].value()), u, ExponentMode::fast);
    });
    std::vector<PrimeStarDiscriminant> out;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (keep[i]) {
            out.push_back(cands[i]);
        }
    }
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

std::vector<FamilyRecord> i1_records(std::vector<PrimeStarDiscriminant> const & i1, StructureCache * cache)
{
    std::vector<FamilyRecord> out;
    for (auto const & p : i1) {
        FieldSpec f = FieldSpec::from_generators({p});
        out.push_back(make_record("1", f, odd_class_group(f, cache)));
    }
    sort_records(out);
    return out;
}

std::vector<FamilyRecord> compute_K2a(std::vector<PrimeStarDiscriminant> const & i1, i64 u,
                                      StructureCache * cache, unsigned jobs)
{
    require_odd(u);
    std::vector<FieldSpec> fields;
    for (std::size_t i = 0; i < i1.size(); ++i) {
        for (std::size_t j = 0; j < i1.size(); ++j) {
            i128 a = abs128(i1[i].value()), b = abs128(i1[j].value());
            if (a < b) {
                fields.push_back(FieldSpec::from_generators({i1[i], i1[j]}));
            }
        }
    }
    return accept_all(fields, "2a", u, cache, jobs);
}

std::vector<PrimeStarDiscriminant> rp_scan(PrimeStarDiscriminant p, i64 u, i64 qmax, unsigned jobs)
{
    require_odd(u);
    if (!p.is_negative()) {
        throw std::invalid_argument("rp_scan: p* must be negative");
    }
    std::vector<PrimeStarDiscriminant> cands;
    if (p.prime() != 2 && qmax >= 8) {
        cands.push_back(PrimeStarDiscriminant::from_value(8));
    }
    for (u64 q : primes_up_to(static_cast<u64>(std::max<i64>(qmax, 2)))) {
        if (q % 4 == 1 && static_cast<i128>(q) != p.prime()) {
            cands.push_back(PrimeStarDiscriminant::from_value(static_cast<i128>(q)));
        }
    }
    std::vector<char> keep(cands.size(), 0);
    parallel_for(cands.size(), jobs, [&](std::size_t i) {
        i128 D = product_discriminant(p, cands[i]);
        if (abs128(D) >= (static_cast<i128>(1) << 62)) {
            throw std::range_error("rp_scan: discriminant beyond the 62-bit range");
        }
        keep[i] = exponent_divides(static_cast<i64>(D), 2 * u, ExponentMode::fast);
    });
    std::vector<PrimeStarDiscriminant> out;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (keep[i]) {
            out.push_back(cands[i]);
        }
    }
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

i64 rp_qmax_u3(PrimeStarDiscriminant p)
{
    i128 a = abs128(p.value());
    if (a > 4027) {
        throw std::invalid_argument("rp_qmax_u3: requires |p*| <= 4027");
    }
    return static_cast<i64>(5761140 / a);
}

std::vector<FamilyRecord> compute_K2b(std::vector<PrimeStarDiscriminant> const & i1, RpTable const & rp,
                                      i64 u, StructureCache * cache, unsigned jobs)
{
    require_odd(u);
    std::vector<FieldSpec> fields;
    for (auto const & p : i1) {
        auto it = rp.find(static_cast<i64>(p.value()));
        if (it == rp.end()) {
            continue;
        }
        for (auto const & q : it->second) {
            fields.push_back(FieldSpec::from_generators({p, q}));
        }
    }
    return accept_all(fields, "2b", u, cache, jobs);
}

std::vector<FamilyRecord> compute_K3a(std::vector<FamilyRecord> const & k2a, i64 u,
                                      StructureCache * cache, unsigned jobs)
{
    return compute_K3(k2a, {}, u, cache, jobs).a;
}

K3Result compute_K3(std::vector<FamilyRecord> const & k2a, std::vector<FamilyRecord> const & k2b, i64 u,
                    StructureCache * cache, unsigned jobs)
{
    require_odd(u);
    std::set<Key> in2a, in2b;
    std::set<i128> neg, pos;
    for (auto const & r : k2a) {
        in2a.insert(key_of(r.field));
        for (i128 v : r.field.values()) {
            neg.insert(v);
        }
    }
    for (auto const & r : k2b) {
        in2b.insert(key_of(r.field));
        for (i128 v : r.field.values()) {
            (v < 0 ? neg : pos).insert(v);
        }
    }
    std::vector<i128> negs(neg.begin(), neg.end());
    std::vector<FieldSpec> fa, fb;
    for (std::size_t i = 0; i < negs.size(); ++i) {
        for (std::size_t j = i + 1; j < negs.size(); ++j) {
            if (!in2a.count(key_of(negs[i], negs[j]))) {
                continue;
            }
            for (std::size_t k = j + 1; k < negs.size(); ++k) {
                if (in2a.count(key_of(negs[i], negs[k])) && in2a.count(key_of(negs[j], negs[k]))) {
                    fa.push_back(FieldSpec::from_values({negs[i], negs[j], negs[k]}));
                }
            }
            for (i128 q : pos) {
                if (in2b.count(key_of(negs[i], q)) && in2b.count(key_of(negs[j], q))) {
                    fb.push_back(FieldSpec::from_values({negs[i], negs[j], q}));
                }
            }
        }
    }
    return K3Result{accept_all(fa, "3a", u, cache, jobs), accept_all(fb, "3b", u, cache, jobs)};
}

double crossover_f1(double x)
{
    double t = 1.881 * std::log(x) + 0.34 * 2 + 5.5;
    return t * t;
}

double crossover_f2(double x)
{
    return std::cbrt(x / (4.0 * 4027.0));
}

Crossover crossover_bound(int u)
{
    if (u != 3) {
        throw std::invalid_argument("crossover_bound: only u = 3 has a closed-form bound");
    }
    auto above = [](double x) { return crossover_f1(x) >= crossover_f2(x); };
    // Log-spaced scan for the last sign change, then bisection.
    double const start = std::log(10.0), stop = std::log(1e30);
    int const steps = 4000;
    double lo = 0, hi = 0;
    for (int i = steps; i > 0; --i) {
        double a = std::exp(start + (stop - start) * (i - 1) / steps);
        double b = std::exp(start + (stop - start) * i / steps);
        if (above(a) && !above(b)) {
            lo = a;
            hi = b;
            break;
        }
    }
    if (hi == 0) {
        throw std::logic_error("crossover_bound: no sign change in the search range");
    }
    while ((hi - lo) > 1e-6 * lo) {
        double mid = 0.5 * (lo + hi);
        (above(mid) ? lo : hi) = mid;
    }
    return Crossover{lo, lo, hi};
}

} // namespace mqe
