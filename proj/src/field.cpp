#include "mqe/field.hpp"

#include <algorithm>
#include <stdexcept>

namespace mqe {

FieldSpec FieldSpec::from_generators(std::vector<PrimeStarDiscriminant> gens)
{
    if (gens.empty() || gens.size() > 3) {
        throw std::invalid_argument("FieldSpec: expected 1 to 3 generators");
    }
    std::sort(gens.begin(), gens.end(), canonical_less);
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            if (gens[i].prime() != gens[j].prime()) {
                continue;
            }
            bool zeta8_pair = gens[i].value() == -4 && gens[j].value() == -8;
            if (!zeta8_pair) {
                throw std::invalid_argument("FieldSpec: repeated prime " + mqe::to_string(gens[i].prime()));
            }
        }
    }
    return FieldSpec(std::move(gens));
}

FieldSpec FieldSpec::from_values(std::vector<i128> const & values)
{
    std::vector<PrimeStarDiscriminant> gens;
    for (i128 v : values) {
        gens.push_back(PrimeStarDiscriminant::from_value(v));
    }
    return from_generators(std::move(gens));
}

std::vector<i128> FieldSpec::values() const
{
    std::vector<i128> out;
    for (auto const & g : gens_) {
        out.push_back(g.value());
    }
    return out;
}

bool FieldSpec::is_imaginary() const
{
    return negative_count() > 0;
}

std::size_t FieldSpec::negative_count() const
{
    return static_cast<std::size_t>(
        std::count_if(gens_.begin(), gens_.end(), [](auto const & g) { return g.is_negative(); }));
}

bool FieldSpec::contains_zeta8() const
{
    bool m4 = false, m8 = false;
    for (auto const & g : gens_) {
        m4 = m4 || g.value() == -4;
        m8 = m8 || g.value() == -8;
    }
    return m4 && m8;
}

std::string FieldSpec::to_string() const
{
    std::string s = "(";
    for (std::size_t i = 0; i < gens_.size(); ++i) {
        if (i) {
            s += ", ";
        }
        s += mqe::to_string(gens_[i].value());
    }
    return s + ")";
}

} // namespace mqe
