#include "mqe/bqf.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_set>

namespace mqe {

namespace {

constexpr i64 kMaxAbsDisc = static_cast<i64>(1) << 62;

i128 floor_div(i128 a, i128 b)
{
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

i128 mod_pos(i128 a, i128 m)
{
    i128 r = a % m;
    return r < 0 ? r + m : r;
}

// Extended gcd: returns g = gcd(a, b) >= 0 with x*a + y*b = g.
i128 xgcd(i128 a, i128 b, i128 & x, i128 & y)
{
    i128 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        i128 q = floor_div(a, b);
        i128 t = a - q * b;
        a = b;
        b = t;
        t = x0 - q * x1;
        x0 = x1;
        x1 = t;
        t = y0 - q * y1;
        y0 = y1;
        y1 = t;
    }
    if (a < 0) {
        a = -a;
        x0 = -x0;
        y0 = -y0;
    }
    x = x0;
    y = y0;
    return a;
}

i64 narrow(i128 v)
{
    if (v > INT64_MAX || v < INT64_MIN) {
        throw std::range_error("quadratic form coefficient exceeds 64 bits");
    }
    return static_cast<i64>(v);
}

u64 tonelli_shanks(u64 n, u64 p)
{
    n %= p;
    if (n == 0 || p == 2) {
        return n;
    }
    if (p % 4 == 3) {
        return powmod64(n, (p + 1) / 4, p);
    }
    u64 q = p - 1;
    int s = 0;
    while ((q & 1) == 0) {
        q >>= 1;
        ++s;
    }
    u64 z = 2;
    while (powmod64(z, (p - 1) / 2, p) != p - 1) {
        ++z;
    }
    u64 m = static_cast<u64>(s);
    u64 c = powmod64(z, q, p);
    u64 t = powmod64(n, q, p);
    u64 r = powmod64(n, (q + 1) / 2, p);
    while (t != 1) {
        u64 i = 0;
        u64 tt = t;
        while (tt != 1) {
            tt = mulmod64(tt, tt, p);
            ++i;
        }
        u64 b = c;
        for (u64 j = 0; j + i + 1 < m; ++j) {
            b = mulmod64(b, b, p);
        }
        m = i;
        c = mulmod64(b, b, p);
        t = mulmod64(t, c, p);
        r = mulmod64(r, b, p);
    }
    return r;
}

i64 inv_mod(i64 a, i64 m)
{
    i128 x, y;
    i128 g = xgcd(a, m, x, y);
    if (g != 1) {
        throw std::logic_error("inv_mod: not invertible");
    }
    return static_cast<i64>(mod_pos(x, m));
}

// Square roots of D modulo 4a, reported as residues x in [0, 2a) with
// x^2 = D (mod 4a). Solutions are periodic modulo 2a.
class QuadraticRoots
{
  public:
    QuadraticRoots(i64 D, i64 bound) : D_(D), bound_(std::max<i64>(bound, 2))
    {
        spf_.assign(static_cast<std::size_t>(bound_) + 1, 0);
        for (i64 i = 2; i <= bound_; ++i) {
            if (spf_[i] != 0) {
                continue;
            }
            for (i64 j = i; j <= bound_; j += i) {
                if (spf_[j] == 0) {
                    spf_[j] = static_cast<std::uint32_t>(i);
                }
            }
        }
        prime_root_.assign(static_cast<std::size_t>(bound_) + 1, -2);
    }

    // Fills out with the residues for modulus 4a; returns false when none.
    bool roots(i64 a, std::vector<i64> & out)
    {
        out.clear();
        i64 e2 = 0;
        i64 m = a;
        while ((m & 1) == 0) {
            m >>= 1;
            ++e2;
        }
        auto const & r2 = two_adic(e2);
        if (r2.empty()) {
            return false;
        }
        out.assign(r2.begin(), r2.end());
        i64 mod = static_cast<i64>(1) << (e2 + 1);
        while (m > 1) {
            i64 p = spf_[m];
            i64 pk = 1;
            int k = 0;
            while (m % p == 0) {
                m /= p;
                pk *= p;
                ++k;
            }
            odd_roots(p, k, pk, scratch_);
            if (scratch_.empty()) {
                out.clear();
                return false;
            }
            // CRT combine residues mod `mod` with residues mod pk.
            i64 inv = inv_mod(mod % pk, pk);
            combined_.clear();
            for (i64 x : out) {
                for (i64 y : scratch_) {
                    i64 t = static_cast<i64>(mod_pos(static_cast<i128>(y - x) * inv, pk));
                    combined_.push_back(x + mod * t);
                }
            }
            out.swap(combined_);
            mod *= pk;
        }
        return !out.empty();
    }

  private:
    std::vector<i64> const & two_adic(i64 e)
    {
        while (static_cast<i64>(two_levels_.size()) <= e) {
            i64 level = static_cast<i64>(two_levels_.size());
            std::vector<i64> next;
            if (level == 0) {
                i64 r4 = static_cast<i64>(mod_pos(D_, 4));
                if (r4 == 0) {
                    next.push_back(0);
                } else if (r4 == 1) {
                    next.push_back(1);
                }
            } else {
                i64 half = static_cast<i64>(1) << level;     // previous modulus 2^level
                i128 check = static_cast<i128>(1) << (level + 2);
                for (i64 x : two_levels_.back()) {
                    for (i64 cand : {x, x + half}) {
                        if (mod_pos(static_cast<i128>(cand) * cand - D_, check) == 0) {
                            next.push_back(cand);
                        }
                    }
                }
            }
            two_levels_.push_back(std::move(next));
        }
        return two_levels_[static_cast<std::size_t>(e)];
    }

    void odd_roots(i64 p, int k, i64 pk, std::vector<i64> & out)
    {
        out.clear();
        i64 & cached = prime_root_[static_cast<std::size_t>(p)];
        if (cached == -2) {
            i64 dm = static_cast<i64>(mod_pos(D_, p));
            if (dm == 0) {
                cached = 0;
            } else if (powmod64(static_cast<u64>(dm), static_cast<u64>(p - 1) / 2,
                                static_cast<u64>(p)) != 1) {
                cached = -1;
            } else {
                cached = static_cast<i64>(tonelli_shanks(static_cast<u64>(dm), static_cast<u64>(p)));
            }
        }
        if (cached < 0) {
            return;
        }
        if (cached == 0) {
            out.push_back(0);
        } else {
            out.push_back(cached);
            out.push_back(p - cached);
        }
        i64 cur = p;
        for (int level = 1; level < k; ++level) {
            i64 next_mod = cur * p;
            std::vector<i64> lifted;
            for (i64 x : out) {
                for (i64 t = 0; t < p; ++t) {
                    i64 cand = x + t * cur;
                    if (mod_pos(static_cast<i128>(cand) * cand - D_, next_mod) == 0) {
                        lifted.push_back(cand);
                    }
                }
            }
            out.swap(lifted);
            cur = next_mod;
            if (out.empty()) {
                return;
            }
        }
        (void)pk;
    }

    i64 D_;
    i64 bound_;
    std::vector<std::uint32_t> spf_;
    std::vector<i64> prime_root_;
    std::vector<std::vector<i64>> two_levels_;
    std::vector<i64> scratch_;
    std::vector<i64> combined_;
};

i64 imaginary_bound(i64 D)
{
    return static_cast<i64>(isqrt64(static_cast<u64>(-D) / 3));
}

template <class Emit>
void enumerate_imaginary(i64 D, Emit && emit)
{
    i64 amax = imaginary_bound(D);
    QuadraticRoots qr(D, amax);
    std::vector<i64> rts;
    for (i64 a = 1; a <= amax; ++a) {
        if (!qr.roots(a, rts)) {
            continue;
        }
        for (i64 x : rts) {
            i64 b = x <= a ? x : x - 2 * a;
            i128 num = static_cast<i128>(b) * b - D;
            i64 c = static_cast<i64>(num / (4 * a));
            if (c < a) {
                continue;
            }
            if (b < 0 && (-b == a || a == c)) {
                continue;
            }
            emit(QuadForm{a, b, c});
        }
    }
}

template <class Emit>
void enumerate_indefinite(i64 D, Emit && emit)
{
    i64 s = static_cast<i64>(isqrt64(static_cast<u64>(D)));
    QuadraticRoots qr(D, s);
    std::vector<i64> rts;
    for (i64 A = 1; A <= s; ++A) {
        if (!qr.roots(A, rts)) {
            continue;
        }
        i64 twoA = 2 * A;
        i64 bmin = std::max<i64>({1, s - twoA + 1, twoA - s});
        for (i64 x : rts) {
            i64 b = bmin + static_cast<i64>(mod_pos(x - bmin, twoA));
            for (; b <= s; b += twoA) {
                i64 c = static_cast<i64>((static_cast<i128>(b) * b - D) / (4 * A));
                emit(QuadForm{A, b, c});
                emit(QuadForm{-A, b, -c});
            }
        }
    }
}

// Class group abstraction over canonical representatives.
class ImaginaryGroup
{
  public:
    explicit ImaginaryGroup(i64 D) : D_(D), roots_(D, std::max<i64>(imaginary_bound(D), 2))
    {
        primes_ = primes_up_to(static_cast<u64>(std::max<i64>(imaginary_bound(D), 2)));
    }

    QuadForm identity() const { return principal_form(D_); }
    QuadForm mul(QuadForm const & x, QuadForm const & y) const { return compose(x, y, D_); }

    std::optional<QuadForm> generator(std::size_t i)
    {
        while (next_prime_ < primes_.size() && gens_.size() <= i) {
            u64 l = primes_[next_prime_++];
            if (kronecker(D_, static_cast<i128>(l)) == -1) {
                continue;
            }
            gens_.push_back(prime_form(D_, l));
        }
        if (i < gens_.size()) {
            return gens_[i];
        }
        return std::nullopt;
    }

  private:
    i64 D_;
    QuadraticRoots roots_;
    std::vector<u64> primes_;
    std::size_t next_prime_ = 0;
    std::vector<QuadForm> gens_;
};

struct PairKey {
    i64 a;
    i64 b;
    friend bool operator==(PairKey const &, PairKey const &) = default;
};

struct PairKeyHash {
    std::size_t operator()(PairKey const & k) const noexcept
    {
        return QuadFormHash{}(QuadForm{k.a, k.b, 0});
    }
};

class NarrowGroup
{
  public:
    explicit NarrowGroup(i64 D) : D_(D)
    {
        enumerate_indefinite(D, [&](QuadForm const & f) {
            index_.emplace(PairKey{f.a, f.b}, forms_.size());
            forms_.push_back(f);
        });
        cycle_of_.assign(forms_.size(), SIZE_MAX);
        for (std::size_t i = 0; i < forms_.size(); ++i) {
            if (cycle_of_[i] != SIZE_MAX) {
                continue;
            }
            std::size_t id = reps_.size();
            QuadForm best = forms_[i];
            bool have_pos = forms_[i].a > 0;
            QuadForm cur = forms_[i];
            std::size_t j = i;
            while (true) {
                cycle_of_[j] = id;
                if (cur.a > 0 && (!have_pos || cur < best)) {
                    best = cur;
                    have_pos = true;
                }
                cur = rho_step(cur, D_);
                auto it = index_.find(PairKey{cur.a, cur.b});
                if (it == index_.end()) {
                    throw std::logic_error("rho step left the set of reduced forms");
                }
                j = it->second;
                if (j == i) {
                    break;
                }
                if (cycle_of_[j] != SIZE_MAX) {
                    throw std::logic_error("rho cycles overlap");
                }
            }
            reps_.push_back(best);
        }
        s_ = static_cast<i64>(isqrt64(static_cast<u64>(D)));
        primes_ = primes_up_to(static_cast<u64>(std::max<i64>(s_, 2)));
    }

    std::size_t class_number() const { return reps_.size(); }
    std::vector<QuadForm> const & representatives() const { return reps_; }

    QuadForm canonical(QuadForm f) const
    {
        f = reduce_indefinite(f, D_);
        auto it = index_.find(PairKey{f.a, f.b});
        if (it == index_.end()) {
            throw std::logic_error("reduced form missing from enumeration");
        }
        return reps_[cycle_of_[it->second]];
    }

    QuadForm identity() const { return canonical(principal_form(D_)); }
    QuadForm mul(QuadForm const & x, QuadForm const & y) const
    {
        return canonical(compose(x, y, D_));
    }

    std::optional<QuadForm> generator(std::size_t i)
    {
        if (gens_.empty()) {
            // The class of forms with negative leading coefficient.
            i64 b = D_ & 1;
            gens_.push_back(canonical(QuadForm{-1, b, narrow((static_cast<i128>(D_) - b * b) / 4)}));
        }
        while (next_prime_ < primes_.size() && gens_.size() <= i) {
            u64 l = primes_[next_prime_++];
            if (kronecker(D_, static_cast<i128>(l)) == -1) {
                continue;
            }
            gens_.push_back(canonical(prime_form(D_, l)));
        }
        if (i < gens_.size()) {
            return gens_[i];
        }
        return std::nullopt;
    }

  private:
    i64 D_;
    i64 s_ = 0;
    std::vector<QuadForm> forms_;
    std::unordered_map<PairKey, std::size_t, PairKeyHash> index_;
    std::vector<std::size_t> cycle_of_;
    std::vector<QuadForm> reps_;
    std::vector<u64> primes_;
    std::size_t next_prime_ = 0;
    std::vector<QuadForm> gens_;
};

template <class Group>
QuadForm group_power(Group const & G, QuadForm x, u64 e)
{
    QuadForm r = G.identity();
    while (e != 0) {
        if (e & 1) {
            r = G.mul(r, x);
        }
        e >>= 1;
        if (e != 0) {
            x = G.mul(x, x);
        }
    }
    return r;
}

// Structure of a finite abelian group of known order h, from the orders of
// elements of each Sylow subgroup generated by the group's generator list.
template <class Group>
GroupStructure structure_from_order(Group & G, i64 h, std::vector<QuadForm> & gens_out)
{
    std::vector<i64> cyclic;
    Factorization fh = factor(h);
    QuadForm const id = G.identity();
    for (auto const & [p128, k] : fh.factors) {
        i64 p = static_cast<i64>(p128);
        i64 target = 1;
        for (int i = 0; i < k; ++i) {
            target *= p;
        }
        i64 cof = h / target;
        std::vector<QuadForm> elems{id};
        std::unordered_set<QuadForm, QuadFormHash> members{id};
        for (std::size_t gi = 0; static_cast<i64>(elems.size()) < target; ++gi) {
            auto g = G.generator(gi);
            if (!g) {
                throw std::logic_error("generators exhausted before reaching the class number");
            }
            QuadForm x = group_power(G, *g, static_cast<u64>(cof));
            if (members.count(x)) {
                continue;
            }
            std::vector<QuadForm> pows;
            QuadForm cur = x;
            while (!members.count(cur)) {
                pows.push_back(cur);
                cur = G.mul(cur, x);
            }
            std::size_t old = elems.size();
            for (QuadForm const & pw : pows) {
                for (std::size_t i = 0; i < old; ++i) {
                    QuadForm y = G.mul(pw, elems[i]);
                    if (members.insert(y).second) {
                        elems.push_back(y);
                    }
                }
            }
            if (static_cast<i64>(elems.size()) > target) {
                throw std::logic_error("Sylow subgroup larger than the class number allows");
            }
            gens_out.push_back(x);
        }
        // |H[p^i]| for each i, from element orders.
        std::vector<i64> count_by_order(static_cast<std::size_t>(k) + 1, 0);
        for (QuadForm const & e : elems) {
            int o = 0;
            QuadForm y = e;
            while (!(y == id)) {
                y = group_power(G, y, static_cast<u64>(p));
                ++o;
            }
            ++count_by_order[static_cast<std::size_t>(o)];
        }
        std::vector<int> n(static_cast<std::size_t>(k) + 2, 0); // log_p |H[p^i]|
        i64 cum = 0;
        for (int i = 0; i <= k; ++i) {
            cum += count_by_order[static_cast<std::size_t>(i)];
            int lg = 0;
            for (i64 t = cum; t > 1; t /= p) {
                ++lg;
            }
            n[static_cast<std::size_t>(i)] = lg;
        }
        n[static_cast<std::size_t>(k) + 1] = n[static_cast<std::size_t>(k)];
        i64 pi = 1;
        for (int i = 1; i <= k; ++i) {
            pi *= p;
            int at_least_i = n[static_cast<std::size_t>(i)] - n[static_cast<std::size_t>(i) - 1];
            int at_least_next = n[static_cast<std::size_t>(i) + 1] - n[static_cast<std::size_t>(i)];
            for (int j = 0; j < at_least_i - at_least_next; ++j) {
                cyclic.push_back(pi);
            }
        }
    }
    return structure_from_cyclic(cyclic);
}

std::vector<u64> const & filter_primes()
{
    static std::vector<u64> const primes = primes_up_to(100000);
    return primes;
}

int v2(i64 m)
{
    int v = 0;
    while (m != 0 && (m & 1) == 0) {
        m >>= 1;
        ++v;
    }
    return v;
}

// Every prime of h must divide m before exponent | m is possible.
bool primes_divide(i64 h, i64 m)
{
    for (auto const & [p, e] : factor(h).factors) {
        (void)e;
        if (m % static_cast<i64>(p) != 0) {
            return false;
        }
    }
    return true;
}

} // namespace

i128 discriminant(QuadForm const & f)
{
    return static_cast<i128>(f.b) * f.b - static_cast<i128>(4) * f.a * f.c;
}

i64 GroupStructure::order() const
{
    i64 r = 1;
    for (i64 d : divisors) {
        r *= d;
    }
    return r;
}

i64 GroupStructure::exponent() const
{
    return divisors.empty() ? 1 : divisors.back();
}

GroupStructure structure_from_cyclic(std::vector<i64> const & orders)
{
    // Split into prime powers per prime, then rebuild invariant factors.
    std::map<i64, std::vector<i64>> by_prime;
    for (i64 o : orders) {
        if (o < 1) {
            throw std::invalid_argument("cyclic factor order must be positive");
        }
        if (o == 1) {
            continue;
        }
        for (auto const & [p, e] : factor(o).factors) {
            i64 pe = 1;
            for (int i = 0; i < e; ++i) {
                pe *= static_cast<i64>(p);
            }
            by_prime[static_cast<i64>(p)].push_back(pe);
        }
    }
    std::size_t len = 0;
    for (auto & [p, v] : by_prime) {
        std::sort(v.begin(), v.end(), std::greater<>());
        len = std::max(len, v.size());
    }
    std::vector<i64> inv(len, 1); // inv[0] is the largest invariant factor
    for (auto const & [p, v] : by_prime) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            inv[i] *= v[i];
        }
    }
    std::reverse(inv.begin(), inv.end());
    return GroupStructure{inv};
}

GroupStructure direct_product(GroupStructure const & x, GroupStructure const & y)
{
    std::vector<i64> all = x.divisors;
    all.insert(all.end(), y.divisors.begin(), y.divisors.end());
    return structure_from_cyclic(all);
}

GroupStructure odd_part(GroupStructure const & s)
{
    std::vector<i64> out;
    for (i64 d : s.divisors) {
        while (d % 2 == 0) {
            d /= 2;
        }
        if (d > 1) {
            out.push_back(d);
        }
    }
    // Stripping 2-parts keeps the divisibility chain intact.
    return GroupStructure{out};
}

int prime_discriminant_count(i64 D)
{
    return static_cast<int>(factor(abs128(D)).factors.size());
}

void require_fundamental(i64 D)
{
    if (D >= kMaxAbsDisc || D <= -kMaxAbsDisc) {
        throw std::range_error("discriminant exceeds the 62-bit working range");
    }
    if (!is_fundamental_discriminant(D)) {
        throw std::invalid_argument("not a fundamental discriminant: " + std::to_string(D));
    }
}

QuadForm principal_form(i64 D)
{
    i64 b = D & 1;
    QuadForm f{1, b, narrow((static_cast<i128>(b) * b - D) / 4)};
    return D < 0 ? f : reduce_indefinite(f, D);
}

QuadForm reduce_definite(QuadForm f)
{
    i128 a = f.a, b = f.b, c = f.c;
    i128 const D = b * b - 4 * a * c;
    if (a <= 0 || D >= 0) {
        throw std::invalid_argument("reduce_definite: form is not positive definite");
    }
    while (true) {
        if (!(-a < b && b <= a)) {
            i128 twoa = 2 * a;
            i128 r = mod_pos(b, twoa);
            if (r > a) {
                r -= twoa;
            }
            b = r;
            c = (b * b - D) / (4 * a);
        }
        if (a > c) {
            std::swap(a, c);
            b = -b;
            continue;
        }
        if (a == c && b < 0) {
            b = -b;
        }
        break;
    }
    return QuadForm{narrow(a), narrow(b), narrow(c)};
}

bool is_reduced_indefinite(QuadForm const & f, i64 D)
{
    // |sqrt(D) - 2|a|| < b < sqrt(D), decided in exact integer arithmetic.
    if (f.b <= 0) {
        return false;
    }
    i128 b = f.b;
    if (b * b >= D) {
        return false;
    }
    i128 twoa = 2 * abs128(f.a);
    i128 lo = twoa - b; // need lo < sqrt(D)
    i128 hi = twoa + b; // need hi > sqrt(D)
    if (hi * hi <= D) {
        return false;
    }
    return lo <= 0 || lo * lo < D;
}

QuadForm rho_step(QuadForm const & f, i64 D)
{
    i128 const s = static_cast<i128>(isqrt64(static_cast<u64>(D)));
    i128 c = f.c;
    i128 ac = abs128(c);
    i128 twoc = 2 * ac;
    i128 nb;
    if (ac <= s) {
        nb = s - mod_pos(s + f.b, twoc);
    } else {
        nb = mod_pos(-static_cast<i128>(f.b), twoc);
        if (nb > ac) {
            nb -= twoc;
        }
    }
    i128 nc = (nb * nb - D) / (4 * c);
    return QuadForm{narrow(c), narrow(nb), narrow(nc)};
}

QuadForm reduce_indefinite(QuadForm f, i64 D)
{
    for (int guard = 0; !is_reduced_indefinite(f, D); ++guard) {
        if (guard > 100000) {
            throw std::logic_error("indefinite reduction did not terminate");
        }
        f = rho_step(f, D);
    }
    return f;
}

QuadForm compose(QuadForm const & f, QuadForm const & g, i64 D)
{
    if (discriminant(f) != D || discriminant(g) != D) {
        throw std::invalid_argument("compose: forms of different discriminants");
    }
    QuadForm f1 = f, f2 = g;
    if (D > 0) {
        // The formulas below want positive leading coefficients.
        if (f1.a < 0) {
            f1 = rho_step(reduce_indefinite(f1, D), D);
        }
        if (f2.a < 0) {
            f2 = rho_step(reduce_indefinite(f2, D), D);
        }
    }
    if (f1.a > f2.a) {
        std::swap(f1, f2);
    }
    i128 a1 = f1.a, b1 = f1.b;
    i128 a2 = f2.a, b2 = f2.b, c2 = f2.c;
    i128 s = (b1 + b2) / 2;
    i128 n = b2 - s;
    i128 y1, d;
    if (a2 % a1 == 0) {
        y1 = 0;
        d = a1;
    } else {
        i128 u, v;
        d = xgcd(a2, a1, u, v);
        y1 = u;
    }
    i128 x2, y2, d1;
    if (s % d == 0) {
        y2 = -1;
        x2 = 0;
        d1 = d;
    } else {
        i128 u, v;
        d1 = xgcd(s, d, u, v);
        x2 = u;
        y2 = -v;
    }
    i128 v1 = a1 / d1;
    i128 v2 = a2 / d1;
    i128 r = mod_pos(mod_pos(y1 * y2 % v1 * (n % v1), v1) - mod_pos(x2 % v1 * (c2 % v1), v1), v1);
    i128 b3 = b2 + 2 * v2 * r;
    i128 a3 = v1 * v2;
    i128 c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
    QuadForm out{narrow(a3), narrow(b3), narrow(c3)};
    return D < 0 ? reduce_definite(out) : reduce_indefinite(out, D);
}

QuadForm inverse(QuadForm const & f, i64 D)
{
    QuadForm g{f.a, -f.b, f.c};
    return D < 0 ? reduce_definite(g) : reduce_indefinite(g, D);
}

QuadForm power(QuadForm const & f, u64 e, i64 D)
{
    QuadForm r = principal_form(D);
    QuadForm x = D < 0 ? reduce_definite(f) : reduce_indefinite(f, D);
    while (e != 0) {
        if (e & 1) {
            r = compose(r, x, D);
        }
        e >>= 1;
        if (e != 0) {
            x = compose(x, x, D);
        }
    }
    return r;
}

QuadForm prime_form(i64 D, u64 l)
{
    // Smallest b >= 0 with b^2 = D (mod 4l).
    i64 L = static_cast<i64>(l);
    for (i64 b = D & 1; b <= L; b += 2) {
        i128 num = static_cast<i128>(b) * b - D;
        if (num % (4 * static_cast<i128>(L)) == 0) {
            QuadForm f{L, b, narrow(num / (4 * static_cast<i128>(L)))};
            return D < 0 ? reduce_definite(f) : reduce_indefinite(f, D);
        }
    }
    throw std::invalid_argument("prime_form: prime is inert");
}

std::vector<QuadForm> reduced_forms_imaginary(i64 D)
{
    if (D >= 0) {
        throw std::invalid_argument("reduced_forms_imaginary: D must be negative");
    }
    require_fundamental(D);
    std::vector<QuadForm> out;
    enumerate_imaginary(D, [&](QuadForm const & f) { out.push_back(f); });
    return out;
}

i64 class_number_imaginary(i64 D)
{
    if (D >= 0) {
        throw std::invalid_argument("class_number_imaginary: D must be negative");
    }
    require_fundamental(D);
    i64 h = 0;
    enumerate_imaginary(D, [&](QuadForm const &) { ++h; });
    return h;
}

std::vector<QuadForm> narrow_cycles_indefinite(i64 D)
{
    if (D <= 0) {
        throw std::invalid_argument("narrow_cycles_indefinite: D must be positive");
    }
    require_fundamental(D);
    return NarrowGroup(D).representatives();
}

ClassGroup class_group(i64 D)
{
    require_fundamental(D);
    ClassGroup cg;
    cg.discriminant = D;
    if (D < 0) {
        i64 h = class_number_imaginary(D);
        ImaginaryGroup G(D);
        cg.structure = structure_from_order(G, h, cg.generators);
    } else {
        NarrowGroup G(D);
        cg.structure = structure_from_order(G, static_cast<i64>(G.class_number()), cg.generators);
    }
    return cg;
}

bool redei_four_divides(i64 D)
{
    Factorization f = factor(abs128(D));
    if (f.factors.size() != 2) {
        throw std::invalid_argument("redei_four_divides: D needs exactly two prime discriminants");
    }
    // Odd prime discriminants p*, and the 2-part as the remaining cofactor.
    std::vector<i128> discs;
    i128 rest = D;
    for (auto const & [p, e] : f.factors) {
        if (p != 2) {
            i128 ps = (p % 4 == 3) ? -p : p;
            discs.push_back(ps);
            rest /= ps;
        }
    }
    if (rest != 1) {
        discs.insert(discs.begin(), rest);
    }
    auto prime_of = [](i128 d) { return (d == 8 || d == -4 || d == -8) ? i128{2} : abs128(d); };
    return kronecker(discs[0], prime_of(discs[1])) == 1 && kronecker(discs[1], prime_of(discs[0])) == 1;
}

bool refuted_by_prime_forms(i64 D, u64 e, FastFilterOptions const & opts)
{
    if (D >= 0) {
        throw std::invalid_argument("refuted_by_prime_forms: D must be negative");
    }
    QuadForm const id = principal_form(D);
    int tested = 0;
    for (u64 l : filter_primes()) {
        if (l > opts.prime_bound || tested >= opts.prime_form_tests) {
            break;
        }
        if (static_cast<i128>(l) * l * 3 > -static_cast<i128>(D)) {
            break; // beyond the Minkowski range the forms add nothing new
        }
        if (kronecker(D, static_cast<i128>(l)) != 1) {
            continue;
        }
        ++tested;
        if (!(power(prime_form(D, l), e, D) == id)) {
            return true;
        }
    }
    return false;
}

bool exponent_divides(i64 D, i64 m, ExponentMode mode, FastFilterOptions const & opts)
{
    if (m < 1) {
        throw std::invalid_argument("exponent_divides: m must be positive");
    }
    require_fundamental(D);
    if (mode == ExponentMode::fast) {
        int t = prime_discriminant_count(D);
        int vm = v2(m);
        if (vm == 0 && t > 1) {
            return false;
        }
        if (vm == 1 && t == 2 && redei_four_divides(D)) {
            return false;
        }
        if (D < 0 && refuted_by_prime_forms(D, static_cast<u64>(m), opts)) {
            return false;
        }
    }
    if (D < 0 && !primes_divide(class_number_imaginary(D), m)) {
        return false;
    }
    GroupStructure s = class_group(D).structure;
    return m % s.exponent() == 0;
}

bool odd_exponent_divides(i64 D, i64 u, ExponentMode mode, FastFilterOptions const & opts)
{
    if (u < 1 || (u & 1) == 0) {
        throw std::invalid_argument("odd_exponent_divides: u must be odd and positive");
    }
    require_fundamental(D);
    // The 2-part exponent is below 2^40 for every discriminant in range.
    if (mode == ExponentMode::fast && D < 0 && refuted_by_prime_forms(D, static_cast<u64>(u) << 40, opts)) {
        return false;
    }
    if (D < 0) {
        i64 h = class_number_imaginary(D);
        while (h % 2 == 0) {
            h /= 2;
        }
        if (h > 1 && !primes_divide(h, u)) {
            return false;
        }
    }
    GroupStructure s = odd_part(class_group(D).structure);
    return u % s.exponent() == 0;
}

GroupStructure StructureCache::structure(i64 D)
{
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = map_.find(D);
        if (it != map_.end()) {
            return it->second;
        }
    }
    GroupStructure s = class_group(D).structure;
    std::lock_guard<std::mutex> lock(mutex_);
    map_.emplace(D, s);
    return s;
}

std::optional<GroupStructure> StructureCache::find(i64 D) const
{
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = map_.find(D);
    if (it == map_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t StructureCache::size() const
{
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.size();
}

} // namespace mqe
