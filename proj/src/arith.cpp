#include "mqe/arith.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace mqe {

std::string to_string(i128 v)
{
    if (v == 0) {
        return "0";
    }
    bool neg = v < 0;
    u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
    std::string s;
    while (u != 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) {
        s.push_back('-');
    }
    std::reverse(s.begin(), s.end());
    return s;
}

i128 parse_i128(std::string_view s)
{
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
        neg = s[i] == '-';
        ++i;
    }
    if (i == s.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    }
    u128 const limit = (static_cast<u128>(1) << 127) - 1;
    u128 acc = 0;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c < '0' || c > '9') {
            throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
        }
        acc = acc * 10 + static_cast<u128>(c - '0');
        if (acc > limit) {
            throw std::out_of_range("integer exceeds 127 bits: '" + std::string(s) + "'");
        }
    }
    return neg ? -static_cast<i128>(acc) : static_cast<i128>(acc);
}

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b)
{
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

u64 isqrt64(u64 n)
{
    return static_cast<u64>(isqrt128(n));
}

u128 isqrt128(u128 n)
{
    if (n < 2) {
        return n;
    }
    // Newton iteration from an overestimate.
    int bits = 0;
    for (u128 t = n; t != 0; t >>= 1) {
        ++bits;
    }
    u128 x = static_cast<u128>(1) << ((bits + 1) / 2);
    while (true) {
        u128 y = (x + n / x) / 2;
        if (y >= x) {
            break;
        }
        x = y;
    }
    while (x * x > n) {
        --x;
    }
    while ((x + 1) * (x + 1) <= n) {
        ++x;
    }
    return x;
}

bool is_square128(i128 n)
{
    if (n < 0) {
        return false;
    }
    u128 r = isqrt128(static_cast<u128>(n));
    return r * r == static_cast<u128>(n);
}

u64 mulmod64(u64 a, u64 b, u64 m)
{
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

u64 powmod64(u64 base, u64 e, u64 m)
{
    u64 r = 1 % m;
    base %= m;
    while (e != 0) {
        if (e & 1) {
            r = mulmod64(r, base, m);
        }
        base = mulmod64(base, base, m);
        e >>= 1;
    }
    return r;
}

namespace {

u128 addmod128(u128 a, u128 b, u128 m)
{
    // a, b < m < 2^127, so a + b cannot wrap.
    u128 s = a + b;
    return s >= m ? s - m : s;
}

u128 mulmod128(u128 a, u128 b, u128 m)
{
    if (m <= UINT64_MAX) {
        return static_cast<u128>(mulmod64(static_cast<u64>(a % m), static_cast<u64>(b % m),
                                          static_cast<u64>(m)));
    }
    a %= m;
    b %= m;
    u128 r = 0;
    while (b != 0) {
        if (b & 1) {
            r = addmod128(r, a, m);
        }
        a = addmod128(a, a, m);
        b >>= 1;
    }
    return r;
}

u128 powmod128(u128 base, u128 e, u128 m)
{
    u128 r = 1 % m;
    base %= m;
    while (e != 0) {
        if (e & 1) {
            r = mulmod128(r, base, m);
        }
        base = mulmod128(base, base, m);
        e >>= 1;
    }
    return r;
}

bool miller_rabin_round(u128 n, u128 a, u128 d, int s)
{
    a %= n;
    if (a == 0) {
        return true;
    }
    u128 x = powmod128(a, d, n);
    if (x == 1 || x == n - 1) {
        return true;
    }
    for (int i = 1; i < s; ++i) {
        x = mulmod128(x, x, n);
        if (x == n - 1) {
            return true;
        }
    }
    return false;
}

// 64-bit xorshift; fixed seed so the >2^64 test is reproducible.
struct SplitMix {
    u64 state;
    u64 next()
    {
        u64 z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

std::vector<u64> const & small_primes()
{
    static std::vector<u64> const primes = primes_up_to(1000000);
    return primes;
}

u128 gcdu(u128 a, u128 b)
{
    while (b != 0) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Returns a nontrivial factor of the odd composite n.
u128 pollard_brent(u128 n)
{
    for (u128 c = 1;; ++c) {
        auto f = [&](u128 x) { return addmod128(mulmod128(x, x, n), c % n, n); };
        u128 y = 2, x = 2, ys = 2, q = 1, g = 1;
        u64 r = 1;
        u64 const m = 128;
        do {
            x = y;
            for (u64 i = 0; i < r; ++i) {
                y = f(y);
            }
            u64 k = 0;
            do {
                ys = y;
                for (u64 i = 0; i < std::min(m, r - k); ++i) {
                    y = f(y);
                    q = mulmod128(q, x > y ? x - y : y - x, n);
                }
                g = gcdu(q, n);
                k += m;
            } while (k < r && g == 1);
            r <<= 1;
        } while (g == 1 && r < (static_cast<u64>(1) << 40));
        if (g == n) {
            do {
                ys = f(ys);
                g = gcdu(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n && g != 1) {
            return g;
        }
        // Deterministic fallback: next polynomial x^2 + (c+1).
    }
}

void factor_rec(u128 n, std::vector<u128> & out)
{
    if (n == 1) {
        return;
    }
    if (is_prime(static_cast<i128>(n))) {
        out.push_back(n);
        return;
    }
    u128 d = pollard_brent(n);
    factor_rec(d, out);
    factor_rec(n / d, out);
}

} // namespace

int kronecker(i128 a, i128 n)
{
    if (n == 0) {
        throw std::invalid_argument("kronecker: n must be nonzero");
    }
    int t = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) {
            t = -t;
        }
    }
    if ((n & 1) == 0) {
        if ((a & 1) == 0) {
            return 0;
        }
        int v = 0;
        while ((n & 1) == 0) {
            n >>= 1;
            ++v;
        }
        int a8 = static_cast<int>(((a % 8) + 8) % 8);
        if ((v & 1) && (a8 == 3 || a8 == 5)) {
            t = -t;
        }
    }
    // Jacobi symbol (a | n) with n odd positive.
    u128 nn = static_cast<u128>(n);
    i128 am = a % n;
    if (am < 0) {
        am += n;
    }
    u128 aa = static_cast<u128>(am);
    while (aa != 0) {
        while ((aa & 1) == 0) {
            aa >>= 1;
            unsigned r = static_cast<unsigned>(nn & 7);
            if (r == 3 || r == 5) {
                t = -t;
            }
        }
        std::swap(aa, nn);
        if ((aa & 3) == 3 && (nn & 3) == 3) {
            t = -t;
        }
        aa %= nn;
    }
    return nn == 1 ? t : 0;
}

bool is_prime(i128 n)
{
    if (n < 2) {
        return false;
    }
    static constexpr std::array<u64, 12> tiny = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (u64 p : tiny) {
        if (n == static_cast<i128>(p)) {
            return true;
        }
        if (n % static_cast<i128>(p) == 0) {
            return false;
        }
    }
    u128 un = static_cast<u128>(n);
    u128 d = un - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    if (un <= UINT64_MAX) {
        // Deterministic witness set for all n < 2^64.
        static constexpr std::array<u64, 7> bases = {2, 325, 9375, 28178, 450775, 9780504,
                                                     1795265022};
        for (u64 a : bases) {
            if (!miller_rabin_round(un, a, d, s)) {
                return false;
            }
        }
        return true;
    }
    SplitMix rng{0x5eed5eed5eedULL};
    for (int round = 0; round < 40; ++round) {
        u128 a = 2 + (static_cast<u128>(rng.next()) << 64 | rng.next()) % (un - 3);
        if (!miller_rabin_round(un, a, d, s)) {
            return false;
        }
    }
    return true;
}

i128 Factorization::product() const
{
    i128 r = 1;
    for (auto const & [p, e] : factors) {
        for (int i = 0; i < e; ++i) {
            r *= p;
        }
    }
    return r;
}

bool Factorization::is_squarefree() const
{
    return std::all_of(factors.begin(), factors.end(),
                       [](auto const & pe) { return pe.second == 1; });
}

Factorization factor(i128 n)
{
    if (n < 1) {
        throw std::invalid_argument("factor: n must be positive");
    }
    Factorization f;
    f.value = n;
    u128 m = static_cast<u128>(n);
    for (u64 p : small_primes()) {
        if (static_cast<u128>(p) * p > m) {
            break;
        }
        if (m % p == 0) {
            int e = 0;
            while (m % p == 0) {
                m /= p;
                ++e;
            }
            f.factors.emplace_back(static_cast<i128>(p), e);
        }
    }
    if (m > 1) {
        std::vector<u128> rest;
        u64 const bound = small_primes().back();
        if (m < static_cast<u128>(bound) * bound) {
            rest.push_back(m);
        } else {
            factor_rec(m, rest);
        }
        std::sort(rest.begin(), rest.end());
        for (std::size_t i = 0; i < rest.size();) {
            std::size_t j = i;
            while (j < rest.size() && rest[j] == rest[i]) {
                ++j;
            }
            f.factors.emplace_back(static_cast<i128>(rest[i]), static_cast<int>(j - i));
            i = j;
        }
    }
    return f;
}

PrimeStarDiscriminant PrimeStarDiscriminant::from_value(i128 value)
{
    if (value == 8 || value == -4 || value == -8) {
        return PrimeStarDiscriminant(value, 2);
    }
    i128 p = abs128(value);
    if (p < 3 || !is_prime(p) || ((value % 4) + 4) % 4 != 1) {
        throw std::invalid_argument("not a prime discriminant: " + to_string(value));
    }
    return PrimeStarDiscriminant(value, p);
}

bool canonical_less(PrimeStarDiscriminant const & x, PrimeStarDiscriminant const & y)
{
    i128 ax = abs128(x.value()), ay = abs128(y.value());
    if (ax != ay) {
        return ax < ay;
    }
    return x.value() < y.value();
}

PrimeStarDiscriminant p_star(i128 p)
{
    if (p == 2) {
        throw std::invalid_argument("p_star: use 8, -4 or -8 explicitly for p = 2");
    }
    if (p < 3 || !is_prime(p)) {
        throw std::invalid_argument("p_star: not an odd prime: " + to_string(p));
    }
    return PrimeStarDiscriminant::from_value(p % 4 == 3 ? -p : p);
}

i128 product_discriminant(PrimeStarDiscriminant d1, PrimeStarDiscriminant d2)
{
    if (d1 == d2) {
        throw std::invalid_argument("product_discriminant: equal arguments give Q itself");
    }
    return product_discriminant(std::vector<PrimeStarDiscriminant>{d1, d2});
}

i128 product_discriminant(std::vector<PrimeStarDiscriminant> const & ds)
{
    if (ds.empty()) {
        throw std::invalid_argument("product_discriminant: empty product");
    }
    i128 prod = 1;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = i + 1; j < ds.size(); ++j) {
            if (ds[i].prime() == ds[j].prime() && ds[i].prime() != 2) {
                throw std::invalid_argument("product_discriminant: repeated odd prime");
            }
            if (ds[i] == ds[j]) {
                throw std::invalid_argument("product_discriminant: repeated generator");
            }
        }
        prod *= ds[i].value();
    }
    // The odd part of the product is squarefree; only powers of 2 can pair up.
    int e2 = 0;
    while (prod % 2 == 0) {
        prod /= 2;
        ++e2;
    }
    i128 kernel = (e2 & 1) ? 2 * prod : prod;
    if (kernel == 1) {
        throw std::invalid_argument("product_discriminant: product is a square");
    }
    return ((kernel % 4) + 4) % 4 == 1 ? kernel : 4 * kernel;
}

i128 squarefree_kernel(i128 m)
{
    if (m == 0) {
        throw std::invalid_argument("squarefree_kernel: zero");
    }
    Factorization f = factor(abs128(m));
    i128 k = m < 0 ? -1 : 1;
    for (auto const & [p, e] : f.factors) {
        if (e & 1) {
            k *= p;
        }
    }
    return k;
}

i128 field_discriminant(i128 m)
{
    i128 k = squarefree_kernel(m);
    if (k == 1) {
        throw std::invalid_argument("field_discriminant: square radicand " + to_string(m));
    }
    return ((k % 4) + 4) % 4 == 1 ? k : 4 * k;
}

bool is_fundamental_discriminant(i128 d)
{
    if (d == 0 || d == 1) {
        return false;
    }
    i128 r = ((d % 4) + 4) % 4;
    if (r == 1) {
        return factor(abs128(d)).is_squarefree();
    }
    if (r != 0) {
        return false;
    }
    i128 m = d / 4;
    i128 rm = ((m % 4) + 4) % 4;
    if (rm != 2 && rm != 3) {
        return false;
    }
    return factor(abs128(m)).is_squarefree();
}

F2 discrete_log_parity(i128 y, i128 p)
{
    if (p < 3 || (p & 1) == 0 || p > static_cast<i128>(INT64_MAX)) {
        throw std::invalid_argument("discrete_log_parity: p must be an odd prime");
    }
    i128 r = y % p;
    if (r < 0) {
        r += p;
    }
    if (r == 0) {
        throw std::invalid_argument("discrete_log_parity: p divides y");
    }
    u64 pp = static_cast<u64>(p);
    return F2(powmod64(static_cast<u64>(r), (pp - 1) / 2, pp) != 1);
}

std::vector<u64> primes_up_to(u64 n)
{
    std::vector<u64> out;
    if (n < 2) {
        return out;
    }
    std::vector<bool> comp(n + 1, false);
    for (u64 i = 2; i <= n; ++i) {
        if (comp[i]) {
            continue;
        }
        out.push_back(i);
        for (u64 j = i * i; j <= n; j += i) {
            comp[j] = true;
        }
    }
    return out;
}

} // namespace mqe
