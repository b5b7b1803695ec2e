#include "mqe/sieve.hpp"

#include "mqe/bqf.hpp"
#include "mqe/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <stdexcept>

namespace mqe {

namespace {

constexpr i128 kDiscLimit = static_cast<i128>(1) << 62;
constexpr std::size_t kMaxWheel = std::size_t{1} << 20;
constexpr u64 kMinSpan = 4096;
constexpr std::size_t kDensePasses = 6;
constexpr u64 kFilterPrimeBound = 256;

i128 checked_mul(i128 a, i128 b)
{
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) {
        throw std::range_error("sieve: 128-bit overflow");
    }
    return r;
}

i128 ipow(i128 base, i64 e)
{
    i128 r = 1;
    for (i64 i = 0; i < e; ++i) {
        r = checked_mul(r, base);
    }
    return r;
}

u64 mod_u64(i128 v, u64 m)
{
    i128 r = v % static_cast<i128>(m);
    return static_cast<u64>(r < 0 ? r + static_cast<i128>(m) : r);
}

// Remainder of a 32-bit value by a fixed divisor without a division.
struct FastMod {
    std::uint32_t d;
    u64 m;

    explicit FastMod(std::uint32_t div) : d(div), m(UINT64_C(0xFFFFFFFFFFFFFFFF) / div + 1) {}

    std::uint32_t operator()(std::uint32_t a) const
    {
        u64 low = m * a;
        return static_cast<std::uint32_t>((static_cast<u128>(low) * d) >> 64);
    }
};

// Quadratic residue flags for the odd primes below kFilterPrimeBound.
std::vector<char> const & qr_table(u64 r)
{
    static std::vector<std::vector<char>> const tables = [] {
        std::vector<std::vector<char>> t(kFilterPrimeBound + 1);
        for (u64 r : primes_up_to(kFilterPrimeBound)) {
            t[r].assign(r, 0);
            for (u64 x = 1; x < r; ++x) {
                t[r][x * x % r] = 1;
            }
        }
        return t;
    }();
    return tables[r];
}

// Residues x mod r for which V(x) = (s x)^2 - C is 0 or a non-residue mod r.
std::vector<char> allowed_residues(u64 r, i64 s, i128 C, bool zero_only)
{
    std::vector<char> ok(r, 0);
    u64 cm = mod_u64(C, r);
    u64 sm = mod_u64(s, r);
    std::vector<char> const * qr = r <= kFilterPrimeBound ? &qr_table(r) : nullptr;
    for (u64 x = 0; x < r; ++x) {
        u64 sx = sm * x % r;
        u64 v = (sx * sx % r + r - cm) % r;
        if (zero_only || v == 0) {
            ok[x] = v == 0;
        } else {
            ok[x] = qr ? !(*qr)[v] : kronecker(static_cast<i128>(v), static_cast<i128>(r)) == -1;
        }
    }
    return ok;
}

struct Scanner {
    PrimeStarDiscriminant p;
    i64 u;
    u64 l;
    std::vector<u64> const & small_primes; // all primes below l
    unsigned jobs;

    u64 survivors = 0;

    // Exact tests on one candidate X. Returns q when the field qualifies.
    std::optional<i128> examine(i128 V) const
    {
        for (u64 r : small_primes) {
            if (r == 2 || static_cast<i128>(r) == p.prime()) {
                continue;
            }
            if (kronecker(static_cast<i128>(mod_u64(V, r)), static_cast<i128>(r)) == 1) {
                return std::nullopt;
            }
        }
        return qualifies(V, l, p, u);
    }

    static std::optional<i128> qualifies(i128 V, u64 l, PrimeStarDiscriminant p, i64 u)
    {
        if (V >= 0 || is_square128(-V)) {
            return std::nullopt;
        }
        i128 delta = field_discriminant(V);
        i128 pv = p.value();
        if (delta % pv != 0) {
            return std::nullopt;
        }
        i128 q = delta / pv;
        if (q <= 1 || q % 4 != 1 || q == p.prime() || !is_prime(q)) {
            return std::nullopt;
        }
        if (!redei_filter(p, q) || !smallest_split_check(delta, l)) {
            return std::nullopt;
        }
        if (abs128(delta) >= kDiscLimit) {
            throw std::range_error("sieve: candidate discriminant beyond the 62-bit range: " + to_string(delta));
        }
        if (!exponent_divides(static_cast<i64>(delta), 2 * u)) {
            return std::nullopt;
        }
        return q;
    }

    void scan(SieveEquation const & eq, bool mod_p_wheel, std::vector<i128> & out)
    {
        i128 C = checked_mul(eq.coeff, ipow(static_cast<i128>(l), u));
        i128 s = eq.scale;
        // Largest X >= 0 with (s X)^2 < C.
        u128 root = isqrt128(static_cast<u128>(C - 1));
        u64 xmax = static_cast<u64>(root / static_cast<u128>(s));

        // Wheel: the 2-adic condition, then the p condition (if any), then
        // small odd primes while the modulus and residue list stay small.
        u64 M = eq.cond == XCond::odd ? 2 : 4;
        std::vector<u64> A{eq.cond == XCond::odd ? 1u : eq.cond == XCond::two_mod_4 ? 2u : 0u};
        std::vector<std::pair<u64, std::vector<char>>> factors;
        if (mod_p_wheel) {
            u64 pp = static_cast<u64>(p.prime());
            factors.emplace_back(pp, allowed_residues(pp, eq.scale, C, true));
        }
        for (u64 r : small_primes) {
            if (r != 2 && static_cast<i128>(r) != p.prime() && r <= kFilterPrimeBound) {
                factors.emplace_back(r, allowed_residues(r, eq.scale, C, false));
            }
        }
        std::size_t folded = 0;
        for (auto const & [r, ok] : factors) {
            std::size_t count = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
            // Leave a long range of t = (x - a) / M for the bit sieve below.
            if (M * r > xmax / kMinSpan + 1 || M * r >= (u64{1} << 32) || A.size() * count > kMaxWheel) {
                break;
            }
            // x = a + M t with t = (b - a) / M (mod r) for each allowed b.
            u64 minv = powmod64(M % r, r - 2, r);
            std::vector<u64> steps;
            for (u64 b = 0; b < r; ++b) {
                if (ok[b]) {
                    steps.push_back(b * minv % r);
                }
            }
            std::vector<u64> B;
            B.reserve(A.size() * count);
            for (u64 a : A) {
                u64 t0 = (r - a % r) % r * minv % r;
                for (u64 st : steps) {
                    u64 t = t0 + st;
                    if (t >= r) {
                        t -= r;
                    }
                    B.push_back(a + M * t);
                }
            }
            A.swap(B);
            M *= r;
            ++folded;
        }

        // For x = a + M t the remaining primes constrain t mod r to a shifted
        // copy of one residue set. Bit i of pattern[phi] says whether phi + i is
        // in that set, so one AND sieves 64 consecutive t.
        struct BitFilter {
            u64 r;
            u64 minv;    // M^-1 mod r
            u64 step;    // 64 mod r
            FastMod fm;
            std::vector<u64> pattern;
        };
        std::vector<BitFilter> filters;
        for (std::size_t i = folded; i < factors.size(); ++i) {
            u64 r = factors[i].first;
            auto const & ok = factors[i].second;
            u64 mr = M % r;
            std::vector<char> base(r);
            for (u64 t = 0; t < r; ++t) {
                base[t] = ok[mr * t % r];
            }
            std::vector<u64> pattern(r, 0);
            for (u64 bit = 0; bit < 64; ++bit) {
                if (base[bit % r]) {
                    pattern[0] |= u64{1} << bit;
                }
            }
            for (u64 phi = r - 1; phi > 0; --phi) {
                pattern[phi] = (pattern[(phi + 1) % r] << 1) | static_cast<u64>(base[phi]);
            }
            filters.push_back({r, powmod64(mr, r - 2, r), 64 % r, FastMod(static_cast<std::uint32_t>(r)), std::move(pattern)});
        }

        u64 const span = xmax / M + 1;
        std::size_t const words = static_cast<std::size_t>((span + 63) / 64);
        std::mutex out_mutex;
        unsigned workers = std::max(1u, jobs);
        parallel_for(workers, workers, [&](std::size_t wid) {
            std::vector<u64> acc(words);
            std::vector<std::uint32_t> live;
            std::vector<u64> offs(filters.size());
            std::vector<i128> local;
            u64 local_count = 0;
            for (std::size_t ai = wid; ai < A.size(); ai += workers) {
                u64 a = A[ai];
                std::fill(acc.begin(), acc.end(), ~u64{0});
                std::size_t j = 0;
                // Dense passes while most words are still nonzero.
                for (; j < filters.size() && j < kDensePasses; ++j) {
                    auto const & f = filters[j];
                    u64 o = (f.r - f.fm(static_cast<std::uint32_t>(a % f.r))) % f.r * f.minv % f.r;
                    u64 phi = (f.r - o) % f.r;
                    for (std::size_t w = 0; w < words; ++w) {
                        acc[w] &= f.pattern[phi];
                        phi += f.step;
                        if (phi >= f.r) {
                            phi -= f.r;
                        }
                    }
                }
                live.clear();
                for (std::size_t w = 0; w < words; ++w) {
                    if (acc[w]) {
                        live.push_back(static_cast<std::uint32_t>(w));
                    }
                }
                for (; j < filters.size() && !live.empty(); ++j) {
                    auto const & f = filters[j];
                    u64 o = (f.r - a % f.r) % f.r * f.minv % f.r;
                    std::size_t keep = 0;
                    for (std::uint32_t w : live) {
                        u64 phi = f.fm(static_cast<std::uint32_t>((64 * static_cast<u64>(w)) % f.r)) + f.r - o;
                        if (phi >= f.r) {
                            phi -= f.r;
                        }
                        acc[w] &= f.pattern[phi];
                        if (acc[w]) {
                            live[keep++] = w;
                        }
                    }
                    live.resize(keep);
                }
                for (std::uint32_t w : live) {
                    for (u64 bits = acc[w]; bits; bits &= bits - 1) {
                        u64 t = 64 * static_cast<u64>(w) + static_cast<u64>(__builtin_ctzll(bits));
                        u64 x = a + M * t;
                        if (x > xmax) {
                            continue;
                        }
                        ++local_count;
                        i128 sx = s * static_cast<i128>(x);
                        if (auto q = examine(sx * sx - C)) {
                            local.push_back(*q);
                        }
                    }
                }
            }
            std::lock_guard<std::mutex> lock(out_mutex);
            out.insert(out.end(), local.begin(), local.end());
            survivors += local_count;
        });
    }
};

struct CheckpointState {
    std::set<u64> done;
    std::set<i128> hits;
};

CheckpointState read_checkpoint(std::string const & path, PrimeStarDiscriminant p, i64 u)
{
    CheckpointState st;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("l")) {
            continue; // a torn final line from an interrupted run
        }
        if (j.value("p", i64{0}) != static_cast<i64>(p.value()) || j.value("u", i64{0}) != u) {
            continue;
        }
        st.done.insert(j["l"].get<u64>());
        for (auto const & q : j["hits"]) {
            st.hits.insert(q.get<i64>());
        }
    }
    return st;
}

void append_checkpoint(std::string const & path, PrimeStarDiscriminant p, i64 u, u64 l,
                       std::vector<int> const & cases, std::vector<i128> const & hits)
{
    nlohmann::json j;
    j["p"] = static_cast<i64>(p.value());
    j["u"] = u;
    j["l"] = l;
    j["cases"] = cases;
    std::vector<i64> hv;
    for (i128 q : hits) {
        hv.push_back(static_cast<i64>(q));
    }
    j["hits"] = hv;
    std::ofstream out(path, std::ios::app);
    out << j.dump() << '\n';
    out.flush();
    if (!out) {
        throw std::runtime_error("cannot write checkpoint " + path);
    }
}

} // namespace

bool redei_filter(PrimeStarDiscriminant p, i128 q)
{
    if (!p.is_negative()) {
        throw std::invalid_argument("redei_filter: p* must be negative");
    }
    if (q % 4 != 1 || q == p.prime()) {
        throw std::invalid_argument("redei_filter: q must be a prime = 1 (mod 4) different from p");
    }
    if (p.prime() == 2) {
        return q % 8 == 5;
    }
    i128 pp = p.prime();
    return kronecker(q, pp) == -1 && kronecker(-pp, q) == -1;
}

double bach_sorenson(double abs_d)
{
    double t = 1.881 * std::log(abs_d) + 0.34 * 2 + 5.5;
    return t * t;
}

std::vector<SieveCase> select_cases(PrimeStarDiscriminant p, u64 l)
{
    if (!p.is_negative()) {
        throw std::invalid_argument("select_cases: p* must be negative");
    }
    if (l % 2 == 0 || static_cast<i128>(l) == p.prime() || !is_prime(static_cast<i128>(l))) {
        throw std::invalid_argument("select_cases: l must be an odd prime different from p");
    }
    std::vector<SieveCase> out;
    i64 v = static_cast<i64>(p.value());
    if (v == -8) {
        SieveCase c2{2, true, std::nullopt, false, {}};
        if (l % 8 == 7) {
            c2.equations.push_back({1, 2, XCond::two_mod_4});
        } else if (l % 8 == 5) {
            c2.equations.push_back({1, 2, XCond::zero_mod_4});
        }
        SieveCase c5{5, false, std::nullopt, false, {}};
        if (l % 8 == 1 || l % 8 == 3) {
            c5.equations.push_back({1, 1, XCond::odd});
        }
        out.push_back(c2);
        out.push_back(c5);
    } else if (v == -4) {
        SieveCase c3{3, true, std::nullopt, false, {}};
        if (l % 4 == 3) {
            c3.equations.push_back({1, 2, XCond::odd});
        }
        SieveCase c6{6, false, std::nullopt, false, {}};
        if (l % 4 == 1) {
            c6.equations.push_back({1, 1, XCond::odd});
            c6.equations.push_back({1, 1, l % 8 == 1 ? XCond::two_mod_4 : XCond::zero_mod_4});
        }
        out.push_back(c3);
        out.push_back(c6);
    } else {
        i64 pp = -v;
        int leg = kronecker(static_cast<i128>(l), pp);
        if (leg == -1) {
            SieveCase c1{1, true, -1, false, {}};
            c1.equations.push_back({pp, 4 * pp, XCond::odd});
            XCond cond = l % 4 == 3 ? XCond::odd : (l * static_cast<u64>(pp)) % 8 == 7 ? XCond::two_mod_4 : XCond::zero_mod_4;
            c1.equations.push_back({pp, pp, cond});
            out.push_back(c1);
        } else {
            SieveCase c4{4, false, 1, true, {}};
            c4.equations.push_back({1, 4, XCond::odd});
            XCond cond = l % 4 == 1 ? XCond::odd : l % 8 == 7 ? XCond::two_mod_4 : XCond::zero_mod_4;
            c4.equations.push_back({1, 1, cond});
            out.push_back(c4);
        }
    }
    return out;
}

bool smallest_split_check(i128 D, u64 l)
{
    for (u64 q : primes_up_to(l > 0 ? l - 1 : 0)) {
        if (kronecker(D, static_cast<i128>(q)) == 1) {
            return false;
        }
    }
    return true;
}

void SieveConfig::validate() const
{
    if (!p_star.is_negative()) {
        throw std::invalid_argument("sieve: p* must be negative");
    }
    if (u < 1 || u % 2 == 0) {
        throw std::invalid_argument("sieve: u must be odd and positive");
    }
    if (assume_erh == l_max.has_value()) {
        throw std::invalid_argument("sieve: exactly one of assume_erh and l_max must be set");
    }
}

SieveResult sieve_rp(SieveConfig const & cfg)
{
    cfg.validate();
    PrimeStarDiscriminant const p = cfg.p_star;
    i64 const u = cfg.u;
    CheckpointState st;
    if (!cfg.checkpoint.empty()) {
        st = read_checkpoint(cfg.checkpoint, p, u);
    }
    std::set<i128> found = st.hits;
    SieveResult res;

    auto record = [&](u64 l, std::vector<int> const & cases, std::vector<i128> const & hits) {
        found.insert(hits.begin(), hits.end());
        if (!cfg.checkpoint.empty()) {
            append_checkpoint(cfg.checkpoint, p, u, l, cases, hits);
        }
        if (cfg.report_progress) {
            std::cerr << "sieve p*=" << to_string(p.value()) << " u=" << u << " l=" << l << " hits=" << hits.size()
                      << '\n';
        }
    };

    // l = 2 by hand, and q* = 8 directly.
    if (!st.done.count(2)) {
        std::vector<i128> hits;
        for (i128 C : {checked_mul(4 * p.prime(), ipow(2, u)), checked_mul(4, ipow(2, u))}) {
            u64 xmax = static_cast<u64>(isqrt128(static_cast<u128>(C - 1)));
            for (u64 x = 0; x <= xmax; ++x) {
                i128 V = static_cast<i128>(x) * x - C;
                if (auto q = Scanner::qualifies(V, 2, p, u)) {
                    hits.push_back(*q);
                }
            }
        }
        if (p.prime() != 2) {
            i128 D = product_discriminant(p, PrimeStarDiscriminant::from_value(8));
            if (exponent_divides(static_cast<i64>(D), 2 * u)) {
                hits.push_back(8);
            }
        }
        record(2, {}, hits);
    }

    double const pm = static_cast<double>(p.prime());
    u64 l = 3;
    std::vector<u64> small{2};
    while (true) {
        if (static_cast<i128>(l) != p.prime()) {
            if (cfg.assume_erh) {
                double bound = bach_sorenson(4.0 * std::pow(static_cast<double>(l), static_cast<double>(u)) * pm);
                if (static_cast<double>(l) > bound) {
                    res.stop_l = l;
                    res.exhaustive = true;
                    break;
                }
            } else if (l > *cfg.l_max) {
                break;
            }
            if (!st.done.count(l)) {
                Scanner sc{p, u, l, small, cfg.jobs};
                std::vector<int> ids;
                std::vector<i128> hits;
                for (auto const & c : select_cases(p, l)) {
                    ids.push_back(c.id);
                    for (auto const & eq : c.equations) {
                        sc.scan(eq, c.mod_p_wheel, hits);
                    }
                }
                std::sort(hits.begin(), hits.end());
                hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
                res.survivors += sc.survivors;
                record(l, ids, hits);
            }
            res.last_l = l;
        }
        small.push_back(l);
        do {
            l += 2;
        } while (!is_prime(static_cast<i128>(l)));
    }

    for (i128 q : found) {
        res.rp.push_back(PrimeStarDiscriminant::from_value(q));
    }
    std::sort(res.rp.begin(), res.rp.end(), canonical_less);
    return res;
}

} // namespace mqe
