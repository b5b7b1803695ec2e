#include "mqe/report.hpp"

#include "mqe/sieve.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mqe {

namespace {

using nlohmann::json;

constexpr char const * kFamilies[] = {"1", "2a", "2b", "3a", "3b"};

i64 default_dmax(i64 u) { return u == 3 ? 4100 : 38000; }

std::vector<i64> as_ints(std::vector<i128> const & v)
{
    std::vector<i64> out;
    for (i128 x : v) {
        out.push_back(static_cast<i64>(x));
    }
    return out;
}

std::string join(std::vector<i64> const & v, char sep)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(v[i]);
    }
    return out;
}

std::string group_string(GroupStructure const & g)
{
    return "[" + join(g.divisors, ',') + "]";
}

std::string describe(FamilyRecord const & r)
{
    return r.family + " disc=" + to_string(r.disc) + " generators=(" + join(as_ints(r.field.values()), ',') + ")";
}

bool is_chain(std::vector<i64> const & d)
{
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] < 2) return false;
        if (i + 1 < d.size() && d[i + 1] % d[i] != 0) return false;
    }
    return true;
}

bool same_set(std::vector<i64> a, std::vector<i64> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

std::vector<int> histogram_of(std::vector<FamilyRecord> const & records, std::string const & family)
{
    std::vector<FamilyRecord> sel;
    for (auto const & r : records) {
        if (r.family == family) sel.push_back(r);
    }
    return rank_histogram(sel);
}

std::vector<int> sum(std::vector<int> x, std::vector<int> const & y)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += y[i];
    }
    return x;
}

std::string histogram_string(std::vector<int> const & h)
{
    std::string out = "(";
    for (std::size_t i = 0; i < h.size(); ++i) {
        out += (i ? "," : "") + std::to_string(h[i]);
    }
    return out + ")";
}

json read_json(std::filesystem::path const & p)
{
    std::ifstream in(p);
    if (!in) {
        throw std::runtime_error("cannot open " + p.string());
    }
    return json::parse(in);
}

std::vector<PrimeStarDiscriminant> rp_for(PrimeStarDiscriminant p, FamiliesOptions const & opt, bool & exhaustive)
{
    if (opt.method == RpMethod::scan) {
        i64 bound = opt.u == 3 ? rp_qmax_u3(p) : 40000;
        if (opt.qmax) {
            if (opt.u != 3 || *opt.qmax < bound) exhaustive = false;
            bound = *opt.qmax;
        } else if (opt.u != 3) {
            exhaustive = false;
        }
        return rp_scan(p, opt.u, bound, opt.jobs);
    }
    SieveConfig cfg;
    cfg.p_star = p;
    cfg.u = opt.u;
    cfg.assume_erh = !opt.l_max;
    cfg.l_max = opt.l_max;
    cfg.jobs = opt.jobs;
    cfg.checkpoint = opt.checkpoint;
    SieveResult res = sieve_rp(cfg);
    if (!res.exhaustive) exhaustive = false;
    return res.rp;
}

} // namespace

std::string to_string(RpMethod m)
{
    return m == RpMethod::scan ? "scan" : "sieve";
}

FamiliesRun run_families(FamiliesOptions const & opt)
{
    if (opt.u != 3 && opt.u != 5) {
        throw std::invalid_argument("families: u must be 3 or 5");
    }
    if (opt.method == RpMethod::sieve && !opt.assume_erh && !opt.l_max) {
        throw std::invalid_argument("families: the sieve needs --assume-erh or --l-max");
    }
    if (opt.method == RpMethod::scan && opt.l_max) {
        throw std::invalid_argument("families: --l-max applies only to the sieve");
    }
    if (opt.qmax && opt.method == RpMethod::sieve) {
        throw std::invalid_argument("families: --qmax applies only to the scan");
    }

    FamiliesRun run;
    run.u = opt.u;
    run.method = opt.method;
    i64 dmax = opt.dmax.value_or(default_dmax(opt.u));
    bool exhaustive = opt.assume_erh && !opt.l_max && dmax >= default_dmax(opt.u);

    StructureCache cache;
    auto i1 = compute_I1(opt.u, dmax, opt.jobs);
    for (auto const & p : i1) {
        run.rp[static_cast<i64>(p.value())] = rp_for(p, opt, exhaustive);
    }
    auto k1 = i1_records(i1, &cache);
    auto k2a = compute_K2a(i1, opt.u, &cache, opt.jobs);
    auto k2b = compute_K2b(i1, run.rp, opt.u, &cache, opt.jobs);
    auto k3 = compute_K3(k2a, k2b, opt.u, &cache, opt.jobs);

    for (auto * part : {&k1, &k2a, &k2b, &k3.a, &k3.b}) {
        run.records.insert(run.records.end(), part->begin(), part->end());
    }
    sort_records(run.records);
    run.exhaustive = exhaustive;
    return run;
}

json records_json(FamiliesRun const & run)
{
    json recs = json::array();
    for (auto const & r : run.records) {
        recs.push_back({{"generators", as_ints(r.field.values())},
                        {"n", r.field.n()},
                        {"family", r.family},
                        {"disc", to_string(r.disc)},
                        {"class_group", r.class_group.divisors}});
    }
    json rp = json::object();
    for (auto const & [p, qs] : run.rp) {
        std::vector<i64> vals;
        for (auto const & q : qs) {
            vals.push_back(static_cast<i64>(q.value()));
        }
        rp[std::to_string(p)] = vals;
    }
    return {{"u", run.u},
            {"exhaustive", run.exhaustive},
            {"rp_method", to_string(run.method)},
            {"records", recs},
            {"rp", rp}};
}

FamiliesRun parse_records(json const & j)
{
    auto fail = [](std::string const & what) { throw std::invalid_argument("records: " + what); };
    if (!j.is_object() || !j.contains("u") || !j.contains("records") || !j["records"].is_array()) {
        fail("expected an object with u and records");
    }
    FamiliesRun run;
    run.u = j.at("u").get<i64>();
    run.exhaustive = j.value("exhaustive", false);
    std::string method = j.value("rp_method", "scan");
    if (method != "scan" && method != "sieve") fail("unknown rp_method " + method);
    run.method = method == "scan" ? RpMethod::scan : RpMethod::sieve;

    for (auto const & rec : j["records"]) {
        for (char const * key : {"generators", "n", "family", "disc", "class_group"}) {
            if (!rec.contains(key)) fail(std::string("record without ") + key);
        }
        auto gens = rec["generators"].get<std::vector<i64>>();
        std::vector<i128> vals(gens.begin(), gens.end());
        FamilyRecord r{"", FieldSpec::from_values(vals), 0, {}};
        if (r.field.values() != vals) fail("generators not in canonical order: " + join(gens, ','));
        if (rec["n"].get<std::size_t>() != gens.size()) fail("n does not match generators " + join(gens, ','));
        r.family = rec["family"].get<std::string>();
        if (std::find(std::begin(kFamilies), std::end(kFamilies), r.family) == std::end(kFamilies)) {
            fail("unknown family " + r.family);
        }
        r.disc = parse_i128(rec["disc"].get<std::string>());
        r.class_group.divisors = rec["class_group"].get<std::vector<i64>>();
        if (!is_chain(r.class_group.divisors)) fail("class_group is not a divisor chain");
        run.records.push_back(std::move(r));
    }
    if (j.contains("rp")) {
        for (auto const & [key, qs] : j["rp"].items()) {
            auto & row = run.rp[std::stoll(key)];
            for (auto const & q : qs) {
                row.push_back(PrimeStarDiscriminant::from_value(q.get<i64>()));
            }
        }
    }
    return run;
}

std::string counts_csv(std::vector<FamilyRecord> const & records)
{
    std::ostringstream out;
    out << "family,r=0,r=1,r=2,r=3,r=4,total\n";
    auto row = [&](std::string const & name, std::vector<int> const & h) {
        int total = 0;
        out << name;
        for (int x : h) {
            out << ',' << x;
            total += x;
        }
        out << ',' << total << '\n';
    };
    std::map<std::string, std::vector<int>> h;
    for (auto const * f : kFamilies) {
        h[f] = histogram_of(records, f);
    }
    row("1", h["1"]);
    row("2a", h["2a"]);
    row("2b", h["2b"]);
    row("total", sum(h["2a"], h["2b"]));
    row("3a", h["3a"]);
    row("3b", h["3b"]);
    row("total", sum(h["3a"], h["3b"]));
    return out.str();
}

std::string maxdisc_csv(std::vector<FamilyRecord> const & records)
{
    std::map<std::pair<std::string, std::size_t>, i128> best;
    for (auto const & r : records) {
        if (r.family == "1" || r.class_group.rank() == 0) continue;
        auto key = std::make_pair(r.family, r.class_group.rank());
        auto it = best.find(key);
        if (it == best.end() || it->second < r.disc) best[key] = r.disc;
    }
    std::ostringstream out;
    out << "family,rank,disc\n";
    for (auto const & [key, disc] : best) {
        out << key.first << ',' << key.second << ',' << to_string(disc) << '\n';
    }
    return out.str();
}

VerifyReport verify_against_fixtures(FamiliesRun const & run, std::string const & data_dir)
{
    namespace fs = std::filesystem;
    VerifyReport rep;
    auto & d = rep.diffs;
    std::string const us = std::to_string(run.u);
    if (run.u != 3 && run.u != 5) {
        d.push_back("u: no fixtures for u=" + us);
        return rep;
    }

    for (auto const & r : run.records) {
        if (composite_discriminant(r.field) != r.disc) {
            d.push_back("record " + describe(r) + ": disc does not match the generators");
        }
        if (run.u % std::max<i64>(r.class_group.exponent(), 1) != 0) {
            d.push_back("record " + describe(r) + ": class group " + group_string(r.class_group) +
                        " has exponent not dividing u");
        }
    }

    json i1 = read_json(fs::path(data_dir) / ("i1_u" + us + ".json"));
    std::map<std::string, std::set<i64>> got;
    for (auto const & r : run.records) {
        if (r.family == "1") got[std::to_string(r.class_group.rank())].insert(static_cast<i64>(r.field.values()[0]));
    }
    for (auto const & [rank, list] : i1["strata"].items()) {
        std::set<i64> want;
        for (auto const & x : list) want.insert(x.get<i64>());
        for (i64 x : want) {
            if (!got[rank].count(x)) d.push_back("I1 r=" + rank + ": missing " + std::to_string(x));
        }
        for (i64 x : got[rank]) {
            if (!want.count(x)) d.push_back("I1 r=" + rank + ": unexpected " + std::to_string(x));
        }
        got.erase(rank);
    }
    for (auto const & [rank, xs] : got) {
        for (i64 x : xs) d.push_back("I1 r=" + rank + ": unexpected " + std::to_string(x));
    }

    json tables = read_json(fs::path(data_dir) / "rank_tables.json").at(us);
    std::map<std::string, std::vector<int>> h;
    for (auto const * f : kFamilies) {
        h[f] = histogram_of(run.records, f);
    }
    for (auto const & [fam, want] : tables["families"].items()) {
        auto w = want.get<std::vector<int>>();
        if (h[fam] != w) {
            d.push_back("histogram " + fam + ": expected " + histogram_string(w) + ", got " + histogram_string(h[fam]));
        }
    }
    for (auto const & [fam, want] : tables["kappa"].items()) {
        int k = 0;
        for (int x : h[fam]) k += x;
        if (k != want.get<int>()) {
            d.push_back("kappa " + fam + ": expected " + std::to_string(want.get<int>()) + ", got " + std::to_string(k));
        }
    }
    std::map<std::string, std::vector<int>> totals = {{"2", sum(h["2a"], h["2b"])}, {"3", sum(h["3a"], h["3b"])}};
    for (auto const & [n, want] : tables["totals"].items()) {
        auto w = want.get<std::vector<int>>();
        if (totals[n] != w) {
            d.push_back("total n=" + n + ": expected " + histogram_string(w) + ", got " + histogram_string(totals[n]));
        }
    }

    if (run.u == 5) {
        json rp = read_json(fs::path(data_dir) / "rp_u5.json");
        std::set<i64> seen;
        for (auto const & [key, list] : rp["rows"].items()) {
            i64 p = std::stoll(key);
            seen.insert(p);
            std::vector<i64> want = list.get<std::vector<i64>>();
            auto it = run.rp.find(p);
            if (it == run.rp.end()) {
                d.push_back("R row " + key + ": missing (expected " + join(want, ',') + ")");
                continue;
            }
            std::vector<i64> have;
            for (auto const & q : it->second) have.push_back(static_cast<i64>(q.value()));
            if (have != want) {
                d.push_back("R row " + key + ": expected " + join(want, ',') + ", got " + join(have, ','));
            }
        }
        int empty = 0;
        for (auto const & [p, qs] : run.rp) {
            if (seen.count(p)) continue;
            if (qs.empty()) {
                ++empty;
            } else {
                std::vector<i64> have;
                for (auto const & q : qs) have.push_back(static_cast<i64>(q.value()));
                d.push_back("R row " + std::to_string(p) + ": expected empty, got " + join(have, ','));
            }
        }
        if (empty != rp["empty_rows"].get<int>()) {
            d.push_back("R table: expected " + std::to_string(rp["empty_rows"].get<int>()) + " empty rows, got " +
                        std::to_string(empty));
        }
    }

    json maxd = read_json(fs::path(data_dir) / "maxdisc.json").at(us);
    for (auto const & e : maxd) {
        std::string fam = e["family"].get<std::string>();
        std::size_t rank = e["rank"].get<std::size_t>();
        i128 want = parse_i128(e["disc"].get<std::string>());
        auto gens = e["generators"].get<std::vector<i64>>();
        FamilyRecord const * top = nullptr;
        for (auto const & r : run.records) {
            if (r.family == fam && r.class_group.rank() == rank && (!top || top->disc < r.disc)) top = &r;
        }
        std::string label = "maxdisc " + fam + " r=" + std::to_string(rank) + ": ";
        if (!top) {
            d.push_back(label + "missing " + to_string(want) + " (" + join(gens, ',') + ")");
        } else if (top->disc != want || !same_set(as_ints(top->field.values()), gens)) {
            d.push_back(label + "expected " + to_string(want) + " (" + join(gens, ',') + "), got " +
                        to_string(top->disc) + " (" + join(as_ints(top->field.values()), ',') + ")");
        }
    }
    return rep;
}

VerifyReport verify_against_records(FamiliesRun const & run, FamiliesRun const & expected)
{
    VerifyReport rep;
    if (run.u != expected.u) {
        rep.diffs.push_back("u: expected " + std::to_string(expected.u) + ", got " + std::to_string(run.u));
    }
    using Key = std::pair<std::string, std::vector<i128>>;
    std::map<Key, FamilyRecord const *> have;
    for (auto const & r : run.records) {
        have[{r.family, r.field.values()}] = &r;
    }
    for (auto const & r : expected.records) {
        auto it = have.find({r.family, r.field.values()});
        if (it == have.end()) {
            rep.diffs.push_back("missing record " + describe(r));
            continue;
        }
        FamilyRecord const & g = *it->second;
        if (g.disc != r.disc) {
            rep.diffs.push_back("record " + describe(r) + ": got disc " + to_string(g.disc));
        }
        if (!(g.class_group == r.class_group)) {
            rep.diffs.push_back("record " + describe(r) + ": expected class group " + group_string(r.class_group) +
                                ", got " + group_string(g.class_group));
        }
        have.erase(it);
    }
    for (auto const & [key, r] : have) {
        rep.diffs.push_back("unexpected record " + describe(*r));
    }
    for (auto const & [p, qs] : expected.rp) {
        auto it = run.rp.find(p);
        if (it == run.rp.end() || !(it->second == qs)) {
            rep.diffs.push_back("R row " + std::to_string(p) + " differs");
        }
    }
    return rep;
}

std::optional<std::string> fundamental_obstruction(i128 D)
{
    if (D == 0) return "D = 0";
    if (abs128(D) >= (i128(1) << 62)) return "|D| >= 2^62 is outside the supported range";
    if (D > 0 && is_square128(D)) return "D is a perfect square";
    i128 r = ((D % 4) + 4) % 4;
    if (r == 2 || r == 3) return "D = " + std::to_string(static_cast<int>(r)) + " (mod 4)";
    i128 m = D;
    if (r == 0) {
        m = D / 4;
        i128 s = ((m % 4) + 4) % 4;
        if (s == 1) return "D/4 = 1 (mod 4)";
        if (s == 0) return "16 divides D";
    }
    for (auto const & [p, e] : factor(abs128(m)).factors) {
        if (e >= 2) return to_string(p) + "^2 divides " + (r == 0 ? std::string("D/4") : std::string("D"));
    }
    return std::nullopt;
}

IngestedTable ingest_csv(std::string const & path, StructureCache * cache)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    IngestedTable t;
    std::string line;
    int lineno = 0;
    auto skip = [&](std::string const & why) {
        t.warnings.push_back("line " + std::to_string(lineno) + ": " + why + ": skipped");
        ++t.skipped;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            skip("expected two columns");
            continue;
        }
        std::string dstr = line.substr(0, comma), gstr = line.substr(comma + 1);
        i128 D = 0;
        try {
            D = parse_i128(dstr);
        } catch (std::exception const &) {
            if (lineno == 1) continue; // header
            skip("unparsable discriminant '" + dstr + "'");
            continue;
        }
        if (auto why = fundamental_obstruction(D)) {
            skip("not a fundamental discriminant (" + *why + ")");
            continue;
        }
        GroupStructure g;
        bool ok = true;
        std::stringstream parts(gstr);
        std::string part;
        while (ok && std::getline(parts, part, ';')) {
            try {
                std::size_t used = 0;
                i64 v = std::stoll(part, &used);
                ok = used == part.size();
                g.divisors.push_back(v);
            } catch (std::exception const &) {
                ok = false;
            }
        }
        if (!ok || !is_chain(g.divisors)) {
            skip("divisors '" + gstr + "' are not an invariant factor chain");
            continue;
        }
        i64 d64 = static_cast<i64>(D);
        // A single non-squarefree value is ambiguous between C_h and a
        // non-cyclic group of order h; a non-cyclic match means the row
        // gives the class number instead of the divisors.
        if (g.divisors.size() == 1 && !factor(g.divisors[0]).is_squarefree()) {
            GroupStructure c = cache ? cache->structure(d64) : class_group(d64).structure;
            if (c.rank() > 1 && c.order() == g.divisors[0]) {
                skip("single value " + std::to_string(g.divisors[0]) + " is the class number of the non-cyclic group " +
                     group_string(c) + ", not its divisors");
                continue;
            }
        }
        if (t.groups.count(d64) && !(t.groups[d64] == g)) {
            skip("conflicting duplicate row for " + dstr);
            continue;
        }
        t.groups[d64] = g;
    }
    return t;
}

json ingested_json(IngestedTable const & t)
{
    json rows = json::object();
    for (auto const & [d, g] : t.groups) {
        rows[std::to_string(d)] = g.divisors;
    }
    return {{"groups", rows}, {"skipped", t.skipped}, {"warnings", t.warnings}};
}

IngestedTable parse_ingested(json const & j)
{
    if (!j.is_object() || !j.contains("groups")) {
        throw std::invalid_argument("ingested table: expected an object with groups");
    }
    IngestedTable t;
    for (auto const & [key, divs] : j["groups"].items()) {
        GroupStructure g;
        g.divisors = divs.get<std::vector<i64>>();
        if (!is_chain(g.divisors)) throw std::invalid_argument("ingested table: bad divisors for " + key);
        t.groups[std::stoll(key)] = g;
    }
    t.skipped = j.value("skipped", 0);
    if (j.contains("warnings")) t.warnings = j["warnings"].get<std::vector<std::string>>();
    return t;
}

CrosscheckResult crosscheck(IngestedTable const & table, std::vector<i64> const & discs, StructureCache * cache)
{
    CrosscheckResult res;
    for (i64 d : discs) {
        auto it = table.groups.find(d);
        if (it == table.groups.end()) continue;
        ++res.checked;
        GroupStructure c = cache ? cache->structure(d) : class_group(d).structure;
        if (!(c == it->second)) {
            res.disagreements.push_back(std::to_string(d) + ": table " + group_string(it->second) + ", computed " +
                                        group_string(c));
        }
    }
    return res;
}

std::vector<i64> subfield_discriminants(std::vector<FamilyRecord> const & records)
{
    std::set<i64> out;
    for (auto const & r : records) {
        for (i128 d : quadratic_subfields(r.field)) {
            out.insert(static_cast<i64>(d));
        }
    }
    return {out.begin(), out.end()};
}

std::string sha256_hex(std::string const & data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)) {
        throw std::runtime_error("sha256 failed");
    }
    static char const hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

json RunManifest::to_json() const
{
    json j = {{"command", command},
              {"parameters", parameters},
              {"bounds", bounds},
              {"erh_flag", erh_flag},
              {"start", start},
              {"end", end},
              {"tool_version", version},
              {"digests", digests}};
    j["u"] = u ? json(*u) : json(nullptr);
    for (auto const & [k, v] : extra.items()) {
        j[k] = v;
    }
    return j;
}

std::string utc_timestamp()
{
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_artifacts(std::string const & dir, std::vector<Artifact> const & artifacts, RunManifest & manifest)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (auto const & a : artifacts) {
        manifest.digests[a.name] = "sha256:" + sha256_hex(a.content);
    }
    auto put = [&](std::string const & name, std::string const & content) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    };
    for (auto const & a : artifacts) {
        put(a.name, a.content);
    }
    put("run_manifest.json", manifest.to_json().dump(2) + "\n");
}

} // namespace mqe
