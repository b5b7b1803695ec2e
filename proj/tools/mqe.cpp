#include "mqe/report.hpp"
#include "mqe/sieve.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace mqe;
using nlohmann::json;

namespace {

enum Exit { ok = 0, mismatch = 1, usage = 2 };

struct Options {
    std::string disc;
    i64 u = 3;
    i64 p = -3;
    std::optional<i64> dmax;
    std::optional<i64> qmax;
    std::optional<u64> l_max;
    bool assume_erh = false;
    bool progress = false;
    unsigned jobs = 1;
    std::string method = "scan";
    std::string out;
    std::string checkpoint;
    std::string crosscheck;
    std::string records;
    std::string expected;
    std::string csv;
};

std::vector<i64> values(std::vector<PrimeStarDiscriminant> const & v)
{
    std::vector<i64> out;
    for (auto const & x : v) {
        out.push_back(static_cast<i64>(x.value()));
    }
    return out;
}

json load_json(std::string const & path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return json::parse(in);
}

void report_crosscheck(std::string const & path, std::vector<i64> const & discs, StructureCache * cache,
                       json & manifest_extra)
{
    if (path.empty()) return;
    IngestedTable table = parse_ingested(load_json(path));
    CrosscheckResult cc = crosscheck(table, discs, cache);
    for (auto const & d : cc.disagreements) {
        std::cerr << "crosscheck disagreement: " << d << "\n";
    }
    std::cerr << "crosscheck: " << cc.checked << " discriminants compared, " << cc.disagreements.size()
              << " disagreements\n";
    manifest_extra["crosscheck"] = {{"table", path}, {"checked", cc.checked}, {"disagreements", cc.disagreements}};
}

int cmd_classgroup(Options const & o)
{
    i128 D = parse_i128(o.disc);
    if (auto why = fundamental_obstruction(D)) {
        std::cerr << "error: " << o.disc << " is not a fundamental discriminant: " << *why << "\n";
        return usage;
    }
    StructureCache cache;
    GroupStructure g = cache.structure(static_cast<i64>(D));
    json j = {{"divisors", g.divisors},
              {"h", g.order()},
              {"exponent", g.exponent()},
              {"odd_part", odd_part(g).divisors}};
    std::cout << j.dump() << "\n";
    json extra;
    report_crosscheck(o.crosscheck, {static_cast<i64>(D)}, &cache, extra);
    return ok;
}

int cmd_i1(Options const & o)
{
    if (o.u < 1 || o.u % 2 == 0) throw std::invalid_argument("i1: u must be odd");
    i64 dmax = o.dmax.value_or(o.u == 5 ? 38000 : 4100);
    StructureCache cache;
    auto recs = i1_records(compute_I1(o.u, dmax, o.jobs), &cache);
    json strata = json::object();
    for (auto const & r : recs) {
        strata[std::to_string(r.class_group.rank())].push_back(static_cast<i64>(r.field.values()[0]));
    }
    std::cout << json{{"u", o.u}, {"dmax", dmax}, {"count", recs.size()}, {"strata", strata}}.dump() << "\n";
    return ok;
}

int cmd_rp(Options const & o)
{
    auto p = PrimeStarDiscriminant::from_value(o.p);
    if (!p.is_negative()) throw std::invalid_argument("rp: p* must be negative");
    json j = {{"p", o.p}, {"u", o.u}, {"method", o.method}};
    if (o.method == "scan") {
        if (o.l_max) throw std::invalid_argument("rp: --l-max applies only to the sieve");
        i64 qmax;
        if (o.qmax) {
            qmax = *o.qmax;
        } else if (o.u == 3) {
            qmax = rp_qmax_u3(p);
        } else {
            throw std::invalid_argument("rp: --qmax is required for the scan unless u = 3");
        }
        j["qmax"] = qmax;
        j["rp"] = values(rp_scan(p, o.u, qmax, o.jobs));
        j["exhaustive"] = o.assume_erh && o.u == 3 && qmax >= rp_qmax_u3(p);
    } else {
        if (o.qmax) throw std::invalid_argument("rp: --qmax applies only to the scan");
        SieveConfig cfg;
        cfg.p_star = p;
        cfg.u = o.u;
        cfg.assume_erh = o.assume_erh && !o.l_max;
        cfg.l_max = o.l_max;
        cfg.jobs = o.jobs;
        cfg.checkpoint = o.checkpoint;
        cfg.report_progress = o.progress;
        if (!o.assume_erh && !o.l_max) {
            throw std::invalid_argument("rp: the sieve needs --assume-erh or --l-max");
        }
        SieveResult res = sieve_rp(cfg);
        j["rp"] = values(res.rp);
        j["exhaustive"] = res.exhaustive;
        j["last_l"] = res.last_l;
        if (res.stop_l) j["stop_l"] = res.stop_l;
    }
    std::cout << j.dump() << "\n";
    return ok;
}

int cmd_families(Options const & o)
{
    RunManifest m;
    m.command = "families";
    m.start = utc_timestamp();
    FamiliesOptions fo;
    fo.u = o.u;
    fo.dmax = o.dmax;
    fo.qmax = o.qmax;
    fo.method = o.method == "scan" ? RpMethod::scan : RpMethod::sieve;
    fo.assume_erh = o.assume_erh;
    fo.l_max = o.l_max;
    fo.jobs = o.jobs;
    fo.checkpoint = o.checkpoint;
    FamiliesRun run = run_families(fo);
    if (!run.exhaustive) {
        std::cerr << "note: results are not claimed complete"
                  << (o.assume_erh ? " (an R set came from a bounded scan or --l-max)" : " (pass --assume-erh)") << "\n";
    }

    m.u = o.u;
    m.erh_flag = o.assume_erh;
    m.parameters = {{"method", o.method}, {"jobs", o.jobs}, {"checkpoint", o.checkpoint}};
    m.bounds = {{"dmax", o.dmax.value_or(o.u == 3 ? 4100 : 38000)}};
    if (o.qmax) m.bounds["qmax"] = *o.qmax;
    if (o.l_max) m.bounds["l_max"] = *o.l_max;
    m.extra["exhaustive"] = run.exhaustive;
    StructureCache cache;
    report_crosscheck(o.crosscheck, subfield_discriminants(run.records), &cache, m.extra);

    std::vector<Artifact> arts = {{"records.json", records_json(run).dump(1) + "\n"},
                                  {"counts.csv", counts_csv(run.records)},
                                  {"maxdisc.csv", maxdisc_csv(run.records)}};
    m.end = utc_timestamp();
    write_artifacts(o.out, arts, m);
    std::cout << arts[1].content;
    return ok;
}

int cmd_verify(Options const & o)
{
    FamiliesRun run, expected;
    bool against_dir = std::filesystem::is_directory(o.expected);
    try {
        run = parse_records(load_json(o.records));
        if (!against_dir) expected = parse_records(load_json(o.expected));
    } catch (std::exception const & e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    VerifyReport rep;
    try {
        rep = against_dir ? verify_against_fixtures(run, o.expected) : verify_against_records(run, expected);
    } catch (std::exception const & e) {
        std::cerr << "error: fixtures: " << e.what() << "\n";
        return usage;
    }
    for (auto const & d : rep.diffs) {
        std::cout << "- " << d << "\n";
    }
    std::cout << (rep.ok() ? "verify: OK" : "verify: " + std::to_string(rep.diffs.size()) + " differences") << "\n";
    return rep.ok() ? ok : mismatch;
}

int cmd_ingest(Options const & o)
{
    RunManifest m;
    m.command = "ingest";
    m.start = utc_timestamp();
    StructureCache cache;
    IngestedTable t = ingest_csv(o.csv, &cache);
    for (auto const & w : t.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    std::vector<i64> keys;
    for (auto const & [d, g] : t.groups) keys.push_back(d);
    CrosscheckResult cc = crosscheck(t, keys, &cache);
    json summary = {{"rows", t.groups.size()},
                    {"matched", cc.checked - static_cast<int>(cc.disagreements.size())},
                    {"disagreements", cc.disagreements},
                    {"skipped", t.skipped}};
    std::cout << summary.dump() << "\n";
    m.parameters = {{"csv", o.csv}};
    m.extra["rows"] = t.groups.size();
    m.extra["skipped_rows"] = t.skipped;
    m.extra["disagreements"] = cc.disagreements.size();
    m.end = utc_timestamp();
    write_artifacts(o.out, {{"ingested.json", ingested_json(t).dump(1) + "\n"}}, m);
    return ok;
}

int cmd_crossover(Options const & o)
{
    Crossover c = crossover_bound(static_cast<int>(o.u));
    std::cout << json{{"u", o.u}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi}}.dump() << "\n";
    return ok;
}

} // namespace

int main(int argc, char ** argv)
{
    CLI::App app{"Class groups of exponent 3 or 5 in imaginary multiquadratic fields"};
    app.require_subcommand(1);
    Options o;

    auto u_opt = [&](CLI::App * c) { c->add_option("--u", o.u, "Exponent bound u (3 or 5)")->capture_default_str(); };
    auto jobs_opt = [&](CLI::App * c) { c->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str(); };
    auto method_opt = [&](CLI::App * c) {
        c->add_option("--method", o.method, "How R sets are computed")
            ->check(CLI::IsMember({"scan", "sieve"}))
            ->capture_default_str();
    };

    auto * cg = app.add_subcommand("classgroup", "Class group of a fundamental discriminant");
    cg->add_option("D", o.disc, "Fundamental discriminant (use -- before negative values)")->required();
    cg->add_option("--crosscheck", o.crosscheck, "Ingested table to compare against");

    auto * i1 = app.add_subcommand("i1", "Imaginary quadratic p* with exponent dividing u");
    u_opt(i1);
    i1->add_option("--dmax", o.dmax, "Largest |p*| scanned");
    jobs_opt(i1);

    auto * rp = app.add_subcommand("rp", "Positive partners q* of a negative p*");
    rp->add_option("--p", o.p, "Negative prime discriminant p*")->required();
    u_opt(rp);
    method_opt(rp);
    rp->add_option("--qmax", o.qmax, "Scan bound");
    rp->add_option("--l-max", o.l_max, "Sieve prime bound (overrides the ERH stop)");
    rp->add_flag("--assume-erh", o.assume_erh, "Use the ERH stopping rule and claim completeness");
    rp->add_option("--checkpoint", o.checkpoint, "Sieve checkpoint file (JSON lines)");
    rp->add_flag("--progress", o.progress, "Sieve progress on stderr");
    jobs_opt(rp);

    auto * fam = app.add_subcommand("families", "Full classification with tables and manifest");
    u_opt(fam);
    fam->add_option("--dmax", o.dmax, "Largest |p*| scanned for I1");
    fam->add_option("--qmax", o.qmax, "Scan bound for every R set");
    fam->add_option("--l-max", o.l_max, "Sieve prime bound (marks the run non-exhaustive)");
    fam->add_flag("--assume-erh", o.assume_erh, "Required for a run to be marked exhaustive");
    method_opt(fam);
    fam->add_option("--out", o.out, "Output directory")->required();
    fam->add_option("--checkpoint", o.checkpoint, "Sieve checkpoint file (JSON lines)");
    fam->add_option("--crosscheck", o.crosscheck, "Ingested table to compare against");
    jobs_opt(fam);

    auto * ver = app.add_subcommand("verify", "Compare records.json with fixtures or another records file");
    ver->add_option("records", o.records, "records.json")->required();
    ver->add_option("expected", o.expected, "Fixture directory or reference records.json")->required();

    auto * ing = app.add_subcommand("ingest", "Import an external discriminant,divisors CSV");
    ing->add_option("csv", o.csv, "CSV file")->required()->check(CLI::ExistingFile);
    ing->add_option("--out", o.out, "Output directory")->required();

    auto * cx = app.add_subcommand("crossover", "Crossover point of the discriminant bounds");
    u_opt(cx);

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const & e) {
        int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (cg->parsed()) return cmd_classgroup(o);
        if (i1->parsed()) return cmd_i1(o);
        if (rp->parsed()) return cmd_rp(o);
        if (fam->parsed()) return cmd_families(o);
        if (ver->parsed()) return cmd_verify(o);
        if (ing->parsed()) return cmd_ingest(o);
        if (cx->parsed()) return cmd_crossover(o);
    } catch (std::exception const & e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    return usage;
}
