#pragma once

// Family runs, their JSON/CSV artifacts, verification against the bundled
// tables, and ingestion of external class group dumps.

#include "mqe/families.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mqe {

enum class RpMethod { scan, sieve };

struct FamiliesOptions {
    i64 u = 3;
    std::optional<i64> dmax;   // default 4100 (u=3) or 38000 (u=5)
    std::optional<i64> qmax;   // scan bound; default: closed form for u=3, 4e4 for u=5
    RpMethod method = RpMethod::scan;
    bool assume_erh = false;
    std::optional<u64> l_max;  // sieve only
    unsigned jobs = 1;
    std::string checkpoint;    // sieve only
};

struct FamiliesRun {
    i64 u = 3;
    bool exhaustive = false;
    RpMethod method = RpMethod::scan;
    std::vector<FamilyRecord> records; // all families, sorted
    RpTable rp;
};

FamiliesRun run_families(FamiliesOptions const & opt);

nlohmann::json records_json(FamiliesRun const & run);
/// Inverse of records_json; throws on schema violations.
FamiliesRun parse_records(nlohmann::json const & j);

/// Family x rank table: rows 1, 2a, 2b, total, 3a, 3b, total.
std::string counts_csv(std::vector<FamilyRecord> const & records);
/// Largest composite discriminant per (family, rank >= 1).
std::string maxdisc_csv(std::vector<FamilyRecord> const & records);

struct VerifyReport {
    std::vector<std::string> diffs;
    bool ok() const { return diffs.empty(); }
};

/// Compares a run against the tables in data_dir (i1_u*, rank_tables, rp_u5, maxdisc).
VerifyReport verify_against_fixtures(FamiliesRun const & run, std::string const & data_dir);
/// Record-by-record comparison of two runs.
VerifyReport verify_against_records(FamiliesRun const & run, FamiliesRun const & expected);

struct IngestedTable {
    std::map<i64, GroupStructure> groups;
    std::vector<std::string> warnings;
    int skipped = 0;
};

/// Reads "discriminant,d1;d2;..." rows. Rows that are not a valid invariant
/// factor chain for a fundamental discriminant are skipped with a warning.
IngestedTable ingest_csv(std::string const & path, StructureCache * cache = nullptr);

nlohmann::json ingested_json(IngestedTable const & t);
IngestedTable parse_ingested(nlohmann::json const & j);

struct CrosscheckResult {
    int checked = 0;
    std::vector<std::string> disagreements;
};

/// Compares computed structures of the given discriminants with the table
/// entries for them; discriminants absent from the table are ignored.
CrosscheckResult crosscheck(IngestedTable const & table, std::vector<i64> const & discs,
                            StructureCache * cache = nullptr);

/// Every quadratic subfield discriminant occurring in the records, ascending.
std::vector<i64> subfield_discriminants(std::vector<FamilyRecord> const & records);

/// Why D is not a fundamental discriminant, or nullopt if it is.
std::optional<std::string> fundamental_obstruction(i128 D);

std::string sha256_hex(std::string const & data);

inline constexpr char kToolVersion[] = "1.0.0";

struct Artifact {
    std::string name;
    std::string content;
};

struct RunManifest {
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    std::optional<i64> u;
    nlohmann::json bounds = nlohmann::json::object();
    bool erh_flag = false;
    std::string start;
    std::string end;
    std::string version = kToolVersion;
    std::map<std::string, std::string> digests;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// Current UTC time as an ISO 8601 string.
std::string utc_timestamp();

/// Fills the manifest digests, then writes every artifact and
/// run_manifest.json into dir (created if needed).
void write_artifacts(std::string const & dir, std::vector<Artifact> const & artifacts,
                     RunManifest & manifest);

std::string to_string(RpMethod m);

} // namespace mqe
