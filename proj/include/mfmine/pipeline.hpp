#pragma once

#include "mfmine/history.hpp"
#include "mfmine/location.hpp"
#include "mfmine/timestamp.hpp"
#include "mfmine/translate.hpp"
#include "mfmine/transplant.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfmine::pipeline {

constexpr int kSchemaVersion = 1;
constexpr std::string_view kToolVersion = "0.1.0";

/// One bug as present in one version.
struct BugRecord {
    std::string bug_id;
    std::string source_entry_id;
    /// Empty for the version's native bug.
    std::vector<std::string> transplanted_unit_ids;
    /// Exposing tests as named in the version's (spliced) suite.
    std::vector<std::string> test_ids;
    /// Active locations in this version's coordinates.
    std::vector<FaultLocation> locations;

    friend bool operator==(const BugRecord&, const BugRecord&) = default;
};

struct MultiFaultEntry {
    std::string target_version;
    std::string native_bug_id;
    /// Native bug first, then transplanted bugs in entry order.
    std::vector<BugRecord> bugs;

    const BugRecord* find(std::string_view bug_id) const;

    friend bool operator==(const MultiFaultEntry&, const MultiFaultEntry&) = default;
};

struct LocationDrop {
    FaultLocation origin;
    std::string dropped_at;
    locate::DropReason reason = locate::DropReason::Modified;

    friend bool operator==(const LocationDrop&, const LocationDrop&) = default;
};

/// A bug exposed in a version where none of its locations could be tracked.
struct DropEvent {
    std::string bug_id;
    std::string target_version;
    std::string stage = "TranslationFailed";
    std::vector<LocationDrop> drops;

    friend bool operator==(const DropEvent&, const DropEvent&) = default;
};

struct Diagnostic {
    enum class Severity { Warning, Error };

    std::string entry_id;
    Severity severity = Severity::Error;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// A transplant attempt as logged in the manifest.
struct TransplantLog {
    std::string bug_id;
    std::string target_entry_id;
    std::string source_version;
    std::string target_version;
    std::vector<std::string> units_copied;
    std::vector<transplant::SpliceAction> splice_report;
    std::string splice_diff;  // unified diff over test files
    std::vector<std::string> test_ids;
    bool exposed = false;
    std::optional<transplant::NotExposedReason> reason;
    std::vector<harness::TestStatus> source_status;
    std::vector<harness::TestStatus> target_status;
    std::vector<double> similarity;

    friend bool operator==(const TransplantLog&, const TransplantLog&) = default;
};

TransplantLog to_log(const transplant::TransplantRecord& record, const harness::RunnerConfig& runner);

struct MultiFaultManifest {
    int schema_version = kSchemaVersion;
    std::string tool_version = std::string(kToolVersion);
    std::string project_name;
    Timestamp created{};
    double threshold = harness::kDefaultThreshold;
    std::vector<MultiFaultEntry> entries;
    std::vector<DropEvent> drop_events;
    std::vector<TransplantLog> transplants;
    std::vector<Diagnostic> diagnostics;

    const MultiFaultEntry* find(std::string_view version_id) const;
    bool partial_failure() const;
};

/// Structural equality ignoring the creation timestamp.
bool same_content(const MultiFaultManifest& a, const MultiFaultManifest& b);

std::string to_json(const MultiFaultManifest& mf);
MultiFaultManifest parse_multifault(std::string_view json_text);
MultiFaultManifest load_multifault(const std::filesystem::path& path);
void save_multifault(const std::filesystem::path& path, const MultiFaultManifest& mf);

struct MineOptions {
    unsigned jobs = 1;
    std::optional<double> threshold;
    /// Compare tracked lines against the trees and log mismatches.
    bool verify_locations = true;
};

/// Transplants every entry's tests as far back as they expose the fault and
/// translates its locations into each exposing version.
MultiFaultManifest mine(const history::ProjectManifest& pm, const history::VersionProvider& provider,
                        const MineOptions& options = {});

struct CheckoutBug {
    std::string bug_id;
    std::vector<std::string> test_ids;
};

struct CheckoutReport {
    std::string version_id;
    std::vector<CheckoutBug> bugs;
    /// Revalidation findings; empty when everything checked out.
    std::vector<std::string> problems;
    bool revalidated = false;
};

struct CheckoutOptions {
    bool revalidate = false;
    std::optional<double> threshold;
};

/// The version's tree with every bug's tests spliced in.
FileTree bundle_tree(const MultiFaultManifest& mf, const history::ProjectManifest& pm,
                     const history::VersionProvider& provider, std::string_view version_id,
                     std::vector<CheckoutBug>* bugs = nullptr);

/// Writes the bundle and one `bug.locations.<bugId>` file per bug into
/// `out_dir` (created; must be empty if it exists).
CheckoutReport multi_checkout(const MultiFaultManifest& mf, const history::ProjectManifest& pm,
                              const history::VersionProvider& provider, std::string_view version_id,
                              const std::filesystem::path& out_dir, const CheckoutOptions& options = {});

std::string location_file_name(std::string_view bug_id);
std::string location_file_content(std::vector<FaultLocation> locations);

struct VersionStats {
    std::string version_id;
    std::size_t bugs = 0;
    std::size_t transplanted_bugs = 0;
    std::size_t added_tests = 0;
    std::size_t loc = 0;
};

struct BugLifetime {
    std::string bug_id;
    std::string earliest_version;
    std::size_t versions = 0;
    double days = 0;
};

struct StatsReport {
    std::string project_name;
    std::size_t versions = 0;
    double mean_bugs_per_version = 0;
    /// Mean over versions of bugs / program lines; 0 without trees.
    double mean_bugs_per_loc = 0;
    double mean_added_tests_per_version = 0;
    /// Mean over versions holding transplanted bugs of added tests per such bug.
    double mean_tests_per_bug = 0;
    std::size_t drop_events = 0;
    std::size_t transplanted_identifications = 0;
    double drop_rate_percent = 0;
    std::vector<VersionStats> per_version;
    std::vector<BugLifetime> lifetimes;
};

/// `provider` may be null, in which case program sizes are not measured.
StatsReport stats(const MultiFaultManifest& mf, const history::ProjectManifest& pm,
                  const history::VersionProvider* provider = nullptr);

/// Non-test lines of code matching the project's source glob.
std::size_t program_size(const FileTree& tree, const history::ProjectManifest& pm);

enum class StatsTable { Summary, Versions, Bugs };

std::string stats_csv(const StatsReport& report, StatsTable table = StatsTable::Summary);
std::string stats_json(const StatsReport& report);

/// `project`, the project name, `version:<id>`, `bug:<id>` or a bare version
/// or bug id. Throws UnknownSelector.
std::string info(const MultiFaultManifest& mf, const history::ProjectManifest& pm, std::string_view selector);

}  // namespace mfmine::pipeline
