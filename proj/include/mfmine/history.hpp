#pragma once

#include "mfmine/diff.hpp"
#include "mfmine/file_tree.hpp"
#include "mfmine/location.hpp"
#include "mfmine/runner.hpp"
#include "mfmine/suite.hpp"
#include "mfmine/timestamp.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mfmine::history {

struct VersionRef {
    std::string version_id;
    std::string commit_id;
    Timestamp commit_date{};
    std::string label;

    friend bool operator==(const VersionRef&, const VersionRef&) = default;
};

/// The change turning `from_version` into the next version `to_version`.
struct DiffRef {
    std::string from_version;
    std::string to_version;
    diff::Diff payload;
};

/// A single-fault dataset entry: buggy and fixed versions, the tests that
/// expose the fault and its locations in the buggy version.
struct Entry {
    std::string entry_id;
    VersionRef buggy;
    VersionRef fixed;
    std::vector<std::string> trigger_tests;
    std::vector<FaultLocation> fault_locations;
    Timestamp fix_date{};
};

struct ProviderConfig {
    enum class Kind { Snapshot, Command };

    Kind kind = Kind::Snapshot;
    /// Snapshot: trees live in `<root>/<version_id>/`. Relative roots are
    /// resolved against the manifest directory.
    std::filesystem::path root = "versions";
    /// Command: run with {workdir} and {version_id} substituted.
    std::string checkout_template;
};

struct ProjectManifest {
    std::string project_name;
    std::vector<VersionRef> versions;  // commit-date order
    std::vector<DiffRef> diffs;        // diffs[i] links versions[i] -> versions[i+1]
    std::vector<Entry> entries;
    ProviderConfig provider;
    harness::RunnerConfig runner;
    transplant::ExtractorConfig extractor;
    /// Program-size files (test files are always excluded).
    std::string source_glob = "src/**";
    std::filesystem::path base_dir;

    const VersionRef& version(std::string_view version_id) const;
    std::size_t index_of(std::string_view version_id) const;
    const Entry& entry(std::string_view entry_id) const;
    bool has_version(std::string_view version_id) const;
};

struct LoadOptions {
    bool detect_renames = false;
};

/// Reads and validates a JSON manifest. Diff payloads are inline unified-diff
/// text (`payload`) or a file relative to the manifest (`payload_file`).
ProjectManifest load_manifest(const std::filesystem::path& path, const LoadOptions& options = {});

/// Same, from an already parsed document text.
ProjectManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir,
                               const LoadOptions& options = {});

/// Entries sorted by (fix_date, entry_id); each buggy label is rewritten to
/// its 1-based position in that order.
std::vector<Entry> order_entries(const ProjectManifest& manifest);

/// Diffs linking `from_version` to `to_version`, oldest first.
std::vector<DiffRef> interval_diff_chain(const ProjectManifest& manifest, std::string_view from_version,
                                         std::string_view to_version);

/// Materializes version trees.
class VersionProvider {
public:
    virtual ~VersionProvider() = default;

    virtual FileTree tree(const VersionRef& version) const = 0;

    /// Writes the version into `workdir` (caller-owned, created if needed).
    virtual void materialize(const VersionRef& version, const std::filesystem::path& workdir) const;
};

class SnapshotProvider : public VersionProvider {
public:
    explicit SnapshotProvider(std::filesystem::path root);
    FileTree tree(const VersionRef& version) const override;

private:
    std::filesystem::path root_;
};

class CommandProvider : public VersionProvider {
public:
    CommandProvider(std::string checkout_template, double timeout_seconds);
    FileTree tree(const VersionRef& version) const override;
    void materialize(const VersionRef& version, const std::filesystem::path& workdir) const override;

private:
    std::string template_;
    double timeout_seconds_;
};

/// In-memory trees keyed by version id.
class MemoryProvider : public VersionProvider {
public:
    MemoryProvider() = default;
    explicit MemoryProvider(std::map<std::string, FileTree> trees) : trees_(std::move(trees)) {}
    void put(std::string version_id, FileTree tree) { trees_[std::move(version_id)] = std::move(tree); }
    FileTree tree(const VersionRef& version) const override;

private:
    std::map<std::string, FileTree> trees_;
};

std::unique_ptr<VersionProvider> make_provider(const ProjectManifest& manifest);

struct ChainFailure {
    std::string from_version;
    std::string to_version;
    std::string reason;
};

/// Applies every stored diff to the provider's older tree and compares with
/// the newer tree byte for byte.
std::vector<ChainFailure> verify_chain(const ProjectManifest& manifest, const VersionProvider& provider);

}  // namespace mfmine::history
