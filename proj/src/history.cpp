#include "mfmine/history.hpp"

#include "mfmine/error.hpp"
#include "mfmine/process.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace mfmine::history {

namespace fs = std::filesystem;
using json = nlohmann::json;

const VersionRef& ProjectManifest::version(std::string_view version_id) const {
    return versions[index_of(version_id)];
}

std::size_t ProjectManifest::index_of(std::string_view version_id) const {
    for (std::size_t i = 0; i < versions.size(); ++i) {
        if (versions[i].version_id == version_id) {
            return i;
        }
    }
    throw UnknownVersion(std::string(version_id));
}

bool ProjectManifest::has_version(std::string_view version_id) const {
    return std::any_of(versions.begin(), versions.end(),
                       [&](const VersionRef& v) { return v.version_id == version_id; });
}

const Entry& ProjectManifest::entry(std::string_view entry_id) const {
    for (const auto& e : entries) {
        if (e.entry_id == entry_id) {
            return e;
        }
    }
    throw DanglingRef("unknown entry '" + std::string(entry_id) + "'");
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw MalformedManifest(where + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string()) {
        throw MalformedManifest(where + ": field '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key, std::string fallback = {}) {
    if (obj.is_object() && obj.contains(key) && obj.at(key).is_string()) {
        return obj.at(key).get<std::string>();
    }
    return fallback;
}

Timestamp require_timestamp(const json& obj, const char* key, const std::string& where) {
    const auto text = require_string(obj, key, where);
    try {
        return parse_timestamp(text);
    } catch (const std::invalid_argument& e) {
        throw MalformedManifest(where + ": " + e.what());
    }
}

std::vector<std::string> string_list(const json& v, const std::string& where) {
    if (!v.is_array()) {
        throw MalformedManifest(where + " must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) {
            throw MalformedManifest(where + " must be an array of strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

harness::RunnerConfig parse_runner(const json& j) {
    harness::RunnerConfig cfg;
    if (j.is_null()) {
        return cfg;
    }
    if (!j.is_object()) {
        throw MalformedManifest("runner must be an object");
    }
    const auto kind = optional_string(j, "kind", "builtin");
    if (kind == "builtin") {
        cfg.kind = harness::RunnerKind::Builtin;
    } else if (kind == "command") {
        cfg.kind = harness::RunnerKind::Command;
    } else {
        throw MalformedManifest("runner.kind must be 'builtin' or 'command'");
    }
    cfg.checkout_template = optional_string(j, "checkout");
    cfg.build_template = optional_string(j, "build");
    cfg.run_test_template = optional_string(j, "run_test");
    cfg.test_glob = optional_string(j, "test_glob", cfg.test_glob);
    cfg.source_glob = optional_string(j, "source_glob", cfg.source_glob);
    try {
        if (j.contains("timeout")) {
            cfg.timeout_seconds = j.at("timeout").get<double>();
        }
        if (j.contains("max_parallel")) {
            cfg.max_parallel = j.at("max_parallel").get<unsigned>();
        }
        if (j.contains("threshold")) {
            cfg.threshold = j.at("threshold").get<double>();
        }
        if (j.contains("env")) {
            cfg.env = j.at("env").get<std::map<std::string, std::string>>();
        }
        if (j.contains("scrub_patterns")) {
            cfg.scrub.clear();
            for (const auto& p : j.at("scrub_patterns")) {
                cfg.scrub.push_back({p.at("pattern").get<std::string>(), p.value("replacement", std::string())});
            }
        }
        harness::validate(cfg);
    } catch (const json::exception& e) {
        throw MalformedManifest(std::string("runner: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw MalformedManifest(std::string("runner: ") + e.what());
    }
    return cfg;
}

transplant::ExtractorConfig parse_extractor(const json& j) {
    transplant::ExtractorConfig cfg;
    if (j.is_null()) {
        return cfg;
    }
    const auto kind = optional_string(j, "kind", "annotation");
    if (kind == "annotation") {
        cfg.kind = transplant::ExtractorConfig::Kind::Annotation;
    } else if (kind == "regex") {
        cfg.kind = transplant::ExtractorConfig::Kind::Regex;
    } else {
        throw MalformedManifest("extractor.kind must be 'annotation' or 'regex'");
    }
    cfg.glob = optional_string(j, "glob", cfg.glob);
    if (j.contains("rules")) {
        for (const auto& r : j.at("rules")) {
            transplant::RegexRule rule;
            rule.pattern = require_string(r, "pattern", "extractor rule");
            try {
                rule.kind = transplant::parse_unit_kind(require_string(r, "kind", "extractor rule"));
            } catch (const std::invalid_argument& e) {
                throw MalformedManifest(std::string("extractor rule: ") + e.what());
            }
            cfg.rules.push_back(std::move(rule));
        }
    }
    return cfg;
}

ProviderConfig parse_provider(const json& j) {
    ProviderConfig cfg;
    if (j.is_null()) {
        return cfg;
    }
    const auto kind = optional_string(j, "kind", "snapshot");
    if (kind == "snapshot") {
        cfg.kind = ProviderConfig::Kind::Snapshot;
        cfg.root = optional_string(j, "root", "versions");
    } else if (kind == "command") {
        cfg.kind = ProviderConfig::Kind::Command;
        cfg.checkout_template = require_string(j, "checkout", "provider");
    } else {
        throw MalformedManifest("provider.kind must be 'snapshot' or 'command'");
    }
    return cfg;
}

std::string version_id_of(const json& v, const std::string& where) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_object()) {
        return require_string(v, "version_id", where);
    }
    throw MalformedManifest(where + " must be a version id or a version object");
}

}  // namespace

ProjectManifest parse_manifest(std::string_view json_text, const fs::path& base_dir, const LoadOptions& options) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw MalformedManifest(std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw MalformedManifest("manifest must be a JSON object");
    }

    ProjectManifest pm;
    pm.base_dir = base_dir;
    pm.project_name = require_string(doc, "project_name", "manifest");
    pm.source_glob = optional_string(doc, "source_glob", pm.source_glob);

    // versions
    const auto& versions = require(doc, "versions", "manifest");
    if (!versions.is_array() || versions.empty()) {
        throw MalformedManifest("versions must be a non-empty array");
    }
    std::map<std::string, std::vector<std::string>> parents;
    std::set<std::string> ids;
    for (const auto& v : versions) {
        VersionRef ref;
        ref.version_id = require_string(v, "version_id", "version");
        const std::string where = "version '" + ref.version_id + "'";
        ref.commit_id = optional_string(v, "commit_id", ref.version_id);
        ref.commit_date = require_timestamp(v, "commit_date", where);
        ref.label = optional_string(v, "label", ref.version_id);
        if (!ids.insert(ref.version_id).second) {
            throw MalformedManifest("duplicate version id '" + ref.version_id + "'");
        }
        if (v.contains("parents")) {
            parents[ref.version_id] = string_list(v.at("parents"), where + ".parents");
        }
        pm.versions.push_back(std::move(ref));
    }
    std::sort(pm.versions.begin(), pm.versions.end(), [](const VersionRef& a, const VersionRef& b) {
        return a.commit_date != b.commit_date ? a.commit_date < b.commit_date : a.version_id < b.version_id;
    });
    for (std::size_t i = 0; i < pm.versions.size(); ++i) {
        const auto it = parents.find(pm.versions[i].version_id);
        if (it == parents.end()) {
            continue;
        }
        const auto& ps = it->second;
        if (ps.size() > 1) {
            throw BranchingUnsupported("version '" + pm.versions[i].version_id + "' is a merge of " +
                                       std::to_string(ps.size()) + " parents");
        }
        const std::string expected = i > 0 ? pm.versions[i - 1].version_id : std::string();
        if ((ps.empty() && i > 0) || (!ps.empty() && ps.front() != expected)) {
            throw BranchingUnsupported("version '" + pm.versions[i].version_id +
                                       "' does not descend from its predecessor in commit order");
        }
    }

    // diffs
    const diff::ParseOptions parse_options{options.detect_renames};
    std::map<std::string, DiffRef> by_from;
    if (doc.contains("diffs")) {
        const auto& diffs = doc.at("diffs");
        if (!diffs.is_array()) {
            throw MalformedManifest("diffs must be an array");
        }
        for (const auto& d : diffs) {
            DiffRef ref;
            ref.from_version = require_string(d, "from_version", "diff");
            ref.to_version = require_string(d, "to_version", "diff");
            const std::string where = "diff " + ref.from_version + "->" + ref.to_version;
            if (!ids.contains(ref.from_version) || !ids.contains(ref.to_version)) {
                throw DanglingRef(where + " references an unknown version");
            }
            std::string text;
            if (d.contains("payload")) {
                text = require_string(d, "payload", where);
            } else if (d.contains("payload_file")) {
                const auto file = base_dir / require_string(d, "payload_file", where);
                try {
                    text = read_file(file);
                } catch (const Error& e) {
                    throw MalformedManifest(where + ": " + e.what());
                }
            } else {
                throw MalformedManifest(where + ": needs 'payload' or 'payload_file'");
            }
            try {
                ref.payload = diff::parse_unified(text, parse_options);
            } catch (const DiffSyntax& e) {
                throw MalformedManifest(where + ": " + e.what());
            } catch (const HunkMismatch& e) {
                throw MalformedManifest(where + ": " + e.what());
            }
            if (by_from.contains(ref.from_version)) {
                throw BranchingUnsupported("two diffs leave version '" + ref.from_version + "'");
            }
            by_from.emplace(ref.from_version, std::move(ref));
        }
    }
    for (std::size_t i = 0; i + 1 < pm.versions.size(); ++i) {
        const auto& from = pm.versions[i].version_id;
        const auto& to = pm.versions[i + 1].version_id;
        const auto it = by_from.find(from);
        if (it == by_from.end() || it->second.to_version != to) {
            throw BrokenChain("no diff links consecutive versions '" + from + "' -> '" + to + "'");
        }
        pm.diffs.push_back(std::move(it->second));
        by_from.erase(it);
    }
    if (!by_from.empty()) {
        const auto& d = by_from.begin()->second;
        throw BrokenChain("diff " + d.from_version + "->" + d.to_version + " does not link consecutive versions");
    }

    // entries
    if (doc.contains("entries")) {
        const auto& entries = doc.at("entries");
        if (!entries.is_array()) {
            throw MalformedManifest("entries must be an array");
        }
        std::set<std::string> entry_ids;
        for (const auto& e : entries) {
            Entry entry;
            entry.entry_id = require_string(e, "entry_id", "entry");
            const std::string where = "entry '" + entry.entry_id + "'";
            if (!entry_ids.insert(entry.entry_id).second) {
                throw MalformedManifest("duplicate entry id '" + entry.entry_id + "'");
            }
            const auto buggy = version_id_of(require(e, "buggy", where), where + ".buggy");
            const auto fixed = version_id_of(require(e, "fixed", where), where + ".fixed");
            if (!ids.contains(buggy)) {
                throw DanglingRef(where + " references unknown buggy version '" + buggy + "'");
            }
            if (!ids.contains(fixed)) {
                throw DanglingRef(where + " references unknown fixed version '" + fixed + "'");
            }
            entry.buggy = pm.version(buggy);
            entry.fixed = pm.version(fixed);
            if (pm.index_of(buggy) >= pm.index_of(fixed)) {
                throw MalformedManifest(where + ": buggy version must precede the fixed version");
            }
            entry.trigger_tests = string_list(require(e, "trigger_tests", where), where + ".trigger_tests");
            if (entry.trigger_tests.empty()) {
                throw MalformedManifest(where + ": trigger_tests must not be empty");
            }
            const auto& locs = require(e, "fault_locations", where);
            if (!locs.is_array() || locs.empty()) {
                throw MalformedManifest(where + ": fault_locations must be a non-empty array");
            }
            for (const auto& l : locs) {
                FaultLocation loc;
                if (l.is_string()) {
                    try {
                        loc = parse_location(l.get<std::string>());
                    } catch (const std::invalid_argument& ex) {
                        throw MalformedManifest(where + ": " + ex.what());
                    }
                } else {
                    loc.path = require_string(l, "path", where + ".fault_locations");
                    const auto& line = require(l, "line", where + ".fault_locations");
                    if (!line.is_number_integer() || line.get<long long>() < 1) {
                        throw MalformedManifest(where + ": fault location line must be a positive integer");
                    }
                    loc.line = line.get<std::size_t>();
                }
                if (!is_valid(loc)) {
                    throw MalformedManifest(where + ": invalid fault location '" + to_string(loc) + "'");
                }
                entry.fault_locations.push_back(std::move(loc));
            }
            entry.fix_date = e.contains("fix_date") ? require_timestamp(e, "fix_date", where) : entry.fixed.commit_date;
            for (const auto& other : pm.entries) {
                if (other.buggy.version_id == entry.buggy.version_id) {
                    throw MalformedManifest(where + ": entry '" + other.entry_id + "' has the same buggy version");
                }
            }
            pm.entries.push_back(std::move(entry));
        }
    }

    pm.provider = parse_provider(doc.value("provider", json()));
    pm.runner = parse_runner(doc.value("runner", json()));
    pm.extractor = parse_extractor(doc.value("extractor", json()));
    return pm;
}

ProjectManifest load_manifest(const fs::path& path, const LoadOptions& options) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw MalformedManifest(e.what());
    }
    return parse_manifest(text, path.parent_path(), options);
}

std::vector<Entry> order_entries(const ProjectManifest& manifest) {
    std::vector<Entry> out = manifest.entries;
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
        return a.fix_date != b.fix_date ? a.fix_date < b.fix_date : a.entry_id < b.entry_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].buggy.label = std::to_string(i + 1);
    }
    return out;
}

std::vector<DiffRef> interval_diff_chain(const ProjectManifest& manifest, std::string_view from_version,
                                         std::string_view to_version) {
    const auto from = manifest.index_of(from_version);
    const auto to = manifest.index_of(to_version);
    if (from > to) {
        throw ReversedInterval("version '" + std::string(from_version) + "' is later than '" +
                               std::string(to_version) + "'");
    }
    return {manifest.diffs.begin() + static_cast<std::ptrdiff_t>(from),
            manifest.diffs.begin() + static_cast<std::ptrdiff_t>(to)};
}

// ---------------------------------------------------------------------------
// providers

void VersionProvider::materialize(const VersionRef& version, const fs::path& workdir) const {
    write_tree(workdir, tree(version));
}

SnapshotProvider::SnapshotProvider(fs::path root) : root_(std::move(root)) {}

FileTree SnapshotProvider::tree(const VersionRef& version) const {
    const auto dir = root_ / version.version_id;
    if (!fs::is_directory(dir)) {
        throw WorkspaceFailure("no snapshot for version '" + version.version_id + "' under " + root_.string());
    }
    return read_tree(dir);
}

CommandProvider::CommandProvider(std::string checkout_template, double timeout_seconds)
    : template_(std::move(checkout_template)), timeout_seconds_(timeout_seconds) {}

void CommandProvider::materialize(const VersionRef& version, const fs::path& workdir) const {
    fs::create_directories(workdir);
    const auto cmd = substitute(template_, {{"workdir", fs::absolute(workdir).string()},
                                            {"version_id", version.version_id},
                                            {"commit_id", version.commit_id}});
    ProcessResult res;
    try {
        res = run_shell(cmd, workdir, {}, timeout_seconds_);
    } catch (const HarnessFailure& e) {
        throw WorkspaceFailure(e.what());
    }
    if (res.timed_out || res.exit_code != 0) {
        throw WorkspaceFailure("checkout of '" + version.version_id + "' failed (exit " +
                               std::to_string(res.exit_code) + "): " + res.output);
    }
}

FileTree CommandProvider::tree(const VersionRef& version) const {
    TempDir dir("mfmine-checkout");
    materialize(version, dir.path());
    return read_tree(dir.path());
}

FileTree MemoryProvider::tree(const VersionRef& version) const {
    const auto it = trees_.find(version.version_id);
    if (it == trees_.end()) {
        throw WorkspaceFailure("no tree for version '" + version.version_id + "'");
    }
    return it->second;
}

std::unique_ptr<VersionProvider> make_provider(const ProjectManifest& manifest) {
    if (manifest.provider.kind == ProviderConfig::Kind::Command) {
        auto templ = manifest.provider.checkout_template.empty() ? manifest.runner.checkout_template
                                                                 : manifest.provider.checkout_template;
        return std::make_unique<CommandProvider>(std::move(templ), manifest.runner.timeout_seconds);
    }
    auto root = manifest.provider.root;
    if (root.is_relative()) {
        root = manifest.base_dir / root;
    }
    return std::make_unique<SnapshotProvider>(std::move(root));
}

std::vector<ChainFailure> verify_chain(const ProjectManifest& manifest, const VersionProvider& provider) {
    std::vector<ChainFailure> failures;
    if (manifest.versions.empty()) {
        return failures;
    }
    FileTree older = provider.tree(manifest.versions.front());
    for (std::size_t i = 0; i < manifest.diffs.size(); ++i) {
        const auto& d = manifest.diffs[i];
        FileTree newer = provider.tree(manifest.versions[i + 1]);
        try {
            const auto produced = diff::apply(d.payload, older);
            if (produced != newer) {
                std::string reason = "applied diff does not reproduce the newer tree";
                for (const auto& [path, content] : newer) {
                    const auto it = produced.find(path);
                    if (it == produced.end() || it->second != content) {
                        reason += " (first difference: " + path + ")";
                        break;
                    }
                }
                failures.push_back({d.from_version, d.to_version, reason});
            }
        } catch (const Error& e) {
            failures.push_back({d.from_version, d.to_version, e.what()});
        }
        older = std::move(newer);
    }
    return failures;
}

}  // namespace mfmine::history
