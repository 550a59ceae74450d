#include "mfmine/pipeline.hpp"

#include "mfmine/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace mfmine::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using history::Entry;
using history::ProjectManifest;
using history::VersionProvider;

const BugRecord* MultiFaultEntry::find(std::string_view bug_id) const {
    for (const auto& b : bugs) {
        if (b.bug_id == bug_id) {
            return &b;
        }
    }
    return nullptr;
}

const MultiFaultEntry* MultiFaultManifest::find(std::string_view version_id) const {
    for (const auto& e : entries) {
        if (e.target_version == version_id) {
            return &e;
        }
    }
    return nullptr;
}

bool MultiFaultManifest::partial_failure() const {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::Error; });
}

bool same_content(const MultiFaultManifest& a, const MultiFaultManifest& b) {
    return a.schema_version == b.schema_version && a.tool_version == b.tool_version &&
           a.project_name == b.project_name && a.threshold == b.threshold && a.entries == b.entries &&
           a.drop_events == b.drop_events && a.transplants == b.transplants && a.diagnostics == b.diagnostics;
}

TransplantLog to_log(const transplant::TransplantRecord& r, const harness::RunnerConfig& runner) {
    TransplantLog log;
    log.bug_id = r.bug_id;
    log.target_entry_id = r.target_entry_id;
    log.source_version = r.source_version;
    log.target_version = r.target_version;
    log.units_copied = r.units_copied;
    log.splice_report = r.splice_report;
    log.splice_diff = diff::render_unified(r.splice_edits);
    log.test_ids = r.test_ids;
    log.exposed = r.exposed;
    if (!r.exposed) {
        log.reason = r.reason;
    }
    for (std::size_t i = 0; i < r.source_outcomes.size() && i < r.target_outcomes.size(); ++i) {
        log.source_status.push_back(r.source_outcomes[i].status);
        log.target_status.push_back(r.target_outcomes[i].status);
        log.similarity.push_back(harness::similarity(r.source_outcomes[i].output, r.target_outcomes[i].output,
                                                     runner.scrub));
    }
    return log;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::string_view severity_name(Diagnostic::Severity s) {
    return s == Diagnostic::Severity::Error ? "error" : "warning";
}

json locations_json(const std::vector<FaultLocation>& locs) {
    json out = json::array();
    for (const auto& l : locs) {
        out.push_back(to_string(l));
    }
    return out;
}

std::vector<FaultLocation> locations_from(const json& j) {
    std::vector<FaultLocation> out;
    for (const auto& s : j) {
        out.push_back(parse_location(s.get<std::string>()));
    }
    return out;
}

template <class T>
T enum_from(const json& j, T (*parse)(std::string_view)) {
    return parse(j.get<std::string>());
}

}  // namespace

std::string to_json(const MultiFaultManifest& mf) {
    json doc;
    doc["schema_version"] = mf.schema_version;
    doc["tool_version"] = mf.tool_version;
    doc["project_name"] = mf.project_name;
    doc["created"] = format_timestamp(mf.created);
    doc["threshold"] = mf.threshold;
    json entries = json::array();
    for (const auto& e : mf.entries) {
        json bugs = json::array();
        for (const auto& b : e.bugs) {
            bugs.push_back({{"bug_id", b.bug_id},
                            {"source_entry_id", b.source_entry_id},
                            {"transplanted_unit_ids", b.transplanted_unit_ids},
                            {"test_ids", b.test_ids},
                            {"locations", locations_json(b.locations)}});
        }
        entries.push_back({{"target_version", e.target_version}, {"native_bug_id", e.native_bug_id}, {"bugs", bugs}});
    }
    doc["entries"] = std::move(entries);
    json drops = json::array();
    for (const auto& d : mf.drop_events) {
        json locs = json::array();
        for (const auto& l : d.drops) {
            locs.push_back({{"location", to_string(l.origin)},
                            {"dropped_at", l.dropped_at},
                            {"reason", std::string(locate::to_string(l.reason))}});
        }
        drops.push_back(
            {{"bug_id", d.bug_id}, {"target_version", d.target_version}, {"stage", d.stage}, {"locations", locs}});
    }
    doc["drop_events"] = std::move(drops);
    json transplants = json::array();
    for (const auto& t : mf.transplants) {
        json report = json::array();
        for (const auto& a : t.splice_report) {
            report.push_back(
                {{"unit_id", a.unit_id}, {"action", std::string(transplant::to_string(a.action))}, {"final_id", a.final_id}});
        }
        json runs = json::array();
        for (std::size_t i = 0; i < t.source_status.size(); ++i) {
            runs.push_back({{"test_id", i < t.test_ids.size() ? t.test_ids[i] : std::string()},
                            {"source_status", std::string(harness::to_string(t.source_status[i]))},
                            {"target_status", std::string(harness::to_string(t.target_status[i]))},
                            {"similarity", t.similarity[i]}});
        }
        json rec = {{"bug_id", t.bug_id},
                    {"target_entry_id", t.target_entry_id},
                    {"source_version", t.source_version},
                    {"target_version", t.target_version},
                    {"outcome", t.exposed ? "Exposed" : "NotExposed"}};
        if (t.reason) {
            rec["reason"] = std::string(transplant::to_string(*t.reason));
        }
        rec["units_copied"] = t.units_copied;
        rec["test_ids"] = t.test_ids;
        rec["runs"] = std::move(runs);
        rec["splice_report"] = std::move(report);
        rec["splice_diff"] = t.splice_diff;
        transplants.push_back(std::move(rec));
    }
    doc["transplants"] = std::move(transplants);
    json diags = json::array();
    for (const auto& d : mf.diagnostics) {
        diags.push_back(
            {{"entry_id", d.entry_id}, {"severity", std::string(severity_name(d.severity))}, {"message", d.message}});
    }
    doc["diagnostics"] = std::move(diags);
    return doc.dump(2) + "\n";
}

MultiFaultManifest parse_multifault(std::string_view json_text) {
    MultiFaultManifest mf;
    try {
        const auto doc = json::parse(json_text);
        mf.schema_version = doc.at("schema_version").get<int>();
        if (mf.schema_version != kSchemaVersion) {
            throw MalformedManifest("unsupported schema_version " + std::to_string(mf.schema_version));
        }
        mf.tool_version = doc.at("tool_version").get<std::string>();
        mf.project_name = doc.at("project_name").get<std::string>();
        mf.created = parse_timestamp(doc.at("created").get<std::string>());
        mf.threshold = doc.value("threshold", harness::kDefaultThreshold);
        for (const auto& e : doc.at("entries")) {
            MultiFaultEntry entry;
            entry.target_version = e.at("target_version").get<std::string>();
            entry.native_bug_id = e.at("native_bug_id").get<std::string>();
            for (const auto& b : e.at("bugs")) {
                entry.bugs.push_back({b.at("bug_id").get<std::string>(), b.at("source_entry_id").get<std::string>(),
                                      b.at("transplanted_unit_ids").get<std::vector<std::string>>(),
                                      b.at("test_ids").get<std::vector<std::string>>(),
                                      locations_from(b.at("locations"))});
            }
            mf.entries.push_back(std::move(entry));
        }
        for (const auto& d : doc.at("drop_events")) {
            DropEvent ev;
            ev.bug_id = d.at("bug_id").get<std::string>();
            ev.target_version = d.at("target_version").get<std::string>();
            ev.stage = d.at("stage").get<std::string>();
            for (const auto& l : d.value("locations", json::array())) {
                ev.drops.push_back({parse_location(l.at("location").get<std::string>()),
                                    l.at("dropped_at").get<std::string>(),
                                    enum_from(l.at("reason"), &locate::parse_drop_reason)});
            }
            mf.drop_events.push_back(std::move(ev));
        }
        for (const auto& t : doc.at("transplants")) {
            TransplantLog log;
            log.bug_id = t.at("bug_id").get<std::string>();
            log.target_entry_id = t.at("target_entry_id").get<std::string>();
            log.source_version = t.at("source_version").get<std::string>();
            log.target_version = t.at("target_version").get<std::string>();
            log.exposed = t.at("outcome").get<std::string>() == "Exposed";
            if (t.contains("reason")) {
                log.reason = enum_from(t.at("reason"), &transplant::parse_not_exposed_reason);
            }
            log.units_copied = t.at("units_copied").get<std::vector<std::string>>();
            log.test_ids = t.at("test_ids").get<std::vector<std::string>>();
            for (const auto& r : t.at("runs")) {
                log.source_status.push_back(enum_from(r.at("source_status"), &harness::parse_status));
                log.target_status.push_back(enum_from(r.at("target_status"), &harness::parse_status));
                log.similarity.push_back(r.at("similarity").get<double>());
            }
            for (const auto& a : t.at("splice_report")) {
                const auto action = a.at("action").get<std::string>();
                transplant::SpliceAction sa{a.at("unit_id").get<std::string>(), {}, a.at("final_id").get<std::string>()};
                if (action == "Inserted") {
                    sa.action = transplant::SpliceActionKind::Inserted;
                } else if (action == "ReusedIdentical") {
                    sa.action = transplant::SpliceActionKind::ReusedIdentical;
                } else if (action == "RenamedOnCollision") {
                    sa.action = transplant::SpliceActionKind::RenamedOnCollision;
                } else {
                    throw MalformedManifest("unknown splice action '" + action + "'");
                }
                log.splice_report.push_back(std::move(sa));
            }
            log.splice_diff = t.at("splice_diff").get<std::string>();
            mf.transplants.push_back(std::move(log));
        }
        for (const auto& d : doc.at("diagnostics")) {
            const auto sev = d.at("severity").get<std::string>();
            mf.diagnostics.push_back({d.at("entry_id").get<std::string>(),
                                      sev == "error" ? Diagnostic::Severity::Error : Diagnostic::Severity::Warning,
                                      d.at("message").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw MalformedManifest(std::string("multi-fault manifest: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw MalformedManifest(std::string("multi-fault manifest: ") + e.what());
    }
    return mf;
}

MultiFaultManifest load_multifault(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw MalformedManifest(e.what());
    }
    return parse_multifault(text);
}

void save_multifault(const fs::path& path, const MultiFaultManifest& mf) {
    write_file_atomic(path, to_json(mf));
}

// ---------------------------------------------------------------------------
// mining

namespace {

/// Version trees loaded on demand; safe to share between threads.
class TreeCache {
public:
    explicit TreeCache(const VersionProvider& provider) : provider_(provider) {}

    const FileTree& get(const history::VersionRef& v) {
        {
            std::lock_guard lock(mutex_);
            if (const auto it = trees_.find(v.version_id); it != trees_.end()) {
                return it->second;
            }
        }
        auto tree = provider_.tree(v);
        std::lock_guard lock(mutex_);
        return trees_.try_emplace(v.version_id, std::move(tree)).first->second;
    }

private:
    const VersionProvider& provider_;
    std::mutex mutex_;
    std::map<std::string, FileTree> trees_;
};

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
    const auto workers = std::min<std::size_t>(std::max(1U, jobs), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                body(i);
            }
        });
    }
}

harness::RunnerConfig runner_for(const ProjectManifest& pm, std::optional<double> threshold) {
    auto runner = pm.runner;
    if (threshold) {
        runner.threshold = *threshold;
    }
    return runner;
}

}  // namespace

MultiFaultManifest mine(const ProjectManifest& pm, const VersionProvider& provider, const MineOptions& options) {
    const auto runner = runner_for(pm, options.threshold);
    const harness::Harness harness(runner);
    const transplant::TransplantContext ctx{provider, harness, pm.extractor};
    const auto ordered = history::order_entries(pm);

    std::vector<transplant::ChainResult> chains(ordered.size());
    std::vector<std::optional<std::string>> failures(ordered.size());
    parallel_for(ordered.size(), options.jobs, [&](std::size_t k) {
        const std::vector<Entry> earlier(ordered.rbegin() + static_cast<std::ptrdiff_t>(ordered.size() - k),
                                         ordered.rend());
        try {
            chains[k] = transplant::transplant_chain(ordered[k], earlier, ctx);
        } catch (const Error& e) {
            failures[k] = e.what();
        }
    });

    MultiFaultManifest mf;
    mf.project_name = pm.project_name;
    mf.created = now_utc();
    mf.threshold = runner.threshold;
    std::map<std::string, std::size_t> slot;
    for (const auto& e : ordered) {
        slot[e.buggy.version_id] = mf.entries.size();
        mf.entries.push_back({e.buggy.version_id, e.entry_id, {{e.entry_id, e.entry_id, {}, e.trigger_tests, e.fault_locations}}});
    }

    TreeCache trees(provider);
    for (std::size_t k = 0; k < ordered.size(); ++k) {
        const auto& e = ordered[k];
        const auto fail = [&](Diagnostic::Severity sev, std::string msg) {
            mf.diagnostics.push_back({e.entry_id, sev, std::move(msg)});
        };
        if (failures[k]) {
            fail(Diagnostic::Severity::Error, *failures[k]);
        }
        if (chains[k].workspace_failure) {
            fail(Diagnostic::Severity::Error, *chains[k].workspace_failure);
        }
        for (const auto& rec : chains[k].records) {
            if (&rec == &chains[k].records.front()) {
                for (const auto& o : rec.source_outcomes) {
                    if (!harness::is_failing(o.status)) {
                        fail(Diagnostic::Severity::Warning,
                             "trigger test '" + o.test_id + "' passes in its own buggy version " + e.buggy.version_id);
                    }
                }
            }
            mf.transplants.push_back(to_log(rec, runner));
            if (!rec.exposed) {
                continue;
            }
            try {
                const auto chain = history::interval_diff_chain(pm, rec.target_version, e.buggy.version_id);
                const auto tr = locate::translate(e, rec.target_version, chain);
                if (!tr.identified) {
                    DropEvent ev{e.entry_id, rec.target_version, "TranslationFailed", {}};
                    for (const auto& l : tr.locations) {
                        ev.drops.push_back({l.origin, l.dropped_at, l.reason});
                    }
                    mf.drop_events.push_back(std::move(ev));
                    continue;
                }
                if (options.verify_locations) {
                    const auto& target_ref = pm.version(rec.target_version);
                    for (const auto& m : locate::verify_translation(tr, trees.get(e.buggy), trees.get(target_ref))) {
                        fail(Diagnostic::Severity::Warning,
                             "translated line differs: " + m.describe(e.buggy.version_id, rec.target_version));
                    }
                }
                auto& entry = mf.entries[slot.at(rec.target_version)];
                entry.bugs.push_back({e.entry_id, e.entry_id, rec.units_copied, rec.test_ids, tr.active_locations()});
            } catch (const Error& ex) {
                fail(Diagnostic::Severity::Error, "translation to " + rec.target_version + " failed: " + ex.what());
            }
        }
    }
    return mf;
}

// ---------------------------------------------------------------------------
// checkout

std::string location_file_name(std::string_view bug_id) {
    return "bug.locations." + std::string(bug_id);
}

std::string location_file_content(std::vector<FaultLocation> locations) {
    std::sort(locations.begin(), locations.end());
    locations.erase(std::unique(locations.begin(), locations.end()), locations.end());
    std::string out;
    for (const auto& l : locations) {
        out += to_string(l);
        out += '\n';
    }
    return out;
}

namespace {

const Entry& source_entry(const ProjectManifest& pm, const std::string& entry_id) {
    try {
        return pm.entry(entry_id);
    } catch (const DanglingRef&) {
        throw ManifestMismatch("bug '" + entry_id + "' is not an entry of project '" + pm.project_name + "'");
    }
}

const MultiFaultEntry& require_entry(const MultiFaultManifest& mf, const ProjectManifest& pm,
                                     std::string_view version_id) {
    const auto* entry = mf.find(version_id);
    if (entry == nullptr) {
        throw UnknownVersion(std::string(version_id));
    }
    if (!pm.has_version(version_id)) {
        throw ManifestMismatch("version '" + std::string(version_id) + "' is not in project '" + pm.project_name +
                               "'");
    }
    return *entry;
}

}  // namespace

FileTree bundle_tree(const MultiFaultManifest& mf, const ProjectManifest& pm, const VersionProvider& provider,
                     std::string_view version_id, std::vector<CheckoutBug>* bugs) {
    const auto& entry = require_entry(mf, pm, version_id);
    FileTree tree = provider.tree(pm.version(version_id));
    for (const auto& bug : entry.bugs) {
        const auto& se = source_entry(pm, bug.source_entry_id);
        if (bug.bug_id == entry.native_bug_id) {
            if (bugs) {
                bugs->push_back({bug.bug_id, se.trigger_tests});
            }
            continue;
        }
        const auto source_tree = provider.tree(se.buggy);
        const auto closure =
            transplant::extract_closure(transplant::build_suite_model(source_tree, pm.extractor), se.trigger_tests);
        auto spliced = transplant::splice(tree, transplant::build_suite_model(tree, pm.extractor), closure, bug.bug_id);
        tree = std::move(spliced.tree);
        if (bugs) {
            CheckoutBug cb{bug.bug_id, {}};
            for (const auto& t : se.trigger_tests) {
                cb.test_ids.push_back(spliced.final_id(t));
            }
            bugs->push_back(std::move(cb));
        }
    }
    return tree;
}

CheckoutReport multi_checkout(const MultiFaultManifest& mf, const ProjectManifest& pm, const VersionProvider& provider,
                              std::string_view version_id, const fs::path& out_dir, const CheckoutOptions& options) {
    const auto& entry = require_entry(mf, pm, version_id);
    if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
        throw WorkspaceFailure("checkout directory " + out_dir.string() + " is not empty");
    }
    CheckoutReport report;
    report.version_id = std::string(version_id);
    const auto tree = bundle_tree(mf, pm, provider, version_id, &report.bugs);
    fs::create_directories(out_dir);
    write_tree(out_dir, tree);
    for (const auto& bug : entry.bugs) {
        write_file(out_dir / location_file_name(bug.bug_id), location_file_content(bug.locations));
    }
    if (!options.revalidate) {
        return report;
    }

    report.revalidated = true;
    auto& problems = report.problems;
    const auto runner = runner_for(pm, options.threshold ? options.threshold : std::optional<double>(mf.threshold));
    const harness::Harness harness(runner);
    const auto& version = pm.version(version_id);
    const auto pristine = provider.tree(version);

    // Program files untouched, on disk as in memory.
    const auto is_test = [&](const std::string& path) { return glob_match(pm.extractor.glob, path); };
    for (const auto& [path, content] : pristine) {
        if (!is_test(path) && (!tree.contains(path) || tree.at(path) != content)) {
            problems.push_back("program file " + path + " differs from the provider snapshot");
        }
    }
    for (const auto& [path, content] : tree) {
        if (!is_test(path) && !pristine.contains(path)) {
            problems.push_back("program file " + path + " is not in the provider snapshot");
        }
    }
    auto on_disk = read_tree(out_dir);
    std::erase_if(on_disk, [](const auto& kv) { return kv.first.starts_with("bug.locations."); });
    if (on_disk != tree) {
        problems.push_back("files written to " + out_dir.string() + " differ from the bundle");
    }

    for (std::size_t i = 0; i < entry.bugs.size(); ++i) {
        const auto& bug = entry.bugs[i];
        const auto& cb = report.bugs[i];
        const auto& se = source_entry(pm, bug.source_entry_id);
        const auto source_tree = provider.tree(se.buggy);
        const auto before = harness.run(source_tree, se.trigger_tests, se.buggy.version_id);
        const auto after = harness.run(tree, cb.test_ids, version.version_id);
        for (std::size_t t = 0; t < before.size(); ++t) {
            if (!harness::same_failure(before[t], after[t], runner.threshold, runner.scrub)) {
                problems.push_back(bug.bug_id + ": test " + cb.test_ids[t] + " is " +
                                   std::string(harness::to_string(after[t].status)) + " here but " +
                                   std::string(harness::to_string(before[t].status)) + " in " + se.buggy.version_id +
                                   " (similarity " + std::to_string(harness::similarity(before[t].output,
                                                                                        after[t].output, runner.scrub)) +
                                   ")");
            }
        }
        try {
            const auto tr =
                locate::translate(se, version_id, history::interval_diff_chain(pm, version_id, se.buggy.version_id));
            if (tr.active_locations() != bug.locations) {
                problems.push_back(bug.bug_id + ": recorded locations disagree with a fresh translation");
            }
            for (const auto& m : locate::verify_translation(tr, source_tree, pristine)) {
                problems.push_back(bug.bug_id + ": " + m.describe(se.buggy.version_id, version_id));
            }
        } catch (const Error& e) {
            problems.push_back(bug.bug_id + ": " + e.what());
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// statistics

std::size_t program_size(const FileTree& tree, const ProjectManifest& pm) {
    std::size_t n = 0;
    for (const auto& [path, content] : tree) {
        if (glob_match(pm.source_glob, path) && !glob_match(pm.extractor.glob, path)) {
            n += count_lines(content);
        }
    }
    return n;
}

StatsReport stats(const MultiFaultManifest& mf, const ProjectManifest& pm, const VersionProvider* provider) {
    StatsReport r;
    r.project_name = mf.project_name;
    r.versions = mf.entries.size();

    std::map<std::string, std::vector<std::string>> containing;  // bug -> versions
    std::vector<std::string> bug_order;
    double bugs_total = 0;
    double per_loc_total = 0;
    std::size_t per_loc_n = 0;
    double added_total = 0;
    double tests_per_bug_total = 0;
    std::size_t tests_per_bug_n = 0;
    for (const auto& e : mf.entries) {
        if (!pm.has_version(e.target_version)) {
            throw ManifestMismatch("version '" + e.target_version + "' is not in project '" + pm.project_name + "'");
        }
        VersionStats vs;
        vs.version_id = e.target_version;
        vs.bugs = e.bugs.size();
        for (const auto& b : e.bugs) {
            source_entry(pm, b.source_entry_id);
            if (b.bug_id != e.native_bug_id) {
                ++vs.transplanted_bugs;
                vs.added_tests += b.test_ids.size();
            }
            auto& list = containing[b.bug_id];
            if (list.empty()) {
                bug_order.push_back(b.bug_id);
            }
            list.push_back(e.target_version);
        }
        if (provider != nullptr) {
            vs.loc = program_size(provider->tree(pm.version(e.target_version)), pm);
            if (vs.loc > 0) {
                per_loc_total += static_cast<double>(vs.bugs) / static_cast<double>(vs.loc);
                ++per_loc_n;
            }
        }
        bugs_total += static_cast<double>(vs.bugs);
        added_total += static_cast<double>(vs.added_tests);
        if (vs.transplanted_bugs > 0) {
            tests_per_bug_total += static_cast<double>(vs.added_tests) / static_cast<double>(vs.transplanted_bugs);
            ++tests_per_bug_n;
        }
        r.transplanted_identifications += vs.transplanted_bugs;
        r.per_version.push_back(std::move(vs));
    }
    if (r.versions > 0) {
        r.mean_bugs_per_version = bugs_total / static_cast<double>(r.versions);
        r.mean_added_tests_per_version = added_total / static_cast<double>(r.versions);
    }
    if (per_loc_n > 0) {
        r.mean_bugs_per_loc = per_loc_total / static_cast<double>(per_loc_n);
    }
    if (tests_per_bug_n > 0) {
        r.mean_tests_per_bug = tests_per_bug_total / static_cast<double>(tests_per_bug_n);
    }
    for (const auto& d : mf.drop_events) {
        if (!pm.has_version(d.target_version)) {
            throw ManifestMismatch("drop event for '" + d.bug_id + "' names version '" + d.target_version +
                                   "', which is not in project '" + pm.project_name + "'");
        }
    }
    r.drop_events = mf.drop_events.size();
    const auto denom = r.drop_events + r.transplanted_identifications;
    r.drop_rate_percent = denom == 0 ? 0.0 : 100.0 * static_cast<double>(r.drop_events) / static_cast<double>(denom);

    for (const auto& bug_id : bug_order) {
        const auto& versions = containing.at(bug_id);
        BugLifetime lt;
        lt.bug_id = bug_id;
        lt.versions = versions.size();
        const history::VersionRef* earliest = nullptr;
        for (const auto& v : versions) {
            const auto& ref = pm.version(v);
            if (earliest == nullptr || ref.commit_date < earliest->commit_date) {
                earliest = &ref;
            }
        }
        lt.earliest_version = earliest->version_id;
        const auto& se = source_entry(pm, bug_id);
        lt.days = std::chrono::duration<double>(se.fix_date - earliest->commit_date).count() / 86400.0;
        r.lifetimes.push_back(std::move(lt));
    }
    return r;
}

namespace {

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string stats_csv(const StatsReport& r, StatsTable table) {
    std::ostringstream out;
    switch (table) {
    case StatsTable::Summary:
        out << "project,versions,mean_bugs_per_version,mean_bugs_per_loc,mean_added_tests_per_version,"
               "mean_tests_per_bug,drop_events,transplanted_identifications,drop_rate_percent\n";
        out << csv_field(r.project_name) << ',' << r.versions << ',' << num(r.mean_bugs_per_version) << ','
            << num(r.mean_bugs_per_loc) << ',' << num(r.mean_added_tests_per_version) << ','
            << num(r.mean_tests_per_bug) << ',' << r.drop_events << ',' << r.transplanted_identifications << ','
            << num(r.drop_rate_percent) << '\n';
        break;
    case StatsTable::Versions:
        out << "version,bugs,transplanted_bugs,added_tests,loc\n";
        for (const auto& v : r.per_version) {
            out << csv_field(v.version_id) << ',' << v.bugs << ',' << v.transplanted_bugs << ',' << v.added_tests
                << ',' << v.loc << '\n';
        }
        break;
    case StatsTable::Bugs:
        out << "bug,earliest_version,lifetime_versions,lifetime_days\n";
        for (const auto& b : r.lifetimes) {
            out << csv_field(b.bug_id) << ',' << csv_field(b.earliest_version) << ',' << b.versions << ','
                << num(b.days) << '\n';
        }
        break;
    }
    return out.str();
}

std::string stats_json(const StatsReport& r) {
    json doc;
    doc["project_name"] = r.project_name;
    doc["versions"] = r.versions;
    doc["mean_bugs_per_version"] = r.mean_bugs_per_version;
    doc["mean_bugs_per_loc"] = r.mean_bugs_per_loc;
    doc["mean_added_tests_per_version"] = r.mean_added_tests_per_version;
    doc["mean_tests_per_bug"] = r.mean_tests_per_bug;
    doc["drop_events"] = r.drop_events;
    doc["transplanted_identifications"] = r.transplanted_identifications;
    doc["drop_rate_percent"] = r.drop_rate_percent;
    json versions = json::array();
    for (const auto& v : r.per_version) {
        versions.push_back({{"version", v.version_id},
                            {"bugs", v.bugs},
                            {"transplanted_bugs", v.transplanted_bugs},
                            {"added_tests", v.added_tests},
                            {"loc", v.loc}});
    }
    doc["per_version"] = std::move(versions);
    json bugs = json::array();
    for (const auto& b : r.lifetimes) {
        bugs.push_back({{"bug", b.bug_id},
                        {"earliest_version", b.earliest_version},
                        {"lifetime_versions", b.versions},
                        {"lifetime_days", b.days}});
    }
    doc["lifetimes"] = std::move(bugs);
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// info

namespace {

std::string info_project(const MultiFaultManifest& mf, const ProjectManifest& pm) {
    const auto r = stats(mf, pm);
    std::ostringstream out;
    out << "project: " << mf.project_name << '\n';
    out << "versions: " << r.versions << '\n';
    out << "bugs per version (mean): " << num(r.mean_bugs_per_version) << '\n';
    out << "added tests per version (mean): " << num(r.mean_added_tests_per_version) << '\n';
    out << "tests per transplanted bug (mean): " << num(r.mean_tests_per_bug) << '\n';
    out << "drop events: " << r.drop_events << " (drop rate " << num(r.drop_rate_percent) << "%)\n";
    out << "created: " << format_timestamp(mf.created) << " by mfmine " << mf.tool_version << '\n';
    for (const auto& e : mf.entries) {
        out << "  " << e.target_version << ':';
        for (const auto& b : e.bugs) {
            out << ' ' << b.bug_id;
        }
        out << '\n';
    }
    return out.str();
}

std::string info_version(const MultiFaultEntry& e) {
    std::ostringstream out;
    out << "version: " << e.target_version << '\n';
    out << "native bug: " << e.native_bug_id << '\n';
    out << "bugs: " << e.bugs.size() << '\n';
    for (const auto& b : e.bugs) {
        out << "  " << b.bug_id << (b.bug_id == e.native_bug_id ? " (native)" : " (transplanted)") << '\n';
        out << "    tests: ";
        for (std::size_t i = 0; i < b.test_ids.size(); ++i) {
            out << (i ? ", " : "") << b.test_ids[i];
        }
        out << '\n';
        if (!b.transplanted_unit_ids.empty()) {
            out << "    transplanted units: " << b.transplanted_unit_ids.size() << '\n';
        }
        out << "    locations:";
        for (const auto& l : b.locations) {
            out << ' ' << to_string(l);
        }
        out << '\n';
    }
    return out.str();
}

std::string info_bug(const MultiFaultManifest& mf, const ProjectManifest& pm, const std::string& bug_id) {
    const auto& se = source_entry(pm, bug_id);
    std::ostringstream out;
    out << "bug: " << bug_id << '\n';
    out << "source entry: " << se.entry_id << " (buggy " << se.buggy.version_id << ", fixed " << se.fixed.version_id
        << ", fixed on " << format_timestamp(se.fix_date) << ")\n";
    out << "versions:\n";
    for (const auto& e : mf.entries) {
        if (const auto* b = e.find(bug_id)) {
            out << "  " << e.target_version << ": " << b->locations.size() << " location(s), " << b->test_ids.size()
                << " test(s)\n";
        }
    }
    out << "transplants:\n";
    for (const auto& t : mf.transplants) {
        if (t.bug_id != bug_id) {
            continue;
        }
        out << "  -> " << t.target_version << ": "
            << (t.exposed ? std::string("Exposed") : "NotExposed (" + std::string(transplant::to_string(*t.reason)) + ")")
            << ", " << t.units_copied.size() << " unit(s)\n";
    }
    for (const auto& d : mf.drop_events) {
        if (d.bug_id == bug_id) {
            out << "  dropped at " << d.target_version << " (" << d.stage << ")\n";
        }
    }
    return out.str();
}

bool is_bug(const MultiFaultManifest& mf, std::string_view id) {
    return std::any_of(mf.entries.begin(), mf.entries.end(), [&](const auto& e) { return e.find(id) != nullptr; });
}

}  // namespace

std::string info(const MultiFaultManifest& mf, const ProjectManifest& pm, std::string_view selector) {
    const std::string sel(selector);
    if (sel == "project" || sel == mf.project_name) {
        return info_project(mf, pm);
    }
    if (sel.starts_with("version:")) {
        if (const auto* e = mf.find(sel.substr(8))) {
            return info_version(*e);
        }
        throw UnknownSelector(sel);
    }
    if (sel.starts_with("bug:")) {
        if (is_bug(mf, sel.substr(4))) {
            return info_bug(mf, pm, sel.substr(4));
        }
        throw UnknownSelector(sel);
    }
    if (const auto* e = mf.find(sel)) {
        return info_version(*e);
    }
    if (is_bug(mf, sel)) {
        return info_bug(mf, pm, sel);
    }
    throw UnknownSelector(sel);
}

}  // namespace mfmine::pipeline
