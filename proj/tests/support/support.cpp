#include "support.hpp"

#include "mfmine/error.hpp"
#include "mfmine/lcs.hpp"
#include "mfmine/runner.hpp"
#include "mfmine/translate.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <set>

namespace mfmine::testing {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const std::vector<std::string> kVocab = {"alpha", "beta", "gamma", "delta", "", "  x = 1", "return y;", "}"};
const std::vector<std::string> kPaths = {"a.txt", "b.txt", "lib/c.txt", "lib/deep/d.txt", "e.md"};

// Deliberately independent of split_lines/join_lines.
struct NaiveFile {
    std::vector<std::string> lines;
    bool missing_newline = false;
};

NaiveFile naive_split(const std::string& s) {
    NaiveFile f;
    std::string cur;
    for (char c : s) {
        if (c == '\n') {
            f.lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) {
        f.lines.push_back(cur);
        f.missing_newline = true;
    }
    return f;
}

std::string naive_join(const NaiveFile& f) {
    std::string s;
    for (std::size_t i = 0; i < f.lines.size(); ++i) {
        s += f.lines[i];
        if (i + 1 < f.lines.size() || !f.missing_newline) {
            s += '\n';
        }
    }
    return s;
}

std::string unused_path(Rng& rng, const FileTree& a, const FileTree& b) {
    for (;;) {
        std::string p = std::string(chance(rng, 0.5) ? "moved/" : "") + "n" + std::to_string(uniform(rng, 0, 99999)) +
                        ".txt";
        if (!a.contains(p) && !b.contains(p)) {
            return p;
        }
    }
}

std::vector<std::string> hunk_side(const diff::Hunk& h, bool old_side) {
    std::vector<std::string> out;
    for (const auto& l : h.lines) {
        if (l.kind == diff::LineKind::Context ||
            (old_side ? l.kind == diff::LineKind::Remove : l.kind == diff::LineKind::Add)) {
            out.push_back(l.text);
        }
    }
    return out;
}

NaiveFile naive_hunks(const std::vector<diff::Hunk>& hunks, const NaiveFile& old) {
    NaiveFile out;
    std::size_t pos = 0;
    bool touched_end = false;
    bool end_missing = false;
    for (const auto& h : hunks) {
        const std::size_t start = h.old_len == 0 ? h.old_start : h.old_start - 1;
        if (start < pos || start + h.old_len > old.lines.size()) {
            throw std::runtime_error("oracle: hunk out of range");
        }
        out.lines.insert(out.lines.end(), old.lines.begin() + static_cast<std::ptrdiff_t>(pos),
                         old.lines.begin() + static_cast<std::ptrdiff_t>(start));
        const auto old_side = hunk_side(h, true);
        for (std::size_t k = 0; k < old_side.size(); ++k) {
            if (old.lines[start + k] != old_side[k]) {
                throw std::runtime_error("oracle: context disagrees");
            }
        }
        const auto new_side = hunk_side(h, false);
        out.lines.insert(out.lines.end(), new_side.begin(), new_side.end());
        pos = start + h.old_len;
        touched_end = pos == old.lines.size();
        if (touched_end) {
            end_missing = false;
            for (const auto& l : h.lines) {
                if (l.kind != diff::LineKind::Remove) {
                    end_missing = l.no_newline;
                }
            }
        }
    }
    out.lines.insert(out.lines.end(), old.lines.begin() + static_cast<std::ptrdiff_t>(pos), old.lines.end());
    out.missing_newline = touched_end ? end_missing : old.missing_newline;
    if (out.lines.empty()) {
        out.missing_newline = false;
    }
    return out;
}

template <class T>
std::vector<T> prefix(const std::vector<T>& v, std::size_t n) {
    return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(n, v.size()))};
}

}  // namespace

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool chance(Rng& rng, double p) {
    return std::bernoulli_distribution(p)(rng);
}

// ---- trees and diffs ------------------------------------------------------

FileTree random_tree(Rng& rng) {
    FileTree t;
    const auto files = uniform(rng, 1, 4);
    while (t.size() < files) {
        NaiveFile f;
        const auto n = uniform(rng, 0, 12);
        for (std::size_t i = 0; i < n; ++i) {
            f.lines.push_back(kVocab[uniform(rng, 0, kVocab.size() - 1)]);
        }
        f.missing_newline = !f.lines.empty() && !f.lines.back().empty() && chance(rng, 0.2);
        t[kPaths[uniform(rng, 0, kPaths.size() - 1)]] = naive_join(f);
    }
    return t;
}

Mutation mutate(Rng& rng, const FileTree& before, std::uint64_t* fresh) {
    auto new_line = [&] {
        return fresh != nullptr ? "tok" + std::to_string((*fresh)++) : kVocab[uniform(rng, 0, kVocab.size() - 1)];
    };
    Mutation m;
    for (const auto& [path, content] : before) {
        if (before.size() > 1 && chance(rng, 0.06)) {
            continue;  // deleted
        }
        NaiveFile f = naive_split(content);
        if (chance(rng, 0.5)) {
            const auto ops = uniform(rng, 1, 4);
            for (std::size_t k = 0; k < ops; ++k) {
                const auto kind = uniform(rng, 0, 2);
                if (kind == 0 && !f.lines.empty()) {
                    f.lines[uniform(rng, 0, f.lines.size() - 1)] = new_line();
                } else if (kind == 1 && !f.lines.empty()) {
                    f.lines.erase(f.lines.begin() + static_cast<std::ptrdiff_t>(uniform(rng, 0, f.lines.size() - 1)));
                } else {
                    f.lines.insert(f.lines.begin() + static_cast<std::ptrdiff_t>(uniform(rng, 0, f.lines.size())),
                                   new_line());
                }
            }
        }
        if (fresh == nullptr && chance(rng, 0.1)) {
            f.missing_newline = !f.missing_newline;
        }
        if (f.lines.empty() || f.lines.back().empty()) {
            f.missing_newline = false;
        }
        std::string target = path;
        if (chance(rng, 0.08)) {
            target = unused_path(rng, before, m.after);
            m.renames.emplace_back(path, target);
        }
        m.after[target] = naive_join(f);
    }
    if (chance(rng, 0.15)) {
        NaiveFile f;
        const auto n = uniform(rng, fresh != nullptr ? 1 : 0, 8);
        for (std::size_t i = 0; i < n; ++i) {
            f.lines.push_back(new_line());
        }
        m.after[unused_path(rng, before, m.after)] = naive_join(f);
    }
    return m;
}

FileTree naive_patch(const diff::Diff& d, const FileTree& tree) {
    FileTree out = tree;
    // every op reads the pre-state; remove first, then write
    for (const auto& op : d.ops) {
        const auto pre = diff::pre_path(op);
        if (!pre.empty()) {
            if (!tree.contains(pre)) {
                throw std::runtime_error("oracle: missing " + pre);
            }
            out.erase(pre);
        }
    }
    for (const auto& op : d.ops) {
        if (const auto* a = std::get_if<diff::AddFile>(&op)) {
            out[a->path] = naive_join({a->content.lines, a->content.missing_newline});
        } else if (const auto* m = std::get_if<diff::ModifyFile>(&op)) {
            out[m->path] = naive_join(naive_hunks(m->hunks, naive_split(tree.at(m->path))));
        } else if (const auto* r = std::get_if<diff::RenameFile>(&op)) {
            out[r->new_path] = naive_join(naive_hunks(r->hunks, naive_split(tree.at(r->old_path))));
        }
    }
    return out;
}

// ---- histories with unique lines ------------------------------------------

std::string history_version(std::size_t i) {
    return "v" + std::to_string(i);
}

History random_history(Rng& rng, std::size_t max_diffs) {
    std::uint64_t fresh = 0;
    FileTree t;
    const auto files = uniform(rng, 1, 4);
    for (std::size_t i = 0; i < files; ++i) {
        std::string content;
        const auto n = uniform(rng, 3, 15);
        for (std::size_t k = 0; k < n; ++k) {
            content += "tok" + std::to_string(fresh++) + "\n";
        }
        t["src/f" + std::to_string(i) + ".txt"] = content;
    }
    History h;
    h.trees.push_back(t);
    const auto steps = uniform(rng, 1, max_diffs);
    for (std::size_t s = 0; s < steps; ++s) {
        auto m = mutate(rng, h.trees.back(), &fresh);
        h.diffs.push_back(diff::diff_trees(h.trees.back(), m.after, m.renames));
        h.trees.push_back(std::move(m.after));
    }
    return h;
}

std::vector<OracleOutcome> token_oracle(const History& h, std::size_t target, const std::vector<FaultLocation>& tracked) {
    const std::size_t n = h.trees.size() - 1;
    std::vector<FileTree> back(h.trees.size());
    back[n] = h.trees[n];
    for (std::size_t k = n; k-- > target;) {
        back[k] = diff::apply(diff::invert(h.diffs[k]), back[k + 1]);
        if (back[k] != h.trees[k]) {
            throw std::runtime_error("oracle: inverted diff does not restore " + history_version(k));
        }
    }
    auto find_token = [](const FileTree& t, const std::string& token) -> std::optional<FaultLocation> {
        for (const auto& [path, content] : t) {
            const auto f = naive_split(content);
            for (std::size_t i = 0; i < f.lines.size(); ++i) {
                if (f.lines[i] == token) {
                    return FaultLocation{path, i + 1};
                }
            }
        }
        return std::nullopt;
    };
    std::vector<OracleOutcome> out;
    for (const auto& loc : tracked) {
        const auto token = naive_split(h.trees[n].at(loc.path)).lines.at(loc.line - 1);
        OracleOutcome o{true, loc, {}, false};
        for (std::size_t k = n; k-- > target;) {
            const auto hit = find_token(back[k], token);
            if (!hit) {
                o.active = false;
                o.dropped_at = history_version(k);
                for (const auto& op : h.diffs[k].ops) {
                    if (const auto* a = std::get_if<diff::AddFile>(&op); a != nullptr && a->path == o.current.path) {
                        o.file_added = true;
                    }
                }
                break;
            }
            o.current = *hit;
        }
        out.push_back(o);
    }
    return out;
}

// ---- sequences -------------------------------------------------------------

std::size_t dp_lcs(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// ---- coverage ---------------------------------------------------------------

tcm::CoverageMatrix random_matrix(Rng& rng, std::size_t max_tests, std::size_t max_elements) {
    tcm::CoverageMatrix m;
    const auto tests = uniform(rng, 0, max_tests);
    const auto elements = uniform(rng, 0, max_elements);
    for (std::size_t e = 0; e < elements; ++e) {
        auto name = "src/m" + std::to_string(e % 7) + ".py:" + std::to_string(e + 1);
        if (chance(rng, 0.05)) {
            name += "|FAULT:b" + std::to_string(uniform(rng, 1, 3));
        }
        m.elements.push_back(std::move(name));
    }
    const double density = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    for (std::size_t t = 0; t < tests; ++t) {
        const auto v = uniform(rng, 0, 2);
        m.tests.push_back({"test_" + std::to_string(t) + (chance(rng, 0.3) ? "[param]" : ""),
                           v == 0 ? tcm::Verdict::Passed : v == 1 ? tcm::Verdict::Failed : tcm::Verdict::Error});
        std::vector<std::size_t> row;
        for (std::size_t e = 0; e < elements; ++e) {
            if (chance(rng, density)) {
                row.push_back(e);
            }
        }
        m.rows.push_back(std::move(row));
    }
    return m;
}

// ---- toy corpus --------------------------------------------------------------

GroundTruth load_ground_truth(const std::filesystem::path& file) {
    const auto j = nlohmann::json::parse(read_file(file));
    GroundTruth g;
    for (const auto& [version, bugs] : j.at("bugs").items()) {
        for (const auto& [bug, locs] : bugs.items()) {
            auto& out = g.bugs[version][bug];
            for (const auto& l : locs) {
                out.push_back(parse_location(l.get<std::string>()));
            }
        }
    }
    for (const auto& d : j.at("drop_events")) {
        g.drops.emplace_back(d.at("bug_id").get<std::string>(), d.at("target_version").get<std::string>());
    }
    for (const auto& [bug, chain] : j.at("chains").items()) {
        auto& out = g.chains[bug];
        for (const auto& step : chain) {
            out.emplace_back(step.at("target_version").get<std::string>(),
                             step.at("outcome") == "Exposed" ? "Exposed" : step.at("reason").get<std::string>());
        }
    }
    return g;
}

std::vector<std::string> compare_with_truth(const pipeline::MultiFaultManifest& mf, const GroundTruth& truth) {
    std::vector<std::string> diffs;
    std::set<std::string> seen;
    for (const auto& e : mf.entries) {
        seen.insert(e.target_version);
        const auto it = truth.bugs.find(e.target_version);
        if (it == truth.bugs.end()) {
            diffs.push_back("unexpected version " + e.target_version);
            continue;
        }
        std::set<std::string> mined;
        for (const auto& b : e.bugs) {
            mined.insert(b.bug_id);
            const auto want = it->second.find(b.bug_id);
            if (want == it->second.end()) {
                diffs.push_back(e.target_version + ": unexpected bug " + b.bug_id);
            } else if (b.locations != want->second) {
                diffs.push_back(e.target_version + ": locations of " + b.bug_id + " differ");
            }
        }
        for (const auto& [bug, locs] : it->second) {
            if (!mined.contains(bug)) {
                diffs.push_back(e.target_version + ": missing bug " + bug);
            }
        }
    }
    for (const auto& [version, bugs] : truth.bugs) {
        if (!seen.contains(version)) {
            diffs.push_back("missing version " + version);
        }
    }
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& d : mf.drop_events) {
        got.emplace(d.bug_id, d.target_version);
        if (d.stage != "TranslationFailed") {
            diffs.push_back("drop event with stage " + d.stage);
        }
    }
    if (got != std::set<std::pair<std::string, std::string>>(truth.drops.begin(), truth.drops.end()) ||
        got.size() != mf.drop_events.size()) {
        diffs.push_back("drop events differ");
    }
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> chains;
    for (const auto& [bug, steps] : truth.chains) {
        chains[bug];  // entries with no earlier targets have empty chains
    }
    for (const auto& t : mf.transplants) {
        chains[t.bug_id].emplace_back(t.target_version,
                                      t.exposed ? "Exposed" : std::string(transplant::to_string(*t.reason)));
    }
    if (chains != truth.chains) {
        diffs.push_back("transplant chains differ");
    }
    return diffs;
}

// ---- acceptance checks ---------------------------------------------------------

void Check::fail(const std::string& why) {
    if (ok || detail.size() < 2000) {
        detail += (detail.empty() ? "" : "; ") + why;
    }
    ok = false;
}

Check check_diff_properties(std::uint64_t seed, std::size_t cases) {
    Check c;
    Rng rng(seed);
    const auto start = Clock::now();
    for (std::size_t i = 0; i < cases; ++i) {
        const auto before = random_tree(rng);
        const auto m = mutate(rng, before);
        const auto tag = "case " + std::to_string(i) + ": ";
        try {
            const auto d = diff::diff_trees(before, m.after, m.renames);
            diff::validate(d);
            const auto after = diff::apply(d, before);
            if (after != m.after) {
                c.fail(tag + "apply does not reproduce the edited tree");
            }
            if (naive_patch(d, before) != after) {
                c.fail(tag + "apply disagrees with the patch oracle");
            }
            if (diff::apply(diff::invert(d), after) != before) {
                c.fail(tag + "inverse does not restore the tree");
            }
            if (diff::invert(diff::invert(d)) != d) {
                c.fail(tag + "double inversion changed the diff");
            }
            const auto text = diff::render_unified(d);
            const auto parsed = diff::parse_unified(text);
            if (parsed != d) {
                c.fail(tag + "parse(render(d)) != d");
            }
            if (diff::render_unified(parsed) != text) {
                c.fail(tag + "render(parse(t)) != t");
            }
        } catch (const std::exception& e) {
            c.fail(tag + e.what());
        }
    }
    c.seconds = since(start);
    if (c.ok) {
        c.detail = std::to_string(cases) + " (tree, diff) pairs";
    }
    return c;
}

Check check_translation_oracle(std::uint64_t seed, std::size_t histories) {
    Check c;
    Rng rng(seed);
    const auto start = Clock::now();
    std::size_t tracked_total = 0;
    std::size_t active_total = 0;
    for (std::size_t i = 0; i < histories; ++i) {
        const auto tag = "history " + std::to_string(i) + ": ";
        try {
            History h;
            std::vector<FaultLocation> all;
            do {
                h = random_history(rng, kMaxHistoryDiffs);
                all.clear();
                for (const auto& [path, content] : h.trees.back()) {
                    const auto n = naive_split(content).lines.size();
                    for (std::size_t l = 1; l <= n; ++l) {
                        all.push_back({path, l});
                    }
                }
            } while (all.empty());
            std::shuffle(all.begin(), all.end(), rng);
            const auto tracked = prefix(all, uniform(rng, 1, std::min(kMaxTracked, all.size())));
            const std::size_t n = h.trees.size() - 1;
            const std::size_t target = uniform(rng, 0, n);

            history::Entry entry;
            entry.entry_id = "bug";
            entry.buggy.version_id = history_version(n);
            entry.trigger_tests = {"t"};
            entry.fault_locations = tracked;
            std::vector<history::DiffRef> chain;
            for (std::size_t k = target; k < n; ++k) {
                chain.push_back({history_version(k), history_version(k + 1), h.diffs[k]});
            }
            const auto result = locate::translate(entry, history_version(target), chain, &h.trees[n]);
            const auto oracle = token_oracle(h, target, tracked);

            bool any_active = false;
            for (std::size_t k = 0; k < tracked.size(); ++k) {
                const auto& got = result.locations.at(k);
                const auto& want = oracle[k];
                any_active = any_active || want.active;
                if (got.origin != tracked[k] || got.active() != want.active) {
                    c.fail(tag + "status of " + to_string(tracked[k]) + " differs");
                } else if (want.active && got.current != want.current) {
                    c.fail(tag + to_string(tracked[k]) + " mapped to " + to_string(*got.current) + ", oracle says " +
                           to_string(want.current));
                } else if (!want.active && (got.dropped_at != want.dropped_at ||
                                            (got.reason == locate::DropReason::FileRemovedBackward) != want.file_added)) {
                    c.fail(tag + "drop of " + to_string(tracked[k]) + " differs");
                }
            }
            if (result.identified != any_active || result.locations.size() != tracked.size()) {
                c.fail(tag + "identified flag or cardinality wrong");
            }
            if (!locate::verify_translation(result, h.trees[n], h.trees[target]).empty()) {
                c.fail(tag + "verify_translation reports mismatches");
            }
            tracked_total += tracked.size();
            active_total += result.active_locations().size();
        } catch (const std::exception& e) {
            c.fail(tag + e.what());
        }
    }
    c.seconds = since(start);
    if (c.ok) {
        c.detail = std::to_string(histories) + " histories, " + std::to_string(tracked_total) + " tracked lines, " +
                   std::to_string(active_total) + " still active";
    }
    return c;
}

Check check_lcs_oracle(std::uint64_t seed, std::size_t pairs) {
    Check c;
    Rng rng(seed);
    const std::size_t alphabets[] = {2, 3, 5, 26, 1000};
    const auto start = Clock::now();
    for (std::size_t i = 0; i < pairs; ++i) {
        const auto sigma = alphabets[uniform(rng, 0, 4)];
        std::vector<int> a(uniform(rng, 0, kLcsMaxLength));
        std::vector<int> b(uniform(rng, 0, kLcsMaxLength));
        for (auto& x : a) {
            x = static_cast<int>(uniform(rng, 0, sigma - 1));
        }
        for (auto& x : b) {
            x = static_cast<int>(uniform(rng, 0, sigma - 1));
        }
        const auto want = dp_lcs(a, b);
        const auto tag = "pair " + std::to_string(i) + ": ";
        if (harness::lcs_length(a, b) != want || harness::lcs_length(b, a) != want) {
            c.fail(tag + "length differs from the DP oracle");
            continue;
        }
        const auto pairs_found = harness::lcs_pairs(a, b);
        bool valid = pairs_found.size() == want;
        for (std::size_t k = 0; valid && k < pairs_found.size(); ++k) {
            valid = a[pairs_found[k].a] == b[pairs_found[k].b] &&
                    (k == 0 || (pairs_found[k - 1].a < pairs_found[k].a && pairs_found[k - 1].b < pairs_found[k].b));
        }
        if (!valid) {
            c.fail(tag + "lcs_pairs is not a longest common subsequence");
        }
    }
    c.seconds = since(start);
    if (c.ok) {
        c.detail = std::to_string(pairs) + " random pairs";
    }
    return c;
}

Check check_lcs_large(std::uint64_t seed) {
    Check c;
    Rng rng(seed);
    std::vector<std::string> a;
    for (std::size_t i = 0; i < kLcsLargeLines; ++i) {
        a.push_back(chance(rng, 0.05) ? "dup " + std::to_string(uniform(rng, 0, 49)) : "line " + std::to_string(i));
    }
    std::vector<std::string> b;
    for (const auto& line : a) {
        const auto r = uniform(rng, 0, 99);
        if (r < 4) {
            continue;
        }
        b.push_back(r < 8 ? "changed " + std::to_string(uniform(rng, 0, 1'000'000)) : line);
        if (r >= 97) {
            b.push_back("inserted " + std::to_string(uniform(rng, 0, 1'000'000)));
        }
    }
    const auto start = Clock::now();
    const auto got = harness::lcs_length(a, b);
    c.seconds = since(start);

    std::map<std::string, int> ids;
    auto encode = [&](const std::vector<std::string>& v) {
        std::vector<int> out;
        for (const auto& s : v) {
            out.push_back(ids.emplace(s, static_cast<int>(ids.size())).first->second);
        }
        return out;
    };
    const auto want = dp_lcs(encode(a), encode(b));
    if (got != want) {
        c.fail("LCS " + std::to_string(got) + " != DP " + std::to_string(want));
    }
    if (c.seconds >= kLcsLargeSeconds) {
        c.fail("took " + std::to_string(c.seconds) + " s");
    }
    if (c.ok) {
        c.detail = std::to_string(a.size()) + " x " + std::to_string(b.size()) + " lines, LCS " + std::to_string(got);
    }
    return c;
}

Check check_mining(const std::filesystem::path& corpus) {
    Check c;
    const auto start = Clock::now();
    try {
        const auto pm = history::load_manifest(corpus / "manifest.json");
        const auto provider = history::make_provider(pm);
        if (!history::verify_chain(pm, *provider).empty()) {
            c.fail("stored diffs do not reproduce the snapshots");
        }
        const auto mf = pipeline::mine(pm, *provider);
        c.seconds = since(start);
        for (const auto& d : compare_with_truth(mf, load_ground_truth(corpus / "ground_truth.json"))) {
            c.fail(d);
        }
        if (pm.versions.size() < 8 || pm.entries.size() < 5) {
            c.fail("corpus is too small");
        }
        // chain shapes the corpus must exercise
        std::map<std::string, std::vector<const pipeline::TransplantLog*>> chains;
        for (const auto& t : mf.transplants) {
            chains[t.bug_id].push_back(&t);
        }
        bool long_chain = false;
        bool compile_stop = false;
        for (const auto& [bug, logs] : chains) {
            std::size_t exposed = 0;
            while (exposed < logs.size() && logs[exposed]->exposed) {
                ++exposed;
            }
            for (std::size_t k = exposed; k < logs.size(); ++k) {
                if (logs[k]->exposed || k != exposed) {
                    c.fail(bug + ": exposed records are not a prefix of the chain");
                }
            }
            long_chain = long_chain || exposed >= 3;
            compile_stop = compile_stop || (exposed < logs.size() && logs[exposed]->reason &&
                                            *logs[exposed]->reason == transplant::NotExposedReason::CompileError);
        }
        bool full_drop = false;
        for (const auto& d : mf.drop_events) {
            const bool all_modified = !d.drops.empty() && std::all_of(d.drops.begin(), d.drops.end(), [](const auto& l) {
                return l.reason == locate::DropReason::Modified;
            });
            full_drop = full_drop || (d.stage == "TranslationFailed" && all_modified);
        }
        if (!long_chain) {
            c.fail("no bug is exposed across three earlier versions");
        }
        if (!full_drop) {
            c.fail("no bug is dropped with every line rewritten");
        }
        if (!compile_stop) {
            c.fail("no chain stops on a compile error");
        }
        if (c.seconds >= kMiningSeconds) {
            c.fail("took " + std::to_string(c.seconds) + " s");
        }
        if (c.ok) {
            std::size_t bugs = 0;
            for (const auto& e : mf.entries) {
                bugs += e.bugs.size();
            }
            c.detail = std::to_string(mf.entries.size()) + " versions, " + std::to_string(bugs) + " bug records, " +
                       std::to_string(mf.drop_events.size()) + " drop event(s) match the ground truth";
        }
    } catch (const std::exception& e) {
        c.fail(e.what());
    }
    if (c.seconds == 0) {
        c.seconds = since(start);
    }
    return c;
}

Check check_revalidation(const std::filesystem::path& corpus) {
    Check c;
    const auto start = Clock::now();
    try {
        const auto pm = history::load_manifest(corpus / "manifest.json");
        const auto provider = history::make_provider(pm);
        const auto mf = pipeline::mine(pm, *provider);
        const harness::Harness harness(pm.runner);
        const TempDir scratch("mfmine-accept");
        std::size_t reruns = 0;
        for (const auto& e : mf.entries) {
            const auto dir = scratch.path() / e.target_version;
            const auto report =
                pipeline::multi_checkout(mf, pm, *provider, e.target_version, dir, {true, kAcceptThreshold});
            if (!report.revalidated) {
                c.fail(e.target_version + ": not revalidated");
            }
            for (const auto& p : report.problems) {
                c.fail(e.target_version + ": " + p);
            }
            // independent re-checks on what landed on disk
            const auto disk = read_tree(dir);
            const auto snapshot = provider->tree(pm.version(e.target_version));
            for (const auto& [path, content] : snapshot) {
                if (!glob_match(pm.extractor.glob, path) && disk.count(path) == 0) {
                    c.fail(e.target_version + ": program file " + path + " missing");
                } else if (!glob_match(pm.extractor.glob, path) && disk.at(path) != content) {
                    c.fail(e.target_version + ": program file " + path + " altered");
                }
            }
            for (const auto& [path, content] : disk) {
                if (!glob_match(pm.extractor.glob, path) && path.rfind("bug.locations.", 0) != 0 &&
                    !snapshot.contains(path)) {
                    c.fail(e.target_version + ": unexpected program file " + path);
                }
            }
            for (const auto& bug : e.bugs) {
                const auto& source = pm.entry(bug.source_entry_id);
                const auto original = harness.run(provider->tree(source.buggy), source.trigger_tests);
                const auto rerun = harness.run(disk, bug.test_ids);
                for (std::size_t k = 0; k < rerun.size(); ++k) {
                    ++reruns;
                    if (!harness::same_failure(original.at(k), rerun[k], kAcceptThreshold)) {
                        c.fail(e.target_version + ": " + bug.bug_id + "/" + rerun[k].test_id + " no longer fails the same way");
                    }
                }
                const auto expected = pipeline::location_file_content(bug.locations);
                const auto name = pipeline::location_file_name(bug.bug_id);
                if (disk.count(name) == 0 || disk.at(name) != expected) {
                    c.fail(e.target_version + ": " + name + " wrong");
                }
                history::Entry as_found = source;
                const auto chain = history::interval_diff_chain(pm, e.target_version, source.buggy.version_id);
                const auto discovery = provider->tree(source.buggy);
                const auto tr = locate::translate(as_found, e.target_version, chain, &discovery);
                if (!locate::verify_translation(tr, discovery, snapshot).empty()) {
                    c.fail(e.target_version + ": " + bug.bug_id + " locations mismatch");
                }
            }
        }
        if (c.ok) {
            c.detail = std::to_string(mf.entries.size()) + " checkouts, " + std::to_string(reruns) +
                       " exposing test runs, program trees unchanged";
        }
    } catch (const std::exception& e) {
        c.fail(e.what());
    }
    c.seconds = since(start);
    return c;
}

Check check_tcm(std::uint64_t seed, std::size_t matrices, const std::filesystem::path& golden) {
    Check c;
    Rng rng(seed);
    const auto start = Clock::now();
    for (std::size_t i = 0; i < matrices; ++i) {
        const auto m = random_matrix(rng, 50, 500);
        const auto tag = "matrix " + std::to_string(i) + ": ";
        try {
            const auto text = tcm::to_tcm(m);
            const auto parsed = tcm::parse_tcm(text);
            const auto again = tcm::to_tcm(parsed);
            if (parsed != m || again != text || tcm::parse_tcm(again) != m) {
                c.fail(tag + "round trip is not a fixed point");
            }
        } catch (const std::exception& e) {
            c.fail(tag + e.what());
        }
    }
    try {
        const auto ingested = tcm::ingest_per_test_coverage(golden / "cov");
        if (tcm::to_tcm(ingested) != read_file(golden / "two_by_two.tcm")) {
            c.fail("ingested coverage differs from two_by_two.tcm");
        }
        const auto input = tcm::parse_tcm(read_file(golden / "identify_input.tcm"));
        const auto tagging = tcm::load_tagging(golden / "locations");
        const auto once = tcm::identify_faults(input, tagging);
        if (tcm::to_tcm(once) != read_file(golden / "identify_expected.tcm")) {
            c.fail("identify output differs from identify_expected.tcm");
        }
        if (tcm::identify_faults(once, tagging) != once) {
            c.fail("identify is not idempotent");
        }
        if (once.tests != input.tests || once.rows != input.rows || once.elements.size() != input.elements.size()) {
            c.fail("identify changed the matrix shape");
        }
    } catch (const std::exception& e) {
        c.fail(std::string("golden: ") + e.what());
    }
    c.seconds = since(start);
    if (c.ok) {
        c.detail = std::to_string(matrices) + " random matrices, golden files match";
    }
    return c;
}

history::ProjectManifest stats_project() {
    using namespace std::chrono;
    history::ProjectManifest pm;
    pm.project_name = "hand";
    const sys_days dates[] = {year{2020} / January / 1, year{2020} / January / 15, year{2020} / February / 1,
                              year{2020} / March / 1};
    for (int i = 0; i < 4; ++i) {
        pm.versions.push_back({"v" + std::to_string(i + 1), "c" + std::to_string(i + 1), dates[i], ""});
    }
    for (int i = 0; i < 3; ++i) {
        history::Entry e;
        e.entry_id = "b" + std::to_string(i + 1);
        e.buggy = pm.versions[static_cast<std::size_t>(i)];
        e.fixed = pm.versions[static_cast<std::size_t>(i + 1)];
        e.trigger_tests = {"t" + std::to_string(i + 1)};
        e.fault_locations = {{"src/a.mf", static_cast<std::size_t>(i + 1)}};
        e.fix_date = e.fixed.commit_date;
        pm.entries.push_back(e);
    }
    return pm;
}

pipeline::MultiFaultManifest stats_manifest() {
    pipeline::MultiFaultManifest mf;
    mf.project_name = "hand";
    mf.entries = {
        {"v1", "b1",
         {{"b1", "b1", {}, {"t1"}, {{"src/a.mf", 1}}}, {"b2", "b2", {"t2"}, {"t2"}, {{"src/a.mf", 2}}}}},
        {"v2", "b2",
         {{"b2", "b2", {}, {"t2"}, {{"src/a.mf", 2}}},
          {"b3", "b3", {"fx", "t3a", "t3b"}, {"t3a", "t3b"}, {{"src/a.mf", 3}}}}},
        {"v3", "b3", {{"b3", "b3", {}, {"t3a", "t3b"}, {{"src/a.mf", 3}}}}},
    };
    mf.drop_events = {{"b3", "v1", "TranslationFailed", {{{"src/a.mf", 3}, "v1", locate::DropReason::Modified}}}};
    return mf;
}

std::pair<history::ProjectManifest, pipeline::MultiFaultManifest> random_mined(Rng& rng) {
    using namespace std::chrono;
    history::ProjectManifest pm;
    pm.project_name = "random";
    const auto n = uniform(rng, 2, 9);
    sys_seconds when = sys_days{year{2019} / January / 1};
    for (std::size_t i = 0; i < n; ++i) {
        when += hours{static_cast<int>(uniform(rng, 1, 24 * 60))};
        pm.versions.push_back({"v" + std::to_string(i), "", when, ""});
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        history::Entry e;
        e.entry_id = "e" + std::to_string(i);
        e.buggy = pm.versions[i];
        e.fixed = pm.versions[i + 1];
        e.trigger_tests = {"t" + std::to_string(i)};
        e.fault_locations = {{"src/x", 1}};
        e.fix_date = e.fixed.commit_date;
        pm.entries.push_back(e);
    }
    pipeline::MultiFaultManifest mf;
    mf.project_name = pm.project_name;
    for (std::size_t i = 0; i < pm.entries.size(); ++i) {
        pipeline::MultiFaultEntry entry{pm.versions[i].version_id, pm.entries[i].entry_id, {}};
        entry.bugs.push_back({pm.entries[i].entry_id, pm.entries[i].entry_id, {}, {"t"}, {{"src/x", 1}}});
        for (std::size_t j = i + 1; j < pm.entries.size(); ++j) {
            if (chance(rng, 0.4)) {
                const auto tests = uniform(rng, 1, 3);
                std::vector<std::string> ids;
                for (std::size_t k = 0; k < tests; ++k) {
                    ids.push_back("t" + std::to_string(j) + "_" + std::to_string(k));
                }
                entry.bugs.push_back({pm.entries[j].entry_id, pm.entries[j].entry_id, ids, ids, {{"src/x", 2}}});
            } else if (chance(rng, 0.2)) {
                mf.drop_events.push_back({pm.entries[j].entry_id, entry.target_version, "TranslationFailed", {}});
            }
        }
        mf.entries.push_back(std::move(entry));
    }
    return {std::move(pm), std::move(mf)};
}

Check check_stats(std::uint64_t seed, const std::filesystem::path& corpus) {
    Check c;
    const auto start = Clock::now();
    try {
        const auto r = pipeline::stats(stats_manifest(), stats_project());
        // hand-computed: bugs per version 2, 2, 1; added tests 1, 2, 0;
        // transplanted identifications 2 against 1 drop
        if (r.versions != 3) {
            c.fail("versions");
        }
        if (r.mean_bugs_per_version != 5.0 / 3.0) {
            c.fail("bugs/version");
        }
        if (r.mean_added_tests_per_version != 1.0) {
            c.fail("added tests/version");
        }
        if (r.mean_tests_per_bug != 1.5) {
            c.fail("tests/bug");
        }
        if (r.drop_events != 1 || r.transplanted_identifications != 2 || r.drop_rate_percent != 100.0 / 3.0) {
            c.fail("drop rate");
        }
        const std::vector<std::tuple<std::string, std::string, std::size_t, double>> lifetimes = {
            {"b1", "v1", 1, 14.0}, {"b2", "v1", 2, 31.0}, {"b3", "v2", 2, 46.0}};
        if (r.lifetimes.size() != lifetimes.size()) {
            c.fail("lifetime count");
        } else {
            for (std::size_t i = 0; i < lifetimes.size(); ++i) {
                const auto& [bug, earliest, versions, days] = lifetimes[i];
                const auto& lt = r.lifetimes[i];
                if (lt.bug_id != bug || lt.earliest_version != earliest || lt.versions != versions || lt.days != days) {
                    c.fail("lifetime of " + bug);
                }
            }
        }

        auto conserved = [](const pipeline::StatsReport& s) {
            std::size_t bugs = 0;
            std::size_t life = 0;
            for (const auto& v : s.per_version) {
                bugs += v.bugs;
            }
            for (const auto& l : s.lifetimes) {
                life += l.versions;
            }
            return bugs == life;
        };
        if (!conserved(r)) {
            c.fail("conservation fails on the hand-built manifest");
        }
        Rng rng(seed);
        for (int i = 0; i < 200; ++i) {
            const auto [pm, mf] = random_mined(rng);
            if (!conserved(pipeline::stats(mf, pm))) {
                c.fail("conservation fails on random corpus " + std::to_string(i));
            }
        }
        const auto pm = history::load_manifest(corpus / "manifest.json");
        const auto provider = history::make_provider(pm);
        if (!conserved(pipeline::stats(pipeline::mine(pm, *provider), pm, provider.get()))) {
            c.fail("conservation fails on the toy corpus");
        }
    } catch (const std::exception& e) {
        c.fail(e.what());
    }
    c.seconds = since(start);
    if (c.ok) {
        c.detail = "hand-computed values exact, conservation holds on 201 corpora";
    }
    return c;
}

}  // namespace mfmine::testing
