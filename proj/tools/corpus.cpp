#include "corpus.hpp"

#include "mfmine/diff.hpp"
#include "mfmine/location.hpp"
#include "mfmine/timestamp.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace mfmine::corpus {

using json = nlohmann::ordered_json;

std::string version_id(int index) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "v%02d", index);
    return buf;
}

namespace {

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

std::string norm_path(int v) {
    return v <= 7 ? "src/norm.mf" : "src/util/norm.mf";
}

std::string arith(int v) {
    std::vector<std::string> l = {"module arith", "# integer helpers", "fn add(a, b) = a + b"};
    if (v >= 6) {
        l.push_back("fn twice(x) = add(x, x)");
    }
    l.push_back(v == 2 ? "fn sub(a, b) = a + b" : "fn sub(a, b) = a - b");
    l.push_back(v <= 4   ? "fn scale(x) = x * 2"
                : v <= 6 ? "fn scale(x) = x * 3"
                : v <= 8 ? "fn scale(x) = 3 * x"
                         : "fn scale(x) = 2 * x");
    l.push_back("fn half(x) = x / 2");
    if (v >= 8) {
        l.push_back(v <= 10 ? "fn total(x) = scale(x) + 1" : "fn total(x) = scale(x)");
    }
    return join(l);
}

std::string grade(int v) {
    std::vector<std::string> l = {"module grade"};
    if (v >= 4) {
        l.push_back("# letter grades as points");
    }
    l.push_back("fn grade(score) {");
    l.push_back(v <= 4 ? "  score >= 91 => 4" : "  score >= 90 => 4");
    l.push_back("  score >= 80 => 3");
    l.push_back(v <= 3 ? "  score >= 71 => 2" : v == 4 ? "  score > 70 => 2" : "  score >= 70 => 2");
    l.push_back("  _ => 0");
    l.push_back("}");
    return join(l);
}

std::string bounds(int v) {
    return join({"module bounds", "fn clamp(x, lo, hi) {", "  x < lo => lo",
                 v <= 6 ? "  x > hi => x" : "  x > hi => hi", "  _ => x", "}"});
}

std::string norm(int v) {
    std::vector<std::string> l;
    if (v >= 8) {
        l.push_back("# moved under util");
    }
    l.push_back("module norm");
    l.push_back("fn magnitude(x) {");
    l.push_back(v >= 3 && v <= 9 ? "  x < -1 => 0 - x" : "  x < 0 => 0 - x");
    l.push_back("  _ => x");
    l.push_back("}");
    return join(l);
}

std::string arith_test(int v) {
    std::vector<std::string> l = {"# arithmetic checks", "#[unit id=imp_arith kind=import]", "import arith", "",
                                  "#[unit id=test_add kind=test deps=imp_arith]", "assert add(2, 3) == 5"};
    if (v >= 2) {
        l.insert(l.end(), {"", "#[unit id=test_sub kind=test deps=imp_arith]", "assert sub(7, 3) == 4"});
    }
    if (v >= 8) {
        l.insert(l.end(), {"", "#[unit id=fx_four kind=fixture]", "let four = 4", "",
                           "#[unit id=test_scale kind=test deps=imp_arith,fx_four]", "assert scale(four) == 8"});
    }
    if (v >= 10) {
        l.insert(l.end(), {"", "#[unit id=helper_expect kind=helper]", "fn expect_total(x) = 2 * x", "",
                           "#[unit id=test_total kind=test deps=imp_arith,helper_expect]",
                           "assert total(3) == expect_total(3)"});
    }
    return join(l);
}

std::string grade_test() {
    return join({"#[unit id=imp_grade kind=import]", "import grade", "", "#[unit id=fx_top kind=fixture]",
                 "let top = 90", "", "#[unit id=test_grade kind=test deps=imp_grade,fx_top]",
                 "assert grade(top) == 4"});
}

std::string bounds_test() {
    return join({"#[unit id=imp_bounds kind=import]", "import bounds", "",
                 "#[unit id=test_clamp kind=test deps=imp_bounds]", "assert clamp(15, 0, 10) == 10"});
}

std::string norm_test(int v) {
    return join({"#[unit id=imp_norm kind=import]", "import norm", "", "#[unit id=test_norm kind=test deps=imp_norm]",
                 v <= 8 ? "assert magnitude(5) == 5" : "assert magnitude(-1) == 1"});
}

Timestamp commit_date(int v) {
    using namespace std::chrono;
    return sys_days{year{2021} / March / 1} + days{14 * (v - 1)} + hours{12};
}

std::size_t find_line(const FileTree& tree, const std::string& path, const std::string& text) {
    const auto it = tree.find(path);
    if (it == tree.end()) {
        return 0;
    }
    const auto lines = split_lines(it->second).lines;
    std::size_t found = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i] == text) {
            if (found != 0) {
                throw std::logic_error("fault line is not unique: " + text);
            }
            found = i + 1;
        }
    }
    return found;
}

/// Fault lines of `bug` still present, unchanged, in every version from
/// `target` up to its discovery version: the locations a correct backward
/// translation must produce.
std::vector<FaultLocation> surviving(const PlantedBug& bug, int target) {
    std::vector<FaultLocation> out;
    for (const auto& text : bug.fault_lines) {
        bool alive = true;
        for (int v = target; v <= bug.buggy && alive; ++v) {
            alive = find_line(version_tree(v), fault_file(bug, v), text) != 0;
        }
        if (alive) {
            out.push_back({fault_file(bug, target), find_line(version_tree(target), fault_file(bug, target), text)});
        }
    }
    return out;
}

json location_list(const std::vector<FaultLocation>& locs) {
    json out = json::array();
    for (const auto& l : locs) {
        out.push_back(to_string(l));
    }
    return out;
}

}  // namespace

FileTree version_tree(int v) {
    if (v < 1 || v > kVersionCount) {
        throw std::out_of_range("no such corpus version");
    }
    FileTree t;
    t["src/arith.mf"] = arith(v);
    t["src/grade.mf"] = grade(v);
    if (v >= 5) {
        t["src/bounds.mf"] = bounds(v);
    }
    t[norm_path(v)] = norm(v);
    t["tests/arith_test.mf"] = arith_test(v);
    if (v >= 4) {
        t["tests/grade_test.mf"] = grade_test();
        t["tests/norm_test.mf"] = norm_test(v);
    }
    if (v >= 6) {
        t["tests/bounds_test.mf"] = bounds_test();
    }
    return t;
}

const std::vector<PlantedBug>& planted_bugs() {
    static const std::vector<PlantedBug> bugs = {
        {"A", 2, 3, {"test_sub"}, {"fn sub(a, b) = a + b"}, {}, "", 0},
        {"B", 4, 5, {"test_grade"}, {"  score >= 91 => 4", "  score > 70 => 2"}, {2}, "", 0},
        {"C", 6, 7, {"test_clamp"}, {"  x > hi => x"}, {}, "CompileError", 4},
        {"D", 8, 9, {"test_scale"}, {"fn scale(x) = 3 * x"}, {6}, "Passed", 4},
        {"E", 9, 10, {"test_norm"}, {"  x < -1 => 0 - x"}, {8, 6, 4}, "Passed", 2},
        {"F", 10, 11, {"test_total"}, {"fn total(x) = scale(x) + 1"}, {9}, "DifferentFailure", 8},
    };
    return bugs;
}

std::string fault_file(const PlantedBug& bug, int version) {
    if (bug.id == "A" || bug.id == "D" || bug.id == "F") {
        return "src/arith.mf";
    }
    if (bug.id == "B") {
        return "src/grade.mf";
    }
    if (bug.id == "C") {
        return "src/bounds.mf";
    }
    return norm_path(version);
}

FileTree generate_toy() {
    FileTree out;
    json manifest;
    manifest["project_name"] = "toy";
    manifest["source_glob"] = "src/**";

    json versions = json::array();
    json diffs = json::array();
    for (int v = 1; v <= kVersionCount; ++v) {
        const auto id = version_id(v);
        char commit[16];
        std::snprintf(commit, sizeof commit, "c0ffee%02d", v);
        versions.push_back({{"version_id", id}, {"commit_id", commit}, {"commit_date", format_timestamp(commit_date(v))}});
        for (const auto& [path, content] : version_tree(v)) {
            out["versions/" + id + "/" + path] = content;
        }
        if (v > 1) {
            std::vector<std::pair<std::string, std::string>> renames;
            if (norm_path(v - 1) != norm_path(v)) {
                renames.emplace_back(norm_path(v - 1), norm_path(v));
            }
            const auto name = "diffs/" + version_id(v - 1) + "-" + id + ".diff";
            out[name] = diff::render_unified(diff::diff_trees(version_tree(v - 1), version_tree(v), renames));
            diffs.push_back({{"from_version", version_id(v - 1)}, {"to_version", id}, {"payload_file", name}});
        }
    }
    manifest["versions"] = std::move(versions);
    manifest["diffs"] = std::move(diffs);

    json entries = json::array();
    for (const auto& bug : planted_bugs()) {
        std::vector<FaultLocation> locs;
        const auto tree = version_tree(bug.buggy);
        for (const auto& text : bug.fault_lines) {
            locs.push_back({fault_file(bug, bug.buggy), find_line(tree, fault_file(bug, bug.buggy), text)});
        }
        entries.push_back({{"entry_id", bug.id},
                           {"buggy", version_id(bug.buggy)},
                           {"fixed", version_id(bug.fixed)},
                           {"trigger_tests", bug.trigger_tests},
                           {"fault_locations", location_list(locs)}});
    }
    manifest["entries"] = std::move(entries);
    manifest["provider"] = {{"kind", "snapshot"}, {"root", "versions"}};
    manifest["runner"] = {{"kind", "builtin"}, {"timeout", 10}, {"threshold", 0.9}};
    manifest["extractor"] = {{"kind", "annotation"}, {"glob", "tests/**"}};
    out["manifest.json"] = manifest.dump(2) + "\n";

    // Ground truth: which bugs each version holds and where.
    std::map<int, json> by_version;
    json drops = json::array();
    json chains = json::object();
    for (const auto& bug : planted_bugs()) {
        by_version[bug.buggy][bug.id] = location_list(surviving(bug, bug.buggy));
        json chain = json::array();
        for (int target : bug.exposed_in) {
            chain.push_back({{"target_version", version_id(target)}, {"outcome", "Exposed"}});
            const auto locs = surviving(bug, target);
            if (locs.empty()) {
                drops.push_back({{"bug_id", bug.id}, {"target_version", version_id(target)}});
            } else {
                by_version[target][bug.id] = location_list(locs);
            }
        }
        if (!bug.stop_reason.empty()) {
            chain.push_back({{"target_version", version_id(bug.stop_at)}, {"outcome", "NotExposed"},
                             {"reason", bug.stop_reason}});
        }
        chains[bug.id] = std::move(chain);
    }
    json truth;
    json bugs = json::object();
    for (auto& [v, b] : by_version) {
        bugs[version_id(v)] = std::move(b);
    }
    truth["bugs"] = std::move(bugs);
    truth["drop_events"] = std::move(drops);
    truth["chains"] = std::move(chains);
    out["ground_truth.json"] = truth.dump(2) + "\n";
    return out;
}

}  // namespace mfmine::corpus
