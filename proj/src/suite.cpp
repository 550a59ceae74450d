#include "mfmine/suite.hpp"

#include "mfmine/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <queue>
#include <regex>
#include <set>
#include <stdexcept>

namespace mfmine::transplant {

std::string_view to_string(UnitKind kind) {
    switch (kind) {
    case UnitKind::Test:
        return "test";
    case UnitKind::Fixture:
        return "fixture";
    case UnitKind::Helper:
        return "helper";
    case UnitKind::Import:
        return "import";
    }
    return "?";
}

UnitKind parse_unit_kind(std::string_view text) {
    for (auto k : {UnitKind::Test, UnitKind::Fixture, UnitKind::Helper, UnitKind::Import}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw std::invalid_argument("unknown unit kind '" + std::string(text) + "'");
}

std::string_view to_string(SpliceActionKind kind) {
    switch (kind) {
    case SpliceActionKind::Inserted:
        return "Inserted";
    case SpliceActionKind::ReusedIdentical:
        return "ReusedIdentical";
    case SpliceActionKind::RenamedOnCollision:
        return "RenamedOnCollision";
    }
    return "?";
}

const TestUnit* TestSuiteModel::find(std::string_view unit_id) const {
    for (const auto& u : units) {
        if (u.unit_id == unit_id) {
            return &u;
        }
    }
    return nullptr;
}

std::vector<std::pair<std::string, std::string>> TestSuiteModel::unresolved() const {
    std::set<std::string_view> ids;
    for (const auto& u : units) {
        ids.insert(u.unit_id);
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& u : units) {
        for (const auto& d : u.deps) {
            if (!ids.contains(d)) {
                out.emplace_back(u.unit_id, d);
            }
        }
    }
    return out;
}

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_identifier(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return is_word_char(c) || c == '.'; });
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::size_t indent_of(std::string_view s) {
    std::size_t n = 0;
    while (n < s.size() && (s[n] == ' ' || s[n] == '\t')) {
        ++n;
    }
    return n;
}

void strip_trailing_blanks(std::vector<std::string>& body) {
    while (!body.empty() && is_blank(body.back())) {
        body.pop_back();
    }
}

std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(sep, start);
        if (end == std::string_view::npos) {
            end = s.size();
        }
        out.emplace_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

std::vector<TestUnit> parse_regex_file(const std::string& path, std::string_view content,
                                       const std::vector<std::pair<std::regex, UnitKind>>& rules) {
    const auto lines = split_lines(content).lines;
    std::vector<TestUnit> units;
    std::size_t header_indent = 0;
    bool open = false;
    for (const auto& line : lines) {
        bool started = false;
        for (const auto& [re, kind] : rules) {
            std::smatch m;
            if (std::regex_match(line, m, re)) {
                if (m.size() < 2 || !m[1].matched || !is_identifier(m[1].str())) {
                    throw ExtractorFailure(path, "rule matched '" + line + "' without a unit id in group 1");
                }
                if (open) {
                    strip_trailing_blanks(units.back().body);
                }
                units.push_back({m[1].str(), kind, path, {line}, {}});
                header_indent = indent_of(line);
                open = true;
                started = true;
                break;
            }
        }
        if (started) {
            continue;
        }
        if (open && (is_blank(line) || indent_of(line) > header_indent)) {
            units.back().body.push_back(line);
        } else if (open) {
            strip_trailing_blanks(units.back().body);
            open = false;
        }
    }
    if (open) {
        strip_trailing_blanks(units.back().body);
    }
    return units;
}

/// Deps for the regex extractor: other unit ids mentioned as whole words.
void infer_deps(std::vector<TestUnit>& units) {
    std::set<std::string> ids;
    for (const auto& u : units) {
        ids.insert(u.unit_id);
    }
    for (auto& u : units) {
        std::set<std::string> deps;
        for (std::size_t li = 0; li < u.body.size(); ++li) {
            const auto& line = u.body[li];
            std::size_t i = 0;
            while (i < line.size()) {
                if (!is_word_char(line[i])) {
                    ++i;
                    continue;
                }
                std::size_t j = i;
                while (j < line.size() && (is_word_char(line[j]) || line[j] == '.')) {
                    ++j;
                }
                std::string word = line.substr(i, j - i);
                while (!word.empty() && word.back() == '.') {
                    word.pop_back();
                }
                if (word != u.unit_id && ids.contains(word)) {
                    deps.insert(word);
                }
                i = j;
            }
        }
        u.deps.assign(deps.begin(), deps.end());
    }
}

}  // namespace

std::vector<TestUnit> parse_annotated_file(const std::string& path, std::string_view content) {
    static const std::regex marker(R"(^\s*#\[unit(\s+[^\]]*)?\]\s*$)");
    const auto lines = split_lines(content).lines;
    std::vector<TestUnit> units;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        const auto trimmed = std::string_view(line).substr(indent_of(line));
        if (!trimmed.starts_with("#[unit")) {
            if (!units.empty()) {
                units.back().body.push_back(line);
            }
            continue;
        }
        const std::string where = "line " + std::to_string(i + 1);
        std::smatch m;
        if (!std::regex_match(line, m, marker)) {
            throw ExtractorFailure(path, where + ": malformed unit marker");
        }
        if (!units.empty()) {
            strip_trailing_blanks(units.back().body);
        }
        TestUnit unit;
        unit.file = path;
        unit.body.push_back(line);
        bool have_id = false;
        std::set<std::string> seen;
        const std::string attrs = m[1].str();
        std::size_t p = 0;
        while (p < attrs.size()) {
            while (p < attrs.size() && std::isspace(static_cast<unsigned char>(attrs[p]))) {
                ++p;
            }
            if (p >= attrs.size()) {
                break;
            }
            auto q = p;
            while (q < attrs.size() && !std::isspace(static_cast<unsigned char>(attrs[q]))) {
                ++q;
            }
            const std::string attr = attrs.substr(p, q - p);
            p = q;
            const auto eq = attr.find('=');
            if (eq == std::string::npos) {
                throw ExtractorFailure(path, where + ": attribute '" + attr + "' needs a value");
            }
            const auto key = attr.substr(0, eq);
            const auto value = attr.substr(eq + 1);
            if (!seen.insert(key).second) {
                throw ExtractorFailure(path, where + ": repeated attribute '" + key + "'");
            }
            if (key == "id") {
                if (!is_identifier(value)) {
                    throw ExtractorFailure(path, where + ": invalid unit id '" + value + "'");
                }
                unit.unit_id = value;
                have_id = true;
            } else if (key == "kind") {
                try {
                    unit.kind = parse_unit_kind(value);
                } catch (const std::invalid_argument& e) {
                    throw ExtractorFailure(path, where + ": " + e.what());
                }
            } else if (key == "deps") {
                for (auto& d : split_on(value, ',')) {
                    if (!is_identifier(d)) {
                        throw ExtractorFailure(path, where + ": invalid dependency '" + d + "'");
                    }
                    unit.deps.push_back(std::move(d));
                }
            } else {
                throw ExtractorFailure(path, where + ": unknown attribute '" + key + "'");
            }
        }
        if (!have_id) {
            throw ExtractorFailure(path, where + ": unit marker without id");
        }
        if (!ids.insert(unit.unit_id).second) {
            throw ExtractorFailure(path, where + ": duplicate unit id '" + unit.unit_id + "'");
        }
        units.push_back(std::move(unit));
    }
    if (!units.empty()) {
        strip_trailing_blanks(units.back().body);
    }
    return units;
}

TestSuiteModel build_suite_model(const FileTree& tree, const ExtractorConfig& extractor) {
    std::vector<std::pair<std::regex, UnitKind>> rules;
    if (extractor.kind == ExtractorConfig::Kind::Regex) {
        if (extractor.rules.empty()) {
            throw ExtractorFailure("<config>", "regex extractor without rules");
        }
        for (const auto& r : extractor.rules) {
            try {
                rules.emplace_back(std::regex(r.pattern), r.kind);
            } catch (const std::regex_error& e) {
                throw ExtractorFailure("<config>", "bad rule '" + r.pattern + "': " + e.what());
            }
        }
    }
    TestSuiteModel model;
    std::map<std::string, std::string> owner;
    for (const auto& [path, content] : tree) {
        if (!glob_match(extractor.glob, path) || looks_binary(content)) {
            continue;
        }
        auto units = extractor.kind == ExtractorConfig::Kind::Annotation ? parse_annotated_file(path, content)
                                                                          : parse_regex_file(path, content, rules);
        auto& order = model.files[path];
        for (auto& u : units) {
            const auto [it, inserted] = owner.emplace(u.unit_id, path);
            if (!inserted) {
                throw ExtractorFailure(path, "unit '" + u.unit_id + "' is also defined in " + it->second);
            }
            order.push_back(u.unit_id);
            model.units.push_back(std::move(u));
        }
    }
    if (extractor.kind == ExtractorConfig::Kind::Regex) {
        infer_deps(model.units);
    }
    return model;
}

std::vector<TestUnit> extract_closure(const TestSuiteModel& model, const std::vector<std::string>& roots) {
    std::map<std::string, const TestUnit*> by_id;
    for (const auto& u : model.units) {
        by_id.emplace(u.unit_id, &u);
    }
    for (const auto& r : roots) {
        if (!by_id.contains(r)) {
            throw UnknownUnit(r);
        }
    }

    // Reachability with cycle detection (0 = new, 1 = on stack, 2 = done).
    std::map<std::string, int> state;
    std::vector<std::string> stack;
    const auto visit = [&](auto&& self, const std::string& id) -> void {
        state[id] = 1;
        stack.push_back(id);
        for (const auto& d : by_id.at(id)->deps) {
            if (!by_id.contains(d)) {
                continue;
            }
            const int s = state[d];
            if (s == 1) {
                std::vector<std::string> cycle(std::find(stack.begin(), stack.end(), d), stack.end());
                cycle.push_back(d);
                throw CyclicDependency(std::move(cycle));
            }
            if (s == 0) {
                self(self, d);
            }
        }
        stack.pop_back();
        state[id] = 2;
    };
    for (const auto& r : roots) {
        if (state[r] == 0) {
            visit(visit, r);
        }
    }

    // Kahn over the reachable subgraph, smallest ready id first.
    std::map<std::string, std::size_t> pending;
    std::map<std::string, std::vector<std::string>> dependents;
    for (const auto& [id, s] : state) {
        std::set<std::string> deps;
        for (const auto& d : by_id.at(id)->deps) {
            if (by_id.contains(d)) {
                deps.insert(d);
            }
        }
        pending[id] = deps.size();
        for (const auto& d : deps) {
            dependents[d].push_back(id);
        }
    }
    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [id, n] : pending) {
        if (n == 0) {
            ready.push(id);
        }
    }
    std::vector<TestUnit> out;
    while (!ready.empty()) {
        const auto id = ready.top();
        ready.pop();
        out.push_back(*by_id.at(id));
        for (const auto& dep : dependents[id]) {
            if (--pending[dep] == 0) {
                ready.push(dep);
            }
        }
    }
    return out;
}

std::string rename_suffix(std::string_view bug_id) {
    std::string out = "__mf_";
    for (char c : bug_id) {
        out += is_word_char(c) ? c : '_';
    }
    return out;
}

std::string replace_word(std::string_view text, std::string_view from, std::string_view to) {
    if (from.empty()) {
        return std::string(text);
    }
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto hit = text.find(from, pos);
        if (hit == std::string_view::npos) {
            break;
        }
        const auto end = hit + from.size();
        const bool left_ok = hit == 0 || !is_word_char(text[hit - 1]);
        const bool right_ok = end >= text.size() || !is_word_char(text[end]);
        out.append(text.substr(pos, hit - pos));
        if (left_ok && right_ok) {
            out.append(to);
        } else {
            out.append(from);
        }
        pos = end;
    }
    out.append(text.substr(pos));
    return out;
}

std::string SpliceResult::final_id(std::string_view unit_id) const {
    for (const auto& a : report) {
        if (a.unit_id == unit_id) {
            return a.final_id;
        }
    }
    return std::string(unit_id);
}

namespace {

TestUnit rename_unit(const TestUnit& unit, const std::string& from, const std::string& to) {
    TestUnit out = unit;
    for (auto& line : out.body) {
        line = replace_word(line, from, to);
    }
    for (auto& d : out.deps) {
        if (d == from) {
            d = to;
        }
    }
    if (out.unit_id == from) {
        out.unit_id = to;
    }
    return out;
}

}  // namespace

SpliceResult splice(const FileTree& target, const TestSuiteModel& target_model, const std::vector<TestUnit>& units,
                    std::string_view bug_id) {
    SpliceResult result;
    result.tree = target;
    std::vector<std::pair<std::string, std::string>> renames;
    std::set<std::string> taken;
    for (const auto& u : target_model.units) {
        taken.insert(u.unit_id);
    }
    std::set<std::string> touched;

    for (const auto& original : units) {
        TestUnit unit = original;
        for (const auto& [from, to] : renames) {
            if (from != unit.unit_id) {
                unit = rename_unit(unit, from, to);
            }
        }

        const auto* existing = target_model.find(unit.unit_id);
        if (existing != nullptr && existing->body == unit.body) {
            result.report.push_back({original.unit_id, SpliceActionKind::ReusedIdentical, unit.unit_id});
            continue;
        }
        SpliceActionKind action = SpliceActionKind::Inserted;
        if (existing != nullptr) {
            action = SpliceActionKind::RenamedOnCollision;
            const std::string base = unit.unit_id + rename_suffix(bug_id);
            std::string candidate = base;
            for (int n = 2;; ++n) {
                const auto renamed = rename_unit(unit, unit.unit_id, candidate);
                const auto* clash = target_model.find(candidate);
                if (clash == nullptr && !taken.contains(candidate)) {
                    renames.emplace_back(unit.unit_id, candidate);
                    unit = renamed;
                    break;
                }
                if (clash != nullptr && clash->body == renamed.body) {
                    // Already spliced by an earlier run.
                    renames.emplace_back(unit.unit_id, candidate);
                    unit = renamed;
                    existing = clash;
                    break;
                }
                candidate = base + "_" + std::to_string(n);
            }
            if (existing != nullptr && existing->unit_id == unit.unit_id) {
                result.report.push_back({original.unit_id, action, unit.unit_id});
                continue;
            }
        }
        taken.insert(unit.unit_id);
        auto& content = result.tree[unit.file];
        if (!content.empty() && content.back() != '\n') {
            content += '\n';
        }
        // keep a blank line between units, as hand-written suites do
        if (!content.empty() && !content.ends_with("\n\n")) {
            content += '\n';
        }
        for (const auto& line : unit.body) {
            content += line;
            content += '\n';
        }
        touched.insert(unit.file);
        result.report.push_back({original.unit_id, action, unit.unit_id});
    }

    FileTree before;
    FileTree after;
    for (const auto& path : touched) {
        if (const auto it = target.find(path); it != target.end()) {
            before.emplace(path, it->second);
        }
        after.emplace(path, result.tree.at(path));
    }
    result.edits = diff::diff_trees(before, after);
    return result;
}

}  // namespace mfmine::transplant
