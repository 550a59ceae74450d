#include "mfmine/coverage.hpp"

#include "mfmine/error.hpp"
#include "mfmine/file_tree.hpp"
#include "mfmine/location.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace mfmine::tcm {

namespace fs = std::filesystem;

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::Passed:
        return "PASSED";
    case Verdict::Failed:
        return "FAILED";
    case Verdict::Error:
        return "ERROR";
    }
    return "?";
}

Verdict parse_verdict(std::string_view text) {
    for (auto v : {Verdict::Passed, Verdict::Failed, Verdict::Error}) {
        if (to_string(v) == text) {
            return v;
        }
    }
    throw std::invalid_argument("unknown verdict '" + std::string(text) + "'");
}

namespace {

bool has_space(std::string_view s) {
    return s.find_first_of(" \t\r\n") != std::string_view::npos;
}

}  // namespace

void validate(const CoverageMatrix& m) {
    if (m.rows.size() != m.tests.size()) {
        throw std::invalid_argument("one row per test is required");
    }
    std::set<std::string_view> names;
    for (const auto& e : m.elements) {
        if (e.empty() || e.find('\n') != std::string::npos || e.front() == '#') {
            throw std::invalid_argument("invalid element name '" + e + "'");
        }
        if (!names.insert(e).second) {
            throw std::invalid_argument("duplicate element '" + e + "'");
        }
    }
    for (const auto& t : m.tests) {
        if (t.test_id.empty() || has_space(t.test_id) || t.test_id.front() == '#') {
            throw std::invalid_argument("invalid test id '" + t.test_id + "'");
        }
    }
    for (const auto& row : m.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i] >= m.elements.size() || (i > 0 && row[i] <= row[i - 1])) {
                throw std::invalid_argument("rows must be ascending element indices");
            }
        }
    }
}

CoverageMatrix ingest_coverage_files(const std::map<std::string, std::string>& files) {
    // test id -> (file, content), ordered by id
    std::map<std::string, std::pair<std::string, const std::string*>> by_test;
    for (const auto& [file, content] : files) {
        const auto name = fs::path(file).filename().string();
        if (!name.ends_with(".cov")) {
            continue;
        }
        const auto id = name.substr(0, name.size() - 4);
        if (id.empty() || has_space(id)) {
            throw MalformedCoverage(file, 0, "file name does not give a usable test id");
        }
        if (!by_test.emplace(id, std::make_pair(file, &content)).second) {
            throw DuplicateTest(id);
        }
    }
    CoverageMatrix m;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& [id, source] : by_test) {
        const auto& [file, content] = source;
        const auto lines = split_lines(*content).lines;
        if (lines.empty()) {
            throw MalformedCoverage(file, 1, "missing verdict");
        }
        TestRow row{id, {}};
        try {
            row.verdict = parse_verdict(lines.front());
        } catch (const std::invalid_argument& e) {
            throw MalformedCoverage(file, 1, e.what());
        }
        std::set<std::size_t> covered;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) {
                continue;
            }
            FaultLocation loc;
            try {
                loc = parse_location(lines[i]);
            } catch (const std::invalid_argument& e) {
                throw MalformedCoverage(file, i + 1, e.what());
            }
            if (!is_valid(loc)) {
                throw MalformedCoverage(file, i + 1, "invalid location '" + lines[i] + "'");
            }
            const auto name = to_string(loc);
            const auto [it, inserted] = index.emplace(name, m.elements.size());
            if (inserted) {
                m.elements.push_back(name);
            }
            covered.insert(it->second);
        }
        m.tests.push_back(std::move(row));
        m.rows.emplace_back(covered.begin(), covered.end());
    }
    return m;
}

CoverageMatrix ingest_per_test_coverage(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw MalformedCoverage(dir.string(), 0, "not a directory");
    }
    return ingest_coverage_files(read_tree(dir));
}

std::string to_tcm(const CoverageMatrix& m) {
    std::string out = "#tests\n";
    for (const auto& t : m.tests) {
        out += t.test_id;
        out += ' ';
        out += to_string(t.verdict);
        out += '\n';
    }
    out += "#uuts\n";
    for (const auto& e : m.elements) {
        out += e;
        out += '\n';
    }
    out += "#matrix\n";
    for (const auto& row : m.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out += ' ';
            }
            out += std::to_string(row[i]);
        }
        out += '\n';
    }
    return out;
}

CoverageMatrix parse_tcm(std::string_view text) {
    const auto doc = split_lines(text);
    const auto& lines = doc.lines;
    CoverageMatrix m;
    enum class Section { None, Tests, Uuts, Matrix } section = Section::None;
    std::set<std::string> names;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        const auto no = i + 1;
        if (line == "#tests" || line == "#uuts" || line == "#matrix") {
            const auto next = line == "#tests" ? Section::Tests : line == "#uuts" ? Section::Uuts : Section::Matrix;
            if (static_cast<int>(next) != static_cast<int>(section) + 1) {
                throw TcmSyntax(no, "section " + line + " out of order");
            }
            section = next;
            continue;
        }
        switch (section) {
        case Section::None:
            throw TcmSyntax(no, "expected #tests");
        case Section::Tests: {
            const auto sp = line.rfind(' ');
            if (sp == std::string::npos || sp == 0) {
                throw TcmSyntax(no, "expected '<test_id> <VERDICT>'");
            }
            TestRow row{line.substr(0, sp), {}};
            if (has_space(row.test_id) || row.test_id.front() == '#') {
                throw TcmSyntax(no, "invalid test id '" + row.test_id + "'");
            }
            try {
                row.verdict = parse_verdict(std::string_view(line).substr(sp + 1));
            } catch (const std::invalid_argument& e) {
                throw TcmSyntax(no, e.what());
            }
            m.tests.push_back(std::move(row));
            break;
        }
        case Section::Uuts:
            if (line.empty()) {
                throw TcmSyntax(no, "empty element name");
            }
            if (!names.insert(line).second) {
                throw TcmSyntax(no, "duplicate element '" + line + "'");
            }
            m.elements.push_back(line);
            break;
        case Section::Matrix: {
            if (m.rows.size() == m.tests.size()) {
                throw TcmSyntax(no, "more matrix rows than tests");
            }
            std::vector<std::size_t> row;
            std::string_view rest(line);
            while (!rest.empty()) {
                const auto sp = rest.find(' ');
                const auto tok = rest.substr(0, sp);
                std::size_t value = 0;
                const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
                if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size()) {
                    throw TcmSyntax(no, "expected space-separated element indices");
                }
                if (value >= m.elements.size()) {
                    throw TcmSyntax(no, "element index " + std::to_string(value) + " out of range");
                }
                if (!row.empty() && value <= row.back()) {
                    throw TcmSyntax(no, "indices must be strictly ascending");
                }
                row.push_back(value);
                if (sp == std::string_view::npos) {
                    break;
                }
                rest.remove_prefix(sp + 1);
                if (rest.empty()) {
                    throw TcmSyntax(no, "trailing space");
                }
            }
            m.rows.push_back(std::move(row));
            break;
        }
        }
    }
    if (section != Section::Matrix) {
        throw TcmSyntax(lines.size() + 1, "missing section");
    }
    if (m.rows.size() != m.tests.size()) {
        throw TcmSyntax(lines.size() + 1, "expected " + std::to_string(m.tests.size()) + " matrix rows, found " +
                                              std::to_string(m.rows.size()));
    }
    return m;
}

std::string_view base_element(std::string_view name) {
    const auto pos = name.find(kFaultMarker);
    return pos == std::string_view::npos ? name : name.substr(0, pos);
}

CoverageMatrix identify_faults(const CoverageMatrix& matrix, const FaultTagging& faults) {
    std::map<std::string, std::size_t, std::less<>> by_base;
    std::vector<std::set<std::string>> ids(matrix.elements.size());
    for (std::size_t i = 0; i < matrix.elements.size(); ++i) {
        const auto& name = matrix.elements[i];
        by_base.emplace(std::string(base_element(name)), i);
        const auto pos = name.find(kFaultMarker);
        if (pos == std::string::npos) {
            continue;
        }
        std::string_view rest = std::string_view(name).substr(pos + kFaultMarker.size());
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            ids[i].emplace(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
    }
    for (const auto& [bug, names] : faults) {
        for (const auto& name : names) {
            const auto it = by_base.find(base_element(name));
            if (it == by_base.end()) {
                throw UnknownElement(bug, name);
            }
            ids[it->second].insert(bug);
        }
    }
    CoverageMatrix out = matrix;
    for (std::size_t i = 0; i < out.elements.size(); ++i) {
        if (ids[i].empty()) {
            continue;
        }
        std::string name(base_element(out.elements[i]));
        name += kFaultMarker;
        bool first = true;
        for (const auto& id : ids[i]) {
            if (!first) {
                name += ',';
            }
            name += id;
            first = false;
        }
        out.elements[i] = std::move(name);
    }
    return out;
}

FaultTagging load_tagging(const fs::path& dir) {
    constexpr std::string_view prefix = "bug.locations.";
    FaultTagging out;
    if (!fs::is_directory(dir)) {
        throw MalformedCoverage(dir.string(), 0, "not a directory");
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (!entry.is_regular_file() || !name.starts_with(prefix) || name.size() == prefix.size()) {
            continue;
        }
        auto& names = out[name.substr(prefix.size())];
        const auto lines = split_lines(read_file(entry.path())).lines;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].empty()) {
                continue;
            }
            try {
                names.push_back(to_string(parse_location(lines[i])));
            } catch (const std::invalid_argument& e) {
                throw MalformedCoverage(entry.path().string(), i + 1, e.what());
            }
        }
    }
    return out;
}

}  // namespace mfmine::tcm
