#pragma once

#include "mfmine/diff.hpp"
#include "mfmine/file_tree.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mfmine::transplant {

enum class UnitKind { Test, Fixture, Helper, Import };

std::string_view to_string(UnitKind kind);
UnitKind parse_unit_kind(std::string_view text);

/// A dependency-closable fragment of a test file. `body` holds the unit's
/// lines exactly as they appear in the file, header included.
struct TestUnit {
    std::string unit_id;
    UnitKind kind = UnitKind::Test;
    std::string file;
    std::vector<std::string> body;
    std::vector<std::string> deps;

    friend bool operator==(const TestUnit&, const TestUnit&) = default;
};

struct TestSuiteModel {
    std::vector<TestUnit> units;
    /// file -> unit ids in file order
    std::map<std::string, std::vector<std::string>> files;

    const TestUnit* find(std::string_view unit_id) const;

    /// (unit, dep) pairs whose dep names no unit in the model.
    std::vector<std::pair<std::string, std::string>> unresolved() const;
};

struct RegexRule {
    /// ECMAScript regex matched against a whole line; group 1 is the unit id.
    std::string pattern;
    UnitKind kind = UnitKind::Test;
};

struct ExtractorConfig {
    enum class Kind { Annotation, Regex };

    Kind kind = Kind::Annotation;
    /// Which files of the tree belong to the test suite.
    std::string glob = "tests/**";
    /// Regex extractor only: a unit starts at a line matching a rule and
    /// continues over blank lines and lines indented deeper than its header.
    /// Deps are the other unit ids occurring as whole words in the body.
    std::vector<RegexRule> rules;
};

/// Units of one annotated file, delimited by `#[unit id=... kind=... deps=...]`
/// marker lines. Text before the first marker is not part of any unit.
std::vector<TestUnit> parse_annotated_file(const std::string& path, std::string_view content);

TestSuiteModel build_suite_model(const FileTree& tree, const ExtractorConfig& extractor);

/// Roots plus their transitive dependencies, dependencies first; ties are
/// broken by unit id. Dependencies naming no unit are skipped.
std::vector<TestUnit> extract_closure(const TestSuiteModel& model, const std::vector<std::string>& roots);

enum class SpliceActionKind { Inserted, ReusedIdentical, RenamedOnCollision };

std::string_view to_string(SpliceActionKind kind);

struct SpliceAction {
    std::string unit_id;
    SpliceActionKind action = SpliceActionKind::Inserted;
    /// Id of the unit in the spliced tree (differs only on rename).
    std::string final_id;

    friend bool operator==(const SpliceAction&, const SpliceAction&) = default;
};

struct SpliceResult {
    FileTree tree;
    /// Edits over test files only.
    diff::Diff edits;
    std::vector<SpliceAction> report;

    /// Id under which `unit_id` is reachable after splicing.
    std::string final_id(std::string_view unit_id) const;
};

/// Suffix applied to units renamed on collision.
std::string rename_suffix(std::string_view bug_id);

/// Replaces whole-word occurrences of `from` with `to`.
std::string replace_word(std::string_view text, std::string_view from, std::string_view to);

/// Appends `units` (dependency ordered) to their files in `target`. Identical
/// units are reused; a same-id unit with a different body is inserted under
/// `<id>__mf_<bug_id>` and references to it inside the batch are rewritten.
/// Splicing the same batch twice leaves the tree unchanged the second time.
SpliceResult splice(const FileTree& target, const TestSuiteModel& target_model, const std::vector<TestUnit>& units,
                    std::string_view bug_id);

}  // namespace mfmine::transplant
