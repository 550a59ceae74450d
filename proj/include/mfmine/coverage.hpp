#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mfmine::tcm {

enum class Verdict { Passed, Failed, Error };

std::string_view to_string(Verdict verdict);
/// Throws std::invalid_argument for anything but PASSED, FAILED or ERROR.
Verdict parse_verdict(std::string_view text);

struct TestRow {
    std::string test_id;
    Verdict verdict = Verdict::Passed;

    friend bool operator==(const TestRow&, const TestRow&) = default;
};

/// Test coverage matrix: which elements (source lines) each test executes.
struct CoverageMatrix {
    std::vector<TestRow> tests;
    std::vector<std::string> elements;
    /// rows[i] lists, ascending and without duplicates, the elements test i covers.
    std::vector<std::vector<std::size_t>> rows;

    friend bool operator==(const CoverageMatrix&, const CoverageMatrix&) = default;
};

/// Throws std::invalid_argument when an invariant is broken.
void validate(const CoverageMatrix& matrix);

/// bug id -> element names (`path:line`) belonging to that bug.
using FaultTagging = std::map<std::string, std::vector<std::string>>;

constexpr std::string_view kFaultMarker = "|FAULT:";

/// Reads every `<test_id>.cov` file below `dir`. Tests are ordered by id,
/// elements by first appearance in that order.
CoverageMatrix ingest_per_test_coverage(const std::filesystem::path& dir);

/// Same, from (file name, content) pairs.
CoverageMatrix ingest_coverage_files(const std::map<std::string, std::string>& files);

std::string to_tcm(const CoverageMatrix& matrix);
CoverageMatrix parse_tcm(std::string_view text);

/// Element name without any fault annotation.
std::string_view base_element(std::string_view name);

/// Appends `|FAULT:<ids>` to every tagged element (ids sorted, merged with an
/// existing annotation). Throws UnknownElement for names not in the matrix.
CoverageMatrix identify_faults(const CoverageMatrix& matrix, const FaultTagging& faults);

/// Reads `bug.locations.<bugId>` files from `dir`.
FaultTagging load_tagging(const std::filesystem::path& dir);

}  // namespace mfmine::tcm
