#pragma once

#include "mfmine/file_tree.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mfmine::harness {

enum class RunnerKind { Builtin, Command };

/// Regex (ECMAScript) replaced by `replacement` before outputs are compared.
struct ScrubPattern {
    std::string pattern;
    std::string replacement;

    friend bool operator==(const ScrubPattern&, const ScrubPattern&) = default;
};

/// Absolute paths, hex addresses, ISO timestamps and splice rename suffixes.
std::vector<ScrubPattern> default_scrub_patterns();

constexpr double kDefaultThreshold = 0.9;

struct RunnerConfig {
    RunnerKind kind = RunnerKind::Builtin;

    // Command runner templates. Placeholders {workdir}, {version_id},
    // {test_id} and {scratch} are substituted shell-quoted.
    std::string checkout_template;
    std::string build_template;
    std::string run_test_template;

    double timeout_seconds = 60.0;
    std::map<std::string, std::string> env;
    unsigned max_parallel = 1;

    double threshold = kDefaultThreshold;
    std::vector<ScrubPattern> scrub = default_scrub_patterns();

    // Builtin runner: where annotated test files and source modules live.
    std::string test_glob = "tests/**";
    std::string source_glob = "src/**";
};

/// Throws std::invalid_argument when the config breaks its invariants.
void validate(const RunnerConfig& config);

enum class TestStatus { Pass, Fail, CompileError, RuntimeError, Timeout };

std::string_view to_string(TestStatus status);
TestStatus parse_status(std::string_view text);

inline bool is_failing(TestStatus s) {
    return s != TestStatus::Pass;
}

constexpr std::string_view kNoOutput = "<no output>";

struct TestOutcome {
    std::string test_id;
    TestStatus status = TestStatus::Pass;
    std::string output;
    std::int64_t duration_ms = 0;
};

/// Runs each test in `workspace`; one outcome per test in input order. When
/// a build template is configured it runs once first, and a build failure
/// turns every test into CompileError. Throws HarnessFailure when a command
/// cannot be spawned.
std::vector<TestOutcome> run_tests(const RunnerConfig& config, const std::filesystem::path& workspace,
                                   const std::vector<std::string>& tests, std::string_view version_id = {});

/// LF-normalized, scrubbed output split into lines (no trailing empty line).
std::vector<std::string> normalize_output(std::string_view text, const std::vector<ScrubPattern>& scrub);

/// 2*LCS / (|a| + |b|) over normalized lines; 1.0 when both are empty.
double similarity(std::string_view a, std::string_view b,
                  const std::vector<ScrubPattern>& scrub = default_scrub_patterns());

/// Same failing status kind and similar enough output.
bool same_failure(const TestOutcome& original, const TestOutcome& transplanted, double threshold,
                  const std::vector<ScrubPattern>& scrub = default_scrub_patterns());

/// Runs tests against an in-memory tree by materializing it in a scratch
/// directory.
class Harness {
public:
    explicit Harness(RunnerConfig config);

    const RunnerConfig& config() const noexcept { return config_; }

    std::vector<TestOutcome> run(const std::filesystem::path& workspace, const std::vector<std::string>& tests,
                                 std::string_view version_id = {}) const;
    std::vector<TestOutcome> run(const FileTree& tree, const std::vector<std::string>& tests,
                                 std::string_view version_id = {}) const;

private:
    RunnerConfig config_;
};

}  // namespace mfmine::harness
