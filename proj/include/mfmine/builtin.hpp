#pragma once

// Hermetic toy language used by the builtin runner.
//
// Source files (`*.mf` under the source glob) declare one module:
//
//     module geometry
//     import util
//     fn area(w, h) = w * h
//     fn sign(x) {
//       x < 0 => -1
//       x == 0 => 0
//       _ => 1
//     }
//
// Test files are annotated (`#[unit ...]`); a test runs with the dependency
// closure of its unit loaded. Import units hold `import <module>`, fixtures
// `let <name> = <expr>`, helpers `fn ...` and tests `assert <expr>` lines.
// Values are 64-bit integers; comparisons yield 0 or 1. `#` starts a comment
// line.

#include "mfmine/file_tree.hpp"
#include "mfmine/runner.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace mfmine::builtin {

struct Options {
    std::string test_glob = "tests/**";
    std::string source_glob = "src/**";
    /// Expression nodes evaluated per test before it is a Timeout.
    std::uint64_t step_budget = 1'000'000;
    std::size_t max_depth = 1000;
};

struct Result {
    harness::TestStatus status = harness::TestStatus::Pass;
    std::string output;
};

/// A parsed workspace. Parsing never throws; problems surface as
/// CompileError results of the tests they affect.
class Program {
public:
    Program(const FileTree& tree, Options options);
    ~Program();
    Program(Program&&) noexcept;
    Program& operator=(Program&&) noexcept;

    Result run(std::string_view test_id) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience: parse `tree` and run one test.
Result run_test(const FileTree& tree, std::string_view test_id, const Options& options = {});

}  // namespace mfmine::builtin
