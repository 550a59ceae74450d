#include "mfmine/runner.hpp"

#include "mfmine/builtin.hpp"
#include "mfmine/error.hpp"
#include "mfmine/lcs.hpp"
#include "mfmine/process.hpp"

#include <atomic>
#include <exception>
#include <regex>
#include <stdexcept>
#include <thread>

namespace mfmine::harness {

namespace fs = std::filesystem;

std::vector<ScrubPattern> default_scrub_patterns() {
    return {
        {R"((^|[\s'"=(\[])/[^\s'":,)\]]+)", "$1<path>"},
        {R"(0x[0-9a-fA-F]+)", "<addr>"},
        {R"(\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:?\d{2})?)", "<time>"},
        {R"(__mf_\w+)", ""},
    };
}

void validate(const RunnerConfig& config) {
    if (!(config.timeout_seconds > 0)) {
        throw std::invalid_argument("timeout must be positive");
    }
    if (config.max_parallel < 1) {
        throw std::invalid_argument("max_parallel must be at least 1");
    }
    if (!(config.threshold > 0 && config.threshold <= 1)) {
        throw std::invalid_argument("threshold must be in (0, 1]");
    }
    if (config.kind == RunnerKind::Command && config.run_test_template.empty()) {
        throw std::invalid_argument("command runner needs a run_test template");
    }
    for (const auto& p : config.scrub) {
        try {
            std::regex re(p.pattern);
        } catch (const std::regex_error& e) {
            throw std::invalid_argument("bad scrub pattern '" + p.pattern + "': " + e.what());
        }
    }
}

std::string_view to_string(TestStatus status) {
    switch (status) {
    case TestStatus::Pass:
        return "PASS";
    case TestStatus::Fail:
        return "FAIL";
    case TestStatus::CompileError:
        return "COMPILE_ERROR";
    case TestStatus::RuntimeError:
        return "RUNTIME_ERROR";
    case TestStatus::Timeout:
        return "TIMEOUT";
    }
    return "?";
}

TestStatus parse_status(std::string_view text) {
    for (auto s : {TestStatus::Pass, TestStatus::Fail, TestStatus::CompileError, TestStatus::RuntimeError,
                   TestStatus::Timeout}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw std::invalid_argument("unknown test status '" + std::string(text) + "'");
}

namespace {

std::string lf_normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            out += '\n';
            if (i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
        } else {
            out += text[i];
        }
    }
    return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    if (from.empty()) {
        return;
    }
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
}

TestStatus status_for_exit(const ProcessResult& r) {
    if (r.timed_out) {
        return TestStatus::Timeout;
    }
    switch (r.exit_code) {
    case 0:
        return TestStatus::Pass;
    case 1:
        return TestStatus::Fail;
    case 2:
        return TestStatus::CompileError;
    case 127:
        throw HarnessFailure("test command not found (exit 127): " + r.output);
    default:
        return TestStatus::RuntimeError;
    }
}

/// Output as stored: LF-normalized with workspace paths made relocatable.
std::string tidy_output(std::string text, const fs::path& workspace, const fs::path& scratch) {
    text = lf_normalize(text);
    std::error_code ec;
    const auto canon = fs::weakly_canonical(workspace, ec);
    if (!ec) {
        replace_all(text, canon.string(), "{workdir}");
    }
    replace_all(text, fs::absolute(workspace).string(), "{workdir}");
    if (!scratch.empty()) {
        replace_all(text, scratch.string(), "{scratch}");
    }
    return text;
}

void finish(TestOutcome& o) {
    if (is_failing(o.status) && o.output.empty()) {
        o.output = std::string(kNoOutput);
    }
}

std::vector<TestOutcome> run_builtin(const RunnerConfig& config, const FileTree& tree,
                                     const std::vector<std::string>& tests) {
    const builtin::Program program(tree, {config.test_glob, config.source_glob});
    std::vector<TestOutcome> out;
    out.reserve(tests.size());
    for (const auto& id : tests) {
        const auto t0 = std::chrono::steady_clock::now();
        auto r = program.run(id);
        TestOutcome o{id, r.status, std::move(r.output), 0};
        o.duration_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        finish(o);
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<TestOutcome> run_command(const RunnerConfig& config, const fs::path& workspace,
                                     const std::vector<std::string>& tests, std::string_view version_id) {
    const auto workdir = fs::absolute(workspace).string();
    std::vector<TestOutcome> out(tests.size());

    if (!config.build_template.empty()) {
        TempDir scratch("mfmine-build");
        const auto cmd = substitute(config.build_template, {{"workdir", workdir},
                                                            {"version_id", std::string(version_id)},
                                                            {"scratch", scratch.path().string()}});
        const auto r = run_shell(cmd, workspace, config.env, config.timeout_seconds);
        if (r.exit_code == 127 && !r.timed_out) {
            throw HarnessFailure("build command not found (exit 127): " + r.output);
        }
        if (r.timed_out || r.exit_code != 0) {
            const auto text = tidy_output(r.output, workspace, scratch.path());
            for (std::size_t i = 0; i < tests.size(); ++i) {
                out[i] = {tests[i], r.timed_out ? TestStatus::Timeout : TestStatus::CompileError, text, r.duration_ms};
                finish(out[i]);
            }
            return out;
        }
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tests.size());
    const auto worker = [&] {
        for (std::size_t i = next++; i < tests.size(); i = next++) {
            try {
                TempDir scratch("mfmine-test");
                const auto cmd = substitute(config.run_test_template, {{"workdir", workdir},
                                                                       {"version_id", std::string(version_id)},
                                                                       {"test_id", tests[i]},
                                                                       {"scratch", scratch.path().string()}});
                const auto r = run_shell(cmd, workspace, config.env, config.timeout_seconds);
                out[i] = {tests[i], status_for_exit(r), tidy_output(r.output, workspace, scratch.path()),
                          r.duration_ms};
                finish(out[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto n = std::min<std::size_t>(config.max_parallel, tests.size());
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n; ++t) {
            pool.emplace_back(worker);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

}  // namespace

std::vector<TestOutcome> run_tests(const RunnerConfig& config, const fs::path& workspace,
                                   const std::vector<std::string>& tests, std::string_view version_id) {
    try {
        validate(config);
    } catch (const std::invalid_argument& e) {
        throw HarnessFailure(std::string("invalid runner config: ") + e.what());
    }
    if (config.kind == RunnerKind::Builtin) {
        return run_builtin(config, read_tree(workspace), tests);
    }
    return run_command(config, workspace, tests, version_id);
}

std::vector<std::string> normalize_output(std::string_view text, const std::vector<ScrubPattern>& scrub) {
    std::vector<std::regex> res;
    res.reserve(scrub.size());
    for (const auto& p : scrub) {
        res.emplace_back(p.pattern);
    }
    const auto normalized = lf_normalize(text);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < normalized.size()) {
        auto end = normalized.find('\n', start);
        if (end == std::string::npos) {
            end = normalized.size();
        }
        std::string line = normalized.substr(start, end - start);
        for (std::size_t i = 0; i < res.size(); ++i) {
            line = std::regex_replace(line, res[i], scrub[i].replacement);
        }
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

double similarity(std::string_view a, std::string_view b, const std::vector<ScrubPattern>& scrub) {
    const auto la = normalize_output(a, scrub);
    const auto lb = normalize_output(b, scrub);
    if (la.empty() && lb.empty()) {
        return 1.0;
    }
    const auto common = lcs_length(la, lb);
    return 2.0 * static_cast<double>(common) / static_cast<double>(la.size() + lb.size());
}

bool same_failure(const TestOutcome& original, const TestOutcome& transplanted, double threshold,
                  const std::vector<ScrubPattern>& scrub) {
    return original.status == transplanted.status && is_failing(original.status) &&
           similarity(original.output, transplanted.output, scrub) >= threshold;
}

Harness::Harness(RunnerConfig config) : config_(std::move(config)) {
    try {
        validate(config_);
    } catch (const std::invalid_argument& e) {
        throw HarnessFailure(std::string("invalid runner config: ") + e.what());
    }
}

std::vector<TestOutcome> Harness::run(const fs::path& workspace, const std::vector<std::string>& tests,
                                      std::string_view version_id) const {
    return run_tests(config_, workspace, tests, version_id);
}

std::vector<TestOutcome> Harness::run(const FileTree& tree, const std::vector<std::string>& tests,
                                      std::string_view version_id) const {
    if (config_.kind == RunnerKind::Builtin) {
        return run_builtin(config_, tree, tests);
    }
    TempDir dir("mfmine-ws");
    write_tree(dir.path(), tree);
    return run_command(config_, dir.path(), tests, version_id);
}

}  // namespace mfmine::harness
