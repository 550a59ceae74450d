#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace mfmine {

struct ProcessResult {
    int exit_code = 0;
    bool timed_out = false;
    /// stdout and stderr interleaved as produced.
    std::string output;
    std::int64_t duration_ms = 0;
};

/// Runs `command` through /bin/sh in `cwd` with `env` layered over the
/// current environment. The process group is killed once `timeout_seconds`
/// of wall clock elapse. Throws HarnessFailure when nothing could be spawned.
ProcessResult run_shell(const std::string& command, const std::filesystem::path& cwd,
                        const std::map<std::string, std::string>& env, double timeout_seconds);

std::string shell_quote(std::string_view value);

/// Replaces `{name}` for every key in `values` with the shell-quoted value.
/// Unknown placeholders are left untouched.
std::string substitute(std::string_view templ, const std::map<std::string, std::string>& values);

}  // namespace mfmine
