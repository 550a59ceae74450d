#include "mfmine/process.hpp"

#include "mfmine/error.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace mfmine {

namespace {

struct Pipe {
    int fds[2] = {-1, -1};

    explicit Pipe(int flags = 0) {
        if (::pipe2(fds, flags) != 0) {
            throw HarnessFailure(std::string("pipe: ") + std::strerror(errno));
        }
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;

    void close_read() {
        if (fds[0] >= 0) {
            ::close(fds[0]);
            fds[0] = -1;
        }
    }
    void close_write() {
        if (fds[1] >= 0) {
            ::close(fds[1]);
            fds[1] = -1;
        }
    }
};

std::vector<std::string> build_environment(const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> merged;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        std::string_view kv(*e);
        const auto eq = kv.find('=');
        if (eq != std::string_view::npos) {
            merged[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
        }
    }
    for (const auto& [k, v] : overrides) {
        merged[k] = v;
    }
    std::vector<std::string> out;
    out.reserve(merged.size());
    for (const auto& [k, v] : merged) {
        out.push_back(k + "=" + v);
    }
    return out;
}

}  // namespace

ProcessResult run_shell(const std::string& command, const std::filesystem::path& cwd,
                        const std::map<std::string, std::string>& env, double timeout_seconds) {
    // Everything the child touches is prepared before fork.
    const auto env_strings = build_environment(env);
    std::vector<char*> envp;
    envp.reserve(env_strings.size() + 1);
    for (const auto& s : env_strings) {
        envp.push_back(const_cast<char*>(s.c_str()));
    }
    envp.push_back(nullptr);
    const std::string cwd_str = cwd.string();
    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};

    Pipe out;
    Pipe status(O_CLOEXEC);  // carries errno if chdir/exec fails

    const auto started = std::chrono::steady_clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) {
        throw HarnessFailure(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(out.fds[1], STDOUT_FILENO);
        ::dup2(out.fds[1], STDERR_FILENO);
        ::close(out.fds[0]);
        ::close(out.fds[1]);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) {
            ::dup2(devnull, STDIN_FILENO);
            ::close(devnull);
        }
        if (::chdir(cwd_str.c_str()) == 0) {
            ::execve("/bin/sh", const_cast<char* const*>(argv), envp.data());
        }
        const int err = errno;
        [[maybe_unused]] auto n = ::write(status.fds[1], &err, sizeof err);
        ::_exit(127);
    }
    out.close_write();
    status.close_write();

    ProcessResult result;
    const auto deadline = started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                        std::chrono::duration<double>(timeout_seconds));
    char buf[4096];
    bool open = true;
    while (open) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            ::kill(-pid, SIGKILL);
            break;
        }
        const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        pollfd pfd{out.fds[0], POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(wait_ms + 1, 1000)));
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            ::kill(-pid, SIGKILL);
            break;
        }
        if (rc == 0) {
            continue;
        }
        const auto n = ::read(out.fds[0], buf, sizeof buf);
        if (n > 0) {
            result.output.append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || errno != EINTR) {
            open = false;
        }
    }

    int wstatus = 0;
    while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
    }
    if (!result.timed_out) {
        // grandchildren may still hold the pipe; the shell itself is done
        ::kill(-pid, SIGKILL);
    }
    result.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
                             .count();

    int child_errno = 0;
    if (::read(status.fds[0], &child_errno, sizeof child_errno) == static_cast<ssize_t>(sizeof child_errno)) {
        throw HarnessFailure("cannot start command in " + cwd_str + ": " + std::strerror(child_errno));
    }
    if (WIFEXITED(wstatus)) {
        result.exit_code = WEXITSTATUS(wstatus);
    } else if (WIFSIGNALED(wstatus)) {
        result.exit_code = 128 + WTERMSIG(wstatus);
    }
    return result;
}

std::string shell_quote(std::string_view value) {
    std::string out = "'";
    for (char c : value) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += '\'';
    return out;
}

std::string substitute(std::string_view templ, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t pos = 0;
    while (pos < templ.size()) {
        const auto open = templ.find('{', pos);
        if (open == std::string_view::npos) {
            break;
        }
        const auto close = templ.find('}', open);
        if (close == std::string_view::npos) {
            break;
        }
        const auto it = values.find(std::string(templ.substr(open + 1, close - open - 1)));
        out.append(templ.substr(pos, open - pos));
        if (it != values.end()) {
            out += shell_quote(it->second);
        } else {
            out.append(templ.substr(open, close - open + 1));
        }
        pos = close + 1;
    }
    out.append(templ.substr(pos));
    return out;
}

}  // namespace mfmine
