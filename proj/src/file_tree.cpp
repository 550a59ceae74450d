#include "mfmine/file_tree.hpp"

#include "mfmine/error.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace mfmine {

namespace fs = std::filesystem;

TextLines split_lines(std::string_view content) {
    TextLines out;
    std::size_t pos = 0;
    while (pos < content.size()) {
        const auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) {
            out.lines.emplace_back(content.substr(pos));
            out.missing_newline = true;
            break;
        }
        out.lines.emplace_back(content.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

std::string join_lines(const TextLines& text) {
    std::string out;
    for (std::size_t i = 0; i < text.lines.size(); ++i) {
        out += text.lines[i];
        if (i + 1 < text.lines.size() || !text.missing_newline) {
            out += '\n';
        }
    }
    return out;
}

std::size_t count_lines(std::string_view content) {
    std::size_t n = 0;
    for (char c : content) {
        if (c == '\n') {
            ++n;
        }
    }
    if (!content.empty() && content.back() != '\n') {
        ++n;
    }
    return n;
}

bool looks_binary(std::string_view content) {
    return content.find('\0') != std::string_view::npos;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error("short write to " + path.string());
    }
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    write_file(tmp, content);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

FileTree read_tree(const fs::path& root) {
    if (!fs::is_directory(root)) {
        throw Error("not a directory: " + root.string());
    }
    FileTree tree;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        tree.emplace(fs::relative(entry.path(), root).generic_string(), read_file(entry.path()));
    }
    return tree;
}

void write_tree(const fs::path& root, const FileTree& tree) {
    fs::create_directories(root);
    for (const auto& [rel, content] : tree) {
        write_file(root / rel, content);
    }
}

namespace {

bool glob_impl(std::string_view pat, std::string_view str) {
    while (!pat.empty()) {
        if (pat.substr(0, 2) == "**") {
            auto rest = pat.substr(2);
            if (!rest.empty() && rest.front() == '/') {
                // "**/" may also match zero segments
                if (glob_impl(rest.substr(1), str)) {
                    return true;
                }
            }
            for (std::size_t i = 0; i <= str.size(); ++i) {
                if (glob_impl(rest, str.substr(i))) {
                    return true;
                }
            }
            return false;
        }
        const char p = pat.front();
        if (p == '*') {
            auto rest = pat.substr(1);
            for (std::size_t i = 0; i <= str.size(); ++i) {
                if (glob_impl(rest, str.substr(i))) {
                    return true;
                }
                if (i < str.size() && str[i] == '/') {
                    break;
                }
            }
            return false;
        }
        if (str.empty()) {
            return false;
        }
        if (p == '?') {
            if (str.front() == '/') {
                return false;
            }
        } else if (p != str.front()) {
            return false;
        }
        pat.remove_prefix(1);
        str.remove_prefix(1);
    }
    return str.empty();
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
    return glob_impl(pattern, path);
}

bool is_normalized_relative(std::string_view path) {
    if (path.empty() || path.front() == '/') {
        return false;
    }
    std::size_t pos = 0;
    while (pos <= path.size()) {
        auto slash = path.find('/', pos);
        if (slash == std::string_view::npos) {
            slash = path.size();
        }
        const auto seg = path.substr(pos, slash - pos);
        if (seg.empty() || seg == "." || seg == "..") {
            return false;
        }
        pos = slash + 1;
    }
    return true;
}

TempDir::TempDir(std::string_view prefix) {
    static std::atomic<unsigned> counter{0};
    const auto base = fs::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = base / (std::string(prefix) + "-" + std::to_string(::getpid()) + "-" +
                                 std::to_string(counter.fetch_add(1)));
        std::error_code ec;
        if (fs::create_directory(candidate, ec)) {
            path_ = std::move(candidate);
            return;
        }
    }
    throw Error("cannot create a temporary directory");
}

TempDir::~TempDir() {
    if (!path_.empty()) {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
}

TempDir::TempDir(TempDir&& other) noexcept : path_(std::move(other.path_)) {
    other.path_.clear();
}

TempDir& TempDir::operator=(TempDir&& other) noexcept {
    if (this != &other) {
        if (!path_.empty()) {
            std::error_code ec;
            fs::remove_all(path_, ec);
        }
        path_ = std::move(other.path_);
        other.path_.clear();
    }
    return *this;
}

}  // namespace mfmine
