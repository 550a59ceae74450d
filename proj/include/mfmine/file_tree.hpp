#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mfmine {

/// A materialized source tree: relative '/'-separated path -> raw bytes.
/// std::map keeps iteration order deterministic.
using FileTree = std::map<std::string, std::string>;

/// A file split into LF-terminated lines. `missing_newline` is set when the
/// last line has no terminating LF; an empty file has no lines.
struct TextLines {
    std::vector<std::string> lines;
    bool missing_newline = false;

    friend bool operator==(const TextLines&, const TextLines&) = default;
};

TextLines split_lines(std::string_view content);
std::string join_lines(const TextLines& text);

/// Number of lines as counted by a line-oriented tool (a trailing partial
/// line counts).
std::size_t count_lines(std::string_view content);

bool looks_binary(std::string_view content);

/// Recursively reads every regular file below `root`.
FileTree read_tree(const std::filesystem::path& root);

/// Writes `tree` below `root`, creating directories as needed. Existing files
/// not in `tree` are left alone.
void write_tree(const std::filesystem::path& root, const FileTree& tree);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shell-style glob over '/'-separated relative paths. `*` and `?` stay within
/// one segment, `**` spans segments (`dir/**` matches everything below dir).
bool glob_match(std::string_view pattern, std::string_view path);

/// Normalized relative path: non-empty, no leading '/', no '.' or '..' or
/// empty segments.
bool is_normalized_relative(std::string_view path);

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string_view prefix = "mfmine");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    TempDir(TempDir&& other) noexcept;
    TempDir& operator=(TempDir&& other) noexcept;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace mfmine
