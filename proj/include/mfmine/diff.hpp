#pragma once

#include "mfmine/file_tree.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mfmine::diff {

enum class LineKind { Context, Remove, Add };

struct HunkLine {
    LineKind kind;
    std::string text;
    /// The record is the last line of its side and has no trailing LF.
    bool no_newline = false;

    friend bool operator==(const HunkLine&, const HunkLine&) = default;
};

/// A unified-diff hunk. Starts follow the unified convention: 1-based, and
/// for an empty side the start names the line *before* the change.
struct Hunk {
    std::size_t old_start = 0;
    std::size_t old_len = 0;
    std::size_t new_start = 0;
    std::size_t new_len = 0;
    std::vector<HunkLine> lines;

    /// First old/new line the hunk covers (1-based), also for empty sides.
    std::size_t old_first() const noexcept { return old_len == 0 ? old_start + 1 : old_start; }
    std::size_t new_first() const noexcept { return new_len == 0 ? new_start + 1 : new_start; }

    friend bool operator==(const Hunk&, const Hunk&) = default;
};

struct AddFile {
    std::string path;
    TextLines content;

    friend bool operator==(const AddFile&, const AddFile&) = default;
};

/// Carries the removed content so the operation can be inverted.
struct DeleteFile {
    std::string path;
    TextLines content;

    friend bool operator==(const DeleteFile&, const DeleteFile&) = default;
};

struct RenameFile {
    std::string old_path;
    std::string new_path;
    std::vector<Hunk> hunks;

    friend bool operator==(const RenameFile&, const RenameFile&) = default;
};

struct ModifyFile {
    std::string path;
    std::vector<Hunk> hunks;

    friend bool operator==(const ModifyFile&, const ModifyFile&) = default;
};

using FileOp = std::variant<AddFile, DeleteFile, RenameFile, ModifyFile>;

struct Diff {
    std::vector<FileOp> ops;

    bool empty() const noexcept { return ops.empty(); }
    friend bool operator==(const Diff&, const Diff&) = default;
};

/// Path an op reads in the pre-state, empty for AddFile.
std::string pre_path(const FileOp& op);
/// Path an op writes in the post-state, empty for DeleteFile.
std::string post_path(const FileOp& op);

/// Checks the structural invariants: unique pre/post paths, hunks sorted and
/// non-overlapping, and record counts agreeing with declared lengths.
/// Throws InvalidDiff.
void validate(const Diff& diff);

struct ParseOptions {
    /// Fuse a DeleteFile/AddFile pair with identical content into a RenameFile.
    bool detect_renames = false;
};

Diff parse_unified(std::string_view text, const ParseOptions& options = {});
std::string render_unified(const Diff& diff);

/// Replaces delete+add pairs of byte-identical content with RenameFile.
Diff fuse_renames(Diff diff);

FileTree apply(const Diff& diff, const FileTree& tree);
TextLines apply_hunks(const std::vector<Hunk>& hunks, const TextLines& file, const std::string& path);

Diff invert(const Diff& diff);

struct Mapped {
    std::string old_path;
    std::size_t old_line;

    friend bool operator==(const Mapped&, const Mapped&) = default;
};

enum class TouchKind {
    Modified,  ///< the change run containing the line also removed lines
    Added,     ///< pure insertion
};

struct Touched {
    TouchKind kind;

    friend bool operator==(const Touched&, const Touched&) = default;
};

struct FileAdded {
    friend bool operator==(const FileAdded&, const FileAdded&) = default;
};

using LineMapResult = std::variant<Mapped, Touched, FileAdded>;

/// Maps a post-state (path, line) to its pre-state coordinates. Context lines
/// inside a hunk map positionally; only added records count as touched.
LineMapResult backward_line_map(const Diff& diff, std::string_view path, std::size_t line);

/// Canonical hunks turning `before` into `after` with `context` lines of
/// context, computed from a Hunt-Szymanski LCS of the lines.
std::vector<Hunk> diff_lines(const TextLines& before, const TextLines& after, std::size_t context = 3);

/// Diff between two trees. `renames` lists (old, new) pairs to express as
/// RenameFile; everything else becomes add/delete/modify. Ops are ordered by
/// the path they affect.
Diff diff_trees(const FileTree& before, const FileTree& after,
                const std::vector<std::pair<std::string, std::string>>& renames = {});

}  // namespace mfmine::diff
