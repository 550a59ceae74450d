#include "mfmine/diff.hpp"

#include "mfmine/error.hpp"
#include "mfmine/lcs.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <set>

namespace mfmine::diff {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

constexpr std::string_view kNoNewline = "\\ No newline at end of file";

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

std::string pre_path(const FileOp& op) {
    return std::visit(overloaded{[](const AddFile&) { return std::string(); },
                                 [](const DeleteFile& d) { return d.path; },
                                 [](const RenameFile& r) { return r.old_path; },
                                 [](const ModifyFile& m) { return m.path; }},
                      op);
}

std::string post_path(const FileOp& op) {
    return std::visit(overloaded{[](const AddFile& a) { return a.path; },
                                 [](const DeleteFile&) { return std::string(); },
                                 [](const RenameFile& r) { return r.new_path; },
                                 [](const ModifyFile& m) { return m.path; }},
                      op);
}

// ---------------------------------------------------------------------------
// validation

namespace {

void validate_hunks(const std::vector<Hunk>& hunks, const std::string& path) {
    std::size_t prev_old_end = 0;  // one past the last old line covered
    std::size_t prev_new_end = 0;
    for (std::size_t i = 0; i < hunks.size(); ++i) {
        const Hunk& h = hunks[i];
        std::size_t olds = 0;
        std::size_t news = 0;
        for (const auto& rec : h.lines) {
            if (rec.kind != LineKind::Add) {
                ++olds;
            }
            if (rec.kind != LineKind::Remove) {
                ++news;
            }
        }
        if (olds != h.old_len || news != h.new_len) {
            throw InvalidDiff(path + ": hunk " + std::to_string(i + 1) + " declares -" + std::to_string(h.old_len) +
                              " +" + std::to_string(h.new_len) + " but has -" + std::to_string(olds) + " +" +
                              std::to_string(news));
        }
        if ((h.old_len > 0 && h.old_start == 0) || (h.new_len > 0 && h.new_start == 0)) {
            throw InvalidDiff(path + ": hunk " + std::to_string(i + 1) + " starts at line 0");
        }
        if (i > 0 && (h.old_first() < prev_old_end || h.new_first() < prev_new_end)) {
            throw InvalidDiff(path + ": hunks overlap or are out of order");
        }
        prev_old_end = h.old_first() + h.old_len;
        prev_new_end = h.new_first() + h.new_len;
    }
}

}  // namespace

void validate(const Diff& diff) {
    std::set<std::string> pre;
    std::set<std::string> post;
    for (const auto& op : diff.ops) {
        const auto p = pre_path(op);
        const auto q = post_path(op);
        for (const auto* path : {&p, &q}) {
            if (!path->empty() && !is_normalized_relative(*path)) {
                throw InvalidDiff("path is not a normalized relative path: '" + *path + "'");
            }
        }
        if (!p.empty() && !pre.insert(p).second) {
            throw InvalidDiff("two operations read " + p);
        }
        if (!q.empty() && !post.insert(q).second) {
            throw InvalidDiff("two operations write " + q);
        }
        if (const auto* r = std::get_if<RenameFile>(&op)) {
            validate_hunks(r->hunks, r->new_path);
        } else if (const auto* m = std::get_if<ModifyFile>(&op)) {
            validate_hunks(m->hunks, m->path);
        }
    }
}

// ---------------------------------------------------------------------------
// rendering

namespace {

void render_range(std::string& out, std::size_t start, std::size_t len) {
    out += std::to_string(start);
    if (len != 1) {
        out += ',';
        out += std::to_string(len);
    }
}

void render_hunk(std::string& out, const Hunk& h) {
    out += "@@ -";
    render_range(out, h.old_start, h.old_len);
    out += " +";
    render_range(out, h.new_start, h.new_len);
    out += " @@\n";
    for (const auto& rec : h.lines) {
        switch (rec.kind) {
            case LineKind::Context:
                out += ' ';
                break;
            case LineKind::Remove:
                out += '-';
                break;
            case LineKind::Add:
                out += '+';
                break;
        }
        out += rec.text;
        out += '\n';
        if (rec.no_newline) {
            out += kNoNewline;
            out += '\n';
        }
    }
}

Hunk whole_file_hunk(const TextLines& content, LineKind kind) {
    Hunk h;
    const auto n = content.lines.size();
    if (kind == LineKind::Add) {
        h.new_start = 1;
        h.new_len = n;
    } else {
        h.old_start = 1;
        h.old_len = n;
    }
    for (std::size_t i = 0; i < n; ++i) {
        h.lines.push_back({kind, content.lines[i], i + 1 == n && content.missing_newline});
    }
    return h;
}

}  // namespace

std::string render_unified(const Diff& diff) {
    std::string out;
    for (const auto& op : diff.ops) {
        std::visit(overloaded{
                       [&](const AddFile& a) {
                           out += "diff --git a/" + a.path + " b/" + a.path + "\n";
                           out += "new file mode 100644\n";
                           if (!a.content.lines.empty()) {
                               out += "--- /dev/null\n+++ b/" + a.path + "\n";
                               render_hunk(out, whole_file_hunk(a.content, LineKind::Add));
                           }
                       },
                       [&](const DeleteFile& d) {
                           out += "diff --git a/" + d.path + " b/" + d.path + "\n";
                           out += "deleted file mode 100644\n";
                           if (!d.content.lines.empty()) {
                               out += "--- a/" + d.path + "\n+++ /dev/null\n";
                               render_hunk(out, whole_file_hunk(d.content, LineKind::Remove));
                           }
                       },
                       [&](const RenameFile& r) {
                           out += "diff --git a/" + r.old_path + " b/" + r.new_path + "\n";
                           out += "rename from " + r.old_path + "\n";
                           out += "rename to " + r.new_path + "\n";
                           if (!r.hunks.empty()) {
                               out += "--- a/" + r.old_path + "\n+++ b/" + r.new_path + "\n";
                               for (const auto& h : r.hunks) {
                                   render_hunk(out, h);
                               }
                           }
                       },
                       [&](const ModifyFile& m) {
                           out += "diff --git a/" + m.path + " b/" + m.path + "\n";
                           out += "--- a/" + m.path + "\n+++ b/" + m.path + "\n";
                           for (const auto& h : m.hunks) {
                               render_hunk(out, h);
                           }
                       },
                   },
                   op);
    }
    return out;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

struct Section {
    std::size_t start_line = 0;
    std::optional<std::string> git_old;
    std::optional<std::string> git_new;
    bool new_file = false;
    bool deleted_file = false;
    std::optional<std::string> rename_from;
    std::optional<std::string> rename_to;
    std::optional<std::string> minus;  // "" for /dev/null
    std::optional<std::string> plus;
    std::vector<Hunk> hunks;
};

class Parser {
public:
    explicit Parser(std::string_view text) {
        std::size_t pos = 0;
        while (pos < text.size()) {
            auto nl = text.find('\n', pos);
            if (nl == std::string_view::npos) {
                nl = text.size();
            }
            lines_.push_back(text.substr(pos, nl - pos));
            pos = nl + 1;
        }
    }

    Diff run() {
        Diff diff;
        while (idx_ < lines_.size()) {
            const auto line = lines_[idx_];
            Section sec;
            sec.start_line = idx_ + 1;
            if (starts_with(line, "diff --git ")) {
                parse_git_header(sec);
            } else if (starts_with(line, "--- ")) {
                // plain unified diff without a git header
            } else if (starts_with(line, "Binary files ")) {
                throw BinaryUnsupported("binary file diff at line " + std::to_string(idx_ + 1));
            } else {
                throw DiffSyntax(idx_ + 1, "expected a file header, found '" + std::string(line) + "'");
            }
            if (idx_ < lines_.size() && starts_with(lines_[idx_], "--- ")) {
                parse_file_lines(sec);
                while (idx_ < lines_.size() && starts_with(lines_[idx_], "@@")) {
                    sec.hunks.push_back(parse_hunk());
                }
                if (idx_ < lines_.size()) {
                    check_section_boundary();
                }
            }
            diff.ops.push_back(build_op(std::move(sec)));
        }
        return diff;
    }

private:
    static std::string strip_prefix(std::string_view path, char side) {
        const auto tab = path.find('\t');
        if (tab != std::string_view::npos) {
            path = path.substr(0, tab);
        }
        if (path.size() > 2 && path[0] == side && path[1] == '/') {
            path.remove_prefix(2);
        }
        return std::string(path);
    }

    void parse_git_header(Section& sec) {
        auto rest = lines_[idx_].substr(std::string_view("diff --git ").size());
        const auto split = rest.find(" b/");
        if (starts_with(rest, "a/") && split != std::string_view::npos) {
            sec.git_old = std::string(rest.substr(2, split - 2));
            sec.git_new = std::string(rest.substr(split + 3));
        } else {
            throw DiffSyntax(idx_ + 1, "malformed 'diff --git' header");
        }
        ++idx_;
        while (idx_ < lines_.size()) {
            const auto line = lines_[idx_];
            if (starts_with(line, "--- ") || starts_with(line, "diff --git ")) {
                return;
            }
            if (starts_with(line, "new file mode ")) {
                sec.new_file = true;
            } else if (starts_with(line, "deleted file mode ")) {
                sec.deleted_file = true;
            } else if (starts_with(line, "rename from ")) {
                sec.rename_from = std::string(line.substr(12));
            } else if (starts_with(line, "rename to ")) {
                sec.rename_to = std::string(line.substr(10));
            } else if (starts_with(line, "Binary files ") || starts_with(line, "GIT binary patch")) {
                throw BinaryUnsupported("binary file diff at line " + std::to_string(idx_ + 1));
            } else if (starts_with(line, "index ") || starts_with(line, "old mode ") ||
                       starts_with(line, "new mode ") || starts_with(line, "similarity index ") ||
                       starts_with(line, "dissimilarity index ")) {
                // carries nothing the line model needs
            } else {
                throw DiffSyntax(idx_ + 1, "unexpected extended header '" + std::string(line) + "'");
            }
            ++idx_;
        }
    }

    void parse_file_lines(Section& sec) {
        const auto minus = lines_[idx_].substr(4);
        sec.minus = minus == "/dev/null" || starts_with(minus, "/dev/null\t") ? "" : strip_prefix(minus, 'a');
        ++idx_;
        if (idx_ >= lines_.size() || !starts_with(lines_[idx_], "+++ ")) {
            throw DiffSyntax(idx_ + 1, "'---' header not followed by '+++'");
        }
        const auto plus = lines_[idx_].substr(4);
        sec.plus = plus == "/dev/null" || starts_with(plus, "/dev/null\t") ? "" : strip_prefix(plus, 'b');
        ++idx_;
    }

    static bool parse_number(std::string_view& s, std::size_t& out) {
        const auto* first = s.data();
        const auto* last = s.data() + s.size();
        const auto res = std::from_chars(first, last, out);
        if (res.ec != std::errc() || res.ptr == first) {
            return false;
        }
        s.remove_prefix(static_cast<std::size_t>(res.ptr - first));
        return true;
    }

    static bool parse_range(std::string_view& s, std::size_t& start, std::size_t& len) {
        if (!parse_number(s, start)) {
            return false;
        }
        len = 1;
        if (!s.empty() && s.front() == ',') {
            s.remove_prefix(1);
            return parse_number(s, len);
        }
        return true;
    }

    Hunk parse_hunk() {
        const std::size_t header_line = idx_ + 1;
        auto s = lines_[idx_];
        Hunk h;
        if (!starts_with(s, "@@ -")) {
            throw DiffSyntax(header_line, "malformed hunk header");
        }
        s.remove_prefix(4);
        if (!parse_range(s, h.old_start, h.old_len) || !starts_with(s, " +")) {
            throw DiffSyntax(header_line, "malformed hunk header");
        }
        s.remove_prefix(2);
        if (!parse_range(s, h.new_start, h.new_len) || !starts_with(s, " @@")) {
            throw DiffSyntax(header_line, "malformed hunk header");
        }
        ++idx_;
        std::size_t old_left = h.old_len;
        std::size_t new_left = h.new_len;
        while (old_left > 0 || new_left > 0) {
            if (idx_ >= lines_.size()) {
                throw HunkMismatch(header_line, "hunk ends before its declared length");
            }
            const auto line = lines_[idx_];
            const char tag = line.empty() ? ' ' : line.front();
            const std::string text = line.empty() ? std::string() : std::string(line.substr(1));
            if (tag == '\\') {
                attach_no_newline(h);
                ++idx_;
                continue;
            }
            LineKind kind;
            if (tag == ' ') {
                kind = LineKind::Context;
            } else if (tag == '-') {
                kind = LineKind::Remove;
            } else if (tag == '+') {
                kind = LineKind::Add;
            } else {
                throw HunkMismatch(header_line, "hunk ends before its declared length");
            }
            if (kind != LineKind::Add) {
                if (old_left == 0) {
                    throw HunkMismatch(idx_ + 1, "more old-side lines than declared");
                }
                --old_left;
            }
            if (kind != LineKind::Remove) {
                if (new_left == 0) {
                    throw HunkMismatch(idx_ + 1, "more new-side lines than declared");
                }
                --new_left;
            }
            h.lines.push_back({kind, text, false});
            ++idx_;
        }
        if (idx_ < lines_.size() && starts_with(lines_[idx_], "\\")) {
            attach_no_newline(h);
            ++idx_;
        }
        return h;
    }

    void attach_no_newline(Hunk& h) {
        if (h.lines.empty() || h.lines.back().no_newline) {
            throw DiffSyntax(idx_ + 1, "misplaced no-newline marker");
        }
        h.lines.back().no_newline = true;
    }

    void check_section_boundary() {
        const auto line = lines_[idx_];
        if (starts_with(line, "diff --git ")) {
            return;
        }
        if (starts_with(line, "--- ") && idx_ + 1 < lines_.size() && starts_with(lines_[idx_ + 1], "+++ ")) {
            return;
        }
        if (!line.empty() && (line.front() == ' ' || line.front() == '+' || line.front() == '-')) {
            throw HunkMismatch(idx_ + 1, "more lines than the hunk header declares");
        }
        throw DiffSyntax(idx_ + 1, "unexpected line '" + std::string(line) + "'");
    }

    TextLines whole_file_content(const Section& sec, LineKind kind) const {
        TextLines content;
        if (sec.hunks.size() > 1) {
            throw DiffSyntax(sec.start_line, "whole-file addition or removal must be a single hunk");
        }
        for (const auto& h : sec.hunks) {
            for (const auto& rec : h.lines) {
                if (rec.kind != kind) {
                    throw DiffSyntax(sec.start_line, "whole-file addition or removal mixes line kinds");
                }
                content.lines.push_back(rec.text);
                content.missing_newline = rec.no_newline;
            }
        }
        return content;
    }

    FileOp build_op(Section sec) const {
        const bool minus_null = sec.minus && sec.minus->empty();
        const bool plus_null = sec.plus && sec.plus->empty();
        if (sec.new_file || minus_null) {
            std::string path = sec.plus && !plus_null ? *sec.plus : sec.git_new.value_or("");
            return AddFile{std::move(path), whole_file_content(sec, LineKind::Add)};
        }
        if (sec.deleted_file || plus_null) {
            std::string path = sec.minus && !minus_null ? *sec.minus : sec.git_old.value_or("");
            return DeleteFile{std::move(path), whole_file_content(sec, LineKind::Remove)};
        }
        if (sec.rename_from || sec.rename_to) {
            if (!sec.rename_from || !sec.rename_to) {
                throw DiffSyntax(sec.start_line, "rename needs both 'rename from' and 'rename to'");
            }
            return RenameFile{*sec.rename_from, *sec.rename_to, std::move(sec.hunks)};
        }
        const std::string old_path = sec.minus ? *sec.minus : sec.git_old.value_or("");
        const std::string new_path = sec.plus ? *sec.plus : sec.git_new.value_or("");
        if (old_path != new_path) {
            return RenameFile{old_path, new_path, std::move(sec.hunks)};
        }
        return ModifyFile{new_path, std::move(sec.hunks)};
    }

    std::vector<std::string_view> lines_;
    std::size_t idx_ = 0;
};

}  // namespace

Diff parse_unified(std::string_view text, const ParseOptions& options) {
    if (looks_binary(text)) {
        throw BinaryUnsupported("diff text contains NUL bytes");
    }
    Diff diff = Parser(text).run();
    try {
        validate(diff);
    } catch (const InvalidDiff& e) {
        throw DiffSyntax(0, e.what());
    }
    if (options.detect_renames) {
        diff = fuse_renames(std::move(diff));
    }
    return diff;
}

Diff fuse_renames(Diff diff) {
    std::vector<bool> consumed(diff.ops.size(), false);
    std::vector<FileOp> out;
    for (std::size_t i = 0; i < diff.ops.size(); ++i) {
        const auto* add = std::get_if<AddFile>(&diff.ops[i]);
        if (add == nullptr) {
            continue;
        }
        for (std::size_t j = 0; j < diff.ops.size(); ++j) {
            const auto* del = std::get_if<DeleteFile>(&diff.ops[j]);
            if (del != nullptr && !consumed[j] && del->content == add->content) {
                consumed[j] = true;
                diff.ops[i] = RenameFile{del->path, add->path, {}};
                break;
            }
        }
    }
    for (std::size_t i = 0; i < diff.ops.size(); ++i) {
        if (!consumed[i]) {
            out.push_back(std::move(diff.ops[i]));
        }
    }
    return Diff{std::move(out)};
}

// ---------------------------------------------------------------------------
// application

TextLines apply_hunks(const std::vector<Hunk>& hunks, const TextLines& file, const std::string& path) {
    const auto& lines = file.lines;
    const std::size_t n = lines.size();
    TextLines out;
    out.missing_newline = file.missing_newline;
    std::size_t cur = 0;
    for (const auto& h : hunks) {
        const std::size_t first = h.old_first() - 1;
        if (first < cur || first > n) {
            throw ContextMismatch(path, h.old_first(), "hunk out of order or beyond end of file");
        }
        out.lines.insert(out.lines.end(), lines.begin() + static_cast<std::ptrdiff_t>(cur),
                         lines.begin() + static_cast<std::ptrdiff_t>(first));
        std::size_t o = first;
        bool has_new = false;
        bool last_new_flag = false;
        bool flag_not_last = false;
        for (const auto& rec : h.lines) {
            if (rec.kind != LineKind::Add) {
                if (o >= n) {
                    throw ContextMismatch(path, o + 1, "hunk extends beyond end of file");
                }
                if (lines[o] != rec.text) {
                    throw ContextMismatch(path, o + 1, "expected '" + rec.text + "', found '" + lines[o] + "'");
                }
                const bool is_noeol_last = o + 1 == n && file.missing_newline;
                if (rec.no_newline != is_noeol_last) {
                    throw ContextMismatch(path, o + 1, "end-of-file newline disagrees");
                }
                ++o;
            }
            if (rec.kind != LineKind::Remove) {
                if (last_new_flag) {
                    flag_not_last = true;
                }
                out.lines.push_back(rec.text);
                has_new = true;
                last_new_flag = rec.no_newline;
            }
        }
        if (o == n) {
            if (h.old_len == 0 && n > 0 && file.missing_newline) {
                throw ContextMismatch(path, n, "cannot append after a line without newline");
            }
            out.missing_newline = has_new && last_new_flag;
        } else if (last_new_flag) {
            flag_not_last = true;
        }
        if (flag_not_last) {
            throw ContextMismatch(path, o, "no-newline marker is not at end of file");
        }
        cur = o;
    }
    out.lines.insert(out.lines.end(), lines.begin() + static_cast<std::ptrdiff_t>(cur), lines.end());
    if (out.lines.empty()) {
        out.missing_newline = false;
    }
    return out;
}

FileTree apply(const Diff& diff, const FileTree& tree) {
    std::vector<std::pair<std::string, std::string>> writes;
    for (const auto& op : diff.ops) {
        const auto pre = pre_path(op);
        const std::string* before = nullptr;
        if (!pre.empty()) {
            const auto it = tree.find(pre);
            if (it == tree.end()) {
                throw MissingFile(pre);
            }
            if (looks_binary(it->second)) {
                throw BinaryUnsupported(pre + " is binary");
            }
            before = &it->second;
        }
        std::visit(overloaded{
                       [&](const AddFile& a) { writes.emplace_back(a.path, join_lines(a.content)); },
                       [&](const DeleteFile& d) {
                           const auto current = split_lines(*before);
                           if (current != d.content) {
                               std::size_t line = 1;
                               while (line <= current.lines.size() && line <= d.content.lines.size() &&
                                      current.lines[line - 1] == d.content.lines[line - 1]) {
                                   ++line;
                               }
                               throw ContextMismatch(d.path, line, "deleted content differs from the tree");
                           }
                       },
                       [&](const RenameFile& r) {
                           writes.emplace_back(r.new_path, join_lines(apply_hunks(r.hunks, split_lines(*before), r.old_path)));
                       },
                       [&](const ModifyFile& m) {
                           writes.emplace_back(m.path, join_lines(apply_hunks(m.hunks, split_lines(*before), m.path)));
                       },
                   },
                   op);
    }
    FileTree result = tree;
    for (const auto& op : diff.ops) {
        const auto pre = pre_path(op);
        if (!pre.empty()) {
            result.erase(pre);
        }
    }
    for (auto& [path, content] : writes) {
        if (!result.emplace(path, std::move(content)).second) {
            throw ContextMismatch(path, 0, "file already exists");
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// inversion

namespace {

std::vector<Hunk> invert_hunks(const std::vector<Hunk>& hunks) {
    std::vector<Hunk> out;
    out.reserve(hunks.size());
    for (const auto& h : hunks) {
        Hunk inv;
        inv.old_start = h.new_start;
        inv.old_len = h.new_len;
        inv.new_start = h.old_start;
        inv.new_len = h.old_len;
        // swap roles, then keep removals ahead of additions within each change run
        std::size_t i = 0;
        while (i < h.lines.size()) {
            if (h.lines[i].kind == LineKind::Context) {
                inv.lines.push_back(h.lines[i]);
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < h.lines.size() && h.lines[j].kind != LineKind::Context) {
                ++j;
            }
            for (std::size_t k = i; k < j; ++k) {
                if (h.lines[k].kind == LineKind::Add) {
                    inv.lines.push_back({LineKind::Remove, h.lines[k].text, h.lines[k].no_newline});
                }
            }
            for (std::size_t k = i; k < j; ++k) {
                if (h.lines[k].kind == LineKind::Remove) {
                    inv.lines.push_back({LineKind::Add, h.lines[k].text, h.lines[k].no_newline});
                }
            }
            i = j;
        }
        out.push_back(std::move(inv));
    }
    return out;
}

}  // namespace

Diff invert(const Diff& diff) {
    Diff out;
    out.ops.reserve(diff.ops.size());
    for (const auto& op : diff.ops) {
        out.ops.push_back(std::visit(overloaded{
                                         [](const AddFile& a) -> FileOp { return DeleteFile{a.path, a.content}; },
                                         [](const DeleteFile& d) -> FileOp { return AddFile{d.path, d.content}; },
                                         [](const RenameFile& r) -> FileOp {
                                             return RenameFile{r.new_path, r.old_path, invert_hunks(r.hunks)};
                                         },
                                         [](const ModifyFile& m) -> FileOp {
                                             return ModifyFile{m.path, invert_hunks(m.hunks)};
                                         },
                                     },
                                     op));
    }
    return out;
}

// ---------------------------------------------------------------------------
// backward line mapping

namespace {

TouchKind classify_run(const std::vector<HunkLine>& lines, std::size_t at) {
    std::size_t lo = at;
    while (lo > 0 && lines[lo - 1].kind != LineKind::Context) {
        --lo;
    }
    for (std::size_t k = lo; k < lines.size() && lines[k].kind != LineKind::Context; ++k) {
        if (lines[k].kind == LineKind::Remove) {
            return TouchKind::Modified;
        }
    }
    return TouchKind::Added;
}

LineMapResult map_through_hunks(const std::vector<Hunk>& hunks, const std::string& old_path, std::size_t line) {
    std::ptrdiff_t delta = 0;  // new - old line offset from hunks above
    for (const auto& h : hunks) {
        const std::size_t new_first = h.new_first();
        if (line < new_first) {
            break;
        }
        if (line >= new_first + h.new_len) {
            delta += static_cast<std::ptrdiff_t>(h.new_len) - static_cast<std::ptrdiff_t>(h.old_len);
            continue;
        }
        std::size_t o = h.old_first();
        std::size_t n = new_first;
        for (std::size_t r = 0; r < h.lines.size(); ++r) {
            const auto& rec = h.lines[r];
            switch (rec.kind) {
                case LineKind::Context:
                    if (n == line) {
                        return Mapped{old_path, o};
                    }
                    ++o;
                    ++n;
                    break;
                case LineKind::Remove:
                    ++o;
                    break;
                case LineKind::Add:
                    if (n == line) {
                        return Touched{classify_run(h.lines, r)};
                    }
                    ++n;
                    break;
            }
        }
        break;  // unreachable for a consistent hunk
    }
    return Mapped{old_path, static_cast<std::size_t>(static_cast<std::ptrdiff_t>(line) - delta)};
}

}  // namespace

LineMapResult backward_line_map(const Diff& diff, std::string_view path, std::size_t line) {
    if (line == 0) {
        throw std::invalid_argument("line numbers are 1-based");
    }
    for (const auto& op : diff.ops) {
        if (post_path(op) != path) {
            continue;
        }
        if (std::holds_alternative<AddFile>(op)) {
            return FileAdded{};
        }
        if (const auto* r = std::get_if<RenameFile>(&op)) {
            return map_through_hunks(r->hunks, r->old_path, line);
        }
        const auto& m = std::get<ModifyFile>(op);
        return map_through_hunks(m.hunks, m.path, line);
    }
    for (const auto& op : diff.ops) {
        if (pre_path(op) == path) {
            throw UnknownPath(std::string(path));
        }
    }
    return Mapped{std::string(path), line};
}

// ---------------------------------------------------------------------------
// diff computation

namespace {

struct Edit {
    LineKind kind;
    std::size_t oi;  // old lines consumed before this edit
    std::size_t ni;  // new lines consumed before this edit
};

std::vector<std::string> line_tokens(const TextLines& t) {
    std::vector<std::string> out;
    out.reserve(t.lines.size());
    for (std::size_t i = 0; i < t.lines.size(); ++i) {
        std::string tok = t.lines[i];
        if (!(i + 1 == t.lines.size() && t.missing_newline)) {
            tok += '\n';
        }
        out.push_back(std::move(tok));
    }
    return out;
}

}  // namespace

std::vector<Hunk> diff_lines(const TextLines& before, const TextLines& after, std::size_t context) {
    const auto ta = line_tokens(before);
    const auto tb = line_tokens(after);
    const auto pairs = harness::lcs_pairs(ta, tb);

    std::vector<Edit> edits;
    std::size_t i = 0;
    std::size_t j = 0;
    auto flush = [&](std::size_t upto_i, std::size_t upto_j) {
        for (; i < upto_i; ++i) {
            edits.push_back({LineKind::Remove, i, j});
        }
        for (; j < upto_j; ++j) {
            edits.push_back({LineKind::Add, i, j});
        }
    };
    for (const auto& p : pairs) {
        flush(p.a, p.b);
        edits.push_back({LineKind::Context, i, j});
        ++i;
        ++j;
    }
    flush(ta.size(), tb.size());

    std::vector<std::size_t> changes;
    for (std::size_t k = 0; k < edits.size(); ++k) {
        if (edits[k].kind != LineKind::Context) {
            changes.push_back(k);
        }
    }

    const std::size_t old_n = before.lines.size();
    const std::size_t new_n = after.lines.size();
    std::vector<Hunk> hunks;
    std::size_t c = 0;
    while (c < changes.size()) {
        std::size_t last = changes[c];
        std::size_t d = c + 1;
        while (d < changes.size() && changes[d] - last - 1 <= 2 * context) {
            last = changes[d];
            ++d;
        }
        const std::size_t lo = changes[c] >= context ? changes[c] - context : 0;
        const std::size_t hi = std::min(last + context + 1, edits.size());

        Hunk h;
        for (std::size_t k = lo; k < hi; ++k) {
            const auto& e = edits[k];
            HunkLine rec{e.kind, {}, false};
            if (e.kind == LineKind::Add) {
                rec.text = after.lines[e.ni];
                rec.no_newline = e.ni + 1 == new_n && after.missing_newline;
                ++h.new_len;
            } else {
                rec.text = before.lines[e.oi];
                rec.no_newline = e.oi + 1 == old_n && before.missing_newline;
                ++h.old_len;
                if (e.kind == LineKind::Context) {
                    ++h.new_len;
                }
            }
            h.lines.push_back(std::move(rec));
        }
        h.old_start = h.old_len > 0 ? edits[lo].oi + 1 : edits[lo].oi;
        h.new_start = h.new_len > 0 ? edits[lo].ni + 1 : edits[lo].ni;
        hunks.push_back(std::move(h));
        c = d;
    }
    return hunks;
}

Diff diff_trees(const FileTree& before, const FileTree& after,
                const std::vector<std::pair<std::string, std::string>>& renames) {
    for (const auto* tree : {&before, &after}) {
        for (const auto& [path, content] : *tree) {
            if (looks_binary(content)) {
                throw BinaryUnsupported(path + " is binary");
            }
        }
    }
    std::map<std::string, FileOp> keyed;
    std::set<std::string> renamed_old;
    std::set<std::string> renamed_new;
    for (const auto& [from, to] : renames) {
        const auto a = before.find(from);
        const auto b = after.find(to);
        if (a == before.end()) {
            throw MissingFile(from);
        }
        if (b == after.end()) {
            throw MissingFile(to);
        }
        renamed_old.insert(from);
        renamed_new.insert(to);
        keyed.emplace(to, RenameFile{from, to, diff_lines(split_lines(a->second), split_lines(b->second))});
    }
    for (const auto& [path, content] : before) {
        if (renamed_old.contains(path)) {
            continue;
        }
        const auto it = after.find(path);
        if (it == after.end() || renamed_new.contains(path)) {
            if (renamed_new.contains(path)) {
                throw InvalidDiff(path + " is both replaced by a rename and kept");
            }
            keyed.emplace(path, DeleteFile{path, split_lines(content)});
        } else if (it->second != content) {
            keyed.emplace(path, ModifyFile{path, diff_lines(split_lines(content), split_lines(it->second))});
        }
    }
    for (const auto& [path, content] : after) {
        if (renamed_new.contains(path) || (before.contains(path) && !renamed_old.contains(path))) {
            continue;
        }
        keyed.emplace(path, AddFile{path, split_lines(content)});
    }
    Diff diff;
    for (auto& [key, op] : keyed) {
        diff.ops.push_back(std::move(op));
    }
    return diff;
}

}  // namespace mfmine::diff
