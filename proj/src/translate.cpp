#include "mfmine/translate.hpp"

#include "mfmine/error.hpp"

#include <stdexcept>

namespace mfmine::locate {

std::string_view to_string(DropReason reason) {
    switch (reason) {
    case DropReason::Modified:
        return "Modified";
    case DropReason::Added:
        return "Added";
    case DropReason::FileRemovedBackward:
        return "FileRemovedBackward";
    }
    return "?";
}

DropReason parse_drop_reason(std::string_view text) {
    for (auto r : {DropReason::Modified, DropReason::Added, DropReason::FileRemovedBackward}) {
        if (to_string(r) == text) {
            return r;
        }
    }
    throw std::invalid_argument("unknown drop reason '" + std::string(text) + "'");
}

std::vector<FaultLocation> TranslationResult::active_locations() const {
    std::vector<FaultLocation> out;
    for (const auto& l : locations) {
        if (l.active()) {
            out.push_back(*l.current);
        }
    }
    return out;
}

namespace {

void check_inside(const FaultLocation& loc, const FileTree& tree) {
    const auto it = tree.find(loc.path);
    if (it == tree.end()) {
        throw InvalidCoordinates(to_string(loc) + ": no such file");
    }
    if (loc.line == 0 || loc.line > count_lines(it->second)) {
        throw InvalidCoordinates(to_string(loc) + ": file has " + std::to_string(count_lines(it->second)) +
                                 " lines");
    }
}

}  // namespace

std::vector<TrackedLocation> step_back(const std::vector<TrackedLocation>& locations, const diff::Diff& diff,
                                       std::string_view pre_version, const FileTree* post_tree) {
    std::vector<TrackedLocation> out;
    out.reserve(locations.size());
    for (const auto& loc : locations) {
        if (!loc.active()) {
            out.push_back(loc);
            continue;
        }
        if (post_tree != nullptr) {
            check_inside(*loc.current, *post_tree);
        }
        diff::LineMapResult mapped;
        try {
            mapped = diff::backward_line_map(diff, loc.current->path, loc.current->line);
        } catch (const UnknownPath&) {
            throw InvalidCoordinates(to_string(*loc.current) + ": the diff leaves no such file");
        } catch (const std::invalid_argument& e) {
            throw InvalidCoordinates(to_string(*loc.current) + ": " + e.what());
        }
        TrackedLocation next = loc;
        if (const auto* m = std::get_if<diff::Mapped>(&mapped)) {
            next.current = FaultLocation{m->old_path, m->old_line};
        } else {
            next.status = TrackedLocation::Status::Dropped;
            next.current.reset();
            next.dropped_at = std::string(pre_version);
            if (const auto* t = std::get_if<diff::Touched>(&mapped)) {
                next.reason = t->kind == diff::TouchKind::Modified ? DropReason::Modified : DropReason::Added;
            } else {
                next.reason = DropReason::FileRemovedBackward;
            }
        }
        out.push_back(std::move(next));
    }
    return out;
}

TranslationResult translate(const history::Entry& entry, std::string_view target_version,
                            const std::vector<history::DiffRef>& chain, const FileTree* discovery_tree) {
    const auto& discovery = entry.buggy.version_id;
    if (chain.empty()) {
        if (target_version != discovery) {
            throw ChainMismatch("empty chain cannot link '" + std::string(target_version) + "' to '" + discovery +
                                "'");
        }
    } else {
        if (chain.front().from_version != target_version || chain.back().to_version != discovery) {
            throw ChainMismatch("chain links '" + chain.front().from_version + "' to '" + chain.back().to_version +
                                "', expected '" + std::string(target_version) + "' to '" + discovery + "'");
        }
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
            if (chain[i].to_version != chain[i + 1].from_version) {
                throw ChainMismatch("chain is broken between '" + chain[i].to_version + "' and '" +
                                    chain[i + 1].from_version + "'");
            }
        }
    }

    TranslationResult result;
    result.bug_id = entry.entry_id;
    result.target_version = std::string(target_version);
    for (const auto& loc : entry.fault_locations) {
        if (discovery_tree != nullptr) {
            check_inside(loc, *discovery_tree);
        }
        result.locations.push_back(TrackedLocation::start(loc));
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        result.locations = step_back(result.locations, it->payload, it->from_version);
    }
    result.identified = !result.active_locations().empty();
    return result;
}

std::string Mismatch::describe(std::string_view discovery_version, std::string_view target_version) const {
    return to_string(origin) + " in " + std::string(discovery_version) + " is \"" + origin_text + "\" but " +
           to_string(current) + " in " + std::string(target_version) + " is \"" + target_text + "\"";
}

namespace {

std::optional<std::string> line_text(const FileTree& tree, const FaultLocation& loc) {
    const auto it = tree.find(loc.path);
    if (it == tree.end()) {
        return std::nullopt;
    }
    const auto lines = split_lines(it->second).lines;
    if (loc.line == 0 || loc.line > lines.size()) {
        return std::nullopt;
    }
    return lines[loc.line - 1];
}

}  // namespace

std::vector<Mismatch> verify_translation(const TranslationResult& result, const FileTree& discovery,
                                         const FileTree& target) {
    std::vector<Mismatch> out;
    for (const auto& l : result.locations) {
        if (!l.active()) {
            continue;
        }
        const auto a = line_text(discovery, l.origin);
        const auto b = line_text(target, *l.current);
        if (!a || !b || *a != *b) {
            out.push_back({l.origin, *l.current, a.value_or("<missing>"), b.value_or("<missing>")});
        }
    }
    return out;
}

}  // namespace mfmine::locate
