#pragma once

#include "mfmine/diff.hpp"
#include "mfmine/history.hpp"
#include "mfmine/location.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfmine::locate {

enum class DropReason {
    Modified,             ///< the line was rewritten by a newer diff
    Added,                ///< the line did not exist before a newer diff
    FileRemovedBackward,  ///< the whole file was added by a newer diff
};

std::string_view to_string(DropReason reason);
DropReason parse_drop_reason(std::string_view text);

struct TrackedLocation {
    enum class Status { Active, Dropped };

    FaultLocation origin;
    std::optional<FaultLocation> current;
    Status status = Status::Active;
    /// Set once dropped: the older version the location could not reach.
    std::string dropped_at;
    DropReason reason = DropReason::Modified;

    bool active() const noexcept { return status == Status::Active; }

    static TrackedLocation start(const FaultLocation& loc) { return {loc, loc, Status::Active, {}, {}}; }

    friend bool operator==(const TrackedLocation&, const TrackedLocation&) = default;
};

struct TranslationResult {
    std::string bug_id;
    std::string target_version;
    std::vector<TrackedLocation> locations;
    bool identified = false;

    std::vector<FaultLocation> active_locations() const;
};

/// Moves every active location one diff back (post-state to pre-state).
/// Renamed files are followed, shifted lines are renumbered and lines the
/// diff modified or added stop being tracked. `pre_version` is recorded on
/// newly dropped locations. When `post_tree` is given, active locations are
/// first checked against it. Throws InvalidCoordinates for a location the
/// diff's post-state cannot contain.
std::vector<TrackedLocation> step_back(const std::vector<TrackedLocation>& locations, const diff::Diff& diff,
                                       std::string_view pre_version = {}, const FileTree* post_tree = nullptr);

/// Translates the entry's fault locations from its buggy version back to
/// `target_version` over `chain` (as returned by interval_diff_chain).
/// Throws ChainMismatch when the chain does not link the two versions.
TranslationResult translate(const history::Entry& entry, std::string_view target_version,
                            const std::vector<history::DiffRef>& chain, const FileTree* discovery_tree = nullptr);

struct Mismatch {
    FaultLocation origin;
    FaultLocation current;
    std::string origin_text;
    std::string target_text;

    std::string describe(std::string_view discovery_version = "discovery",
                         std::string_view target_version = "target") const;
};

/// Compares the text of every active location at the target with its text
/// at discovery. Missing files or lines count as mismatches.
std::vector<Mismatch> verify_translation(const TranslationResult& result, const FileTree& discovery,
                                         const FileTree& target);

}  // namespace mfmine::locate
