#pragma once

// Generators, brute-force oracles and acceptance checks shared by the
// property tests and the acceptance binary.

#include "mfmine/coverage.hpp"
#include "mfmine/diff.hpp"
#include "mfmine/file_tree.hpp"
#include "mfmine/history.hpp"
#include "mfmine/location.hpp"
#include "mfmine/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mfmine::testing {

using Rng = std::mt19937_64;

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi);  // inclusive
bool chance(Rng& rng, double p);

// ---- trees and diffs ------------------------------------------------------

/// Small files drawn from a tiny vocabulary, so repeated lines (and therefore
/// ambiguous alignments) are common. Some files lack a final newline.
FileTree random_tree(Rng& rng);

struct Mutation {
    FileTree after;
    std::vector<std::pair<std::string, std::string>> renames;
};

/// Random edit of `before`: line edits, added, deleted and renamed files,
/// flipped final newlines. With `fresh` set every inserted line is a new
/// unique token taken from it.
Mutation mutate(Rng& rng, const FileTree& before, std::uint64_t* fresh = nullptr);

/// Patch oracle: splices hunk line ranges into naively split files without
/// any of the engine's helpers.
FileTree naive_patch(const diff::Diff& d, const FileTree& tree);

// ---- histories with unique lines ------------------------------------------

struct History {
    std::vector<FileTree> trees;  // trees[i] is version v<i>
    std::vector<diff::Diff> diffs;  // diffs[i] turns trees[i] into trees[i+1]
};

std::string history_version(std::size_t i);

/// Up to `max_diffs` steps over trees whose every line is a unique token.
History random_history(Rng& rng, std::size_t max_diffs);

struct OracleOutcome {
    bool active = false;
    FaultLocation current;
    std::string dropped_at;
    bool file_added = false;
};

/// Walks back from the last version by applying inverted diffs to full trees
/// and searching each tracked line's token.
std::vector<OracleOutcome> token_oracle(const History& h, std::size_t target,
                                        const std::vector<FaultLocation>& tracked);

// ---- sequences -------------------------------------------------------------

std::size_t dp_lcs(const std::vector<int>& a, const std::vector<int>& b);

// ---- coverage ---------------------------------------------------------------

tcm::CoverageMatrix random_matrix(Rng& rng, std::size_t max_tests, std::size_t max_elements);

// ---- toy corpus --------------------------------------------------------------

struct GroundTruth {
    /// version -> bug -> locations
    std::map<std::string, std::map<std::string, std::vector<FaultLocation>>> bugs;
    std::vector<std::pair<std::string, std::string>> drops;  // (bug, version)
    /// bug -> [(target, outcome)] where outcome is "Exposed" or the reason
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> chains;
};

GroundTruth load_ground_truth(const std::filesystem::path& file);

/// Differences between a mined manifest and the ground truth; empty when
/// they agree exactly.
std::vector<std::string> compare_with_truth(const pipeline::MultiFaultManifest& mf, const GroundTruth& truth);

// ---- acceptance checks ---------------------------------------------------------

struct Check {
    bool ok = true;
    std::string detail;
    double seconds = 0;
    void fail(const std::string& why);
};

// Limits and sizes the acceptance gate is judged by.
inline constexpr std::size_t kDiffCases = 1000;
inline constexpr double kDiffSeconds = 10.0;
inline constexpr std::size_t kHistories = 500;
inline constexpr std::size_t kMaxHistoryDiffs = 20;
inline constexpr std::size_t kMaxTracked = 50;
inline constexpr double kTranslationSeconds = 30.0;
inline constexpr std::size_t kLcsPairs = 1000;
inline constexpr std::size_t kLcsMaxLength = 200;
inline constexpr std::size_t kLcsLargeLines = 10000;
inline constexpr double kLcsLargeSeconds = 1.0;
inline constexpr double kMiningSeconds = 60.0;
inline constexpr std::size_t kTcmMatrices = 200;
inline constexpr double kAcceptThreshold = 0.9;

Check check_diff_properties(std::uint64_t seed, std::size_t cases);
Check check_translation_oracle(std::uint64_t seed, std::size_t histories);
Check check_lcs_oracle(std::uint64_t seed, std::size_t pairs);
Check check_lcs_large(std::uint64_t seed);
Check check_mining(const std::filesystem::path& corpus);
Check check_revalidation(const std::filesystem::path& corpus);
Check check_tcm(std::uint64_t seed, std::size_t matrices, const std::filesystem::path& golden);
Check check_stats(std::uint64_t seed, const std::filesystem::path& corpus);

/// The hand-built project behind the stats check: four versions, three
/// single-fault entries.
history::ProjectManifest stats_project();
/// Multi-fault manifest over the first three versions of stats_project().
pipeline::MultiFaultManifest stats_manifest();

/// A random but internally consistent (project, multi-fault) pair.
std::pair<history::ProjectManifest, pipeline::MultiFaultManifest> random_mined(Rng& rng);

}  // namespace mfmine::testing
