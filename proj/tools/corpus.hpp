#pragma once

// Synthetic toy project used by the end-to-end tests. Every line of every
// version is produced here, so the generator knows exactly where each bug
// lives and which versions can expose it.

#include "mfmine/file_tree.hpp"

#include <map>
#include <string>
#include <vector>

namespace mfmine::corpus {

constexpr int kVersionCount = 11;

std::string version_id(int index);  // 1 -> "v01"
FileTree version_tree(int index);

struct PlantedBug {
    std::string id;
    int buggy = 0;  // version index
    int fixed = 0;
    std::vector<std::string> trigger_tests;
    /// Discovery-version fault lines (unique within their file).
    std::vector<std::string> fault_lines;
    /// Earlier versions the generator planted the bug in such that the
    /// transplanted tests expose it, newest first.
    std::vector<int> exposed_in;
    /// How the transplant chain ends: "" when it runs out of entries,
    /// otherwise the NotExposed reason at `stop_at`.
    std::string stop_reason;
    int stop_at = 0;
};

const std::vector<PlantedBug>& planted_bugs();

/// Path of the file holding the bug's fault lines at `version`.
std::string fault_file(const PlantedBug& bug, int version);

/// Every file of the corpus directory: manifest.json, versions/, diffs/ and
/// ground_truth.json.
FileTree generate_toy();

}  // namespace mfmine::corpus
