#pragma once

#include "mfmine/history.hpp"
#include "mfmine/runner.hpp"
#include "mfmine/suite.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfmine::transplant {

enum class NotExposedReason { Passed, DifferentFailure, CompileError, RuntimeError, Timeout };

std::string_view to_string(NotExposedReason reason);
NotExposedReason parse_not_exposed_reason(std::string_view text);

struct TransplantRecord {
    std::string bug_id;
    std::string target_entry_id;
    std::string source_version;
    std::string target_version;
    std::vector<std::string> units_copied;
    std::vector<SpliceAction> splice_report;
    diff::Diff splice_edits;
    /// Trigger test ids as they are named in the spliced target suite.
    std::vector<std::string> test_ids;
    bool exposed = false;
    NotExposedReason reason = NotExposedReason::Passed;  // meaningful when !exposed
    std::vector<harness::TestOutcome> source_outcomes;
    std::vector<harness::TestOutcome> target_outcomes;
};

/// Shared inputs for transplanting one entry's tests.
struct TransplantContext {
    const history::VersionProvider& provider;
    const harness::Harness& harness;
    ExtractorConfig extractor;
};

/// The closure of the entry's trigger tests and their outcomes in the
/// entry's own buggy version; computed once per chain.
struct SourceSide {
    FileTree tree;
    std::vector<TestUnit> closure;
    std::vector<harness::TestOutcome> outcomes;
};

SourceSide prepare_source(const history::Entry& entry, const TransplantContext& ctx);

/// Splices the trigger-test closure of `entry` into `target`'s buggy version
/// and runs it there. Throws WorkspaceFailure when a version cannot be
/// materialized.
TransplantRecord transplant_once(const history::Entry& entry, const history::Entry& target,
                                 const TransplantContext& ctx);
TransplantRecord transplant_once(const history::Entry& entry, const SourceSide& source, const history::Entry& target,
                                 const TransplantContext& ctx);

/// The spliced target tree of a record's transplant (re-derived on demand).
FileTree spliced_tree(const history::Entry& entry, const SourceSide& source, const history::Entry& target,
                      const TransplantContext& ctx);

struct ChainResult {
    std::vector<TransplantRecord> records;
    /// Set when a workspace could not be materialized; records hold the
    /// transplants completed before that.
    std::optional<std::string> workspace_failure;
};

/// Transplants into `earlier` (newest first) until the fault is no longer
/// exposed; the terminating record is included.
ChainResult transplant_chain(const history::Entry& entry, const std::vector<history::Entry>& earlier,
                             const TransplantContext& ctx);

}  // namespace mfmine::transplant
