#include "mfmine/transplant.hpp"

#include "mfmine/error.hpp"

#include <stdexcept>

namespace mfmine::transplant {

using harness::TestStatus;

std::string_view to_string(NotExposedReason reason) {
    switch (reason) {
    case NotExposedReason::Passed:
        return "Passed";
    case NotExposedReason::DifferentFailure:
        return "DifferentFailure";
    case NotExposedReason::CompileError:
        return "CompileError";
    case NotExposedReason::RuntimeError:
        return "RuntimeError";
    case NotExposedReason::Timeout:
        return "Timeout";
    }
    return "?";
}

NotExposedReason parse_not_exposed_reason(std::string_view text) {
    for (auto r : {NotExposedReason::Passed, NotExposedReason::DifferentFailure, NotExposedReason::CompileError,
                   NotExposedReason::RuntimeError, NotExposedReason::Timeout}) {
        if (to_string(r) == text) {
            return r;
        }
    }
    throw std::invalid_argument("unknown reason '" + std::string(text) + "'");
}

SourceSide prepare_source(const history::Entry& entry, const TransplantContext& ctx) {
    SourceSide side;
    side.tree = ctx.provider.tree(entry.buggy);
    const auto model = build_suite_model(side.tree, ctx.extractor);
    side.closure = extract_closure(model, entry.trigger_tests);
    side.outcomes = ctx.harness.run(side.tree, entry.trigger_tests, entry.buggy.version_id);
    return side;
}

namespace {

NotExposedReason reason_for(const harness::TestOutcome& source, const harness::TestOutcome& target) {
    switch (target.status) {
    case TestStatus::Pass:
        return NotExposedReason::Passed;
    case TestStatus::CompileError:
        return source.status == TestStatus::CompileError ? NotExposedReason::DifferentFailure
                                                         : NotExposedReason::CompileError;
    case TestStatus::RuntimeError:
        return source.status == TestStatus::RuntimeError ? NotExposedReason::DifferentFailure
                                                         : NotExposedReason::RuntimeError;
    case TestStatus::Timeout:
        return source.status == TestStatus::Timeout ? NotExposedReason::DifferentFailure : NotExposedReason::Timeout;
    case TestStatus::Fail:
        break;
    }
    return NotExposedReason::DifferentFailure;
}

SpliceResult splice_into(const history::Entry& entry, const SourceSide& source, const FileTree& target_tree,
                         const TransplantContext& ctx) {
    const auto target_model = build_suite_model(target_tree, ctx.extractor);
    return splice(target_tree, target_model, source.closure, entry.entry_id);
}

}  // namespace

FileTree spliced_tree(const history::Entry& entry, const SourceSide& source, const history::Entry& target,
                      const TransplantContext& ctx) {
    return splice_into(entry, source, ctx.provider.tree(target.buggy), ctx).tree;
}

TransplantRecord transplant_once(const history::Entry& entry, const SourceSide& source, const history::Entry& target,
                                 const TransplantContext& ctx) {
    TransplantRecord rec;
    rec.bug_id = entry.entry_id;
    rec.target_entry_id = target.entry_id;
    rec.source_version = entry.buggy.version_id;
    rec.target_version = target.buggy.version_id;
    for (const auto& u : source.closure) {
        rec.units_copied.push_back(u.unit_id);
    }
    rec.source_outcomes = source.outcomes;

    const auto target_tree = ctx.provider.tree(target.buggy);
    auto spliced = splice_into(entry, source, target_tree, ctx);
    rec.splice_report = spliced.report;
    rec.splice_edits = std::move(spliced.edits);
    for (const auto& t : entry.trigger_tests) {
        rec.test_ids.push_back(spliced.final_id(t));
    }
    rec.target_outcomes = ctx.harness.run(spliced.tree, rec.test_ids, target.buggy.version_id);

    const auto& cfg = ctx.harness.config();
    rec.exposed = !rec.units_copied.empty();
    for (std::size_t i = 0; i < rec.test_ids.size() && rec.exposed; ++i) {
        const auto& src = rec.source_outcomes[i];
        const auto& dst = rec.target_outcomes[i];
        if (!harness::same_failure(src, dst, cfg.threshold, cfg.scrub)) {
            rec.exposed = false;
            rec.reason = reason_for(src, dst);
        }
    }
    return rec;
}

TransplantRecord transplant_once(const history::Entry& entry, const history::Entry& target,
                                 const TransplantContext& ctx) {
    return transplant_once(entry, prepare_source(entry, ctx), target, ctx);
}

ChainResult transplant_chain(const history::Entry& entry, const std::vector<history::Entry>& earlier,
                             const TransplantContext& ctx) {
    ChainResult result;
    if (earlier.empty()) {
        return result;
    }
    try {
        const auto source = prepare_source(entry, ctx);
        for (const auto& target : earlier) {
            result.records.push_back(transplant_once(entry, source, target, ctx));
            if (!result.records.back().exposed) {
                break;
            }
        }
    } catch (const WorkspaceFailure& e) {
        result.workspace_failure = e.what();
    }
    return result;
}

}  // namespace mfmine::transplant
