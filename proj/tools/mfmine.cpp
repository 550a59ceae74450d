// mfmine: mine multi-fault program versions from single-fault bug datasets.
//
// Exit codes: 0 success, 1 usage error, 2 validation failure, 3 mining
// finished with per-entry failures.

#include "mfmine/coverage.hpp"
#include "mfmine/error.hpp"
#include "mfmine/history.hpp"
#include "mfmine/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace fs = std::filesystem;
using namespace mfmine;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInvalid = 2;
constexpr int kPartial = 3;

struct Options {
    fs::path manifest = "manifest.json";
    fs::path multifault = "multifault.json";
    std::string out;
    unsigned jobs = 1;
    std::optional<double> threshold;
    bool verify_chain = false;
    bool revalidate = false;
    bool detect_renames = false;
};

void emit(const Options& opts, const std::string& text) {
    if (opts.out.empty() || opts.out == "-") {
        std::cout << text;
    } else {
        write_file_atomic(opts.out, text);
    }
}

history::ProjectManifest load_project(const Options& opts) {
    return history::load_manifest(opts.manifest, {opts.detect_renames});
}

int report_chain(const history::ProjectManifest& pm, const history::VersionProvider& provider) {
    const auto failures = history::verify_chain(pm, provider);
    for (const auto& f : failures) {
        std::cerr << "chain: " << f.from_version << " -> " << f.to_version << ": " << f.reason << '\n';
    }
    return failures.empty() ? kOk : kInvalid;
}

int cmd_mine(const Options& opts) {
    const auto pm = load_project(opts);
    const auto provider = history::make_provider(pm);
    if (opts.verify_chain && report_chain(pm, *provider) != kOk) {
        return kInvalid;
    }
    const auto mf = pipeline::mine(pm, *provider, {opts.jobs, opts.threshold, true});
    pipeline::save_multifault(opts.out.empty() ? opts.multifault : fs::path(opts.out), mf);

    std::size_t bugs = 0;
    for (const auto& e : mf.entries) {
        bugs += e.bugs.size();
    }
    std::cerr << "mined " << mf.entries.size() << " versions, " << bugs << " bug records, " << mf.drop_events.size()
              << " drop events\n";
    for (const auto& d : mf.diagnostics) {
        std::cerr << (d.severity == pipeline::Diagnostic::Severity::Error ? "error" : "warning") << ": " << d.entry_id
                  << ": " << d.message << '\n';
    }
    return mf.partial_failure() ? kPartial : kOk;
}

int cmd_checkout(const Options& opts, const std::string& version, bool all) {
    if (version.empty() == !all) {
        std::cerr << "checkout needs exactly one of --version or --all\n";
        return kUsage;
    }
    const auto pm = load_project(opts);
    const auto mf = pipeline::load_multifault(opts.multifault);
    const auto provider = history::make_provider(pm);
    const fs::path base = opts.out.empty() ? fs::path("checkout") : fs::path(opts.out);

    std::vector<std::string> versions;
    if (all) {
        for (const auto& e : mf.entries) {
            versions.push_back(e.target_version);
        }
    } else {
        versions.push_back(version);
    }
    bool clean = true;
    for (const auto& v : versions) {
        const auto dir = all ? base / v : base;
        const auto report = pipeline::multi_checkout(mf, pm, *provider, v, dir, {opts.revalidate, opts.threshold});
        std::cout << v << ": " << report.bugs.size() << " bug(s) -> " << dir.string();
        if (report.revalidated) {
            std::cout << (report.problems.empty() ? " [revalidated]" : " [REVALIDATION FAILED]");
        }
        std::cout << '\n';
        for (const auto& b : report.bugs) {
            std::cout << "  " << b.bug_id << ':';
            for (const auto& t : b.test_ids) {
                std::cout << ' ' << t;
            }
            std::cout << '\n';
        }
        for (const auto& p : report.problems) {
            std::cerr << "  problem: " << p << '\n';
        }
        clean = clean && report.problems.empty();
    }
    return clean ? kOk : kInvalid;
}

int cmd_stats(const Options& opts, const std::string& format, const std::string& table) {
    const auto pm = load_project(opts);
    const auto mf = pipeline::load_multifault(opts.multifault);
    const auto provider = history::make_provider(pm);
    const auto report = pipeline::stats(mf, pm, provider.get());
    if (format == "json") {
        emit(opts, pipeline::stats_json(report));
        return kOk;
    }
    const auto which = table == "versions" ? pipeline::StatsTable::Versions
                       : table == "bugs"   ? pipeline::StatsTable::Bugs
                                           : pipeline::StatsTable::Summary;
    emit(opts, pipeline::stats_csv(report, which));
    return kOk;
}

int cmd_info(const Options& opts, const std::string& selector) {
    const auto pm = load_project(opts);
    const auto mf = pipeline::load_multifault(opts.multifault);
    emit(opts, pipeline::info(mf, pm, selector));
    return kOk;
}

int cmd_to_tcm(const Options& opts, const fs::path& coverage_dir) {
    emit(opts, tcm::to_tcm(tcm::ingest_per_test_coverage(coverage_dir)));
    return kOk;
}

int cmd_identify(const Options& opts, const fs::path& tcm_file, const fs::path& locations) {
    const auto matrix = tcm::parse_tcm(read_file(tcm_file));
    emit(opts, tcm::to_tcm(tcm::identify_faults(matrix, tcm::load_tagging(locations))));
    return kOk;
}

int cmd_verify(const Options& opts) {
    const auto pm = load_project(opts);
    const auto provider = history::make_provider(pm);
    const int rc = report_chain(pm, *provider);
    if (rc == kOk) {
        std::cout << pm.project_name << ": " << pm.versions.size() << " versions, " << pm.entries.size()
                  << " entries, diff chain verified\n";
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mine multi-fault program versions from single-fault bug datasets", "mfmine"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opts;
    app.add_option("--manifest", opts.manifest, "Project manifest (JSON)")->capture_default_str();
    app.add_option("--multifault", opts.multifault, "Multi-fault manifest read by checkout/stats/info")
        ->capture_default_str();
    app.add_option("--out", opts.out, "Output file or directory (default depends on the command)");
    app.add_option("--jobs", opts.jobs, "Entries mined concurrently")->check(CLI::PositiveNumber);
    app.add_option("--threshold", opts.threshold, "Output similarity threshold in (0, 1]")
        ->check(CLI::Range(0.0, 1.0));
    app.add_flag("--verify-chain", opts.verify_chain, "Check that stored diffs reproduce every version first");
    app.add_flag("--revalidate", opts.revalidate, "Re-run exposing tests and re-check locations after checkout");
    app.add_flag("--detect-renames", opts.detect_renames, "Fuse delete/add pairs with equal content into renames");

    auto* mine = app.add_subcommand("mine", "Transplant tests and translate fault locations");

    std::string version;
    bool all = false;
    auto* checkout = app.add_subcommand("checkout", "Materialize a multi-fault version with its bug.locations files");
    checkout->add_option("--version", version, "Version to check out");
    checkout->add_flag("--all", all, "Check out every version into <out>/<version>");

    std::string format = "csv";
    std::string table = "summary";
    auto* stats = app.add_subcommand("stats", "Dataset statistics");
    stats->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    stats->add_option("--table", table, "CSV table")
        ->check(CLI::IsMember({"summary", "versions", "bugs"}))
        ->capture_default_str();

    std::string selector;
    auto* info = app.add_subcommand("info", "Describe the project, a version or a bug");
    info->add_option("selector", selector, "project | version:<id> | bug:<id> | <id>")->required();

    fs::path coverage_dir;
    auto* to_tcm = app.add_subcommand("to-tcm", "Convert per-test coverage files into a TCM matrix");
    to_tcm->add_option("coverage_dir", coverage_dir, "Directory of <test_id>.cov files")->required();

    fs::path tcm_file;
    fs::path locations;
    auto* identify = app.add_subcommand("identify", "Tag faulty elements of a TCM matrix");
    identify->add_option("tcm", tcm_file, "TCM file")->required();
    identify->add_option("--locations", locations, "Directory of bug.locations.<bugId> files")->required();

    auto* verify = app.add_subcommand("verify", "Validate the project manifest and its diff chain");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }
    if (opts.threshold && *opts.threshold <= 0) {
        std::cerr << "--threshold must be greater than 0\n";
        return kUsage;
    }

    try {
        if (mine->parsed()) {
            return cmd_mine(opts);
        }
        if (checkout->parsed()) {
            return cmd_checkout(opts, version, all);
        }
        if (stats->parsed()) {
            return cmd_stats(opts, format, table);
        }
        if (info->parsed()) {
            return cmd_info(opts, selector);
        }
        if (to_tcm->parsed()) {
            return cmd_to_tcm(opts, coverage_dir);
        }
        if (identify->parsed()) {
            return cmd_identify(opts, tcm_file, locations);
        }
        if (verify->parsed()) {
            return cmd_verify(opts);
        }
    } catch (const UnknownSelector& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const UnknownVersion& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    }
    return kUsage;
}
