#include "corpus.hpp"
#include "mfmine/error.hpp"
#include "mfmine/pipeline.hpp"
#include "support/support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

using namespace mfmine;
using namespace mfmine::pipeline;

namespace {

const std::filesystem::path kCorpus = MFMINE_CORPUS_DIR;

constexpr double kTolerance = 1e-9;

struct Toy {
    history::ProjectManifest pm = history::load_manifest(kCorpus / "manifest.json");
    std::unique_ptr<history::VersionProvider> provider = history::make_provider(pm);
};

const MultiFaultManifest& mined() {
    static const MultiFaultManifest mf = [] {
        const Toy toy;
        return mine(toy.pm, *toy.provider);
    }();
    return mf;
}

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + MFMINE_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const std::filesystem::path& p) {
    return "\"" + p.string() + "\"";
}

}  // namespace

TEST(Corpus, CheckedInCopyIsCurrent) {
    EXPECT_EQ(corpus::generate_toy(), read_tree(kCorpus));
}

TEST(Mine, ToyCorpusMatchesGroundTruth) {
    const auto& mf = mined();
    const auto diffs = mfmine::testing::compare_with_truth(mf, mfmine::testing::load_ground_truth(kCorpus / "ground_truth.json"));
    for (const auto& d : diffs) {
        ADD_FAILURE() << d;
    }
    EXPECT_FALSE(mf.partial_failure());
    EXPECT_EQ(mf.project_name, "toy");
}

TEST(Mine, CollisionRenamesTransplantedTest) {
    const auto* v06 = mined().find("v06");
    ASSERT_NE(v06, nullptr);
    EXPECT_EQ(v06->native_bug_id, "C");
    const auto* e = v06->find("E");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->test_ids, std::vector<std::string>{"test_norm__mf_E"});
}

TEST(Mine, ParallelRunGivesSameManifest) {
    const Toy toy;
    MineOptions options;
    options.jobs = 4;
    EXPECT_TRUE(same_content(mine(toy.pm, *toy.provider, options), mined()));
}

TEST(Mine, SingleEntryHasOnlyItsNativeBug) {
    Toy toy;
    toy.pm.entries.resize(1);
    const auto mf = mine(toy.pm, *toy.provider);
    ASSERT_EQ(mf.entries.size(), 1u);
    EXPECT_EQ(mf.entries[0].target_version, "v02");
    ASSERT_EQ(mf.entries[0].bugs.size(), 1u);
    EXPECT_EQ(mf.entries[0].bugs[0].bug_id, "A");
    EXPECT_TRUE(mf.entries[0].bugs[0].transplanted_unit_ids.empty());
    EXPECT_TRUE(mf.transplants.empty());
    EXPECT_TRUE(mf.drop_events.empty());
}

TEST(Mine, MissingSnapshotIsPartialFailure) {
    const Toy toy;
    history::MemoryProvider partial;
    for (const auto& v : toy.pm.versions) {
        if (v.version_id != "v04") {
            partial.put(v.version_id, toy.provider->tree(v));
        }
    }
    const auto mf = mine(toy.pm, partial);
    EXPECT_TRUE(mf.partial_failure());
    // the dataset's own bug is still listed, but nothing reached v04 or beyond it
    ASSERT_NE(mf.find("v04"), nullptr);
    EXPECT_EQ(mf.find("v04")->bugs.size(), 1u);
    EXPECT_EQ(mf.find("v02")->find("E"), nullptr);
    EXPECT_NE(mf.find("v06")->find("E"), nullptr);
}

TEST(MultiFaultJson, RoundTrip) {
    const auto& mf = mined();
    const auto back = parse_multifault(to_json(mf));
    EXPECT_TRUE(same_content(back, mf));
    EXPECT_EQ(back.created, mf.created);
    EXPECT_EQ(back.transplants, mf.transplants);
    EXPECT_EQ(to_json(back), to_json(mf));
    EXPECT_THROW(parse_multifault("{}"), MalformedManifest);
}

TEST(Checkout, WritesBundleAndLocationFiles) {
    const Toy toy;
    const TempDir dir;
    const auto out = dir.path() / "v08";
    CheckoutOptions options;
    options.revalidate = true;
    const auto report = multi_checkout(mined(), toy.pm, *toy.provider, "v08", out, options);
    EXPECT_TRUE(report.revalidated);
    EXPECT_TRUE(report.problems.empty());
    ASSERT_EQ(report.bugs.size(), 2u);
    EXPECT_EQ(read_file(out / location_file_name("D")), "src/arith.mf:6\n");
    EXPECT_EQ(read_file(out / location_file_name("E")), "src/util/norm.mf:4\n");
    EXPECT_EQ(location_file_name("E"), "bug.locations.E");
}

TEST(Checkout, Errors) {
    const Toy toy;
    const TempDir dir;
    EXPECT_THROW(multi_checkout(mined(), toy.pm, *toy.provider, "v01", dir.path() / "a"), UnknownVersion);
    write_file(dir.path() / "busy" / "keep.txt", "x");
    EXPECT_THROW(multi_checkout(mined(), toy.pm, *toy.provider, "v02", dir.path() / "busy"), WorkspaceFailure);
}

TEST(LocationFile, SortedAndUnique) {
    EXPECT_EQ(location_file_content({{"b", 2}, {"a", 9}, {"b", 2}, {"a", 10}}), "a:9\na:10\nb:2\n");
}

TEST(Stats, HandBuiltProject) {
    const auto r = stats(mfmine::testing::stats_manifest(), mfmine::testing::stats_project());
    EXPECT_EQ(r.versions, 3u);
    EXPECT_NEAR(r.mean_bugs_per_version, 5.0 / 3.0, kTolerance);
    EXPECT_NEAR(r.mean_added_tests_per_version, 1.0, kTolerance);
    EXPECT_NEAR(r.mean_tests_per_bug, 1.5, kTolerance);
    EXPECT_EQ(r.drop_events, 1u);
    EXPECT_EQ(r.transplanted_identifications, 2u);
    EXPECT_NEAR(r.drop_rate_percent, 100.0 / 3.0, kTolerance);
    ASSERT_EQ(r.lifetimes.size(), 3u);
    EXPECT_EQ(r.lifetimes[0].bug_id, "b1");
    EXPECT_NEAR(r.lifetimes[0].days, 14.0, kTolerance);
    EXPECT_EQ(r.lifetimes[1].earliest_version, "v1");
    EXPECT_EQ(r.lifetimes[1].versions, 2u);
    EXPECT_NEAR(r.lifetimes[1].days, 31.0, kTolerance);
    EXPECT_EQ(r.lifetimes[2].earliest_version, "v2");
    EXPECT_NEAR(r.lifetimes[2].days, 46.0, kTolerance);
}

TEST(Stats, EmptyManifest) {
    const auto r = stats(MultiFaultManifest{}, mfmine::testing::stats_project());
    EXPECT_EQ(r.versions, 0u);
    EXPECT_EQ(r.mean_bugs_per_version, 0.0);
    EXPECT_EQ(r.drop_rate_percent, 0.0);
}

TEST(Stats, ForeignVersionsAreRejected) {
    auto mf = mfmine::testing::stats_manifest();
    mf.drop_events[0].target_version = "v9";
    EXPECT_THROW(stats(mf, mfmine::testing::stats_project()), ManifestMismatch);
    mf = mfmine::testing::stats_manifest();
    mf.entries[0].target_version = "v9";
    EXPECT_THROW(stats(mf, mfmine::testing::stats_project()), ManifestMismatch);
}

TEST(Stats, ToyCorpus) {
    const Toy toy;
    const auto r = stats(mined(), toy.pm, toy.provider.get());
    EXPECT_EQ(r.versions, 6u);
    EXPECT_EQ(r.drop_events, 1u);
    EXPECT_EQ(r.transplanted_identifications, 5u);
    EXPECT_NEAR(r.drop_rate_percent, 100.0 / 6.0, kTolerance);
    EXPECT_GT(r.mean_bugs_per_loc, 0.0);
    EXPECT_EQ(stats_csv(r).substr(0, 8), "project,");
    EXPECT_FALSE(stats_json(r).empty());
}

TEST(Info, Selectors) {
    const Toy toy;
    const auto& mf = mined();
    for (const auto* sel : {"project", "toy", "version:v04", "v04", "bug:E", "E"}) {
        EXPECT_FALSE(info(mf, toy.pm, sel).empty()) << sel;
    }
    EXPECT_EQ(info(mf, toy.pm, "v04"), info(mf, toy.pm, "version:v04"));
    EXPECT_EQ(info(mf, toy.pm, "E"), info(mf, toy.pm, "bug:E"));
    EXPECT_THROW(info(mf, toy.pm, "nope"), UnknownSelector);
    EXPECT_THROW(info(mf, toy.pm, "version:v99"), UnknownSelector);
}

TEST(Cli, ExitCodes) {
    const TempDir dir;
    const auto manifest = quoted(kCorpus / "manifest.json");
    const auto mf = dir.path() / "multifault.json";
    const auto common = "--manifest " + manifest + " --multifault " + quoted(mf);

    EXPECT_EQ(cli(""), 1);
    EXPECT_EQ(cli("frobnicate"), 1);
    EXPECT_EQ(cli("--help"), 0);
    EXPECT_EQ(cli(common + " verify"), 0);
    EXPECT_EQ(cli(common + " --verify-chain mine"), 0);
    ASSERT_TRUE(std::filesystem::exists(mf));
    EXPECT_TRUE(same_content(load_multifault(mf), mined()));
    EXPECT_EQ(cli(common + " info E"), 0);
    EXPECT_EQ(cli(common + " info nope"), 1);
    EXPECT_EQ(cli(common + " stats --format json"), 0);
    EXPECT_EQ(cli(common + " checkout --version v01 --out " + quoted(dir.path() / "co")), 1);
    EXPECT_EQ(cli(common + " checkout --version v09 --revalidate --out " + quoted(dir.path() / "co")), 0);
    EXPECT_EQ(cli(common + " checkout --version v09 --out " + quoted(dir.path() / "co")), 2);
    EXPECT_EQ(cli("--manifest " + quoted(dir.path() / "absent.json") + " verify"), 2);
    EXPECT_EQ(cli("--threshold 0 mine"), 1);
}
