#include "mfmine/error.hpp"
#include "mfmine/suite.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace mfmine;
using namespace mfmine::transplant;

namespace {

std::vector<std::string> ids(const std::vector<TestUnit>& units) {
    std::vector<std::string> out;
    for (const auto& u : units) {
        out.push_back(u.unit_id);
    }
    return out;
}

const ExtractorConfig kAnnotations{};

const std::string kChain =
    "#[unit id=A kind=test deps=B]\nassert b == 1\n\n"
    "#[unit id=B kind=fixture deps=C]\nlet b = c\n\n"
    "#[unit id=C kind=fixture]\nlet c = 1\n";

const std::string kTarget =
    "#[unit id=imp kind=import]\nimport m\n\n"
    "#[unit id=fx kind=fixture]\nlet v = 1\n\n"
    "#[unit id=test_old kind=test deps=imp,fx]\nassert v == 1\n";

TestSuiteModel model_of(const FileTree& tree) {
    return build_suite_model(tree, kAnnotations);
}

}  // namespace

TEST(SuiteModel, AnnotatedUnitsAndDeps) {
    const auto units = parse_annotated_file("tests/t.mf", kChain);
    ASSERT_EQ(units.size(), 3u);
    EXPECT_EQ(units[0].unit_id, "A");
    EXPECT_EQ(units[0].kind, UnitKind::Test);
    EXPECT_EQ(units[0].deps, std::vector<std::string>{"B"});
    EXPECT_EQ(units[1].kind, UnitKind::Fixture);
    EXPECT_EQ(units[1].body, (std::vector<std::string>{"#[unit id=B kind=fixture deps=C]", "let b = c"}));
    EXPECT_TRUE(units[2].deps.empty());
}

TEST(SuiteModel, EmptySuiteHasNoUnits) {
    const auto m = model_of(FileTree{{"src/m.mf", "module m\n"}});
    EXPECT_TRUE(m.units.empty());
    EXPECT_TRUE(m.files.empty());
}

TEST(SuiteModel, MalformedMarkersFailExtraction) {
    EXPECT_THROW(parse_annotated_file("t", "#[unit kind=test]\n"), ExtractorFailure);
    EXPECT_THROW(parse_annotated_file("t", "#[unit id=a colour=red]\n"), ExtractorFailure);
    EXPECT_THROW(parse_annotated_file("t", "#[unit id=a]\n#[unit id=a]\n"), ExtractorFailure);
    EXPECT_THROW(parse_annotated_file("t", "#[unit id=a kind=widget]\n"), ExtractorFailure);
    EXPECT_THROW(model_of(FileTree{{"tests/a.mf", "#[unit id=x]\n"}, {"tests/b.mf", "#[unit id=x]\n"}}),
                 ExtractorFailure);
}

TEST(SuiteModel, RegexExtractorFindsIndentedBlocks) {
    ExtractorConfig ex;
    ex.kind = ExtractorConfig::Kind::Regex;
    ex.glob = "tests/**";
    ex.rules = {{R"(def (test_\w+)\(.*)", UnitKind::Test}, {R"(def (make_\w+)\(.*)", UnitKind::Helper}};
    const FileTree tree{{"tests/test_m.py",
                         "import m\n\ndef make_box():\n    return m.Box()\n\n"
                         "def test_box():\n    b = make_box()\n\n    assert b.ok\n\nprint('tail')\n"}};
    const auto m = build_suite_model(tree, ex);
    ASSERT_EQ(m.units.size(), 2u);
    const auto* t = m.find("test_box");
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(t->body.size(), 4u);
    EXPECT_EQ(t->deps, std::vector<std::string>{"make_box"});
    EXPECT_EQ(m.find("make_box")->kind, UnitKind::Helper);

    ex.rules = {{R"(def test_\w+\(.*)", UnitKind::Test}};
    EXPECT_THROW(build_suite_model(tree, ex), ExtractorFailure);
    ex.rules.clear();
    EXPECT_THROW(build_suite_model(tree, ex), ExtractorFailure);
}

TEST(Closure, ChainIsDependenciesFirst) {
    const auto m = model_of(FileTree{{"tests/t.mf", kChain}});
    EXPECT_EQ(ids(extract_closure(m, {"A"})), (std::vector<std::string>{"C", "B", "A"}));
    EXPECT_EQ(ids(extract_closure(m, {"C"})), std::vector<std::string>{"C"});
    EXPECT_TRUE(extract_closure(m, {}).empty());
}

TEST(Closure, UnknownRootAndCycles) {
    const auto m = model_of(FileTree{{"tests/t.mf", kChain}});
    EXPECT_THROW(extract_closure(m, {"Z"}), UnknownUnit);

    const auto cyclic = model_of(FileTree{
        {"tests/t.mf", "#[unit id=p deps=q]\nassert 1\n#[unit id=q deps=r]\nlet x = 1\n#[unit id=r deps=p]\nlet y = 1\n"}});
    try {
        extract_closure(cyclic, {"p"});
        FAIL() << "expected CyclicDependency";
    } catch (const CyclicDependency& e) {
        EXPECT_EQ(e.cycle(), (std::vector<std::string>{"p", "q", "r", "p"}));
    }
}

TEST(Closure, MatchesReachabilityOnRandomDags) {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 200; ++round) {
        const int n = 1 + static_cast<int>(rng() % 15);
        TestSuiteModel m;
        std::map<std::string, std::vector<std::string>> edges;
        for (int i = 0; i < n; ++i) {
            TestUnit u;
            u.unit_id = "u" + std::to_string(100 + i);
            u.file = "tests/t.mf";
            for (int j = 0; j < i; ++j) {
                if (rng() % 4 == 0) {
                    u.deps.push_back("u" + std::to_string(100 + j));
                }
            }
            if (rng() % 6 == 0) {
                u.deps.push_back("missing");
            }
            edges[u.unit_id] = u.deps;
            m.units.push_back(u);
        }
        std::vector<std::string> roots;
        for (const auto& u : m.units) {
            if (rng() % 3 == 0) {
                roots.push_back(u.unit_id);
            }
        }

        std::set<std::string> reach;
        std::vector<std::string> todo(roots);
        while (!todo.empty()) {
            const auto id = todo.back();
            todo.pop_back();
            if (id == "missing" || !reach.insert(id).second) {
                continue;
            }
            for (const auto& d : edges[id]) {
                todo.push_back(d);
            }
        }

        const auto closure = ids(extract_closure(m, roots));
        ASSERT_EQ(std::set<std::string>(closure.begin(), closure.end()), reach);
        ASSERT_EQ(closure.size(), reach.size());
        for (std::size_t i = 0; i < closure.size(); ++i) {
            for (const auto& d : edges[closure[i]]) {
                if (d != "missing") {
                    const auto at = std::find(closure.begin(), closure.end(), d) - closure.begin();
                    ASSERT_LT(static_cast<std::size_t>(at), i) << closure[i] << " before its dependency " << d;
                }
            }
        }
    }
}

TEST(Splice, InsertsAppendsAndReuses) {
    const FileTree target{{"tests/a_test.mf", kTarget}};
    const auto source = model_of(FileTree{{"tests/a_test.mf", kTarget + "\n#[unit id=test_new deps=imp]\nassert 2 == 2\n"}});
    const auto units = extract_closure(source, {"test_new"});
    const auto r = splice(target, model_of(target), units, "B");
    EXPECT_EQ(r.report, (std::vector<SpliceAction>{{"imp", SpliceActionKind::ReusedIdentical, "imp"},
                                                   {"test_new", SpliceActionKind::Inserted, "test_new"}}));
    EXPECT_EQ(r.tree.at("tests/a_test.mf"), kTarget + "\n#[unit id=test_new deps=imp]\nassert 2 == 2\n");
    EXPECT_EQ(diff::apply(r.edits, target), r.tree);
}

TEST(Splice, CollisionRenamesAndRewritesReferences) {
    const FileTree target{{"tests/a_test.mf", kTarget}};
    const auto source = model_of(FileTree{
        {"tests/a_test.mf",
         "#[unit id=imp kind=import]\nimport m\n\n#[unit id=fx kind=fixture]\nlet v = 2\n\n"
         "#[unit id=test_two kind=test deps=imp,fx]\nassert v == 2\n"}});
    const auto r = splice(target, model_of(target), extract_closure(source, {"test_two"}), "B");
    EXPECT_EQ(r.final_id("fx"), "fx__mf_B");
    EXPECT_EQ(r.final_id("test_two"), "test_two");
    const auto after = model_of(r.tree);
    EXPECT_TRUE(after.unresolved().empty());
    ASSERT_NE(after.find("test_two"), nullptr);
    EXPECT_EQ(after.find("test_two")->deps, (std::vector<std::string>{"imp", "fx__mf_B"}));
    // the original fixture is untouched
    EXPECT_EQ(after.find("fx")->body, (std::vector<std::string>{"#[unit id=fx kind=fixture]", "let v = 1"}));
}

TEST(Splice, SecondSpliceIsNoOp) {
    const FileTree target{{"tests/a_test.mf", kTarget}};
    const auto source = model_of(FileTree{
        {"tests/a_test.mf", "#[unit id=fx kind=fixture]\nlet v = 9\n\n#[unit id=t9 deps=fx]\nassert v == 9\n"},
        {"tests/new_test.mf", "#[unit id=t_other]\nassert 1\n"}});
    const auto units = extract_closure(source, {"t9", "t_other"});
    const auto once = splice(target, model_of(target), units, "Q");
    const auto twice = splice(once.tree, model_of(once.tree), units, "Q");
    EXPECT_EQ(twice.tree, once.tree);
    EXPECT_TRUE(twice.edits.empty());
    EXPECT_EQ(once.tree.at("tests/new_test.mf"), "#[unit id=t_other]\nassert 1\n");
    for (const auto& a : twice.report) {
        EXPECT_NE(a.action, SpliceActionKind::Inserted) << a.unit_id;
        EXPECT_EQ(a.final_id, once.final_id(a.unit_id));
    }
}

TEST(Splice, ReplaceWordKeepsLongerIdentifiers) {
    EXPECT_EQ(replace_word("fx fx_two fx,fx2 (fx)", "fx", "g"), "g fx_two g,fx2 (g)");
}
