#include <gtest/gtest.h>

#include <cmath>

#include "monocard/errors.hpp"
#include "monocard/rng.hpp"
#include "monocard/similarity.hpp"
#include "monocard/validator.hpp"
#include "oracles.hpp"

using namespace monocard;

namespace {

// Every sequence over {a,b,c} up to the given length.
std::vector<OpSequence> allSequences(std::size_t maxLen) {
    std::vector<OpSequence> out{{}};
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].size() == maxLen) continue;
        for (const char* t : {"a", "b", "c"}) {
            OpSequence s = out[i];
            s.push_back(t);
            out.push_back(std::move(s));
        }
    }
    return out;
}

PlanNode leafPlan(double rows, std::vector<std::string> ops = {"scan"}) {
    PlanNode root{ops.front(), rows, {}, {}};
    PlanNode* cur = &root;
    for (std::size_t i = 1; i < ops.size(); ++i) {
        cur->children.push_back(PlanNode{ops[i], rows, {}, {}});
        cur = &cur->children.back();
    }
    return root;
}

}  // namespace

TEST(Similarity, SmallExhaustiveAgainstRecursiveOracle) {
    const auto seqs = allSequences(4);
    for (const auto& a : seqs) {
        for (const auto& b : seqs) {
            ASSERT_EQ(editDistance(a, b), testsupport::recursiveEditDistance(a, b));
        }
    }
}

TEST(Similarity, KnownDistances) {
    EXPECT_EQ(editDistance({}, {}), 0u);
    EXPECT_EQ(editDistance({"a"}, {}), 1u);
    EXPECT_EQ(editDistance({"cross join", "scan", "scan"}, {"cross join", "filter", "scan", "scan"}), 1u);
    EXPECT_EQ(editDistance({"filter", "cross join", "scan", "scan"}, {"cross join", "scan", "filter", "scan"}), 2u);
}

TEST(Similarity, ThresholdBoundary) {
    const OpSequence a{"x", "y"};
    EXPECT_TRUE(structurallySimilar(a, {"x", "y"}));
    EXPECT_TRUE(structurallySimilar(a, {"x"}));
    EXPECT_FALSE(structurallySimilar(a, {}));
    EXPECT_TRUE(structurallySimilar(a, {}, 2));
}

TEST(Similarity, RandomLongerPairs) {
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        OpSequence a, b;
        for (auto len = rng.between(0, 14); len > 0; --len) a.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
        for (auto len = rng.between(0, 14); len > 0; --len) b.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
        ASSERT_EQ(editDistance(a, b), testsupport::recursiveEditDistance(a, b));
        ASSERT_EQ(editDistance(a, b), editDistance(b, a));
    }
}

TEST(Validator, PassViolationIncomparable) {
    EXPECT_EQ(checkPair(leafPlan(10), leafPlan(10)), Verdict(Pass{}));
    EXPECT_EQ(checkPair(leafPlan(10), leafPlan(4)), Verdict(Pass{}));
    EXPECT_EQ(checkPair(leafPlan(4), leafPlan(10)), Verdict(Violation{4, 10, 6}));
    EXPECT_EQ(checkPair(leafPlan(4, {"a", "b", "c"}), leafPlan(10, {"c", "b", "a"})), Verdict(Incomparable{2}));
}

TEST(Validator, EpsilonTolerance) {
    EXPECT_EQ(checkPair(leafPlan(4), leafPlan(5), {1, 1}), Verdict(Pass{}));
    EXPECT_TRUE(std::holds_alternative<Violation>(checkPair(leafPlan(4), leafPlan(5.5), {1, 1})));
    EXPECT_THROW(checkPair(leafPlan(4), leafPlan(5), {-1, 1}), ConfigError);
}

TEST(Validator, MissingEstimate) {
    PlanNode bare{"scan", std::nullopt, {}, {}};
    EXPECT_THROW(checkPair(bare, leafPlan(1)), MissingEstimate);
}

TEST(Validator, Names) {
    EXPECT_EQ(verdictName(Pass{}), "Pass");
    EXPECT_EQ(verdictName(Incomparable{3}), "Incomparable");
    EXPECT_EQ(describe(Violation{20, 60, 40}), "Violation{20, 60, 40}");
}
