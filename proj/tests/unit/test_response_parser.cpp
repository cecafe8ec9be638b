#include <gtest/gtest.h>

#include <random>

#include "rlvr/response_parser.hpp"
#include "support/oracles.hpp"

using namespace rlvr;

namespace {

std::vector<Violation> violations(std::string_view text, TaskKind task) {
    return validate_format(text, task).violations;
}

}  // namespace

TEST(ValidateFormat, CanonicalAffordanceIsCompliant) {
    const auto r = parse_response("<think>grasp handle</think><answer>[100,200,300,400]</answer>", TaskKind::Affordance);
    EXPECT_TRUE(r.verdict.compliant());
    ASSERT_TRUE(r.answer);
    EXPECT_EQ(*r.answer->bbox(), (BBox{100, 200, 300, 400}));
    EXPECT_EQ(r.answer->reasoning, "grasp handle");
}

TEST(ValidateFormat, MissingTags) {
    EXPECT_EQ(violations("[100,200,300,400]", TaskKind::Affordance),
              (std::vector<Violation>{Violation::MissingThink, Violation::MissingAnswer}));
    EXPECT_EQ(violations("<answer>[1,2,3,4]</answer>", TaskKind::Affordance),
              (std::vector<Violation>{Violation::MissingThink}));
}

TEST(ValidateFormat, TwoPointTrajectoryIsOutOfRange) {
    EXPECT_EQ(violations("<think>t</think><answer>[[1,2],[3,4]]</answer>", TaskKind::Trajectory),
              (std::vector<Violation>{Violation::PointCountOutOfRange}));
}

TEST(ValidateFormat, ElevenPointTrajectoryIsOutOfRange) {
    std::string payload = "[";
    for (int i = 0; i < 11; ++i) {
        payload += (i ? "," : "") + std::string("[1,1]");
    }
    payload += "]";
    const auto v = validate_format("<think>t</think><answer>" + payload + "</answer>", TaskKind::Trajectory);
    EXPECT_TRUE(v.has(Violation::PointCountOutOfRange));
}

TEST(ValidateFormat, TagOrderAndDuplicates) {
    EXPECT_TRUE(validate_format("<answer>[1,2,3,4]</answer><think>x</think>", TaskKind::Affordance)
                    .has(Violation::BadTagOrder));
    EXPECT_TRUE(validate_format("<think>x</think><answer>[1,2,3,4]</answer><answer>[1,2,3,4]</answer>",
                                TaskKind::Affordance)
                    .has(Violation::BadTagOrder));
    EXPECT_TRUE(validate_format("<think>x<answer>[1,2,3,4]</answer>", TaskKind::Affordance)
                    .has(Violation::BadTagOrder));
    EXPECT_TRUE(validate_format("<think>x</think><think>y</think><answer>[1,2,3,4]</answer>", TaskKind::Affordance)
                    .has(Violation::BadTagOrder));
}

TEST(ValidateFormat, TextOutsideTagsIsIgnored) {
    EXPECT_TRUE(validate_format("Sure! <think>x</think> then <answer> [1, 2, 3, 4] </answer> done.",
                                TaskKind::Affordance)
                    .compliant());
}

TEST(ValidateFormat, CoordinateRange) {
    EXPECT_TRUE(validate_format("<think>x</think><answer>[-1,2,3,4]</answer>", TaskKind::Affordance)
                    .has(Violation::CoordOutOfRange));
    EXPECT_TRUE(validate_format("<think>x</think><answer>[[0,0],[1000,5],[5,5]]</answer>", TaskKind::Trajectory)
                    .has(Violation::CoordOutOfRange));
    EXPECT_TRUE(
        validate_format("<think>x</think><answer>[[999.5,0],[0,999.5],[5,5]]</answer>", TaskKind::Trajectory)
            .compliant());
}

TEST(ValidateFormat, WrongKindPayloadIsUnparseable) {
    EXPECT_TRUE(validate_format("<think>x</think><answer>[[1,2],[3,4],[5,6]]</answer>", TaskKind::Affordance)
                    .has(Violation::UnparseableAnswer));
    EXPECT_TRUE(validate_format("<think>x</think><answer>[1,2,3,4]</answer>", TaskKind::Trajectory)
                    .has(Violation::UnparseableAnswer));
}

TEST(ParseBbox, CanonicalizesDegenerateAndArity) {
    const auto swapped = parse_bbox("[300,400,100,200]");
    ASSERT_TRUE(swapped.value);
    EXPECT_EQ(*swapped.value, (BBox{100, 200, 300, 400}));
    EXPECT_FALSE(swapped.flag);

    const auto zero = parse_bbox("[0,0,0,0]");
    ASSERT_TRUE(zero.value);
    EXPECT_EQ(*zero.value, (BBox{0, 0, 0, 0}));
    EXPECT_EQ(zero.flag, Violation::DegenerateBox);
    EXPECT_TRUE(validate_format("<think>x</think><answer>[0,0,0,0]</answer>", TaskKind::Affordance)
                    .has(Violation::DegenerateBox));

    const auto short_box = parse_bbox("[1,2,3]");
    EXPECT_FALSE(short_box.value);
    EXPECT_EQ(short_box.error, Violation::UnparseableAnswer);
    EXPECT_TRUE(parse_bbox("[1,2,3,\"4\"]").error);
    EXPECT_TRUE(parse_bbox("[1,2,3,1e999]").error);
}

TEST(ParseTrajectory, DirectMalformedAndBoundary) {
    const auto ok = parse_trajectory("[[0,0],[10,10],[20,20]]");
    ASSERT_TRUE(ok.value);
    EXPECT_EQ(*ok.value, (Trajectory{{0, 0}, {10, 10}, {20, 20}}));

    EXPECT_EQ(parse_trajectory("[[0,0],[10]]").error, Violation::UnparseableAnswer);
    EXPECT_EQ(parse_trajectory("[]").error, Violation::UnparseableAnswer);
    EXPECT_EQ(parse_trajectory("[[0,0],[1,2] trailing").error, Violation::UnparseableAnswer);

    const auto edge = parse_trajectory("[[999.5,0],[0,999.5],[5,5]]");
    ASSERT_TRUE(edge.value);
    EXPECT_EQ(edge.value->size(), 3u);
}

TEST(ParsePayload, BarePayloadSkipsTagChecks) {
    const auto r = parse_payload("[[1,1],[2,2],[3,3]]", TaskKind::Trajectory);
    EXPECT_TRUE(r.verdict.compliant());
    ASSERT_TRUE(r.answer);
    EXPECT_EQ(r.answer->trajectory()->size(), 3u);
}

TEST(ParserProperty, RoundTripThroughCanonicalTemplate) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const auto box = oracle::random_box(rng);
        const auto rb = parse_response(wrap_response(box, "r"), TaskKind::Affordance);
        ASSERT_EQ(rb.verdict.compliant(), !box.degenerate());
        ASSERT_TRUE(rb.answer);
        ASSERT_EQ(*rb.answer->bbox(), box);

        const auto traj = oracle::random_trajectory(rng, 3, 10);
        const auto rt = parse_response(wrap_response(traj), TaskKind::Trajectory);
        ASSERT_TRUE(rt.verdict.compliant());
        ASSERT_EQ(*rt.answer->trajectory(), traj);
    }
}

TEST(ParserProperty, NeverCompliantWithoutParsedAnswerAndDeterministic) {
    std::mt19937_64 rng(22);
    const std::vector<std::string> pieces = {"<think>", "</think>", "<answer>", "</answer>", "[", "]", ",", "1",
                                             "999", "-3", "[1,2]", "x", " ", "1e3"};
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::uniform_int_distribution<int> len(0, 20);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text;
        for (int i = len(rng); i > 0; --i) {
            text += pieces[pick(rng)];
        }
        for (auto task : {TaskKind::Affordance, TaskKind::Trajectory}) {
            const auto a = parse_response(text, task);
            const auto b = parse_response(text, task);
            ASSERT_EQ(a.verdict.violations, b.verdict.violations);
            if (a.verdict.compliant()) {
                ASSERT_TRUE(a.answer) << text;
            }
            if (a.verdict.has(Violation::UnparseableAnswer)) {
                ASSERT_FALSE(a.verdict.compliant());
            }
        }
    }
}
