#include "iris/fusion.hpp"

#include "iris/errors.hpp"

#include <doctest.h>

using namespace iris;

namespace {

PadOutcome stub3d(PadDecision d, double score = 0.01, double tau = 0.005) {
    return PadOutcome{score, d, PadSource::pad3d, tau};
}

Pad2dResult stub2d(PadDecision d) {
    PadOutcome o;
    o.score = d == PadDecision::attack ? 1.0 : 0.0;
    o.decision = d;
    o.source = PadSource::pad2d;
    o.threshold = 0.5;
    return Pad2dResult{o, 3};
}

} // namespace

TEST_CASE("the cascade is the OR of the two detectors") {
    const PadDecision cases[2] = {PadDecision::live, PadDecision::attack};
    for (PadDecision d3 : cases) {
        for (PadDecision d2 : cases) {
            int calls2d = 0;
            const FusionOutcome out = fuse_cascade(
                [&] {
                    return stub3d(d3, d3 == PadDecision::attack ? 0.02 : 0.001);
                },
                [&] {
                    ++calls2d;
                    return stub2d(d2);
                });
            const bool expect_attack =
                d3 == PadDecision::attack || d2 == PadDecision::attack;
            CHECK(out.outcome.decision ==
                  (expect_attack ? PadDecision::attack : PadDecision::live));
            CHECK(out.outcome.source == PadSource::fusion);
            REQUIRE(out.decision3d.has_value());
            CHECK(*out.decision3d == d3);
            if (d3 == PadDecision::attack) {
                // Short-circuit: 2D never evaluated.
                CHECK(calls2d == 0);
                CHECK(out.pad2d_evaluated == 0);
                CHECK_FALSE(out.decision2d.has_value());
            } else {
                CHECK(calls2d == 1);
                REQUIRE(out.decision2d.has_value());
                CHECK(*out.decision2d == d2);
            }
        }
    }
}

TEST_CASE("fusion never returns live after a 3D attack") {
    for (int i = 0; i < 4; ++i) {
        const FusionOutcome out = fuse_cascade(
            [&] { return stub3d(PadDecision::attack, 1.0 + i); },
            [&] { return stub2d(PadDecision::live); });
        CHECK(out.outcome.decision == PadDecision::attack);
        CHECK(out.outcome.score == 1.0 + i);
    }
}

TEST_CASE("a stage-1 error degrades to a 2D-only decision") {
    int calls2d = 0;
    const FusionOutcome out = fuse_cascade(
        [&]() -> PadOutcome { fail(ErrorCode::EmptyMask, "mask too small"); },
        [&] {
            ++calls2d;
            return stub2d(PadDecision::live);
        });
    CHECK(calls2d == 1);
    CHECK(out.outcome.decision == PadDecision::live);
    CHECK(out.outcome.source == PadSource::fusion);
    CHECK_FALSE(out.score3d.has_value());
    CHECK_FALSE(out.decision3d.has_value());
    CHECK(out.stage3d_error == "EmptyMask");

    const FusionOutcome attack = fuse_cascade(
        [&]() -> PadOutcome { fail(ErrorCode::TooFewValidPixels, ""); },
        [&] { return stub2d(PadDecision::attack); });
    CHECK(attack.outcome.decision == PadDecision::attack);
    CHECK(attack.stage3d_error == "TooFewValidPixels");
}

TEST_CASE("stage-2 errors propagate") {
    CHECK_THROWS_AS(fuse_cascade([&] { return stub3d(PadDecision::live); },
                                 [&]() -> Pad2dResult {
                                     fail(ErrorCode::CropTooLarge, "roi");
                                 }),
                    Error);
}

TEST_CASE("outcome score/threshold pair stays self-consistent") {
    // Attack via 3D: the 3D score and tau ride along.
    const FusionOutcome via3d = fuse_cascade(
        [&] { return stub3d(PadDecision::attack, 0.02, 0.005); },
        [&] { return stub2d(PadDecision::live); });
    CHECK(via3d.outcome.score == 0.02);
    CHECK(via3d.outcome.threshold == 0.005);
    CHECK((via3d.outcome.score >= via3d.outcome.threshold) ==
          (via3d.outcome.decision == PadDecision::attack));

    // Verdict via 2D: the vote fraction and 0.5 ride along.
    const FusionOutcome via2d = fuse_cascade(
        [&] { return stub3d(PadDecision::live, 0.001, 0.005); },
        [&] { return stub2d(PadDecision::attack); });
    CHECK(via2d.outcome.score == 1.0);
    CHECK(via2d.outcome.threshold == 0.5);
    CHECK((via2d.outcome.score >= via2d.outcome.threshold) ==
          (via2d.outcome.decision == PadDecision::attack));
}
