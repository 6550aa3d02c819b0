#include "iris/fusion.hpp"

#include "iris/errors.hpp"

namespace iris {

FusionOutcome fuse_cascade(const std::function<PadOutcome()>& stage3d,
                           const std::function<Pad2dResult()>& stage2d) {
    FusionOutcome fused;

    bool have3d = false;
    PadOutcome p3;
    try {
        p3 = stage3d();
        have3d = true;
    } catch (const Error& e) {
        fused.stage3d_error = to_string(e.code());
    }

    if (have3d) {
        fused.score3d = p3.score;
        fused.decision3d = p3.decision;
        if (p3.decision == PadDecision::attack) {
            fused.outcome = p3;
            fused.outcome.source = PadSource::fusion;
            return fused;
        }
    }

    const Pad2dResult p2 = stage2d(); // errors propagate
    fused.decision2d = p2.outcome.decision;
    fused.pad2d_evaluated = p2.evaluated;
    fused.outcome = p2.outcome;
    fused.outcome.source = PadSource::fusion;
    return fused;
}

FusionOutcome ospad_fusion_decide(const IrisImage& img_left, const IrisImage& img_right,
                                  const BinaryMask& mask, const IlluminationGeometry& geom,
                                  double tau3, const Ensemble& ensemble,
                                  std::span<const FilterBank> banks, int roi) {
    return fuse_cascade(
        [&] { return ospad3d_decide(img_left, img_right, mask, geom, tau3); },
        [&] { return ospad2d_decide(img_left, ensemble, banks, roi); });
}

} // namespace iris
