#ifndef IRIS_FUSION_HPP
#define IRIS_FUSION_HPP

#include "iris/pad2d.hpp"
#include "iris/pad3d.hpp"

#include <functional>
#include <optional>
#include <string>

namespace iris {

struct FusionOutcome {
    PadOutcome outcome;                    // source == fusion
    std::optional<double> score3d;         // absent when stage 1 errored
    std::optional<PadDecision> decision3d;
    std::string stage3d_error;             // non-empty when stage 1 errored
    std::optional<PadDecision> decision2d; // absent when short-circuited
    int pad2d_evaluated = 0;               // member evaluations, 0 on short-circuit
};

// Cascade: a 3D attack verdict is final (the cheap detector short-circuits);
// a 3D live verdict defers to the 2D detector, whose decision stands. If
// stage 1 errors, stage 2 decides alone and the degradation is recorded.
FusionOutcome fuse_cascade(const std::function<PadOutcome()>& stage3d,
                           const std::function<Pad2dResult()>& stage2d);

// The full detector pair: OSPAD-3D on the image pair, OSPAD-2D on the left
// image.
FusionOutcome ospad_fusion_decide(const IrisImage& img_left, const IrisImage& img_right,
                                  const BinaryMask& mask, const IlluminationGeometry& geom,
                                  double tau3, const Ensemble& ensemble,
                                  std::span<const FilterBank> banks, int roi);

} // namespace iris

#endif
