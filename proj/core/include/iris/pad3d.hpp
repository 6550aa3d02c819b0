#ifndef IRIS_PAD3D_HPP
#define IRIS_PAD3D_HPP

#include "iris/image.hpp"
#include "iris/vec3.hpp"

#include <string>

namespace iris {

// Directions toward the two LEDs; the camera looks along -z.
struct IlluminationGeometry {
    Vec3 l_left;
    Vec3 l_right;

    // l_left = (-sin t, 0, cos t), l_right = (+sin t, 0, cos t).
    static IlluminationGeometry from_half_angle_deg(double theta_deg);
};

struct NormalField {
    int rows = 0; // image height
    int cols = 0; // image width
    std::vector<Vec3> normals;
    std::vector<std::uint8_t> valid;

    const Vec3& at(int x, int y) const { return normals[static_cast<std::size_t>(y) * cols + x]; }
    bool valid_at(int x, int y) const { return valid[static_cast<std::size_t>(y) * cols + x]; }
};

enum class PadDecision { live, attack };
enum class PadSource { pad3d, pad2d, fusion };

const char* to_string(PadDecision d);
const char* to_string(PadSource s);

// decision == attack iff score >= threshold; the threshold rides along for audit.
struct PadOutcome {
    double score = 0.0;
    PadDecision decision = PadDecision::live;
    PadSource source = PadSource::pad3d;
    double threshold = 0.0;
};

// Per-pixel minimum-norm least-squares solve of the two-light Lambertian
// system; the component along l_left x l_right is zero by construction.
// Pixels whose albedo-scaled normal has magnitude < 1e-9 are invalid.
NormalField estimate_normals(const IrisImage& img_left, const IrisImage& img_right,
                             const BinaryMask& mask, const IlluminationGeometry& geom);

// Population variance of the distances from each valid unit normal to the
// (non-renormalized) mean normal. Flat surfaces score near 0.
double ospad3d_score(const NormalField& field);

PadOutcome ospad3d_decide(const IrisImage& img_left, const IrisImage& img_right,
                          const BinaryMask& mask, const IlluminationGeometry& geom, double tau3);

} // namespace iris

#endif
