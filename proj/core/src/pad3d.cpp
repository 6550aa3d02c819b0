#include "iris/pad3d.hpp"

#include "iris/errors.hpp"

#include <cmath>
#include <numbers>

namespace iris {

const char* to_string(PadDecision d) { return d == PadDecision::attack ? "attack" : "live"; }

const char* to_string(PadSource s) {
    switch (s) {
        case PadSource::pad3d: return "pad3d";
        case PadSource::pad2d: return "pad2d";
        case PadSource::fusion: return "fusion";
    }
    return "?";
}

IlluminationGeometry IlluminationGeometry::from_half_angle_deg(double theta_deg) {
    const double t = theta_deg * std::numbers::pi / 180.0;
    return {Vec3{-std::sin(t), 0.0, std::cos(t)}, Vec3{std::sin(t), 0.0, std::cos(t)}};
}

namespace {

void validate_geometry(const IlluminationGeometry& g) {
    if (std::abs(g.l_left.norm() - 1.0) > 1e-9 || std::abs(g.l_right.norm() - 1.0) > 1e-9)
        fail(ErrorCode::InvalidSpec, "light directions must be unit vectors");
    if (g.l_left.z <= 0.0 || g.l_right.z <= 0.0)
        fail(ErrorCode::InvalidSpec, "light directions must face the camera (z > 0)");
    if ((g.l_left - g.l_right).norm() < 1e-9)
        fail(ErrorCode::InvalidSpec, "light directions must differ");
}

} // namespace

NormalField estimate_normals(const IrisImage& img_left, const IrisImage& img_right,
                             const BinaryMask& mask, const IlluminationGeometry& geom) {
    if (img_left.width != img_right.width || img_left.height != img_right.height ||
        mask.width != img_left.width || mask.height != img_left.height)
        fail(ErrorCode::DimensionMismatch, "pair/mask dimensions");
    validate_geometry(geom);

    const std::size_t total = static_cast<std::size_t>(img_left.width) * img_left.height;
    if (mask.popcount() * 20 < total) fail(ErrorCode::EmptyMask, "mask covers <5% of the image");

    // Minimum-norm solve: m = A^T (A A^T)^-1 [I_L, I_R] with A = [l_left; l_right].
    const double c = geom.l_left.dot(geom.l_right);
    const double det = 1.0 - c * c;
    if (det < 1e-12) fail(ErrorCode::InvalidSpec, "light directions nearly parallel");

    NormalField field;
    field.rows = img_left.height;
    field.cols = img_left.width;
    field.normals.assign(total, Vec3{});
    field.valid.assign(total, 0);

    for (std::size_t p = 0; p < total; ++p) {
        if (!mask.bits[p]) continue;
        const double il = img_left.pixels[p];
        const double ir = img_right.pixels[p];
        const double u1 = (il - c * ir) / det;
        const double u2 = (ir - c * il) / det;
        const Vec3 m = geom.l_left * u1 + geom.l_right * u2;
        const double len = m.norm();
        if (len < 1e-9) continue;
        field.normals[p] = m * (1.0 / len);
        field.valid[p] = 1;
    }
    return field;
}

double ospad3d_score(const NormalField& field) {
    std::size_t count = 0;
    Vec3 mean{};
    for (std::size_t p = 0; p < field.valid.size(); ++p) {
        if (!field.valid[p]) continue;
        mean = mean + field.normals[p];
        ++count;
    }
    if (count < 100)
        fail(ErrorCode::TooFewValidPixels, std::to_string(count) + " valid normals, need >= 100");
    mean = mean * (1.0 / static_cast<double>(count));

    double dist_sum = 0.0, dist_sq_sum = 0.0;
    for (std::size_t p = 0; p < field.valid.size(); ++p) {
        if (!field.valid[p]) continue;
        const double d = (field.normals[p] - mean).norm();
        dist_sum += d;
        dist_sq_sum += d * d;
    }
    const double n = static_cast<double>(count);
    const double mu = dist_sum / n;
    const double var = dist_sq_sum / n - mu * mu;
    return var > 0.0 ? var : 0.0;
}

PadOutcome ospad3d_decide(const IrisImage& img_left, const IrisImage& img_right,
                          const BinaryMask& mask, const IlluminationGeometry& geom, double tau3) {
    const double score = ospad3d_score(estimate_normals(img_left, img_right, mask, geom));
    return PadOutcome{score, score >= tau3 ? PadDecision::attack : PadDecision::live,
                      PadSource::pad3d, tau3};
}

} // namespace iris
