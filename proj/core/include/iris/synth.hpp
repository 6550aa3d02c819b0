#ifndef IRIS_SYNTH_HPP
#define IRIS_SYNTH_HPP

#include "iris/image.hpp"
#include "iris/pad3d.hpp"
#include "iris/segmentation.hpp"

#include <cstdint>

namespace iris {

enum class LensKind { none, textured, opaque };
enum class SurfaceKind { dome, bumpy };

const char* to_string(LensKind k);
const char* to_string(SurfaceKind k);

struct SurfaceSpec {
    SurfaceKind kind = SurfaceKind::dome;
    double dome_height = 12.0;   // 0 renders a flat plane
    double bump_amplitude = 1.2; // bumpy only
    double bump_frequency = 10.0; // cycles across the iris diameter
};

struct SynthSpec {
    std::uint64_t seed = 0;     // capture seed: noise streams, lens pattern
    std::uint64_t identity = 0; // texture seed; same id => same texture
    int width = 640;
    int height = 480;
    Circle pupil{320.0, 240.0, 42.0};
    Circle iris{320.0, 240.0, 120.0};
    double band_lo = 6.0;  // angular texture band, cycles per annulus
    double band_hi = 28.0;
    double noise_sigma = 3.0;
    double rotation = 0.0; // radians, counter-clockwise in (x right, y down)
    bool glints = false;
    LensKind lens = LensKind::none;
    SurfaceSpec surface{};
    IlluminationGeometry geometry = IlluminationGeometry::from_half_angle_deg(20.0);
};

struct RenderedEye {
    IrisImage image;
    SegmentationResult truth;
};

// Near-black pupil disk (10), bright sclera (230), band-limited identity
// texture in the annulus; optional glints; seeded capture noise. The truth
// mask is the annulus minus near-saturated pixels.
RenderedEye render_eye(const SynthSpec& spec);

// Textured lens: high-contrast seeded pattern over the outer 70% of the
// annulus area, inner ring left authentic. Opaque lens: full-annulus
// low-frequency overprint.
IrisImage apply_lens(const IrisImage& img, const SynthSpec& spec);

struct RenderedPair {
    IrisImage left;
    IrisImage right;
    BinaryMask mask;
};

// Lambertian two-illumination pair over an analytic height field
// (dome/bumps), albedo = the identity texture (lens overprint applied
// before shading).
RenderedPair render_pair(const SynthSpec& spec);

// Analytic surface normal of the spec's height field at (x, y); the oracle
// the photometric solve is checked against.
Vec3 surface_normal(const SynthSpec& spec, double x, double y);

// Capture parameterization used by the synth CLI and the test corpora:
// identity fixes texture and radii, capture fixes jitter/rotation/noise.
SynthSpec identity_capture_spec(std::uint64_t identity, std::uint64_t capture,
                                std::uint64_t corpus_seed);

} // namespace iris

#endif
