#include "iris/synth.hpp"

#include "iris/errors.hpp"
#include "iris/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace iris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPupilIntensity = 10.0;
constexpr double kScleraIntensity = 230.0;

// Band-limited random field over polar annulus coordinates. Integer angular
// frequencies keep it continuous across the theta wrap.
struct PolarField {
    struct Component {
        int k = 0; // angular cycles
        int m = 0; // radial cycles
        double phase = 0.0;
        double amp = 0.0;
    };
    std::vector<Component> comps;
    double inv_sigma = 1.0;

    static PolarField make(Rng& rng, int n, int k_lo, int k_hi, int m_hi) {
        PolarField f;
        f.comps.resize(n);
        double power = 0.0;
        for (Component& c : f.comps) {
            c.k = rng.uniform_int(k_lo, k_hi);
            c.m = rng.uniform_int(0, m_hi);
            c.phase = rng.uniform(0.0, kTwoPi);
            c.amp = rng.uniform(0.5, 1.0);
            power += c.amp * c.amp;
        }
        f.inv_sigma = 1.0 / std::sqrt(power / 2.0);
        return f;
    }

    // Roughly unit variance.
    double eval(double theta, double t) const {
        double acc = 0.0;
        for (const Component& c : comps)
            acc += c.amp * std::cos(c.k * theta + kTwoPi * c.m * t + c.phase);
        return acc * inv_sigma;
    }
};

PolarField identity_texture(std::uint64_t identity, double band_lo, double band_hi) {
    Rng rng(mix_seed(identity, 0x7e87));
    const int k_lo = std::max(1, static_cast<int>(std::lround(band_lo)));
    const int k_hi = std::max(k_lo, static_cast<int>(std::lround(band_hi)));
    return PolarField::make(rng, 28, k_lo, k_hi, 4);
}

// Smooth saturation instead of a hard clamp: a clamp crease would break the
// band limit and show up as interpolation error in the normalized raster.
double texture_intensity(const PolarField& tex, double theta, double t) {
    return 145.0 + 62.0 * std::tanh(0.65 * tex.eval(theta, t));
}

struct LensPattern {
    LensKind kind = LensKind::none;
    PolarField field;
};

LensPattern make_lens_pattern(const SynthSpec& s) {
    LensPattern lp;
    lp.kind = s.lens;
    Rng rng(mix_seed(s.seed, 2));
    if (s.lens == LensKind::textured) lp.field = PolarField::make(rng, 12, 40, 90, 6);
    else if (s.lens == LensKind::opaque) lp.field = PolarField::make(rng, 6, 2, 5, 2);
    return lp;
}

// Ray geometry from the pupil center: distance to the iris circle along the
// ray through (x, y). The annulus is exactly { pr < d < edge }.
struct RayFrame {
    double ex, ey, e2;

    explicit RayFrame(const SynthSpec& s)
        : ex(s.iris.cx - s.pupil.cx), ey(s.iris.cy - s.pupil.cy), e2(ex * ex + ey * ey) {}

    double edge(const SynthSpec& s, double ux, double uy) const {
        const double proj = ux * ex + uy * ey;
        return proj + std::sqrt(std::max(0.0, proj * proj - e2 + s.iris.r * s.iris.r));
    }
};

// Radial ray fraction where the outer 70% of the annulus area begins: along
// each ray, s_b^2 = 0.3*edge^2 + 0.7*pr^2 splits the ray's area element
// 30/70, which integrates to 70% coverage over the whole annulus.
double lens_inner_fraction(double pr, double edge) {
    const double s_b = std::sqrt(0.3 * edge * edge + 0.7 * pr * pr);
    return (s_b - pr) / (edge - pr);
}

// Lens overprint albedo at (theta, t), or -1 where the authentic texture
// stays visible.
double lens_overprint(const LensPattern& lens, double pr, double edge, double theta, double t) {
    if (lens.kind == LensKind::none) return -1.0;
    if (lens.kind == LensKind::textured) {
        if (t < lens_inner_fraction(pr, edge)) return -1.0;
        return lens.field.eval(theta, t) > 0.0 ? 215.0 : 40.0;
    }
    return std::clamp(128.0 + 55.0 * lens.field.eval(theta, t), 30.0, 230.0);
}

void validate_spec(const SynthSpec& s) {
    if (s.width < 32 || s.height < 32) fail(ErrorCode::InvalidSpec, "image too small");
    if (!circles_valid(s.pupil, s.iris)) fail(ErrorCode::InvalidSpec, "pupil not inside iris");
    if (s.iris.cx - s.iris.r < 0 || s.iris.cx + s.iris.r >= s.width || s.iris.cy - s.iris.r < 0 ||
        s.iris.cy + s.iris.r >= s.height)
        fail(ErrorCode::InvalidSpec, "iris circle leaves the image");
    if (s.band_lo < 1.0 || s.band_hi < s.band_lo) fail(ErrorCode::InvalidSpec, "texture band");
    if (s.noise_sigma < 0.0) fail(ErrorCode::InvalidSpec, "negative noise");
    if (s.surface.dome_height < 0.0 || s.surface.bump_amplitude < 0.0 ||
        s.surface.bump_frequency <= 0.0)
        fail(ErrorCode::InvalidSpec, "surface parameters");
}

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::clamp(static_cast<int>(std::lround(v)), 0, 255));
}

// Albedo before shading/noise: pupil disk, textured annulus with optional
// lens overprint, sclera outside.
double albedo_at(const SynthSpec& s, const PolarField& tex, const LensPattern& lens,
                 const RayFrame& frame, double x, double y) {
    const double dx = x - s.pupil.cx;
    const double dy = y - s.pupil.cy;
    const double d = std::hypot(dx, dy);
    if (d < s.pupil.r) return kPupilIntensity;
    const double ux = dx / d, uy = dy / d;
    const double edge = frame.edge(s, ux, uy);
    if (d >= edge) return kScleraIntensity;
    const double theta = std::atan2(dy, dx);
    const double t = (d - s.pupil.r) / (edge - s.pupil.r);
    const double over = lens_overprint(lens, s.pupil.r, edge, theta, t);
    if (over >= 0.0) return over;
    return texture_intensity(tex, theta - s.rotation, t);
}

} // namespace

const char* to_string(LensKind k) {
    switch (k) {
        case LensKind::none: return "none";
        case LensKind::textured: return "textured";
        case LensKind::opaque: return "opaque";
    }
    return "?";
}

const char* to_string(SurfaceKind k) { return k == SurfaceKind::dome ? "dome" : "bumpy"; }

RenderedEye render_eye(const SynthSpec& spec) {
    validate_spec(spec);
    const PolarField tex = identity_texture(spec.identity, spec.band_lo, spec.band_hi);
    const LensPattern no_lens; // the bare eye; apply_lens overlays afterwards
    const RayFrame frame(spec);

    RenderedEye out;
    out.image.width = spec.width;
    out.image.height = spec.height;
    out.image.pixels.resize(static_cast<std::size_t>(spec.width) * spec.height);

    std::vector<double> base(out.image.pixels.size());
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            base[static_cast<std::size_t>(y) * spec.width + x] =
                albedo_at(spec, tex, no_lens, frame, x, y);

    if (spec.glints) {
        const double gr = std::max(2.0, 0.1 * spec.pupil.r);
        const double gx[2] = {spec.pupil.cx - 0.62 * spec.pupil.r,
                              spec.pupil.cx + 0.62 * spec.pupil.r};
        const double gy = spec.pupil.cy - 0.35 * spec.pupil.r;
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x)
                for (int g = 0; g < 2; ++g)
                    if (std::hypot(x - gx[g], y - gy) <= gr)
                        base[static_cast<std::size_t>(y) * spec.width + x] = 255.0;
    }

    Rng noise(mix_seed(spec.seed, 1));
    for (std::size_t p = 0; p < base.size(); ++p) {
        const double v =
            spec.noise_sigma > 0.0 ? base[p] + spec.noise_sigma * noise.normal() : base[p];
        out.image.pixels[p] = quantize(v);
    }

    out.truth.pupil = spec.pupil;
    out.truth.iris = spec.iris;
    out.truth.mask = BinaryMask::filled(spec.width, spec.height, 0);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            if (in_annulus(spec.pupil, spec.iris, x, y) && out.image.at(x, y) <= 250)
                out.truth.mask.at(x, y) = 1;
    return out;
}

IrisImage apply_lens(const IrisImage& img, const SynthSpec& spec) {
    validate_spec(spec);
    if (img.width != spec.width || img.height != spec.height)
        fail(ErrorCode::DimensionMismatch, "image vs spec dimensions");
    if (spec.lens == LensKind::none) return img;

    const LensPattern lens = make_lens_pattern(spec);
    const RayFrame frame(spec);
    IrisImage out = img;
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const double dx = x - spec.pupil.cx;
            const double dy = y - spec.pupil.cy;
            const double d = std::hypot(dx, dy);
            if (d < spec.pupil.r) continue;
            const double ux = dx / d, uy = dy / d;
            const double edge = frame.edge(spec, ux, uy);
            if (d >= edge) continue;
            const double theta = std::atan2(dy, dx);
            const double t = (d - spec.pupil.r) / (edge - spec.pupil.r);
            const double over = lens_overprint(lens, spec.pupil.r, edge, theta, t);
            if (over >= 0.0) out.at(x, y) = quantize(over);
        }
    }
    return out;
}

Vec3 surface_normal(const SynthSpec& spec, double x, double y) {
    const double dx = x - spec.pupil.cx;
    const double dy = y - spec.pupil.cy;
    const double R = spec.iris.r;
    // dome: h = H (1 - (d/R)^2)
    double hx = spec.surface.dome_height * (-2.0 * dx / (R * R));
    double hy = spec.surface.dome_height * (-2.0 * dy / (R * R));
    if (spec.surface.kind == SurfaceKind::bumpy) {
        const double a = std::numbers::pi * spec.surface.bump_frequency / R;
        const double A = spec.surface.bump_amplitude;
        hx += A * a * std::cos(a * dx) * std::sin(a * dy);
        hy += A * a * std::sin(a * dx) * std::cos(a * dy);
    }
    return Vec3{-hx, -hy, 1.0}.normalized();
}

RenderedPair render_pair(const SynthSpec& spec) {
    validate_spec(spec);
    const PolarField tex = identity_texture(spec.identity, spec.band_lo, spec.band_hi);
    const LensPattern lens = make_lens_pattern(spec);
    const RayFrame frame(spec);

    RenderedPair out;
    out.left.width = out.right.width = spec.width;
    out.left.height = out.right.height = spec.height;
    const std::size_t total = static_cast<std::size_t>(spec.width) * spec.height;
    out.left.pixels.resize(total);
    out.right.pixels.resize(total);

    std::vector<double> shade_l(total), shade_r(total);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * spec.width + x;
            const double albedo = albedo_at(spec, tex, lens, frame, x, y);
            const Vec3 n = surface_normal(spec, x, y);
            shade_l[p] = albedo * std::max(0.0, n.dot(spec.geometry.l_left));
            shade_r[p] = albedo * std::max(0.0, n.dot(spec.geometry.l_right));
        }
    }

    Rng noise_l(mix_seed(spec.seed, 3));
    Rng noise_r(mix_seed(spec.seed, 4));
    for (std::size_t p = 0; p < total; ++p) {
        out.left.pixels[p] =
            quantize(spec.noise_sigma > 0.0 ? shade_l[p] + spec.noise_sigma * noise_l.normal()
                                            : shade_l[p]);
        out.right.pixels[p] =
            quantize(spec.noise_sigma > 0.0 ? shade_r[p] + spec.noise_sigma * noise_r.normal()
                                            : shade_r[p]);
    }

    out.mask = BinaryMask::filled(spec.width, spec.height, 0);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            if (in_annulus(spec.pupil, spec.iris, x, y)) out.mask.at(x, y) = 1;
    return out;
}

SynthSpec identity_capture_spec(std::uint64_t identity, std::uint64_t capture,
                                std::uint64_t corpus_seed) {
    Rng id_rng(mix_seed(identity, 10));
    SynthSpec spec;
    spec.identity = identity;
    spec.seed = mix_seed(corpus_seed, identity * 0x10001ull + capture);

    const double pr = 36.0 + id_rng.uniform(0.0, 14.0);
    const double ir = 105.0 + id_rng.uniform(0.0, 25.0);

    Rng cap_rng(mix_seed(spec.seed, 12));
    const double cx = 320.0 + cap_rng.uniform(-8.0, 8.0);
    const double cy = 240.0 + cap_rng.uniform(-8.0, 8.0);
    spec.pupil = Circle{cx, cy, pr};
    spec.iris = Circle{cx, cy, ir};
    spec.rotation = cap_rng.uniform(-4.0, 4.0) * std::numbers::pi / 180.0;
    spec.noise_sigma = 3.0;
    return spec;
}

} // namespace iris
