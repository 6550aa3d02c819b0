#include "iris/normalization.hpp"

#include "iris/errors.hpp"
#include "iris/rng.hpp"
#include "iris/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>

using namespace iris;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an iris::Error");
    return ErrorCode::IoFailure;
}

SegmentationResult full_annulus(const IrisImage& img, Circle pupil, Circle iris) {
    SegmentationResult seg;
    seg.pupil = pupil;
    seg.iris = iris;
    seg.mask = BinaryMask::filled(img.width, img.height, 0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (in_annulus(pupil, iris, x, y)) seg.mask.at(x, y) = 1;
    return seg;
}

} // namespace

TEST_CASE("midpoint sample reads the expected source pixel") {
    // x-coordinate encoded in the intensity makes the read position visible.
    IrisImage img = IrisImage::filled(200, 200, 0);
    for (int y = 0; y < 200; ++y)
        for (int x = 0; x < 200; ++x) img.at(x, y) = static_cast<std::uint8_t>(x);
    const SegmentationResult seg =
        full_annulus(img, Circle{100.0, 100.0, 20.0}, Circle{100.0, 100.0, 60.0});

    const NormalizedIris norm = normalize(img, seg, 3, 8);
    // Row 1 of 3 is radial fraction 0.5; column 0 is theta 0, so the sample
    // sits at (140, 100).
    CHECK(norm.at(1, 0) == doctest::Approx(140.0));
    // Row 0 touches the pupil boundary (120, 100), row 2 the iris boundary.
    CHECK(norm.at(0, 0) == doctest::Approx(120.0));
    CHECK(norm.at(2, 0) == doctest::Approx(160.0).epsilon(0.02));
}

TEST_CASE("output shape is rows x cols regardless of circles") {
    Rng rng(3);
    for (int trial = 0; trial < 4; ++trial) {
        const double pr = rng.uniform(10.0, 30.0);
        const double ir = pr + rng.uniform(20.0, 60.0);
        IrisImage img = IrisImage::filled(256, 256, 99);
        const SegmentationResult seg =
            full_annulus(img, Circle{128.0, 128.0, pr}, Circle{128.0, 128.0, ir});
        const NormalizedIris norm = normalize(img, seg, 32, 128);
        CHECK(norm.rows == 32);
        CHECK(norm.cols == 128);
        CHECK(norm.pixels.size() == 32u * 128u);
        CHECK(norm.mask.size() == 32u * 128u);
    }
}

TEST_CASE("mask propagation: excluded source pixels clear normalized bits") {
    IrisImage img = IrisImage::filled(200, 200, 50);
    SegmentationResult seg =
        full_annulus(img, Circle{100.0, 100.0, 20.0}, Circle{100.0, 100.0, 60.0});
    // Punch a hole at the theta=0 midpoint source.
    seg.mask.at(140, 100) = 0;
    const NormalizedIris norm = normalize(img, seg, 3, 8);
    CHECK(norm.mask_at(1, 0) == 0);
    // An untouched angle keeps validity.
    CHECK(norm.mask_at(1, 4) == 1);
}

TEST_CASE("normalized mask never invents validity") {
    SynthSpec spec;
    spec.identity = 21;
    spec.seed = 2;
    const RenderedEye eye = render_eye(spec);
    SegmentationResult seg = eye.truth;
    // Knock out a random blob.
    for (int y = 200; y < 240; ++y)
        for (int x = 360; x < 400; ++x) seg.mask.at(x, y) = 0;

    const NormalizedIris norm = normalize(eye.image, seg, 64, 512);
    for (int i = 0; i < norm.rows; ++i) {
        const double t = static_cast<double>(i) / (norm.rows - 1);
        for (int j = 0; j < norm.cols; ++j) {
            if (!norm.mask_at(i, j)) continue;
            const double theta = 2.0 * std::numbers::pi * j / norm.cols;
            const double px = seg.pupil.cx + seg.pupil.r * std::cos(theta);
            const double py = seg.pupil.cy + seg.pupil.r * std::sin(theta);
            const double qx = seg.iris.cx + seg.iris.r * std::cos(theta);
            const double qy = seg.iris.cy + seg.iris.r * std::sin(theta);
            const int sx = static_cast<int>(std::floor(px + t * (qx - px)));
            const int sy = static_cast<int>(std::floor(py + t * (qy - py)));
            REQUIRE(seg.mask.at(sx, sy) == 1);
        }
    }
}

TEST_CASE("radial parameterization is strictly monotone") {
    Rng rng(17);
    for (int trial = 0; trial < 6; ++trial) {
        // Random valid, possibly non-concentric circle pair.
        const double pr = rng.uniform(10.0, 25.0);
        const double ir = pr + rng.uniform(25.0, 50.0);
        const double off = rng.uniform(0.0, ir - pr - 2.0) / 2.0;
        const Circle pupil{128.0, 128.0, pr};
        const Circle iris{128.0 + off, 128.0 - off / 2.0, ir};
        REQUIRE(circles_valid(pupil, iris));

        for (int j = 0; j < 16; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / 16;
            double prev = -1.0;
            for (int i = 0; i < 32; ++i) {
                const double t = i / 31.0;
                const double px = pupil.cx + pupil.r * std::cos(theta);
                const double py = pupil.cy + pupil.r * std::sin(theta);
                const double qx = iris.cx + iris.r * std::cos(theta);
                const double qy = iris.cy + iris.r * std::sin(theta);
                const double sx = px + t * (qx - px);
                const double sy = py + t * (qy - py);
                const double radius = std::hypot(sx - pupil.cx, sy - pupil.cy);
                REQUIRE(radius > prev);
                prev = radius;
            }
        }
    }
}

TEST_CASE("rotating the eye shifts the normalized raster by whole columns") {
    const int cols = 512;
    const int shift = 10;
    SynthSpec base;
    base.identity = 31;
    base.noise_sigma = 0.0;
    // Keep the texture well resolved at the pupil-side rows so bilinear
    // interpolation error stays inside the comparison tolerance.
    base.band_hi = 12.0;
    SynthSpec rotated = base;
    rotated.rotation = 2.0 * std::numbers::pi * shift / cols;

    const RenderedEye a = render_eye(base);
    const RenderedEye b = render_eye(rotated);
    const NormalizedIris na = normalize(a.image, a.truth, 64, cols);
    const NormalizedIris nb = normalize(b.image, b.truth, 64, cols);

    // Interior comparison, away from the pupil/iris boundary rows.
    std::size_t compared = 0;
    for (int i = 8; i < 56; ++i)
        for (int j = 0; j < cols; ++j) {
            const int js = (j + shift) % cols;
            if (!na.mask_at(i, j) || !nb.mask_at(i, js)) continue;
            CHECK(std::abs(na.at(i, j) - nb.at(i, js)) <= 2.0);
            ++compared;
        }
    CHECK(compared > 10000);
}

TEST_CASE("empty and undersized masks are rejected") {
    IrisImage img = IrisImage::filled(200, 200, 50);
    SegmentationResult seg =
        full_annulus(img, Circle{100.0, 100.0, 20.0}, Circle{100.0, 100.0, 60.0});
    seg.mask = BinaryMask::filled(200, 200, 0);
    CHECK(code_of([&] { normalize(img, seg, 64, 512); }) == ErrorCode::EmptyMask);

    SegmentationResult mismatched =
        full_annulus(img, Circle{100.0, 100.0, 20.0}, Circle{100.0, 100.0, 60.0});
    mismatched.mask = BinaryMask::filled(100, 100, 1);
    CHECK(code_of([&] { normalize(img, mismatched, 64, 512); }) ==
          ErrorCode::DimensionMismatch);
}

TEST_CASE("normalized raster roundtrips through the PGM pair") {
    SynthSpec spec;
    spec.identity = 41;
    const RenderedEye eye = render_eye(spec);
    const NormalizedIris norm = normalize(eye.image, eye.truth, 48, 256);

    const auto base = std::filesystem::temp_directory_path() / "norm_rt";
    save_normalized(norm, base);
    const NormalizedIris back = load_normalized(base);
    REQUIRE(back.rows == norm.rows);
    REQUIRE(back.cols == norm.cols);
    CHECK(back.mask == norm.mask);
    for (std::size_t p = 0; p < norm.pixels.size(); ++p)
        CHECK(std::abs(back.pixels[p] - norm.pixels[p]) <= 0.5);
}
