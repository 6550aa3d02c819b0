#include "iris/normalization.hpp"

#include "iris/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace iris {

NormalizedIris normalize(const IrisImage& img, const SegmentationResult& seg, int rows, int cols) {
    if (rows < 2 || cols < 2) fail(ErrorCode::InvalidSpec, "normalized raster too small");
    if (seg.mask.width != img.width || seg.mask.height != img.height)
        fail(ErrorCode::DimensionMismatch, "segmentation mask vs image");
    if (!circles_valid(seg.pupil, seg.iris)) fail(ErrorCode::InvalidCircles, "pupil not inside iris");

    // Mask must cover at least 5% of the annulus.
    {
        const int x0 = std::max(0, static_cast<int>(std::floor(seg.iris.cx - seg.iris.r)) - 1);
        const int x1 = std::min(img.width - 1,
                                static_cast<int>(std::ceil(seg.iris.cx + seg.iris.r)) + 1);
        const int y0 = std::max(0, static_cast<int>(std::floor(seg.iris.cy - seg.iris.r)) - 1);
        const int y1 = std::min(img.height - 1,
                                static_cast<int>(std::ceil(seg.iris.cy + seg.iris.r)) + 1);
        std::size_t annulus = 0, covered = 0;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (in_annulus(seg.pupil, seg.iris, x, y)) {
                    ++annulus;
                    if (seg.mask.at(x, y)) ++covered;
                }
        if (annulus == 0 || covered * 20 < annulus)
            fail(ErrorCode::EmptyMask, "mask covers <5% of the annulus");
    }

    NormalizedIris out;
    out.rows = rows;
    out.cols = cols;
    out.pixels.resize(static_cast<std::size_t>(rows) * cols);
    out.mask.assign(static_cast<std::size_t>(rows) * cols, 0);

    auto masked = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < img.width && y < img.height && seg.mask.at(x, y) != 0;
    };

    for (int j = 0; j < cols; ++j) {
        const double theta = 2.0 * std::numbers::pi * j / cols;
        const double dx = std::cos(theta);
        const double dy = std::sin(theta);
        const double px = seg.pupil.cx + seg.pupil.r * dx;
        const double py = seg.pupil.cy + seg.pupil.r * dy;
        const double qx = seg.iris.cx + seg.iris.r * dx;
        const double qy = seg.iris.cy + seg.iris.r * dy;
        for (int i = 0; i < rows; ++i) {
            const double t = static_cast<double>(i) / (rows - 1);
            const double sx = px + t * (qx - px);
            const double sy = py + t * (qy - py);
            out.pixels[static_cast<std::size_t>(i) * cols + j] =
                static_cast<float>(sample_bilinear(img, sx, sy));
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            if (masked(x0, y0) && masked(x0 + 1, y0) && masked(x0, y0 + 1) &&
                masked(x0 + 1, y0 + 1))
                out.mask[static_cast<std::size_t>(i) * cols + j] = 1;
        }
    }
    return out;
}

void save_normalized(const NormalizedIris& norm, const std::filesystem::path& basename) {
    IrisImage tex;
    tex.width = norm.cols;
    tex.height = norm.rows;
    tex.pixels.resize(norm.pixels.size());
    for (std::size_t k = 0; k < norm.pixels.size(); ++k)
        tex.pixels[k] = static_cast<std::uint8_t>(
            std::clamp(static_cast<int>(std::lround(norm.pixels[k])), 0, 255));
    write_pgm(tex, basename.string() + "_norm.pgm");

    BinaryMask mask;
    mask.width = norm.cols;
    mask.height = norm.rows;
    mask.bits = norm.mask;
    write_mask_pgm(mask, basename.string() + "_normmask.pgm");
}

NormalizedIris load_normalized(const std::filesystem::path& basename) {
    IrisImage tex = read_pgm(basename.string() + "_norm.pgm");
    BinaryMask mask = read_mask_pgm(basename.string() + "_normmask.pgm");
    if (mask.width != tex.width || mask.height != tex.height)
        fail(ErrorCode::DimensionMismatch, "normalized texture vs mask");
    NormalizedIris out;
    out.rows = tex.height;
    out.cols = tex.width;
    out.pixels.assign(tex.pixels.begin(), tex.pixels.end());
    out.mask = std::move(mask.bits);
    return out;
}

} // namespace iris
