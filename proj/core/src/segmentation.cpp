#include "iris/segmentation.hpp"

#include "iris/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <vector>

namespace iris {

namespace {

constexpr double kPi = std::numbers::pi;

// Unit directions along the sampled arcs. The pupil uses the full circle;
// the iris uses [-45,45] u [135,225] degrees to stay clear of eyelids.
std::vector<std::pair<double, double>> arc_directions(int n, bool half_sectors) {
    std::vector<std::pair<double, double>> dirs;
    dirs.reserve(n);
    if (!half_sectors) {
        for (int i = 0; i < n; ++i) {
            const double a = 2.0 * kPi * i / n;
            dirs.emplace_back(std::cos(a), std::sin(a));
        }
    } else {
        const int m = std::max(1, n / 2);
        for (int i = 0; i < m; ++i) {
            const double a = -kPi / 4 + (kPi / 2) * (i + 0.5) / m;
            dirs.emplace_back(std::cos(a), std::sin(a));
            dirs.emplace_back(std::cos(a + kPi), std::sin(a + kPi));
        }
    }
    return dirs;
}

int arc_sample_count(double r, bool half_sectors, int cap) {
    const double arc_len = (half_sectors ? kPi : 2.0 * kPi) * r;
    return std::clamp(static_cast<int>(std::lround(arc_len / 2.0)), 24, cap);
}

struct Candidate {
    double value = -std::numeric_limits<double>::infinity();
    int r = 0, cy = 0, cx = 0;
    bool found = false;

    // Larger contrast wins; equal contrast breaks to smallest (r, cy, cx).
    void offer(double v, int rr, int yy, int xx) {
        if (!found || v > value ||
            (v == value && std::tuple(rr, yy, xx) < std::tuple(r, cy, cx))) {
            value = v;
            r = rr;
            cy = yy;
            cx = xx;
            found = true;
        }
    }
};

// Evaluates the blurred radial derivative of the mean arc intensity for
// every (cx, cy, r) on the given grid and offers the maxima to `best`.
// `min_radius(cx, cy)` lets the iris stage keep candidate circles outside
// the pupil.
template <typename MinRadiusFn>
void scan_grid(const IrisImage& img, int cx0, int cx1, int cy0, int cy1, int cstride, int r0,
               int r1, int rstride, bool half_sectors, double sigma, int sample_cap,
               MinRadiusFn min_radius, Candidate& best) {
    if (r1 < r0 || cx1 < cx0 || cy1 < cy0) return;

    const double sigma_samples = sigma / rstride;
    const int blur_half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_samples)));
    std::vector<double> blur(2 * blur_half + 1);
    double wsum = 0.0;
    for (int j = -blur_half; j <= blur_half; ++j) {
        blur[j + blur_half] = std::exp(-0.5 * (j * j) / (sigma_samples * sigma_samples));
        wsum += blur[j + blur_half];
    }
    for (double& w : blur) w /= wsum;

    // Profile grid extends past [r0, r1] so derivative + blur have support.
    const int pad = blur_half + 1;
    int grid_lo = r0 - pad * rstride;
    while (grid_lo < 1) grid_lo += rstride;
    const int lead = (r0 - grid_lo) / rstride; // profile entries before r0
    const int n_candidates = (r1 - r0) / rstride + 1;
    const int n_profile = lead + n_candidates + pad;

    std::vector<std::vector<std::pair<double, double>>> dir_tables(n_profile);
    std::vector<int> radii(n_profile);
    for (int i = 0; i < n_profile; ++i) {
        radii[i] = grid_lo + i * rstride;
        dir_tables[i] = arc_directions(arc_sample_count(radii[i], half_sectors, sample_cap),
                                       half_sectors);
    }

    std::vector<double> profile(n_profile), deriv(n_profile);
    for (int cy = cy0; cy <= cy1; cy += cstride) {
        for (int cx = cx0; cx <= cx1; cx += cstride) {
            for (int i = 0; i < n_profile; ++i) {
                const auto& dirs = dir_tables[i];
                const double r = radii[i];
                double acc = 0.0;
                for (const auto& [dx, dy] : dirs)
                    acc += sample_bilinear(img, cx + r * dx, cy + r * dy);
                profile[i] = acc / static_cast<double>(dirs.size());
            }
            for (int i = 1; i + 1 < n_profile; ++i)
                deriv[i] = (profile[i + 1] - profile[i - 1]) / (2.0 * rstride);

            const int min_r = min_radius(cx, cy);
            for (int i = lead; i < lead + n_candidates; ++i) {
                if (i - blur_half < 1 || i + blur_half + 1 >= n_profile) continue;
                if (radii[i] < min_r) continue;
                double g = 0.0;
                for (int j = -blur_half; j <= blur_half; ++j)
                    g += blur[j + blur_half] * deriv[i + j];
                best.offer(g, radii[i], cy, cx);
            }
        }
    }
}

template <typename MinRadiusFn>
Candidate coarse_to_fine(const IrisImage& img, int cx0, int cx1, int cy0, int cy1, int r0, int r1,
                         bool half_sectors, double sigma, MinRadiusFn min_radius) {
    Candidate coarse;
    scan_grid(img, cx0, cx1, cy0, cy1, 4, r0, r1, 4, half_sectors, sigma, 96, min_radius, coarse);
    if (!coarse.found) return coarse;

    Candidate fine;
    scan_grid(img, std::max(cx0, coarse.cx - 4), std::min(cx1, coarse.cx + 4),
              std::max(cy0, coarse.cy - 4), std::min(cy1, coarse.cy + 4), 1,
              std::max(r0, coarse.r - 4), std::min(r1, coarse.r + 4), 1, half_sectors, sigma, 256,
              min_radius, fine);
    return fine.found ? fine : coarse;
}

} // namespace

bool circles_valid(const Circle& pupil, const Circle& iris) {
    if (pupil.r <= 0.0 || iris.r <= 0.0) return false;
    const double dist = std::hypot(pupil.cx - iris.cx, pupil.cy - iris.cy);
    return dist + pupil.r < iris.r;
}

bool in_annulus(const Circle& pupil, const Circle& iris, double x, double y) {
    const double di = std::hypot(x - iris.cx, y - iris.cy);
    const double dp = std::hypot(x - pupil.cx, y - pupil.cy);
    return di < iris.r && dp > pupil.r;
}

SegmentationResult segment_circular(const IrisImage& img, const SegmentationConfig& cfg) {
    SegmentationConfig c = cfg;
    if (c.cx_min < 0) c.cx_min = img.width / 4;
    if (c.cx_max < 0) c.cx_max = 3 * img.width / 4;
    if (c.cy_min < 0) c.cy_min = img.height / 4;
    if (c.cy_max < 0) c.cy_max = 3 * img.height / 4;

    if (c.pupil_r_min < 1 || c.pupil_r_min > c.pupil_r_max || c.iris_r_min < 1 ||
        c.iris_r_min > c.iris_r_max || c.iris_r_max <= c.pupil_r_min)
        fail(ErrorCode::SearchRangeInvalid, "radius ranges");
    if (c.cx_min > c.cx_max || c.cy_min > c.cy_max || c.cx_max >= img.width ||
        c.cy_max >= img.height)
        fail(ErrorCode::SearchRangeInvalid, "center window");
    if (img.width < 2 * c.iris_r_max || img.height < 2 * c.iris_r_max)
        fail(ErrorCode::SearchRangeInvalid, "image too small for max iris radius");

    // Pupil: full-circle arcs over the configured window.
    Candidate pupil = coarse_to_fine(img, c.cx_min, c.cx_max, c.cy_min, c.cy_max, c.pupil_r_min,
                                     c.pupil_r_max, false, c.blur_sigma,
                                     [&](int, int) { return c.pupil_r_min; });
    if (!pupil.found || pupil.value < c.contrast_floor)
        fail(ErrorCode::NoBoundaryFound, "pupil contrast below floor");

    // Iris: concentric within +-10 px of the pupil center, side sectors only,
    // and circles that keep the pupil strictly inside.
    auto iris_min_r = [&](int cx, int cy) {
        const double dist = std::hypot(cx - pupil.cx, cy - pupil.cy);
        return std::max(c.iris_r_min,
                        static_cast<int>(std::ceil(dist + pupil.r + 2.0)));
    };
    Candidate iris = coarse_to_fine(img, std::max(0, pupil.cx - 10),
                                    std::min(img.width - 1, pupil.cx + 10),
                                    std::max(0, pupil.cy - 10),
                                    std::min(img.height - 1, pupil.cy + 10), c.iris_r_min,
                                    c.iris_r_max, true, c.blur_sigma, iris_min_r);
    if (!iris.found || iris.value < c.contrast_floor)
        fail(ErrorCode::NoBoundaryFound, "iris contrast below floor");

    SegmentationResult result;
    result.pupil = Circle{static_cast<double>(pupil.cx), static_cast<double>(pupil.cy),
                          static_cast<double>(pupil.r)};
    result.iris = Circle{static_cast<double>(iris.cx), static_cast<double>(iris.cy),
                         static_cast<double>(iris.r)};

    result.mask = BinaryMask::filled(img.width, img.height, 0);
    const int x0 = std::max(0, static_cast<int>(std::floor(result.iris.cx - result.iris.r)) - 1);
    const int x1 = std::min(img.width - 1,
                            static_cast<int>(std::ceil(result.iris.cx + result.iris.r)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(result.iris.cy - result.iris.r)) - 1);
    const int y1 = std::min(img.height - 1,
                            static_cast<int>(std::ceil(result.iris.cy + result.iris.r)) + 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (in_annulus(result.pupil, result.iris, x, y) &&
                img.at(x, y) <= c.specular_threshold)
                result.mask.at(x, y) = 1;
    return result;
}

SegmentationResult ingest_mask(const IrisImage& img, const std::filesystem::path& mask_path,
                               const Circle& pupil, const Circle& iris) {
    BinaryMask mask = read_mask_pgm(mask_path);
    if (mask.width != img.width || mask.height != img.height)
        fail(ErrorCode::DimensionMismatch,
             "mask " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                 " vs image " + std::to_string(img.width) + "x" + std::to_string(img.height));
    if (!circles_valid(pupil, iris)) fail(ErrorCode::InvalidCircles, "pupil not inside iris");

    SegmentationResult result;
    result.pupil = pupil;
    result.iris = iris;
    result.mask = std::move(mask);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (result.mask.at(x, y) && !in_annulus(pupil, iris, x, y)) result.mask.at(x, y) = 0;
    return result;
}

std::pair<Circle, Circle> read_circles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
    Circle p, i;
    if (!(in >> p.cx >> p.cy >> p.r >> i.cx >> i.cy >> i.r))
        fail(ErrorCode::IoFailure, "expected 6 numbers in " + path.string());
    return {p, i};
}

void write_circles(const Circle& pupil, const Circle& iris, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    char line[256];
    std::snprintf(line, sizeof line, "%.9g %.9g %.9g %.9g %.9g %.9g\n", pupil.cx, pupil.cy,
                  pupil.r, iris.cx, iris.cy, iris.r);
    out << line;
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path.string());
}

} // namespace iris
