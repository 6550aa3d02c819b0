#ifndef IRIS_SEGMENTATION_HPP
#define IRIS_SEGMENTATION_HPP

#include "iris/image.hpp"

#include <filesystem>
#include <utility>

namespace iris {

struct Circle {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
};

// Pupil strictly inside iris: distance(centers) + pupil.r < iris.r.
// The mask is zero outside the iris circle and inside the pupil circle.
struct SegmentationResult {
    Circle pupil;
    Circle iris;
    BinaryMask mask;
};

struct SegmentationConfig {
    // Center search window, inclusive; -1 selects the central half of the image.
    int cx_min = -1, cx_max = -1;
    int cy_min = -1, cy_max = -1;
    int pupil_r_min = 15, pupil_r_max = 70;
    int iris_r_min = 40, iris_r_max = 160;
    // Max radial-derivative contrast below this raises NoBoundaryFound.
    double contrast_floor = 2.0;
    // Pixels brighter than this are dropped from the mask (LED glints).
    int specular_threshold = 250;
    // Gaussian blur applied to the radial-derivative profile.
    double blur_sigma = 2.0;
};

// Integro-differential circular boundary search, coarse (stride 4) to fine
// (stride 1). The pupil uses full circles; the iris is restricted to the
// left/right 90-degree sectors and to centers within +-10 px of the pupil
// center. Ties in the contrast maximum break toward smallest (r, cy, cx).
SegmentationResult segment_circular(const IrisImage& img, const SegmentationConfig& cfg = {});

// Accepts an externally produced mask (PGM, binarized at 128) plus the
// circle parameters the external segmenter emitted; the stored mask is the
// intersection of the given mask with the annulus between the circles.
SegmentationResult ingest_mask(const IrisImage& img, const std::filesystem::path& mask_path,
                               const Circle& pupil, const Circle& iris);

// Circle sidecar files: one line, "px py pr ix iy ir".
std::pair<Circle, Circle> read_circles(const std::filesystem::path& path);
void write_circles(const Circle& pupil, const Circle& iris, const std::filesystem::path& path);

bool circles_valid(const Circle& pupil, const Circle& iris);

// Strict interior of the annulus between the two circles.
bool in_annulus(const Circle& pupil, const Circle& iris, double x, double y);

} // namespace iris

#endif
