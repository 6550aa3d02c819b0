#ifndef IRIS_NORMALIZATION_HPP
#define IRIS_NORMALIZATION_HPP

#include "iris/image.hpp"
#include "iris/segmentation.hpp"

#include <filesystem>
#include <vector>

namespace iris {

// Rubber-sheet raster. Row 0 is the pupil boundary, row rows-1 the iris
// boundary; column j is angle 2*pi*j/cols from the +x axis.
struct NormalizedIris {
    int rows = 0;
    int cols = 0;
    std::vector<float> pixels;       // row-major intensities
    std::vector<std::uint8_t> mask;  // row-major {0,1}

    float at(int i, int j) const { return pixels[static_cast<std::size_t>(i) * cols + j]; }
    std::uint8_t mask_at(int i, int j) const {
        return mask[static_cast<std::size_t>(i) * cols + j];
    }
};

// Unwraps the annulus: the sample for (i, j) blends the pupil- and
// iris-boundary points at angle theta_j with radial fraction i/(rows-1),
// bilinear interpolation. A normalized mask bit is 1 only when all four
// source pixels are masked valid and in bounds.
NormalizedIris normalize(const IrisImage& img, const SegmentationResult& seg, int rows = 64,
                         int cols = 512);

// Serialized as two PGMs sharing a basename: <base>_norm.pgm (texture,
// rounded to bytes) and <base>_normmask.pgm.
void save_normalized(const NormalizedIris& norm, const std::filesystem::path& basename);
NormalizedIris load_normalized(const std::filesystem::path& basename);

} // namespace iris

#endif
