#ifndef IRIS_IMAGE_HPP
#define IRIS_IMAGE_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace iris {

// 8-bit grayscale raster, row-major.
struct IrisImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    static IrisImage filled(int w, int h, std::uint8_t value);
};

// Row-major {0,1} mask with the dimensions of the image it annotates.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }

    std::size_t popcount() const;

    static BinaryMask filled(int w, int h, std::uint8_t value);
};

// Odd-sided square convolution kernel, row-major.
struct Kernel {
    int side = 0;
    std::vector<double> weights;

    double at(int x, int y) const { return weights[static_cast<std::size_t>(y) * side + x]; }
};

// Binary PGM (P5) I/O. read_pgm tolerates comments and arbitrary header
// whitespace; write_pgm emits the canonical "P5\n<w> <h>\n255\n" header.
IrisImage read_pgm(const std::filesystem::path& path);
void write_pgm(const IrisImage& img, const std::filesystem::path& path);

// Masks travel as PGM too: 0 = excluded, 255 = iris. Reading binarizes at 128.
BinaryMask read_mask_pgm(const std::filesystem::path& path);
void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& path);

// w x h window centered on the image; odd remainders keep the extra pixel
// on the right/bottom.
IrisImage center_crop(const IrisImage& img, int w, int h);

// Correlation of the kernel with the neighborhood of each pixel (no kernel
// flip), border handled by nearest-pixel replication. Output has the
// dimensions of the input.
std::vector<double> convolve_zero_mean(const IrisImage& img, const Kernel& kernel);

// Bilinear read with clamp-to-edge, for subpixel sampling.
double sample_bilinear(const IrisImage& img, double x, double y);

} // namespace iris

#endif
