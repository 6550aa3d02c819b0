#include "iris/image.hpp"

#include "iris/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace iris {

IrisImage IrisImage::filled(int w, int h, std::uint8_t value) {
    IrisImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(static_cast<std::size_t>(w) * h, value);
    return img;
}

BinaryMask BinaryMask::filled(int w, int h, std::uint8_t value) {
    BinaryMask m;
    m.width = w;
    m.height = h;
    m.bits.assign(static_cast<std::size_t>(w) * h, value);
    return m;
}

std::size_t BinaryMask::popcount() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
bool next_header_token(std::istream& in, std::string& token) {
    token.clear();
    int c = in.get();
    for (;;) {
        if (c == EOF) return false;
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
            continue;
        }
        if (!std::isspace(c)) break;
        c = in.get();
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    // The final whitespace byte consumed here is the separator before the
    // payload when this token is the maxval.
    return !token.empty();
}

int parse_header_int(const std::string& token) {
    if (token.empty()) fail(ErrorCode::MalformedHeader, "empty header field");
    long value = 0;
    for (char ch : token) {
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            fail(ErrorCode::MalformedHeader, "non-numeric header field '" + token + "'");
        value = value * 10 + (ch - '0');
        if (value > 1000000) fail(ErrorCode::MalformedHeader, "header field out of range");
    }
    return static_cast<int>(value);
}

} // namespace

IrisImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        fail(ErrorCode::MalformedHeader, "not a binary PGM (P5): " + path.string());

    std::string tok;
    if (!next_header_token(in, tok)) fail(ErrorCode::MalformedHeader, "missing width");
    const int width = parse_header_int(tok);
    if (!next_header_token(in, tok)) fail(ErrorCode::MalformedHeader, "missing height");
    const int height = parse_header_int(tok);
    if (!next_header_token(in, tok)) fail(ErrorCode::MalformedHeader, "missing maxval");
    const int maxval = parse_header_int(tok);

    if (width < 1 || height < 1) fail(ErrorCode::MalformedHeader, "degenerate dimensions");
    if (maxval < 1 || maxval > 255) fail(ErrorCode::MalformedHeader, "maxval > 255 unsupported");

    IrisImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        fail(ErrorCode::TruncatedPayload, path.string());
    return img;
}

void write_pgm(const IrisImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    char header[64];
    int n = std::snprintf(header, sizeof header, "P5\n%d %d\n255\n", img.width, img.height);
    out.write(header, n);
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path.string());
}

BinaryMask read_mask_pgm(const std::filesystem::path& path) {
    IrisImage img = read_pgm(path);
    BinaryMask mask;
    mask.width = img.width;
    mask.height = img.height;
    mask.bits.resize(img.pixels.size());
    std::transform(img.pixels.begin(), img.pixels.end(), mask.bits.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v >= 128 ? 1 : 0); });
    return mask;
}

void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& path) {
    IrisImage img;
    img.width = mask.width;
    img.height = mask.height;
    img.pixels.resize(mask.bits.size());
    std::transform(mask.bits.begin(), mask.bits.end(), img.pixels.begin(),
                   [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
    write_pgm(img, path);
}

IrisImage center_crop(const IrisImage& img, int w, int h) {
    if (w > img.width || h > img.height)
        fail(ErrorCode::CropTooLarge, std::to_string(w) + "x" + std::to_string(h) + " from " +
                                          std::to_string(img.width) + "x" + std::to_string(img.height));
    // Odd remainders leave the extra pixel on the right/bottom.
    const int x0 = (img.width - w) / 2;
    const int y0 = (img.height - h) / 2;
    IrisImage out;
    out.width = w;
    out.height = h;
    out.pixels.resize(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = &img.pixels[static_cast<std::size_t>(y0 + y) * img.width + x0];
        std::copy(src, src + w, &out.pixels[static_cast<std::size_t>(y) * w]);
    }
    return out;
}

std::vector<double> convolve_zero_mean(const IrisImage& img, const Kernel& kernel) {
    if (kernel.side < 1 || kernel.side % 2 == 0)
        fail(ErrorCode::EvenKernel, "kernel side must be odd, got " + std::to_string(kernel.side));
    const int half = kernel.side / 2;
    const int w = img.width;
    const int h = img.height;
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int ky = -half; ky <= half; ++ky) {
                const int sy = std::clamp(y + ky, 0, h - 1);
                const std::uint8_t* row = &img.pixels[static_cast<std::size_t>(sy) * w];
                const double* krow = &kernel.weights[static_cast<std::size_t>(ky + half) * kernel.side];
                for (int kx = -half; kx <= half; ++kx) {
                    const int sx = std::clamp(x + kx, 0, w - 1);
                    acc += krow[kx + half] * row[sx];
                }
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

double sample_bilinear(const IrisImage& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto clamped = [&](int xi, int yi) {
        xi = std::clamp(xi, 0, img.width - 1);
        yi = std::clamp(yi, 0, img.height - 1);
        return static_cast<double>(img.at(xi, yi));
    };
    const double v00 = clamped(x0, y0);
    const double v10 = clamped(x0 + 1, y0);
    const double v01 = clamped(x0, y0 + 1);
    const double v11 = clamped(x0 + 1, y0 + 1);
    return v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy + v11 * fx * fy;
}

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::CropTooLarge: return "CropTooLarge";
        case ErrorCode::EvenKernel: return "EvenKernel";
        case ErrorCode::NoBoundaryFound: return "NoBoundaryFound";
        case ErrorCode::SearchRangeInvalid: return "SearchRangeInvalid";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidCircles: return "InvalidCircles";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::MalformedFilterFile: return "MalformedFilterFile";
        case ErrorCode::EvenKernelSide: return "EvenKernelSide";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
        case ErrorCode::MalformedTemplateFile: return "MalformedTemplateFile";
        case ErrorCode::TooFewValidPixels: return "TooFewValidPixels";
        case ErrorCode::MissingFilterBank: return "MissingFilterBank";
        case ErrorCode::SingleClassTrainingSet: return "SingleClassTrainingSet";
        case ErrorCode::MalformedModelFile: return "MalformedModelFile";
        case ErrorCode::DegenerateDistributions: return "DegenerateDistributions";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::UnreachableOperatingPoint: return "UnreachableOperatingPoint";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::EmptyManifest: return "EmptyManifest";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "UnknownError";
}

} // namespace iris
