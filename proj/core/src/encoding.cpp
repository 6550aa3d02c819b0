#include "iris/encoding.hpp"

#include "iris/errors.hpp"
#include "iris/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace iris {

namespace {

void validate_bank(const FilterBank& bank) {
    if (bank.count < 1 || static_cast<int>(bank.kernels.size()) != bank.count)
        fail(ErrorCode::MalformedFilterFile, "filter count");
    if (bank.side < 1 || bank.side % 2 == 0) fail(ErrorCode::EvenKernelSide, "");
    for (const Kernel& k : bank.kernels) {
        if (k.side != bank.side ||
            k.weights.size() != static_cast<std::size_t>(bank.side) * bank.side)
            fail(ErrorCode::MalformedFilterFile, "kernel shape");
        double sum = 0.0;
        for (double w : k.weights) sum += w;
        if (std::abs(sum) >= 1e-6) fail(ErrorCode::MalformedFilterFile, "kernel not zero-mean");
    }
}

} // namespace

FilterBank load_filter_bank(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
    std::string magic;
    int count = 0, side = 0;
    if (!(in >> magic >> count >> side) || magic != "BSIF")
        fail(ErrorCode::MalformedFilterFile, "expected 'BSIF <n> <s>' header");
    if (side < 1 || side % 2 == 0) fail(ErrorCode::EvenKernelSide, std::to_string(side));
    if (count < 1) fail(ErrorCode::MalformedFilterFile, "filter count must be >= 1");

    FilterBank bank;
    bank.count = count;
    bank.side = side;
    bank.kernels.resize(count);
    for (Kernel& k : bank.kernels) {
        k.side = side;
        k.weights.resize(static_cast<std::size_t>(side) * side);
        for (double& w : k.weights) {
            if (!(in >> w) || !std::isfinite(w))
                fail(ErrorCode::MalformedFilterFile, "value count or format mismatch");
        }
    }
    std::string extra;
    if (in >> extra) fail(ErrorCode::MalformedFilterFile, "trailing content '" + extra + "'");

    // Recenter to zero mean, then check the residual.
    for (Kernel& k : bank.kernels) {
        double mean = 0.0;
        for (double w : k.weights) mean += w;
        mean /= static_cast<double>(k.weights.size());
        for (double& w : k.weights) w -= mean;
    }
    validate_bank(bank);
    return bank;
}

void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path) {
    validate_bank(bank);
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << "BSIF " << bank.count << " " << bank.side << "\n";
    char buf[32];
    for (const Kernel& k : bank.kernels) {
        for (int y = 0; y < k.side; ++y) {
            for (int x = 0; x < k.side; ++x) {
                std::snprintf(buf, sizeof buf, "%.17g", k.at(x, y));
                out << buf << (x + 1 == k.side ? "\n" : " ");
            }
        }
    }
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path.string());
}

FilterBank make_random_bank(int count, int side, std::uint64_t seed) {
    if (side < 1 || side % 2 == 0) fail(ErrorCode::EvenKernelSide, std::to_string(side));
    const int dim = side * side;
    if (count < 1 || count > dim - 1)
        fail(ErrorCode::InvalidSpec, "cannot fit " + std::to_string(count) +
                                         " orthonormal zero-mean kernels of side " +
                                         std::to_string(side));
    Rng rng(mix_seed(seed, 0xB51F));
    FilterBank bank;
    bank.count = count;
    bank.side = side;
    bank.kernels.reserve(count);
    while (static_cast<int>(bank.kernels.size()) < count) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.normal();
        // Project out the constant component, then the accepted kernels.
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= dim;
        for (double& x : v) x -= mean;
        for (const Kernel& prev : bank.kernels) {
            double dot = 0.0;
            for (int i = 0; i < dim; ++i) dot += v[i] * prev.weights[i];
            for (int i = 0; i < dim; ++i) v[i] -= dot * prev.weights[i];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-8) continue; // degenerate draw, redo
        for (double& x : v) x /= norm;
        bank.kernels.push_back(Kernel{side, std::move(v)});
    }
    return bank;
}

namespace {

// Correlation on the polar raster: columns wrap (angle), rows replicate.
std::vector<double> polar_response(const NormalizedIris& norm, const Kernel& kernel) {
    const int half = kernel.side / 2;
    const int rows = norm.rows;
    const int cols = norm.cols;
    std::vector<double> out(static_cast<std::size_t>(rows) * cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (int ky = -half; ky <= half; ++ky) {
                const int si = std::clamp(i + ky, 0, rows - 1);
                const float* row = &norm.pixels[static_cast<std::size_t>(si) * cols];
                const double* krow =
                    &kernel.weights[static_cast<std::size_t>(ky + half) * kernel.side];
                for (int kx = -half; kx <= half; ++kx) {
                    int sj = j + kx;
                    if (sj < 0) sj += cols;
                    else if (sj >= cols) sj -= cols;
                    acc += krow[kx + half] * row[sj];
                }
            }
            out[static_cast<std::size_t>(i) * cols + j] = acc;
        }
    }
    return out;
}

} // namespace

IrisTemplate encode(const NormalizedIris& norm, const FilterBank& bank) {
    validate_bank(bank);
    const std::size_t total = static_cast<std::size_t>(norm.rows) * norm.cols;
    if (norm.pixels.size() != total || norm.mask.size() != total)
        fail(ErrorCode::DimensionMismatch, "normalized raster");
    std::size_t covered = 0;
    for (std::uint8_t m : norm.mask) covered += m;
    if (covered * 20 < total) fail(ErrorCode::EmptyMask, "normalized mask covers <5%");

    IrisTemplate tpl;
    tpl.planes_n = bank.count;
    tpl.rows = norm.rows;
    tpl.cols = norm.cols;
    tpl.planes.reserve(bank.count);
    for (const Kernel& k : bank.kernels) {
        std::vector<double> resp = polar_response(norm, k);
        std::vector<std::uint8_t> bits(total);
        for (std::size_t p = 0; p < total; ++p) bits[p] = resp[p] > 0.0 ? 1 : 0;
        tpl.planes.push_back(std::move(bits));
    }

    // Radial-only erosion by ceil(s/2); rows outside the raster count as
    // invalid, the angular direction wraps and needs none.
    const int erode = (bank.side + 1) / 2;
    tpl.mask.assign(total, 0);
    for (int i = 0; i < norm.rows; ++i) {
        if (i - erode < 0 || i + erode >= norm.rows) continue;
        for (int j = 0; j < norm.cols; ++j) {
            bool ok = true;
            for (int di = -erode; di <= erode && ok; ++di)
                ok = norm.mask[static_cast<std::size_t>(i + di) * norm.cols + j] != 0;
            if (ok) tpl.mask[static_cast<std::size_t>(i) * norm.cols + j] = 1;
        }
    }
    return tpl;
}

namespace {

// Row-major bit packing, each row padded to whole 64-bit words.
struct PackedPlanes {
    int rows = 0, cols = 0, wpr = 0;
    std::vector<std::uint64_t> words; // one block of rows*wpr per plane

    static PackedPlanes pack(const IrisTemplate& tpl) {
        PackedPlanes p;
        p.rows = tpl.rows;
        p.cols = tpl.cols;
        p.wpr = (tpl.cols + 63) / 64;
        p.words.assign(static_cast<std::size_t>(tpl.planes_n + 1) * tpl.rows * p.wpr, 0);
        for (int k = 0; k <= tpl.planes_n; ++k) {
            const std::vector<std::uint8_t>& bits =
                (k < tpl.planes_n) ? tpl.planes[k] : tpl.mask;
            std::uint64_t* block = &p.words[static_cast<std::size_t>(k) * tpl.rows * p.wpr];
            for (int i = 0; i < tpl.rows; ++i)
                for (int j = 0; j < tpl.cols; ++j)
                    if (bits[static_cast<std::size_t>(i) * tpl.cols + j])
                        block[static_cast<std::size_t>(i) * p.wpr + j / 64] |=
                            std::uint64_t{1} << (j % 64);
        }
        return p;
    }

    const std::uint64_t* row(int plane, int i) const {
        return &words[(static_cast<std::size_t>(plane) * rows + i) * wpr];
    }
};

// Circularly shifts every row of a plane right by `shift` columns:
// out[j] = in[(j - shift) mod cols].
void shift_plane(const PackedPlanes& src, int plane, int shift, int cols,
                 std::vector<std::uint64_t>& out) {
    const int wpr = src.wpr;
    int s = ((-shift) % cols + cols) % cols; // out[j] = in[(j + s) mod cols]
    std::vector<std::uint64_t> doubled(2 * static_cast<std::size_t>(wpr) + 1);
    for (int i = 0; i < src.rows; ++i) {
        const std::uint64_t* in = src.row(plane, i);
        // Row bits laid out twice so any cols-window is contiguous.
        for (int w = 0; w < wpr; ++w) doubled[w] = in[w];
        const int wholes = cols / 64, rem = cols % 64;
        if (rem == 0) {
            for (int w = 0; w < wpr; ++w) doubled[wholes + w] = in[w];
        } else {
            for (int b = 0; b < cols; ++b) {
                const int dst = cols + b;
                doubled[dst / 64] &= ~(std::uint64_t{1} << (dst % 64));
                if (in[b / 64] >> (b % 64) & 1)
                    doubled[dst / 64] |= std::uint64_t{1} << (dst % 64);
            }
        }
        std::uint64_t* dst = &out[static_cast<std::size_t>(i) * wpr];
        const int word_off = s / 64, bit_off = s % 64;
        for (int w = 0; w < wpr; ++w) {
            std::uint64_t lo = doubled[word_off + w] >> bit_off;
            std::uint64_t hi = bit_off ? doubled[word_off + w + 1] << (64 - bit_off) : 0;
            dst[w] = lo | hi;
        }
        if (rem != 0) dst[wpr - 1] &= (std::uint64_t{1} << rem) - 1; // clear pad bits
    }
}

} // namespace

MatchScore match(const IrisTemplate& a, const IrisTemplate& b, int max_shift) {
    if (max_shift < 0) fail(ErrorCode::SearchRangeInvalid, "max_shift < 0");
    if (a.planes_n != b.planes_n || a.rows != b.rows || a.cols != b.cols)
        fail(ErrorCode::ShapeMismatch, "template shapes differ");
    if (a.planes_n < 1) fail(ErrorCode::ShapeMismatch, "no planes");

    const PackedPlanes pa = PackedPlanes::pack(a);
    const PackedPlanes pb = PackedPlanes::pack(b);
    const int n = a.planes_n;
    const int mask_idx = n;
    const std::size_t row_words = static_cast<std::size_t>(a.rows) * pa.wpr;

    std::vector<std::uint64_t> shifted_mask(row_words), shifted_plane(row_words),
        joint(row_words);

    MatchScore best;
    bool found = false;

    // Shift order 0, -1, +1, -2, +2, ... makes the tie rule (smallest
    // |shift|, negative first) fall out of strict improvement.
    std::vector<int> shifts;
    shifts.push_back(0);
    for (int d = 1; d <= max_shift; ++d) {
        shifts.push_back(-d);
        shifts.push_back(+d);
    }

    for (int delta : shifts) {
        shift_plane(pb, mask_idx, delta, a.cols, shifted_mask);
        std::uint64_t denom = 0;
        for (std::size_t w = 0; w < row_words; ++w) {
            joint[w] = pa.words[mask_idx * row_words + w] & shifted_mask[w];
            denom += static_cast<std::uint64_t>(std::popcount(joint[w]));
        }
        if (denom < 1024) continue;

        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            shift_plane(pb, k, delta, a.cols, shifted_plane);
            const std::uint64_t* pka = &pa.words[static_cast<std::size_t>(k) * row_words];
            std::uint64_t disagree = 0;
            for (std::size_t w = 0; w < row_words; ++w)
                disagree += static_cast<std::uint64_t>(
                    std::popcount((pka[w] ^ shifted_plane[w]) & joint[w]));
            sum += static_cast<double>(disagree) / static_cast<double>(denom);
        }
        const double score = sum / n;
        if (!found || score < best.score) {
            best.score = score;
            best.best_shift = delta;
            found = true;
        }
    }

    if (!found)
        fail(ErrorCode::InsufficientOverlap, "fewer than 1024 jointly valid bits at every shift");
    return best;
}

void save_template(const IrisTemplate& tpl, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << "ITPL 1 " << tpl.planes_n << " " << tpl.rows << " " << tpl.cols << "\n";
    std::string line(static_cast<std::size_t>(tpl.cols), '0');
    for (int k = 0; k <= tpl.planes_n; ++k) {
        const std::vector<std::uint8_t>& bits = (k < tpl.planes_n) ? tpl.planes[k] : tpl.mask;
        for (int i = 0; i < tpl.rows; ++i) {
            for (int j = 0; j < tpl.cols; ++j)
                line[j] = bits[static_cast<std::size_t>(i) * tpl.cols + j] ? '1' : '0';
            out << line << "\n";
        }
    }
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path.string());
}

IrisTemplate load_template(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) fail(ErrorCode::MalformedTemplateFile, "missing header");
    std::istringstream hs(header);
    std::string magic;
    int version = 0, n = 0, rows = 0, cols = 0;
    if (!(hs >> magic >> version >> n >> rows >> cols) || magic != "ITPL")
        fail(ErrorCode::MalformedTemplateFile, "bad header '" + header + "'");
    if (version != 1) fail(ErrorCode::MalformedTemplateFile, "unknown version");
    if (n < 1 || rows < 1 || cols < 1) fail(ErrorCode::MalformedTemplateFile, "bad dimensions");

    IrisTemplate tpl;
    tpl.planes_n = n;
    tpl.rows = rows;
    tpl.cols = cols;
    const std::size_t total = static_cast<std::size_t>(rows) * cols;
    std::string line;
    for (int k = 0; k <= n; ++k) {
        std::vector<std::uint8_t> bits(total);
        for (int i = 0; i < rows; ++i) {
            if (!std::getline(in, line)) fail(ErrorCode::MalformedTemplateFile, "truncated");
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (static_cast<int>(line.size()) != cols)
                fail(ErrorCode::MalformedTemplateFile, "line length " +
                                                           std::to_string(line.size()) +
                                                           " != cols " + std::to_string(cols));
            for (int j = 0; j < cols; ++j) {
                if (line[j] != '0' && line[j] != '1')
                    fail(ErrorCode::MalformedTemplateFile, "non-binary character");
                bits[static_cast<std::size_t>(i) * cols + j] = line[j] == '1' ? 1 : 0;
            }
        }
        if (k < n) tpl.planes.push_back(std::move(bits));
        else tpl.mask = std::move(bits);
    }
    return tpl;
}

} // namespace iris
