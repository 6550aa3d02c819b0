#ifndef IRIS_ENCODING_HPP
#define IRIS_ENCODING_HPP

#include "iris/image.hpp"
#include "iris/normalization.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace iris {

// n zero-mean square kernels of odd side s.
struct FilterBank {
    int count = 0;
    int side = 0;
    std::vector<Kernel> kernels;
};

// File format: "BSIF <n> <s>" followed by n*s*s whitespace-separated reals,
// row-major per kernel. Kernels are recentered to zero mean on load.
FilterBank load_filter_bank(const std::filesystem::path& path);
void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path);

// Seeded pseudo-random bank: zero-mean, mutually orthonormal kernels.
FilterBank make_random_bank(int count, int side, std::uint64_t seed);

// Stack of BSIF bit-planes over a normalized iris plus one shared validity
// mask. Bit k at (i,j) is 1 iff filter k's response is > 0 there.
struct IrisTemplate {
    int planes_n = 0;
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<std::uint8_t>> planes; // planes_n bitmaps, row-major {0,1}
    std::vector<std::uint8_t> mask;                // row-major {0,1}
};

// Filter responses wrap in the angular (column) direction and replicate in
// the radial direction; the template mask is the normalized mask eroded
// radially by ceil(s/2) so no bit depends on out-of-annulus texture.
IrisTemplate encode(const NormalizedIris& norm, const FilterBank& bank);

struct MatchScore {
    double score = 0.0; // mean fractional Hamming distance, min over shifts
    int best_shift = 0; // positive shifts b rightward before comparison
};

// Mean-over-planes fractional Hamming distance under the joint mask,
// minimized over circular column shifts of b in [-max_shift, +max_shift].
// Shifts with fewer than 1024 jointly valid positions are skipped; if all
// are, raises InsufficientOverlap. Ties prefer smaller |shift|, negative
// first.
MatchScore match(const IrisTemplate& a, const IrisTemplate& b, int max_shift = 16);

// Text format "ITPL 1 <n> <rows> <cols>" + n+1 blocks of rows lines of cols
// '0'/'1' characters, mask block last.
void save_template(const IrisTemplate& tpl, const std::filesystem::path& path);
IrisTemplate load_template(const std::filesystem::path& path);

} // namespace iris

#endif
