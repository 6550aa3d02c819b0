#include "iris/encoding.hpp"

#include "iris/errors.hpp"
#include "iris/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

using namespace iris;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an iris::Error");
    return ErrorCode::IoFailure;
}

NormalizedIris random_norm(int rows, int cols, Rng& rng) {
    NormalizedIris n;
    n.rows = rows;
    n.cols = cols;
    n.pixels.resize(static_cast<std::size_t>(rows) * cols);
    n.mask.assign(n.pixels.size(), 1);
    for (auto& p : n.pixels) p = static_cast<float>(rng.uniform(0.0, 255.0));
    return n;
}

IrisTemplate random_template(int planes, int rows, int cols, Rng& rng, bool full_mask = true) {
    IrisTemplate t;
    t.planes_n = planes;
    t.rows = rows;
    t.cols = cols;
    const std::size_t total = static_cast<std::size_t>(rows) * cols;
    for (int k = 0; k < planes; ++k) {
        std::vector<std::uint8_t> bits(total);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
        t.planes.push_back(std::move(bits));
    }
    t.mask.assign(total, 1);
    if (!full_mask)
        for (auto& b : t.mask) b = rng.uniform_int(0, 9) > 0 ? 1 : 0; // ~90% coverage
    return t;
}

IrisTemplate complement(IrisTemplate t) {
    for (auto& plane : t.planes)
        for (auto& b : plane) b ^= 1;
    return t;
}

// Circularly shifts all planes and the mask right by delta columns.
IrisTemplate shift_template(const IrisTemplate& t, int delta) {
    IrisTemplate out = t;
    auto shift_bits = [&](const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& dst) {
        for (int i = 0; i < t.rows; ++i)
            for (int j = 0; j < t.cols; ++j) {
                const int src = ((j - delta) % t.cols + t.cols) % t.cols;
                dst[static_cast<std::size_t>(i) * t.cols + j] =
                    in[static_cast<std::size_t>(i) * t.cols + src];
            }
    };
    for (int k = 0; k < t.planes_n; ++k) shift_bits(t.planes[k], out.planes[k]);
    shift_bits(t.mask, out.mask);
    return out;
}

// Brute-force mean fractional Hamming distance over shifts; the independent
// oracle for match().
struct OracleResult {
    double score = 0.0;
    int shift = 0;
    bool found = false;
};

OracleResult oracle_match(const IrisTemplate& a, const IrisTemplate& b, int max_shift) {
    OracleResult best;
    for (int delta = -max_shift; delta <= max_shift; ++delta) {
        const IrisTemplate bs = shift_template(b, delta);
        std::size_t joint = 0;
        for (std::size_t p = 0; p < a.mask.size(); ++p) joint += a.mask[p] & bs.mask[p];
        if (joint < 1024) continue;
        double mean = 0.0;
        for (int k = 0; k < a.planes_n; ++k) {
            std::size_t disagree = 0;
            for (std::size_t p = 0; p < a.mask.size(); ++p)
                if (a.mask[p] & bs.mask[p] & (a.planes[k][p] ^ bs.planes[k][p])) ++disagree;
            mean += static_cast<double>(disagree) / joint;
        }
        mean /= a.planes_n;
        const bool better =
            !best.found || mean < best.score ||
            (mean == best.score &&
             (std::abs(delta) < std::abs(best.shift) ||
              (std::abs(delta) == std::abs(best.shift) && delta < best.shift)));
        if (better) best = {mean, delta, true};
    }
    return best;
}

} // namespace

TEST_CASE("filter bank file parsing") {
    const auto path = temp_file("bank.bsif");
    {
        std::ofstream out(path);
        out << "BSIF 1 3\n1 -2 1 -2 4 -2 1 -2 1\n";
    }
    const FilterBank bank = load_filter_bank(path);
    CHECK(bank.count == 1);
    CHECK(bank.side == 3);
    double sum = 0.0;
    for (double w : bank.kernels[0].weights) sum += w;
    CHECK(std::abs(sum) < 1e-6);

    {
        std::ofstream out(path);
        out << "BSIF 2 3\n";
        for (int i = 0; i < 17; ++i) out << i << " ";
    }
    CHECK(code_of([&] { load_filter_bank(path); }) == ErrorCode::MalformedFilterFile);

    {
        std::ofstream out(path);
        out << "BSIF 1 4\n";
        for (int i = 0; i < 16; ++i) out << i << " ";
    }
    CHECK(code_of([&] { load_filter_bank(path); }) == ErrorCode::EvenKernelSide);

    {
        std::ofstream out(path);
        out << "BSIF 1 1\n0\nextra\n";
    }
    CHECK(code_of([&] { load_filter_bank(path); }) == ErrorCode::MalformedFilterFile);
}

TEST_CASE("seeded random banks are zero-mean, orthonormal and reloadable") {
    const FilterBank bank = make_random_bank(8, 9, 0x5eed);
    REQUIRE(bank.count == 8);
    for (int a = 0; a < 8; ++a) {
        double sum = 0.0;
        for (double w : bank.kernels[a].weights) sum += w;
        CHECK(std::abs(sum) < 1e-9);
        for (int b = 0; b <= a; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < bank.kernels[a].weights.size(); ++i)
                dot += bank.kernels[a].weights[i] * bank.kernels[b].weights[i];
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
        }
    }

    const auto path = temp_file("seeded.bsif");
    save_filter_bank(bank, path);
    const FilterBank back = load_filter_bank(path);
    for (int k = 0; k < 8; ++k)
        for (std::size_t i = 0; i < bank.kernels[k].weights.size(); ++i)
            CHECK(back.kernels[k].weights[i] ==
                  doctest::Approx(bank.kernels[k].weights[i]).epsilon(1e-12));

    // Same seed, same bank.
    const FilterBank again = make_random_bank(8, 9, 0x5eed);
    CHECK(again.kernels[3].weights == bank.kernels[3].weights);
}

TEST_CASE("encode: constant texture gives all-zero planes") {
    NormalizedIris n;
    n.rows = 16;
    n.cols = 64;
    n.pixels.assign(16 * 64, 100.0f);
    n.mask.assign(16 * 64, 1);
    // Integer kernels sum to zero exactly, so the response is exactly 0 and
    // 0 is not > 0.
    FilterBank bank;
    bank.count = 2;
    bank.side = 3;
    bank.kernels.push_back(Kernel{3, {0, 1, 0, 1, -4, 1, 0, 1, 0}});
    bank.kernels.push_back(Kernel{3, {-1, 0, 1, -2, 0, 2, -1, 0, 1}});
    const IrisTemplate t = encode(n, bank);
    for (const auto& plane : t.planes)
        for (std::uint8_t b : plane) CHECK(b == 0);
}

TEST_CASE("encode: negating texture about its mean flips bits with nonzero response") {
    Rng rng(21);
    NormalizedIris n = random_norm(16, 64, rng);
    NormalizedIris neg = n;
    for (auto& p : neg.pixels) p = 255.0f - p;
    const FilterBank bank = make_random_bank(1, 3, 33);
    const IrisTemplate ta = encode(n, bank);
    const IrisTemplate tb = encode(neg, bank);
    // Zero responses are measure-zero for random float textures, so the
    // planes must be exact complements.
    for (std::size_t p = 0; p < ta.planes[0].size(); ++p)
        CHECK((ta.planes[0][p] ^ tb.planes[0][p]) == 1);
}

TEST_CASE("encode matches the nested-loop sign oracle") {
    Rng rng(321);
    const NormalizedIris n = random_norm(16, 32, rng);
    FilterBank bank;
    bank.count = 1;
    bank.side = 3;
    Kernel k{3, {}};
    k.weights.resize(9);
    double mean = 0.0;
    for (double& w : k.weights) {
        w = rng.uniform(-1.0, 1.0);
        mean += w;
    }
    for (double& w : k.weights) w -= mean / 9.0;
    bank.kernels.push_back(k);

    const IrisTemplate t = encode(n, bank);
    // Independent correlation: columns wrap, rows replicate.
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 32; ++j) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int si = std::clamp(i + dy, 0, 15);
                    const int sj = ((j + dx) % 32 + 32) % 32;
                    acc += bank.kernels[0].at(dx + 1, dy + 1) * n.pixels[si * 32 + sj];
                }
            CHECK(t.planes[0][i * 32 + j] == (acc > 0.0 ? 1 : 0));
        }
}

TEST_CASE("encode erodes the mask radially by ceil(s/2)") {
    Rng rng(5);
    NormalizedIris n = random_norm(16, 128, rng);
    n.mask[5 * 128 + 40] = 0; // one hole
    const FilterBank bank = make_random_bank(1, 5, 2);
    const IrisTemplate t = encode(n, bank);
    const int erode = 3; // ceil(5/2)
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 128; ++j) {
            bool expect = i - erode >= 0 && i + erode < 16;
            if (expect)
                for (int di = -erode; di <= erode; ++di)
                    if (!n.mask[(i + di) * 128 + j]) expect = false;
            CHECK(t.mask[i * 128 + j] == (expect ? 1 : 0));
        }
}

TEST_CASE("encode rejects low coverage") {
    Rng rng(6);
    NormalizedIris n = random_norm(16, 64, rng);
    n.mask.assign(n.mask.size(), 0);
    const FilterBank bank = make_random_bank(1, 3, 2);
    CHECK(code_of([&] { encode(n, bank); }) == ErrorCode::EmptyMask);
}

TEST_CASE("match identities") {
    Rng rng(77);
    const IrisTemplate t = random_template(4, 32, 64, rng);

    const MatchScore self = match(t, t, 16);
    CHECK(self.score == 0.0);
    CHECK(self.best_shift == 0);

    const MatchScore comp = match(t, complement(t), 0);
    CHECK(comp.score == 1.0);
}

TEST_CASE("match recovers a circular shift") {
    Rng rng(88);
    const IrisTemplate a = random_template(4, 32, 64, rng);
    const IrisTemplate b = shift_template(a, +5);
    const MatchScore s = match(a, b, 16);
    CHECK(s.score == 0.0);
    CHECK(s.best_shift == -5);
}

TEST_CASE("match averages per-plane fractional distances") {
    Rng rng(99);
    IrisTemplate a = random_template(2, 32, 64, rng);
    IrisTemplate b = a;
    const std::size_t total = 32 * 64;
    for (std::size_t p = 0; p < total / 4; ++p) b.planes[0][p] ^= 1;     // HD 0.25
    for (std::size_t p = 0; p < 3 * total / 4; ++p) b.planes[1][p] ^= 1; // HD 0.75
    const MatchScore s = match(a, b, 0);
    CHECK(s.score == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("match agrees with the brute-force oracle on random pairs") {
    Rng rng(1001);
    for (int trial = 0; trial < 10; ++trial) {
        const IrisTemplate a = random_template(3, 24, 64, rng, false);
        const IrisTemplate b = random_template(3, 24, 64, rng, false);
        const OracleResult expect = oracle_match(a, b, 8);
        REQUIRE(expect.found);
        const MatchScore got = match(a, b, 8);
        CHECK(got.score == expect.score);
        CHECK(got.best_shift == expect.shift);
    }
}

TEST_CASE("match errors") {
    Rng rng(2002);
    const IrisTemplate a = random_template(2, 32, 64, rng);
    IrisTemplate wrong = random_template(2, 32, 32, rng);
    CHECK(code_of([&] { match(a, wrong, 4); }) == ErrorCode::ShapeMismatch);

    IrisTemplate sparse_a = a;
    sparse_a.mask.assign(sparse_a.mask.size(), 0);
    for (std::size_t p = 0; p < 100; ++p) sparse_a.mask[p] = 1;
    CHECK(code_of([&] { match(sparse_a, a, 4); }) == ErrorCode::InsufficientOverlap);

    CHECK(code_of([&] { match(a, a, -1); }) == ErrorCode::SearchRangeInvalid);
}

TEST_CASE("match symmetry and masked-bit independence") {
    Rng rng(3003);
    for (int trial = 0; trial < 8; ++trial) {
        const IrisTemplate a = random_template(2, 32, 64, rng, false);
        IrisTemplate b = random_template(2, 32, 64, rng, false);
        CHECK(match(a, b, 7).score == match(b, a, 7).score);

        const MatchScore base = match(a, b, 0);
        CHECK(base.score >= 0.0);
        CHECK(base.score <= 1.0);

        // Flip bits only where the joint delta=0 mask is 0.
        IrisTemplate flipped = b;
        int flips = 0;
        for (std::size_t p = 0; p < b.mask.size() && flips < 50; ++p)
            if (!(a.mask[p] & b.mask[p])) {
                flipped.planes[rng.uniform_int(0, 1)][p] ^= 1;
                ++flips;
            }
        CHECK(match(a, flipped, 0).score == base.score);
    }
}

TEST_CASE("template file roundtrip and rejection") {
    Rng rng(4004);
    const IrisTemplate t = random_template(3, 8, 160, rng, false);
    const auto path = temp_file("tpl.itpl");
    save_template(t, path);
    const IrisTemplate back = load_template(path);
    CHECK(back.planes_n == t.planes_n);
    CHECK(back.rows == t.rows);
    CHECK(back.cols == t.cols);
    CHECK(back.planes == t.planes);
    CHECK(back.mask == t.mask);

    {
        std::ofstream out(path);
        out << "ITPL 2 1 1 4\n0101\n0101\n";
    }
    CHECK(code_of([&] { load_template(path); }) == ErrorCode::MalformedTemplateFile);

    {
        std::ofstream out(path);
        out << "ITPL 1 1 2 4\n0101\n010\n0101\n0101\n";
    }
    CHECK(code_of([&] { load_template(path); }) == ErrorCode::MalformedTemplateFile);
}
