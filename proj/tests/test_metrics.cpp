#include "iris/metrics.hpp"

#include "iris/errors.hpp"
#include "iris/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

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

// Exhaustive threshold-sweep oracle over candidate thresholds: every
// distinct score plus below-min/above-max sentinels.
std::vector<double> oracle_thresholds(const ScoreSet& s) {
    std::vector<double> t = s.genuine;
    t.insert(t.end(), s.imposter.begin(), s.imposter.end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    t.insert(t.begin(), t.front() - 1.0);
    t.push_back(t.back() + 1.0);
    return t;
}

double oracle_fmr(const ScoreSet& s, double t) {
    double n = 0;
    for (double v : s.imposter) n += v <= t ? 1 : 0;
    return n / s.imposter.size();
}

double oracle_fnmr(const ScoreSet& s, double t) {
    double n = 0;
    for (double v : s.genuine) n += v > t ? 1 : 0;
    return n / s.genuine.size();
}

double oracle_eer(const ScoreSet& s) {
    double best_gap = std::numeric_limits<double>::infinity();
    double value = 0.0;
    for (double t : oracle_thresholds(s)) {
        const double gap = std::abs(oracle_fmr(s, t) - oracle_fnmr(s, t));
        if (gap < best_gap) {
            best_gap = gap;
            value = (oracle_fmr(s, t) + oracle_fnmr(s, t)) / 2.0;
        }
    }
    return value;
}

double oracle_fnmr_at_fmr(const ScoreSet& s, double target) {
    double best = std::numeric_limits<double>::infinity();
    for (double t : oracle_thresholds(s))
        if (oracle_fmr(s, t) <= target) best = std::min(best, oracle_fnmr(s, t));
    return best;
}

ScoreSet random_set(Rng& rng, int max_per_class) {
    ScoreSet s;
    const int ng = rng.uniform_int(2, max_per_class);
    const int ni = rng.uniform_int(2, max_per_class);
    for (int i = 0; i < ng; ++i) s.genuine.push_back(rng.uniform(0.0, 0.6));
    for (int i = 0; i < ni; ++i) s.imposter.push_back(rng.uniform(0.3, 1.0));
    // Inject ties across classes now and then.
    if (ng > 2 && ni > 2 && rng.uniform_int(0, 1)) s.imposter[0] = s.genuine[0];
    return s;
}

} // namespace

TEST_CASE("dprime basics") {
    const std::vector<double> a = {-1.0, 1.0};       // mean 0, var 1
    const std::vector<double> b = {0.0, 2.0};        // mean 1, var 1
    CHECK(dprime(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dprime(a, a) == 0.0);

    // Point masses: +inf when means differ, error when equal.
    const std::vector<double> p1 = {0.5, 0.5};
    const std::vector<double> p2 = {0.7, 0.7};
    CHECK(std::isinf(dprime(p1, p2)));
    CHECK(code_of([&] { dprime(p1, p1); }) == ErrorCode::DegenerateDistributions);

    const std::vector<double> single = {1.0};
    CHECK(code_of([&] { dprime(single, a); }) == ErrorCode::EmptyClass);
}

TEST_CASE("dprime matches the closed form on sampled gaussians") {
    Rng rng(2035);
    ScoreSet s;
    for (int i = 0; i < 10000; ++i) {
        s.genuine.push_back(0.2 + 0.05 * rng.normal());
        s.imposter.push_back(0.47 + 0.02 * rng.normal());
    }
    const double expected = std::abs(0.2 - 0.47) / std::sqrt((0.0025 + 0.0004) / 2.0);
    CHECK(dprime(s) == doctest::Approx(expected).epsilon(0.05 / expected));
}

TEST_CASE("dprime is invariant to affine rescaling") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const ScoreSet s = random_set(rng, 40);
        const double base = dprime(s);
        const double a = rng.uniform(0.1, 5.0);
        const double b = rng.uniform(-3.0, 3.0);
        ScoreSet scaled = s;
        for (double& v : scaled.genuine) v = a * v + b;
        for (double& v : scaled.imposter) v = a * v + b;
        CHECK(dprime(scaled) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("roc endpoints, identity case, and monotonicity") {
    ScoreSet separated;
    separated.genuine = {0.1, 0.2};
    separated.imposter = {0.7, 0.8, 0.9};
    bool perfect = false;
    for (const RocPoint& p : roc(separated))
        if (p.fmr == 0.0 && p.fnmr == 0.0) perfect = true;
    CHECK(perfect);

    ScoreSet same;
    same.genuine = {0.1, 0.5, 0.9};
    same.imposter = {0.1, 0.5, 0.9};
    for (const RocPoint& p : roc(same)) CHECK(p.fmr == doctest::Approx(1.0 - p.fnmr));

    Rng rng(31);
    const ScoreSet s = random_set(rng, 30);
    const std::vector<RocPoint> points = roc(s);
    for (std::size_t i = 1; i < points.size(); ++i) {
        CHECK(points[i].threshold > points[i - 1].threshold);
        CHECK(points[i].fmr >= points[i - 1].fmr);   // loosening the threshold
        CHECK(points[i].fnmr <= points[i - 1].fnmr);
    }
}

TEST_CASE("roc equals the exhaustive sweep on a handcrafted set") {
    ScoreSet s;
    s.genuine = {0.10, 0.25, 0.40};
    s.imposter = {0.30, 0.55, 0.90};
    const std::vector<RocPoint> points = roc(s);
    const std::vector<double> thresholds = oracle_thresholds(s);
    REQUIRE(points.size() == thresholds.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(points[i].threshold == thresholds[i]);
        CHECK(points[i].fmr == oracle_fmr(s, thresholds[i]));
        CHECK(points[i].fnmr == oracle_fnmr(s, thresholds[i]));
    }
}

TEST_CASE("eer conventions") {
    ScoreSet separated;
    separated.genuine = {0.1, 0.2};
    separated.imposter = {0.7, 0.8};
    CHECK(eer(separated) == 0.0);

    ScoreSet same;
    same.genuine = {0.4, 0.4};
    same.imposter = {0.4, 0.4};
    CHECK(eer(same) == doctest::Approx(0.5));

    ScoreSet hand;
    hand.genuine = {0.05, 0.15, 0.22, 0.31, 0.42};
    hand.imposter = {0.18, 0.28, 0.46, 0.55, 0.70};
    CHECK(eer(hand) == doctest::Approx(oracle_eer(hand)).epsilon(1e-12));
}

TEST_CASE("metrics match the exhaustive oracles on randomized small sets") {
    Rng rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        const ScoreSet s = random_set(rng, 50);
        CHECK(eer(s) == doctest::Approx(oracle_eer(s)).epsilon(1e-12));
        for (double target : {0.01, 0.1, 0.25})
            CHECK(fnmr_at_fmr(s, target) ==
                  doctest::Approx(oracle_fnmr_at_fmr(s, target)).epsilon(1e-12));
    }
}

TEST_CASE("fnmr_at_fmr endpoints") {
    ScoreSet separated;
    separated.genuine = {0.1, 0.2};
    separated.imposter = {0.7, 0.8};
    CHECK(fnmr_at_fmr(separated, 0.01) == 0.0);

    ScoreSet identical;
    identical.genuine = {0.5, 0.5};
    identical.imposter = {0.5, 0.5};
    // Only the reject-all sentinel keeps FMR at or below 1%.
    CHECK(fnmr_at_fmr(identical, 0.01) == 1.0);

    CHECK(code_of([&] { fnmr_at_fmr(separated, 0.0); }) ==
          ErrorCode::UnreachableOperatingPoint);
    CHECK(code_of([&] { fnmr_at_fmr(separated, 1.0); }) ==
          ErrorCode::UnreachableOperatingPoint);
}

TEST_CASE("pad_rates arithmetic") {
    PadLabels all_good;
    all_good.bona_fide_decisions.assign(10, PadDecision::live);
    all_good.attack_decisions.assign(10, PadDecision::attack);
    const PadRates good = pad_rates(all_good);
    CHECK(good.accuracy == 1.0);
    CHECK(good.apcer == 0.0);
    CHECK(good.bpcer == 0.0);

    PadLabels half;
    half.bona_fide_decisions.assign(10, PadDecision::live);
    half.attack_decisions.assign(10, PadDecision::live); // every attack accepted
    const PadRates h = pad_rates(half);
    CHECK(h.accuracy == 0.5);
    CHECK(h.apcer == 1.0);
    CHECK(h.bpcer == 0.0);

    PadLabels empty;
    empty.bona_fide_decisions.assign(3, PadDecision::live);
    CHECK(code_of([&] { pad_rates(empty); }) == ErrorCode::EmptyClass);
}

TEST_CASE("the published fusion row arises from exact error counts") {
    // 2500 attacks with 159 accepted, 2500 bona fides with 103 rejected.
    PadLabels labels;
    labels.attack_decisions.assign(2500, PadDecision::attack);
    for (int i = 0; i < 159; ++i) labels.attack_decisions[i] = PadDecision::live;
    labels.bona_fide_decisions.assign(2500, PadDecision::live);
    for (int i = 0; i < 103; ++i) labels.bona_fide_decisions[i] = PadDecision::attack;

    const PadRates r = pad_rates(labels);
    CHECK(r.accuracy * 100.0 == doctest::Approx(94.76).epsilon(1e-12));
    CHECK(r.apcer * 100.0 == doctest::Approx(6.36).epsilon(1e-12));
    CHECK(r.bpcer * 100.0 == doctest::Approx(4.12).epsilon(1e-12));

    // accuracy == 1 - (APCER*Na + BPCER*Nb) / (Na+Nb)
    CHECK(r.accuracy ==
          doctest::Approx(1.0 - (r.apcer * 2500 + r.bpcer * 2500) / 5000.0).epsilon(1e-15));
}
