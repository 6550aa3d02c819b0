#include "iris/metrics.hpp"

#include "iris/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iris {

namespace {

void mean_var(const std::vector<double>& v, double& mean, double& var) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
}

} // namespace

double dprime(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        fail(ErrorCode::EmptyClass, "dprime needs >= 2 scores per class");
    double mu1, var1, mu2, var2;
    mean_var(a, mu1, var1);
    mean_var(b, mu2, var2);
    const double pooled = (var1 + var2) / 2.0;
    if (pooled == 0.0) {
        if (mu1 == mu2) fail(ErrorCode::DegenerateDistributions, "identical point masses");
        return std::numeric_limits<double>::infinity();
    }
    return std::abs(mu1 - mu2) / std::sqrt(pooled);
}

double dprime(const ScoreSet& s) { return dprime(s.genuine, s.imposter); }

std::vector<RocPoint> roc(const ScoreSet& s) {
    if (s.genuine.empty() || s.imposter.empty())
        fail(ErrorCode::EmptyClass, "roc needs non-empty classes");

    std::vector<double> gen = s.genuine, imp = s.imposter;
    std::sort(gen.begin(), gen.end());
    std::sort(imp.begin(), imp.end());

    std::vector<double> thresholds;
    thresholds.reserve(gen.size() + imp.size() + 2);
    thresholds.insert(thresholds.end(), gen.begin(), gen.end());
    thresholds.insert(thresholds.end(), imp.begin(), imp.end());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    // Reject-all and accept-all sentinels.
    thresholds.insert(thresholds.begin(), thresholds.front() - 1.0);
    thresholds.push_back(thresholds.back() + 1.0);

    std::vector<RocPoint> points;
    points.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto imp_le =
            std::upper_bound(imp.begin(), imp.end(), t) - imp.begin();
        const auto gen_gt =
            gen.end() - std::upper_bound(gen.begin(), gen.end(), t);
        points.push_back(RocPoint{t, static_cast<double>(imp_le) / imp.size(),
                                  static_cast<double>(gen_gt) / gen.size()});
    }
    return points;
}

double eer(const ScoreSet& s) {
    const std::vector<RocPoint> points = roc(s);
    double best_gap = std::numeric_limits<double>::infinity();
    double value = 0.0;
    for (const RocPoint& p : points) {
        const double gap = std::abs(p.fmr - p.fnmr);
        if (gap < best_gap) {
            best_gap = gap;
            value = (p.fmr + p.fnmr) / 2.0;
        }
    }
    return value;
}

double fnmr_at_fmr(const ScoreSet& s, double target_fmr) {
    if (!(target_fmr > 0.0) || !(target_fmr < 1.0))
        fail(ErrorCode::UnreachableOperatingPoint,
             "target FMR must lie strictly inside (0, 1)");
    const std::vector<RocPoint> points = roc(s);
    double best = std::numeric_limits<double>::infinity();
    for (const RocPoint& p : points)
        if (p.fmr <= target_fmr) best = std::min(best, p.fnmr);
    if (!std::isfinite(best))
        fail(ErrorCode::UnreachableOperatingPoint, "no threshold reaches the target FMR");
    return best;
}

PadRates pad_rates(const PadLabels& p) {
    if (p.attack_decisions.empty() || p.bona_fide_decisions.empty())
        fail(ErrorCode::EmptyClass, "pad_rates needs decisions for both classes");
    std::size_t attacks_live = 0;
    for (PadDecision d : p.attack_decisions)
        if (d == PadDecision::live) ++attacks_live;
    std::size_t bona_attack = 0;
    for (PadDecision d : p.bona_fide_decisions)
        if (d == PadDecision::attack) ++bona_attack;

    const double n_a = static_cast<double>(p.attack_decisions.size());
    const double n_b = static_cast<double>(p.bona_fide_decisions.size());
    PadRates rates;
    rates.apcer = static_cast<double>(attacks_live) / n_a;
    rates.bpcer = static_cast<double>(bona_attack) / n_b;
    rates.accuracy = ((n_a - attacks_live) + (n_b - bona_attack)) / (n_a + n_b);
    return rates;
}

} // namespace iris
