#ifndef IRIS_METRICS_HPP
#define IRIS_METRICS_HPP

#include "iris/pad3d.hpp"

#include <vector>

namespace iris {

// Recognition comparison scores; lower = better match.
struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> imposter;
};

// PAD scores (higher = more attack-like) and, when rates are decision-based,
// per-item decisions.
struct PadLabels {
    std::vector<double> bona_fide_scores;
    std::vector<double> attack_scores;
    std::vector<PadDecision> bona_fide_decisions;
    std::vector<PadDecision> attack_decisions;
};

// Decidability d' = |mu1 - mu2| / sqrt((var1 + var2) / 2), population
// variances. Returns +inf when both variances vanish but the means differ.
double dprime(const std::vector<double>& a, const std::vector<double>& b);
double dprime(const ScoreSet& s);

struct RocPoint {
    double threshold = 0.0;
    double fmr = 0.0;  // imposter scores <= threshold
    double fnmr = 0.0; // genuine scores > threshold
};

// One point per distinct score plus reject-all / accept-all sentinels.
std::vector<RocPoint> roc(const ScoreSet& s);

// (FMR+FNMR)/2 at the sweep point minimizing |FMR - FNMR| (first such
// point in ascending threshold order).
double eer(const ScoreSet& s);

// Smallest FNMR among thresholds with FMR <= target_fmr.
double fnmr_at_fmr(const ScoreSet& s, double target_fmr);

struct PadRates {
    double accuracy = 0.0;
    double apcer = 0.0; // attacks called live
    double bpcer = 0.0; // bona fides called attack
};

PadRates pad_rates(const PadLabels& p);

} // namespace iris

#endif
