#ifndef IRIS_PIPELINE_HPP
#define IRIS_PIPELINE_HPP

#include "iris/encoding.hpp"
#include "iris/errors.hpp"
#include "iris/fusion.hpp"
#include "iris/metrics.hpp"
#include "iris/pad2d.hpp"
#include "iris/segmentation.hpp"

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace iris {

// Default OSPAD-3D threshold: equal-error point of the score on the seeded
// synthetic calibration set, frozen from calibrate_tau3(100, 77).
inline constexpr double kDefaultTau3 = 8.29573905e-3;

struct PipelineConfig {
    int norm_rows = 64;
    int norm_cols = 512;
    std::string bank_path;
    int max_shift = 16;
    double match_threshold = 0.35;
    std::vector<std::string> pad_bank_paths;
    int roi = 300;
    double tau3 = kDefaultTau3;
    double theta_deg = 20.0;
    std::string model_path;
    int workers = 1;
    SegmentationConfig segmentation;
};

// Flat key=value file, '#' comments; relative paths resolve against the
// config file's directory; referenced files must exist.
PipelineConfig load_config(const std::filesystem::path& path);
void validate_config(const PipelineConfig& cfg);

// Pipeline errors carry the failing stage name for the CLI's stderr line.
class StageFailure : public std::exception {
public:
    StageFailure(std::string stage, Error error)
        : stage_(std::move(stage)), error_(std::move(error)),
          message_(stage_ + ": " + error_.what()) {}

    const std::string& stage() const { return stage_; }
    const Error& error() const { return error_; }
    const char* what() const noexcept override { return message_.c_str(); }

private:
    std::string stage_;
    Error error_;
    std::string message_;
};

template <typename F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw StageFailure(name, e);
    }
}

struct ProbeInput {
    std::string image_path;
    // Supplied together: an externally produced mask plus its circles.
    std::optional<std::string> mask_path;
    std::optional<std::string> circles_path;
};

SegmentationResult segment_probe(const PipelineConfig& cfg, const IrisImage& img,
                                 const ProbeInput& probe);
IrisTemplate encode_probe(const PipelineConfig& cfg, const ProbeInput& probe);

struct VerifyResult {
    MatchScore score;
    bool is_match = false;
};

// Probe may be an image (segmented, normalized, encoded) or a saved
// template (path ending in .itpl).
VerifyResult run_verify(const PipelineConfig& cfg, const ProbeInput& probe,
                        const std::filesystem::path& gallery_template);

struct FullResult {
    FusionOutcome pad;
    std::optional<MatchScore> score; // absent when PAD gated recognition off
};

// PAD cascade first; recognition runs only on a live verdict unless
// force_match is set.
FullResult run_full(const PipelineConfig& cfg, const ProbeInput& left,
                    const std::string& right_path,
                    const std::filesystem::path& gallery_template, bool force_match);

struct StageStats {
    std::string name;
    double mean_s = 0.0;
    double std_s = 0.0;
    int samples = 0;
};

struct TimingReport {
    std::vector<StageStats> stages;
    int pairs = 0;
    int repetitions = 0;
};

// Times the four stages per pair over the manifest (wall clock, monotonic);
// file I/O excluded unless include_io.
TimingReport run_bench(const PipelineConfig& cfg, const std::filesystem::path& manifest,
                       int repetitions, bool include_io);
std::string format_timing_report(const TimingReport& report);

// Manifest lines "probe.itpl,gallery.itpl" -> CSV "probe,gallery,score,shift"
// in manifest order, independent of the worker count.
std::string run_match_batch(const PipelineConfig& cfg, const std::filesystem::path& manifest);

// "label,score" with label in {genuine, imposter}.
ScoreSet read_score_csv(const std::filesystem::path& path);
// "label,score" with label in {bonafide, attack}.
PadLabels read_pad_score_csv(const std::filesystem::path& path);
// "label,decision" with label in {bonafide, attack}, decision {live, attack}.
PadLabels read_pad_decision_csv(const std::filesystem::path& path);

std::string format_recognition_table(const ScoreSet& s);
std::string format_pad_table(const PadRates& r);
void write_roc_csv(const ScoreSet& s, const std::filesystem::path& path);

// Equal-error threshold of the OSPAD-3D score over seeded synthetic
// flat-dome (live) vs bumpy (attack) pairs; kDefaultTau3 was frozen from
// calibrate_tau3(100, 77).
double calibrate_tau3(int pairs_per_class, std::uint64_t seed);

} // namespace iris

#endif
