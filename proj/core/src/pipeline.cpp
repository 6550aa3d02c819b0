#include "iris/pipeline.hpp"

#include "iris/normalization.hpp"
#include "iris/parallel.hpp"
#include "iris/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

namespace iris {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string field;
    while (std::getline(in, field, sep)) out.push_back(field);
    return out;
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(ErrorCode::InvalidConfig, "bad number '" + v + "' for " + key);
    }
}

int parse_int(const std::string& v, const std::string& key) {
    const double d = parse_double(v, key);
    if (d != std::floor(d)) fail(ErrorCode::InvalidConfig, "expected integer for " + key);
    return static_cast<int>(d);
}

std::string resolve_path(const std::string& value, const std::filesystem::path& base) {
    std::filesystem::path p(value);
    if (p.is_absolute()) return p.string();
    return (base / p).lexically_normal().string();
}

} // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
    const std::filesystem::path base = path.parent_path();

    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::InvalidConfig,
                 "expected key=value on line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "norm_rows") cfg.norm_rows = parse_int(value, key);
        else if (key == "norm_cols") cfg.norm_cols = parse_int(value, key);
        else if (key == "bank") cfg.bank_path = resolve_path(value, base);
        else if (key == "max_shift") cfg.max_shift = parse_int(value, key);
        else if (key == "match_threshold") cfg.match_threshold = parse_double(value, key);
        else if (key == "pad_banks") {
            cfg.pad_bank_paths.clear();
            for (const std::string& p : split(value, ','))
                if (!trim(p).empty()) cfg.pad_bank_paths.push_back(resolve_path(trim(p), base));
        } else if (key == "roi") cfg.roi = parse_int(value, key);
        else if (key == "tau3") cfg.tau3 = parse_double(value, key);
        else if (key == "theta_deg") cfg.theta_deg = parse_double(value, key);
        else if (key == "model") cfg.model_path = resolve_path(value, base);
        else if (key == "workers") cfg.workers = parse_int(value, key);
        else fail(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.norm_rows < 2 || cfg.norm_cols < 2)
        fail(ErrorCode::InvalidConfig, "normalized raster too small");
    if (cfg.max_shift < 0) fail(ErrorCode::InvalidConfig, "max_shift < 0");
    if (cfg.workers < 1) fail(ErrorCode::InvalidConfig, "workers < 1");
    if (cfg.roi < 1) fail(ErrorCode::InvalidConfig, "roi < 1");
    auto must_exist = [](const std::string& p, const char* what) {
        if (!p.empty() && !std::filesystem::exists(p))
            fail(ErrorCode::InvalidConfig, std::string(what) + " not found: " + p);
    };
    must_exist(cfg.bank_path, "filter bank");
    must_exist(cfg.model_path, "ensemble model");
    for (const std::string& p : cfg.pad_bank_paths) must_exist(p, "PAD filter bank");
}

SegmentationResult segment_probe(const PipelineConfig& cfg, const IrisImage& img,
                                 const ProbeInput& probe) {
    return run_stage("segmentation", [&] {
        if (probe.mask_path) {
            if (!probe.circles_path)
                fail(ErrorCode::InvalidCircles, "external mask requires a circles sidecar");
            const auto [pupil, iris] = read_circles(*probe.circles_path);
            return ingest_mask(img, *probe.mask_path, pupil, iris);
        }
        return segment_circular(img, cfg.segmentation);
    });
}

IrisTemplate encode_probe(const PipelineConfig& cfg, const ProbeInput& probe) {
    const IrisImage img = run_stage("imaging", [&] { return read_pgm(probe.image_path); });
    const SegmentationResult seg = segment_probe(cfg, img, probe);
    const NormalizedIris norm = run_stage("normalization", [&] {
        return normalize(img, seg, cfg.norm_rows, cfg.norm_cols);
    });
    return run_stage("encoding", [&] {
        if (cfg.bank_path.empty())
            fail(ErrorCode::MissingFilterBank, "no recognition bank configured");
        return encode(norm, load_filter_bank(cfg.bank_path));
    });
}

VerifyResult run_verify(const PipelineConfig& cfg, const ProbeInput& probe,
                        const std::filesystem::path& gallery_template) {
    IrisTemplate probe_tpl;
    if (probe.image_path.size() > 5 &&
        probe.image_path.substr(probe.image_path.size() - 5) == ".itpl") {
        probe_tpl = run_stage("encoding", [&] { return load_template(probe.image_path); });
    } else {
        probe_tpl = encode_probe(cfg, probe);
    }
    const IrisTemplate gallery =
        run_stage("encoding", [&] { return load_template(gallery_template); });
    const MatchScore score =
        run_stage("matching", [&] { return match(probe_tpl, gallery, cfg.max_shift); });
    return VerifyResult{score, score.score <= cfg.match_threshold};
}

namespace {

std::vector<FilterBank> load_pad_banks(const PipelineConfig& cfg) {
    return run_stage("pad2d", [&] {
        if (cfg.pad_bank_paths.empty())
            fail(ErrorCode::MissingFilterBank, "no PAD banks configured");
        std::vector<FilterBank> banks;
        for (const std::string& p : cfg.pad_bank_paths) banks.push_back(load_filter_bank(p));
        return banks;
    });
}

Ensemble load_model(const PipelineConfig& cfg) {
    return run_stage("pad2d", [&] {
        if (cfg.model_path.empty()) fail(ErrorCode::InvalidConfig, "no ensemble model configured");
        return load_ensemble(cfg.model_path);
    });
}

} // namespace

FullResult run_full(const PipelineConfig& cfg, const ProbeInput& left,
                    const std::string& right_path,
                    const std::filesystem::path& gallery_template, bool force_match) {
    const IrisImage img_left = run_stage("imaging", [&] { return read_pgm(left.image_path); });
    const IrisImage img_right = run_stage("imaging", [&] { return read_pgm(right_path); });
    const SegmentationResult seg = segment_probe(cfg, img_left, left);

    const std::vector<FilterBank> banks = load_pad_banks(cfg);
    const Ensemble model = load_model(cfg);
    const IlluminationGeometry geom = IlluminationGeometry::from_half_angle_deg(cfg.theta_deg);

    FullResult result;
    result.pad = fuse_cascade(
        [&] { return ospad3d_decide(img_left, img_right, seg.mask, geom, cfg.tau3); },
        [&] {
            return run_stage("pad2d",
                             [&] { return ospad2d_decide(img_left, model, banks, cfg.roi); });
        });

    if (result.pad.outcome.decision == PadDecision::live || force_match) {
        const NormalizedIris norm = run_stage("normalization", [&] {
            return normalize(img_left, seg, cfg.norm_rows, cfg.norm_cols);
        });
        const IrisTemplate probe_tpl = run_stage("encoding", [&] {
            if (cfg.bank_path.empty())
                fail(ErrorCode::MissingFilterBank, "no recognition bank configured");
            return encode(norm, load_filter_bank(cfg.bank_path));
        });
        const IrisTemplate gallery =
            run_stage("encoding", [&] { return load_template(gallery_template); });
        result.score =
            run_stage("matching", [&] { return match(probe_tpl, gallery, cfg.max_shift); });
    }
    return result;
}

namespace {

struct BenchEntry {
    std::string base;
};

std::vector<BenchEntry> read_bench_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + manifest.string());
    std::vector<BenchEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        entries.push_back(BenchEntry{split(line, ',').front()});
    }
    if (entries.empty()) fail(ErrorCode::EmptyManifest, manifest.string());
    return entries;
}

StageStats make_stats(const std::string& name, const std::vector<double>& samples) {
    StageStats s;
    s.name = name;
    s.samples = static_cast<int>(samples.size());
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= samples.size();
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= samples.size();
    s.mean_s = mean;
    s.std_s = std::sqrt(var);
    return s;
}

} // namespace

TimingReport run_bench(const PipelineConfig& cfg, const std::filesystem::path& manifest,
                       int repetitions, bool include_io) {
    if (repetitions < 1) fail(ErrorCode::InvalidConfig, "repetitions < 1");
    const std::vector<BenchEntry> entries = read_bench_manifest(manifest);
    const std::vector<FilterBank> pad_banks = load_pad_banks(cfg);
    const Ensemble model = load_model(cfg);
    const FilterBank rec_bank = run_stage("encoding", [&] {
        if (cfg.bank_path.empty())
            fail(ErrorCode::MissingFilterBank, "no recognition bank configured");
        return load_filter_bank(cfg.bank_path);
    });
    const IlluminationGeometry geom = IlluminationGeometry::from_half_angle_deg(cfg.theta_deg);

    struct PairImages {
        IrisImage left, right;
        BinaryMask mask;
    };
    auto load_pair = [&](const BenchEntry& e) {
        PairImages p;
        p.left = read_pgm(e.base + "_L.pgm");
        p.right = read_pgm(e.base + "_R.pgm");
        p.mask = read_mask_pgm(e.base + "_mask.pgm");
        return p;
    };

    // Gallery template comes from the first pair, outside the timed loop.
    const PairImages first = load_pair(entries.front());
    const SegmentationResult gallery_seg = segment_circular(first.left, cfg.segmentation);
    const IrisTemplate gallery =
        encode(normalize(first.left, gallery_seg, cfg.norm_rows, cfg.norm_cols), rec_bank);

    std::vector<double> t_seg, t_3d, t_2d, t_rec;
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    for (int rep = 0; rep < repetitions; ++rep) {
        for (const BenchEntry& entry : entries) {
            PairImages imgs;
            if (!include_io) imgs = load_pair(entry);

            auto t0 = clock::now();
            if (include_io) imgs = load_pair(entry);
            const SegmentationResult seg = segment_circular(imgs.left, cfg.segmentation);
            auto t1 = clock::now();
            t_seg.push_back(seconds(t0, t1));

            t0 = clock::now();
            ospad3d_decide(imgs.left, imgs.right, seg.mask, geom, cfg.tau3);
            t1 = clock::now();
            t_3d.push_back(seconds(t0, t1));

            t0 = clock::now();
            ospad2d_decide(imgs.left, model, pad_banks, cfg.roi);
            t1 = clock::now();
            t_2d.push_back(seconds(t0, t1));

            // Normalization is counted inside the recognition stage.
            t0 = clock::now();
            const NormalizedIris norm = normalize(imgs.left, seg, cfg.norm_rows, cfg.norm_cols);
            const IrisTemplate tpl = encode(norm, rec_bank);
            match(tpl, gallery, cfg.max_shift);
            t1 = clock::now();
            t_rec.push_back(seconds(t0, t1));
        }
    }

    TimingReport report;
    report.pairs = static_cast<int>(entries.size());
    report.repetitions = repetitions;
    report.stages.push_back(make_stats("Segmentation", t_seg));
    report.stages.push_back(make_stats("OSPAD-3D", t_3d));
    report.stages.push_back(make_stats("OSPAD-2D", t_2d));
    report.stages.push_back(make_stats("Iris Recognition", t_rec));
    return report;
}

std::string format_timing_report(const TimingReport& report) {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof line, "%-18s %s\n", "Operation", "Time (s)");
    out += line;
    for (const StageStats& s : report.stages) {
        std::snprintf(line, sizeof line, "%-18s %.3f (\xc2\xb1 %.3f)\n", s.name.c_str(), s.mean_s,
                      s.std_s);
        out += line;
    }
    std::snprintf(line, sizeof line, "Pairs: %d, repetitions: %d, samples per stage: %d\n",
                  report.pairs, report.repetitions,
                  report.stages.empty() ? 0 : report.stages.front().samples);
    out += line;
    return out;
}

std::string run_match_batch(const PipelineConfig& cfg, const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + manifest.string());
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 2)
            fail(ErrorCode::IoFailure, "expected 'probe,gallery' in " + manifest.string());
        pairs.emplace_back(trim(fields[0]), trim(fields[1]));
    }
    if (pairs.empty()) fail(ErrorCode::EmptyManifest, manifest.string());

    // Load each distinct template once, sequentially.
    std::map<std::string, IrisTemplate> templates;
    for (const auto& [probe, gallery] : pairs) {
        if (!templates.count(probe)) templates.emplace(probe, load_template(probe));
        if (!templates.count(gallery)) templates.emplace(gallery, load_template(gallery));
    }

    std::vector<std::string> rows(pairs.size());
    std::exception_ptr first_error;
    std::mutex error_mutex;
    parallel_for(pairs.size(), cfg.workers, [&](std::size_t i) {
        try {
            const MatchScore s =
                match(templates.at(pairs[i].first), templates.at(pairs[i].second), cfg.max_shift);
            char buf[64];
            std::snprintf(buf, sizeof buf, ",%.6f,%d\n", s.score, s.best_shift);
            rows[i] = pairs[i].first + "," + pairs[i].second + buf;
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);

    std::string csv;
    for (const std::string& row : rows) csv += row;
    return csv;
}

namespace {

enum class CsvKind { rec_scores, pad_scores, pad_decisions };

void read_labeled_csv(const std::filesystem::path& path, CsvKind kind, ScoreSet* rec,
                      PadLabels* pad) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 2)
            fail(ErrorCode::IoFailure,
                 "expected 'label,value' on line " + std::to_string(lineno));
        const std::string label = trim(fields[0]);
        const std::string value = trim(fields[1]);
        switch (kind) {
            case CsvKind::rec_scores: {
                const double v = parse_double(value, "score");
                if (label == "genuine") rec->genuine.push_back(v);
                else if (label == "imposter") rec->imposter.push_back(v);
                else fail(ErrorCode::IoFailure, "unknown label '" + label +
                                                    "' (want genuine/imposter) on line " +
                                                    std::to_string(lineno));
                break;
            }
            case CsvKind::pad_scores: {
                const double v = parse_double(value, "score");
                if (label == "bonafide") pad->bona_fide_scores.push_back(v);
                else if (label == "attack") pad->attack_scores.push_back(v);
                else fail(ErrorCode::IoFailure, "unknown label '" + label +
                                                    "' (want bonafide/attack) on line " +
                                                    std::to_string(lineno));
                break;
            }
            case CsvKind::pad_decisions: {
                PadDecision d;
                if (value == "live") d = PadDecision::live;
                else if (value == "attack") d = PadDecision::attack;
                else fail(ErrorCode::IoFailure, "unknown decision '" + value + "' on line " +
                                                    std::to_string(lineno));
                if (label == "bonafide") pad->bona_fide_decisions.push_back(d);
                else if (label == "attack") pad->attack_decisions.push_back(d);
                else fail(ErrorCode::IoFailure, "unknown label '" + label +
                                                    "' (want bonafide/attack) on line " +
                                                    std::to_string(lineno));
                break;
            }
        }
    }
}

} // namespace

ScoreSet read_score_csv(const std::filesystem::path& path) {
    ScoreSet s;
    read_labeled_csv(path, CsvKind::rec_scores, &s, nullptr);
    return s;
}

PadLabels read_pad_score_csv(const std::filesystem::path& path) {
    PadLabels p;
    read_labeled_csv(path, CsvKind::pad_scores, nullptr, &p);
    return p;
}

PadLabels read_pad_decision_csv(const std::filesystem::path& path) {
    PadLabels p;
    read_labeled_csv(path, CsvKind::pad_decisions, nullptr, &p);
    return p;
}

std::string format_recognition_table(const ScoreSet& s) {
    const double d = dprime(s);
    const double e = eer(s) * 100.0;
    const double f1 = fnmr_at_fmr(s, 0.01) * 100.0;
    const double f01 = fnmr_at_fmr(s, 0.001) * 100.0;
    char buf[256];
    std::string out = "d'      EER (%)  FNMR(%)@FMR=1%  FNMR(%)@FMR=0.1%\n";
    std::snprintf(buf, sizeof buf, "%-7.2f %-8.2f %-15.2f %.2f\n", d, e, f1, f01);
    out += buf;
    return out;
}

std::string format_pad_table(const PadRates& r) {
    char buf[256];
    std::string out = "Accuracy (%)  APCER (%)  BPCER (%)\n";
    std::snprintf(buf, sizeof buf, "%-13.2f %-10.2f %.2f\n", r.accuracy * 100.0, r.apcer * 100.0,
                  r.bpcer * 100.0);
    out += buf;
    return out;
}

void write_roc_csv(const ScoreSet& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << "threshold,fmr,fnmr\n";
    char buf[128];
    for (const RocPoint& p : roc(s)) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", p.threshold, p.fmr, p.fnmr);
        out << buf;
    }
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path.string());
}

double calibrate_tau3(int pairs_per_class, std::uint64_t seed) {
    if (pairs_per_class < 2) fail(ErrorCode::InvalidSpec, "need >= 2 pairs per class");
    std::vector<double> live_scores, attack_scores;
    for (int i = 0; i < pairs_per_class; ++i) {
        SynthSpec live = identity_capture_spec(1000 + i, 0, seed);
        live.surface = SurfaceSpec{SurfaceKind::dome, 12.0, 0.0, 10.0};
        const RenderedPair lp = render_pair(live);
        live_scores.push_back(
            ospad3d_score(estimate_normals(lp.left, lp.right, lp.mask, live.geometry)));

        SynthSpec attack = identity_capture_spec(2000 + i, 0, seed + 1);
        attack.surface = SurfaceSpec{SurfaceKind::bumpy, 12.0, 1.2, 10.0};
        attack.lens = LensKind::textured;
        const RenderedPair ap = render_pair(attack);
        attack_scores.push_back(
            ospad3d_score(estimate_normals(ap.left, ap.right, ap.mask, attack.geometry)));
    }

    // Equal-error threshold: minimize |frac(live >= t) - frac(attack < t)|.
    std::vector<double> all = live_scores;
    all.insert(all.end(), attack_scores.begin(), attack_scores.end());
    std::sort(all.begin(), all.end());
    double best_gap = std::numeric_limits<double>::infinity();
    double best_t = all.front();
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        const double t = (all[i] + all[i + 1]) / 2.0;
        double bpcer = 0.0, apcer = 0.0;
        for (double v : live_scores) bpcer += v >= t ? 1.0 : 0.0;
        for (double v : attack_scores) apcer += v < t ? 1.0 : 0.0;
        bpcer /= live_scores.size();
        apcer /= attack_scores.size();
        const double gap = std::abs(bpcer - apcer);
        if (gap < best_gap) {
            best_gap = gap;
            best_t = t;
        }
    }
    return best_t;
}

} // namespace iris
