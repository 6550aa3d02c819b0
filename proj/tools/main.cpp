// irispad: iris recognition + presentation attack detection pipeline CLI.
//
// Exit codes: 0/1 carry the decision for verify/pad*/full (0 = match/live,
// 1 = non-match/attack); >= 2 signals an error, with the failing stage named
// on standard error.

#include "iris/encoding.hpp"
#include "iris/errors.hpp"
#include "iris/fusion.hpp"
#include "iris/metrics.hpp"
#include "iris/normalization.hpp"
#include "iris/pad2d.hpp"
#include "iris/pad3d.hpp"
#include "iris/parallel.hpp"
#include "iris/pipeline.hpp"
#include "iris/segmentation.hpp"
#include "iris/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace iris;

struct ConfigFlags {
    std::optional<std::string> config_path;
    std::optional<std::string> bank;
    std::optional<std::string> model;
    std::optional<std::string> banks; // comma-separated PAD banks
    std::optional<int> rows, cols, max_shift, roi, workers;
    std::optional<double> threshold, tau3, theta;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value pipeline config file");
        cmd->add_option("--bank", bank, "recognition BSIF bank (.bsif)");
        cmd->add_option("--model", model, "PAD ensemble model file");
        cmd->add_option("--banks", banks, "comma-separated PAD BSIF banks");
        cmd->add_option("--rows", rows, "normalized raster rows");
        cmd->add_option("--cols", cols, "normalized raster columns");
        cmd->add_option("--max-shift", max_shift, "match rotation search, columns");
        cmd->add_option("--roi", roi, "PAD center crop side, px");
        cmd->add_option("--workers", workers, "worker thread count");
        cmd->add_option("--threshold", threshold, "match decision threshold");
        cmd->add_option("--tau3", tau3, "OSPAD-3D attack threshold");
        cmd->add_option("--theta", theta, "LED half-angle, degrees");
    }

    PipelineConfig build() const {
        PipelineConfig cfg;
        if (config_path) cfg = load_config(*config_path);
        if (bank) cfg.bank_path = *bank;
        if (model) cfg.model_path = *model;
        if (banks) {
            cfg.pad_bank_paths.clear();
            std::string item;
            std::istringstream in(*banks);
            while (std::getline(in, item, ','))
                if (!item.empty()) cfg.pad_bank_paths.push_back(item);
        }
        if (rows) cfg.norm_rows = *rows;
        if (cols) cfg.norm_cols = *cols;
        if (max_shift) cfg.max_shift = *max_shift;
        if (roi) cfg.roi = *roi;
        if (workers) cfg.workers = *workers;
        if (threshold) cfg.match_threshold = *threshold;
        if (tau3) cfg.tau3 = *tau3;
        if (theta) cfg.theta_deg = *theta;
        run_stage("config", [&] { validate_config(cfg); return 0; });
        return cfg;
    }
};

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<FilterBank> load_banks_or_fail(const PipelineConfig& cfg) {
    return run_stage("pad2d", [&] {
        if (cfg.pad_bank_paths.empty())
            fail(ErrorCode::MissingFilterBank, "no PAD banks configured (--banks)");
        std::vector<FilterBank> banks;
        for (const std::string& p : cfg.pad_bank_paths) banks.push_back(load_filter_bank(p));
        return banks;
    });
}

int cmd_synth(const std::string& out_dir, int identities, int captures, const std::string& lens,
              bool pairs, std::uint64_t seed, bool glints, int workers) {
    LensKind lens_kind = LensKind::none;
    if (lens == "textured") lens_kind = LensKind::textured;
    else if (lens == "opaque") lens_kind = LensKind::opaque;
    else if (!lens.empty() && lens != "none")
        fail(ErrorCode::InvalidSpec, "lens must be textured|opaque");

    std::filesystem::create_directories(out_dir);
    struct Item {
        std::string base;
        std::uint64_t identity;
        std::string surface;
    };
    std::vector<Item> items(static_cast<std::size_t>(identities) * captures);

    parallel_for(items.size(), workers, [&](std::size_t idx) {
        const std::uint64_t id = idx / captures;
        const std::uint64_t cap = idx % captures;
        SynthSpec spec = identity_capture_spec(id, cap, seed);
        spec.lens = lens_kind;
        spec.glints = glints;
        char name[64];
        if (pairs) {
            // Textured lenses ride on an irregular surface; opaque ones stay flat.
            spec.surface.kind =
                lens_kind == LensKind::textured ? SurfaceKind::bumpy : SurfaceKind::dome;
            std::snprintf(name, sizeof name, "id%04llu_p%llu",
                          static_cast<unsigned long long>(id),
                          static_cast<unsigned long long>(cap));
            const std::string base = (std::filesystem::path(out_dir) / name).string();
            const RenderedPair pair = render_pair(spec);
            write_pgm(pair.left, base + "_L.pgm");
            write_pgm(pair.right, base + "_R.pgm");
            write_mask_pgm(pair.mask, base + "_mask.pgm");
            write_circles(spec.pupil, spec.iris, base + "_circles.txt");
            items[idx] = Item{base, id, to_string(spec.surface.kind)};
        } else {
            std::snprintf(name, sizeof name, "id%04llu_c%llu",
                          static_cast<unsigned long long>(id),
                          static_cast<unsigned long long>(cap));
            const std::string base = (std::filesystem::path(out_dir) / name).string();
            const RenderedEye eye = render_eye(spec);
            IrisImage img =
                lens_kind == LensKind::none ? eye.image : apply_lens(eye.image, spec);
            write_pgm(img, base + ".pgm");
            write_mask_pgm(eye.truth.mask, base + "_mask.pgm");
            write_circles(eye.truth.pupil, eye.truth.iris, base + "_circles.txt");
            items[idx] = Item{base + ".pgm", id, to_string(spec.surface.kind)};
        }
    });

    std::ofstream manifest(std::filesystem::path(out_dir) / "manifest.csv");
    if (!manifest) fail(ErrorCode::IoFailure, "cannot write manifest");
    for (const Item& item : items)
        manifest << item.base << "," << item.identity << ","
                 << to_string(lens_kind) << "," << item.surface << "\n";
    std::cout << items.size() << (pairs ? " pairs" : " captures") << " written to " << out_dir
              << "\n";
    return 0;
}

int cmd_eval(const std::optional<std::string>& scores, const std::string& orientation,
             const std::optional<std::string>& decisions, const std::optional<std::string>& roc_out) {
    if (orientation != "distance" && orientation != "attack")
        fail(ErrorCode::InvalidConfig, "--orientation must be distance or attack");
    if (!scores && !decisions)
        fail(ErrorCode::InvalidConfig, "need --scores and/or --decisions");

    if (orientation == "distance") {
        if (decisions)
            fail(ErrorCode::InvalidConfig, "--decisions applies to the attack orientation");
        const ScoreSet s = run_stage("evalmetrics", [&] { return read_score_csv(*scores); });
        std::cout << run_stage("evalmetrics", [&] { return format_recognition_table(s); });
        if (roc_out) run_stage("evalmetrics", [&] { write_roc_csv(s, *roc_out); return 0; });
        return 0;
    }

    if (roc_out) fail(ErrorCode::InvalidConfig, "--roc applies to the distance orientation");
    if (scores) {
        const PadLabels p = run_stage("evalmetrics", [&] { return read_pad_score_csv(*scores); });
        const double d = run_stage("evalmetrics", [&] {
            return dprime(p.bona_fide_scores, p.attack_scores);
        });
        std::cout << "d' (bonafide vs attack): " << fmt6(d) << "\n";
    }
    if (decisions) {
        const PadLabels p =
            run_stage("evalmetrics", [&] { return read_pad_decision_csv(*decisions); });
        const PadRates r = run_stage("evalmetrics", [&] { return pad_rates(p); });
        std::cout << format_pad_table(r);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"irispad: iris recognition with presentation attack detection"};
    app.require_subcommand(1);
    int exit_code = 0;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_out, synth_lens = "none";
    int synth_ids = 10, synth_caps = 2, synth_workers = 1;
    std::uint64_t synth_seed = 0;
    bool synth_pairs = false, synth_glints = false;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--identities", synth_ids, "identity count");
    synth->add_option("--captures", synth_caps, "captures per identity");
    synth->add_option("--lens", synth_lens, "textured|opaque lens overlay");
    synth->add_option("--seed", synth_seed, "corpus seed");
    synth->add_option("--workers", synth_workers, "parallel render workers");
    synth->add_flag("--pairs", synth_pairs, "emit two-illumination pairs");
    synth->add_flag("--glints", synth_glints, "stamp specular glints");
    synth->callback([&] {
        exit_code = cmd_synth(synth_out, synth_ids, synth_caps, synth_lens, synth_pairs,
                              synth_seed, synth_glints, synth_workers);
    });

    // segment
    auto* segment = app.add_subcommand("segment", "locate pupil/iris circles and mask");
    std::string seg_img;
    std::optional<std::string> seg_mask_out, seg_circles_out;
    segment->add_option("image", seg_img, "input PGM")->required();
    segment->add_option("--mask-out", seg_mask_out, "write the iris mask PGM here");
    segment->add_option("--circles-out", seg_circles_out, "write the circle sidecar here");
    segment->callback([&] {
        const IrisImage img = run_stage("imaging", [&] { return read_pgm(seg_img); });
        const SegmentationResult seg =
            run_stage("segmentation", [&] { return segment_circular(img); });
        if (seg_mask_out)
            run_stage("imaging", [&] { write_mask_pgm(seg.mask, *seg_mask_out); return 0; });
        if (seg_circles_out)
            run_stage("imaging",
                      [&] { write_circles(seg.pupil, seg.iris, *seg_circles_out); return 0; });
        std::printf("%.9g %.9g %.9g %.9g %.9g %.9g\n", seg.pupil.cx, seg.pupil.cy, seg.pupil.r,
                    seg.iris.cx, seg.iris.cy, seg.iris.r);
    });

    // normalize
    auto* norm_cmd = app.add_subcommand("normalize", "unwrap the iris to the polar raster");
    std::string norm_img, norm_out;
    ConfigFlags norm_flags;
    std::optional<std::string> norm_mask, norm_circles;
    norm_cmd->add_option("image", norm_img, "input PGM")->required();
    norm_cmd->add_option("--out", norm_out, "output basename")->required();
    norm_cmd->add_option("--mask", norm_mask, "external mask PGM");
    norm_cmd->add_option("--circles", norm_circles, "circle sidecar for the external mask");
    norm_flags.attach(norm_cmd);
    norm_cmd->callback([&] {
        const PipelineConfig cfg = norm_flags.build();
        const IrisImage img = run_stage("imaging", [&] { return read_pgm(norm_img); });
        const SegmentationResult seg =
            segment_probe(cfg, img, ProbeInput{norm_img, norm_mask, norm_circles});
        const NormalizedIris norm = run_stage("normalization", [&] {
            return normalize(img, seg, cfg.norm_rows, cfg.norm_cols);
        });
        run_stage("normalization", [&] { save_normalized(norm, norm_out); return 0; });
        std::cout << norm_out << "_norm.pgm " << norm_out << "_normmask.pgm\n";
    });

    // encode
    auto* encode_cmd = app.add_subcommand("encode", "build an iris template");
    std::string enc_img, enc_out;
    ConfigFlags enc_flags;
    std::optional<std::string> enc_mask, enc_circles;
    encode_cmd->add_option("image", enc_img, "input PGM")->required();
    encode_cmd->add_option("--out", enc_out, "output template (.itpl)")->required();
    encode_cmd->add_option("--mask", enc_mask, "external mask PGM");
    encode_cmd->add_option("--circles", enc_circles, "circle sidecar for the external mask");
    enc_flags.attach(encode_cmd);
    encode_cmd->callback([&] {
        const PipelineConfig cfg = enc_flags.build();
        const IrisTemplate tpl = encode_probe(cfg, ProbeInput{enc_img, enc_mask, enc_circles});
        run_stage("encoding", [&] { save_template(tpl, enc_out); return 0; });
        std::cout << enc_out << "\n";
    });

    // match
    auto* match_cmd = app.add_subcommand("match", "compare templates");
    std::string match_a, match_b;
    std::optional<std::string> match_manifest, match_out;
    ConfigFlags match_flags;
    match_cmd->add_option("probe", match_a, "probe template (.itpl)");
    match_cmd->add_option("gallery", match_b, "gallery template (.itpl)");
    match_cmd->add_option("--manifest", match_manifest, "batch file of 'probe,gallery' lines");
    match_cmd->add_option("--out", match_out, "write the batch CSV here instead of stdout");
    match_flags.attach(match_cmd);
    match_cmd->callback([&] {
        const PipelineConfig cfg = match_flags.build();
        if (match_manifest) {
            const std::string csv =
                run_stage("matching", [&] { return run_match_batch(cfg, *match_manifest); });
            if (match_out) {
                std::ofstream out(*match_out, std::ios::binary);
                if (!out) fail(ErrorCode::IoFailure, "cannot open " + *match_out);
                out << csv;
            } else {
                std::cout << csv;
            }
            return;
        }
        if (match_a.empty() || match_b.empty())
            fail(ErrorCode::InvalidConfig, "need two templates or --manifest");
        const IrisTemplate a = run_stage("encoding", [&] { return load_template(match_a); });
        const IrisTemplate b = run_stage("encoding", [&] { return load_template(match_b); });
        const MatchScore s = run_stage("matching", [&] { return match(a, b, cfg.max_shift); });
        std::cout << match_a << "," << match_b << "," << fmt6(s.score) << "," << s.best_shift
                  << "\n";
    });

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "verify a probe against a gallery template");
    std::string ver_probe, ver_gallery;
    ConfigFlags ver_flags;
    std::optional<std::string> ver_mask, ver_circles;
    verify_cmd->add_option("probe", ver_probe, "probe image (.pgm) or template (.itpl)")
        ->required();
    verify_cmd->add_option("gallery", ver_gallery, "gallery template (.itpl)")->required();
    verify_cmd->add_option("--mask", ver_mask, "external mask PGM");
    verify_cmd->add_option("--circles", ver_circles, "circle sidecar for the external mask");
    ver_flags.attach(verify_cmd);
    verify_cmd->callback([&] {
        const PipelineConfig cfg = ver_flags.build();
        const VerifyResult r =
            run_verify(cfg, ProbeInput{ver_probe, ver_mask, ver_circles}, ver_gallery);
        std::cout << ver_probe << "," << ver_gallery << "," << fmt6(r.score.score) << ","
                  << r.score.best_shift << "," << (r.is_match ? "match" : "nonmatch") << "\n";
        exit_code = r.is_match ? 0 : 1;
    });

    // pad3d
    auto* pad3d_cmd = app.add_subcommand("pad3d", "photometric-stereo attack detector");
    std::string p3_left, p3_right, p3_mask;
    ConfigFlags p3_flags;
    pad3d_cmd->add_option("left", p3_left, "left-illuminated PGM")->required();
    pad3d_cmd->add_option("right", p3_right, "right-illuminated PGM")->required();
    pad3d_cmd->add_option("--mask", p3_mask, "iris mask PGM")->required();
    p3_flags.attach(pad3d_cmd);
    pad3d_cmd->callback([&] {
        const PipelineConfig cfg = p3_flags.build();
        const IrisImage left = run_stage("imaging", [&] { return read_pgm(p3_left); });
        const IrisImage right = run_stage("imaging", [&] { return read_pgm(p3_right); });
        const BinaryMask mask = run_stage("imaging", [&] { return read_mask_pgm(p3_mask); });
        const PadOutcome out = run_stage("pad3d", [&] {
            return ospad3d_decide(left, right, mask,
                                  IlluminationGeometry::from_half_angle_deg(cfg.theta_deg),
                                  cfg.tau3);
        });
        std::cout << fmt6(out.score) << " " << to_string(out.decision) << "\n";
        exit_code = out.decision == PadDecision::attack ? 1 : 0;
    });

    // pad2d
    auto* pad2d_cmd = app.add_subcommand("pad2d", "texture-ensemble attack detector");
    std::string p2_img;
    bool p2_dump = false;
    ConfigFlags p2_flags;
    pad2d_cmd->add_option("image", p2_img, "input PGM")->required();
    pad2d_cmd->add_flag("--dump-features", p2_dump, "print the feature vector CSV and exit");
    p2_flags.attach(pad2d_cmd);
    pad2d_cmd->callback([&] {
        const PipelineConfig cfg = p2_flags.build();
        const IrisImage img = run_stage("imaging", [&] { return read_pgm(p2_img); });
        const std::vector<FilterBank> banks = load_banks_or_fail(cfg);
        if (p2_dump) {
            const FeatureVector fv =
                run_stage("pad2d", [&] { return extract_features(img, banks, cfg.roi); });
            for (std::size_t i = 0; i < fv.values.size(); ++i)
                std::printf("%s%.17g", i ? "," : "", fv.values[i]);
            std::printf("\n");
            return;
        }
        const Ensemble model = run_stage("pad2d", [&] {
            if (cfg.model_path.empty())
                fail(ErrorCode::InvalidConfig, "no ensemble model configured (--model)");
            return load_ensemble(cfg.model_path);
        });
        const Pad2dResult r =
            run_stage("pad2d", [&] { return ospad2d_decide(img, model, banks, cfg.roi); });
        std::cout << fmt6(r.outcome.score) << " " << to_string(r.outcome.decision) << "\n";
        exit_code = r.outcome.decision == PadDecision::attack ? 1 : 0;
    });

    // pad (fusion)
    auto* pad_cmd = app.add_subcommand("pad", "cascaded 3D+2D attack detector");
    std::string pf_left, pf_right, pf_mask;
    ConfigFlags pf_flags;
    pad_cmd->add_option("left", pf_left, "left-illuminated PGM")->required();
    pad_cmd->add_option("right", pf_right, "right-illuminated PGM")->required();
    pad_cmd->add_option("--mask", pf_mask, "iris mask PGM")->required();
    pf_flags.attach(pad_cmd);
    pad_cmd->callback([&] {
        const PipelineConfig cfg = pf_flags.build();
        const IrisImage left = run_stage("imaging", [&] { return read_pgm(pf_left); });
        const IrisImage right = run_stage("imaging", [&] { return read_pgm(pf_right); });
        const BinaryMask mask = run_stage("imaging", [&] { return read_mask_pgm(pf_mask); });
        const std::vector<FilterBank> banks = load_banks_or_fail(cfg);
        const Ensemble model = run_stage("pad2d", [&] {
            if (cfg.model_path.empty())
                fail(ErrorCode::InvalidConfig, "no ensemble model configured (--model)");
            return load_ensemble(cfg.model_path);
        });
        const FusionOutcome out = ospad_fusion_decide(
            left, right, mask, IlluminationGeometry::from_half_angle_deg(cfg.theta_deg),
            cfg.tau3, model, banks, cfg.roi);
        std::cout << (out.score3d ? fmt6(*out.score3d) : "nan") << " "
                  << (out.decision3d ? to_string(*out.decision3d) : "error") << " "
                  << (out.decision2d ? to_string(*out.decision2d) : "skipped") << " "
                  << to_string(out.outcome.decision) << "\n";
        exit_code = out.outcome.decision == PadDecision::attack ? 1 : 0;
    });

    // full
    auto* full_cmd = app.add_subcommand("full", "PAD cascade, then recognition when live");
    std::string fu_left, fu_right, fu_gallery;
    bool fu_force = false;
    ConfigFlags fu_flags;
    std::optional<std::string> fu_mask, fu_circles;
    full_cmd->add_option("left", fu_left, "left-illuminated PGM")->required();
    full_cmd->add_option("right", fu_right, "right-illuminated PGM")->required();
    full_cmd->add_option("--gallery", fu_gallery, "gallery template (.itpl)")->required();
    full_cmd->add_option("--mask", fu_mask, "external mask PGM");
    full_cmd->add_option("--circles", fu_circles, "circle sidecar for the external mask");
    full_cmd->add_flag("--force-match", fu_force, "run recognition even on an attack verdict");
    fu_flags.attach(full_cmd);
    full_cmd->callback([&] {
        const PipelineConfig cfg = fu_flags.build();
        const FullResult r =
            run_full(cfg, ProbeInput{fu_left, fu_mask, fu_circles}, fu_right, fu_gallery,
                     fu_force);
        std::cout << "pad " << (r.pad.score3d ? fmt6(*r.pad.score3d) : "nan") << " "
                  << (r.pad.decision3d ? to_string(*r.pad.decision3d) : "error") << " "
                  << (r.pad.decision2d ? to_string(*r.pad.decision2d) : "skipped") << " "
                  << to_string(r.pad.outcome.decision) << "\n";
        bool matched = false;
        if (r.score) {
            matched = r.score->score <= cfg.match_threshold;
            std::cout << "match " << fmt6(r.score->score) << " " << r.score->best_shift << " "
                      << (matched ? "match" : "nonmatch") << "\n";
        } else {
            std::cout << "match skipped\n";
        }
        exit_code =
            (r.pad.outcome.decision == PadDecision::live && matched) ? 0 : 1;
    });

    // train-pad2d
    auto* train_cmd = app.add_subcommand("train-pad2d", "train the PAD classifier ensemble");
    std::string tr_features, tr_out;
    std::uint64_t tr_seed = 0;
    train_cmd->add_option("features", tr_features, "features CSV (label,v1,...,vD)")->required();
    train_cmd->add_option("--out", tr_out, "output model file")->required();
    train_cmd->add_option("--seed", tr_seed, "training seed");
    train_cmd->callback([&] {
        const Dataset data =
            run_stage("pad2d", [&] { return load_features_csv(tr_features); });
        const Ensemble ens = run_stage("pad2d", [&] {
            return train_ensemble(data, EnsembleRecipe::default_recipe(), tr_seed);
        });
        run_stage("pad2d", [&] { save_ensemble(ens, tr_out); return 0; });
        std::cout << tr_out << "\n";
    });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "biometric evaluation metrics");
    std::optional<std::string> ev_scores, ev_decisions, ev_roc;
    std::string ev_orientation;
    eval_cmd->add_option("--scores", ev_scores, "scores CSV (label,score)");
    eval_cmd->add_option("--decisions", ev_decisions, "decisions CSV (label,decision)");
    eval_cmd
        ->add_option("--orientation", ev_orientation,
                     "distance (recognition, lower=match) or attack (PAD, higher=attack)")
        ->required();
    eval_cmd->add_option("--roc", ev_roc, "write the ROC sweep CSV here");
    eval_cmd->callback(
        [&] { exit_code = cmd_eval(ev_scores, ev_orientation, ev_decisions, ev_roc); });

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "per-stage timing over a pair manifest");
    std::string be_manifest;
    int be_reps = 1;
    bool be_io = false;
    ConfigFlags be_flags;
    bench_cmd->add_option("--manifest", be_manifest, "synth --pairs manifest CSV")->required();
    bench_cmd->add_option("--reps", be_reps, "repetitions over the manifest");
    bench_cmd->add_flag("--include-io", be_io, "include PGM reads in the timed regions");
    be_flags.attach(bench_cmd);
    bench_cmd->callback([&] {
        const PipelineConfig cfg = be_flags.build();
        const TimingReport report =
            run_stage("bench", [&] { return run_bench(cfg, be_manifest, be_reps, be_io); });
        std::cout << format_timing_report(report);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const StageFailure& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
