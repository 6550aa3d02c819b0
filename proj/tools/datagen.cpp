// Regenerates the checked-in data/ artifacts: the seeded BSIF filter banks,
// the default PAD ensemble (trained on a synthetic corpus), and the default
// config. Everything is seeded, so reruns reproduce the same bytes.

#include "iris/encoding.hpp"
#include "iris/pad2d.hpp"
#include "iris/pipeline.hpp"
#include "iris/synth.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

using namespace iris;

namespace {

constexpr std::uint64_t kBankSeedBase = 0x1715;
constexpr std::uint64_t kCorpusSeed = 4242;

FilterBank bank_for_side(int side) {
    return make_random_bank(8, side, kBankSeedBase + static_cast<std::uint64_t>(side));
}

} // namespace

int main(int argc, char** argv) {
    const std::filesystem::path root = argc > 1 ? argv[1] : ".";
    const std::filesystem::path filters = root / "data" / "filters";
    const std::filesystem::path models = root / "data" / "models";
    const std::filesystem::path configs = root / "configs";
    std::filesystem::create_directories(filters);
    std::filesystem::create_directories(models);
    std::filesystem::create_directories(configs);

    std::vector<FilterBank> pad_banks;
    for (int side : {5, 9, 13, 17}) {
        const FilterBank bank = bank_for_side(side);
        char name[32];
        std::snprintf(name, sizeof name, "bsif_8x%d.bsif", side);
        save_filter_bank(bank, filters / name);
        pad_banks.push_back(bank);
        std::cout << "wrote " << (filters / name).string() << "\n";
    }

    // Training corpus: live eyes vs textured/opaque lens overlays.
    Dataset data;
    const int per_class = 48;
    for (int i = 0; i < per_class; ++i) {
        SynthSpec live = identity_capture_spec(5000 + i, 0, kCorpusSeed);
        const FeatureVector fv = extract_features(render_eye(live).image, pad_banks, 300);
        if (data.dim == 0) data.dim = static_cast<int>(fv.values.size());
        data.x.push_back(fv.values);
        data.y.push_back(0);

        SynthSpec attack = identity_capture_spec(6000 + i, 0, kCorpusSeed + 1);
        attack.lens = i % 2 == 0 ? LensKind::textured : LensKind::opaque;
        const IrisImage img = apply_lens(render_eye(attack).image, attack);
        data.x.push_back(extract_features(img, pad_banks, 300).values);
        data.y.push_back(1);
    }

    const Ensemble ens = train_ensemble(data, EnsembleRecipe::default_recipe(), kCorpusSeed);
    save_ensemble(ens, models / "default_ensemble.model");
    std::cout << "wrote " << (models / "default_ensemble.model").string() << "\n";

    int correct = 0;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        const VoteResult vote = majority_early_stop(
            static_cast<int>(ens.members.size()),
            [&](int m) { return predict_attack(ens.members[m], data.x[i]); });
        if ((vote.decision == PadDecision::attack) == (data.y[i] == 1)) ++correct;
    }
    std::cout << "training accuracy: " << correct << "/" << data.x.size() << "\n";

    {
        std::ofstream cfg(configs / "default.cfg");
        cfg << "# irispad pipeline defaults; paths are relative to this file\n"
            << "norm_rows = 64\n"
            << "norm_cols = 512\n"
            << "bank = ../data/filters/bsif_8x9.bsif\n"
            << "max_shift = 16\n"
            << "match_threshold = 0.35\n"
            << "pad_banks = ../data/filters/bsif_8x5.bsif, ../data/filters/bsif_8x9.bsif, "
               "../data/filters/bsif_8x13.bsif, ../data/filters/bsif_8x17.bsif\n"
            << "roi = 300\n"
            << "tau3 = " << kDefaultTau3 << "\n"
            << "theta_deg = 20\n"
            << "model = ../data/models/default_ensemble.model\n"
            << "workers = 1\n";
    }
    std::cout << "wrote " << (configs / "default.cfg").string() << "\n";
    return 0;
}
