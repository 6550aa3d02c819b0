#include "iris/pad2d.hpp"

#include "iris/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace iris {

FeatureVector extract_features(const IrisImage& img, std::span<const FilterBank> banks, int roi) {
    if (banks.empty()) fail(ErrorCode::MissingFilterBank, "no filter banks configured");
    if (roi < 1 || roi > std::min(img.width, img.height))
        fail(ErrorCode::CropTooLarge, "roi " + std::to_string(roi));
    for (const FilterBank& b : banks)
        if (b.count > 16)
            fail(ErrorCode::InvalidSpec, "more than 16 filters per scale overflows the histogram");

    const IrisImage crop = center_crop(img, roi, roi);
    const std::size_t n_pixels = crop.pixels.size();

    FeatureVector fv;
    std::vector<std::uint32_t> codes(n_pixels);
    for (const FilterBank& bank : banks) {
        std::fill(codes.begin(), codes.end(), 0u);
        for (int k = 0; k < bank.count; ++k) {
            const std::vector<double> resp = convolve_zero_mean(crop, bank.kernels[k]);
            for (std::size_t p = 0; p < n_pixels; ++p)
                if (resp[p] > 0.0) codes[p] |= 1u << k;
        }
        const int bins = 1 << bank.count;
        std::vector<double> hist(bins, 0.0);
        for (std::uint32_t c : codes) hist[c] += 1.0;
        for (double& h : hist) h /= static_cast<double>(n_pixels);
        fv.values.insert(fv.values.end(), hist.begin(), hist.end());
        fv.block_dims.push_back(bins);
    }
    return fv;
}

bool predict_attack(const Classifier& clf, std::span<const double> x) {
    if (const auto* svm = std::get_if<LinearSvm>(&clf.model)) {
        double margin = svm->bias;
        for (std::size_t i = 0; i < svm->weights.size(); ++i) margin += svm->weights[i] * x[i];
        return margin > 0.0;
    }
    if (const auto* mlp = std::get_if<Mlp>(&clf.model)) {
        double out = mlp->b2;
        for (int h = 0; h < mlp->hidden; ++h) {
            double a = mlp->b1[h];
            const double* row = &mlp->w1[static_cast<std::size_t>(h) * mlp->inputs];
            for (int i = 0; i < mlp->inputs; ++i) a += row[i] * x[i];
            if (a > 0.0) out += mlp->w2[h] * a;
        }
        // logistic(out) >= 0.5 <=> out >= 0
        return out >= 0.0;
    }
    const auto& forest = std::get<RandomForest>(clf.model);
    int attack = 0;
    for (const DecisionTree& tree : forest.trees) {
        int node = 0;
        while (tree.nodes[node].feature >= 0)
            node = x[tree.nodes[node].feature] <= tree.nodes[node].threshold
                       ? tree.nodes[node].left
                       : tree.nodes[node].right;
        attack += tree.nodes[node].label;
    }
    return 2 * attack > static_cast<int>(forest.trees.size());
}

VoteResult majority_early_stop(int count, const std::function<bool(int)>& attack_vote) {
    if (count < 3 || count % 2 == 0)
        fail(ErrorCode::InvalidSpec, "ensemble size must be odd and >= 3");
    VoteResult r;
    const int needed = count / 2 + 1;
    for (int i = 0; i < count; ++i) {
        if (attack_vote(i)) ++r.attack_votes;
        else ++r.live_votes;
        ++r.evaluated;
        if (r.attack_votes >= needed || r.live_votes >= needed) break;
    }
    r.decision = r.attack_votes > r.live_votes ? PadDecision::attack : PadDecision::live;
    return r;
}

Pad2dResult ospad2d_decide(const IrisImage& img, const Ensemble& ensemble,
                           std::span<const FilterBank> banks, int roi) {
    const FeatureVector fv = extract_features(img, banks, roi);
    for (const Classifier& m : ensemble.members) {
        std::size_t dim = 0;
        if (const auto* svm = std::get_if<LinearSvm>(&m.model)) dim = svm->weights.size();
        else if (const auto* mlp = std::get_if<Mlp>(&m.model)) dim = mlp->inputs;
        else dim = std::get<RandomForest>(m.model).inputs;
        if (dim != fv.values.size())
            fail(ErrorCode::ShapeMismatch, "model dim " + std::to_string(dim) +
                                               " vs feature dim " +
                                               std::to_string(fv.values.size()));
    }

    const VoteResult vote = majority_early_stop(
        static_cast<int>(ensemble.members.size()),
        [&](int i) { return predict_attack(ensemble.members[i], fv.values); });

    PadOutcome outcome;
    outcome.score = static_cast<double>(vote.attack_votes) / vote.evaluated;
    outcome.decision = vote.decision;
    outcome.source = PadSource::pad2d;
    outcome.threshold = 0.5;
    return Pad2dResult{outcome, vote.evaluated};
}

Dataset load_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
    Dataset data;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string label;
        if (!std::getline(ls, label, ','))
            fail(ErrorCode::IoFailure, "bad features line " + std::to_string(lineno));
        int y;
        if (label == "attack") y = 1;
        else if (label == "bonafide") y = 0;
        else fail(ErrorCode::IoFailure, "unknown label '" + label + "' on line " +
                                            std::to_string(lineno));
        std::vector<double> x;
        std::string field;
        while (std::getline(ls, field, ',')) x.push_back(std::stod(field));
        if (x.empty()) fail(ErrorCode::IoFailure, "no feature values on line " +
                                                      std::to_string(lineno));
        if (data.dim == 0) data.dim = static_cast<int>(x.size());
        else if (data.dim != static_cast<int>(x.size()))
            fail(ErrorCode::IoFailure, "inconsistent feature dim on line " +
                                           std::to_string(lineno));
        data.x.push_back(std::move(x));
        data.y.push_back(y);
    }
    return data;
}

void append_features_csv(const FeatureVector& fv, const std::string& label,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::app);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for appending");
    out << label;
    char buf[32];
    for (double v : fv.values) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
    }
    out << '\n';
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path.string());
}

} // namespace iris
