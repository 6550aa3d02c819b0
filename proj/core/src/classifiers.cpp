#include "iris/pad2d.hpp"

#include "iris/errors.hpp"
#include "iris/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace iris {

EnsembleRecipe EnsembleRecipe::default_recipe() {
    EnsembleRecipe recipe;
    recipe.members = {
        MemberSpec{ClassifierKind::linear_svm},
        MemberSpec{ClassifierKind::linear_svm},
        MemberSpec{ClassifierKind::mlp, 32},
        MemberSpec{ClassifierKind::random_forest, 0, 25, 8},
        MemberSpec{ClassifierKind::random_forest, 0, 25, 8},
    };
    return recipe;
}

namespace {

// y in {+1 attack, -1 live}; hinge loss with L2 regularization, per-sample
// subgradient steps over seeded shuffles, fixed epoch budget.
LinearSvm train_linear_svm(const Dataset& data, Rng& rng) {
    const int n = static_cast<int>(data.x.size());
    const int dim = data.dim;
    constexpr int kEpochs = 300;
    constexpr double kLambda = 1e-4;

    LinearSvm svm;
    svm.weights.assign(dim, 0.0);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < kEpochs; ++epoch) {
        rng.shuffle(order);
        const double eta = 0.5 / (1.0 + 0.05 * epoch);
        const double decay = 1.0 - eta * kLambda;
        for (int idx : order) {
            const std::vector<double>& x = data.x[idx];
            const double y = data.y[idx] ? 1.0 : -1.0;
            double margin = svm.bias;
            for (int i = 0; i < dim; ++i) margin += svm.weights[i] * x[i];
            for (double& w : svm.weights) w *= decay;
            if (y * margin < 1.0) {
                for (int i = 0; i < dim; ++i) svm.weights[i] += eta * y * x[i];
                svm.bias += eta * y;
            }
        }
    }
    return svm;
}

// Mini-batch gradient descent on the logistic loss, rectifier hidden layer.
Mlp train_mlp(const Dataset& data, int hidden, Rng& rng) {
    const int n = static_cast<int>(data.x.size());
    const int dim = data.dim;
    constexpr int kEpochs = 600;
    constexpr int kBatch = 32;
    constexpr double kLr = 0.3;

    Mlp mlp;
    mlp.inputs = dim;
    mlp.hidden = hidden;
    mlp.w1.resize(static_cast<std::size_t>(hidden) * dim);
    mlp.b1.assign(hidden, 0.0);
    mlp.w2.resize(hidden);
    const double s1 = std::sqrt(2.0 / dim);
    const double s2 = std::sqrt(1.0 / hidden);
    for (double& w : mlp.w1) w = rng.normal() * s1;
    for (double& w : mlp.w2) w = rng.normal() * s2;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> act(hidden);
    std::vector<double> g_w1(mlp.w1.size()), g_b1(hidden), g_w2(hidden);

    for (int epoch = 0; epoch < kEpochs; ++epoch) {
        rng.shuffle(order);
        for (int start = 0; start < n; start += kBatch) {
            const int end = std::min(n, start + kBatch);
            const double inv = 1.0 / (end - start);
            std::fill(g_w1.begin(), g_w1.end(), 0.0);
            std::fill(g_b1.begin(), g_b1.end(), 0.0);
            std::fill(g_w2.begin(), g_w2.end(), 0.0);
            double g_b2 = 0.0;
            for (int s = start; s < end; ++s) {
                const std::vector<double>& x = data.x[order[s]];
                const double y = data.y[order[s]] ? 1.0 : 0.0;
                double logit = mlp.b2;
                for (int h = 0; h < hidden; ++h) {
                    double a = mlp.b1[h];
                    const double* row = &mlp.w1[static_cast<std::size_t>(h) * dim];
                    for (int i = 0; i < dim; ++i) a += row[i] * x[i];
                    act[h] = a > 0.0 ? a : 0.0;
                    logit += mlp.w2[h] * act[h];
                }
                const double p = 1.0 / (1.0 + std::exp(-logit));
                const double d_logit = p - y;
                g_b2 += d_logit;
                for (int h = 0; h < hidden; ++h) {
                    g_w2[h] += d_logit * act[h];
                    if (act[h] > 0.0) {
                        const double d_a = d_logit * mlp.w2[h];
                        g_b1[h] += d_a;
                        double* grow = &g_w1[static_cast<std::size_t>(h) * dim];
                        for (int i = 0; i < dim; ++i) grow[i] += d_a * x[i];
                    }
                }
            }
            for (std::size_t i = 0; i < mlp.w1.size(); ++i) mlp.w1[i] -= kLr * inv * g_w1[i];
            for (int h = 0; h < hidden; ++h) {
                mlp.b1[h] -= kLr * inv * g_b1[h];
                mlp.w2[h] -= kLr * inv * g_w2[h];
            }
            mlp.b2 -= kLr * inv * g_b2;
        }
    }
    return mlp;
}

double gini(int attacks, int total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(attacks) / total;
    return 2.0 * p * (1.0 - p);
}

struct TreeBuilder {
    const Dataset& data;
    int max_depth;
    Rng& rng;
    DecisionTree tree;

    int build(std::vector<int> samples, int depth) {
        int attacks = 0;
        for (int s : samples) attacks += data.y[s];
        const int total = static_cast<int>(samples.size());
        const int node_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        // Leaf tie goes to attack (2*attacks >= total).
        tree.nodes[node_idx].label = 2 * attacks >= total ? 1 : 0;
        if (attacks == 0 || attacks == total || depth >= max_depth || total < 2)
            return node_idx;

        // sqrt(dim) feature subsample, evaluated in ascending index order.
        const int dim = data.dim;
        const int m = std::max(1, static_cast<int>(std::ceil(std::sqrt(dim))));
        std::vector<int> features(dim);
        std::iota(features.begin(), features.end(), 0);
        rng.shuffle(features);
        features.resize(m);
        std::sort(features.begin(), features.end());

        double best_impurity = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::pair<double, int>> vals(total);
        for (int f : features) {
            for (int i = 0; i < total; ++i) vals[i] = {data.x[samples[i]][f], data.y[samples[i]]};
            std::sort(vals.begin(), vals.end());
            int left_attacks = 0;
            for (int i = 0; i + 1 < total; ++i) {
                left_attacks += vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                const int nl = i + 1, nr = total - nl;
                const double impurity = (nl * gini(left_attacks, nl) +
                                         nr * gini(attacks - left_attacks, nr)) /
                                        total;
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = f;
                    best_threshold = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
                }
            }
        }
        if (best_feature < 0 || best_impurity >= gini(attacks, total)) return node_idx;

        std::vector<int> left, right;
        for (int s : samples) {
            if (data.x[s][best_feature] <= best_threshold) left.push_back(s);
            else right.push_back(s);
        }
        if (left.empty() || right.empty()) return node_idx;
        samples.clear();
        samples.shrink_to_fit();

        tree.nodes[node_idx].feature = best_feature;
        tree.nodes[node_idx].threshold = best_threshold;
        const int l = build(std::move(left), depth + 1);
        tree.nodes[node_idx].left = l;
        const int r = build(std::move(right), depth + 1);
        tree.nodes[node_idx].right = r;
        return node_idx;
    }
};

RandomForest train_forest(const Dataset& data, int trees, int max_depth, Rng& rng) {
    const int n = static_cast<int>(data.x.size());
    RandomForest forest;
    forest.inputs = data.dim;
    forest.trees.reserve(trees);
    for (int t = 0; t < trees; ++t) {
        std::vector<int> bootstrap(n);
        for (int& s : bootstrap) s = rng.uniform_int(0, n - 1);
        TreeBuilder builder{data, max_depth, rng, {}};
        builder.build(std::move(bootstrap), 0);
        forest.trees.push_back(std::move(builder.tree));
    }
    return forest;
}

} // namespace

Ensemble train_ensemble(const Dataset& data, const EnsembleRecipe& recipe, std::uint64_t seed) {
    if (recipe.members.size() < 3 || recipe.members.size() % 2 == 0)
        fail(ErrorCode::InvalidSpec, "ensemble size must be odd and >= 3");
    if (data.x.empty() || data.dim < 1) fail(ErrorCode::SingleClassTrainingSet, "empty set");
    bool has_attack = false, has_bona = false;
    for (int y : data.y) (y ? has_attack : has_bona) = true;
    if (!has_attack || !has_bona)
        fail(ErrorCode::SingleClassTrainingSet, "need both bonafide and attack samples");
    for (const std::vector<double>& x : data.x)
        if (static_cast<int>(x.size()) != data.dim)
            fail(ErrorCode::ShapeMismatch, "ragged feature matrix");

    Ensemble ens;
    for (std::size_t i = 0; i < recipe.members.size(); ++i) {
        Rng rng(mix_seed(seed, i));
        const MemberSpec& spec = recipe.members[i];
        Classifier clf;
        switch (spec.kind) {
            case ClassifierKind::linear_svm: clf.model = train_linear_svm(data, rng); break;
            case ClassifierKind::mlp: clf.model = train_mlp(data, spec.hidden, rng); break;
            case ClassifierKind::random_forest:
                clf.model = train_forest(data, spec.trees, spec.max_depth, rng);
                break;
        }
        ens.members.push_back(std::move(clf));
    }
    return ens;
}

namespace {

void write_doubles(std::ostream& out, std::span<const double> v) {
    char buf[32];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        out << buf << (i + 1 == v.size() ? "" : " ");
    }
    out << "\n";
}

} // namespace

void save_ensemble(const Ensemble& ens, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << "ENSEMBLE 1 " << ens.members.size() << "\n";
    char buf[32];
    for (const Classifier& clf : ens.members) {
        if (const auto* svm = std::get_if<LinearSvm>(&clf.model)) {
            out << "SVM " << svm->weights.size() << "\n";
            write_doubles(out, svm->weights);
            std::snprintf(buf, sizeof buf, "%.17g", svm->bias);
            out << buf << "\n";
        } else if (const auto* mlp = std::get_if<Mlp>(&clf.model)) {
            out << "MLP " << mlp->inputs << " " << mlp->hidden << "\n";
            for (int h = 0; h < mlp->hidden; ++h)
                write_doubles(out, std::span(mlp->w1).subspan(
                                       static_cast<std::size_t>(h) * mlp->inputs, mlp->inputs));
            write_doubles(out, mlp->b1);
            write_doubles(out, mlp->w2);
            std::snprintf(buf, sizeof buf, "%.17g", mlp->b2);
            out << buf << "\n";
        } else {
            const auto& forest = std::get<RandomForest>(clf.model);
            out << "FOREST " << forest.inputs << " " << forest.trees.size() << "\n";
            for (const DecisionTree& tree : forest.trees) {
                out << "TREE " << tree.nodes.size() << "\n";
                for (const TreeNode& nd : tree.nodes) {
                    std::snprintf(buf, sizeof buf, "%.17g", nd.threshold);
                    out << nd.feature << " " << buf << " " << nd.left << " " << nd.right << " "
                        << nd.label << "\n";
                }
            }
        }
    }
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path.string());
}

Ensemble load_ensemble(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
    std::string magic;
    int version = 0, count = 0;
    if (!(in >> magic >> version >> count) || magic != "ENSEMBLE")
        fail(ErrorCode::MalformedModelFile, "expected 'ENSEMBLE 1 <count>'");
    if (version != 1) fail(ErrorCode::MalformedModelFile, "unknown version");
    if (count < 3 || count % 2 == 0)
        fail(ErrorCode::MalformedModelFile, "member count must be odd and >= 3");

    auto read_double = [&](double& v) {
        if (!(in >> v) || !std::isfinite(v)) fail(ErrorCode::MalformedModelFile, "bad number");
    };

    Ensemble ens;
    for (int m = 0; m < count; ++m) {
        std::string kind;
        if (!(in >> kind)) fail(ErrorCode::MalformedModelFile, "truncated member list");
        Classifier clf;
        if (kind == "SVM") {
            int dim = 0;
            if (!(in >> dim) || dim < 1) fail(ErrorCode::MalformedModelFile, "SVM dim");
            LinearSvm svm;
            svm.weights.resize(dim);
            for (double& w : svm.weights) read_double(w);
            read_double(svm.bias);
            clf.model = std::move(svm);
        } else if (kind == "MLP") {
            int dim = 0, hidden = 0;
            if (!(in >> dim >> hidden) || dim < 1 || hidden < 1)
                fail(ErrorCode::MalformedModelFile, "MLP shape");
            Mlp mlp;
            mlp.inputs = dim;
            mlp.hidden = hidden;
            mlp.w1.resize(static_cast<std::size_t>(hidden) * dim);
            mlp.b1.resize(hidden);
            mlp.w2.resize(hidden);
            for (double& w : mlp.w1) read_double(w);
            for (double& w : mlp.b1) read_double(w);
            for (double& w : mlp.w2) read_double(w);
            read_double(mlp.b2);
            clf.model = std::move(mlp);
        } else if (kind == "FOREST") {
            int dim = 0, trees = 0;
            if (!(in >> dim >> trees) || dim < 1 || trees < 1)
                fail(ErrorCode::MalformedModelFile, "FOREST shape");
            RandomForest forest;
            forest.inputs = dim;
            forest.trees.resize(trees);
            for (DecisionTree& tree : forest.trees) {
                std::string tmagic;
                int nodes = 0;
                if (!(in >> tmagic >> nodes) || tmagic != "TREE" || nodes < 1)
                    fail(ErrorCode::MalformedModelFile, "TREE header");
                tree.nodes.resize(nodes);
                for (TreeNode& nd : tree.nodes) {
                    if (!(in >> nd.feature)) fail(ErrorCode::MalformedModelFile, "node");
                    read_double(nd.threshold);
                    if (!(in >> nd.left >> nd.right >> nd.label))
                        fail(ErrorCode::MalformedModelFile, "node");
                    if (nd.feature >= dim || nd.left >= nodes || nd.right >= nodes ||
                        (nd.feature >= 0 && (nd.left < 0 || nd.right < 0)))
                        fail(ErrorCode::MalformedModelFile, "node out of range");
                }
            }
            clf.model = std::move(forest);
        } else {
            fail(ErrorCode::MalformedModelFile, "unknown member kind '" + kind + "'");
        }
        ens.members.push_back(std::move(clf));
    }
    std::string extra;
    if (in >> extra) fail(ErrorCode::MalformedModelFile, "trailing content");
    return ens;
}

} // namespace iris
