#ifndef IRIS_PAD2D_HPP
#define IRIS_PAD2D_HPP

#include "iris/encoding.hpp"
#include "iris/image.hpp"
#include "iris/pad3d.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace iris {

// Concatenated per-scale BSIF codeword histograms; every block sums to 1.
struct FeatureVector {
    std::vector<double> values;
    std::vector<int> block_dims; // 2^n per scale, in scale order
};

// Center-crops roi x roi, BSIF-encodes the crop per bank (bit k = sign of
// filter k's response), histograms the per-pixel codewords into 2^n bins,
// normalizes each block to sum 1 and concatenates in bank order. No
// segmentation: the center of the image is the iris guess.
FeatureVector extract_features(const IrisImage& img, std::span<const FilterBank> banks, int roi);

struct LinearSvm {
    std::vector<double> weights;
    double bias = 0.0;
};

// One rectifier hidden layer, logistic output.
struct Mlp {
    int inputs = 0;
    int hidden = 0;
    std::vector<double> w1; // hidden x inputs, row-major
    std::vector<double> b1; // hidden
    std::vector<double> w2; // hidden
    double b2 = 0.0;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0; // leaf vote, 1 = attack
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // node 0 is the root
};

struct RandomForest {
    int inputs = 0;
    std::vector<DecisionTree> trees;
};

struct Classifier {
    std::variant<LinearSvm, Mlp, RandomForest> model;
};

// Hard binary vote: sign of the SVM margin, logistic >= 0.5, or majority of
// the trees' leaf votes. true = attack.
bool predict_attack(const Classifier& clf, std::span<const double> x);

// Odd member count so the majority is always defined.
struct Ensemble {
    std::vector<Classifier> members;
};

enum class ClassifierKind { linear_svm, mlp, random_forest };

struct MemberSpec {
    ClassifierKind kind = ClassifierKind::linear_svm;
    int hidden = 32;    // mlp
    int trees = 25;     // random_forest
    int max_depth = 8;  // random_forest
};

struct EnsembleRecipe {
    std::vector<MemberSpec> members;

    // 2 linear SVMs, 1 MLP (H=32), 2 random forests (T=25, depth <= 8).
    static EnsembleRecipe default_recipe();
};

// label 1 = attack, 0 = bona fide
struct Dataset {
    int dim = 0;
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

// Deterministic given the seed: seeded shuffling for the SVM subgradient
// passes, seeded init/batching for the MLP, seeded bootstrap and feature
// subsampling for the forests.
Ensemble train_ensemble(const Dataset& data, const EnsembleRecipe& recipe, std::uint64_t seed);

void save_ensemble(const Ensemble& ens, const std::filesystem::path& path);
Ensemble load_ensemble(const std::filesystem::path& path);

struct VoteResult {
    PadDecision decision = PadDecision::live;
    int attack_votes = 0;
    int live_votes = 0;
    int evaluated = 0;
};

// Evaluates votes in order and stops as soon as one tally exceeds half the
// member count; the result always equals the exhaustive majority.
VoteResult majority_early_stop(int count, const std::function<bool(int)>& attack_vote);

struct Pad2dResult {
    PadOutcome outcome;
    int evaluated = 0;
};

// Score is the fraction of evaluated members voting attack (diagnostic);
// the decision is the majority vote, threshold 0.5.
Pad2dResult ospad2d_decide(const IrisImage& img, const Ensemble& ensemble,
                           std::span<const FilterBank> banks, int roi);

// Features CSV: "label,v1,...,vD" with label in {bonafide, attack}.
Dataset load_features_csv(const std::filesystem::path& path);
void append_features_csv(const FeatureVector& fv, const std::string& label,
                         const std::filesystem::path& path);

} // namespace iris

#endif
