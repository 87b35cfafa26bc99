#pragma once

#include <optional>
#include <span>
#include <vector>

#include "scdc/nn/ops.hpp"

namespace scdc::loss {

/// Temperatures for instance (tau) and calibrated (tau_e) contrast, and the
/// pseudo-label confidence threshold.
struct ContrastConfig {
    double tau = 0.2;
    double tau_e = 0.2;
    double epsilon = 0.2;

    void validate() const;
};

/// Hard, detached pseudo-labels from weak-view predictions.
struct PseudoLabels {
    std::vector<std::optional<int>> labels;
    std::vector<double> confidence;

    int confident_count() const;
    std::size_t size() const { return labels.size(); }
    static PseudoLabels none(std::size_t batch);
};

inline constexpr double kProbabilityFloor = 1e-12;

/// u.v / (|u| |v|); throws on a zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Mean cross-entropy of integer labels against probability rows.
nn::Tensor supervised_loss(const nn::Tensor& probs, std::span<const int> labels);

/// NT-Xent over 2B anchors: positive is the other view of the same sample,
/// the denominator runs over all 2B - 1 other embeddings. Mean over anchors.
nn::Tensor nt_xent_instance(const nn::Tensor& zs, const nn::Tensor& zw, double tau);

struct CategoryContrast {
    nn::Tensor contrast;   // NT-Xent over the 2C class columns
    nn::Tensor entropy_s;  // entropy of the strong view's class-mass distribution
    nn::Tensor entropy_w;
    nn::Tensor total;      // contrast - entropy_s - entropy_w
};

CategoryContrast category_contrast(const nn::Tensor& ys, const nn::Tensor& yw, double tau);

/// Class-mass entropy -sum p log p with p = column sums / B.
nn::Tensor class_mass_entropy(const nn::Tensor& y);

/// argmax of each row when its maximum reaches epsilon. Values only; no graph.
PseudoLabels select_pseudo_labels(const nn::Tensor& yw, double epsilon);

struct CalibratedEmbedding {
    nn::Tensor value;
    std::size_t contributing_anchors = 0;
    std::size_t skipped_anchors = 0;  // confident anchors without negatives
};

/// Confident anchors: -log(sum over same-label embeddings / sum over
/// other-label or unconfident embeddings). Unconfident anchors use the
/// NT-Xent instance term. Averaged over contributing anchors; zero when none.
CalibratedEmbedding calibrated_embedding_loss(const nn::Tensor& zs, const nn::Tensor& zw,
                                              const PseudoLabels& pseudo, double tau_e);

/// Mean cross-entropy of the confident pseudo-labels against the strong-view
/// predictions; zero when no sample is confident.
nn::Tensor pseudo_supervision_loss(const nn::Tensor& ys_pred, const PseudoLabels& pseudo);

struct UnsupervisedTerms {
    nn::Tensor l_cat;
    nn::Tensor l_emb;
    nn::Tensor l_pse;
    nn::Tensor total;
    PseudoLabels pseudo;
    std::size_t skipped_anchors = 0;
};

/// L_cat + L'_emb + L_pse from the strong (s) and weak (w) view outputs:
/// embeddings z and class-probability rows y.
UnsupervisedTerms unsupervised_objective(const nn::Tensor& zs, const nn::Tensor& zw,
                                         const nn::Tensor& ys, const nn::Tensor& yw,
                                         const ContrastConfig& cfg);

nn::Tensor semi_objective(const nn::Tensor& l_sup, const nn::Tensor& l_uns);

}  // namespace scdc::loss
