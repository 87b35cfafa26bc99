#include "scdc/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "scdc/model.hpp"

namespace scdc::loss {

using nn::Tensor;

void ContrastConfig::validate() const {
    if (!(tau > 0.0) || !(tau_e > 0.0)) throw std::invalid_argument("temperatures must be positive");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument("epsilon must lie in [0, 1]");
    }
}

int PseudoLabels::confident_count() const {
    int m = 0;
    for (const auto& l : labels) m += l.has_value() ? 1 : 0;
    return m;
}

PseudoLabels PseudoLabels::none(std::size_t batch) {
    PseudoLabels p;
    p.labels.assign(batch, std::nullopt);
    p.confidence.assign(batch, 0.0);
    return p;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine_similarity: length mismatch");
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) throw std::invalid_argument("cosine_similarity: zero vector");
    return uv / (std::sqrt(uu) * std::sqrt(vv));
}

namespace {

void require_probs(const Tensor& y, const char* op) {
    if (y.rank() != 2) throw nn::ShapeError(std::string(op) + ": expected [B, C] probabilities");
}

/// Shared contrast over the rows of `rows` ([2N, E], first N strong, then weak).
/// Row a contributes lse_{neg}(S_a) - lse_{pos}(S_a) with S = cos / tau,
/// weighted by weight[a]; the result is the weighted mean (0 when no weight).
Tensor masked_contrast(const Tensor& rows, const std::vector<double>& pos,
                       const std::vector<double>& neg, const std::vector<double>& weight,
                       double tau) {
    const auto n2 = rows.dim(0);
    double total_weight = 0.0;
    for (double w : weight) total_weight += w;
    if (total_weight == 0.0) return Tensor::scalar(0.0);

    const Tensor unit = nn::normalize_rows(rows);
    const Tensor sim = nn::scale(nn::matmul(unit, nn::transpose(unit)), 1.0 / tau);
    const Tensor pos_mask({n2, n2}, pos);
    const Tensor neg_mask({n2, n2}, neg);
    const Tensor terms =
        nn::sub(nn::logsumexp_rows(sim, neg_mask), nn::logsumexp_rows(sim, pos_mask));
    return nn::scale(nn::sum(nn::mul(terms, Tensor({n2}, weight))), 1.0 / total_weight);
}

struct Masks {
    std::vector<double> pos, neg, weight;
    std::size_t skipped = 0;
};

// Instance masks: positive is the counterpart view, negatives everything but self.
Masks instance_masks(std::size_t n) {
    const auto n2 = 2 * n;
    Masks m{std::vector<double>(n2 * n2, 0.0), std::vector<double>(n2 * n2, 1.0),
            std::vector<double>(n2, 1.0), 0};
    for (std::size_t a = 0; a < n2; ++a) {
        m.neg[a * n2 + a] = 0.0;
        m.pos[a * n2 + (a + n) % n2] = 1.0;
    }
    return m;
}

}  // namespace

Tensor supervised_loss(const Tensor& probs, std::span<const int> labels) {
    require_probs(probs, "supervised_loss");
    const auto b = probs.dim(0);
    const auto c = probs.dim(1);
    if (labels.size() != b) throw std::invalid_argument("supervised_loss: label count mismatch");
    if (b == 0) throw std::invalid_argument("supervised_loss: empty batch");
    std::vector<double> onehot(b * c, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
            throw std::out_of_range("supervised_loss: label " + std::to_string(labels[i]) +
                                    " outside [0, " + std::to_string(c) + ")");
        }
        onehot[i * c + static_cast<std::size_t>(labels[i])] = 1.0;
    }
    const Tensor picked = nn::mul(Tensor({b, c}, std::move(onehot)), nn::log_floor(probs, kProbabilityFloor));
    return nn::scale(nn::sum(picked), -1.0 / static_cast<double>(b));
}

Tensor nt_xent_instance(const Tensor& zs, const Tensor& zw, double tau) {
    if (zs.rank() != 2 || zs.shape() != zw.shape()) {
        throw nn::ShapeError("nt_xent_instance: views must share a [B, E] shape");
    }
    if (zs.dim(0) < 2) throw std::invalid_argument("nt_xent_instance: no negatives available (B < 2)");
    const auto m = instance_masks(zs.dim(0));
    return masked_contrast(nn::concat_rows(zs, zw), m.pos, m.neg, m.weight, tau);
}

Tensor class_mass_entropy(const Tensor& y) {
    require_probs(y, "class_mass_entropy");
    const Tensor p = nn::scale(nn::sum_cols(y), 1.0 / static_cast<double>(y.dim(0)));
    return nn::scale(nn::sum(nn::mul(p, nn::log_floor(p, kProbabilityFloor))), -1.0);
}

CategoryContrast category_contrast(const Tensor& ys, const Tensor& yw, double tau) {
    require_probs(ys, "category_contrast");
    if (ys.shape() != yw.shape()) throw nn::ShapeError("category_contrast: view shapes differ");
    if (ys.dim(1) < 2) throw std::invalid_argument("category_contrast: needs C >= 2");
    if (ys.dim(0) < 1) throw std::invalid_argument("category_contrast: empty batch");
    const auto m = instance_masks(ys.dim(1));
    CategoryContrast out;
    out.contrast = masked_contrast(nn::concat_rows(nn::transpose(ys), nn::transpose(yw)), m.pos,
                                   m.neg, m.weight, tau);
    out.entropy_s = class_mass_entropy(ys);
    out.entropy_w = class_mass_entropy(yw);
    out.total = nn::sub(nn::sub(out.contrast, out.entropy_s), out.entropy_w);
    return out;
}

PseudoLabels select_pseudo_labels(const Tensor& yw, double epsilon) {
    require_probs(yw, "select_pseudo_labels");
    const auto b = yw.dim(0);
    const auto c = yw.dim(1);
    PseudoLabels out = PseudoLabels::none(b);
    for (std::size_t i = 0; i < b; ++i) {
        const auto row = yw.values().subspan(i * c, c);
        const int k = argmax(row);
        out.confidence[i] = row[static_cast<std::size_t>(k)];
        if (out.confidence[i] >= epsilon) out.labels[i] = k;
    }
    return out;
}

CalibratedEmbedding calibrated_embedding_loss(const Tensor& zs, const Tensor& zw,
                                              const PseudoLabels& pseudo, double tau_e) {
    if (zs.rank() != 2 || zs.shape() != zw.shape()) {
        throw nn::ShapeError("calibrated_embedding_loss: views must share a [B, E] shape");
    }
    const auto n = zs.dim(0);
    if (n < 2) throw std::invalid_argument("calibrated_embedding_loss: no negatives available (B < 2)");
    if (pseudo.size() != n) throw std::invalid_argument("calibrated_embedding_loss: pseudo-label count mismatch");

    const auto n2 = 2 * n;
    Masks m = instance_masks(n);
    auto label_of = [&](std::size_t row) { return pseudo.labels[row % n]; };
    for (std::size_t a = 0; a < n2; ++a) {
        const auto la = label_of(a);
        if (!la) continue;
        bool any_negative = false;
        for (std::size_t j = 0; j < n2; ++j) {
            if (j == a) continue;
            const auto lj = label_of(j);
            const bool same = lj && *lj == *la;
            m.pos[a * n2 + j] = same ? 1.0 : 0.0;
            m.neg[a * n2 + j] = same ? 0.0 : 1.0;
            any_negative = any_negative || !same;
        }
        if (!any_negative) {
            // No denominator: drop the anchor, keep its rows well-defined.
            const auto partner = (a + n) % n2;
            m.neg[a * n2 + partner] = 1.0;
            m.weight[a] = 0.0;
            ++m.skipped;
        }
    }
    CalibratedEmbedding out;
    out.value = masked_contrast(nn::concat_rows(zs, zw), m.pos, m.neg, m.weight, tau_e);
    out.skipped_anchors = m.skipped;
    out.contributing_anchors = n2 - m.skipped;
    return out;
}

Tensor pseudo_supervision_loss(const Tensor& ys_pred, const PseudoLabels& pseudo) {
    require_probs(ys_pred, "pseudo_supervision_loss");
    const auto b = ys_pred.dim(0);
    const auto c = ys_pred.dim(1);
    if (pseudo.size() != b) throw std::invalid_argument("pseudo_supervision_loss: count mismatch");
    const int confident = pseudo.confident_count();
    if (confident == 0) return Tensor::scalar(0.0);
    std::vector<double> onehot(b * c, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
        if (pseudo.labels[i]) onehot[i * c + static_cast<std::size_t>(*pseudo.labels[i])] = 1.0;
    }
    const Tensor picked = nn::mul(Tensor({b, c}, std::move(onehot)), nn::log_floor(ys_pred, kProbabilityFloor));
    return nn::scale(nn::sum(picked), -1.0 / static_cast<double>(confident));
}

UnsupervisedTerms unsupervised_objective(const Tensor& zs, const Tensor& zw, const Tensor& ys,
                                         const Tensor& yw, const ContrastConfig& cfg) {
    cfg.validate();
    UnsupervisedTerms t;
    t.pseudo = select_pseudo_labels(yw, cfg.epsilon);
    t.l_cat = category_contrast(ys, yw, cfg.tau).total;
    auto emb = calibrated_embedding_loss(zs, zw, t.pseudo, cfg.tau_e);
    t.l_emb = emb.value;
    t.skipped_anchors = emb.skipped_anchors;
    t.l_pse = pseudo_supervision_loss(ys, t.pseudo);
    t.total = nn::add(nn::add(t.l_cat, t.l_emb), t.l_pse);
    return t;
}

Tensor semi_objective(const Tensor& l_sup, const Tensor& l_uns) { return nn::add(l_sup, l_uns); }

}  // namespace scdc::loss
