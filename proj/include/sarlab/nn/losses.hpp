#pragma once

#include <cmath>
#include <vector>

#include "sarlab/common.hpp"

namespace sarlab::nn {

// Mean negative log-likelihood over a batch of probability rows (B x K,
// row-major). Rows must sum to 1 within 1e-6. Zero probability at the true
// class is clamped to 1e-12; `clamped` reports whether that happened. This is
// the probability-domain definition; the training path uses the equivalent
// log-sum-exp form on logits.
inline double nll_from_probs(const std::vector<double>& probs, int k,
                             const std::vector<int>& labels, bool* clamped = nullptr) {
    if (k < 2) throw ArgumentError("nll_from_probs: need at least 2 classes");
    if (labels.empty() || probs.size() != labels.size() * static_cast<size_t>(k))
        throw ArgumentError("nll_from_probs: shape mismatch");
    if (clamped) *clamped = false;
    double acc = 0.0;
    for (size_t n = 0; n < labels.size(); ++n) {
        double row = 0.0;
        for (int j = 0; j < k; ++j) row += probs[n * k + j];
        if (std::abs(row - 1.0) > 1e-6)
            throw ArgumentError("nll_from_probs: probability row does not sum to 1");
        const int lab = labels[n];
        if (lab < 0 || lab >= k) throw ArgumentError("nll_from_probs: label out of range");
        double p = probs[n * k + lab];
        if (p < 1e-12) {
            p = 1e-12;
            if (clamped) *clamped = true;
        }
        acc -= std::log(p);
    }
    return acc / static_cast<double>(labels.size());
}

inline double cls_loss(const std::vector<double>& probs, int num_classes,
                       const std::vector<int>& labels, bool* clamped = nullptr) {
    return nll_from_probs(probs, num_classes, labels, clamped);
}

// Domain-adversarial loss over K=2 domains (same functional form).
inline double adv_loss(const std::vector<double>& domain_probs, const std::vector<int>& domains,
                       bool* clamped = nullptr) {
    return nll_from_probs(domain_probs, 2, domains, clamped);
}

}  // namespace sarlab::nn
