#include "vsql/head.hpp"

#include <cmath>

namespace vsql {

namespace {
constexpr double kLogFloor = 1e-12;
}

void ClassifierHead::validate() const {
    if (n_classes < 1) throw DomainError("head needs at least one output");
    if (w.rows() != n_classes || b.size() != n_classes)
        throw DomainError("head weight shape does not match n_classes");
    if (w.cols() < 1) throw DomainError("head has no input features");
    if (!w.allFinite() || !b.allFinite()) throw DomainError("non-finite head parameter");
}

Prediction head_forward(const Vector& features, const ClassifierHead& head) {
    head.validate();
    if (features.size() != head.w.cols())
        throw DomainError("feature vector length does not match head");
    Prediction pred;
    pred.logits = head.w * features + head.b;
    if (head.n_classes == 1) {
        pred.probs.resize(1);
        pred.probs[0] = 1.0 / (1.0 + std::exp(-pred.logits[0]));
    } else {
        // softmax, shifted by the max logit for stability
        Vector z = pred.logits.array() - pred.logits.maxCoeff();
        pred.probs = z.array().exp();
        pred.probs /= pred.probs.sum();
    }
    return pred;
}

double head_loss(const Prediction& pred, int label, LossKind kind) {
    if (kind == LossKind::BinaryMse) {
        if (pred.probs.size() != 1) throw DomainError("binary loss needs a 1-output head");
        if (label != 0 && label != 1) throw DomainError("binary label must be 0 or 1");
        double d = pred.probs[0] - static_cast<double>(label);
        return 0.5 * d * d;
    }
    if (label < 0 || label >= pred.probs.size())
        throw DomainError("label " + std::to_string(label) + " outside class range");
    return -std::log(std::max(pred.probs[label], kLogFloor));
}

HeadGrads head_backward(const Vector& features, const Prediction& pred, int label,
                        const ClassifierHead& head, LossKind kind) {
    head.validate();
    if (features.size() != head.w.cols())
        throw DomainError("feature vector length does not match head");
    Vector dz(head.n_classes);
    if (kind == LossKind::BinaryMse) {
        if (head.n_classes != 1) throw DomainError("binary loss needs a 1-output head");
        if (label != 0 && label != 1) throw DomainError("binary label must be 0 or 1");
        double p = pred.probs[0];
        dz[0] = (p - static_cast<double>(label)) * p * (1.0 - p);
    } else {
        if (label < 0 || label >= head.n_classes)
            throw DomainError("label outside class range");
        dz = pred.probs;
        dz[label] -= 1.0;
    }
    HeadGrads g;
    g.w = dz * features.transpose();
    g.b = dz;
    g.features = head.w.transpose() * dz;
    return g;
}

int predict_label(const Prediction& pred) {
    if (pred.probs.size() == 1) return pred.probs[0] >= 0.5 ? 1 : 0;
    int best = 0;
    for (int k = 1; k < pred.probs.size(); ++k)
        if (pred.probs[k] > pred.probs[best]) best = k;
    return best;
}

} // namespace vsql
