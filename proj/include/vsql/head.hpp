#pragma once

#include "vsql/common.hpp"

namespace vsql {

// Affine readout over the flattened feature vector. n_classes == 1 is the
// binary sigmoid head (single probability of class 1); n_classes >= 2 applies
// a softmax over the rows.
struct ClassifierHead {
    int n_classes = 1;
    Matrix w; // n_classes x n_features
    Vector b; // n_classes

    int n_features() const { return static_cast<int>(w.cols()); }
    void validate() const;
};

struct Prediction {
    Vector logits; // w o + b
    Vector probs;  // sigmoid (length 1) or softmax (length n_classes)
};

enum class LossKind { BinaryMse, CrossEntropy };

Prediction head_forward(const Vector& features, const ClassifierHead& head);

// BinaryMse: (p - y)^2 / 2. CrossEntropy: -log(max(p_label, 1e-12)).
double head_loss(const Prediction& pred, int label, LossKind kind);

struct HeadGrads {
    Matrix w;        // n_classes x n_features
    Vector b;        // n_classes
    Vector features; // d loss / d features, used to chain into the circuits
};

HeadGrads head_backward(const Vector& features, const Prediction& pred, int label,
                        const ClassifierHead& head, LossKind kind);

// Binary: probs[0] >= 0.5 reads out class 1. Multi-class: first argmax.
int predict_label(const Prediction& pred);

} // namespace vsql
