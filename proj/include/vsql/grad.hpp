#pragma once

#include <cstdint>
#include <vector>

#include "vsql/data.hpp"
#include "vsql/head.hpp"
#include "vsql/shadow.hpp"

namespace vsql {

// d feature(s, i) / d theta_s[l] by the two-sided rotation shift rule:
// [o(theta + pi/2 e_l) - o(theta - pi/2 e_l)] / 2. This is the production
// gradient; in sampled mode each shifted evaluation passes through the shot
// model on its own substream.
double param_shift_grad(const QuantumInput& input, const ShadowEnsemble& ensemble,
                        int s, int i, int l, const ShotConfig& shots = {},
                        std::uint64_t sample_tag = 0);

// Same derivative from the commutator form: with the circuit split around the
// gate carrying parameter l into U = U_after U_at U_before, the derivative is
// -(i/2) Tr(B [P, A]) with A = U_<= rho U_<=^dag, B = U_>^dag O U_>, and P the
// generator Pauli embedded at the gate's target. Exact only; used to
// cross-check the shift rule.
double analytic_grad(const QuantumInput& input, const ShadowEnsemble& ensemble,
                     int s, int i, int l);

// Central finite difference with the given step, exact evaluations.
double fd_grad(const QuantumInput& input, const ShadowEnsemble& ensemble,
               int s, int i, int l, double step);

// Precomputed per-sample inputs for batched gradient work. rdm_flat stores
// each window RDM as [vec Re || vec Im], so Tr(rho M) for Hermitian M is a
// single real dot product against the equally flattened observable.
struct PreparedSample {
    std::vector<Vector> rdm_flat; // one per window
    int label = 0;
    std::uint64_t tag = 0; // shot-substream id (dataset index)
};

PreparedSample prepare_sample(const QuantumInput& input, int n_qsc, int label,
                              std::uint64_t tag);

Vector flatten_hermitian(const CMatrix& m);

struct BatchGrads {
    std::vector<Vector> theta; // per circuit
    Matrix w;
    Vector b;
    double loss = 0.0; // batch-mean loss
};

// Batch-mean loss gradient with respect to every circuit angle and the head.
// Feature gradients chain through head_backward; circuit gradients use the
// shift rule with the shifted observables built once per batch.
BatchGrads loss_grad(const std::vector<const PreparedSample*>& batch,
                     const ShadowEnsemble& ensemble, const ClassifierHead& head,
                     LossKind kind, const ShotConfig& shots = {});

BatchGrads loss_grad(const std::vector<LabeledState>& batch,
                     const ShadowEnsemble& ensemble, const ClassifierHead& head,
                     LossKind kind, const ShotConfig& shots = {});

} // namespace vsql
