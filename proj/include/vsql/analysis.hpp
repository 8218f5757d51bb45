#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsql/shadow.hpp"

namespace vsql {

// Gradient-statistics scan over register sizes and window widths. For each
// (n, n_qsc) pair it samples `trials` uniform angle vectors for a 2-layer
// ry-cnot circuit, computes d o / d theta_1 of the first-window feature on
// the fixed product input prod_j RY(2 pi j / n)|0>, and records the sample
// mean and variance.
struct BpScanConfig {
    std::vector<int> n_list{10, 20, 100};
    std::vector<int> nqsc_list{2, 4};
    int trials = 1000;
    int n_layers = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BpScanRow {
    int n = 0;
    int n_qsc = 0;
    int trials = 0;
    double mean = 0.0;
    double variance = 0.0;
};

std::vector<BpScanRow> bp_variance_scan(const BpScanConfig& cfg);

// CSV "n,n_qsc,trials,mean,variance"
void save_bp_csv(const std::vector<BpScanRow>& rows, const std::string& path);

// Two-angle slice of the binary loss surface on the same product input: the
// first two angles of the first circuit sweep [0, 2pi] on a grid, remaining
// angles pinned to pi/4, head weights seeded standard normal with b = 0,
// target label 0.
struct LandscapeConfig {
    int n_qubits = 50;
    int n_qsc = 2;
    int n_layers = 2;
    int grid = 60; // points per axis
    std::uint64_t seed = 0;

    void validate() const;
};

struct LandscapeResult {
    Vector theta1; // grid values, axis 1
    Vector theta2;
    Matrix loss; // loss(i, j) at (theta1[i], theta2[j])
};

LandscapeResult landscape_slice(const LandscapeConfig& cfg);

// CSV "theta1,theta2,loss", row-major over the grid
void save_landscape_csv(const LandscapeResult& result, const std::string& path);

struct CheckItem {
    std::string name;
    double measured = 0.0;
    double bound = 0.0; // measured must be <= bound unless noted in name
    bool pass = false;
};

struct VerifierReport {
    std::string verifier;
    bool passed = false;
    std::vector<CheckItem> checks;
};

nlohmann::json report_to_json(const VerifierReport& report);

// Simulated shadow features of the two-qubit discrimination families against
// their closed forms on a (theta, u/v) grid, plus the explicit separating
// head (theta = pi/4, w = (-1, -2), b = (w1 - w2) sin theta): class-0 logits
// negative below the degenerate point, class-1 logits non-negative.
VerifierReport verify_theorem3(int theta_steps = 25, int uv_steps = 101);

// The three-qubit pair (|000> +/- |110>)/sqrt(2): identical single-qubit
// reduced states and 1-local features, distinguishable two-qubit window
// (Bell projector expectations 1 vs 0, trace distance 1, differing 2-local
// features).
VerifierReport verify_corollary1();

} // namespace vsql
