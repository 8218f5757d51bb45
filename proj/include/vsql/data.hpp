#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsql/qcore.hpp"

namespace vsql {

struct LabeledState {
    QuantumInput state;
    int label = 0;
};

struct Dataset {
    int n_qubits = 0;
    int n_classes = 2; // distinct label values; a binary task uses a 1-output head
    std::vector<LabeledState> train;
    std::vector<LabeledState> val;

    void validate() const;
};

// Two-qubit state-discrimination families. Class 0 is the pure family
// psi_u = sqrt(1-u^2)|00> + u|10>; class 1 is the rank-2 mixture of
// +/- sqrt(1-v^2)|01> + v|10>; class 2 (three-class task) is the pure family
// psi_t = sqrt(1-t^2)|00> + t|01>. Parameters are sampled uniformly from the
// configured ranges and each class is split train/val separately.
struct QsdConfig {
    int count_class0 = 100;
    int count_class1 = 200;
    int count_class2 = 100; // three-class task only
    double range_min = 0.0;
    double range_max = 1.0;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

Dataset gen_qsd_binary(const QsdConfig& cfg);
Dataset gen_qsd_three(const QsdConfig& cfg);

// Three-qubit noisy discrimination pair: two fixed non-orthogonal pure states
// (fidelity 0.75) are scrambled by a Haar-random unitary and passed through a
// single-qubit Pauli channel with strength p ~ U[0, noise_cap]. One Pauli in
// {X, Y, Z} is drawn per state and applied at each qubit position with weight
// p/3.
struct NoisyConfig {
    double noise_cap = 0.5;
    int per_class = 40;
    double train_fraction = 0.5;
    bool shared_unitary = true; // same scrambling unitary for both classes
    std::uint64_t seed = 0;

    void validate() const;
};

Dataset gen_noisy_pair(const NoisyConfig& cfg);

// IDX (MNIST) container: dims[0] is the record count; images are row-major
// uint8. Big-endian magic 2051 (rank 3) or 2049 (rank 1).
struct IdxData {
    std::vector<std::uint8_t> data;
    std::vector<int> dims;

    long count() const { return dims.empty() ? 0 : dims[0]; }
    long record_size() const;
};

IdxData parse_idx(const std::string& path);

struct MnistSplit {
    IdxData images;
    IdxData labels;
};

struct MnistData {
    MnistSplit train;
    MnistSplit test;
};

// Load the four canonical files from dir, validating headers and pairing.
MnistData load_mnist(const std::string& dir);

// Keep only digits 0 and 1 (labels stay 0/1).
MnistSplit filter_binary_01(const MnistSplit& split);

// Amplitude encoding: flatten the 28x28 image row-major, scale to [0,1],
// zero-pad 784 -> 1024 and L2-normalize into a 10-qubit pure state.
// All-zero images are rejected.
PureState encode_amplitude(const std::uint8_t* pixels, int n_pixels);

// Amplitude-encoded dataset from MNIST splits. train_limit > 0 keeps a
// seeded balanced-order random subset of the training split.
Dataset mnist_dataset(const MnistData& data, bool binary01, int train_limit = 0,
                      std::uint64_t seed = 0);

// Raw pixel vectors (scaled to [0,1]) for the classical baseline.
struct VectorDataset {
    Matrix train_x; // n_train x 784
    std::vector<int> train_y;
    Matrix test_x;
    std::vector<int> test_y;
    int n_classes = 10;
};

VectorDataset mnist_vector_dataset(const MnistData& data, int train_limit = 0,
                                   std::uint64_t seed = 0);

// Dataset root resolution, strongest first: command-line flag, then
// $VSQL_DATA_DIR, then the config value, then "data/mnist" under the working
// directory.
std::string resolve_data_dir(const std::string& cli_dir, const std::string& config_dir = "");

// True when all four canonical IDX files parse under dir.
bool mnist_files_present(const std::string& dir);

// Optional fetch step: downloads the four canonical .gz archives over http,
// decompresses and caches them under dir. Verifies sizes and magics.
void fetch_mnist(const std::string& dir);

} // namespace vsql
