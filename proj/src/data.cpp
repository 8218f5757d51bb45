#include "vsql/data.hpp"

#include <cmath>

#include "vsql/rng.hpp"

namespace vsql {

namespace {

PureState make_pure(int n_qubits, CVector amplitudes) {
    PureState s;
    s.n_qubits = n_qubits;
    s.amplitudes = std::move(amplitudes);
    s.validate();
    return s;
}

// class-0 family: sqrt(1-u^2)|00> + u|10>
PureState qsd_psi_u(double u) {
    CVector a = CVector::Zero(4);
    a[0] = std::sqrt(1.0 - u * u);
    a[2] = u;
    return make_pure(2, std::move(a));
}

// class-1 family: equal mixture of +/- sqrt(1-v^2)|01> + v|10>
DensityMatrix qsd_rho_v(double v) {
    CVector p = CVector::Zero(4), m = CVector::Zero(4);
    p[1] = std::sqrt(1.0 - v * v);
    p[2] = v;
    m[1] = -std::sqrt(1.0 - v * v);
    m[2] = v;
    DensityMatrix rho;
    rho.n_qubits = 2;
    rho.matrix = 0.5 * (p * p.adjoint() + m * m.adjoint());
    rho.validate();
    return rho;
}

// class-2 family: sqrt(1-t^2)|00> + t|01>
PureState qsd_psi_t(double t) {
    CVector a = CVector::Zero(4);
    a[0] = std::sqrt(1.0 - t * t);
    a[1] = t;
    return make_pure(2, std::move(a));
}

long split_point(long count, double fraction) {
    return std::lround(static_cast<double>(count) * fraction);
}

void append_split(Dataset& out, std::vector<LabeledState> samples, double fraction) {
    long k = split_point(static_cast<long>(samples.size()), fraction);
    for (long m = 0; m < static_cast<long>(samples.size()); ++m) {
        if (m < k)
            out.train.push_back(std::move(samples[m]));
        else
            out.val.push_back(std::move(samples[m]));
    }
}

// Haar-random unitary: QR of a complex Ginibre matrix with the R-diagonal
// phases folded into Q.
CMatrix haar_unitary(long dim, Rng& rng) {
    CMatrix a(dim, dim);
    for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j)
            a(i, j) = cxd(rng.normal(), rng.normal()) / std::sqrt(2.0);
    Eigen::HouseholderQR<CMatrix> qr(a);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR();
    for (long j = 0; j < dim; ++j) {
        cxd d = r(j, j);
        cxd phase = std::abs(d) > 0 ? d / std::abs(d) : cxd(1.0, 0.0);
        q.col(j) *= phase;
    }
    return q;
}

} // namespace

void Dataset::validate() const {
    if (n_classes < 2) throw DomainError("dataset needs at least two classes");
    if (train.empty() && val.empty()) throw DomainError("dataset has no samples");
    for (const auto* split : {&train, &val}) {
        for (const LabeledState& ls : *split) {
            if (ls.label < 0 || ls.label >= n_classes)
                throw DomainError("label " + std::to_string(ls.label) + " outside class range");
            if (input_qubits(ls.state) != n_qubits)
                throw DomainError("sample register size does not match the dataset");
            std::visit([](const auto& s) { s.validate(); }, ls.state);
        }
    }
}

void QsdConfig::validate() const {
    if (count_class0 < 1 || count_class1 < 1)
        throw ConfigError("each discrimination class needs at least one sample");
    if (!(range_min >= 0.0 && range_min <= range_max && range_max <= 1.0))
        throw ConfigError("family parameter range must satisfy 0 <= min <= max <= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must lie in (0, 1)");
}

Dataset gen_qsd_binary(const QsdConfig& cfg) {
    cfg.validate();
    Rng rng(mix_seed(cfg.seed, {0x45Dull}));
    Dataset out;
    out.n_qubits = 2;
    out.n_classes = 2;
    std::vector<LabeledState> class0, class1;
    for (int k = 0; k < cfg.count_class0; ++k)
        class0.push_back({qsd_psi_u(rng.uniform(cfg.range_min, cfg.range_max)), 0});
    for (int k = 0; k < cfg.count_class1; ++k)
        class1.push_back({qsd_rho_v(rng.uniform(cfg.range_min, cfg.range_max)), 1});
    append_split(out, std::move(class0), cfg.train_fraction);
    append_split(out, std::move(class1), cfg.train_fraction);
    return out;
}

Dataset gen_qsd_three(const QsdConfig& cfg) {
    cfg.validate();
    if (cfg.count_class2 < 1)
        throw ConfigError("the three-class task needs count_class2 >= 1");
    Rng rng(mix_seed(cfg.seed, {0x45Dull, 3ull}));
    Dataset out;
    out.n_qubits = 2;
    out.n_classes = 3;
    std::vector<LabeledState> class0, class1, class2;
    for (int k = 0; k < cfg.count_class0; ++k)
        class0.push_back({qsd_psi_u(rng.uniform(cfg.range_min, cfg.range_max)), 0});
    for (int k = 0; k < cfg.count_class1; ++k)
        class1.push_back({qsd_rho_v(rng.uniform(cfg.range_min, cfg.range_max)), 1});
    for (int k = 0; k < cfg.count_class2; ++k)
        class2.push_back({qsd_psi_t(rng.uniform(cfg.range_min, cfg.range_max)), 2});
    append_split(out, std::move(class0), cfg.train_fraction);
    append_split(out, std::move(class1), cfg.train_fraction);
    append_split(out, std::move(class2), cfg.train_fraction);
    return out;
}

void NoisyConfig::validate() const {
    if (!(noise_cap >= 0.0 && noise_cap <= 1.0))
        throw ConfigError("noise_cap must lie in [0, 1]");
    if (per_class < 2) throw ConfigError("per_class must be at least 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must lie in (0, 1)");
}

Dataset gen_noisy_pair(const NoisyConfig& cfg) {
    cfg.validate();
    Rng rng(mix_seed(cfg.seed, {0x02015Eull}));

    CVector base0 = CVector::Zero(8), base1 = CVector::Zero(8);
    for (int i = 0; i < 4; ++i) base0[i] = 0.5;
    for (int i = 0; i < 3; ++i) base1[i] = 1.0 / std::sqrt(3.0);

    CMatrix u0 = haar_unitary(8, rng);
    CMatrix u1 = cfg.shared_unitary ? u0 : haar_unitary(8, rng);

    const GateKind paulis[3] = {GateKind::X, GateKind::Y, GateKind::Z};
    Vector no_params;

    auto make_sample = [&](const CVector& base, const CMatrix& u, int label) {
        CVector scrambled = u * base;
        DensityMatrix clean;
        clean.n_qubits = 3;
        clean.matrix = scrambled * scrambled.adjoint();
        double p = rng.uniform(0.0, cfg.noise_cap);
        GateKind pauli = paulis[rng.integer(3)];
        DensityMatrix noisy;
        noisy.n_qubits = 3;
        noisy.matrix = (1.0 - p) * clean.matrix;
        for (int q = 0; q < 3; ++q) {
            DensityMatrix flipped = clean;
            apply_circuit(flipped, {{pauli, {q}, -1}}, no_params);
            noisy.matrix += (p / 3.0) * flipped.matrix;
        }
        return LabeledState{std::move(noisy), label};
    };

    Dataset out;
    out.n_qubits = 3;
    out.n_classes = 2;
    std::vector<LabeledState> class0, class1;
    for (int k = 0; k < cfg.per_class; ++k) class0.push_back(make_sample(base0, u0, 0));
    for (int k = 0; k < cfg.per_class; ++k) class1.push_back(make_sample(base1, u1, 1));
    append_split(out, std::move(class0), cfg.train_fraction);
    append_split(out, std::move(class1), cfg.train_fraction);
    return out;
}

} // namespace vsql
