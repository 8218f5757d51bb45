#include "vsql/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "vsql/data.hpp"
#include "vsql/head.hpp"
#include "vsql/rng.hpp"
#include "vsql/threading.hpp"

namespace vsql {

namespace {

// Single-qubit marginal of the fixed product input: qubit j carries
// RY(2 pi j / n)|0> = [cos(pi j / n), sin(pi j / n)].
Eigen::Vector2cd product_qubit(int j, int n) {
    double half = M_PI * static_cast<double>(j) / static_cast<double>(n);
    Eigen::Vector2cd v;
    v << std::cos(half), std::sin(half);
    return v;
}

// Window RDM of the product input: tensor product of the per-qubit
// projectors, so no global 2^n object is ever built.
CMatrix product_window_rdm(int window_start, int n_qsc, int n) {
    CMatrix rdm = CMatrix::Ones(1, 1);
    for (int j = window_start; j < window_start + n_qsc; ++j) {
        Eigen::Vector2cd v = product_qubit(j, n);
        Eigen::Matrix2cd proj = v * v.adjoint();
        CMatrix next(rdm.rows() * 2, rdm.cols() * 2);
        next.topLeftCorner(rdm.rows(), rdm.cols()) = rdm * proj(0, 0);
        next.topRightCorner(rdm.rows(), rdm.cols()) = rdm * proj(0, 1);
        next.bottomLeftCorner(rdm.rows(), rdm.cols()) = rdm * proj(1, 0);
        next.bottomRightCorner(rdm.rows(), rdm.cols()) = rdm * proj(1, 1);
        rdm = std::move(next);
    }
    return rdm;
}

double trace_product(const CMatrix& rho, const CMatrix& m) {
    return rho.transpose().cwiseProduct(m).sum().real();
}

bool close_to(double a, double b, double tol) { return std::abs(a - b) <= tol; }

} // namespace

void BpScanConfig::validate() const {
    if (n_list.empty() || nqsc_list.empty())
        throw ConfigError("variance scan needs register and window lists");
    if (trials < 2) throw ConfigError("variance scan needs at least 2 trials");
    if (n_layers < 1) throw ConfigError("variance scan needs at least one layer");
    for (int m : nqsc_list)
        if (m < 1 || m > 12) throw ConfigError("window width out of range");
    for (int n : n_list)
        for (int m : nqsc_list)
            if (n < m) throw ConfigError("register smaller than a scanned window");
}

std::vector<BpScanRow> bp_variance_scan(const BpScanConfig& cfg) {
    cfg.validate();
    std::vector<BpScanRow> rows;
    for (int n : cfg.n_list) {
        for (int m : cfg.nqsc_list) {
            ShadowCircuit circuit = build_ansatz_ry_cnot(m, cfg.n_layers);
            CMatrix rdm = product_window_rdm(0, m, n);

            std::vector<double> grads(cfg.trials);
            parallel_for(cfg.trials, [&](std::size_t trial) {
                Rng rng(mix_seed(cfg.seed, {static_cast<std::uint64_t>(n),
                                            static_cast<std::uint64_t>(m), trial}));
                Vector theta(circuit.n_params);
                for (int l = 0; l < circuit.n_params; ++l)
                    theta[l] = rng.uniform(0.0, 2.0 * M_PI);
                Vector plus = theta, minus = theta;
                plus[0] += M_PI / 2.0;
                minus[0] -= M_PI / 2.0;
                double op = trace_product(rdm, conjugated_observable(circuit, plus));
                double om = trace_product(rdm, conjugated_observable(circuit, minus));
                grads[trial] = (op - om) / 2.0;
            });

            double mean = 0.0;
            for (double g : grads) mean += g;
            mean /= static_cast<double>(cfg.trials);
            double var = 0.0;
            for (double g : grads) var += (g - mean) * (g - mean);
            var /= static_cast<double>(cfg.trials - 1);
            rows.push_back({n, m, cfg.trials, mean, var});
        }
    }
    return rows;
}

void save_bp_csv(const std::vector<BpScanRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "n,n_qsc,trials,mean,variance\n";
    char buf[160];
    for (const BpScanRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.12g,%.12g\n", r.n, r.n_qsc, r.trials,
                      r.mean, r.variance);
        out << buf;
    }
    if (!out) throw ConfigError("write to " + path + " failed");
}

void LandscapeConfig::validate() const {
    if (grid < 2) throw ConfigError("landscape grid needs at least 2 points per axis");
    if (n_qsc < 1 || n_qubits < n_qsc)
        throw ConfigError("landscape window must fit in the register");
    if (n_layers < 1) throw ConfigError("landscape circuit needs at least one layer");
    if (n_qsc > 12) throw ConfigError("window width out of range");
}

LandscapeResult landscape_slice(const LandscapeConfig& cfg) {
    cfg.validate();
    ShadowCircuit circuit = build_ansatz_ry_cnot(cfg.n_qsc, cfg.n_layers);
    if (circuit.n_params < 2)
        throw ConfigError("landscape needs a circuit with at least two parameters");
    int windows = cfg.n_qubits - cfg.n_qsc + 1;

    std::vector<CMatrix> rdms(windows);
    for (int i = 0; i < windows; ++i)
        rdms[i] = product_window_rdm(i, cfg.n_qsc, cfg.n_qubits);

    Rng rng(mix_seed(cfg.seed, {0x7A5Dull}));
    ClassifierHead head;
    head.n_classes = 1;
    head.w.resize(1, windows);
    for (int i = 0; i < windows; ++i) head.w(0, i) = rng.normal();
    head.b = Vector::Zero(1);

    LandscapeResult out;
    out.theta1.resize(cfg.grid);
    out.theta2.resize(cfg.grid);
    for (int k = 0; k < cfg.grid; ++k) {
        double t = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(cfg.grid - 1);
        out.theta1[k] = t;
        out.theta2[k] = t;
    }
    out.loss.resize(cfg.grid, cfg.grid);

    parallel_for(cfg.grid, [&](std::size_t gi) {
        Vector theta = Vector::Constant(circuit.n_params, M_PI / 4.0);
        theta[0] = out.theta1[static_cast<long>(gi)];
        for (int gj = 0; gj < cfg.grid; ++gj) {
            theta[1] = out.theta2[gj];
            CMatrix m = conjugated_observable(circuit, theta);
            Vector features(windows);
            for (int i = 0; i < windows; ++i) features[i] = trace_product(rdms[i], m);
            Prediction pred = head_forward(features, head);
            out.loss(static_cast<long>(gi), gj) = head_loss(pred, 0, LossKind::BinaryMse);
        }
    });
    return out;
}

void save_landscape_csv(const LandscapeResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "theta1,theta2,loss\n";
    char buf[160];
    for (long i = 0; i < result.theta1.size(); ++i)
        for (long j = 0; j < result.theta2.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", result.theta1[i],
                          result.theta2[j], result.loss(i, j));
            out << buf;
        }
    if (!out) throw ConfigError("write to " + path + " failed");
}

nlohmann::json report_to_json(const VerifierReport& report) {
    nlohmann::json j;
    j["verifier"] = report.verifier;
    j["passed"] = report.passed;
    nlohmann::json checks = nlohmann::json::array();
    for (const CheckItem& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"measured", c.measured},
                          {"bound", c.bound},
                          {"pass", c.pass}});
    j["checks"] = std::move(checks);
    return j;
}

VerifierReport verify_theorem3(int theta_steps, int uv_steps) {
    if (theta_steps < 2 || uv_steps < 3)
        throw ConfigError("verifier grids need at least 2 angle and 3 family points");
    VerifierReport report;
    report.verifier = "theorem3";

    ShadowEnsemble ens;
    ens.circuits.push_back(build_ansatz_qsd());
    ens.thetas.push_back(Vector::Zero(1));

    auto features_of = [&](const QuantumInput& state, double theta) {
        ens.thetas[0][0] = theta;
        return extract_features(state, ens);
    };

    // closed forms for the expected window features
    double dev_pure0 = 0.0, dev_pure1 = 0.0, dev_mix0 = 0.0, dev_mix1 = 0.0;
    for (int a = 0; a < theta_steps; ++a) {
        double theta = 2.0 * M_PI * static_cast<double>(a) / static_cast<double>(theta_steps);
        double st = std::sin(theta), ct = std::cos(theta);
        for (int k = 0; k < uv_steps; ++k) {
            double x = static_cast<double>(k) / static_cast<double>(uv_steps - 1);
            CVector amp = CVector::Zero(4);
            amp[0] = std::sqrt(1.0 - x * x);
            amp[2] = x;
            PureState psi;
            psi.n_qubits = 2;
            psi.amplitudes = amp;
            FeatureMap fp = features_of(psi, theta);
            double o1 = (1.0 - 2.0 * x * x) * st + 2.0 * x * std::sqrt(1.0 - x * x) * ct;
            dev_pure0 = std::max(dev_pure0, std::abs(fp.values(0, 0) - o1));
            dev_pure1 = std::max(dev_pure1, std::abs(fp.values(0, 1) - st));

            CVector vp = CVector::Zero(4), vm = CVector::Zero(4);
            vp[1] = std::sqrt(1.0 - x * x);
            vp[2] = x;
            vm[1] = -std::sqrt(1.0 - x * x);
            vm[2] = x;
            DensityMatrix rho;
            rho.n_qubits = 2;
            rho.matrix = 0.5 * (vp * vp.adjoint() + vm * vm.adjoint());
            FeatureMap fm = features_of(rho, theta);
            dev_mix0 = std::max(dev_mix0, std::abs(fm.values(0, 0) - (1.0 - 2.0 * x * x) * st));
            dev_mix1 = std::max(dev_mix1, std::abs(fm.values(0, 1) - (2.0 * x * x - 1.0) * st));
        }
    }
    double tol = 1e-10;
    report.checks.push_back(
        {"pure family window-0 feature matches closed form", dev_pure0, tol, dev_pure0 <= tol});
    report.checks.push_back(
        {"pure family window-1 feature matches closed form", dev_pure1, tol, dev_pure1 <= tol});
    report.checks.push_back(
        {"mixed family window-0 feature matches closed form", dev_mix0, tol, dev_mix0 <= tol});
    report.checks.push_back(
        {"mixed family window-1 feature matches closed form", dev_mix1, tol, dev_mix1 <= tol});

    // explicit separating head at theta = pi/4: w = (-1, -2), b = (w1 - w2) sin(theta)
    double theta = M_PI / 4.0;
    ClassifierHead head;
    head.n_classes = 1;
    head.w.resize(1, 2);
    head.w << -1.0, -2.0;
    head.b.resize(1);
    head.b[0] = (-1.0 - (-2.0)) * std::sin(theta);

    double max_logit0 = -1e300, min_logit1 = 1e300;
    bool labels_ok = true;
    for (int k = 0; k < uv_steps; ++k) {
        double x = static_cast<double>(k) / static_cast<double>(uv_steps - 1);
        if (x < 1.0) {
            CVector amp = CVector::Zero(4);
            amp[0] = std::sqrt(1.0 - x * x);
            amp[2] = x;
            PureState psi;
            psi.n_qubits = 2;
            psi.amplitudes = amp;
            Prediction pred = head_forward(features_of(psi, theta).flat(), head);
            max_logit0 = std::max(max_logit0, pred.logits[0]);
            labels_ok = labels_ok && predict_label(pred) == 0;
        }
        CVector vp = CVector::Zero(4), vm = CVector::Zero(4);
        vp[1] = std::sqrt(1.0 - x * x);
        vp[2] = x;
        vm[1] = -std::sqrt(1.0 - x * x);
        vm[2] = x;
        DensityMatrix rho;
        rho.n_qubits = 2;
        rho.matrix = 0.5 * (vp * vp.adjoint() + vm * vm.adjoint());
        Prediction pred = head_forward(features_of(rho, theta).flat(), head);
        min_logit1 = std::min(min_logit1, pred.logits[0]);
        labels_ok = labels_ok && predict_label(pred) == 1;
    }
    report.checks.push_back({"max class-0 logit below decision plane (< 0)", max_logit0, 0.0,
                             max_logit0 < 0.0});
    report.checks.push_back({"min class-1 logit on or above decision plane (>= 0)", min_logit1,
                             0.0, min_logit1 >= -1e-12});
    report.checks.push_back({"explicit head classifies every grid state correctly",
                             labels_ok ? 0.0 : 1.0, 0.0, labels_ok});

    // the families collide at u = v = 1 (both are |10>); the plane puts the
    // shared point in class 1
    PureState border = build_basis_state(2, 2);
    Prediction pred = head_forward(features_of(border, theta).flat(), head);
    bool border_one = predict_label(pred) == 1;
    report.checks.push_back(
        {"degenerate point u = v = 1 reads out class 1", border_one ? 0.0 : 1.0, 0.0, border_one});

    report.passed = true;
    for (const CheckItem& c : report.checks) report.passed = report.passed && c.pass;
    return report;
}

VerifierReport verify_corollary1() {
    VerifierReport report;
    report.verifier = "corollary1";

    // (|000> +/- |110>) / sqrt(2); indices 0 and 6 in big-endian order
    CVector ap = CVector::Zero(8), am = CVector::Zero(8);
    ap[0] = ap[6] = 1.0 / std::sqrt(2.0);
    am[0] = 1.0 / std::sqrt(2.0);
    am[6] = -1.0 / std::sqrt(2.0);
    PureState plus, minus;
    plus.n_qubits = minus.n_qubits = 3;
    plus.amplitudes = ap;
    minus.amplitudes = am;

    double rdm_dev = 0.0;
    for (int q = 0; q < 3; ++q) {
        CMatrix dp = partial_trace_window(plus, q, 1).matrix;
        CMatrix dm = partial_trace_window(minus, q, 1).matrix;
        rdm_dev = std::max(rdm_dev, (dp - dm).cwiseAbs().maxCoeff());
    }
    report.checks.push_back(
        {"single-qubit reduced states are identical", rdm_dev, 1e-12, rdm_dev <= 1e-12});

    ShadowEnsemble local;
    local.circuits.push_back(build_ansatz_qsd());
    local.thetas.push_back(Vector::Zero(1));
    double feat_dev = 0.0;
    for (double theta : {0.0, 0.4, M_PI / 4.0, 1.3, M_PI / 2.0, 2.6, 4.0, 5.5}) {
        local.thetas[0][0] = theta;
        FeatureMap fp = extract_features(plus, local);
        FeatureMap fm = extract_features(minus, local);
        feat_dev = std::max(feat_dev, (fp.values - fm.values).cwiseAbs().maxCoeff());
    }
    report.checks.push_back({"1-local shadow features are identical at every angle", feat_dev,
                             1e-12, feat_dev <= 1e-12});

    // Bell projector (|00> + |11>)/sqrt(2) on the first window
    CMatrix rho2p = partial_trace_window(plus, 0, 2).matrix;
    CMatrix rho2m = partial_trace_window(minus, 0, 2).matrix;
    CVector bell = CVector::Zero(4);
    bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
    CMatrix proj = bell * bell.adjoint();
    double exp_p = (rho2p.transpose().cwiseProduct(proj)).sum().real();
    double exp_m = (rho2m.transpose().cwiseProduct(proj)).sum().real();
    double proj_dev = std::max(std::abs(exp_p - 1.0), std::abs(exp_m));
    report.checks.push_back({"Bell projector separates the window states (1 vs 0)", proj_dev,
                             1e-12, proj_dev <= 1e-12});

    CMatrix diff = (plus.amplitudes * plus.amplitudes.adjoint()) -
                   (minus.amplitudes * minus.amplitudes.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(diff, Eigen::EigenvaluesOnly);
    double tdist = 0.5 * es.eigenvalues().cwiseAbs().sum();
    report.checks.push_back({"full-state trace distance is 1", std::abs(tdist - 1.0), 1e-12,
                             close_to(tdist, 1.0, 1e-12)});

    // identity 2-qubit circuit measures the bare X-string: +1 vs -1
    ShadowEnsemble two;
    two.circuits.push_back(build_ansatz_ry_cnot(2, 1));
    two.thetas.push_back(Vector::Zero(2));
    double f2p = extract_features(plus, two).values(0, 0);
    double f2m = extract_features(minus, two).values(0, 0);
    double sep = std::abs(f2p - f2m);
    report.checks.push_back(
        {"2-local features separate the pair (gap >= 1)", sep, 1.0, sep >= 1.0});

    report.passed = true;
    for (const CheckItem& c : report.checks) report.passed = report.passed && c.pass;
    return report;
}

} // namespace vsql
