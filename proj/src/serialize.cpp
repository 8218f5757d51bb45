#include "vsql/serialize.hpp"

#include <cstdio>
#include <fstream>

namespace vsql {

namespace {

using nlohmann::json;

constexpr const char* kOrderingNote = "big-endian (qubit 0 is the most significant index bit)";

json complex_to_json(const cxd& z) { return json::array({z.real(), z.imag()}); }

cxd complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError("complex entries must be [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

json state_to_json(const LabeledState& ls) {
    json j;
    j["label"] = ls.label;
    if (std::holds_alternative<PureState>(ls.state)) {
        const auto& s = std::get<PureState>(ls.state);
        j["kind"] = "pure";
        json amps = json::array();
        for (long i = 0; i < s.amplitudes.size(); ++i)
            amps.push_back(complex_to_json(s.amplitudes[i]));
        j["amplitudes"] = std::move(amps);
    } else {
        const auto& s = std::get<DensityMatrix>(ls.state);
        j["kind"] = "mixed";
        json rows = json::array();
        for (long r = 0; r < s.matrix.rows(); ++r) {
            json row = json::array();
            for (long c = 0; c < s.matrix.cols(); ++c)
                row.push_back(complex_to_json(s.matrix(r, c)));
            rows.push_back(std::move(row));
        }
        j["matrix"] = std::move(rows);
    }
    return j;
}

LabeledState state_from_json(const json& j, int n_qubits) {
    reject_unknown_keys(j, {"label", "kind", "amplitudes", "matrix"}, "dataset sample");
    if (!j.contains("label") || !j.contains("kind"))
        throw ParseError("dataset sample needs label and kind");
    LabeledState ls;
    ls.label = j.at("label").get<int>();
    std::string kind = j.at("kind").get<std::string>();
    long dim = 1L << n_qubits;
    if (kind == "pure") {
        const json& amps = j.at("amplitudes");
        if (!amps.is_array() || static_cast<long>(amps.size()) != dim)
            throw ParseError("pure sample amplitude count does not match n_qubits");
        PureState s;
        s.n_qubits = n_qubits;
        s.amplitudes.resize(dim);
        for (long i = 0; i < dim; ++i) s.amplitudes[i] = complex_from_json(amps[i]);
        ls.state = std::move(s);
    } else if (kind == "mixed") {
        const json& rows = j.at("matrix");
        if (!rows.is_array() || static_cast<long>(rows.size()) != dim)
            throw ParseError("mixed sample matrix shape does not match n_qubits");
        DensityMatrix s;
        s.n_qubits = n_qubits;
        s.matrix.resize(dim, dim);
        for (long r = 0; r < dim; ++r) {
            const json& row = rows[r];
            if (!row.is_array() || static_cast<long>(row.size()) != dim)
                throw ParseError("mixed sample matrix shape does not match n_qubits");
            for (long c = 0; c < dim; ++c) s.matrix(r, c) = complex_from_json(row[c]);
        }
        ls.state = std::move(s);
    } else {
        throw ParseError("sample kind must be pure or mixed");
    }
    return ls;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (long i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vector vector_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw ParseError(std::string(what) + " must be an array");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError(std::string(what) + " must hold numbers");
        v[static_cast<long>(i)] = j[i].get<double>();
    }
    return v;
}

json gate_to_json(const Gate& g) {
    json j;
    j["kind"] = gate_kind_name(g.kind);
    j["targets"] = g.targets;
    if (g.parameter_index >= 0) j["param"] = g.parameter_index;
    return j;
}

Gate gate_from_json(const json& j) {
    reject_unknown_keys(j, {"kind", "targets", "param"}, "gate");
    Gate g;
    g.kind = gate_kind_from_name(j.at("kind").get<std::string>());
    g.targets = j.at("targets").get<std::vector<int>>();
    g.parameter_index = j.value("param", -1);
    return g;
}

} // namespace

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const std::string& k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
    }
}

std::string gate_kind_name(GateKind kind) {
    switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::CNOT: return "CNOT";
    }
    throw DomainError("unknown gate kind");
}

GateKind gate_kind_from_name(const std::string& name) {
    if (name == "RX") return GateKind::RX;
    if (name == "RY") return GateKind::RY;
    if (name == "RZ") return GateKind::RZ;
    if (name == "X") return GateKind::X;
    if (name == "Y") return GateKind::Y;
    if (name == "Z") return GateKind::Z;
    if (name == "CNOT") return GateKind::CNOT;
    throw ParseError("unknown gate kind \"" + name + "\"");
}

json dataset_to_json(const Dataset& dataset) {
    dataset.validate();
    json j;
    j["format"] = "vsql-dataset";
    j["format_version"] = 1;
    j["qubit_ordering"] = kOrderingNote;
    j["n_qubits"] = dataset.n_qubits;
    j["n_classes"] = dataset.n_classes;
    json train = json::array(), val = json::array();
    for (const LabeledState& ls : dataset.train) train.push_back(state_to_json(ls));
    for (const LabeledState& ls : dataset.val) val.push_back(state_to_json(ls));
    j["train"] = std::move(train);
    j["val"] = std::move(val);
    return j;
}

Dataset dataset_from_json(const json& j) {
    reject_unknown_keys(j, {"format", "format_version", "qubit_ordering", "n_qubits",
                            "n_classes", "train", "val"},
                        "dataset");
    if (j.value("format", "") != std::string("vsql-dataset"))
        throw ParseError("not a vsql-dataset file");
    if (j.value("format_version", 0) != 1)
        throw ParseError("unsupported dataset format_version");
    Dataset out;
    out.n_qubits = j.at("n_qubits").get<int>();
    out.n_classes = j.at("n_classes").get<int>();
    if (out.n_qubits < 1 || out.n_qubits > 30) throw ParseError("n_qubits out of range");
    for (const json& s : j.at("train")) out.train.push_back(state_from_json(s, out.n_qubits));
    for (const json& s : j.at("val")) out.val.push_back(state_from_json(s, out.n_qubits));
    try {
        out.validate();
    } catch (const DomainError& e) {
        throw ParseError(std::string("dataset content invalid: ") + e.what());
    }
    return out;
}

json checkpoint_to_json(const Checkpoint& ckpt) {
    json j;
    j["format"] = "vsql-checkpoint";
    j["format_version"] = ckpt.format_version;
    j["qubit_ordering"] = kOrderingNote;
    j["n_qubits"] = ckpt.n_qubits;
    j["n_classes"] = ckpt.n_classes;
    json circuits = json::array();
    for (const ShadowCircuit& c : ckpt.ensemble.circuits) {
        json cj;
        cj["n_qsc"] = c.n_qsc;
        cj["depth"] = c.depth;
        cj["n_params"] = c.n_params;
        json gates = json::array();
        for (const Gate& g : c.gates) gates.push_back(gate_to_json(g));
        cj["gates"] = std::move(gates);
        circuits.push_back(std::move(cj));
    }
    j["circuits"] = std::move(circuits);
    json thetas = json::array();
    for (const Vector& t : ckpt.ensemble.thetas) thetas.push_back(vector_to_json(t));
    j["thetas"] = std::move(thetas);
    json head;
    head["n_classes"] = ckpt.head.n_classes;
    json wrows = json::array();
    for (long r = 0; r < ckpt.head.w.rows(); ++r)
        wrows.push_back(vector_to_json(ckpt.head.w.row(r).transpose()));
    head["w"] = std::move(wrows);
    head["b"] = vector_to_json(ckpt.head.b);
    j["head"] = std::move(head);
    j["config"] = ckpt.config;
    j["history_columns"] = "iteration,loss,train_acc,val_acc";
    json hist = json::array();
    for (const MetricsRow& row : ckpt.history)
        hist.push_back(json::array({row.iteration, row.loss, row.train_acc, row.val_acc}));
    j["history"] = std::move(hist);
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    reject_unknown_keys(j, {"format", "format_version", "qubit_ordering", "n_qubits",
                            "n_classes", "circuits", "thetas", "head", "config",
                            "history_columns", "history"},
                        "checkpoint");
    if (j.value("format", "") != std::string("vsql-checkpoint"))
        throw ParseError("not a vsql-checkpoint file");
    if (j.value("format_version", 0) != 1)
        throw ParseError("unsupported checkpoint format_version");
    Checkpoint ckpt;
    ckpt.format_version = 1;
    ckpt.n_qubits = j.at("n_qubits").get<int>();
    ckpt.n_classes = j.at("n_classes").get<int>();
    for (const json& cj : j.at("circuits")) {
        reject_unknown_keys(cj, {"n_qsc", "depth", "n_params", "gates"}, "circuit");
        ShadowCircuit c;
        c.n_qsc = cj.at("n_qsc").get<int>();
        c.depth = cj.at("depth").get<int>();
        c.n_params = cj.at("n_params").get<int>();
        for (const json& gj : cj.at("gates")) c.gates.push_back(gate_from_json(gj));
        ckpt.ensemble.circuits.push_back(std::move(c));
    }
    for (const json& tj : j.at("thetas"))
        ckpt.ensemble.thetas.push_back(vector_from_json(tj, "theta vector"));
    const json& head = j.at("head");
    reject_unknown_keys(head, {"n_classes", "w", "b"}, "head");
    ckpt.head.n_classes = head.at("n_classes").get<int>();
    const json& wrows = head.at("w");
    if (!wrows.is_array() || wrows.empty()) throw ParseError("head w must be a 2D array");
    long cols = -1;
    for (std::size_t r = 0; r < wrows.size(); ++r) {
        Vector row = vector_from_json(wrows[r], "head w row");
        if (cols < 0) {
            cols = row.size();
            ckpt.head.w.resize(static_cast<long>(wrows.size()), cols);
        } else if (row.size() != cols) {
            throw ParseError("head w rows have unequal lengths");
        }
        ckpt.head.w.row(static_cast<long>(r)) = row.transpose();
    }
    ckpt.head.b = vector_from_json(head.at("b"), "head b");
    ckpt.config = j.value("config", json::object());
    if (j.contains("history")) {
        for (const json& row : j.at("history")) {
            if (!row.is_array() || row.size() != 4)
                throw ParseError("history rows must be [iteration, loss, train_acc, val_acc]");
            ckpt.history.push_back({row[0].get<long>(), row[1].get<double>(),
                                    row[2].get<double>(), row[3].get<double>()});
        }
    }
    try {
        ckpt.ensemble.validate();
        ckpt.head.validate();
        int windows = ckpt.ensemble.n_windows(ckpt.n_qubits);
        if (ckpt.head.w.cols() !=
            static_cast<long>(ckpt.ensemble.circuits.size()) * windows)
            throw DomainError("head width does not match the feature map");
    } catch (const DomainError& e) {
        throw ParseError(std::string("checkpoint content invalid: ") + e.what());
    }
    return ckpt;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw ConfigError("write to " + path + " failed");
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    save_json_file(dataset_to_json(dataset), path);
}

Dataset load_dataset(const std::string& path) {
    return dataset_from_json(load_json_file(path));
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    save_json_file(checkpoint_to_json(ckpt), path);
}

Checkpoint load_checkpoint(const std::string& path) {
    return checkpoint_from_json(load_json_file(path));
}

void save_metrics_csv(const std::vector<MetricsRow>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "iteration,loss,train_acc,val_acc\n";
    char buf[160];
    for (const MetricsRow& row : history) {
        std::snprintf(buf, sizeof(buf), "%ld,%.12g,%.8g,%.8g\n", row.iteration, row.loss,
                      row.train_acc, row.val_acc);
        out << buf;
    }
    if (!out) throw ConfigError("write to " + path + " failed");
}

} // namespace vsql
