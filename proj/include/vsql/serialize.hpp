#pragma once

#include <string>

#include <json.hpp>

#include "vsql/train.hpp"

namespace vsql {

// Dataset JSON: {"format": "vsql-dataset", "format_version": 1, "n_qubits",
// "n_classes", "qubit_ordering", "train": [...], "val": [...]}. Pure states
// carry "amplitudes" as [re, im] pairs, mixed states carry "matrix" as a
// nested array of [re, im] pairs.
nlohmann::json dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j);
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

// Checkpoint JSON: format_version, qubit ordering note, circuits (gate
// lists), thetas, head, config snapshot, per-iteration history.
nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Metrics CSV with header "iteration,loss,train_acc,val_acc".
void save_metrics_csv(const std::vector<MetricsRow>& history, const std::string& path);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const nlohmann::json& j, const std::string& path);

// Strict-schema helper: throws ConfigError when j holds a key outside
// `allowed`. `where` names the object in the message.
void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& where);

std::string gate_kind_name(GateKind kind);
GateKind gate_kind_from_name(const std::string& name);

} // namespace vsql
