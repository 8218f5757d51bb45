#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "vsql/serialize.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kDir = "/tmp/vsql_cli_test";

std::string binary() {
    const char* bin = std::getenv("VSQL_BIN");
    REQUIRE(bin != nullptr);
    return bin;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    std::string log = kDir + "/last_output.txt";
    std::string cmd = binary() + " " + args + " > " + log + " 2>&1";
    int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json tiny_train_config() {
    return json{{"experiment", "qsd-binary"},
                {"dataset",
                 {{"count_class0", 6}, {"count_class1", 10}, {"seed", 3}}},
                {"ansatz", {{"kind", "qsd"}, {"n_circuits", 1}}},
                {"train",
                 {{"learning_rate", 0.1},
                  {"batch_size", 4},
                  {"epochs", 3},
                  {"seed", 5},
                  {"eval_every", 2}}}};
}

} // namespace

TEST_CASE("cli basics: help and argument errors") {
    fs::create_directories(kDir);
    CHECK(run_cli("--help") == 0);
    std::string out;
    CHECK(run_cli("", &out) == 2);
    CHECK(run_cli("trian", &out) == 2); // unknown subcommand
    CHECK(run_cli("train", &out) == 2); // missing required options
    CHECK(run_cli("verify nonsense", &out) == 2);
    CHECK(run_cli("gen nonsense --out " + kDir + "/x.json", &out) == 2);
    CHECK(run_cli("baseline tetris", &out) == 2);
}

TEST_CASE("cli gen writes a loadable dataset and rejects bad configs") {
    fs::create_directories(kDir);
    std::string cfg_path = kDir + "/gen_cfg.json";
    write_json(cfg_path, json{{"count_class0", 5}, {"count_class1", 7}, {"seed", 2}});
    std::string data_path = kDir + "/qsd.json";
    CHECK(run_cli("gen qsd-binary --config " + cfg_path + " --out " + data_path) == 0);

    vsql::Dataset data = vsql::load_dataset(data_path);
    CHECK(data.train.size() + data.val.size() == 12);
    CHECK(data.n_qubits == 2);

    write_json(cfg_path, json{{"count_class0", 5}, {"whoops", 1}});
    std::string out;
    CHECK(run_cli("gen qsd-binary --config " + cfg_path + " --out " + data_path, &out) == 2);
    CHECK(out.find("whoops") != std::string::npos);

    std::ofstream(cfg_path) << "{ not json";
    CHECK(run_cli("gen qsd-binary --config " + cfg_path + " --out " + data_path, &out) == 2);

    CHECK(run_cli("gen qsd-binary --out " + kDir + "/default.json") == 0);

    // mnist generation without cached files reports a config problem
    write_json(cfg_path, json{{"data_dir", kDir + "/no_mnist_here"}});
    CHECK(run_cli("gen mnist --config " + cfg_path, &out) == 2);
}

TEST_CASE("cli train produces a checkpoint, metrics and a reusable model") {
    fs::create_directories(kDir);
    std::string cfg_path = kDir + "/train_cfg.json";
    write_json(cfg_path, tiny_train_config());
    std::string ckpt_path = kDir + "/model.json";

    std::string out;
    REQUIRE(run_cli("train --config " + cfg_path + " --out " + ckpt_path, &out) == 0);
    INFO(out);

    vsql::Checkpoint ckpt = vsql::load_checkpoint(ckpt_path);
    CHECK(ckpt.n_qubits == 2);
    CHECK(ckpt.n_classes == 2);
    CHECK(!ckpt.history.empty());
    CHECK(ckpt.config.at("experiment") == "qsd-binary");

    std::string metrics = slurp(kDir + "/model.metrics.csv");
    CHECK(metrics.rfind("iteration,loss,train_acc,val_acc\n", 0) == 0);

    // unknown keys anywhere in the config are rejected
    json bad = tiny_train_config();
    bad["train"]["momentum"] = 0.9;
    write_json(cfg_path, bad);
    CHECK(run_cli("train --config " + cfg_path + " --out " + ckpt_path, &out) == 2);
    CHECK(out.find("momentum") != std::string::npos);

    json bad2 = tiny_train_config();
    bad2["optimizer"] = "adam"; // top-level key that belongs under "train"
    write_json(cfg_path, bad2);
    CHECK(run_cli("train --config " + cfg_path + " --out " + ckpt_path, &out) == 2);
}

TEST_CASE("cli eval is deterministic and validates its inputs") {
    fs::create_directories(kDir);
    std::string cfg_path = kDir + "/train_cfg2.json";
    write_json(cfg_path, tiny_train_config());
    std::string ckpt_path = kDir + "/model2.json";
    REQUIRE(run_cli("train --config " + cfg_path + " --out " + ckpt_path) == 0);

    std::string gen_cfg = kDir + "/gen_cfg2.json";
    write_json(gen_cfg, json{{"count_class0", 6}, {"count_class1", 6}, {"seed", 8}});
    std::string data_path = kDir + "/eval_data.json";
    REQUIRE(run_cli("gen qsd-binary --config " + gen_cfg + " --out " + data_path) == 0);

    std::string r1 = kDir + "/eval1.json", r2 = kDir + "/eval2.json";
    std::string out1, out2;
    CHECK(run_cli("eval --ckpt " + ckpt_path + " --data " + data_path + " --split all --out " +
                      r1,
                  &out1) == 0);
    CHECK(run_cli("eval --ckpt " + ckpt_path + " --data " + data_path + " --split all --out " +
                      r2,
                  &out2) == 0);
    CHECK(out1 == out2);
    CHECK(slurp(r1) == slurp(r2));

    json report = json::parse(slurp(r1));
    CHECK(report.at("samples") == 12);
    CHECK(report.at("confusion").size() == 2);

    // register mismatch: a 3-qubit dataset against the 2-qubit model
    std::string noisy_cfg = kDir + "/noisy_cfg.json";
    write_json(noisy_cfg, json{{"per_class", 4}, {"seed", 1}});
    std::string noisy_path = kDir + "/noisy.json";
    REQUIRE(run_cli("gen noisy --config " + noisy_cfg + " --out " + noisy_path) == 0);
    std::string out;
    CHECK(run_cli("eval --ckpt " + ckpt_path + " --data " + noisy_path, &out) == 2);

    // corrupted checkpoint
    std::string broken = kDir + "/broken.json";
    std::ofstream(broken) << "{\"format\": \"vsql-checkpoint\"}";
    CHECK(run_cli("eval --ckpt " + broken + " --data " + data_path, &out) == 2);

    CHECK(run_cli("eval --ckpt " + ckpt_path + " --data " + data_path + " --split nope",
                  &out) == 2);
}

TEST_CASE("cli verify runs the fast checks and writes reports") {
    fs::create_directories(kDir);
    std::string rep = kDir + "/corollary1.json";
    std::string out;
    CHECK(run_cli("verify corollary1 --out " + rep, &out) == 0);
    CHECK(out.find("PASS") != std::string::npos);
    json report = json::parse(slurp(rep));
    CHECK(report.at("passed") == true);

    std::string cfg_path = kDir + "/verify_cfg.json";
    write_json(cfg_path, json{{"theta_steps", 5}, {"uv_steps", 11}});
    CHECK(run_cli("verify theorem3 --config " + cfg_path) == 0);

    std::string csv = kDir + "/landscape.csv";
    write_json(cfg_path, json{{"n_qubits", 8}, {"grid", 5}, {"csv_out", csv}});
    CHECK(run_cli("verify landscape --config " + cfg_path) == 0);
    CHECK(slurp(csv).rfind("theta1,theta2,loss\n", 0) == 0);

    write_json(cfg_path, json{{"grid", 5}, {"bogus", 1}});
    CHECK(run_cli("verify landscape --config " + cfg_path, &out) == 2);
}
