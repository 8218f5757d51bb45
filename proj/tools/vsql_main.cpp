#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vsql/analysis.hpp"
#include "vsql/serialize.hpp"
#include "vsql/threading.hpp"

using nlohmann::json;

namespace {

using namespace vsql;

TrainConfig parse_train_block(const json& j) {
    reject_unknown_keys(j,
                        {"learning_rate", "batch_size", "epochs", "optimizer", "seed", "shots",
                         "stop_tolerance", "max_iterations", "eval_every"},
                        "train block");
    TrainConfig cfg;
    cfg.learning_rate = j.value("learning_rate", 0.01);
    cfg.batch_size = j.value("batch_size", 20);
    cfg.epochs = j.value("epochs", 1);
    std::string opt = j.value("optimizer", "adam");
    if (opt == "adam")
        cfg.optimizer = Optimizer::Adam;
    else if (opt == "sgd")
        cfg.optimizer = Optimizer::Sgd;
    else
        throw ConfigError("optimizer must be \"adam\" or \"sgd\"");
    cfg.seed = j.value("seed", 0ull);
    if (j.contains("shots")) {
        const json& sj = j.at("shots");
        reject_unknown_keys(sj, {"mode", "shots", "seed"}, "shots block");
        std::string mode = sj.value("mode", "exact");
        if (mode == "exact")
            cfg.shots.mode = ShotMode::Exact;
        else if (mode == "sampled")
            cfg.shots.mode = ShotMode::Sampled;
        else
            throw ConfigError("shot mode must be \"exact\" or \"sampled\"");
        cfg.shots.shots = sj.value("shots", 0l);
        cfg.shots.seed = sj.value("seed", 0ull);
    }
    cfg.stop_tolerance = j.value("stop_tolerance", 0.0);
    cfg.max_iterations = j.value("max_iterations", 0l);
    cfg.eval_every = j.value("eval_every", 1);
    cfg.validate();
    return cfg;
}

QsdConfig parse_qsd_block(const json& j) {
    reject_unknown_keys(j,
                        {"count_class0", "count_class1", "count_class2", "range_min",
                         "range_max", "train_fraction", "seed"},
                        "dataset block");
    QsdConfig cfg;
    cfg.count_class0 = j.value("count_class0", 100);
    cfg.count_class1 = j.value("count_class1", 200);
    cfg.count_class2 = j.value("count_class2", 100);
    cfg.range_min = j.value("range_min", 0.0);
    cfg.range_max = j.value("range_max", 1.0);
    cfg.train_fraction = j.value("train_fraction", 0.8);
    cfg.seed = j.value("seed", 0ull);
    cfg.validate();
    return cfg;
}

NoisyConfig parse_noisy_block(const json& j) {
    reject_unknown_keys(
        j, {"noise_cap", "per_class", "train_fraction", "shared_unitary", "seed"},
        "dataset block");
    NoisyConfig cfg;
    cfg.noise_cap = j.value("noise_cap", 0.5);
    cfg.per_class = j.value("per_class", 40);
    cfg.train_fraction = j.value("train_fraction", 0.5);
    cfg.shared_unitary = j.value("shared_unitary", true);
    cfg.seed = j.value("seed", 0ull);
    cfg.validate();
    return cfg;
}

bool is_mnist_experiment(const std::string& experiment) {
    return experiment == "mnist-binary" || experiment == "mnist-ten";
}

Dataset build_dataset(const std::string& experiment, const json& dj,
                      const std::string& cli_data_dir) {
    if (dj.contains("path")) {
        reject_unknown_keys(dj, {"path"}, "dataset block");
        return load_dataset(dj.at("path").get<std::string>());
    }
    if (experiment == "qsd-binary") return gen_qsd_binary(parse_qsd_block(dj));
    if (experiment == "qsd-three") return gen_qsd_three(parse_qsd_block(dj));
    if (experiment == "noisy") return gen_noisy_pair(parse_noisy_block(dj));
    if (is_mnist_experiment(experiment)) {
        reject_unknown_keys(dj, {"data_dir", "train_limit", "seed"}, "dataset block");
        std::string dir = resolve_data_dir(cli_data_dir, dj.value("data_dir", ""));
        MnistData data = load_mnist(dir);
        return mnist_dataset(data, experiment == "mnist-binary", dj.value("train_limit", 0),
                             dj.value("seed", 0ull));
    }
    throw ConfigError("unknown experiment \"" + experiment + "\"");
}

ShadowCircuit build_circuit(const std::string& experiment, const json& aj) {
    reject_unknown_keys(aj, {"kind", "n_qsc", "depth", "n_layers", "n_circuits"},
                        "ansatz block");
    std::string kind =
        aj.value("kind", is_mnist_experiment(experiment) || experiment == "noisy"
                             ? std::string("image")
                             : std::string("qsd"));
    if (kind == "qsd") {
        if (aj.value("n_qsc", 1) != 1 || aj.value("depth", 0) != 0)
            throw ConfigError("the qsd ansatz is fixed at n_qsc = 1, depth = 0");
        return build_ansatz_qsd();
    }
    if (kind == "image")
        return build_ansatz_mnist(aj.value("n_qsc", 2), aj.value("depth", 1));
    if (kind == "ry-cnot")
        return build_ansatz_ry_cnot(aj.value("n_qsc", 2), aj.value("n_layers", 2));
    throw ConfigError("ansatz kind must be \"qsd\", \"image\" or \"ry-cnot\"");
}

std::string derive_metrics_path(const std::string& out_path) {
    std::string stem = out_path;
    if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json")
        stem = stem.substr(0, stem.size() - 5);
    return stem + ".metrics.csv";
}

void print_history_summary(const std::vector<MetricsRow>& history) {
    if (history.empty()) return;
    std::size_t step = std::max<std::size_t>(1, history.size() / 10);
    for (std::size_t k = 0; k < history.size(); k += step) {
        const MetricsRow& row = history[k];
        std::printf("iter %6ld  loss %.6f  train_acc %.4f  val_acc %.4f\n", row.iteration,
                    row.loss, row.train_acc, row.val_acc);
    }
    const MetricsRow& last = history.back();
    std::printf("final iter %ld  loss %.6f  train_acc %.4f  val_acc %.4f\n", last.iteration,
                last.loss, last.train_acc, last.val_acc);
}

int cmd_train(const std::string& config_path, const std::string& out_path,
              const std::string& metrics_path, long seed_override,
              const std::string& data_dir) {
    json cfg = load_json_file(config_path);
    reject_unknown_keys(cfg, {"experiment", "dataset", "ansatz", "train", "metrics_out"},
                        "config");
    if (!cfg.contains("experiment")) throw ConfigError("config needs an experiment");
    std::string experiment = cfg.at("experiment").get<std::string>();

    Dataset dataset =
        build_dataset(experiment, cfg.value("dataset", json::object()), data_dir);
    json aj = cfg.value("ansatz", json::object());
    ShadowCircuit circuit = build_circuit(experiment, aj);
    int n_circuits = aj.value("n_circuits", 1);

    TrainConfig tcfg = parse_train_block(cfg.value("train", json::object()));
    if (seed_override >= 0) tcfg.seed = static_cast<std::uint64_t>(seed_override);

    Rng init_rng(mix_seed(tcfg.seed, {0x1417ull}));
    ShadowEnsemble ensemble = init_ensemble(circuit, n_circuits, init_rng);
    int features = static_cast<int>(ensemble.circuits.size()) *
                   ensemble.n_windows(dataset.n_qubits);
    ClassifierHead head = init_head(dataset.n_classes, features, init_rng);

    std::printf("experiment %s: %zu train / %zu val samples, %ld trainable parameters\n",
                experiment.c_str(), dataset.train.size(), dataset.val.size(),
                count_parameters(dataset.n_qubits, ensemble,
                                 dataset.n_classes == 2 ? 1 : dataset.n_classes));

    Checkpoint ckpt = fit(dataset, ensemble, head, tcfg);
    ckpt.config["experiment"] = experiment;

    save_checkpoint(ckpt, out_path);
    std::string mpath = !metrics_path.empty()
                            ? metrics_path
                            : (cfg.contains("metrics_out")
                                   ? cfg.at("metrics_out").get<std::string>()
                                   : derive_metrics_path(out_path));
    save_metrics_csv(ckpt.history, mpath);
    print_history_summary(ckpt.history);
    std::printf("checkpoint: %s\nmetrics: %s\n", out_path.c_str(), mpath.c_str());
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& split, const std::string& out_path,
             const std::string& data_dir) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    json dj = load_json_file(data_path);
    Dataset dataset;
    if (dj.contains("format") && dj.at("format") == "vsql-dataset") {
        dataset = dataset_from_json(dj);
    } else {
        reject_unknown_keys(dj, {"experiment", "dataset", "ansatz", "train", "metrics_out"},
                            "config");
        if (!dj.contains("experiment"))
            throw ConfigError("eval data must be a dataset file or a config with an experiment");
        dataset = build_dataset(dj.at("experiment").get<std::string>(),
                                dj.value("dataset", json::object()), data_dir);
    }

    std::vector<LabeledState> samples;
    if (split == "train")
        samples = dataset.train;
    else if (split == "val")
        samples = dataset.val;
    else if (split == "all") {
        samples = dataset.train;
        samples.insert(samples.end(), dataset.val.begin(), dataset.val.end());
    } else {
        throw ConfigError("split must be train, val or all");
    }
    if (samples.empty()) throw ConfigError("selected split is empty");

    EvalResult result = infer(samples, ckpt);
    std::printf("samples %zu  accuracy %.6f  mean_loss %.6f\n", samples.size(),
                result.accuracy, result.mean_loss);
    std::printf("confusion (rows true, cols predicted):\n");
    for (long r = 0; r < result.confusion.rows(); ++r) {
        for (long c = 0; c < result.confusion.cols(); ++c)
            std::printf("%8d", result.confusion(r, c));
        std::printf("\n");
    }
    if (!out_path.empty()) {
        json out;
        out["samples"] = samples.size();
        out["accuracy"] = result.accuracy;
        out["mean_loss"] = result.mean_loss;
        json conf = json::array();
        for (long r = 0; r < result.confusion.rows(); ++r) {
            json row = json::array();
            for (long c = 0; c < result.confusion.cols(); ++c)
                row.push_back(result.confusion(r, c));
            conf.push_back(std::move(row));
        }
        out["confusion"] = std::move(conf);
        save_json_file(out, out_path);
    }
    return 0;
}

void print_report(const VerifierReport& report) {
    for (const CheckItem& c : report.checks)
        std::printf("[%s] %s: measured %.6g (bound %.6g)\n", c.pass ? "ok" : "FAIL",
                    c.name.c_str(), c.measured, c.bound);
    std::printf("%s: %s\n", report.verifier.c_str(), report.passed ? "PASS" : "FAIL");
}

int cmd_verify(const std::string& which, const std::string& config_path,
               const std::string& out_path) {
    json cfg = config_path.empty() ? json::object() : load_json_file(config_path);
    VerifierReport report;

    if (which == "theorem3") {
        reject_unknown_keys(cfg, {"theta_steps", "uv_steps"}, "verifier config");
        report = verify_theorem3(cfg.value("theta_steps", 25), cfg.value("uv_steps", 101));
    } else if (which == "corollary1") {
        reject_unknown_keys(cfg, {}, "verifier config");
        report = verify_corollary1();
    } else if (which == "bp-scan") {
        reject_unknown_keys(cfg, {"n_list", "nqsc_list", "trials", "n_layers", "seed", "csv_out"},
                            "verifier config");
        BpScanConfig bp;
        if (cfg.contains("n_list")) bp.n_list = cfg.at("n_list").get<std::vector<int>>();
        if (cfg.contains("nqsc_list"))
            bp.nqsc_list = cfg.at("nqsc_list").get<std::vector<int>>();
        bp.trials = cfg.value("trials", 1000);
        bp.n_layers = cfg.value("n_layers", 2);
        bp.seed = cfg.value("seed", 0ull);
        std::vector<BpScanRow> rows = bp_variance_scan(bp);
        if (cfg.contains("csv_out")) save_bp_csv(rows, cfg.at("csv_out").get<std::string>());

        report.verifier = "bp-scan";
        double worst_mean = 0.0;
        for (const BpScanRow& r : rows) worst_mean = std::max(worst_mean, std::abs(r.mean));
        report.checks.push_back({"max |gradient mean| across cells", worst_mean, 0.05,
                                 worst_mean <= 0.05});
        for (int m : bp.nqsc_list) {
            double lo = 1e300, hi = 0.0;
            for (const BpScanRow& r : rows)
                if (r.n_qsc == m) {
                    lo = std::min(lo, r.variance);
                    hi = std::max(hi, r.variance);
                }
            double ratio = lo > 0 ? hi / lo : 1e300;
            report.checks.push_back(
                {"variance spread across register sizes at n_qsc=" + std::to_string(m) +
                     " (factor)",
                 ratio, 3.0, ratio <= 3.0});
        }
        if (bp.nqsc_list.size() >= 2) {
            auto mean_var = [&](int m) {
                double acc = 0.0;
                int cnt = 0;
                for (const BpScanRow& r : rows)
                    if (r.n_qsc == m) {
                        acc += r.variance;
                        ++cnt;
                    }
                return acc / std::max(1, cnt);
            };
            double ratio = mean_var(bp.nqsc_list[0]) / mean_var(bp.nqsc_list[1]);
            bool ok = ratio >= 2.0 && ratio <= 9.0;
            report.checks.push_back({"variance ratio n_qsc=" + std::to_string(bp.nqsc_list[0]) +
                                         " over n_qsc=" + std::to_string(bp.nqsc_list[1]) +
                                         " (band [2, 9])",
                                     ratio, 9.0, ok});
        }
        report.passed = true;
        for (const CheckItem& c : report.checks) report.passed = report.passed && c.pass;
    } else if (which == "landscape") {
        reject_unknown_keys(cfg, {"n_qubits", "n_qsc", "n_layers", "grid", "seed", "csv_out"},
                            "verifier config");
        LandscapeConfig lc;
        lc.n_qubits = cfg.value("n_qubits", 50);
        lc.n_qsc = cfg.value("n_qsc", 2);
        lc.n_layers = cfg.value("n_layers", 2);
        lc.grid = cfg.value("grid", 60);
        lc.seed = cfg.value("seed", 0ull);
        LandscapeResult result = landscape_slice(lc);
        if (cfg.contains("csv_out"))
            save_landscape_csv(result, cfg.at("csv_out").get<std::string>());

        report.verifier = "landscape";
        bool finite = result.loss.allFinite();
        double lo = result.loss.minCoeff(), hi = result.loss.maxCoeff();
        long cells = result.loss.size();
        report.checks.push_back({"all grid losses finite", finite ? 0.0 : 1.0, 0.0, finite});
        report.checks.push_back({"min loss >= 0", lo, 0.0, lo >= 0.0});
        report.checks.push_back({"max loss <= 0.5", hi, 0.5, hi <= 0.5});
        report.checks.push_back(
            {"grid cell count", static_cast<double>(cells),
             static_cast<double>(static_cast<long>(lc.grid) * lc.grid),
             cells == static_cast<long>(lc.grid) * lc.grid});
        report.passed = true;
        for (const CheckItem& c : report.checks) report.passed = report.passed && c.pass;
    } else {
        throw ConfigError("unknown verifier \"" + which +
                          "\" (theorem3, corollary1, bp-scan, landscape)");
    }

    print_report(report);
    if (!out_path.empty()) save_json_file(report_to_json(report), out_path);
    return report.passed ? 0 : 1;
}

int cmd_gen(const std::string& kind, const std::string& config_path,
            const std::string& out_path, const std::string& data_dir) {
    json cfg = config_path.empty() ? json::object() : load_json_file(config_path);

    if (kind == "mnist") {
        if (!out_path.empty())
            throw ConfigError("gen mnist caches into the data directory; --out is not used");
        reject_unknown_keys(cfg, {"data_dir", "download"}, "gen config");
        std::string dir = resolve_data_dir(data_dir, cfg.value("data_dir", ""));
        if (!mnist_files_present(dir)) {
            if (!cfg.value("download", false))
                throw ConfigError("canonical IDX files missing under " + dir +
                                  "; set \"download\": true or place them manually");
            fetch_mnist(dir);
        }
        MnistData data = load_mnist(dir);
        std::printf("mnist verified under %s: %ld train / %ld test images\n", dir.c_str(),
                    data.train.images.count(), data.test.images.count());
        return 0;
    }

    if (out_path.empty()) throw ConfigError("gen needs --out for the dataset file");
    Dataset dataset;
    if (kind == "qsd-binary")
        dataset = gen_qsd_binary(parse_qsd_block(cfg));
    else if (kind == "qsd-three")
        dataset = gen_qsd_three(parse_qsd_block(cfg));
    else if (kind == "noisy")
        dataset = gen_noisy_pair(parse_noisy_block(cfg));
    else
        throw ConfigError("unknown generator \"" + kind +
                          "\" (qsd-binary, qsd-three, noisy, mnist)");
    save_dataset(dataset, out_path);
    std::printf("wrote %zu train / %zu val samples to %s\n", dataset.train.size(),
                dataset.val.size(), out_path.c_str());
    return 0;
}

int cmd_baseline(const std::string& config_path, const std::string& metrics_path,
                 const std::string& data_dir) {
    json cfg = config_path.empty() ? json::object() : load_json_file(config_path);
    reject_unknown_keys(cfg, {"data_dir", "train_limit", "seed", "train"}, "baseline config");
    std::string dir = resolve_data_dir(data_dir, cfg.value("data_dir", ""));
    MnistData data = load_mnist(dir);
    VectorDataset vectors =
        mnist_vector_dataset(data, cfg.value("train_limit", 0), cfg.value("seed", 0ull));
    TrainConfig tcfg = parse_train_block(cfg.value("train", json::object()));
    std::vector<MetricsRow> history;
    double acc = classical_baseline_fit(vectors, tcfg, &history);
    if (!metrics_path.empty()) save_metrics_csv(history, metrics_path);
    std::printf("baseline test accuracy %.6f (%ld train / %ld test)\n", acc,
                vectors.train_x.rows(), vectors.test_x.rows());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational shadow quantum learning simulator and trainer"};
    app.require_subcommand(1);

    std::string config_path, out_path, metrics_path, data_dir, ckpt_path, data_path;
    std::string split = "val";
    std::string which;
    long seed_override = -1;
    int threads = 0;

    CLI::App* train = app.add_subcommand("train", "train a model from a JSON config");
    train->add_option("--config", config_path, "config JSON")->required();
    train->add_option("--out", out_path, "checkpoint JSON to write")->required();
    train->add_option("--metrics-out", metrics_path, "metrics CSV path");
    train->add_option("--seed", seed_override, "override the config seed");
    train->add_option("--threads", threads, "worker threads (0 = hardware)");
    train->add_option("--data-dir", data_dir, "dataset root override");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--ckpt", ckpt_path, "checkpoint JSON")->required();
    eval->add_option("--data", data_path, "dataset JSON or config JSON")->required();
    eval->add_option("--split", split, "train, val or all (default val)");
    eval->add_option("--out", out_path, "metrics JSON to write");
    eval->add_option("--threads", threads, "worker threads (0 = hardware)");
    eval->add_option("--data-dir", data_dir, "dataset root override");

    CLI::App* verify = app.add_subcommand("verify", "run an empirical verifier");
    verify->add_option("verifier", which, "theorem3, corollary1, bp-scan or landscape")
        ->required();
    verify->add_option("--config", config_path, "verifier config JSON");
    verify->add_option("--out", out_path, "report JSON to write");
    verify->add_option("--threads", threads, "worker threads (0 = hardware)");

    CLI::App* gen = app.add_subcommand("gen", "generate or verify a dataset");
    gen->add_option("kind", which, "qsd-binary, qsd-three, noisy or mnist")->required();
    gen->add_option("--config", config_path, "generator config JSON");
    gen->add_option("--out", out_path, "dataset JSON to write");
    gen->add_option("--data-dir", data_dir, "dataset root override (mnist)");

    CLI::App* baseline = app.add_subcommand("baseline", "train the classical reference model");
    baseline->add_option("task", which, "only \"mnist\" is available")->required();
    baseline->add_option("--config", config_path, "baseline config JSON");
    baseline->add_option("--metrics-out", metrics_path, "metrics CSV path");
    baseline->add_option("--threads", threads, "worker threads (0 = hardware)");
    baseline->add_option("--data-dir", data_dir, "dataset root override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        vsql::set_thread_count(threads);
        if (app.got_subcommand(train))
            return cmd_train(config_path, out_path, metrics_path, seed_override, data_dir);
        if (app.got_subcommand(eval))
            return cmd_eval(ckpt_path, data_path, split, out_path, data_dir);
        if (app.got_subcommand(verify)) return cmd_verify(which, config_path, out_path);
        if (app.got_subcommand(gen)) return cmd_gen(which, config_path, out_path, data_dir);
        if (app.got_subcommand(baseline)) {
            if (which != "mnist") throw vsql::ConfigError("only the mnist baseline exists");
            return cmd_baseline(config_path, metrics_path, data_dir);
        }
    } catch (const vsql::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const vsql::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
