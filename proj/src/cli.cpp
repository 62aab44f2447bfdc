#include "neuim/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "neuim/error.hpp"

namespace neuim {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError(what + ": '" + text + "' is not a valid number");
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw ConfigError(what + " must be finite");
    }
    return value;
}

std::vector<double> parse_fraction_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto first = cell.find_first_not_of(' ');
        const auto last = cell.find_last_not_of(' ');
        if (first == std::string::npos) throw ConfigError("empty entry in fraction list '" + text + "'");
        out.push_back(parse_number<double>(cell.substr(first, last - first + 1), "fraction"));
    }
    if (out.empty()) throw ConfigError("fraction list is empty");
    return out;
}

void check_fraction(double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("data fraction " + fmt(f) + " outside [0, 1]");
}

// Fills unset fields of `cfg` from the config file's global keys.
void merge_file(RunConfig& cfg, const ConfigFile& file) {
    for (const auto& [key, value] : file.globals) {
        if (key == "preset") {
            if (!cfg.preset) cfg.preset = value;
        } else if (key == "out") {
            // handled by the caller, which knows whether --out was given
        } else if (key == "data_fraction") {
            if (!cfg.data_fraction) cfg.data_fraction = parse_number<double>(value, "data_fraction");
        } else if (key == "epochs") {
            if (!cfg.epochs) cfg.epochs = parse_number<int>(value, "epochs");
        } else if (key == "p_epochs") {
            if (!cfg.p_epochs) cfg.p_epochs = parse_number<int>(value, "p_epochs");
        } else if (key == "seed") {
            if (!cfg.seed) cfg.seed = parse_number<std::uint64_t>(value, "seed");
        } else if (key == "dt") {
            if (!cfg.dt) cfg.dt = parse_number<double>(value, "dt");
        } else if (key == "lm") {
            if (!cfg.lm) cfg.lm = parse_number<double>(value, "lm");
        } else if (key == "machine") {
            if (!cfg.machine) cfg.machine = value;
        } else if (key == "kind") {
            if (!cfg.kind) cfg.kind = value;
        } else if (key == "fractions") {
            if (cfg.fractions.empty()) cfg.fractions = parse_fraction_list(value);
        } else if (key == "model") {
            cfg.models.emplace_back(value);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

DatasetOptions dataset_options(const RunConfig& cfg) {
    DatasetOptions o;
    if (cfg.dt) {
        if (!(*cfg.dt > 0.0)) throw ConfigError("--dt must be > 0");
        o.dt = *cfg.dt;
    }
    if (cfg.lm) {
        if (!(*cfg.lm > 0.0)) throw ConfigError("--lm must be > 0");
        o.L_M = *cfg.lm;
    }
    o.machine = cfg.machine;
    return o;
}

// Dataset from the preset, or from the config file's scenario blocks.
Dataset load_dataset(const RunConfig& cfg, const std::optional<ConfigFile>& file, const std::string& fallback) {
    const DatasetOptions options = dataset_options(cfg);
    if (cfg.preset) return build_preset(*cfg.preset, options);
    if (file && !file->scenarios.empty()) {
        const std::string name = cfg.config ? cfg.config->stem().string() : "config";
        return build_dataset(name, Split::Train, config_scenarios(*file, options));
    }
    if (!fallback.empty()) return build_preset(fallback, options);
    throw ConfigError("no dataset: give --preset or a --config with scenario blocks");
}

HybridConfig hybrid_config(const RunConfig& cfg) {
    HybridConfig h;
    if (cfg.epochs) {
        if (*cfg.epochs < 0) throw ConfigError("--epochs must be >= 0");
        h.epochs = *cfg.epochs;
        h.p_epochs = *cfg.epochs / 2;
    }
    if (cfg.p_epochs) {
        if (*cfg.p_epochs < 0) throw ConfigError("--p-epochs must be >= 0");
        h.p_epochs = *cfg.p_epochs;
    }
    if (cfg.seed) h.seed = *cfg.seed;
    return h;
}

std::uint64_t required_seed(const RunConfig& cfg) {
    if (!cfg.seed) throw ConfigError(cfg.subcommand + " requires --seed");
    return *cfg.seed;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create directory '" + dir.string() + "': " + ec.message());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    writer(out);
    if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

std::string percent(double fraction) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%g", fraction * 100.0);
    return buf;
}

int cmd_simulate(const RunConfig& cfg, const std::optional<ConfigFile>& file, std::ostream& out) {
    const Dataset ds = load_dataset(cfg, file, "");
    ensure_dir(cfg.out);
    for (const auto& e : ds.entries) {
        const Trajectory& t = e.trajectory;
        const fs::path path = cfg.out / (file_stem(t.name) + ".csv");
        write_trajectory(path, t);
        double peak = 0.0;
        for (const Abc& i : t.i_abcs) peak = std::max(peak, std::abs(i.a));
        out << t.name << ": steps=" << t.size() - 1 << " final_omega_r=" << fmt(t.omega_r.back())
            << " peak_abs_i_a=" << fmt(peak) << " file=" << path.string() << '\n';
    }
    return 0;
}

int cmd_build_dataset(const RunConfig& cfg, const std::optional<ConfigFile>& file, std::ostream& out) {
    Dataset ds = load_dataset(cfg, file, "");
    ds.set_data_fraction(cfg.data_fraction.value_or(0.0));
    ensure_dir(cfg.out);
    write_file(cfg.out / "dataset.csv", [&](std::ostream& os) {
        os << "name,kind,split,supervised,dt,points,file\n";
        for (const auto& e : ds.entries) {
            const std::string name = file_stem(e.trajectory.name) + ".csv";
            os << e.trajectory.name << ',' << to_string(e.trajectory.kind) << ',' << to_string(ds.split) << ','
               << (e.supervised ? 1 : 0) << ',' << fmt(e.trajectory.dt) << ',' << e.trajectory.size() << ',' << name
               << '\n';
        }
    });
    for (const auto& e : ds.entries) write_trajectory(cfg.out / (file_stem(e.trajectory.name) + ".csv"), e.trajectory);
    out << ds.name << ": " << ds.entries.size() << " trajectories written to " << cfg.out.string() << '\n';
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::optional<ConfigFile>& file, std::ostream& out) {
    HybridConfig h = hybrid_config(cfg);
    h.seed = required_seed(cfg);
    if (cfg.data_driven) {
        if (cfg.data_fraction && *cfg.data_fraction != 1.0) {
            throw ConfigError("the data-driven baseline needs every trajectory supervised");
        }
        h.data_fraction = 1.0;
        h.physics_weight = 0.0;
        h.supervised_p = true;
    } else {
        h.data_fraction = cfg.data_fraction.value_or(0.0);
        check_fraction(h.data_fraction);
    }
    const Dataset ds = load_dataset(cfg, file, "");
    std::vector<ScenarioKind> kinds;
    if (cfg.kind) kinds.push_back(parse_scenario_kind(*cfg.kind));
    const std::vector<const Trajectory*> trajs = ds.trajectories(kinds);
    if (trajs.empty()) throw ConfigError("no training trajectories selected");

    const TrainResult<GModel> g = train_g(trajs, h);
    const TrainResult<PModel> p = train_p(g.model, trajs, h);
    ensure_dir(cfg.out);
    save_model(cfg.out / "g.json", g.model);
    save_model(cfg.out / "p.json", p.model);
    write_file(cfg.out / "loss_history.csv", [&](std::ostream& os) { write_loss_history(os, g.history); });
    write_file(cfg.out / "p_loss_history.csv", [&](std::ostream& os) { write_loss_history(os, p.history); });
    const auto last = [](const LossHistory& hist) { return hist.empty() ? std::string("n/a") : fmt(hist.back().loss.total); };
    out << "method=" << g.model.info.method << " trajectories=" << trajs.size()
        << " supervised=" << supervised_count(h.data_fraction, trajs.size()) << " g_epochs=" << g.history.size()
        << " g_loss=" << last(g.history) << " p_epochs=" << p.history.size() << " p_loss=" << last(p.history) << '\n';
    return 0;
}

std::string method_label(const ModelInfo& info) {
    if (info.method == "data") return "data-driven";
    if (info.method == "physics") return "physics";
    if (info.method == "hybrid") return hybrid_label(info.data_fraction);
    return info.method;
}

int cmd_eval(const RunConfig& cfg, const std::optional<ConfigFile>& file, std::ostream& out) {
    if (cfg.models.empty()) throw ConfigError("eval needs at least one --model directory");
    const Dataset ds = load_dataset(cfg, file, "paper-test");
    std::vector<GModel> gs;
    std::vector<PModel> ps;
    gs.reserve(cfg.models.size());
    ps.reserve(cfg.models.size());
    std::vector<MethodModels> methods;
    for (const auto& dir : cfg.models) {
        gs.push_back(load_g_model(dir / "g.json"));
        ps.push_back(load_p_model(dir / "p.json"));
    }
    for (std::size_t i = 0; i < gs.size(); ++i) {
        std::string label = method_label(gs[i].info);
        for (const auto& m : methods) {
            if (m.label == label) label += " (" + cfg.models[i].filename().string() + ")";
        }
        methods.push_back({label, &gs[i], &ps[i], gs[i].info.kinds});
    }
    const EvalReport report = evaluate(methods, ds);
    ensure_dir(cfg.out);
    write_file(cfg.out / "eval.csv", [&](std::ostream& os) { write_eval_csv(os, report); });
    write_file(cfg.out / "eval.txt", [&](std::ostream& os) { write_eval_table(os, report); });
    write_eval_table(out, report);
    return 0;
}

int cmd_compare(const RunConfig& cfg, const std::optional<ConfigFile>& file, std::ostream& out) {
    CompareOptions options;
    options.base = hybrid_config(cfg);
    options.base.seed = required_seed(cfg);
    options.threads = thread_budget();
    std::vector<double> fractions = cfg.fractions.empty() ? std::vector<double>{0.75} : cfg.fractions;
    for (double f : fractions) check_fraction(f);
    if (file && !file->scenarios.empty()) throw ConfigError("compare uses the paper-train and paper-test presets");
    if (cfg.preset) throw ConfigError("compare uses the paper-train and paper-test presets; --preset is not accepted");

    // --lm applies to the test machines only; training always sees the nominal parameters.
    RunConfig train_cfg;
    train_cfg.dt = cfg.dt;
    const DatasetOptions train_options = dataset_options(train_cfg);
    train_cfg.lm = cfg.lm;
    const DatasetOptions test_options = dataset_options(train_cfg);
    const Dataset free_accel = build_preset("free-accel", train_options);
    const Dataset train = build_preset("paper-train", train_options);
    const Dataset test = build_preset("paper-test", test_options);

    const std::vector<TrainingGroup> groups = comparison_groups(free_accel, train, fractions);
    const CompareResult result = run_compare(groups, test, options);
    write_compare_outputs(cfg.out, result, test);
    write_eval_table(out, result.report);
    return 0;
}

}  // namespace

const Variant* CompareResult::find(const std::string& group, const std::string& label) const {
    for (const auto& v : variants) {
        if (v.group == group && v.label == label) return &v;
    }
    return nullptr;
}

std::string hybrid_label(double fraction) { return "hybrid " + percent(fraction) + "%"; }

std::vector<TrainingGroup> comparison_groups(const Dataset& free_accel, const Dataset& train,
                                             std::span<const double> fractions) {
    TrainingGroup tc{"tc", free_accel.trajectories(), {fractions.begin(), fractions.end()}};
    const ScenarioKind tc_kind[] = {ScenarioKind::TorqueChange};
    for (const Trajectory* t : train.trajectories(tc_kind)) tc.trajectories.push_back(t);
    const ScenarioKind fault_kind[] = {ScenarioKind::Fault};
    TrainingGroup fault{"fault", train.trajectories(fault_kind), {fractions.begin(), fractions.end()}};
    std::vector<TrainingGroup> out;
    for (auto* g : {&tc, &fault}) {
        if (!g->trajectories.empty()) out.push_back(std::move(*g));
    }
    return out;
}

CompareResult run_compare(std::span<const TrainingGroup> groups, const Dataset& test, const CompareOptions& options) {
    struct Job {
        const TrainingGroup* group;
        std::size_t variant;  // index into result.variants
    };
    CompareResult result;
    std::vector<Job> jobs;
    // Hybrid runs at fraction 0 are identical to the pure-physics run: (variant, source) pairs.
    std::vector<std::pair<std::size_t, std::size_t>> copies;
    for (const auto& group : groups) {
        auto add = [&](std::string label, HybridConfig cfg) {
            Variant v;
            v.group = group.name;
            std::string key = label;
            std::replace(key.begin(), key.end(), '%', 'p');
            v.key = file_stem(key);
            v.label = std::move(label);
            v.config = cfg;
            result.variants.push_back(std::move(v));
            return result.variants.size() - 1;
        };
        HybridConfig data = options.base;
        data.data_fraction = 1.0;
        data.physics_weight = 0.0;
        data.supervised_p = true;
        jobs.push_back({&group, add("data-driven", data)});
        HybridConfig physics = options.base;
        physics.data_fraction = 0.0;
        const std::size_t physics_index = add("physics", physics);
        jobs.push_back({&group, physics_index});
        for (double f : group.fractions) {
            HybridConfig hybrid = options.base;
            hybrid.data_fraction = f;
            const std::size_t index = add(hybrid_label(f), hybrid);
            if (supervised_count(f, group.trajectories.size()) == 0) {
                copies.emplace_back(index, physics_index);
            } else {
                jobs.push_back({&group, index});
            }
        }
    }

    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                Variant& v = result.variants[jobs[j].variant];
                const auto& trajs = jobs[j].group->trajectories;
                v.g = train_g(trajs, v.config);
                v.p = train_p(v.g.model, trajs, v.config);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(jobs.size(), 1));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (const auto& [dst, src] : copies) {
        Variant& v = result.variants[dst];
        v.g = result.variants[src].g;
        v.p = result.variants[src].p;
        v.g.model.info.data_fraction = v.config.data_fraction;
        v.p.model.info.data_fraction = v.config.data_fraction;
    }

    std::vector<MethodModels> methods;
    for (const auto& v : result.variants) methods.push_back({v.label, &v.g.model, &v.p.model, v.g.model.info.kinds});
    result.report = evaluate(methods, test);
    result.report.seed = options.base.seed;
    return result;
}

void write_loss_history(std::ostream& out, const LossHistory& history) {
    out << "epoch,L_physics,L_data,L_total\n";
    for (const auto& e : history) {
        out << e.epoch << ',' << fmt(e.loss.physics) << ',' << fmt(e.loss.data) << ',' << fmt(e.loss.total) << '\n';
    }
}

void write_series(std::ostream& out, const Trajectory& traj, const Eigen::MatrixXd& currents,
                  const Eigen::MatrixXd& rates) {
    const Eigen::MatrixXd truth_rates = finite_difference_derivative(traj.i_abcs, traj.dt);
    out << "t,iq_s_true,iq_s_pred,id_s_true,id_s_pred,i_a_true,i_a_pred,"
           "di_a_true,di_a_pred,di_b_true,di_b_pred,di_c_true,di_c_pred\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        const Abc i_pred = qd0_to_abc(traj.theta[k], {currents(0, c), currents(1, c), currents(2, c)});
        out << fmt(traj.t[k]) << ',' << fmt(traj.i_qd0s[k].q) << ',' << fmt(currents(0, c)) << ','
            << fmt(traj.i_qd0s[k].d) << ',' << fmt(currents(1, c)) << ',' << fmt(traj.i_abcs[k].a) << ','
            << fmt(i_pred.a);
        for (Eigen::Index r = 0; r < 3; ++r) out << ',' << fmt(truth_rates(r, c)) << ',' << fmt(rates(r, c));
        out << '\n';
    }
}

void write_compare_outputs(const fs::path& dir, const CompareResult& result, const Dataset& test) {
    ensure_dir(dir);
    ensure_dir(dir / "loss");
    ensure_dir(dir / "series");
    ensure_dir(dir / "models");
    write_file(dir / "mse_table.csv", [&](std::ostream& os) { write_eval_csv(os, result.report); });
    write_file(dir / "mse_table.txt", [&](std::ostream& os) { write_eval_table(os, result.report); });
    for (const auto& v : result.variants) {
        const std::string stem = v.group + "_" + v.key;
        write_file(dir / "loss" / (stem + "_g.csv"), [&](std::ostream& os) { write_loss_history(os, v.g.history); });
        write_file(dir / "loss" / (stem + "_p.csv"), [&](std::ostream& os) { write_loss_history(os, v.p.history); });
        ensure_dir(dir / "models" / stem);
        save_model(dir / "models" / stem / "g.json", v.g.model);
        save_model(dir / "models" / stem / "p.json", v.p.model);
        const auto& kinds = v.g.model.info.kinds;
        for (const auto& e : test.entries) {
            const Trajectory& t = e.trajectory;
            if (std::find(kinds.begin(), kinds.end(), t.kind) == kinds.end()) continue;
            const CurrentSequence seq = g_predict_all(v.g.model, t);
            const Eigen::MatrixXd rates = p_predict_all(v.p.model, t, seq.abcs);
            write_file(dir / "series" / (stem + "_" + file_stem(t.name) + ".csv"),
                       [&](std::ostream& os) { write_series(os, t, seq.qd0, rates); });
        }
    }
}

std::size_t thread_budget() {
    if (const char* env = std::getenv("NEUIM_THREADS"); env && *env) {
        const auto n = parse_number<long long>(env, "NEUIM_THREADS");
        if (n < 1) throw ConfigError("NEUIM_THREADS must be >= 1");
        return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Physics-informed neural induction machine model"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string preset, config_path, out_dir, machine, kind, fractions;
    double data_fraction = 0, dt = 0, lm = 0;
    int epochs = 0, p_epochs = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> models;
    bool data_driven = false;

    struct Flags {
        CLI::Option *preset, *config, *out, *fraction, *epochs, *p_epochs, *seed, *dt, *lm, *machine, *kind,
            *fractions, *models, *data_driven;
    };
    std::vector<std::pair<CLI::App*, Flags>> subs;
    const std::vector<std::pair<std::string, std::string>> names{
        {"simulate", "Simulate scenarios and write trajectory CSVs"},
        {"build-dataset", "Simulate a dataset and write its CSVs with a manifest"},
        {"train", "Train G then P and write g.json, p.json and loss_history.csv"},
        {"eval", "Evaluate trained models on a test dataset"},
        {"compare", "Train data-driven, physics and hybrid variants and tabulate test errors"}};
    for (const auto& [name, help] : names) {
        CLI::App* sub = app.add_subcommand(name, help);
        Flags f{};
        f.preset = sub->add_option("--preset", preset, "Dataset preset: free-accel, paper-train, paper-test");
        f.config = sub->add_option("--config", config_path, "Flat key = value config file");
        f.out = sub->add_option("--out", out_dir, "Output directory");
        f.fraction = sub->add_option("--data-fraction", data_fraction, "Fraction of supervised trajectories");
        f.epochs = sub->add_option("--epochs", epochs, "G epochs (P gets half unless --p-epochs)");
        f.p_epochs = sub->add_option("--p-epochs", p_epochs, "P epochs");
        f.seed = sub->add_option("--seed", seed, "Training seed");
        f.dt = sub->add_option("--dt", dt, "Time step [s]");
        f.lm = sub->add_option("--lm", lm, "Magnetizing inductance override [H]");
        f.machine = sub->add_option("--machine", machine, "Machine for free-accel and config scenarios")
                        ->check(CLI::IsMember({"small", "large"}));
        f.kind = sub->add_option("--kind", kind, "Train on one scenario kind: free-accel, tc, fault");
        f.fractions = sub->add_option("--fractions", fractions, "Comma-separated hybrid fractions");
        f.models = sub->add_option("--model", models, "Model directory holding g.json and p.json");
        f.data_driven = sub->add_flag("--data-driven", data_driven, "Train the purely data-driven baseline");
        subs.emplace_back(sub, f);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& [sub, f] : subs) {
            if (!sub->parsed()) continue;
            cfg.subcommand = sub->get_name();
            if (f.preset->count()) cfg.preset = preset;
            if (f.config->count()) cfg.config = config_path;
            if (f.fraction->count()) cfg.data_fraction = data_fraction;
            if (f.epochs->count()) cfg.epochs = epochs;
            if (f.p_epochs->count()) cfg.p_epochs = p_epochs;
            if (f.seed->count()) cfg.seed = seed;
            if (f.dt->count()) cfg.dt = dt;
            if (f.lm->count()) cfg.lm = lm;
            if (f.machine->count()) cfg.machine = machine;
            if (f.kind->count()) cfg.kind = kind;
            if (f.fractions->count()) cfg.fractions = parse_fraction_list(fractions);
            for (const auto& m : models) cfg.models.emplace_back(m);
            cfg.data_driven = data_driven;

            std::optional<ConfigFile> file;
            if (cfg.config) {
                file = read_config(*cfg.config);
                merge_file(cfg, *file);
            }
            if (f.out->count()) {
                cfg.out = out_dir;
            } else if (file && file->global("out")) {
                cfg.out = *file->global("out");
            }
            if (cfg.data_fraction) check_fraction(*cfg.data_fraction);

            if (cfg.subcommand == "simulate") return cmd_simulate(cfg, file, out);
            if (cfg.subcommand == "build-dataset") return cmd_build_dataset(cfg, file, out);
            if (cfg.subcommand == "train") return cmd_train(cfg, file, out);
            if (cfg.subcommand == "eval") return cmd_eval(cfg, file, out);
            if (cfg.subcommand == "compare") return cmd_compare(cfg, file, out);
        }
        err << "error: no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace neuim
