#include "neuim/dataio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "neuim/error.hpp"

namespace neuim {

namespace {

using json = nlohmann::json;

constexpr std::array<const char*, 24> kColumns{
    "t",    "v_a",  "v_b",  "v_c",  "i_a",  "i_b",  "i_c",  "iq_s",  "id_s",    "i0_s", "iq_r", "id_r",
    "i0_r", "lq_s", "ld_s", "l0_s", "lq_r", "ld_r", "l0_r", "theta", "omega", "omega_r", "Te", "Tm"};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string s = trim(text);
    double value = 0.0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError(what + ": '" + s + "' is not a number");
    if (!std::isfinite(value)) throw ConfigError(what + ": non-finite value");
    return value;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Scenario apply_options(Scenario sc, const DatasetOptions& options) {
    sc.dt = options.dt;
    if (options.L_M) sc.params.L_M = *options.L_M;
    return sc;
}

std::string kv_label(double kv) {
    std::ostringstream os;
    os << kv << "kV";
    return os.str();
}

std::string nm_label(double torque) {
    std::ostringstream os;
    os << torque << "Nm";
    return os.str();
}

Scenario named_tc(const MachineParams& p, double v_line, double torque, double dt) {
    Scenario sc = torque_change_scenario(p, phase_peak_from_line_rms(v_line), torque, dt);
    sc.name = "tc_" + nm_label(torque);
    return sc;
}

Scenario named_fault(const MachineParams& p, double kv, double load, double dt) {
    Scenario sc = fault_scenario(p, phase_peak_from_line_rms(kv * 1000.0), load, dt);
    sc.name = "fault_" + kv_label(kv);
    return sc;
}

json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("model file lacks '") + key + "'");
    return j.at(key);
}

Eigen::VectorXd json_vec(const json& j, const std::string& what, std::size_t expected) {
    if (!j.is_array()) throw ConfigError(what + " must be an array");
    if (j.size() != expected) {
        throw ConfigError(what + " has " + std::to_string(j.size()) + " entries, expected " + std::to_string(expected));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(expected));
    for (std::size_t i = 0; i < expected; ++i) {
        if (!j[i].is_number()) throw ConfigError(what + " entry " + std::to_string(i) + " is not a number");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

json normalizer_json(const Normalizer& n) { return {{"offset", vec_json(n.offset)}, {"scale", vec_json(n.scale)}}; }

Normalizer json_normalizer(const json& j, const std::string& what, std::size_t n) {
    return {json_vec(field(j, "offset"), what + " offset", n), json_vec(field(j, "scale"), what + " scale", n)};
}

template <typename Model>
json model_to_json(const Model& m, const char* kind) {
    json layers = json::array();
    for (const auto& layer : m.net.layers) {
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(layer.weights.size()));
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) w.push_back(layer.weights(r, c));
        }
        layers.push_back({{"weights", w}, {"biases", vec_json(layer.biases)}});
    }
    json kinds = json::array();
    for (ScenarioKind k : m.info.kinds) kinds.push_back(to_string(k));
    return {{"format_version", kModelFormatVersion},
            {"kind", kind},
            {"activation", "tanh"},
            {"layer_sizes", m.net.layer_sizes()},
            {"layers", layers},
            {"input_normalizer", normalizer_json(m.input)},
            {"output_normalizer", normalizer_json(m.output)},
            {"dt", m.dt},
            {"info",
             {{"method", m.info.method},
              {"seed", m.info.seed},
              {"epochs", m.info.epochs},
              {"data_fraction", m.info.data_fraction},
              {"kinds", kinds}}}};
}

template <typename Model>
Model model_from_json(const std::string& text, const char* kind, std::size_t inputs, std::size_t outputs) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
    }
    const json& version = field(j, "format_version");
    if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
        throw ConfigError("unsupported model format_version " + version.dump() + ", expected " +
                          std::to_string(kModelFormatVersion));
    }
    if (field(j, "kind") != kind) throw ConfigError("model file holds a " + field(j, "kind").dump() + " network");
    if (field(j, "activation") != "tanh") throw ConfigError("unsupported activation " + field(j, "activation").dump());

    std::vector<int> sizes;
    try {
        sizes = field(j, "layer_sizes").get<std::vector<int>>();
    } catch (const json::exception&) {
        throw ConfigError("layer_sizes must be an array of integers");
    }
    if (sizes.size() < 2 || static_cast<std::size_t>(sizes.front()) != inputs ||
        static_cast<std::size_t>(sizes.back()) != outputs) {
        throw ConfigError(std::string("layer_sizes do not describe a ") + kind + " network");
    }
    const json& layers = field(j, "layers");
    if (!layers.is_array() || layers.size() + 1 != sizes.size()) {
        throw ConfigError("layers array does not match layer_sizes");
    }
    Model m;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        if (sizes[l] <= 0 || sizes[l + 1] <= 0) throw ConfigError("layer sizes must be positive");
        const std::string name = "layer " + std::to_string(l);
        const auto rows = static_cast<std::size_t>(sizes[l + 1]);
        const auto cols = static_cast<std::size_t>(sizes[l]);
        const Eigen::VectorXd w = json_vec(field(layers[l], "weights"), name + " weights", rows * cols);
        DenseLayer layer;
        layer.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            w.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        layer.biases = json_vec(field(layers[l], "biases"), name + " biases", rows);
        m.net.layers.push_back(std::move(layer));
    }
    m.input = json_normalizer(field(j, "input_normalizer"), "input normalizer", inputs);
    m.output = json_normalizer(field(j, "output_normalizer"), "output normalizer", outputs);
    if (!field(j, "dt").is_number()) throw ConfigError("dt must be a number");
    m.dt = field(j, "dt").get<double>();
    const json& info = field(j, "info");
    try {
        m.info.method = field(info, "method").get<std::string>();
        m.info.seed = field(info, "seed").get<std::uint64_t>();
        m.info.epochs = field(info, "epochs").get<int>();
        m.info.data_fraction = field(info, "data_fraction").get<double>();
        for (const auto& k : field(info, "kinds")) m.info.kinds.push_back(parse_scenario_kind(k.get<std::string>()));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed model info: ") + e.what());
    }
    return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Accumulates squared errors and the peak of the truth.
struct ErrorSum {
    double squared = 0.0;
    double peak = 0.0;
    std::size_t count = 0;

    void add(double predicted, double truth) {
        const double e = predicted - truth;
        squared += e * e;
        peak = std::max(peak, std::abs(truth));
        ++count;
    }
    void merge(const ErrorSum& o) {
        squared += o.squared;
        peak = std::max(peak, o.peak);
        count += o.count;
    }
    ErrorStats stats() const {
        ErrorStats s;
        if (count == 0) return s;
        s.mse = squared / static_cast<double>(count);
        s.nmse = peak > 0.0 ? s.mse / (peak * peak) : 0.0;
        return s;
    }
};

struct TrajectorySums {
    ErrorSum rate, currents, i_qs;
};

TrajectorySums sums(const Trajectory& traj, const Eigen::MatrixXd& currents, const Eigen::MatrixXd& rates) {
    const auto n = static_cast<Eigen::Index>(traj.size());
    if (currents.rows() != static_cast<Eigen::Index>(kGOutputs) || currents.cols() != n ||
        rates.rows() != static_cast<Eigen::Index>(kPOutputs) || rates.cols() != n) {
        throw std::invalid_argument("prediction shape does not match the trajectory");
    }
    const Eigen::MatrixXd truth = true_currents(traj);
    const Eigen::MatrixXd truth_rates = finite_difference_derivative(traj.i_abcs, traj.dt);
    TrajectorySums s;
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index c = 0; c < truth.rows(); ++c) s.currents.add(currents(c, k), truth(c, k));
        for (Eigen::Index c = 0; c < truth_rates.rows(); ++c) s.rate.add(rates(c, k), truth_rates(c, k));
        s.i_qs.add(currents(0, k), truth(0, k));
    }
    return s;
}

void check_model_dt(double model_dt, const Trajectory& traj, const std::string& label) {
    if (std::abs(model_dt - traj.dt) > 1e-12 * traj.dt) {
        throw ConfigError("model '" + label + "' was trained at dt = " + format_double(model_dt) + " but '" +
                          traj.name + "' uses dt = " + format_double(traj.dt));
    }
}

}  // namespace

const char* to_string(Split split) { return split == Split::Train ? "train" : "test"; }

void Dataset::set_data_fraction(double fraction) {
    const std::size_t n = supervised_count(fraction, entries.size());
    data_fraction = fraction;
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].supervised = i < n;
}

std::vector<const Trajectory*> Dataset::trajectories(std::span<const ScenarioKind> kinds) const {
    std::vector<const Trajectory*> out;
    for (const auto& e : entries) {
        if (kinds.empty() || std::find(kinds.begin(), kinds.end(), e.trajectory.kind) != kinds.end()) {
            out.push_back(&e.trajectory);
        }
    }
    return out;
}

MachineParams machine_by_name(const std::string& name) {
    if (name == "small") return small_machine();
    if (name == "large") return large_machine();
    throw ConfigError("unknown machine '" + name + "' (expected small or large)");
}

double rated_line_voltage(const std::string& name) {
    if (name == "small") return 220.0;
    if (name == "large") return 2300.0;
    throw ConfigError("unknown machine '" + name + "' (expected small or large)");
}

std::vector<std::string> preset_names() { return {"free-accel", "paper-train", "paper-test"}; }

std::vector<Scenario> preset_scenarios(const std::string& preset, const DatasetOptions& options) {
    const double dt = options.dt;
    std::vector<Scenario> out;
    if (preset == "free-accel") {
        const std::string machine = options.machine.value_or("small");
        Scenario sc = free_acceleration_scenario(machine_by_name(machine),
                                                 phase_peak_from_line_rms(rated_line_voltage(machine)), 1.0, dt);
        out.push_back(sc);
    } else if (preset == "paper-train" || preset == "paper-test") {
        if (options.machine) throw ConfigError("--machine does not apply to preset '" + preset + "'");
        const bool train = preset == "paper-train";
        const MachineParams small = small_machine();
        MachineParams large = large_machine();
        if (!train) large.L_M = 0.0531;
        for (double torque : train ? std::vector<double>{5.0, 10.0} : std::vector<double>{3.0, 12.0}) {
            out.push_back(named_tc(small, 220.0, torque, dt));
        }
        for (double kv : train ? std::vector<double>{2.3, 2.4, 2.5} : std::vector<double>{2.3, 2.35}) {
            out.push_back(named_fault(large, kv, 8900.0, dt));
        }
    } else {
        throw ConfigError("unknown preset '" + preset + "' (expected free-accel, paper-train or paper-test)");
    }
    for (auto& sc : out) sc = apply_options(sc, options);
    return out;
}

std::optional<std::string> ConfigFile::global(const std::string& key) const {
    std::optional<std::string> value;
    for (const auto& [k, v] : globals) {
        if (k == key) value = v;
    }
    return value;
}

ConfigFile parse_config(std::istream& in) {
    ConfigFile cfg;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (key == "scenario") {
            if (value.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": scenario needs a name");
            cfg.scenarios.push_back({value, line_no, {}});
        } else if (cfg.scenarios.empty()) {
            cfg.globals.emplace_back(key, value);
        } else {
            cfg.scenarios.back().keys.emplace_back(key, value);
        }
    }
    return cfg;
}

ConfigFile read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    return parse_config(in);
}

std::vector<Scenario> config_scenarios(const ConfigFile& config, const DatasetOptions& options) {
    std::vector<Scenario> out;
    for (const auto& block : config.scenarios) {
        const std::string where = "scenario '" + block.name + "' (line " + std::to_string(block.line) + ")";
        std::optional<std::string> kind_name, machine;
        std::optional<double> voltage, torque, t_end, lm;
        for (const auto& [k, v] : block.keys) {
            if (k == "kind") kind_name = v;
            else if (k == "machine") machine = v;
            else if (k == "voltage") voltage = parse_double(v, where + " voltage");
            else if (k == "torque") torque = parse_double(v, where + " torque");
            else if (k == "t_end") t_end = parse_double(v, where + " t_end");
            else if (k == "lm") lm = parse_double(v, where + " lm");
            else throw ConfigError(where + ": unknown key '" + k + "'");
        }
        if (!kind_name) throw ConfigError(where + ": missing 'kind'");
        const ScenarioKind kind = parse_scenario_kind(*kind_name);
        const std::string machine_name = machine.value_or(options.machine.value_or("small"));
        MachineParams p = machine_by_name(machine_name);
        if (lm) p.L_M = *lm;
        const double v_line = voltage.value_or(rated_line_voltage(machine_name));
        if (kind != ScenarioKind::FreeAcceleration && !torque) throw ConfigError(where + ": missing 'torque'");
        if (kind != ScenarioKind::FreeAcceleration && t_end) {
            throw ConfigError(where + ": t_end is fixed for this kind");
        }
        Scenario sc;
        switch (kind) {
            case ScenarioKind::FreeAcceleration:
                sc = free_acceleration_scenario(p, phase_peak_from_line_rms(v_line), t_end.value_or(1.0), options.dt);
                break;
            case ScenarioKind::TorqueChange:
                sc = torque_change_scenario(p, phase_peak_from_line_rms(v_line), *torque, options.dt);
                break;
            case ScenarioKind::Fault:
                sc = fault_scenario(p, phase_peak_from_line_rms(v_line), *torque, options.dt);
                break;
        }
        sc.name = block.name;
        sc = apply_options(sc, options);
        // A block's own lm wins over the global override.
        if (lm) sc.params.L_M = *lm;
        out.push_back(sc);
    }
    return out;
}

Dataset build_dataset(const std::string& name, Split split, std::vector<Scenario> scenarios) {
    Dataset ds;
    ds.name = name;
    ds.split = split;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (scenarios[j].name == scenarios[i].name) {
                throw ConfigError("duplicate scenario name '" + scenarios[i].name + "'");
            }
        }
        if (i > 0 && std::abs(scenarios[i].dt - scenarios[0].dt) > 1e-12 * scenarios[0].dt) {
            throw ConfigError("scenarios of one dataset must share dt");
        }
    }
    for (auto& sc : scenarios) {
        Trajectory traj = simulate(sc);
        ds.entries.push_back({std::move(sc), std::move(traj), false});
    }
    return ds;
}

Dataset build_preset(const std::string& preset, const DatasetOptions& options) {
    const Split split = preset == "paper-test" ? Split::Test : Split::Train;
    return build_dataset(preset, split, preset_scenarios(preset, options));
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
    for (std::size_t c = 0; c < kColumns.size(); ++c) out << (c ? "," : "") << kColumns[c];
    out << '\n';
    std::string row;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Abc& v = traj.v_abcs[k];
        const Abc& i = traj.i_abcs[k];
        const Qd0& is = traj.i_qd0s[k];
        const Qd0& ir = traj.i_qd0r[k];
        const Qd0& ls = traj.lambda_qd0s[k];
        const Qd0& lr = traj.lambda_qd0r[k];
        const std::array<double, kColumns.size()> values{
            traj.t[k], v.a,  v.b,  v.c,  i.a,  i.b,  i.c,           is.q,         is.d,           is.z,
            ir.q,      ir.d, ir.z, ls.q, ls.d, ls.z, lr.q,          lr.d,         lr.z,           traj.theta[k],
            traj.omega[k], traj.omega_r[k], traj.torque_e[k], traj.torque_m[k]};
        row.clear();
        for (std::size_t c = 0; c < values.size(); ++c) {
            if (c) row += ',';
            row += format_double(values[c]);
        }
        out << row << '\n';
    }
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    write_trajectory(out, traj);
    if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

Trajectory read_trajectory(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("trajectory file is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(trim(line));
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(trim(cell));
    }
    std::array<std::size_t, kColumns.size()> index{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), kColumns[c]);
        if (it == header.end()) throw ConfigError(std::string("trajectory header lacks column '") + kColumns[c] + "'");
        index[c] = static_cast<std::size_t>(it - header.begin());
    }

    Trajectory traj;
    std::vector<std::string> cells;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        line = trim(line);
        if (line.empty()) continue;
        cells.clear();
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != header.size()) {
            throw ConfigError("trajectory row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                              " fields, header has " + std::to_string(header.size()));
        }
        std::array<double, kColumns.size()> v{};
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            v[c] = parse_double(cells[index[c]], "row " + std::to_string(row_no) + " column '" + kColumns[c] + "'");
        }
        traj.t.push_back(v[0]);
        traj.v_abcs.push_back({v[1], v[2], v[3]});
        traj.i_abcs.push_back({v[4], v[5], v[6]});
        traj.i_qd0s.push_back({v[7], v[8], v[9]});
        traj.i_qd0r.push_back({v[10], v[11], v[12]});
        traj.lambda_qd0s.push_back({v[13], v[14], v[15]});
        traj.lambda_qd0r.push_back({v[16], v[17], v[18]});
        traj.theta.push_back(v[19]);
        traj.omega.push_back(v[20]);
        traj.omega_r.push_back(v[21]);
        traj.torque_e.push_back(v[22]);
        traj.torque_m.push_back(v[23]);
    }
    if (traj.size() >= 2) traj.dt = traj.t[1] - traj.t[0];
    return traj;
}

Trajectory read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    Trajectory traj = read_trajectory(in);
    traj.name = path.stem().string();
    return traj;
}

std::string file_stem(const std::string& name) {
    std::string out = name;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                        c == '-' || c == '_';
        if (!ok) c = '_';
    }
    return out.empty() ? "unnamed" : out;
}

std::string model_json(const GModel& g) { return model_to_json(g, "G").dump(1) + "\n"; }
std::string model_json(const PModel& p) { return model_to_json(p, "P").dump(1) + "\n"; }

void save_model(const std::filesystem::path& path, const GModel& g) { write_text(path, model_json(g)); }
void save_model(const std::filesystem::path& path, const PModel& p) { write_text(path, model_json(p)); }

GModel parse_g_model(const std::string& text) { return model_from_json<GModel>(text, "G", kGInputs, kGOutputs); }
PModel parse_p_model(const std::string& text) { return model_from_json<PModel>(text, "P", kPInputs, kPOutputs); }

GModel load_g_model(const std::filesystem::path& path) { return parse_g_model(read_text(path)); }
PModel load_p_model(const std::filesystem::path& path) { return parse_p_model(read_text(path)); }

const KindMetrics* EvalReport::find(const std::string& method, ScenarioKind kind) const {
    for (const auto& k : kinds) {
        if (k.method == method && k.kind == kind) return &k;
    }
    return nullptr;
}

TrajectoryMetrics score_trajectory(const Trajectory& traj, const Eigen::MatrixXd& currents,
                                   const Eigen::MatrixXd& rates) {
    const TrajectorySums s = sums(traj, currents, rates);
    TrajectoryMetrics m;
    m.trajectory = traj.name;
    m.kind = traj.kind;
    m.points = traj.size();
    m.rate = s.rate.stats();
    m.currents = s.currents.stats();
    m.i_qs = s.i_qs.stats();
    return m;
}

EvalReport evaluate(std::span<const MethodModels> methods, const Dataset& dataset) {
    EvalReport report;
    report.dataset = dataset.name;
    std::vector<ScenarioKind> kind_order;
    for (const auto& e : dataset.entries) {
        if (std::find(kind_order.begin(), kind_order.end(), e.trajectory.kind) == kind_order.end()) {
            kind_order.push_back(e.trajectory.kind);
        }
    }
    struct Pool {
        std::size_t trajectories = 0;
        std::size_t points = 0;
        TrajectorySums sums;
    };
    // pools[method][kind position]
    std::vector<std::vector<Pool>> pools(methods.size(), std::vector<Pool>(kind_order.size()));
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const MethodModels& m = methods[mi];
        if (!m.g || !m.p) throw std::invalid_argument("method '" + m.label + "' lacks a model");
        if (report.seed == 0) report.seed = m.g->info.seed;
        for (const auto& e : dataset.entries) {
            const Trajectory& traj = e.trajectory;
            if (!m.kinds.empty() && std::find(m.kinds.begin(), m.kinds.end(), traj.kind) == m.kinds.end()) continue;
            check_model_dt(m.g->dt, traj, m.label);
            check_model_dt(m.p->dt, traj, m.label);
            const CurrentSequence seq = g_predict_all(*m.g, traj);
            const Eigen::MatrixXd rates = p_predict_all(*m.p, traj, seq.abcs);
            const TrajectorySums s = sums(traj, seq.qd0, rates);
            TrajectoryMetrics tm;
            tm.method = m.label;
            tm.trajectory = traj.name;
            tm.kind = traj.kind;
            tm.points = traj.size();
            tm.rate = s.rate.stats();
            tm.currents = s.currents.stats();
            tm.i_qs = s.i_qs.stats();
            report.trajectories.push_back(tm);
            const auto pos = static_cast<std::size_t>(
                std::find(kind_order.begin(), kind_order.end(), traj.kind) - kind_order.begin());
            Pool& pool = pools[mi][pos];
            ++pool.trajectories;
            pool.points += traj.size();
            pool.sums.rate.merge(s.rate);
            pool.sums.currents.merge(s.currents);
            pool.sums.i_qs.merge(s.i_qs);
        }
    }
    for (std::size_t ki = 0; ki < kind_order.size(); ++ki) {
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const Pool& pool = pools[mi][ki];
            if (pool.trajectories == 0) continue;
            KindMetrics km;
            km.method = methods[mi].label;
            km.kind = kind_order[ki];
            km.trajectories = pool.trajectories;
            km.points = pool.points;
            km.rate = pool.sums.rate.stats();
            km.currents = pool.sums.currents.stats();
            km.i_qs = pool.sums.i_qs.stats();
            report.kinds.push_back(km);
        }
    }
    return report;
}

void write_eval_table(std::ostream& out, const EvalReport& report) {
    std::size_t method_width = 6;
    for (const auto& k : report.kinds) method_width = std::max(method_width, k.method.size());
    std::ostringstream os;
    os << std::left << std::setw(12) << "Scenario" << std::setw(static_cast<int>(method_width) + 2) << "Type"
       << std::right << std::setw(14) << "MSE(di/dt)" << std::setw(14) << "NMSE(di/dt)" << std::setw(14)
       << "MSE(i_qd0)" << std::setw(14) << "NMSE(i_qs)" << '\n';
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%14.4e", v);
        return std::string(buf);
    };
    for (const auto& k : report.kinds) {
        os << std::left << std::setw(12) << to_string(k.kind) << std::setw(static_cast<int>(method_width) + 2)
           << k.method << num(k.rate.mse) << num(k.rate.nmse) << num(k.currents.mse) << num(k.i_qs.nmse) << '\n';
    }
    out << os.str();
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
    out << "scope,scenario,method,trajectories,points,mse_rate,nmse_rate,mse_currents,nmse_currents,mse_iqs,"
           "nmse_iqs\n";
    auto stats = [](const ErrorStats& s) { return format_double(s.mse) + "," + format_double(s.nmse); };
    for (const auto& k : report.kinds) {
        out << "kind," << to_string(k.kind) << ',' << k.method << ',' << k.trajectories << ',' << k.points << ','
            << stats(k.rate) << ',' << stats(k.currents) << ',' << stats(k.i_qs) << '\n';
    }
    for (const auto& t : report.trajectories) {
        out << "trajectory," << t.trajectory << ',' << t.method << ",1," << t.points << ',' << stats(t.rate) << ','
            << stats(t.currents) << ',' << stats(t.i_qs) << '\n';
    }
}

}  // namespace neuim
