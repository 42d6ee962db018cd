#pragma once

// Experiment harness: strict key-value spec parsing, presets mirroring the
// main measurement modes, deterministic CSV / JSON-lines output, and a run
// manifest beside every data file. Data files carry no timestamps; the
// manifest holds the only volatile field.

#include "combsim/comb.hpp"
#include "combsim/loop.hpp"
#include "combsim/sensitivity.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace combsim {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr const char* kOutputDirEnv = "COMBSIM_OUTPUT_DIR";

enum class Preset { fringe, cosine_benchmark, atomic_phase, sensitivity, destruction, sweep };
enum class OutputFormat { csv, json_lines };

inline std::string to_string(Preset p) {
    switch (p) {
        case Preset::fringe: return "fringe";
        case Preset::cosine_benchmark: return "cosine-benchmark";
        case Preset::atomic_phase: return "atomic-phase";
        case Preset::sensitivity: return "sensitivity";
        case Preset::destruction: return "destruction";
        case Preset::sweep: return "sweep";
    }
    return "fringe";
}

inline std::string to_string(OutputFormat f) {
    return f == OutputFormat::csv ? "csv" : "json-lines";
}

class SpecError : public std::runtime_error {
public:
    explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

struct GridSpec {
    double start = 0.0;
    double stop = 2.0 * M_PI;
    int points = 1024;

    bool operator==(const GridSpec&) const = default;
};

// Fully resolved experiment description. Defaults are the documented fringe
// parameter set; presets overlay their own illustrative parameters; user
// keys override both. render() emits every resolved key, so
// parse_spec(render(spec)) == spec.
struct ExperimentSpec {
    Preset preset = Preset::fringe;
    std::string output;  // base path; empty = "<env dir or .>/<preset>"
    OutputFormat format = OutputFormat::csv;
    GridSpec grid;

    double r_f = 0.42;
    double r_b = 0.42;
    double delta = 0.5;
    double phi = 0.0;
    double T_s = 1.0;
    double gamma_a = 0.55;
    double theta_A = 0.0;
    double seed_re = 1e6;
    double seed_im = 0.0;
    int J_max = 10000;
    double steady_tol = 1e-11;

    double benchmark_flux = 4e13;                    // cosine-benchmark
    std::vector<double> gains = {1.0, 2.0, 4.0, 8.5};  // destruction, G_AM^2
    double probe_power = 2.0;                        // atomic-phase
    double probe_detuning = 4.0;
    double probe_tau = 1.0;
    double probe_coupling = 1.0;
    std::string sweep_key = "gamma_a";               // sweep
    std::vector<double> sweep_values = {0.3, 0.35, 0.4, 0.5};

    bool operator==(const ExperimentSpec&) const = default;

    LoopConfig to_config() const {
        LoopConfig cfg;
        cfg.forward_drive = RamanDrive::from_gain(r_f, delta);
        cfg.backward_drive = RamanDrive::from_gain(r_b, 0.0);
        cfg.phi = phi;
        cfg.T_s = T_s;
        cfg.gamma_a = gamma_a;
        cfg.theta_A = theta_A;
        cfg.seed = {seed_re, seed_im};
        cfg.J_max = J_max;
        cfg.steady_tol = steady_tol;
        return cfg;
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += fmt_double(values[i]);
    }
    return out;
}

inline size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline const std::vector<std::string>& spec_keys() {
    static const std::vector<std::string> keys = {
        "preset", "output", "format", "grid_start", "grid_stop", "grid_points",
        "r_f", "r_b", "delta", "phi", "T_s", "gamma_a", "theta_A",
        "seed_re", "seed_im", "J_max", "steady_tol",
        "benchmark_flux", "gains",
        "probe_power", "probe_detuning", "probe_tau", "probe_coupling",
        "sweep_key", "sweep_values"};
    return keys;
}

inline std::string nearest_key(const std::string& key) {
    std::string best;
    size_t best_d = std::string::npos;
    for (const auto& cand : spec_keys()) {
        const size_t d = edit_distance(key, cand);
        if (d < best_d) {
            best_d = d;
            best = cand;
        }
    }
    return best;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& value, int line, const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || !std::isfinite(v))
        throw SpecError("line " + std::to_string(line) + ": key '" + key +
                        "' needs a finite number, got '" + value + "'");
    return v;
}

inline int parse_int(const std::string& value, int line, const std::string& key) {
    const double v = parse_double(value, line, key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw SpecError("line " + std::to_string(line) + ": key '" + key +
                        "' needs an integer, got '" + value + "'");
    return i;
}

inline std::vector<double> parse_list(const std::string& raw, int line, const std::string& key) {
    std::string value = trim(raw);
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']')
        value = trim(value.substr(1, value.size() - 2));
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw SpecError("line " + std::to_string(line) + ": key '" + key +
                            "' has an empty list entry");
        out.push_back(parse_double(item, line, key));
    }
    if (out.empty())
        throw SpecError("line " + std::to_string(line) + ": key '" + key + "' needs a list");
    return out;
}

inline Preset parse_preset(const std::string& value, int line) {
    for (Preset p : {Preset::fringe, Preset::cosine_benchmark, Preset::atomic_phase,
                     Preset::sensitivity, Preset::destruction, Preset::sweep})
        if (to_string(p) == value) return p;
    throw SpecError("line " + std::to_string(line) + ": unknown preset '" + value +
                    "' (expected fringe | cosine-benchmark | atomic-phase | sensitivity | "
                    "destruction | sweep)");
}

// Illustrative parameter sets per preset; the sensitivity set is tuned just
// below the loop threshold where the comb slope outruns the noise excess.
inline void apply_preset_defaults(ExperimentSpec& spec) {
    switch (spec.preset) {
        case Preset::sensitivity:
        case Preset::sweep:
        case Preset::destruction:
            spec.r_f = 0.3;
            spec.r_b = 0.3;
            spec.delta = 0.0025;
            spec.gamma_a = 0.292;
            // near threshold the residual shrinks by only ~0.25% per loop
            spec.steady_tol = 1e-9;
            spec.J_max = 40000;
            break;
        case Preset::atomic_phase:
            spec.gamma_a = 1.0;  // single-pass fringes show the rigid shift cleanly
            spec.delta = 0.0;
            break;
        default:
            break;
    }
}

}  // namespace detail

inline std::string render(const ExperimentSpec& spec) {
    using detail::fmt_double;
    std::ostringstream os;
    os << "preset = " << to_string(spec.preset) << "\n";
    os << "output = " << spec.output << "\n";
    os << "format = " << to_string(spec.format) << "\n";
    os << "grid_start = " << fmt_double(spec.grid.start) << "\n";
    os << "grid_stop = " << fmt_double(spec.grid.stop) << "\n";
    os << "grid_points = " << spec.grid.points << "\n";
    os << "r_f = " << fmt_double(spec.r_f) << "\n";
    os << "r_b = " << fmt_double(spec.r_b) << "\n";
    os << "delta = " << fmt_double(spec.delta) << "\n";
    os << "phi = " << fmt_double(spec.phi) << "\n";
    os << "T_s = " << fmt_double(spec.T_s) << "\n";
    os << "gamma_a = " << fmt_double(spec.gamma_a) << "\n";
    os << "theta_A = " << fmt_double(spec.theta_A) << "\n";
    os << "seed_re = " << fmt_double(spec.seed_re) << "\n";
    os << "seed_im = " << fmt_double(spec.seed_im) << "\n";
    os << "J_max = " << spec.J_max << "\n";
    os << "steady_tol = " << fmt_double(spec.steady_tol) << "\n";
    os << "benchmark_flux = " << fmt_double(spec.benchmark_flux) << "\n";
    os << "gains = " << detail::fmt_list(spec.gains) << "\n";
    os << "probe_power = " << fmt_double(spec.probe_power) << "\n";
    os << "probe_detuning = " << fmt_double(spec.probe_detuning) << "\n";
    os << "probe_tau = " << fmt_double(spec.probe_tau) << "\n";
    os << "probe_coupling = " << fmt_double(spec.probe_coupling) << "\n";
    os << "sweep_key = " << spec.sweep_key << "\n";
    os << "sweep_values = " << detail::fmt_list(spec.sweep_values) << "\n";
    return os.str();
}

// Strict parser: key = value lines, '#' comments. Unknown keys are errors
// carrying the nearest valid key; all values are validated in place.
inline ExperimentSpec parse_spec(const std::string& text) {
    using namespace detail;
    // first pass: find the preset so its defaults underlie the other keys
    ExperimentSpec spec;
    std::map<std::string, std::pair<std::string, int>> seen;
    {
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw SpecError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                                line + "'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (std::find(spec_keys().begin(), spec_keys().end(), key) == spec_keys().end())
                throw SpecError("line " + std::to_string(lineno) + ": unknown key '" + key +
                                "' (did you mean '" + nearest_key(key) + "'?)");
            if (seen.count(key))
                throw SpecError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            seen[key] = {value, lineno};
        }
    }
    if (auto it = seen.find("preset"); it != seen.end())
        spec.preset = parse_preset(it->second.first, it->second.second);
    apply_preset_defaults(spec);

    for (const auto& [key, entry] : seen) {
        const auto& [value, line] = entry;
        if (key == "preset") continue;
        if (key == "output") spec.output = value;
        else if (key == "format") {
            if (value == "csv") spec.format = OutputFormat::csv;
            else if (value == "json-lines") spec.format = OutputFormat::json_lines;
            else throw SpecError("line " + std::to_string(line) +
                                 ": format must be csv or json-lines, got '" + value + "'");
        } else if (key == "grid_start") spec.grid.start = parse_double(value, line, key);
        else if (key == "grid_stop") spec.grid.stop = parse_double(value, line, key);
        else if (key == "grid_points") {
            spec.grid.points = parse_int(value, line, key);
            if (spec.grid.points < 2)
                throw SpecError("line " + std::to_string(line) + ": grid_points must be >= 2");
        } else if (key == "r_f") spec.r_f = parse_double(value, line, key);
        else if (key == "r_b") spec.r_b = parse_double(value, line, key);
        else if (key == "delta") spec.delta = parse_double(value, line, key);
        else if (key == "phi") spec.phi = parse_double(value, line, key);
        else if (key == "T_s") spec.T_s = parse_double(value, line, key);
        else if (key == "gamma_a") spec.gamma_a = parse_double(value, line, key);
        else if (key == "theta_A") spec.theta_A = parse_double(value, line, key);
        else if (key == "seed_re") spec.seed_re = parse_double(value, line, key);
        else if (key == "seed_im") spec.seed_im = parse_double(value, line, key);
        else if (key == "J_max") spec.J_max = parse_int(value, line, key);
        else if (key == "steady_tol") spec.steady_tol = parse_double(value, line, key);
        else if (key == "benchmark_flux") spec.benchmark_flux = parse_double(value, line, key);
        else if (key == "gains") spec.gains = parse_list(value, line, key);
        else if (key == "probe_power") spec.probe_power = parse_double(value, line, key);
        else if (key == "probe_detuning") spec.probe_detuning = parse_double(value, line, key);
        else if (key == "probe_tau") spec.probe_tau = parse_double(value, line, key);
        else if (key == "probe_coupling") spec.probe_coupling = parse_double(value, line, key);
        else if (key == "sweep_key") spec.sweep_key = value;
        else if (key == "sweep_values") spec.sweep_values = parse_list(value, line, key);
    }
    // cross-field validation
    static const std::vector<std::string> sweepable = {"gamma_a", "delta", "r_f", "r_b",
                                                       "T_s", "theta_A", "phi"};
    if (std::find(sweepable.begin(), sweepable.end(), spec.sweep_key) == sweepable.end()) {
        std::string best;
        size_t best_d = std::string::npos;
        for (const auto& cand : sweepable) {
            const size_t d = detail::edit_distance(spec.sweep_key, cand);
            if (d < best_d) { best_d = d; best = cand; }
        }
        throw SpecError("sweep_key '" + spec.sweep_key + "' is not sweepable (did you mean '" +
                        best + "'?)");
    }
    try {
        spec.to_config().validate();
    } catch (const std::invalid_argument& e) {
        throw SpecError(std::string("invalid configuration: ") + e.what());
    }
    return spec;
}

// ---------------------------------------------------------------------------
// output writing

struct RunResult {
    std::vector<std::string> data_files;
    std::vector<std::string> manifest_files;
};

namespace detail {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;  // pre-rendered cells
};

inline void push_row(Table& table, const std::vector<double>& values,
                     const std::string& tail = "") {
    std::vector<std::string> row;
    row.reserve(values.size() + (tail.empty() ? 0 : 1));
    for (double v : values) row.push_back(fmt_double(v));
    if (!tail.empty()) row.push_back(tail);
    table.rows.push_back(std::move(row));
}

inline void write_table(const std::string& path, const Table& table, OutputFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    if (format == OutputFormat::csv) {
        for (size_t c = 0; c < table.columns.size(); ++c)
            out << (c ? "," : "") << table.columns[c];
        out << "\n";
        for (const auto& row : table.rows) {
            for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
            out << "\n";
        }
    } else {
        for (const auto& row : table.rows) {
            out << "{";
            for (size_t c = 0; c < row.size(); ++c) {
                out << (c ? "," : "") << "\"" << table.columns[c] << "\":";
                const bool numeric = !row[c].empty() &&
                                     (std::isdigit(static_cast<unsigned char>(row[c][0])) ||
                                      row[c][0] == '-' || row[c][0] == '+' || row[c][0] == '.');
                if (numeric) out << row[c];
                else out << "\"" << row[c] << "\"";
            }
            out << "}\n";
        }
    }
}

inline void write_manifest(const std::string& data_path, const ExperimentSpec& spec,
                           RunResult& result) {
    nlohmann::json manifest;
    manifest["artifact"] = "combsim";
    manifest["version"] = kArtifactVersion;
    manifest["data_file"] = std::filesystem::path(data_path).filename().string();
    manifest["resolved_spec"] = render(spec);
    char stamp[64];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    manifest["written_at"] = stamp;  // the only volatile field of a run
    const std::string path = data_path + ".manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open manifest file: " + path);
    out << manifest.dump(2) << "\n";
    result.manifest_files.push_back(path);
}

inline std::string extension(OutputFormat f) {
    return f == OutputFormat::csv ? ".csv" : ".jsonl";
}

inline std::string base_path(const ExperimentSpec& spec) {
    if (!spec.output.empty()) return spec.output;
    std::string dir = ".";
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) dir = env;
    return dir + "/" + to_string(spec.preset);
}

inline void emit(const ExperimentSpec& spec, const std::string& path, const Table& table,
                 RunResult& result) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    write_table(path, table, spec.format);
    result.data_files.push_back(path);
    write_manifest(path, spec, result);
}

inline Table fringe_table(const FringeCurve& curve) {
    Table table;
    table.columns = {"phi", "signal", "noise", "source"};
    for (size_t i = 0; i < curve.phi.size(); ++i)
        push_row(table, {curve.phi[i], curve.signal[i], curve.has_noise() ? curve.noise[i] : 0.0},
                 to_string(curve.provenance));
    return table;
}

// Operating point from the minimum of delta-phi, then the particle flux is
// measured on the steady two-arm state at that very phase.
inline SensitivityReport hybrid_sensitivity(const LoopConfig& cfg, const GridSpec& grid) {
    const FringeCurve curve = fringe_scan(cfg, phase_grid(grid.start, grid.stop, grid.points));
    const SensitivityReport shape = sensitivity(curve, 1.0);  // flux-independent argmin
    LoopConfig at_opt = cfg;
    at_opt.phi = shape.phi_opt;
    const double flux = particle_flux(at_opt).total();
    return sensitivity(curve, flux);
}

inline void apply_sweep_value(ExperimentSpec& spec, const std::string& key, double value) {
    if (key == "gamma_a") spec.gamma_a = value;
    else if (key == "delta") spec.delta = value;
    else if (key == "r_f") spec.r_f = value;
    else if (key == "r_b") spec.r_b = value;
    else if (key == "T_s") spec.T_s = value;
    else if (key == "theta_A") spec.theta_A = value;
    else if (key == "phi") spec.phi = value;
}

}  // namespace detail

inline RunResult run_experiment(const ExperimentSpec& spec) {
    using namespace detail;
    RunResult result;
    const std::string base = base_path(spec);
    const std::string ext = extension(spec.format);
    const std::vector<double> grid = phase_grid(spec.grid.start, spec.grid.stop, spec.grid.points);

    switch (spec.preset) {
        case Preset::fringe: {
            emit(spec, base + ext, fringe_table(fringe_scan(spec.to_config(), grid)), result);
            break;
        }
        case Preset::cosine_benchmark: {
            emit(spec, base + ext, fringe_table(sql_benchmark_curve(spec.benchmark_flux, grid)),
                 result);
            break;
        }
        case Preset::atomic_phase: {
            AtomicPhaseProbe probe{spec.probe_power, spec.probe_detuning, spec.probe_tau,
                                   spec.probe_coupling};
            const double theta = atomic_phase(probe);
            LoopConfig cfg = spec.to_config();
            emit(spec, base + "_baseline" + ext, fringe_table(fringe_scan(cfg, grid)), result);
            cfg.theta_A = theta;
            emit(spec, base + "_shifted" + ext, fringe_table(fringe_scan(cfg, grid)), result);
            break;
        }
        case Preset::sensitivity: {
            const SensitivityReport report = hybrid_sensitivity(spec.to_config(), spec.grid);
            Table table;
            table.columns = {"phi_opt", "slope", "noise_std", "delta_phi", "sql", "db_beyond_sql"};
            push_row(table, {report.phi_opt, report.slope, report.noise_std, report.delta_phi,
                             report.sql, report.db_beyond_sql});
            emit(spec, base + ext, table, result);
            break;
        }
        case Preset::destruction: {
            const DestructionSweep sweep = destruction_sweep(spec.to_config(), spec.gains);
            Table table;
            table.columns = {"gain2", "loss", "signal_db", "noise_db"};
            for (const auto& row : sweep.rows)
                push_row(table, {row.gain2, row.loss, row.signal_db, row.noise_db});
            emit(spec, base + ext, table, result);
            break;
        }
        case Preset::sweep: {
            Table table;
            table.columns = {spec.sweep_key, "phi_opt", "slope", "noise_std", "delta_phi", "sql",
                             "db_beyond_sql"};
            for (double value : spec.sweep_values) {
                ExperimentSpec point = spec;
                apply_sweep_value(point, spec.sweep_key, value);
                const SensitivityReport report =
                    hybrid_sensitivity(point.to_config(), point.grid);
                push_row(table, {value, report.phi_opt, report.slope, report.noise_std,
                                 report.delta_phi, report.sql, report.db_beyond_sql});
            }
            emit(spec, base + ext, table, result);
            break;
        }
    }
    return result;
}

}  // namespace combsim
