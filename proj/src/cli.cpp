#include "gbrbm/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "gbrbm/evaluation.hpp"
#include "gbrbm/io.hpp"
#include "gbrbm/model.hpp"

namespace gbrbm::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string format_number(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

template <class T>
T parse_integer(const std::string& key, const std::string& value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out)) {
        throw ConfigError("config key '" + key + "': expected a real number, got '" + value + "'");
    }
    return out;
}

bool parse_flag(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

struct Field {
    std::string key;
    std::string help;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    bool echoed = true;
};

const std::vector<Field>& fields() {
    using C = RunConfig;
    using S = const std::string&;
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        const auto size_field = [&f](std::string key, std::string help, std::size_t C::*member) {
            f.push_back({key, std::move(help), [key, member](C& c, S v) { c.*member = parse_integer<std::size_t>(key, v); },
                         [member](const C& c) { return std::to_string(c.*member); }});
        };
        const auto real_field = [&f](std::string key, std::string help, double C::*member) {
            f.push_back({key, std::move(help), [key, member](C& c, S v) { c.*member = parse_real(key, v); },
                         [member](const C& c) { return format_number(c.*member); }});
        };
        const auto train_size = [&f](std::string key, std::string help, std::size_t TrainConfig::*member) {
            f.push_back({key, std::move(help),
                         [key, member](C& c, S v) { c.train.*member = parse_integer<std::size_t>(key, v); },
                         [member](const C& c) { return std::to_string(c.train.*member); }});
        };
        const auto text_field = [&f](std::string key, std::string help, std::string C::*member, bool echoed = true) {
            f.push_back({key, std::move(help), [member](C& c, S v) { c.*member = v; },
                         [member](const C& c) { return c.*member; }, echoed});
        };

        f.push_back({"algorithm", "cd | pcd | sdcp | sdcp_var",
                     [](C& c, S v) {
                         try {
                             c.train.algorithm = parse_algorithm(v);
                         } catch (const DomainError& e) {
                             throw ConfigError(e.what());
                         }
                     },
                     [](const C& c) { return to_string(c.train.algorithm); }});
        f.push_back({"eta", "learning rate", [](C& c, S v) { c.train.eta = parse_real("eta", v); },
                     [](const C& c) { return format_number(c.train.eta); }});
        train_size("K", "Gibbs steps per update (CD/PCD)", &TrainConfig::gibbs_steps);
        train_size("d", "inner iterations per mini-batch (S-DCP)", &TrainConfig::inner_iters);
        train_size("K_prime", "Gibbs steps per inner iteration (S-DCP)", &TrainConfig::inner_gibbs_steps);
        train_size("batch_size", "mini-batch size N_B; the remainder of each epoch is dropped", &TrainConfig::batch_size);
        train_size("epochs", "number of epochs N_E", &TrainConfig::epochs);
        f.push_back({"seed", "run seed", [](C& c, S v) { c.train.seed = parse_integer<std::uint64_t>("seed", v); },
                     [](const C& c) { return std::to_string(c.train.seed); }});
        f.push_back({"variance_lr_scale", "multiplier on eta for the log-variance update",
                     [](C& c, S v) { c.train.variance_lr_scale = parse_real("variance_lr_scale", v); },
                     [](const C& c) { return format_number(c.train.variance_lr_scale); }});
        f.push_back({"learn_variance", "learn visible variances (implied by sdcp_var)",
                     [](C& c, S v) { c.train.learn_variance = parse_flag("learn_variance", v); },
                     [](const C& c) { return std::string(c.train.learn_variance ? "true" : "false"); }});
        size_field("hidden", "number of hidden units n", &C::hidden);
        real_field("tau", "hidden-bias initialization constant", &C::tau);
        text_field("train_data", "training data (IDX, or .csv/.txt); empty uses the synthetic mixture", &C::train_data);
        text_field("test_data", "optional test data", &C::test_data);
        f.push_back({"csv_delimiter", "CSV field separator (single character)",
                     [](C& c, S v) {
                         if (v.size() != 1) throw ConfigError("config key 'csv_delimiter': expected one character");
                         c.csv_delimiter = v.front();
                     },
                     [](const C& c) { return std::string(1, c.csv_delimiter); }});
        size_field("synth_components", "synthetic mixture components", &C::synth_components);
        size_field("synth_dims", "synthetic data dimension", &C::synth_dims);
        size_field("synth_samples", "synthetic training samples", &C::synth_samples);
        size_field("synth_test_samples", "synthetic test samples (0: no test split)", &C::synth_test_samples);
        real_field("synth_spread", "synthetic component separation", &C::synth_spread);
        text_field("preprocess", "none, or '+'-separated steps from {standardize, zca}", &C::preprocess);
        f.push_back({"global_standardize", "standardize with one mean/std over all dimensions",
                     [](C& c, S v) { c.global_standardize = parse_flag("global_standardize", v); },
                     [](const C& c) { return std::string(c.global_standardize ? "true" : "false"); }});
        real_field("zca_epsilon", "ZCA eigenvalue regularizer", &C::zca_epsilon);
        size_field("eval_every", "epochs between evaluations (0: 1 exact / 10 AIS)", &C::eval_every);
        text_field("eval_mode", "auto | exact | ais", &C::eval_mode);
        size_field("ais_particles", "AIS particles", &C::ais_particles);
        size_field("ais_temps", "AIS intermediate distributions", &C::ais_temps);
        text_field("out_dir", "output directory", &C::out_dir, false);
        size_field("checkpoint_every", "epochs between intermediate checkpoints (0: final only)", &C::checkpoint_every);
        f.push_back({"checkpoint_binary", "write the compact binary checkpoint variant",
                     [](C& c, S v) { c.checkpoint_binary = parse_flag("checkpoint_binary", v); },
                     [](const C& c) { return std::string(c.checkpoint_binary ? "true" : "false"); }});
        return f;
    }();
    return table;
}

const Field& field(const std::string& key) {
    for (const auto& f : fields()) {
        if (f.key == key) return f;
    }
    throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::string> preprocess_steps(const RunConfig& config) {
    std::vector<std::string> steps;
    if (config.preprocess == "none" || config.preprocess.empty()) return steps;
    std::string token;
    std::istringstream in(config.preprocess);
    while (std::getline(in, token, '+')) {
        token = trim(token);
        if (token != "standardize" && token != "zca") {
            throw ConfigError("unknown preprocessing step '" + token + "' (expected standardize or zca)");
        }
        steps.push_back(token);
    }
    return steps;
}

Dataset load_split(const std::string& path, char delimiter, Split split) {
    if (!fs::exists(path)) throw ConfigError("data file not found: " + path);
    Dataset data = load_dataset(path, delimiter);
    data.split = split;
    return data;
}

bool use_exact(const RunConfig& config, std::size_t hidden) {
    if (config.eval_mode == "exact") return true;
    if (config.eval_mode == "ais") return false;
    if (config.eval_mode == "auto") return hidden <= kMaxEnumHidden;
    throw ConfigError("eval_mode must be auto, exact or ais");
}

// Writes an output file, mapping stream failures to IoError.
class IoError : public Error {
  public:
    using Error::Error;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw IoError("failed to write " + path.string());
}

fs::path default_out_dir() {
    const char* root = std::getenv(kOutputRootEnv);
    return fs::path(root != nullptr && *root != '\0' ? root : ".") / "gbrbm-run";
}

Checkpoint make_checkpoint(const TrainState& state, const RunConfig& config) {
    Checkpoint ckpt;
    ckpt.params = state.params;
    ckpt.config = echo_config(config);
    ckpt.epoch = state.epoch;
    ckpt.update_count = state.update_count;
    ckpt.rng = state.rng;
    return ckpt;
}

// Run configuration recovered from a checkpoint's echo; unknown keys are ignored.
RunConfig config_from_echo(const Checkpoint& ckpt) {
    RunConfig config;
    for (const auto& [key, value] : ckpt.config) {
        try {
            apply_setting(config, key, value);
        } catch (const ConfigError&) {
        }
    }
    return config;
}

struct Evaluation {
    double log_z = 0.0;
    double atll = 0.0;
    std::optional<double> atell;
    std::optional<LogZEstimate> ais;
};

Evaluation evaluate(const RbmParams& params, const PreparedData& data, bool exact, const AisConfig& ais) {
    Evaluation ev;
    if (exact) {
        ev.log_z = exact_log_partition(params);
    } else {
        ev.ais = ais_log_partition(params, ais);
        ev.log_z = ev.ais->log_z;
    }
    ev.atll = avg_log_likelihood(params, data.train, ev.log_z);
    if (data.test) ev.atell = avg_log_likelihood(params, *data.test, ev.log_z);
    return ev;
}

void add_config_options(CLI::App& cmd, std::map<std::string, std::string>& overrides) {
    for (const auto& f : fields()) {
        cmd.add_option_function<std::string>(
               "--" + f.key, [&overrides, key = f.key](const std::string& v) { overrides[key] = v; }, f.help)
            ->type_name("VALUE");
    }
}

// ---- train ----------------------------------------------------------------

int cmd_train(const std::string& config_path, const std::map<std::string, std::string>& overrides,
              std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        if (!config_path.empty()) config = load_run_config(config_path);
        for (const auto& [key, value] : overrides) apply_setting(config, key, value);
        config.train.validate();
        if (config.hidden == 0) throw ConfigError("hidden must be >= 1");
        use_exact(config, config.hidden);
    } catch (const Error& e) {
        err << "gbrbm train: " << e.what() << "\n";
        return kUsageError;
    }

    PreparedData data;
    try {
        data = prepare_data(config);
        if (data.train.size() < config.train.batch_size) {
            throw ConfigError("training split has fewer samples than one mini-batch");
        }
    } catch (const Error& e) {
        err << "gbrbm train: " << e.what() << "\n";
        return kUsageError;
    }

    const bool exact = use_exact(config, config.hidden);
    if (exact && config.hidden > kMaxEnumHidden) {
        err << "gbrbm train: exact evaluation needs n <= " << kMaxEnumHidden << "; use eval_mode=ais\n";
        return kExactTooLarge;
    }
    const std::size_t eval_every = config.eval_every != 0 ? config.eval_every : (exact ? 1 : 10);
    const fs::path out_dir = config.out_dir.empty() ? default_out_dir() : fs::path(config.out_dir);

    try {
        fs::create_directories(out_dir);
        std::string log;
        for (const auto& [key, value] : echo_config(config)) log += key + "=" + value + "\n";
        log += "train_samples=" + std::to_string(data.train.size()) + "\n";
        for (const auto& step : data.train.preprocessing) log += "preprocessing=" + step + "\n";
        write_text(out_dir / "run.log", log);
    } catch (const std::exception& e) {
        err << "gbrbm train: " << e.what() << "\n";
        return kIoError;
    }

    const ModelDims dims{data.train.dims(), config.hidden};
    RngStream init_rng(config.train.seed, kInitStreamId);
    TrainState state = make_train_state(init_params(dims, data.train, config.tau, init_rng), config.train);

    std::ofstream metrics(out_dir / "metrics.csv", std::ios::binary);
    metrics << "epoch,atll,atell,wall_seconds,update_count\n";
    const auto started = std::chrono::steady_clock::now();

    for (std::size_t epoch = 1; epoch <= config.train.epochs; ++epoch) {
        // The config was validated up front, so a failure here comes from non-finite values.
        try {
            state = train_epoch(std::move(state), data.train, config.train);
        } catch (const Error& e) {
            err << "gbrbm train: training diverged in epoch " << epoch << ": " << e.what() << "\n";
            return kDiverged;
        }
        const bool finite = state.params.weights.allFinite() && state.params.hbias.allFinite() &&
                            state.params.log_var.allFinite();
        if (!finite) {
            err << "gbrbm train: parameters diverged (non-finite) at epoch " << epoch << "\n";
            return kDiverged;
        }

        if (epoch % eval_every == 0 || epoch == config.train.epochs) {
            AisConfig ais{config.ais_particles, config.ais_temps, mix_key(config.train.seed, epoch)};
            Evaluation ev;
            try {
                ev = evaluate(state.params, data, exact, ais);
            } catch (const Error& e) {
                err << "gbrbm train: evaluation failed at epoch " << epoch << ": " << e.what() << "\n";
                return kDiverged;
            }
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            metrics << epoch << ',' << format_number(ev.atll) << ','
                    << (ev.atell ? format_number(*ev.atell) : std::string()) << ',' << format_number(wall) << ','
                    << state.update_count << '\n'
                    << std::flush;
            out << "epoch " << epoch << " atll " << format_number(ev.atll);
            if (ev.atell) out << " atell " << format_number(*ev.atell);
            out << " updates " << state.update_count << "\n";
            if (!std::isfinite(ev.atll) || (ev.atell && !std::isfinite(*ev.atell))) {
                err << "gbrbm train: log-likelihood diverged at epoch " << epoch << "\n";
                return kDiverged;
            }
        }

        try {
            const bool last = epoch == config.train.epochs;
            if (config.checkpoint_every != 0 && epoch % config.checkpoint_every == 0 && !last) {
                save_checkpoint(make_checkpoint(state, config),
                                out_dir / ("checkpoint_epoch_" + std::to_string(epoch) + ".ckpt"),
                                config.checkpoint_binary);
            }
            if (last) save_checkpoint(make_checkpoint(state, config), out_dir / "model.ckpt", config.checkpoint_binary);
        } catch (const std::exception& e) {
            err << "gbrbm train: " << e.what() << "\n";
            return kIoError;
        }
    }
    if (!metrics) {
        err << "gbrbm train: failed to write metrics.csv\n";
        return kIoError;
    }
    return kOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalOptions {
    std::string checkpoint;
    std::string mode = "exact";
    std::string data;
    std::string test_data;
    std::optional<std::string> preprocess;
    std::size_t ais_particles = 100;
    std::size_t ais_temps = 10000;
    std::uint64_t seed = 0;
};

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
    if (opts.mode != "exact" && opts.mode != "ais") {
        err << "gbrbm eval: mode must be exact or ais\n";
        return kUsageError;
    }
    Checkpoint ckpt;
    PreparedData data;
    try {
        if (!fs::exists(opts.checkpoint)) throw ConfigError("checkpoint not found: " + opts.checkpoint);
        ckpt = load_checkpoint(opts.checkpoint);
        RunConfig config = config_from_echo(ckpt);
        if (!opts.data.empty()) {
            config.train_data = opts.data;
            config.test_data = opts.test_data;
        } else if (!opts.test_data.empty()) {
            config.test_data = opts.test_data;
        }
        if (opts.preprocess) config.preprocess = *opts.preprocess;
        data = prepare_data(config);
        if (data.train.dims() != ckpt.params.visible()) {
            throw ConfigError("data dimension " + std::to_string(data.train.dims()) + " does not match the model (" +
                              std::to_string(ckpt.params.visible()) + ")");
        }
    } catch (const Error& e) {
        err << "gbrbm eval: " << e.what() << "\n";
        return kUsageError;
    }

    const bool exact = opts.mode == "exact";
    if (exact && ckpt.params.hidden() > kMaxEnumHidden) {
        err << "gbrbm eval: exact mode enumerates 2^n hidden states and supports n <= " << kMaxEnumHidden
            << " (model has n = " << ckpt.params.hidden() << "); rerun with --mode ais\n";
        return kExactTooLarge;
    }
    Evaluation ev;
    try {
        ev = evaluate(ckpt.params, data, exact, AisConfig{opts.ais_particles, opts.ais_temps, opts.seed});
    } catch (const NumericalError& e) {
        err << "gbrbm eval: " << e.what() << "\n";
        return kDiverged;
    } catch (const Error& e) {
        err << "gbrbm eval: " << e.what() << "\n";
        return kUsageError;
    }
    out << "mode " << opts.mode << "\n";
    out << "log_z " << format_number(ev.log_z) << "\n";
    if (ev.ais) {
        out << "log_weight_std " << format_number(ev.ais->log_weight_std) << "\n";
        out << "particles " << ev.ais->particles_used << "\n";
    }
    out << "atll " << format_number(ev.atll) << "\n";
    if (ev.atell) out << "atell " << format_number(*ev.atell) << "\n";
    return kOk;
}

// ---- sample / filters -----------------------------------------------------

ImageShape image_shape_for(std::size_t m, std::size_t rows, std::size_t cols) {
    if (rows != 0 || cols != 0) return {rows, cols};
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m))));
    if (side * side == m) return {side, side};
    return {1, m};
}

std::string numbered(const std::string& stem, std::size_t index, std::size_t total) {
    const std::size_t width = std::max<std::size_t>(3, std::to_string(total == 0 ? 0 : total - 1).size());
    std::string digits = std::to_string(index);
    return stem + "_" + std::string(width - std::min(width, digits.size()), '0') + digits + ".pgm";
}

int cmd_sample(const std::string& checkpoint, std::size_t count, std::size_t steps, const std::string& out_dir,
               std::size_t rows, std::size_t cols, std::uint64_t seed, std::ostream& out, std::ostream& err) {
    Checkpoint ckpt;
    try {
        if (!fs::exists(checkpoint)) throw ConfigError("checkpoint not found: " + checkpoint);
        ckpt = load_checkpoint(checkpoint);
    } catch (const Error& e) {
        err << "gbrbm sample: " << e.what() << "\n";
        return kUsageError;
    }
    if (count == 0 || steps == 0) {
        err << "gbrbm sample: count and steps must be >= 1\n";
        return kUsageError;
    }
    const std::size_t m = ckpt.params.visible();
    const ImageShape shape = image_shape_for(m, rows, cols);
    if (shape.rows * shape.cols != m) {
        err << "gbrbm sample: rows*cols must equal " << m << "\n";
        return kUsageError;
    }

    const SampleMatrix samples = generate_samples(ckpt.params, count, steps, RngStream(seed, 0x5A3));
    try {
        fs::create_directories(out_dir);
        std::string csv;
        for (Eigen::Index r = 0; r < samples.rows(); ++r) {
            for (Eigen::Index c = 0; c < samples.cols(); ++c) {
                if (c != 0) csv += ',';
                csv += format_number(samples(r, c));
            }
            csv += '\n';
            const Vector row = samples.row(r).transpose();
            export_pgm(std::span<const double>(row.data(), m), shape.rows, shape.cols,
                       fs::path(out_dir) / numbered("sample", static_cast<std::size_t>(r), count));
        }
        write_text(fs::path(out_dir) / "samples.csv", csv);
        write_text(fs::path(out_dir) / "run.log", "count=" + std::to_string(count) + "\nsteps=" +
                                                      std::to_string(steps) + "\nseed=" + std::to_string(seed) + "\n");
    } catch (const std::exception& e) {
        err << "gbrbm sample: " << e.what() << "\n";
        return kIoError;
    }
    out << "steps " << steps << "\n";
    out << "wrote " << count << " samples to " << out_dir << "\n";
    return kOk;
}

int cmd_filters(const std::string& checkpoint, std::size_t rows, std::size_t cols, const std::string& out_dir,
                std::ostream& out, std::ostream& err) {
    Checkpoint ckpt;
    try {
        if (!fs::exists(checkpoint)) throw ConfigError("checkpoint not found: " + checkpoint);
        ckpt = load_checkpoint(checkpoint);
    } catch (const Error& e) {
        err << "gbrbm filters: " << e.what() << "\n";
        return kUsageError;
    }
    const std::size_t m = ckpt.params.visible();
    if (rows * cols != m) {
        err << "gbrbm filters: image_rows * image_cols = " << rows * cols << " but the model has " << m
            << " visible units\n";
        return kUsageError;
    }
    try {
        fs::create_directories(out_dir);
        const std::size_t n = ckpt.params.hidden();
        for (std::size_t j = 0; j < n; ++j) {
            const Vector column = ckpt.params.weights.col(static_cast<Eigen::Index>(j));
            export_pgm(std::span<const double>(column.data(), m), rows, cols, fs::path(out_dir) / numbered("filter", j, n));
        }
    } catch (const std::exception& e) {
        err << "gbrbm filters: " << e.what() << "\n";
        return kIoError;
    }
    out << "wrote " << ckpt.params.hidden() << " filters to " << out_dir << "\n";
    return kOk;
}

// ---- cost -----------------------------------------------------------------

int cmd_cost(std::size_t k, std::size_t d, std::size_t k_prime, std::size_t batch, double t, double l,
             std::ostream& out, std::ostream& err) {
    CostEstimate cost;
    try {
        cost = cost_model(k, d, k_prime, batch, t, l);
    } catch (const Error& e) {
        err << "gbrbm cost: " << e.what() << "\n";
        return kUsageError;
    }
    out << "K,d,K_prime,N_B,T,L,cd_cost,sdcp_cost,ratio\n";
    out << k << ',' << d << ',' << k_prime << ',' << batch << ',' << format_number(t) << ',' << format_number(l)
        << ',' << format_number(cost.cd) << ',' << format_number(cost.sdcp) << ',' << format_number(cost.ratio())
        << '\n';
    return kOk;
}

}  // namespace

// ---- config ---------------------------------------------------------------

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : fields()) keys.push_back(f.key);
    return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
    field(key).set(config, value);
}

RunConfig parse_run_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
            throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key + "' already set on line " +
                              std::to_string(it->second));
        }
        try {
            apply_setting(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), std::move(base));
}

std::vector<std::pair<std::string, std::string>> echo_config(const RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) {
        if (f.echoed) out.emplace_back(f.key, f.get(config));
    }
    return out;
}

PreparedData prepare_data(const RunConfig& config) {
    PreparedData data;
    if (!config.train_data.empty()) {
        data.train = load_split(config.train_data, config.csv_delimiter, Split::train);
        if (!config.test_data.empty()) data.test = load_split(config.test_data, config.csv_delimiter, Split::test);
    } else {
        RngStream rng(config.train.seed, kDataStreamId);
        data.train = synth_mixture(config.synth_components, config.synth_dims, config.synth_samples,
                                   config.synth_spread, rng, false);
        data.train.split = Split::train;
        if (config.synth_test_samples != 0) {
            RngStream test_rng(config.train.seed, kTestDataStreamId);
            data.test = synth_mixture(config.synth_components, config.synth_dims, config.synth_test_samples,
                                      config.synth_spread, test_rng, false);
            data.test->split = Split::test;
        }
    }
    if (data.test && data.test->dims() != data.train.dims()) throw ConfigError("train and test dimensions differ");

    const StandardizeScope scope =
        config.global_standardize ? StandardizeScope::global : StandardizeScope::per_dimension;
    for (const auto& step : preprocess_steps(config)) {
        if (step == "standardize") {
            auto [train, stats] = standardize(data.train, scope);
            data.train = std::move(train);
            if (data.test) data.test = apply_standardization(*data.test, stats);
        } else {
            const WhiteningTransform zca = zca_fit(data.train, config.zca_epsilon);
            data.train = zca_apply(zca, data.train);
            if (data.test) {
                data.test = zca_apply(zca, *data.test);
                data.test->preprocessing.back() += "[stats=train]";
            }
        }
    }
    return data;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian-Bernoulli RBM training and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::map<std::string, std::string> overrides;
    auto* train = app.add_subcommand("train", "train a model; writes metrics.csv, run.log and checkpoints");
    train->add_option("config", config_path, "key=value config file")->check(CLI::ExistingFile);
    add_config_options(*train, overrides);

    EvalOptions eval_opts;
    std::string eval_preprocess;
    auto* eval = app.add_subcommand("eval", "report ATLL/ATeLL of a checkpoint");
    eval->add_option("checkpoint", eval_opts.checkpoint, "checkpoint file")->required();
    eval->add_option("--mode", eval_opts.mode, "exact | ais")->capture_default_str();
    eval->add_option("--data", eval_opts.data, "training split (default: data recorded in the checkpoint)");
    eval->add_option("--test-data", eval_opts.test_data, "test split");
    auto* eval_pre = eval->add_option("--preprocess", eval_preprocess, "override the recorded preprocessing");
    eval->add_option("--ais-particles", eval_opts.ais_particles)->capture_default_str();
    eval->add_option("--ais-temps", eval_opts.ais_temps)->capture_default_str();
    eval->add_option("--seed", eval_opts.seed)->capture_default_str();

    std::string sample_ckpt;
    std::string sample_dir = "samples";
    std::size_t sample_count = 16;
    std::size_t sample_steps = kDefaultSampleSteps;
    std::size_t sample_rows = 0;
    std::size_t sample_cols = 0;
    std::uint64_t sample_seed = 0;
    auto* sample = app.add_subcommand("sample", "draw samples with a Gibbs sampler from random starts");
    sample->add_option("checkpoint", sample_ckpt, "checkpoint file")->required();
    sample->add_option("--count", sample_count)->capture_default_str();
    sample->add_option("--steps", sample_steps, "Gibbs steps per sample")->capture_default_str();
    sample->add_option("--out-dir", sample_dir)->capture_default_str();
    sample->add_option("--rows", sample_rows, "image rows (default: square or 1 x m)");
    sample->add_option("--cols", sample_cols, "image columns");
    sample->add_option("--seed", sample_seed)->capture_default_str();

    std::string filter_ckpt;
    std::string filter_dir = "filters";
    std::size_t filter_rows = 0;
    std::size_t filter_cols = 0;
    auto* filters = app.add_subcommand("filters", "export each hidden unit's weights as a PGM image");
    filters->add_option("checkpoint", filter_ckpt, "checkpoint file")->required();
    filters->add_option("--image-rows", filter_rows)->required();
    filters->add_option("--image-cols", filter_cols)->required();
    filters->add_option("--out-dir", filter_dir)->capture_default_str();

    std::size_t cost_k = 24, cost_d = 4, cost_kp = 6, cost_nb = 1;
    double cost_t = 1.0, cost_l = 1.0;
    auto* cost = app.add_subcommand("cost", "per-mini-batch cost of CD-K versus S-DCP");
    cost->add_option("--K", cost_k)->capture_default_str();
    cost->add_option("--d", cost_d)->capture_default_str();
    cost->add_option("--K_prime", cost_kp)->capture_default_str();
    cost->add_option("--N_B", cost_nb)->capture_default_str();
    cost->add_option("--T", cost_t, "cost of one Gibbs transition")->capture_default_str();
    cost->add_option("--L", cost_l, "cost of one gradient evaluation")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*train) return cmd_train(config_path, overrides, out, err);
        if (*eval) {
            if (*eval_pre) eval_opts.preprocess = eval_preprocess;
            return cmd_eval(eval_opts, out, err);
        }
        if (*sample) {
            return cmd_sample(sample_ckpt, sample_count, sample_steps, sample_dir, sample_rows, sample_cols,
                              sample_seed, out, err);
        }
        if (*filters) return cmd_filters(filter_ckpt, filter_rows, filter_cols, filter_dir, out, err);
        if (*cost) return cmd_cost(cost_k, cost_d, cost_kp, cost_nb, cost_t, cost_l, out, err);
    } catch (const std::exception& e) {
        err << "gbrbm: " << e.what() << "\n";
        return kFailure;
    }
    return kUsageError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("gbrbm");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    argv.push_back(nullptr);
    return run(static_cast<int>(storage.size()), argv.data(), out, err);
}

}  // namespace gbrbm::cli
