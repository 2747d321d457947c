#include "rfpca/cli.hpp"

#include "rfpca/charfun.hpp"
#include "rfpca/eval.hpp"
#include "rfpca/models.hpp"
#include "rfpca/parallel.hpp"
#include "rfpca/random.hpp"
#include "rfpca/rfpca.hpp"
#include "rfpca/serialize.hpp"
#include "rfpca/spacings.hpp"
#include "rfpca/tensor.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace rfpca::cli {
namespace {

std::string format_value(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}
std::string format_value(const std::string& v) { return v; }
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(long v) { return std::to_string(v); }
std::string format_value(unsigned long v) { return std::to_string(v); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
    std::vector<T> out;
    for (const auto& item : split(text, ',')) {
        if constexpr (std::is_same_v<T, double>) {
            out.push_back(std::stod(item));
        } else {
            out.push_back(static_cast<T>(std::stoull(item)));
        }
    }
    return out;
}

/// Registers options and remembers how to echo their resolved values.
class Registry {
public:
    explicit Registry(CLI::App* app) : app_(app) {}

    template <typename T>
    CLI::Option* add(const std::string& name, T& var, const std::string& description) {
        printers_.emplace_back(name, [&var] { return format_value(var); });
        return app_->add_option("--" + name, var, description)->capture_default_str();
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& description) {
        printers_.emplace_back(name, [&var] { return format_value(var); });
        return app_->add_flag("--" + name, var, description);
    }

    Json config() const {
        Json j = Json::object();
        for (const auto& [name, print] : printers_) j[name] = print();
        return j;
    }

    /// One-line "key=value ..." echo for CSV comment headers.
    std::string config_line() const {
        std::string line;
        for (const auto& [name, print] : printers_) line += " " + name + "=" + print();
        return line;
    }

private:
    CLI::App* app_;
    std::vector<std::pair<std::string, std::function<std::string()>>> printers_;
};

struct DataOptions {
    std::string in;
    long n = 4;
    long N = 10000;
    std::string sources = "rademacher";
    std::string mixing = "orthogonal";
    double kappa = 10.0;
    unsigned long seed = 0;

    void add_to(Registry& reg) {
        reg.add("in", in, "read samples from a .csv or binary file instead of generating");
        reg.add("n", n, "dimension of the generated model");
        reg.add("N", N, "number of generated observations");
        reg.add("sources", sources, "source kind or comma list (rademacher, uniform, gaussian, discrete:v/..:p/..)");
        reg.add("mixing", mixing, "orthogonal, conditioned or identity");
        reg.add("kappa", kappa, "condition number for --mixing conditioned");
        reg.add("seed", seed, "seed for model, sample and frequency draws");
    }
};

struct Problem {
    std::optional<ICAModel> model;
    std::optional<SampleSet> samples;
};

ICAModel build_model(const DataOptions& o) {
    if (o.n < 1) throw DomainError("--n must be at least 1");
    auto kinds = split(o.sources, ',');
    if (kinds.empty()) throw DomainError("--sources is empty");
    std::vector<SourceSpec> specs;
    for (long i = 0; i < o.n; ++i) {
        specs.push_back(SourceSpec::parse(kinds.size() == 1 ? kinds[0] : kinds.at(static_cast<std::size_t>(i))));
    }
    if (kinds.size() != 1 && static_cast<long>(kinds.size()) != o.n) {
        throw DomainError("--sources needs one kind or exactly n kinds");
    }
    const std::uint64_t mix_seed = derive_seed(o.seed, {0x6D6978ULL});
    Matrix mixing;
    if (o.mixing == "orthogonal") {
        mixing = random_mixing(o.n, MixingKind::orthogonal(), mix_seed);
    } else if (o.mixing == "conditioned") {
        mixing = random_mixing(o.n, MixingKind::conditioned(o.kappa), mix_seed);
    } else if (o.mixing == "identity") {
        mixing = Matrix::Identity(o.n, o.n);
    } else {
        throw DomainError("unknown --mixing " + o.mixing);
    }
    return ICAModel(mixing, specs, true);
}

Problem load_problem(const DataOptions& o) {
    Problem p;
    if (!o.in.empty()) {
        p.samples.emplace(read_samples(o.in));
        return p;
    }
    p.model.emplace(build_model(o));
    p.samples.emplace(sample(*p.model, o.N, o.seed));
    return p;
}

void add_model_summary(Json& j, const ICAModel& model) {
    j["delta"] = model.delta();
    j["m_bound"] = model.m_bound();
    j["k_bound"] = std::isfinite(model.k_bound()) ? Json(model.k_bound()) : Json(nullptr);
    j["identifiable"] = model.identifiable();
    j["mixing"] = to_json(model.mixing());
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

Matrix whitened_truth(const Matrix& truth, const Matrix& b) {
    Matrix t = b.ldlt().solve(truth);
    t.colwise().normalize();
    return t;
}

struct Output {
    std::string path;
    std::ostream& fallback;

    void write(const std::string& text) const {
        if (path.empty()) {
            fallback << text;
            return;
        }
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot open " + path + " for writing");
        f << text;
    }
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- commands

struct GenCommand {
    DataOptions data;
    std::string out;
    Registry reg;

    explicit GenCommand(CLI::App* app) : reg(app) {
        data.add_to(reg);
        app->add_option("--out", out, "sample file (.csv text, anything else binary)")->required();
    }

    int run(std::ostream& stdout_stream) {
        if (!data.in.empty()) throw DomainError("gen does not take --in");
        const ICAModel model = build_model(data);
        const SampleSet s = sample(model, data.N, data.seed);
        write_samples(s, out);
        if (std::filesystem::path(out).extension() == ".csv") {
            // append the resolved config as a trailing comment
            std::ofstream f(out, std::ios::app);
            f << "# config: command=gen" << reg.config_line() << '\n';
        }
        Json j;
        j["command"] = "gen";
        j["config"] = reg.config();
        j["out"] = out;
        j["n"] = s.dim();
        j["N"] = s.size();
        add_model_summary(j, model);
        stdout_stream << dump(j);
        return kExitOk;
    }
};

struct FpcaCommand {
    DataOptions data;
    double sigma = 0.0;
    int retries = 16;
    std::string gap_floor;
    double whiten_floor = 1e-8;
    int sigma_halving = 0;
    double halving_tol = 0.05;
    bool baseline = false;
    std::string out;
    Registry reg;

    explicit FpcaCommand(CLI::App* app) : reg(app) {
        data.add_to(reg);
        reg.add("sigma", sigma, "frequency scale; 0 selects the theorem setting (generated data) or 1");
        reg.add("retries", retries, "frequency draws per node");
        reg.add("gap-floor", gap_floor, "accept the first draw whose gap reaches this value");
        reg.add("whiten-floor", whiten_floor, "relative eigenvalue floor for whitening");
        reg.add("sigma-halving", sigma_halving, "start at sigma=1 and halve up to k times until stable");
        reg.add("halving-tol", halving_tol, "stability threshold for --sigma-halving");
        reg.flag("baseline", baseline, "also run the one-shot baseline");
        app->add_option("--out", out, "write the JSON artifact here");
    }

    RFPCAConfig config() const {
        RFPCAConfig c;
        c.u_retries = retries;
        if (!gap_floor.empty()) c.gap_floor = std::stod(gap_floor);
        c.whiten_eig_floor = whiten_floor;
        c.seed = data.seed;
        return c;
    }

    int run(std::ostream& stdout_stream) {
        const auto start = std::chrono::steady_clock::now();
        const Problem p = load_problem(data);
        RFPCAConfig c = config();
        const Index n = p.samples->dim();

        Json j;
        j["command"] = "fpca";
        j["config"] = reg.config();
        j["n"] = n;
        j["N"] = p.samples->size();

        FpcaResult result;
        std::string sigma_rule;
        if (sigma > 0.0) {
            c.sigma = sigma;
            sigma_rule = "flag";
            result = fpca(*p.samples, c);
        } else if (sigma_halving > 0) {
            c.sigma = 1.0;
            const auto halving = sigma_halving_run(*p.samples, c);
            result = halving.result;
            c.sigma = halving.sigma;
            sigma_rule = "halving";
            j["halving_sigmas"] = halving.sigmas;
            j["halving_changes"] = halving.changes;
        } else {
            if (p.model && p.model->delta() > 0.0 && n >= 2) {
                c.sigma = default_sigma(p.model->delta(), p.model->m_bound(), static_cast<double>(n));
                sigma_rule = "theorem";
            } else {
                c.sigma = 1.0;
                sigma_rule = "unit";
            }
            result = fpca(*p.samples, c);
        }
        j["sigma"] = c.sigma;
        j["sigma_rule"] = sigma_rule;
        if (p.model) add_model_summary(j, *p.model);
        j["basis"] = to_json(result.original.columns);
        j["basis_whitened"] = to_json(result.whitened.columns);
        if (p.model) {
            const MatchReport report = match_columns(p.model->mixing(), result.original.columns);
            j["max_error"] = report.max_error;
            j["match"] = to_json(report);
            j["match_whitened"] =
                to_json(match_columns(whitened_truth(p.model->mixing(), result.whitening_b), result.whitened.columns));
        }
        if (baseline) {
            const FpcaResult base = one_shot_baseline(*p.samples, c.sigma, c.seed);
            Json b;
            b["basis"] = to_json(base.original.columns);
            if (p.model) b["max_error"] = match_columns(p.model->mixing(), base.original.columns).max_error;
            j["baseline"] = std::move(b);
        }
        j["tree"] = to_json(result.whitened.tree);
        j["wall_ms"] = elapsed_ms(start);
        Output{out, stdout_stream}.write(dump(j));
        return kExitOk;
    }

    SigmaHalvingResult sigma_halving_run(const SampleSet& s, const RFPCAConfig& c) const {
        return rfpca::sigma_halving(s, c, sigma_halving, halving_tol);
    }
};

struct TensorCommand {
    DataOptions data;
    int retries = 16;
    bool synthetic = false;
    std::string tensor_in;
    std::string tensor_out;
    std::string out;
    Registry reg;

    explicit TensorCommand(CLI::App* app) : reg(app) {
        data.add_to(reg);
        reg.add("retries", retries, "frequency draws per node");
        reg.flag("synthetic", synthetic, "decompose the exact tensor of the generated model (orthogonal mixing)");
        reg.add("tensor-in", tensor_in, "read a binary tensor instead of estimating one");
        app->add_option("--tensor-out", tensor_out, "write the tensor in binary form");
        app->add_option("--out", out, "write the JSON artifact here");
    }

    int run(std::ostream& stdout_stream) {
        const auto start = std::chrono::steady_clock::now();
        RFPCAConfig c;
        c.sigma = 1.0;
        c.u_retries = retries;
        c.seed = data.seed;

        Json j;
        j["command"] = "tensor";
        j["config"] = reg.config();

        std::optional<ICAModel> model;
        std::optional<QuarticTensor> tensor;
        Matrix back = Matrix();
        if (!tensor_in.empty()) {
            tensor.emplace(read_tensor(tensor_in));
        } else if (synthetic) {
            if (!data.in.empty()) throw DomainError("--synthetic needs a generated model, not --in");
            model.emplace(build_model(data));
            TensorModel tm;
            tm.directions = model->mixing();
            tm.weights.resize(model->dim());
            for (Index i = 0; i < model->dim(); ++i) {
                tm.weights(i) = source_moments(model->sources()[static_cast<std::size_t>(i)]).cum4;
            }
            tensor.emplace(synth_tensor(tm));
        } else {
            Problem p = load_problem(data);
            model = p.model;
            const Index n = p.samples->dim();
            const Whitening global = whiten(*p.samples, Matrix::Identity(n, n), c);
            back = global.b;
            tensor.emplace(empirical_cum4_tensor(SampleSet(RowMatrix(global.whitened), p.samples->seed())));
        }
        if (!tensor_out.empty()) write_tensor(*tensor, tensor_out);

        const Index n = tensor->dim();
        const RecoveredBasis basis = recursive_decompose(*tensor, Matrix::Identity(n, n), c);
        Matrix columns = basis.columns;
        if (back.size()) {
            columns = back * columns;
            columns.colwise().normalize();
        }
        j["n"] = n;
        j["tensor_max_abs"] = tensor->max_abs();
        if (model) add_model_summary(j, *model);
        j["basis"] = to_json(columns);
        if (model) {
            const MatchReport report = match_columns(model->mixing(), columns);
            j["max_error"] = report.max_error;
            j["match"] = to_json(report);
        }
        j["tree"] = to_json(basis.tree);
        j["wall_ms"] = elapsed_ms(start);
        Output{out, stdout_stream}.write(dump(j));
        return kExitOk;
    }
};

struct SpacingsCommand {
    std::string mode = "trials";
    long n = 256;
    int degree = 2;
    double coef = 1.0;
    long trials = 1000;
    unsigned long seed = 0;
    std::string n_values = "256,1024,4096";
    double a = 0.01;
    double b = 0.4;
    long iters = 100;
    std::string format = "csv";
    std::string out;
    Registry reg;

    explicit SpacingsCommand(CLI::App* app) : reg(app) {
        reg.add("mode", mode, "trials, scaling, cubic or recurrence")
            ->check(CLI::IsMember({"trials", "scaling", "cubic", "recurrence"}));
        reg.add("n", n, "ensemble size for --mode trials");
        reg.add("degree", degree, "polynomial degree d for --mode trials");
        reg.add("coef", coef, "common coefficient a_i for --mode trials");
        reg.add("trials", trials, "Monte Carlo trials per table row");
        reg.add("seed", seed, "trial seed");
        reg.add("n-values", n_values, "comma list of n for scaling and cubic modes");
        reg.add("a", a, "recurrence parameter a");
        reg.add("b", b, "recurrence parameter b");
        reg.add("iters", iters, "recurrence iterations");
        reg.add("format", format, "csv or json (recurrence is always json)")->check(CLI::IsMember({"csv", "json"}));
        app->add_option("--out", out, "write the artifact here");
    }

    int run(std::ostream& stdout_stream) {
        Json j;
        j["command"] = "spacings";
        j["config"] = reg.config();
        std::vector<SpacingTableRow> table;
        std::string extra;

        if (mode == "recurrence") {
            const RecurrenceResult r = recurrence_check(a, b, iters);
            j["max_y"] = r.max_y;
            j["ok"] = r.ok;
            j["bound"] = 2.0 * a;
            Output{out, stdout_stream}.write(dump(j));
            return kExitOk;
        }
        if (mode == "trials") {
            GapEnsemble ensemble;
            ensemble.coefficients = Vector::Constant(n, coef);
            ensemble.degree = degree;
            const SpacingTrialStats stats = spacing_trials(ensemble, trials, seed);
            table.push_back(to_table_row(stats));
            const double ln = std::log(static_cast<double>(n));
            j["theorem_probability"] = n >= 2 ? Json(1.0 / (2000.0 * ln * ln)) : Json(nullptr);
        } else {
            const auto ns = parse_list<Index>(n_values);
            const auto rows = mode == "scaling" ? gaussian_gap_scaling(ns, trials, seed) : cubic_counterexample(ns, trials, seed);
            for (const auto& r : rows) table.push_back(to_table_row(r));
            if (mode == "cubic") {
                const double slope = loglog_slope(rows);
                const double control = loglog_slope(quadratic_control(ns, trials, seed));
                j["loglog_slope"] = slope;
                j["control_loglog_slope"] = control;
                extra = "# loglog_slope=" + format_value(slope) + " control_loglog_slope=" + format_value(control) + "\n";
            } else {
                Json scaled = Json::array();
                for (const auto& r : rows) {
                    scaled.push_back({{"n", r.n},
                                      {"mingap_times_n2", r.median_mingap * static_cast<double>(r.n * r.n)},
                                      {"maxgap_times_sqrt_ln_n", r.median_maxgap * std::sqrt(std::log(static_cast<double>(r.n)))}});
                }
                j["scaled"] = std::move(scaled);
            }
        }

        if (format == "json") {
            Json rows = Json::array();
            for (const auto& r : table) {
                Json row;
                row["n"] = r.n;
                row["trials"] = r.trials;
                row["median_maxgap"] = std::isfinite(r.median_maxgap) ? Json(r.median_maxgap) : Json(nullptr);
                row["median_mingap"] = std::isfinite(r.median_mingap) ? Json(r.median_mingap) : Json(nullptr);
                row["success_frequency"] = std::isfinite(r.success_frequency) ? Json(r.success_frequency) : Json(nullptr);
                row["bound_value"] = std::isfinite(r.bound_value) ? Json(r.bound_value) : Json(nullptr);
                rows.push_back(std::move(row));
            }
            j["rows"] = std::move(rows);
            Output{out, stdout_stream}.write(dump(j));
        } else {
            std::ostringstream os;
            os << "# config: command=spacings" << reg.config_line() << '\n' << extra;
            write_spacing_csv(os, table);
            Output{out, stdout_stream}.write(os.str());
        }
        return kExitOk;
    }
};

struct SweepCommand {
    std::string n_values = "8";
    std::string sample_counts = "25000,100000";
    std::string seeds = "0,1,2";
    std::string algorithms = "rfpca,oneshot";
    std::string sources = "rademacher";
    double sigma = 0.5;
    int retries = 16;
    std::string out;
    Registry reg;

    explicit SweepCommand(CLI::App* app) : reg(app) {
        reg.add("n-values", n_values, "comma list of dimensions");
        reg.add("N-values", sample_counts, "comma list of sample counts");
        reg.add("seeds", seeds, "comma list of seeds");
        reg.add("algorithms", algorithms, "comma list from rfpca, oneshot, tensor");
        reg.add("sources", sources, "source kind for every coordinate");
        reg.add("sigma", sigma, "frequency scale");
        reg.add("retries", retries, "frequency draws per node");
        app->add_option("--out", out, "write the CSV here");
    }

    int run(std::ostream& stdout_stream) {
        SweepGrid grid;
        grid.n_values = parse_list<Index>(n_values);
        grid.sample_counts = parse_list<Index>(sample_counts);
        grid.seeds = parse_list<std::uint64_t>(seeds);
        grid.algorithms = split(algorithms, ',');
        grid.source = SourceSpec::parse(sources);
        grid.config.sigma = sigma;
        grid.config.u_retries = retries;
        grid.config.validate();
        const auto rows = sample_complexity_sweep(grid);
        std::ostringstream os;
        os << "# config: command=sweep" << reg.config_line() << '\n';
        write_sweep_csv(os, rows);
        Output{out, stdout_stream}.write(os.str());
        return kExitOk;
    }
};

struct InspectCommand {
    DataOptions data;
    std::string u;
    std::string out;
    Registry reg;

    explicit InspectCommand(CLI::App* app) : reg(app) {
        data.add_to(reg);
        reg.add("u", u, "comma-separated frequency vector")->required();
        app->add_option("--out", out, "write the JSON artifact here");
    }

    int run(std::ostream& stdout_stream) {
        const Problem p = load_problem(data);
        const auto values = parse_list<double>(u);
        const Vector freq = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
        if (freq.size() != p.samples->dim()) throw DomainError("--u length must equal the data dimension");
        const WeightedStats stats = reweighted_covariance(*p.samples, freq);
        Json j;
        j["command"] = "inspect";
        j["config"] = reg.config();
        j["u"] = to_json(freq);
        j["stats"] = to_json(stats);
        if (p.model) {
            try {
                const CMatrix exact = analytic_d2psi(*p.model, freq);
                j["analytic_d2psi"] = to_json(exact);
                j["spectral_error_real"] =
                    Eigen::JacobiSVD<Matrix>(stats.sigma_u.real() - exact.real()).singularValues()(0);
            } catch (const UnsupportedOracleError&) {
                j["analytic_d2psi"] = nullptr;
            }
        }
        Output{out, stdout_stream}.write(dump(j));
        return kExitOk;
    }
};

// ------------------------------------------------------------- config files

std::vector<std::pair<std::string, std::string>> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::vector<std::pair<std::string, std::string>> out;

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        const Json doc = Json::parse(text);
        const Json& cfg = doc.contains("config") ? doc["config"] : doc;
        for (const auto& [key, value] : cfg.items()) {
            out.emplace_back(key, value.is_string() ? value.get<std::string>() : value.dump());
        }
        return out;
    }
    // CSV artifacts carry their config as a "# config: key=value ..." comment
    std::istringstream scan(text);
    std::string line;
    while (std::getline(scan, line)) {
        line = trim(line);
        if (line.rfind("# config:", 0) != 0) continue;
        std::istringstream tokens(line.substr(9));
        std::string token;
        while (tokens >> token) {
            const auto eq = token.find('=');
            if (eq != std::string::npos) out.emplace_back(token.substr(0, eq), token.substr(eq + 1));
        }
    }
    if (!out.empty()) return out;

    std::istringstream lines(text);
    while (std::getline(lines, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw CLI::ConversionError("config line without '=': " + line);
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

/// Flags given on the command line override config-file values.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return args;
    for (const auto& [key, value] : load_config(path)) {
        if (key == "command" || value.empty()) continue;
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (!given) args.push_back(flag + "=" + value);
    }
    return args;
}

} // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Recursive max-gap decompositions for ICA: Fourier PCA, cumulant tensors, spacing studies"};
    app.name("rfpca");
    app.require_subcommand(1);
    app.fallthrough();
    long threads = 0;
    app.add_option("--threads", threads, "worker cap (default: RFPCA_THREADS or all cores)");
    app.add_option("--config", "key=value file or a previous JSON artifact; flags override it");

    auto* gen_app = app.add_subcommand("gen", "generate a model and write a sample file");
    auto* fpca_app = app.add_subcommand("fpca", "Recursive Fourier PCA");
    auto* tensor_app = app.add_subcommand("tensor", "cumulant tensor + recursive max-gap decomposition");
    auto* spacings_app = app.add_subcommand("spacings", "max-gap statistics and the error recurrence");
    auto* sweep_app = app.add_subcommand("sweep", "error versus sample count");
    auto* inspect_app = app.add_subcommand("inspect", "reweighted statistics at a frequency");

    GenCommand gen(gen_app);
    FpcaCommand fpca_cmd(fpca_app);
    TensorCommand tensor(tensor_app);
    SpacingsCommand spacings(spacings_app);
    SweepCommand sweep(sweep_app);
    InspectCommand inspect(inspect_app);

    try {
        std::vector<std::string> args = merge_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (threads > 0) set_thread_count(static_cast<std::size_t>(threads));

    try {
        if (*gen_app) return gen.run(out);
        if (*fpca_app) return fpca_cmd.run(out);
        if (*tensor_app) return tensor.run(out);
        if (*spacings_app) return spacings.run(out);
        if (*sweep_app) return sweep.run(out);
        if (*inspect_app) return inspect.run(out);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitUsage;
}

} // namespace rfpca::cli
