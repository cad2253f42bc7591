#include "app.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "billiard/body_io.hpp"
#include "billiard/chain.hpp"
#include "billiard/diagnostics.hpp"
#include "billiard/errors.hpp"
#include "billiard/geometry.hpp"
#include "billiard/spectral2d.hpp"
#include "billiard/stats.hpp"
#include "billiard/witness.hpp"

namespace billiard::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

enum class Format { csv, json };

using Cell = std::variant<std::int64_t, double, std::string>;

/// Streams rows to <dir>/<stem>.csv or <stem>.json. JSON output is
/// {"columns": [...], "rows": [[...], ...]} with non-finite numbers as null.
class Table {
public:
    Table(const fs::path& dir, const std::string& stem, Format format, std::vector<std::string> columns)
        : format_(format), columns_(std::move(columns)) {
        path_ = dir / (stem + (format == Format::csv ? ".csv" : ".json"));
        out_.open(path_, std::ios::binary | std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot write '" + path_.string() + "'");
        if (format_ == Format::csv) {
            for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
            out_ << '\n';
        } else {
            out_ << "{\"columns\":" << nlohmann::json(columns_).dump() << ",\"rows\":[";
        }
    }

    void row(const std::vector<Cell>& cells) {
        if (cells.size() != columns_.size()) throw std::logic_error("table row width mismatch");
        if (format_ == Format::json) out_ << (rows_ ? ",\n[" : "\n[");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            write_cell(cells[i]);
        }
        out_ << (format_ == Format::csv ? "\n" : "]");
        ++rows_;
    }

    void close() {
        if (!out_.is_open()) return;
        if (format_ == Format::json) out_ << "\n]}\n";
        out_.close();
        if (!out_) throw std::runtime_error("write failed for '" + path_.string() + "'");
    }

    ~Table() {
        if (out_.is_open()) out_.close();
    }

    const fs::path& path() const { return path_; }
    std::size_t rows() const { return rows_; }

private:
    void write_cell(const Cell& c) {
        if (const auto* i = std::get_if<std::int64_t>(&c)) {
            out_ << *i;
        } else if (const auto* d = std::get_if<double>(&c)) {
            if (format_ == Format::json && !std::isfinite(*d)) out_ << "null";
            else out_ << format_number(*d);
        } else {
            const auto& s = std::get<std::string>(c);
            if (format_ == Format::json) out_ << nlohmann::json(s).dump();
            else out_ << s;
        }
    }

    Format format_;
    std::vector<std::string> columns_;
    fs::path path_;
    std::ofstream out_;
    std::size_t rows_ = 0;
};

Cell cell(std::size_t v) { return static_cast<std::int64_t>(v); }
Cell cell(int v) { return static_cast<std::int64_t>(v); }
Cell cell(double v) { return v; }

Json to_json(const Vector& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

// Options shared by the experiment commands.
struct Common {
    std::string body_path;
    std::string body_json;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string out;
    std::string format = "csv";
    int threads = 1;
};

void add_body_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--body", c.body_path, "Body spec JSON file");
    cmd->add_option("--body-json", c.body_json, "Inline body spec JSON");
}

void add_output_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--out", c.out, std::string("Output directory (default: $") + kOutDirEnv + " or ./out)");
    cmd->add_option("--format", c.format, "Data file format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

void add_threads(CLI::App* cmd, Common& c) {
    cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
}

void add_stream(CLI::App* cmd, Common& c) {
    cmd->add_option("--stream", c.stream, "Base RNG stream index")->capture_default_str();
}

ConvexBody load_body(const Common& c) {
    if (c.body_path.empty() == c.body_json.empty()) throw InputError("exactly one of --body and --body-json is required");
    if (!c.body_path.empty()) return ConvexBody(load_body_spec(c.body_path));
    return ConvexBody(parse_body_spec(c.body_json));
}

BoundaryPoint start_point(const ConvexBody& body, const std::vector<double>& direction) {
    if (direction.empty()) return body.extreme_point();
    if (static_cast<int>(direction.size()) != body.dim())
        throw InputError("start direction has " + std::to_string(direction.size()) + " components, body has dimension " +
                         std::to_string(body.dim()));
    return body.boundary_toward(Eigen::Map<const Vector>(direction.data(), body.dim()));
}

Json point_json(const BoundaryPoint& x) { return Json{{"position", to_json(x.position)}, {"normal", to_json(x.normal)}}; }

std::string iso_time_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// One experiment invocation: owns the output directory and assembles manifest.json.
class Session {
public:
    Session(const std::string& command, const std::vector<std::string>& args, const Common& c) : common_(c) {
        std::string dir = c.out;
        if (dir.empty()) {
            const char* env = std::getenv(kOutDirEnv);
            dir = env && *env ? env : "out";
        }
        dir_ = dir;
        fs::create_directories(dir_);
        format_ = c.format == "json" ? Format::json : Format::csv;
        manifest_["command"] = command;
        manifest_["version"] = kVersion;
        manifest_["argv"] = args;
        manifest_["seed"] = c.seed;
        manifest_["config"] = Json::object();
        manifest_["streams"] = Json::object();
        manifest_["results"] = Json::object();
        manifest_["outputs"] = Json::array();
        started_ = std::chrono::steady_clock::now();
    }

    Json& config() { return manifest_["config"]; }
    Json& streams() { return manifest_["streams"]; }
    Json& results() { return manifest_["results"]; }
    void set_body(const ConvexBody& body) {
        Json spec = body_spec_to_json(body.spec());
        manifest_["body"] = Json::parse(spec.dump());
    }

    Table table(const std::string& stem, std::vector<std::string> columns) {
        return Table(dir_, stem, format_, std::move(columns));
    }

    void finish(Table& t) {
        t.close();
        manifest_["outputs"].push_back({{"file", t.path().filename().string()}, {"rows", t.rows()}});
    }

    void write_manifest() {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
        manifest_["threads"] = common_.threads;
        manifest_["compiler"] = __VERSION__;
        manifest_["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                                "." + std::to_string(EIGEN_MINOR_VERSION)},
                                  {"boost", BOOST_LIB_VERSION},
                                  {"cli11", CLI11_VERSION}};
        manifest_["finished_at"] = iso_time_utc();
        manifest_["wall_time_s"] = wall;
        std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
        out << manifest_.dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write manifest.json");
    }

    const fs::path& dir() const { return dir_; }

private:
    Common common_;
    fs::path dir_;
    Format format_ = Format::csv;
    Json manifest_;
    std::chrono::steady_clock::time_point started_;
};

// ---------------------------------------------------------------------------

struct RunArgs {
    std::uint64_t steps = 1000;
    std::uint64_t burn_in = 1000;
    std::uint64_t thin = 1;
    std::size_t replicas = 1;
    std::string law = "cosine";
    std::vector<double> start;
};

void cmd_run(const RunArgs& a, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    const ConvexBody body = load_body(c);
    const DirectionLaw law = parse_direction_law(a.law);
    if (a.steps == 0 || a.thin == 0 || a.replicas == 0) throw InputError("run: steps, thin and replicas must be positive");
    const BoundaryPoint x0 = start_point(body, a.start);

    Session s("run", argv, c);
    s.set_body(body);
    s.config() = {{"steps", a.steps}, {"burn_in", a.burn_in}, {"thin", a.thin}, {"replicas", a.replicas},
                  {"law", a.law},     {"start", point_json(x0)}, {"total_steps_per_replica", a.burn_in + a.steps * a.thin}};
    s.streams()["replica r"] = "stream " + std::to_string(c.stream) + " + r";

    std::vector<std::string> cols{"replica", "k"};
    for (int i = 1; i <= body.dim(); ++i) cols.push_back("x_" + std::to_string(i));
    cols.insert(cols.end(), {"chord", "cos_out", "cos_in"});
    Table t = s.table("trajectory", cols);

    Json finals = Json::array();
    std::vector<Cell> row;
    for (std::size_t r = 0; r < a.replicas; ++r) {
        ChainConfig cfg;
        cfg.start = x0;
        cfg.steps = a.burn_in + a.steps * a.thin;
        cfg.burn_in = a.burn_in;
        cfg.thin = a.thin;
        cfg.seed = c.seed;
        cfg.stream = c.stream + r;
        cfg.law = law;
        const ChainState end = run(body, cfg, [&](const StepRecord& rec) {
            row.clear();
            row.push_back(cell(r));
            row.push_back(static_cast<std::int64_t>(rec.index));
            for (double x : rec.position) row.push_back(x);
            row.insert(row.end(), {rec.chord, rec.cos_out, rec.cos_in});
            t.row(row);
        });
        finals.push_back({{"replica", r},
                          {"steps_taken", end.steps_taken},
                          {"rng", {{"seed", end.rng.seed()}, {"stream", end.rng.stream()}, {"counter", end.rng.counter()}}},
                          {"state", point_json(end.position)}});
    }
    s.finish(t);
    s.results()["rows"] = t.rows();
    s.results()["checkpoints"] = finals;
    s.write_manifest();
    out << "wrote " << t.rows() << " rows to " << t.path().string() << '\n';
}

// ---------------------------------------------------------------------------

struct SpectralArgs {
    int bins = 512;
    int quad_points = 4;
    int near_quad_points = 16;
    int near_band = 3;
    bool matrix = false;
};

void cmd_spectral(const SpectralArgs& a, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    const ConvexBody body = load_body(c);
    if (a.matrix && a.bins > 1024) throw InputError("spectral: --matrix is limited to --bins <= 1024");
    TransitionOptions opt;
    opt.quad_points = a.quad_points;
    opt.near_quad_points = a.near_quad_points;
    opt.near_band = a.near_band;
    opt.threads = c.threads;

    Session s("spectral", argv, c);
    s.set_body(body);
    s.config() = {{"bins", a.bins},           {"quad_points", a.quad_points}, {"near_quad_points", a.near_quad_points},
                  {"near_band", a.near_band}, {"matrix", a.matrix}};
    s.streams()["none"] = "deterministic quadrature";

    const TransitionMatrix t = build_transition_matrix(body, a.bins, opt);
    const MatrixChecks checks = check_matrix(t);
    const Eigen::VectorXd pi = stationary_distribution(t);
    double total = 0.0;
    for (double l : t.bin_lengths) total += l;
    double uniform_dev = 0.0;
    for (int i = 0; i < t.bins; ++i)
        uniform_dev = std::max(uniform_dev, std::abs(pi[i] * total / t.bin_lengths[static_cast<std::size_t>(i)] - 1.0));
    const SpectralSummary sum = spectral_summary(t);

    Table eigs = s.table("eigs", {"k", "lambda"});
    for (std::size_t k = 0; k < sum.eigenvalues.size(); ++k) eigs.row({cell(k), sum.eigenvalues[k]});
    s.finish(eigs);

    Table sweep = s.table("sweep", {"cut_index", "conductance"});
    for (std::size_t l = 0; l < sum.sweep_profile.size(); ++l) sweep.row({cell(l + 1), sum.sweep_profile[l]});
    s.finish(sweep);

    if (a.matrix) {
        std::vector<std::string> cols{"i"};
        for (int j = 0; j < t.bins; ++j) cols.push_back("p_" + std::to_string(j));
        Table m = s.table("matrix", cols);
        std::vector<Cell> row;
        for (int i = 0; i < t.bins; ++i) {
            row.assign(1, cell(i));
            for (int j = 0; j < t.bins; ++j) row.push_back(t.P(i, j));
            m.row(row);
        }
        s.finish(m);
    }

    s.results() = {{"gap", sum.gap},
                   {"signed_gap", sum.signed_gap},
                   {"cheeger_lower", sum.cheeger_lower},
                   {"cheeger_upper", sum.cheeger_upper},
                   {"best_cut",
                    {{"start", sum.best_cut.start},
                     {"length", sum.best_cut.length},
                     {"mass", sum.best_cut.mass},
                     {"conductance", sum.best_cut.conductance}}},
                   {"max_row_sum_error", checks.max_row_sum_error},
                   {"max_balance_error", checks.max_balance_error},
                   {"min_entry", checks.min_entry},
                   {"stationary_max_relative_deviation", uniform_dev}};
    s.write_manifest();
    out << "gap " << format_number(sum.gap) << " lambda_1 " << format_number(sum.eigenvalues.size() > 1 ? sum.eigenvalues[1] : 1.0)
        << '\n';
}

// ---------------------------------------------------------------------------

struct FQuantileArgs {
    std::size_t samples = 1000000;
    double level = 1.0 / 128.0;
    std::vector<double> start;
};

void cmd_f_quantile(const FQuantileArgs& a, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    const ConvexBody body = load_body(c);
    const BoundaryPoint x = start_point(body, a.start);
    Session s("f-quantile", argv, c);
    s.set_body(body);
    s.config() = {{"samples", a.samples}, {"level", a.level}, {"point", point_json(x)}};
    s.streams()["chords"] = "stream " + std::to_string(c.stream);

    RngStream rng(c.seed, c.stream);
    if (a.samples < 10000) throw InputError("f-quantile: need at least 1e4 samples");
    const QuantileEstimate q = quantile_of_sorted(one_step_chords(body, x, a.samples, rng), a.level);

    Table t = s.table("fquant", {"body", "n", "level", "F", "ci_lo", "ci_hi"});
    t.row({std::string(body.kind()), cell(body.dim()), q.level, q.value, q.ci_lo, q.ci_hi});
    s.finish(t);
    s.results() = {{"F", q.value}, {"ci_lo", q.ci_lo}, {"ci_hi", q.ci_hi}, {"F_sqrt_n", q.value * std::sqrt(body.dim())}};
    s.write_manifest();
    out << "F " << format_number(q.value) << '\n';
}

// ---------------------------------------------------------------------------

struct SGammaArgs {
    std::vector<double> gammas{0.25};
    std::size_t mc_points = 100000;
    std::vector<double> start;
};

void cmd_s_gamma(const SGammaArgs& a, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    const ConvexBody body = load_body(c);
    const BoundaryPoint x = start_point(body, a.start);
    Session s("s-gamma", argv, c);
    s.set_body(body);
    s.config() = {{"gammas", a.gammas}, {"mc_points", a.mc_points}, {"point", point_json(x)}};
    s.streams()["ball offsets"] = "stream " + std::to_string(c.stream) + ", restarted for every gamma";

    Table t = s.table("sgamma", {"gamma", "t", "g_t", "se"});
    Json degenerate = Json::array();
    for (double g : a.gammas) {
        RngStream rng(c.seed, c.stream);
        const SGammaEstimate e = s_gamma(body, x, g, a.mc_points, rng);
        t.row({e.gamma, e.t, e.g_t, e.se});
        if (e.degenerate) degenerate.push_back(g);
        out << "gamma " << format_number(g) << " s " << format_number(e.t) << '\n';
    }
    s.finish(t);
    s.results()["degenerate_gammas"] = degenerate;
    s.write_manifest();
}

// ---------------------------------------------------------------------------

struct OverlapArgs {
    std::vector<double> u;
    std::vector<double> v;
    std::size_t samples = 100000;
    std::size_t f_samples = 100000;
    int bins = 64;
    bool orthants = false;
    double threshold = 0.9;
};

void cmd_overlap(const OverlapArgs& a, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    const ConvexBody body = load_body(c);
    const BoundaryPoint u = start_point(body, a.u);
    const BoundaryPoint v = start_point(body, a.v);
    const Partition partition = Partition::for_body(body, a.bins, a.orthants);

    Session s("overlap", argv, c);
    s.set_body(body);
    s.config() = {{"u", point_json(u)},          {"v", point_json(v)},         {"samples", a.samples},
                  {"f_samples", a.f_samples},    {"partition", partition.signature()}, {"threshold", a.threshold}};
    const std::uint64_t b = 2 * c.stream;
    s.streams() = {{"steps from u", "stream " + std::to_string(b)},
                   {"steps from v", "stream " + std::to_string(b + 1)},
                   {"F at u", "stream " + std::to_string(b + 2)},
                   {"F at v", "stream " + std::to_string(b + 3)}};

    const double tv = overlap_tv(body, u, v, a.samples, partition, RngStream(c.seed, c.stream));
    RngStream ru(c.seed, b + 2);
    RngStream rv(c.seed, b + 3);
    const double fu = estimate_F(body, u, a.f_samples, ru).value;
    const double fv = estimate_F(body, v, a.f_samples, rv).value;
    const double distance = (u.position - v.position).norm();
    const double bound = std::min(fu, fv) / (100.0 * std::sqrt(static_cast<double>(body.dim())));
    const bool hypothesis = distance < bound;

    Table t = s.table("overlap", {"distance", "hypothesis_bound", "hypothesis_holds", "tv", "threshold", "below_threshold"});
    t.row({distance, bound, cell(hypothesis ? 1 : 0), tv, a.threshold, cell(tv <= a.threshold ? 1 : 0)});
    s.finish(t);
    s.results() = {{"tv", tv},          {"distance", distance}, {"F_u", fu},
                   {"F_v", fv},         {"hypothesis_bound", bound}, {"hypothesis_holds", hypothesis},
                   {"threshold", a.threshold}, {"below_threshold", tv <= a.threshold}};
    s.write_manifest();
    out << "tv " << format_number(tv) << (hypothesis ? " (hypothesis holds)" : " (hypothesis fails)") << '\n';
}

// ---------------------------------------------------------------------------

struct MixingArgs {
    std::size_t replicas = 10000;
    int bins = 64;
    bool orthants = false;
    std::vector<std::size_t> checkpoints{0, 1, 2, 4, 8, 16, 32, 64};
    double threshold = 0.1;
    std::string law = "cosine";
    std::vector<double> start;
};

void cmd_mixing(const MixingArgs& a, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    const ConvexBody body = load_body(c);
    const BoundaryPoint x0 = start_point(body, a.start);
    const Partition partition = Partition::for_body(body, a.bins, a.orthants);
    Session s("mixing", argv, c);
    s.set_body(body);
    s.config() = {{"replicas", a.replicas},    {"partition", partition.signature()}, {"checkpoints", a.checkpoints},
                  {"threshold", a.threshold}, {"law", a.law},                       {"start", point_json(x0)}};
    s.streams()["replica r"] = "stream r";

    ChainConfig cfg;
    cfg.start = x0;
    cfg.seed = c.seed;
    cfg.law = parse_direction_law(a.law);
    const MixingCurve curve = mixing_curve(body, cfg, partition, a.replicas, a.checkpoints, c.threads);

    Table t = s.table("mixing", {"k", "tv", "se"});
    for (std::size_t i = 0; i < curve.checkpoints.size(); ++i) t.row({cell(curve.checkpoints[i]), curve.tv[i], curve.se[i]});
    s.finish(t);
    const auto hit = first_below(curve, a.threshold);
    s.results() = {{"warm_start", curve.warm_start}, {"first_below_threshold", hit ? Json(*hit) : Json(nullptr)}};
    s.write_manifest();
    out << "first checkpoint below " << format_number(a.threshold) << ": " << (hit ? std::to_string(*hit) : "none") << '\n';
}

// ---------------------------------------------------------------------------

struct CapsuleArgs {
    std::vector<int> dims{8, 16, 32, 64};
    double half_length = 8.0;
    std::size_t replicas = 100000;
    std::size_t tau_replicas = 200;
    std::size_t step_cap = 1000000;
};

void cmd_capsule(const CapsuleArgs& a, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    Session s("capsule", argv, c);
    s.config() = {{"dims", a.dims},
                  {"half_length", a.half_length},
                  {"radius", 1.0},
                  {"replicas", a.replicas},
                  {"tau_replicas", a.tau_replicas},
                  {"step_cap", a.step_cap}};
    s.streams() = {{"increment replica r", "stream r"}, {"passage replica j", "stream replicas + j"}};

    CapsuleOptions opt;
    opt.replicas = a.replicas;
    opt.tau_replicas = a.tau_replicas;
    opt.step_cap = a.step_cap;
    opt.seed = c.seed;
    opt.threads = c.threads;

    Table t = s.table("capsule", {"n", "L", "var_z1_hat", "var_z1_quad", "tau_median"});
    Json per_n = Json::array();
    std::vector<double> log_n, log_var;
    for (int n : a.dims) {
        const CapsuleReport r = capsule_experiment(n, a.half_length, opt);
        t.row({cell(n), a.half_length, r.var_z1_hat, r.var_z1_quad, r.tau_median});
        per_n.push_back({{"n", n},
                         {"mean_z1", r.mean_z1},
                         {"mean_z1_se", r.mean_z1_se},
                         {"var_z1_hat", r.var_z1_hat},
                         {"var_z1_se", r.var_z1_se},
                         {"var_z1_quad", r.var_z1_quad},
                         {"level", r.level},
                         {"tau_median", r.tau_median},
                         {"censored", r.censored}});
        log_n.push_back(std::log(n));
        log_var.push_back(std::log(r.var_z1_hat));
        out << "n " << n << " var_z1 " << format_number(r.var_z1_hat) << '\n';
    }
    s.finish(t);
    s.results()["per_dimension"] = per_n;
    if (log_n.size() >= 2) s.results()["log_var_slope"] = stats::slope(log_n, log_var);
    s.write_manifest();
}

// ---------------------------------------------------------------------------

struct FractionArgs {
    std::uint64_t steps = 1000000;
    std::uint64_t burn_in = 1000;
    std::uint64_t thin = 1;
    int coord = 0;
    double above = 0.5;
    std::size_t batches = 50;
    std::string law = "cosine";
    std::vector<double> start;
};

void cmd_fraction(const FractionArgs& a, const Common& c, const std::vector<std::string>& argv, std::ostream& out) {
    const ConvexBody body = load_body(c);
    const int coord = a.coord == 0 ? body.dim() : a.coord;
    if (coord < 1 || coord > body.dim()) throw InputError("fraction: --coord must lie in 1..dim");
    if (a.steps == 0 || a.thin == 0) throw InputError("fraction: steps and thin must be positive");
    const BoundaryPoint x0 = start_point(body, a.start);
    Session s("fraction", argv, c);
    s.set_body(body);
    s.config() = {{"steps", a.steps}, {"burn_in", a.burn_in}, {"thin", a.thin}, {"coord", coord},
                  {"above", a.above}, {"batches", a.batches}, {"law", a.law},   {"start", point_json(x0)}};
    s.streams()["chain"] = "stream " + std::to_string(c.stream);

    ChainConfig cfg;
    cfg.start = x0;
    cfg.steps = a.burn_in + a.steps * a.thin;
    cfg.burn_in = a.burn_in;
    cfg.thin = a.thin;
    cfg.seed = c.seed;
    cfg.stream = c.stream;
    cfg.law = parse_direction_law(a.law);
    const int i = coord - 1;
    const double above = a.above;
    const stats::MeanSe f = boundary_fraction(body, cfg, [i, above](const Vector& x) { return x[i] > above; }, a.batches);

    Table t = s.table("fraction", {"coord", "above", "fraction", "se", "records"});
    t.row({cell(coord), a.above, f.mean, f.se, cell(static_cast<std::size_t>(cfg.record_count()))});
    s.finish(t);
    s.results() = {{"fraction", f.mean}, {"se", f.se}};
    s.write_manifest();
    out << "fraction " << format_number(f.mean) << " se " << format_number(f.se) << '\n';
}

// ---------------------------------------------------------------------------

int cmd_validate(const Common& c, std::size_t points, std::ostream& out) {
    const ConvexBody body = load_body(c);
    RngStream rng(c.seed, c.stream);
    const auto sample = sample_boundary_points(body, points, rng);
    const WitnessReport curv = curvature_witness(body, sample, rng);
    const WitnessReport diam = diameter_witness(body, sample);
    out << "kind " << body.kind() << '\n'
        << "dimension " << body.dim() << '\n'
        << "C " << format_number(body.curvature_bound()) << '\n'
        << "D " << format_number(body.diameter()) << '\n'
        << "curvature_witness " << (curv.passed ? "PASS" : "FAIL") << " points " << curv.points << " max_level "
        << format_number(curv.worst) << '\n'
        << "diameter_witness " << (diam.passed ? "PASS" : "FAIL") << " points " << diam.points << " max_distance "
        << format_number(diam.worst) << '\n';
    return curv.passed && diam.passed ? 0 : 1;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic billiard experiments on convex bodies", args.empty() ? "billiard" : args.front()};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    RunArgs run_args;
    SpectralArgs spectral_args;
    FQuantileArgs fq_args;
    SGammaArgs sg_args;
    OverlapArgs ov_args;
    MixingArgs mix_args;
    CapsuleArgs cap_args;
    FractionArgs frac_args;
    std::size_t validate_points = 1000;

    const auto law_check = CLI::IsMember({"cosine", "uniform_hemisphere", "cosine_two_sided", "uniform_sphere"});

    auto* run_cmd = app.add_subcommand("run", "Run the chain and write the trajectory");
    add_body_options(run_cmd, common);
    add_output_options(run_cmd, common);
    add_stream(run_cmd, common);
    run_cmd->add_option("--steps", run_args.steps, "Recorded steps per replica")->capture_default_str();
    run_cmd->add_option("--burn-in", run_args.burn_in, "Discarded initial steps")->capture_default_str();
    run_cmd->add_option("--thin", run_args.thin, "Record every thin-th step")->capture_default_str();
    run_cmd->add_option("--replicas", run_args.replicas, "Independent chains")->capture_default_str();
    run_cmd->add_option("--law", run_args.law, "Direction law")->check(law_check)->capture_default_str();
    run_cmd->add_option("--start", run_args.start, "Start at the boundary point in this direction")->delimiter(',');

    auto* spec_cmd = app.add_subcommand("spectral", "Discretized kernel spectrum of a planar body");
    add_body_options(spec_cmd, common);
    add_output_options(spec_cmd, common);
    add_threads(spec_cmd, common);
    spec_cmd->add_option("--bins", spectral_args.bins, "Arclength bins")->capture_default_str();
    spec_cmd->add_option("--quad-points", spectral_args.quad_points, "Gauss nodes per bin")->capture_default_str();
    spec_cmd->add_option("--near-quad-points", spectral_args.near_quad_points, "Gauss nodes for nearby bins")
        ->capture_default_str();
    spec_cmd->add_option("--near-band", spectral_args.near_band, "Bin distance treated as nearby")->capture_default_str();
    spec_cmd->add_flag("--matrix", spectral_args.matrix, "Also write matrix.csv (bins <= 1024)");

    auto* fq_cmd = app.add_subcommand("f-quantile", "Low quantile of the one-step chord length");
    add_body_options(fq_cmd, common);
    add_output_options(fq_cmd, common);
    add_stream(fq_cmd, common);
    fq_cmd->add_option("--samples", fq_args.samples, "Independent steps")->capture_default_str();
    fq_cmd->add_option("--level", fq_args.level, "Quantile level")->capture_default_str();
    fq_cmd->add_option("--point", fq_args.start, "Boundary point in this direction")->delimiter(',');

    auto* sg_cmd = app.add_subcommand("s-gamma", "Local fullness radius");
    add_body_options(sg_cmd, common);
    add_output_options(sg_cmd, common);
    add_stream(sg_cmd, common);
    sg_cmd->add_option("--gamma", sg_args.gammas, "Volume fractions")->delimiter(',')->capture_default_str();
    sg_cmd->add_option("--mc-points", sg_args.mc_points, "Monte Carlo points in the ball")->capture_default_str();
    sg_cmd->add_option("--point", sg_args.start, "Boundary point in this direction")->delimiter(',');

    auto* ov_cmd = app.add_subcommand("overlap", "TV distance between one-step laws from two points");
    add_body_options(ov_cmd, common);
    add_output_options(ov_cmd, common);
    add_stream(ov_cmd, common);
    ov_cmd->add_option("--u", ov_args.u, "Direction of the first point")->delimiter(',')->required();
    ov_cmd->add_option("--v", ov_args.v, "Direction of the second point")->delimiter(',')->required();
    ov_cmd->add_option("--samples", ov_args.samples, "Steps from each point")->capture_default_str();
    ov_cmd->add_option("--f-samples", ov_args.f_samples, "Steps for the F estimates")->capture_default_str();
    ov_cmd->add_option("--bins", ov_args.bins, "Partition bins")->capture_default_str();
    ov_cmd->add_flag("--orthants", ov_args.orthants, "Split coordinate bins by orthant");
    ov_cmd->add_option("--threshold", ov_args.threshold, "Pass threshold for the TV")->capture_default_str();

    auto* mix_cmd = app.add_subcommand("mixing", "TV to stationarity along a replica ensemble");
    add_body_options(mix_cmd, common);
    add_output_options(mix_cmd, common);
    add_threads(mix_cmd, common);
    mix_cmd->add_option("--replicas", mix_args.replicas, "Independent chains")->capture_default_str();
    mix_cmd->add_option("--bins", mix_args.bins, "Partition bins")->capture_default_str();
    mix_cmd->add_flag("--orthants", mix_args.orthants, "Split coordinate bins by orthant");
    mix_cmd->add_option("--checkpoints", mix_args.checkpoints, "Step counts to evaluate")->delimiter(',')->capture_default_str();
    mix_cmd->add_option("--threshold", mix_args.threshold, "Report the first checkpoint below this TV")->capture_default_str();
    mix_cmd->add_option("--law", mix_args.law, "Direction law")->check(law_check)->capture_default_str();
    mix_cmd->add_option("--start", mix_args.start, "Start at the boundary point in this direction")->delimiter(',');

    auto* cap_cmd = app.add_subcommand("capsule", "Increment variance and first passage on unit-radius capsules");
    add_output_options(cap_cmd, common);
    add_threads(cap_cmd, common);
    cap_cmd->add_option("--dims", cap_args.dims, "Dimensions")->delimiter(',')->check(CLI::Range(3, 100000))->capture_default_str();
    cap_cmd->add_option("--half-length", cap_args.half_length, "Segment half-length L")->capture_default_str();
    cap_cmd->add_option("--replicas", cap_args.replicas, "Single-step replicas")->capture_default_str();
    cap_cmd->add_option("--tau-replicas", cap_args.tau_replicas, "First-passage replicas")->capture_default_str();
    cap_cmd->add_option("--step-cap", cap_args.step_cap, "Censoring cap for first passage")->capture_default_str();

    auto* frac_cmd = app.add_subcommand("fraction", "Long-run fraction of states in {x_i > t}");
    add_body_options(frac_cmd, common);
    add_output_options(frac_cmd, common);
    add_stream(frac_cmd, common);
    frac_cmd->add_option("--steps", frac_args.steps, "Recorded steps")->capture_default_str();
    frac_cmd->add_option("--burn-in", frac_args.burn_in, "Discarded initial steps")->capture_default_str();
    frac_cmd->add_option("--thin", frac_args.thin, "Record every thin-th step")->capture_default_str();
    frac_cmd->add_option("--coord", frac_args.coord, "Coordinate index, 1-based (default: last)");
    frac_cmd->add_option("--above", frac_args.above, "Threshold t")->capture_default_str();
    frac_cmd->add_option("--batches", frac_args.batches, "Batches for the standard error")->capture_default_str();
    frac_cmd->add_option("--law", frac_args.law, "Direction law")->check(law_check)->capture_default_str();
    frac_cmd->add_option("--start", frac_args.start, "Start at the boundary point in this direction")->delimiter(',');

    auto* val_cmd = app.add_subcommand("validate", "Check a body spec and print C and D");
    val_cmd->add_option("file", common.body_path, "Body spec JSON file");
    val_cmd->add_option("--body", common.body_path, "Body spec JSON file");
    val_cmd->add_option("--body-json", common.body_json, "Inline body spec JSON");
    val_cmd->add_option("--seed", common.seed, "RNG seed")->capture_default_str();
    val_cmd->add_option("--points", validate_points, "Random boundary points")->capture_default_str();

    try {
        // CLI11 consumes a reversed argument list without the program name.
        std::vector<std::string> rest(args.rbegin(), args.rend());
        if (!rest.empty()) rest.pop_back();
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) cmd_run(run_args, common, args, out);
        else if (*spec_cmd) cmd_spectral(spectral_args, common, args, out);
        else if (*fq_cmd) cmd_f_quantile(fq_args, common, args, out);
        else if (*sg_cmd) cmd_s_gamma(sg_args, common, args, out);
        else if (*ov_cmd) cmd_overlap(ov_args, common, args, out);
        else if (*mix_cmd) cmd_mixing(mix_args, common, args, out);
        else if (*cap_cmd) cmd_capsule(cap_args, common, args, out);
        else if (*frac_cmd) cmd_fraction(frac_args, common, args, out);
        else if (*val_cmd) return cmd_validate(common, validate_points, out);
        return 0;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DirectionError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace billiard::cli
