// gesmag command-line tool. Graphs use the text format of graph_io.hpp, reports are JSON.
// Exit status: 0 success, 1 runtime error, 2 usage error.

#include <chrono>
#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gesmag/csv.hpp"
#include "gesmag/eval.hpp"
#include "gesmag/graph_io.hpp"
#include "gesmag/heads.hpp"
#include "gesmag/markov.hpp"
#include "gesmag/pag.hpp"
#include "gesmag/search.hpp"
#include "gesmag/simulate.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace gesmag;

namespace {

constexpr const char* kVersion = "1.0.0";

// ---- logging ----------------------------------------------------------------------------------

enum class LogLevel { Error = 0, Info = 1, Trace = 2 };

LogLevel log_level() {
    const char* env = std::getenv("GESMAG_LOG");
    std::string v = env ? env : "error";
    if (v == "trace") return LogLevel::Trace;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
}

void log(LogLevel at, const std::string& msg) {
    if (log_level() >= at) std::cerr << "[" << (at == LogLevel::Trace ? "trace" : "info") << "] " << msg << "\n";
}

// ---- run manifest -----------------------------------------------------------------------------

std::string fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

struct Manifest {
    std::string command;
    json config = json::object();
    json inputs = json::object();
    json outputs = json::array();
    std::optional<std::uint64_t> seed;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void input(const std::string& path) { inputs[path] = "fnv1a64:" + fnv1a_file(path); }

    json to_json() const {
        json j;
        j["tool"] = "gesmag";
        j["version"] = kVersion;
        j["command"] = command;
        j["config"] = config;
        j["seed"] = seed ? json(*seed) : json(nullptr);
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        j["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return j;
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

// Graph files carry a comment pointing at the manifest that produced them.
void write_graph(const std::string& path, const MixedGraph& g, Manifest& m, const std::string& manifest_path) {
    std::string text = to_text(g);
    if (!manifest_path.empty()) text += "# manifest: " + manifest_path + "\n";
    write_text(path, text);
    m.outputs.push_back(path);
}

void write_json(const std::string& path, const json& j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
    } else {
        write_text(path, j.dump(2) + "\n");
    }
}

// ---- enum options -----------------------------------------------------------------------------

const std::map<std::string, Estimator> kEstimators{{"plugin", Estimator::Plugin}, {"debiased", Estimator::Debiased}};
const std::map<std::string, PropertyKind> kProperties{
    {"refined", PropertyKind::Refined}, {"local", PropertyKind::Local}, {"pairwise", PropertyKind::Pairwise}};
const std::map<std::string, DimensionKind> kDimensions{{"gaussian", DimensionKind::Gaussian}, {"pset", DimensionKind::ParametrizingSetSize}};

json set_json(VertexSet s) {
    json a = json::array();
    for (VertexId v : s) a.push_back(v);
    return a;
}

json ci_json(const CIStatement& ci) { return {{"a", set_json(ci.a)}, {"b", set_json(ci.b)}, {"c", set_json(ci.c)}}; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json score_json(const ScoreReport& r) {
    return {{"total", r.total},         {"saturated", r.saturated}, {"penalty", r.penalty},
            {"complexity", r.complexity()}, {"dimension", r.dimension}, {"n_rows", r.n_rows}};
}

json metrics_json(const MetricReport& r) {
    json j;
    j["accuracy"] = r.accuracy;
    json types = json::object();
    for (EdgeType t : kEdgeTypes) {
        const Confusion& c = r.rates[t];
        types[edge_type_name(t)] = {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}, {"tpr", opt_json(c.tpr())}, {"fpr", opt_json(c.fpr())}};
    }
    j["edge_types"] = types;
    j["log_bic_diff"] = opt_json(r.log_bic_diff);
    j["seconds"] = r.seconds;
    return j;
}

Eigen::MatrixXd load_data(const std::string& path, int expected_cols = -1) {
    Dataset ds = read_csv(path);
    if (expected_cols >= 0 && ds.values.cols() != expected_cols) {
        throw DomainError("data has " + std::to_string(ds.values.cols()) + " columns, graph has " + std::to_string(expected_cols) + " vertices");
    }
    return ds.values;
}

/// A representative MAG for any graph kind: PAGs through their representative, ADMGs by projection.
MixedGraph as_mag(const MixedGraph& g) {
    if (g.has_circles()) return pag_to_mag(g);
    return is_mag(g) ? g : project_to_mag(g);
}

// ---- subcommands ------------------------------------------------------------------------------

struct SimulateOpts {
    SimConfig sim;
    int reps = 1;
    std::string out_dir;
};

void run_simulate(const SimulateOpts& o) {
    fs::create_directories(o.out_dir);
    const std::string manifest_path = (fs::path(o.out_dir) / "manifest.json").string();
    Manifest m;
    m.command = "simulate";
    m.seed = o.sim.seed;
    m.config = {{"n", o.sim.n},           {"pd", o.sim.p_directed},       {"degree", o.sim.avg_degree}, {"reps", o.reps},
                {"N", o.sim.n_rows},      {"coef_lo", o.sim.coef_lo},     {"coef_hi", o.sim.coef_hi},
                {"edge_count", target_edge_count(o.sim.n, o.sim.avg_degree)}, {"omega_diagonal", "1 + sum of |off-diagonal|"}};
    for (int k = 0; k < o.reps; ++k) {
        Replication r = simulate_replication(o.sim, static_cast<std::uint64_t>(k));
        auto at = [&](const std::string& name) { return (fs::path(o.out_dir) / (name + "_" + std::to_string(k))).string(); };
        write_graph(at("graph") + ".graph", r.admg, m, manifest_path);
        write_graph(at("mag") + ".graph", r.mag, m, manifest_path);
        write_graph(at("pag") + ".graph", mag_to_pag(r.mag, true), m, manifest_path);
        write_csv(at("data") + ".csv", Dataset{default_names(o.sim.n), r.data});
        m.outputs.push_back(at("data") + ".csv");
        log(LogLevel::Info, "replication " + std::to_string(k) + ": " + std::to_string(r.admg.edge_count()) + " edges");
    }
    write_json(manifest_path, m.to_json());
}

struct LearnOpts {
    std::string data, skeleton, out, report;
    std::optional<int> max_head;
    int turn = 0, jobs = 1;
    std::size_t branch_cap = 256;
    std::string estimator = "plugin", property = "refined", dimension = "gaussian";
};

void run_learn(const LearnOpts& o) {
    Manifest m;
    m.command = "learn";
    m.config = {{"max_head_size", o.max_head ? json(*o.max_head) : json(nullptr)},
                {"turn", o.turn},
                {"estimator", o.estimator},
                {"property", o.property},
                {"dimension", o.dimension},
                {"branch_cap", o.branch_cap},
                {"jobs", o.jobs},
                {"acceptance", "best strictly improving class per sweep"}};
    m.input(o.data);
    Eigen::MatrixXd data = load_data(o.data);
    SearchConfig cfg;
    cfg.max_head_size = o.max_head;
    cfg.turn_budget = o.turn;
    cfg.score = {kProperties.at(o.property), kDimensions.at(o.dimension)};
    cfg.moves.branch_cap = o.branch_cap;
    cfg.jobs = o.jobs;
    if (!o.skeleton.empty()) {
        m.input(o.skeleton);
        cfg.skeleton = read_graph_file(o.skeleton);
    }
    EntropyCache cache(data, kEstimators.at(o.estimator));
    log(LogLevel::Info, "searching over " + std::to_string(data.cols()) + " variables, " + std::to_string(data.rows()) + " rows");
    SearchResult res = gesmag_search(cache, cfg);
    for (const auto& e : res.events) {
        log(LogLevel::Trace, std::string(phase_name(e.phase)) + " sweep " + std::to_string(e.sweep) + " " + event_kind_name(e.kind) +
                                 " (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") " + format_double(e.score));
    }
    log(LogLevel::Info, "final score " + format_double(res.score.total) + " after " + std::to_string(res.counters.score_calls) + " score calls");

    // Without a report the manifest gets a file of its own next to the output graph.
    const std::string manifest_path = o.report.empty() ? o.out + ".manifest.json" : o.report;
    write_graph(o.out, res.pag, m, manifest_path);
    if (o.report.empty()) write_json(manifest_path, m.to_json());
    json rep;
    rep["score"] = score_json(res.score);
    rep["trajectory"] = res.trajectory;
    json phases = json::object();
    for (auto [ph, pc] : res.counters.phases) phases[phase_name(ph)] = {{"sweeps", pc.sweeps}, {"accepted", pc.accepted}, {"proposals", pc.proposals}};
    rep["phases"] = phases;
    rep["cycles"] = res.counters.cycles;
    rep["score_calls"] = res.counters.score_calls;
    rep["distinct_classes"] = res.counters.distinct_mecs;
    rep["head_size_rejections"] = res.counters.head_rejections;
    rep["branch_cap_events"] = res.counters.branch_cap_events;
    rep["iteration_cap_hit"] = res.counters.iteration_cap_hit;
    json events = json::array();
    for (const auto& e : res.events) {
        events.push_back({{"phase", phase_name(e.phase)}, {"sweep", e.sweep}, {"kind", event_kind_name(e.kind)},
                          {"i", e.i}, {"j", e.j}, {"score", e.score}, {"count", e.count}});
    }
    rep["events"] = events;
    rep["representative_mag"] = to_text(res.mag);
    rep["seconds"] = res.seconds;
    rep["manifest"] = m.to_json();
    if (!o.report.empty()) write_json(o.report, rep);
}

struct ScoreOpts {
    std::string data, graph, report, order;
    std::string estimator = "plugin", property = "refined", dimension = "gaussian";
};

std::vector<VertexId> parse_list(const std::string& s) {
    std::vector<VertexId> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError("list", "not an integer: '" + item + "'");
        }
    }
    return out;
}

VertexOrder order_for(const MixedGraph& g, const std::string& spec) {
    if (spec.empty()) return VertexOrder::of(g);
    std::vector<VertexId> ord = parse_list(spec);
    std::vector<bool> seen(static_cast<std::size_t>(g.n()), false);
    if (static_cast<int>(ord.size()) != g.n()) throw DomainError("order must list every vertex once");
    for (VertexId v : ord) {
        if (v < 0 || v >= g.n() || seen[v]) throw DomainError("order must list every vertex once");
        seen[v] = true;
    }
    for (const Edge& e : g.edges()) {
        VertexOrder vo(ord);
        if (e.at_a == Mark::Tail && e.at_b == Mark::Arrow && vo.pos(e.a) > vo.pos(e.b)) throw DomainError("order is not topological");
        if (e.at_b == Mark::Tail && e.at_a == Mark::Arrow && vo.pos(e.b) > vo.pos(e.a)) throw DomainError("order is not topological");
    }
    return VertexOrder(ord);
}

void run_score(const ScoreOpts& o) {
    Manifest m;
    m.command = "score";
    m.config = {{"estimator", o.estimator}, {"property", o.property}, {"dimension", o.dimension}};
    m.input(o.data);
    m.input(o.graph);
    MixedGraph g = as_mag(read_graph_file(o.graph));
    Eigen::MatrixXd data = load_data(o.data, g.n());
    EntropyCache cache(data, kEstimators.at(o.estimator));
    ScoreReport r = score_mag(g, order_for(g, o.order), cache, {kProperties.at(o.property), kDimensions.at(o.dimension)});
    json j = score_json(r);
    json cis = json::array();
    for (std::size_t k = 0; k < r.cis.size(); ++k) {
        json c = ci_json(r.cis[k]);
        c["mi"] = r.mutual_informations[k];
        cis.push_back(c);
    }
    j["cis"] = cis;
    j["manifest"] = m.to_json();
    write_json(o.report, j);
}

struct EvalOpts {
    std::string est, truth, data, report, batch;
    std::string dimension = "gaussian";
};

MetricReport eval_pair(const std::string& est_path, const std::string& truth_path, const std::string& data_path, DimensionKind dim) {
    auto t0 = std::chrono::steady_clock::now();
    MixedGraph est = read_graph_file(est_path), truth = read_graph_file(truth_path);
    std::optional<Eigen::MatrixXd> data;
    if (!data_path.empty()) data = load_data(data_path, truth.n());
    MetricReport r = evaluate(est, truth, data ? &*data : nullptr, dim);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// Batch mode pairs est_K.graph with graph_K.graph (and data_K.csv when present) in one directory.
void run_eval_batch(const EvalOpts& o) {
    Manifest m;
    m.command = "eval --batch";
    m.config = {{"dimension", o.dimension}};
    std::vector<int> ks;
    for (const auto& entry : fs::directory_iterator(o.batch)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("est_", 0) == 0 && entry.path().extension() == ".graph") {
            try {
                ks.push_back(std::stoi(name.substr(4)));
            } catch (const std::exception&) {
            }
        }
    }
    std::sort(ks.begin(), ks.end());
    if (ks.empty()) throw std::runtime_error("no est_K.graph files in " + o.batch);
    const fs::path dir(o.batch);
    std::ofstream csv(dir / "metrics.csv");
    csv << "replication,accuracy,log_bic_diff";
    for (EdgeType t : kEdgeTypes) csv << "," << edge_type_name(t) << "_tpr," << edge_type_name(t) << "_fpr";
    csv << "\n";
    std::map<std::string, std::pair<double, int>> sums;
    auto add = [&](const std::string& key, const std::optional<double>& v) {
        if (!v) return;
        sums[key].first += *v;
        sums[key].second += 1;
    };
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (int k : ks) {
        std::string ks_ = std::to_string(k);
        std::string est = (dir / ("est_" + ks_ + ".graph")).string(), truth = (dir / ("graph_" + ks_ + ".graph")).string();
        std::string data = (dir / ("data_" + ks_ + ".csv")).string();
        if (!fs::exists(data)) data.clear();
        m.input(est);
        m.input(truth);
        MetricReport r = eval_pair(est, truth, data, kDimensions.at(o.dimension));
        csv << k << "," << format_double(r.accuracy) << "," << cell(r.log_bic_diff);
        add("accuracy", r.accuracy);
        add("log_bic_diff", r.log_bic_diff);
        for (EdgeType t : kEdgeTypes) {
            csv << "," << cell(r.rates[t].tpr()) << "," << cell(r.rates[t].fpr());
            add(std::string(edge_type_name(t)) + "_tpr", r.rates[t].tpr());
            add(std::string(edge_type_name(t)) + "_fpr", r.rates[t].fpr());
        }
        csv << "\n";
    }
    m.outputs.push_back((dir / "metrics.csv").string());
    json agg;
    agg["replications"] = ks.size();
    json means = json::object();
    for (const auto& [key, sv] : sums) means[key] = {{"mean", sv.first / sv.second}, {"defined", sv.second}};
    agg["means"] = means;
    agg["manifest"] = m.to_json();
    write_json(o.report.empty() ? (dir / "aggregates.json").string() : o.report, agg);
}

void run_eval(const EvalOpts& o) {
    if (!o.batch.empty()) return run_eval_batch(o);
    if (o.est.empty() || o.truth.empty()) throw CLI::ValidationError("eval", "--est and --truth are required without --batch");
    Manifest m;
    m.command = "eval";
    m.config = {{"dimension", o.dimension}};
    m.input(o.est);
    m.input(o.truth);
    if (!o.data.empty()) m.input(o.data);
    json j = metrics_json(eval_pair(o.est, o.truth, o.data, kDimensions.at(o.dimension)));
    j["manifest"] = m.to_json();
    write_json(o.report, j);
}

struct ConvertOpts {
    bool mag_to_pag_ = false, pag_to_mag_ = false, admg_to_mag_ = false, arrow_only = false;
    std::string in, out;
};

void run_convert(const ConvertOpts& o) {
    MixedGraph g = read_graph_file(o.in);
    MixedGraph r;
    if (o.mag_to_pag_) {
        if (!is_mag(g)) throw InvalidGraphKind("input is not a MAG");
        r = mag_to_pag(g, !o.arrow_only);
    } else if (o.pag_to_mag_) {
        // Arrow-complete and fully oriented PAGs are both accepted; either must map back to itself.
        r = pag_to_mag(g);
        if (!mag_to_pag(r, false).same_marks(g) && !mag_to_pag(r, true).same_marks(g)) throw InvalidMec("input is not a valid PAG");
    } else {
        r = project_to_mag(g);
    }
    if (o.out.empty()) {
        std::cout << to_text(r);
    } else {
        write_text(o.out, to_text(r));
    }
}

struct GraphQueryOpts {
    std::string graph, property = "refined", order;
    std::optional<int> max_size;
};

void run_markov(const GraphQueryOpts& o) {
    MixedGraph g = as_mag(read_graph_file(o.graph));
    for (const auto& ci : markov_property(g, order_for(g, o.order), kProperties.at(o.property))) std::cout << ci_json(ci).dump() << "\n";
}

void run_heads(const GraphQueryOpts& o) {
    MixedGraph g = as_mag(read_graph_file(o.graph));
    for (const auto& ht : enumerate_heads(g, o.max_size)) {
        std::cout << json{{"head", set_json(ht.head)}, {"tail", set_json(ht.tail)}}.dump() << "\n";
    }
}

struct ProbeOpts {
    std::string sizes = "5,10,15,20", out;
    int reps = 3, turn = 0;
    int max_head = 3;
    SimConfig sim;
};

void run_probe(const ProbeOpts& o) {
    SearchConfig cfg;
    cfg.max_head_size = o.max_head;
    cfg.turn_budget = o.turn;
    std::vector<int> sizes;
    for (VertexId v : parse_list(o.sizes)) sizes.push_back(v);
    auto rows = complexity_probe(cfg, o.sim, sizes, o.reps);
    std::vector<double> xs, ys;
    json table = json::array();
    for (const auto& r : rows) {
        table.push_back({{"n", r.n}, {"reps", r.reps}, {"seconds", r.seconds}, {"add_delete_moves", r.add_delete_moves}, {"score_calls", r.score_calls}});
        xs.push_back(r.n);
        ys.push_back(std::max(r.add_delete_moves, 1.0));
        log(LogLevel::Info, "n=" + std::to_string(r.n) + " moves=" + format_double(r.add_delete_moves));
    }
    Manifest m;
    m.command = "probe";
    m.seed = o.sim.seed;
    m.config = {{"sizes", sizes}, {"reps", o.reps}, {"max_head_size", o.max_head}, {"turn", o.turn}, {"degree", o.sim.avg_degree},
                {"pd", o.sim.p_directed}, {"N", o.sim.n_rows}, {"branch_cap", cfg.moves.branch_cap}, {"max_paths", cfg.moves.max_paths}};
    json j;
    j["rows"] = table;
    j["log_log_slope"] = xs.size() >= 2 ? json(log_log_slope(xs, ys)) : json(nullptr);
    j["manifest"] = m.to_json();
    write_json(o.out, j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Greedy search over Markov equivalence classes of maximal ancestral graphs"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    const auto est_check = CLI::IsMember({"plugin", "debiased"});
    const auto prop_check = CLI::IsMember({"refined", "local", "pairwise"});
    const auto dim_check = CLI::IsMember({"gaussian", "pset"});

    SimulateOpts so;
    auto* sim = app.add_subcommand("simulate", "Random ADMGs, their MAGs and PAGs, and linear-Gaussian data");
    sim->add_option("--n", so.sim.n, "Number of variables")->required()->check(CLI::Range(1, kMaxVertices));
    sim->add_option("--pd", so.sim.p_directed, "Probability that an edge is directed")->check(CLI::Range(0.0, 1.0));
    sim->add_option("--degree", so.sim.avg_degree, "Average degree")->check(CLI::NonNegativeNumber);
    sim->add_option("--reps", so.reps, "Replications")->check(CLI::PositiveNumber);
    sim->add_option("--N", so.sim.n_rows, "Rows per dataset")->check(CLI::PositiveNumber);
    sim->add_option("--seed", so.sim.seed, "Seed");
    sim->add_option("--coef-lo", so.sim.coef_lo, "Smallest coefficient magnitude")->check(CLI::PositiveNumber);
    sim->add_option("--coef-hi", so.sim.coef_hi, "Largest coefficient magnitude")->check(CLI::PositiveNumber);
    sim->add_option("--out-dir", so.out_dir, "Output directory")->required();

    LearnOpts lo;
    auto* learn = app.add_subcommand("learn", "Search for the best-scoring PAG");
    learn->add_option("--data", lo.data, "CSV data file")->required()->check(CLI::ExistingFile);
    learn->add_option("--max-head-size", lo.max_head, "Reject classes whose representative has a larger head")->check(CLI::PositiveNumber);
    learn->add_option("--turn", lo.turn, "Turning budget; 0 disables turning")->check(CLI::NonNegativeNumber);
    learn->add_option("--estimator", lo.estimator, "plugin or debiased")->check(est_check);
    learn->add_option("--property", lo.property, "refined, local or pairwise")->check(prop_check);
    learn->add_option("--dimension", lo.dimension, "gaussian or pset")->check(dim_check);
    learn->add_option("--skeleton", lo.skeleton, "Graph whose adjacencies bound the search")->check(CLI::ExistingFile);
    learn->add_option("--branch-cap", lo.branch_cap, "Largest number of branches per move")->check(CLI::PositiveNumber);
    learn->add_option("--jobs", lo.jobs, "Threads for candidate scoring")->check(CLI::PositiveNumber);
    learn->add_option("--out", lo.out, "Output PAG")->required();
    learn->add_option("--report", lo.report, "JSON report");

    ScoreOpts sc;
    auto* score = app.add_subcommand("score", "Score a graph against data");
    score->add_option("--data", sc.data, "CSV data file")->required()->check(CLI::ExistingFile);
    score->add_option("--graph", sc.graph, "MAG, ADMG or PAG")->required()->check(CLI::ExistingFile);
    score->add_option("--order", sc.order, "Comma-separated topological order");
    score->add_option("--estimator", sc.estimator, "plugin or debiased")->check(est_check);
    score->add_option("--property", sc.property, "refined, local or pairwise")->check(prop_check);
    score->add_option("--dimension", sc.dimension, "gaussian or pset")->check(dim_check);
    score->add_option("--report", sc.report, "JSON report (stdout when absent)");

    EvalOpts ev;
    auto* eval = app.add_subcommand("eval", "Compare an estimate with the truth");
    eval->add_option("--est", ev.est, "Estimated graph")->check(CLI::ExistingFile);
    eval->add_option("--truth", ev.truth, "True graph")->check(CLI::ExistingFile);
    eval->add_option("--data", ev.data, "Data for the BIC difference")->check(CLI::ExistingFile);
    eval->add_option("--dimension", ev.dimension, "gaussian or pset")->check(dim_check);
    eval->add_option("--batch", ev.batch, "Directory of est_K.graph / graph_K.graph / data_K.csv")->check(CLI::ExistingDirectory);
    eval->add_option("--report", ev.report, "JSON report (stdout when absent)");

    ConvertOpts co;
    auto* convert = app.add_subcommand("convert", "Convert between graph kinds");
    auto* g1 = convert->add_flag("--mag-to-pag", co.mag_to_pag_, "MAG to its PAG");
    auto* g2 = convert->add_flag("--pag-to-mag", co.pag_to_mag_, "PAG to a representative MAG");
    auto* g3 = convert->add_flag("--admg-to-mag", co.admg_to_mag_, "ADMG to its MAG");
    g1->excludes(g2)->excludes(g3);
    g2->excludes(g3);
    convert->add_flag("--arrow-only", co.arrow_only, "Stop after the arrowhead rules");
    convert->add_option("--in", co.in, "Input graph")->required()->check(CLI::ExistingFile);
    convert->add_option("--out", co.out, "Output graph (stdout when absent)");

    GraphQueryOpts mk;
    auto* markov = app.add_subcommand("markov", "List the independences of a Markov property, one JSON object per line");
    markov->add_option("--graph", mk.graph, "MAG, ADMG or PAG")->required()->check(CLI::ExistingFile);
    markov->add_option("--property", mk.property, "refined, local or pairwise")->check(prop_check);
    markov->add_option("--order", mk.order, "Comma-separated topological order");

    GraphQueryOpts hd;
    auto* heads = app.add_subcommand("heads", "List heads and tails, one JSON object per line");
    heads->add_option("--graph", hd.graph, "MAG, ADMG or PAG")->required()->check(CLI::ExistingFile);
    heads->add_option("--max-size", hd.max_size, "Only heads up to this size")->check(CLI::PositiveNumber);

    ProbeOpts pr;
    pr.sim.p_directed = 0.6;
    auto* probe = app.add_subcommand("probe", "Run time and move counts for growing n");
    probe->add_option("--sizes", pr.sizes, "Comma-separated vertex counts");
    probe->add_option("--reps", pr.reps, "Replications per size")->check(CLI::PositiveNumber);
    probe->add_option("--max-head-size", pr.max_head, "Head size cap")->check(CLI::PositiveNumber);
    probe->add_option("--turn", pr.turn, "Turning budget")->check(CLI::NonNegativeNumber);
    probe->add_option("--degree", pr.sim.avg_degree, "Average degree")->check(CLI::NonNegativeNumber);
    probe->add_option("--pd", pr.sim.p_directed, "Probability that an edge is directed")->check(CLI::Range(0.0, 1.0));
    probe->add_option("--N", pr.sim.n_rows, "Rows per dataset")->check(CLI::PositiveNumber);
    probe->add_option("--seed", pr.sim.seed, "Seed");
    probe->add_option("--out", pr.out, "JSON output (stdout when absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) run_simulate(so);
        else if (*learn) run_learn(lo);
        else if (*score) run_score(sc);
        else if (*eval) run_eval(ev);
        else if (*convert) {
            if (!co.mag_to_pag_ && !co.pag_to_mag_ && !co.admg_to_mag_) {
                throw CLI::ValidationError("convert", "one of --mag-to-pag, --pag-to-mag, --admg-to-mag is required");
            }
            run_convert(co);
        } else if (*markov) run_markov(mk);
        else if (*heads) run_heads(hd);
        else if (*probe) run_probe(pr);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
