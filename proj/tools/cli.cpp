#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "nilm/baselines.hpp"
#include "nilm/evaluation.hpp"
#include "nilm/io.hpp"
#include "nilm/reconstruction.hpp"
#include "nilm/signature_tree.hpp"
#include "nilm/signatures.hpp"
#include "nilm/wamma.hpp"

namespace nilm::cli {
namespace {

// Bad input data (as opposed to a malformed command line).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return in;
}

template <class Fn>
void write_file(const std::string& path, Fn&& fill) {
    std::ostringstream ss;
    fill(ss);
    io::write_text_file(path, ss.str());
}

std::vector<GroundTruthEvent> load_truth(const std::string& path) {
    auto in = open_in(path);
    return io::read_truth_csv(in);
}

std::vector<io::EventRecord> load_events(const std::string& path) {
    auto in = open_in(path);
    return io::read_events_csv(in);
}

void print_metrics(std::ostream& out, const MatchReport& r) {
    const auto& c = r.counts;
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %-6s %-6s %-6s %-6s %-7s %-7s %-7s %-7s\n", "ED", "EG",
                  "TP", "FP", "FN", "TPP", "FPP", "FNP", "f1");
    out << line;
    std::snprintf(line, sizeof line, "%-6lld %-6lld %-6lld %-6lld %-6lld %-7s %-7s %-7s %-7s\n",
                  static_cast<long long>(c.ed), static_cast<long long>(c.eg),
                  static_cast<long long>(c.tp), static_cast<long long>(c.fp),
                  static_cast<long long>(c.fn), (format_tenths(r.tpp_tenths) + "%").c_str(),
                  (format_tenths(r.fpp_tenths) + "%").c_str(),
                  (format_tenths(r.fnp_tenths) + "%").c_str(),
                  (format_tenths(r.f1_tenths) + "%").c_str());
    out << line;
}

// Records carry times; detection indices are recovered from the series.
std::vector<DetectedEvent> records_to_events(const std::vector<io::EventRecord>& recs,
                                             const PowerSeries& series) {
    auto index_of = [&](double t, const char* what) {
        const double x = std::round((t - series.origin_time()) * series.rate());
        if (x < 0.0 || x >= static_cast<double>(series.size())) {
            throw DataError(std::string("event ") + what + " time outside the series");
        }
        return static_cast<Index>(x);
    };
    std::vector<DetectedEvent> out;
    for (const auto& r : recs) {
        DetectedEvent ev;
        ev.start = index_of(r.start_time, "start");
        ev.end = index_of(r.end_time, "end");
        if (r.spike_time) {
            ev.spike = index_of(*r.spike_time, "spike");
        }
        ev.direction = r.direction;
        ev.pre_mean = r.pre_mean;
        ev.post_mean = r.post_mean;
        ev.provenance = r.provenance;
        out.push_back(ev);
    }
    return out;
}

struct DetectArgs {
    std::string input, out, detector = "wamma", column = "power";
    double rate = 0.0;
    double rm = 0.2, rw = 2.0, threshold = 15.0;
    double r = 1.0, rd = 2.0, rf = 1.0;
};

int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
    if (!is_known_detector(a.detector)) {
        throw CLI::ValidationError("--detector", "unknown detector '" + a.detector + "'");
    }
    const auto series = io::read_power_csv(std::filesystem::path(a.input), a.rate, {a.column, {}});
    std::vector<DetectedEvent> events;
    if (a.detector == "wamma") {
        wamma::DetectorConfig cfg;
        cfg.r_m = a.rm;
        cfg.r_w = a.rw;
        cfg.p_thre_init = a.threshold;
        const auto res = wamma::Detector(cfg).run(series);
        for (const auto& d : res.diagnostics) {
            err << "note: " << d << '\n';
        }
        events = res.events;
        out << "final threshold: " << io::format_fixed(res.final_threshold) << '\n';
    } else {
        ParameterSet p{{"p_thre", a.threshold}};
        if (a.detector == "wm") {
            p["r_d"] = a.rd;
            p["r_f"] = a.rf;
            p["r_m"] = a.rm;
        } else {
            p["r"] = a.r;
        }
        events = run_detector(a.detector, series, p);
    }
    const auto recs = io::to_records(series, events);
    write_file(a.out, [&](std::ostream& s) { io::write_events_csv(s, recs); });
    out << "events: " << recs.size() << '\n';
    return 0;
}

int cmd_evaluate(const std::string& events, const std::string& truth, double tol,
                 std::ostream& out) {
    const auto recs = load_events(events);
    const auto gt = load_truth(truth);
    const auto spans = io::record_spans(recs);
    print_metrics(out, compute_metrics(match_events(spans, gt, tol)));
    return 0;
}

struct SweepArgs {
    std::string input, truth, detector, grid, out, column = "power";
    double rate = 0.0, tolerance = 1.0;
    unsigned threads = 1;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    if (!is_known_detector(a.detector)) {
        throw CLI::ValidationError("--detector", "unknown detector '" + a.detector + "'");
    }
    const auto series = io::read_power_csv(std::filesystem::path(a.input), a.rate, {a.column, {}});
    const auto gt = load_truth(a.truth);
    auto gin = open_in(a.grid);
    const auto grid = io::parse_grid(gin);
    const auto res = sweep(series, gt, a.detector, grid, {a.tolerance, a.threads});
    write_file(a.out, [&](std::ostream& s) {
        s << "index";
        for (const auto& r : grid.rows) {
            s << ',' << r.name;
        }
        s << ",ED,EG,TP,FP,FN,TPP,FPP,FNP,f1\n";
        for (const auto& row : res.rows) {
            const auto& c = row.report.counts;
            s << row.combination.index;
            for (const auto& [name, v] : row.combination.values) {
                s << ',' << io::format_fixed(v);
            }
            s << ',' << c.ed << ',' << c.eg << ',' << c.tp << ',' << c.fp << ',' << c.fn << ','
              << format_tenths(row.report.tpp_tenths) << ','
              << format_tenths(row.report.fpp_tenths) << ','
              << format_tenths(row.report.fnp_tenths) << ','
              << format_tenths(row.report.f1_tenths) << '\n';
        }
    });
    const auto& best = res.rows[res.best];
    out << "combinations: " << res.rows.size() << '\n';
    out << "best: #" << best.combination.index;
    for (const auto& [name, v] : best.combination.values) {
        out << ' ' << name << '=' << io::format_fixed(v);
    }
    out << '\n';
    print_metrics(out, best.report);
    return 0;
}

struct ExtractArgs {
    std::string input, events, out, appliance = "appliance", column = "power";
    double rate = 0.0, threshold = 15.0;
};

int cmd_extract(const ExtractArgs& a, std::ostream& out) {
    const auto series = io::read_power_csv(std::filesystem::path(a.input), a.rate, {a.column, {}});
    const auto events = records_to_events(load_events(a.events), series);
    SignatureOptions opt;
    opt.p_thre = a.threshold;
    const auto sets = build_signature_sets(series, events, opt);
    if (sets.empty()) {
        throw DataError("no complete transitions to extract signatures from");
    }
    const auto tree = build_tree(a.appliance, sets);
    io::write_text_file(a.out, serialize_tree(tree));
    out << "paths: " << tree.path_count() << '\n';
    return 0;
}

int cmd_tree(const std::string& query, const std::string& tree_path, std::ostream& out) {
    std::vector<std::string> parts;
    std::stringstream ss(query);
    for (std::string p; std::getline(ss, p, ',');) {
        parts.push_back(p);
    }
    if (parts.size() != 5) {
        throw CLI::ValidationError("--query", "expected form,dts,trs,dsp,tdt");
    }
    ObservedTransition obs;
    const auto form = parse_waveform(parts[0]);
    if (!form) {
        throw CLI::ValidationError("--query", "form must be R or D");
    }
    obs.form = *form;
    double* fields[] = {&obs.dts, &obs.trs, &obs.dsp, &obs.tdt};
    for (int i = 0; i < 4; ++i) {
        try {
            std::size_t used = 0;
            *fields[i] = std::stod(parts[i + 1], &used);
            if (used != parts[i + 1].size()) {
                throw std::invalid_argument("trailing");
            }
        } catch (const std::exception&) {
            throw CLI::ValidationError("--query", "non-numeric value '" + parts[i + 1] + "'");
        }
    }
    const auto tree = deserialize_tree(io::read_text_file(tree_path));
    const auto ranking = query_tree(tree, obs);
    out << "rank,appliance,label,log_score,ssp_mean,ssp_std,std_mean,std_std\n";
    std::size_t rank = 1;
    for (const auto& m : ranking) {
        out << rank++ << ',' << m.appliance << ',' << m.label.from << "->" << m.label.to << ','
            << io::format_fixed(m.log_score) << ',' << io::format_fixed(m.mu.mean) << ','
            << io::format_fixed(m.mu.std) << ',' << io::format_fixed(m.tau.mean) << ','
            << io::format_fixed(m.tau.std) << '\n';
    }
    return 0;
}

struct ReconstructArgs {
    std::string tree, out, truth, appliance;
    double rate = 0.0, idle = 5.0;
    std::size_t cycles = 1;
    std::uint64_t seed = 1;
};

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out) {
    const auto tree = deserialize_tree(io::read_text_file(a.tree));
    Rng rng(a.seed);
    std::vector<double> samples;
    std::vector<GroundTruthEvent> truth;
    for (const auto& app : tree.appliances()) {
        if (!a.appliance.empty() && app.name != a.appliance) {
            continue;
        }
        const SignatureSet* on = nullptr;
        const SignatureSet* off = nullptr;
        for (const auto& p : app.paths) {
            if (p.label.from < p.label.to && (on == nullptr || p.label < on->label)) {
                on = &p;
            }
        }
        if (on == nullptr) {
            continue;
        }
        for (const auto& p : app.paths) {
            if (p.label.from == on->label.to && p.label.to == on->label.from) {
                off = &p;
            }
        }
        CycleOptions opt;
        opt.idle_before = a.idle;
        opt.idle_after = 0.0;
        opt.name = app.name;
        for (std::size_t k = 0; k < a.cycles; ++k) {
            const auto c = reconstruct_cycle(*on, off, a.rate, rng, opt);
            const double offset = static_cast<double>(samples.size()) / a.rate;
            for (const auto& g : c.truth) {
                truth.push_back({offset + g.time, g.label});
            }
            samples.insert(samples.end(), c.samples.begin(), c.samples.end());
        }
    }
    if (samples.empty()) {
        throw DataError("tree has no appliance with a rising transition to reconstruct");
    }
    samples.insert(samples.end(), static_cast<Index>(std::llround(a.idle * a.rate)),
                   samples.back());
    const PowerSeries series(std::move(samples), a.rate);
    write_file(a.out, [&](std::ostream& s) { io::write_power_csv(s, series); });
    if (!a.truth.empty()) {
        write_file(a.truth, [&](std::ostream& s) { io::write_truth_csv(s, truth); });
    }
    out << "samples: " << series.size() << '\n' << "events: " << truth.size() << '\n';
    return 0;
}

int cmd_generate(const std::string& spec_path, const std::string& out_path,
                 const std::string& truth_path, std::ostream& out) {
    const auto spec = io::parse_scenario(io::read_text_file(spec_path),
                                         std::filesystem::path(spec_path).parent_path());
    const auto sc = synthesize_scenario(spec);
    write_file(out_path, [&](std::ostream& s) { io::write_power_csv(s, sc.aggregate); });
    write_file(truth_path, [&](std::ostream& s) { io::write_truth_csv(s, sc.truth); });
    out << "samples: " << sc.aggregate.size() << '\n' << "events: " << sc.truth.size() << '\n';
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event detection, evaluation and load signatures for aggregate power data",
                 "nilm_events"};
    app.require_subcommand(1);

    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "Detect events in a power series");
    detect->add_option("--input", det.input, "Power CSV")->required();
    detect->add_option("--rate", det.rate, "Sampling rate (Hz)")->required()->check(CLI::PositiveNumber);
    detect->add_option("--detector", det.detector, "wamma, step, wm or cusum");
    detect->add_option("--rm", det.rm, "Margin width (s)");
    detect->add_option("--rw", det.rw, "Window width (s)");
    detect->add_option("--threshold", det.threshold, "Initial or fixed threshold (W)");
    detect->add_option("--r", det.r, "Window (s) for step and cusum");
    detect->add_option("--rd", det.rd, "Primary window (s) for wm");
    detect->add_option("--rf", det.rf, "Secondary window (s) for wm");
    detect->add_option("--column", det.column, "Power column name");
    detect->add_option("--out", det.out, "Events CSV to write")->required();

    std::string ev_events, ev_truth;
    double ev_tol = 1.0;
    auto* evaluate = app.add_subcommand("evaluate", "Score detected events against ground truth");
    evaluate->add_option("--events", ev_events, "Events CSV")->required();
    evaluate->add_option("--truth", ev_truth, "Truth CSV")->required();
    evaluate->add_option("--tolerance", ev_tol, "Matching tolerance (s)")->check(CLI::NonNegativeNumber);

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a detector over a parameter grid");
    sweep_cmd->add_option("--input", sw.input, "Power CSV")->required();
    sweep_cmd->add_option("--rate", sw.rate, "Sampling rate (Hz)")->required()->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--truth", sw.truth, "Truth CSV")->required();
    sweep_cmd->add_option("--detector", sw.detector, "wamma, step, wm or cusum")->required();
    sweep_cmd->add_option("--grid", sw.grid, "Grid file")->required();
    sweep_cmd->add_option("--out", sw.out, "Report CSV to write")->required();
    sweep_cmd->add_option("--tolerance", sw.tolerance, "Matching tolerance (s)")->check(CLI::NonNegativeNumber);
    sweep_cmd->add_option("--threads", sw.threads, "Worker threads")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--column", sw.column, "Power column name");

    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "Build a signature tree from detected events");
    extract->add_option("--input", ex.input, "Power CSV")->required();
    extract->add_option("--rate", ex.rate, "Sampling rate (Hz)")->required()->check(CLI::PositiveNumber);
    extract->add_option("--events", ex.events, "Events CSV")->required();
    extract->add_option("--out", ex.out, "Tree document to write")->required();
    extract->add_option("--appliance", ex.appliance, "Appliance name");
    extract->add_option("--threshold", ex.threshold, "Keypoint and clustering threshold (W)")
        ->check(CLI::PositiveNumber);
    extract->add_option("--column", ex.column, "Power column name");

    std::string tq_query, tq_tree;
    auto* tree_cmd = app.add_subcommand("tree", "Rank tree paths for an observed transition");
    tree_cmd->add_option("--query", tq_query, "form,dts,trs,dsp,tdt")->required();
    tree_cmd->add_option("--tree", tq_tree, "Tree document")->required();

    ReconstructArgs rc;
    auto* reconstruct = app.add_subcommand("reconstruct", "Generate cycles from a signature tree");
    reconstruct->add_option("--tree", rc.tree, "Tree document")->required();
    reconstruct->add_option("--rate", rc.rate, "Sampling rate (Hz)")->required()->check(CLI::PositiveNumber);
    reconstruct->add_option("--cycles", rc.cycles, "Cycles per appliance")->check(CLI::PositiveNumber);
    reconstruct->add_option("--seed", rc.seed, "Random seed");
    reconstruct->add_option("--out", rc.out, "Power CSV to write")->required();
    reconstruct->add_option("--truth", rc.truth, "Truth CSV to write");
    reconstruct->add_option("--appliance", rc.appliance, "Only this appliance");
    reconstruct->add_option("--idle", rc.idle, "Idle seconds between cycles")->check(CLI::NonNegativeNumber);

    std::string gen_spec, gen_out, gen_truth;
    auto* generate = app.add_subcommand("generate", "Synthesize a labelled scenario");
    generate->add_option("--spec", gen_spec, "Scenario JSON")->required();
    generate->add_option("--out", gen_out, "Power CSV to write")->required();
    generate->add_option("--truth", gen_truth, "Truth CSV to write")->required();

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (detect->parsed()) {
            return cmd_detect(det, out, err);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(ev_events, ev_truth, ev_tol, out);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sw, out);
        }
        if (extract->parsed()) {
            return cmd_extract(ex, out);
        }
        if (tree_cmd->parsed()) {
            return cmd_tree(tq_query, tq_tree, out);
        }
        if (reconstruct->parsed()) {
            return cmd_reconstruct(rc, out);
        }
        return cmd_generate(gen_spec, gen_out, gen_truth, out);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace nilm::cli
