#include "btfp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "btfp/classifier.hpp"
#include "btfp/error.hpp"
#include "btfp/extract.hpp"
#include "btfp/fingerprint.hpp"
#include "btfp/iq.hpp"
#include "btfp/merge.hpp"
#include "btfp/report.hpp"
#include "btfp/synth.hpp"

namespace btfp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

bool g_verbose = false;

void info(const std::string& msg) {
    if (g_verbose) std::cerr << "btfp: " << msg << "\n";
}

// A failure inside a named stage; exit code 1.
struct StageError : Error {
    StageError(const std::string& stage, const std::string& what) : Error(stage + ": " + what) {}
};

template <class F>
void stage(const std::string& name, F&& f) {
    try {
        f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

json load_json(const fs::path& path) {
    try {
        return json::parse(report::read_text(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

IqStream load_capture(const fs::path& path, std::optional<double> rate, std::optional<double> center) {
    if (const auto meta = read_sidecar(path)) {
        if (!rate) rate = meta->sample_rate_hz;
        if (!center) center = meta->center_freq_hz;
    }
    if (!rate) throw ParameterError("no sample rate for " + path.string() + " (pass a rate flag or add a sidecar)");
    if (!center) throw ParameterError("no centre frequency for " + path.string() + " (pass a centre flag or add a sidecar)");
    return read_iq(path, *rate, *center);
}

// ---- stage arguments -------------------------------------------------------

struct MergeArgs {
    fs::path lower, upper, out;
    std::int64_t offset_samples = 0;
    std::optional<double> rate_hz, lower_center_hz, upper_center_hz;
};

struct SynthArgs {
    fs::path scenario, out_dir;
    std::optional<std::uint64_t> seed;
    bool half_bands = true;
};

struct ExtractArgs {
    fs::path in, out_dir;
    std::optional<double> rate_hz, center_hz;
    std::string plan = "classic";
    DetectorConfig detector;
};

struct FingerprintArgs {
    fs::path in_dir, out;
    Variant variant = Variant::paper_literal;
    std::optional<std::string> label;
    std::optional<fs::path> truth;
};

struct ClassifyArgs {
    std::vector<fs::path> in;
    fs::path out_dir;
    int k = 10;
    double test_fraction = 0.2;
    std::uint64_t seed = 1;
    Averaging averaging = Averaging::weighted;
};

struct ReportArgs {
    std::vector<fs::path> in;
    std::optional<fs::path> metrics;
    fs::path out_dir;
};

// ---- stages ----------------------------------------------------------------

void do_merge(const MergeArgs& a) {
    auto lower = load_capture(a.lower, a.rate_hz, a.lower_center_hz);
    auto upper = load_capture(a.upper, a.rate_hz, a.upper_center_hz);
    const auto merged = merge_streams(lower, upper, a.offset_samples);
    write_iq(merged, a.out);
    write_sidecar(a.out, merged, "merged from " + a.lower.filename().string() + " and " + a.upper.filename().string());
    info("merged " + std::to_string(merged.size()) + " samples into " + a.out.string());
}

void do_synth(const SynthArgs& a) {
    auto scenario = synth::scenario_from_json(load_json(a.scenario));
    if (a.seed) scenario.seed = *a.seed;
    const auto cap = synth::generate_capture(scenario, a.half_bands);
    fs::create_directories(a.out_dir);
    write_iq(cap.merged, a.out_dir / "merged.data");
    write_sidecar(a.out_dir / "merged.data", cap.merged, "synthetic merged capture");
    if (a.half_bands) {
        write_iq(cap.lower, a.out_dir / "lower.data");
        write_sidecar(a.out_dir / "lower.data", cap.lower, "synthetic lower half-band capture");
        write_iq(cap.upper, a.out_dir / "upper.data");
        write_sidecar(a.out_dir / "upper.data", cap.upper, "synthetic upper half-band capture");
    }
    report::write_truth_csv(a.out_dir / "truth.csv", cap.truth);
    info("synthesized " + std::to_string(cap.truth.size()) + " bursts in " + a.out_dir.string());
}

void do_extract(const ExtractArgs& a) {
    a.detector.validate();
    const auto plan = ChannelPlan::from_name(a.plan);
    const auto stream = load_capture(a.in, a.rate_hz, a.center_hz);
    ExtractStats stats;
    const auto bursts = extract_packets(stream, plan, a.detector, &stats);
    report::write_bursts(a.out_dir, bursts, plan);
    info("extracted " + std::to_string(bursts.size()) + " of " + std::to_string(stats.intervals) +
         " intervals (" + std::to_string(stats.rejected_collisions) + " collisions, " +
         std::to_string(stats.rejected_out_of_plan) + " out of plan)");
}

// Label of the truth row overlapping the burst interval the most.
std::optional<std::string> truth_label(const synth::GroundTruth& truth, const Burst& b) {
    std::size_t best = 0;
    std::optional<std::string> label;
    for (const auto& t : truth) {
        const std::size_t lo = std::max(t.start_sample, b.start_sample);
        const std::size_t hi = std::min(t.end_sample, b.end_sample);
        if (hi > lo && hi - lo > best) {
            best = hi - lo;
            label = t.label;
        }
    }
    return label;
}

void do_fingerprint(const FingerprintArgs& a) {
    if (a.label && a.truth) throw ParameterError("--label and --truth are mutually exclusive");
    auto bursts = report::read_bursts(a.in_dir);
    std::vector<Fingerprint> rows;
    if (a.truth) {
        const auto truth = report::read_truth_csv(*a.truth);
        std::size_t unmatched = 0, skipped = 0;
        for (const auto& b : bursts) {
            const auto label = truth_label(truth, b);
            if (!label) {
                ++unmatched;
                continue;
            }
            try {
                auto fp = extract_fingerprint(b, a.variant);
                fp.label = label;
                rows.push_back(std::move(fp));
            } catch (const DegenerateBurstError&) {
                ++skipped;
            }
        }
        if (unmatched > 0) std::cerr << "warning: " << unmatched << " burst(s) match no truth row\n";
        if (skipped > 0) std::cerr << "warning: skipped " << skipped << " degenerate burst(s)\n";
    } else {
        rows = fingerprint_capture(bursts, a.variant, a.label).rows;
    }
    if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
    report::write_fingerprints_csv(a.out, rows);
    info("wrote " + std::to_string(rows.size()) + " fingerprints to " + a.out.string());
}

LabeledDataset load_dataset(const std::vector<fs::path>& paths) {
    std::vector<Fingerprint> rows;
    for (const auto& p : paths) {
        auto r = report::read_fingerprints_csv(p);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return report::to_dataset(rows);
}

void do_classify(const ClassifyArgs& a) {
    const auto data = load_dataset(a.in);
    if (data.empty()) throw ParameterError("no fingerprint rows to classify");
    const auto split = split_stratified(data, a.test_fraction, a.seed);
    const auto model = KnnModel::fit(split.train, a.k);
    const auto rep = evaluate(model, split.test, a.averaging);
    report::emit_report(rep, a.out_dir);
    char buf[96];
    std::snprintf(buf, sizeof buf, "train %zu, test %zu, accuracy %.4f", split.train.size(), split.test.size(),
                  rep.accuracy);
    info(buf);
}

void do_report(const ReportArgs& a) {
    const auto data = load_dataset(a.in);
    fs::create_directories(a.out_dir);
    report::emit_scatter_svg(data, a.out_dir / "scatter.svg");
    if (a.metrics) {
        const auto j = load_json(*a.metrics);
        EvalReport rep;
        try {
            rep.accuracy = j.at("Accuracy").get<double>();
            rep.precision = j.at("Precision").get<double>();
            rep.recall = j.at("Recall").get<double>();
            rep.f1 = j.at("F1 score").get<double>();
        } catch (const json::exception& e) {
            throw FormatError(a.metrics->string() + ": " + e.what());
        }
        report::write_text(a.out_dir / "table.md", report::metrics_table(rep));
    }
}

// ---- config sections ------------------------------------------------------

template <class T>
void take(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

void apply_detector(const json& j, ExtractArgs& a) {
    try {
        take(j, "plan", a.plan);
        auto& d = a.detector;
        take(j, "threshold_db", d.threshold_db);
        take(j, "hysteresis_db", d.hysteresis_db);
        take(j, "min_burst_us", d.min_burst_us);
        take(j, "max_burst_us", d.max_burst_us);
        take(j, "guard_us", d.guard_us);
        take(j, "window_samples", d.window_samples);
        take(j, "floor_percentile", d.floor_percentile);
        take(j, "lowpass_cutoff_hz", d.lowpass_cutoff_hz);
        take(j, "lowpass_transition_hz", d.lowpass_transition_hz);
        take(j, "max_out_of_channel_fraction", d.max_out_of_channel_fraction);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad detector config: ") + e.what());
    }
}

Averaging averaging_from_string(const std::string& s) {
    if (s == "weighted") return Averaging::weighted;
    if (s == "macro") return Averaging::macro;
    throw ParameterError("unknown averaging '" + s + "' (expected weighted or macro)");
}

void apply_classifier(const json& j, ClassifyArgs& a) {
    try {
        take(j, "k", a.k);
        take(j, "test_fraction", a.test_fraction);
        take(j, "seed", a.seed);
        if (j.contains("averaging")) a.averaging = averaging_from_string(j.at("averaging").get<std::string>());
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad classifier config: ") + e.what());
    }
}

Variant variant_from_config(const json& cfg, Variant fallback) {
    if (cfg.contains("fingerprint") && cfg.at("fingerprint").contains("variant"))
        return variant_from_string(cfg.at("fingerprint").at("variant").get<std::string>());
    return fallback;
}

json section(const json& cfg, const char* key) { return cfg.contains(key) ? cfg.at(key) : json::object(); }

// ---- pipeline ----------------------------------------------------------------

struct PipelineArgs {
    json config;
    std::optional<fs::path> out_dir;
    std::optional<std::uint64_t> seed;
};

void do_pipeline(const PipelineArgs& a) {
    const json& cfg = a.config;
    const json scen = section(cfg, "scenario");
    const json outputs = section(cfg, "outputs");
    const fs::path out = a.out_dir ? *a.out_dir : fs::path(outputs.value("dir", std::string("btfp_out")));
    const bool keep = outputs.value("keep_intermediates", true);
    const Variant variant = variant_from_config(cfg, Variant::paper_literal);

    ExtractArgs ex;
    ClassifyArgs cl;
    stage("config", [&] {
        apply_detector(section(cfg, "detector"), ex);
        apply_classifier(section(cfg, "classifier"), cl);
        if (a.seed) cl.seed = *a.seed;
        ex.detector.validate();
    });

    fs::create_directories(out / "work");
    std::vector<fs::path> csvs;

    const auto per_source = [&](const std::string& label, const fs::path& work, const fs::path& capture) {
        ex.in = capture;
        ex.out_dir = work / "bursts";
        stage("extract (" + label + ")", [&] { do_extract(ex); });
        FingerprintArgs fp;
        fp.in_dir = ex.out_dir;
        fp.out = work / "fingerprints.csv";
        fp.variant = variant;
        fp.label = label;
        stage("fingerprint (" + label + ")", [&] { do_fingerprint(fp); });
        csvs.push_back(fp.out);
        if (!keep) {
            for (const char* f : {"merged.data", "lower.data", "upper.data", "merged_from_halves.data"})
                fs::remove(work / f);
            fs::remove_all(work / "bursts");
        }
    };

    if (scen.contains("recordings")) {
        for (const auto& r : scen.at("recordings")) {
            MergeArgs m;
            std::string label;
            stage("config", [&] {
                label = r.at("label").get<std::string>();
                m.lower = r.at("lower").get<std::string>();
                m.upper = r.at("upper").get<std::string>();
                m.offset_samples = r.value("offset_samples", std::int64_t{0});
                if (r.contains("sample_rate_hz")) m.rate_hz = r.at("sample_rate_hz").get<double>();
            });
            const fs::path work = out / "work" / label;
            fs::create_directories(work);
            m.out = work / "merged.data";
            stage("merge (" + label + ")", [&] { do_merge(m); });
            per_source(label, work, m.out);
        }
    } else {
        synth::CaptureScenario base;
        stage("config", [&] {
            base = synth::scenario_from_json(scen);
            if (a.seed) base.seed = *a.seed;
            if (!section(cfg, "detector").contains("plan")) ex.plan = base.plan.name();
        });
        const bool via_halves = scen.value("merge_half_bands", false);
        // One capture per device, so each device's bursts are recorded in
        // isolation and labelled by source.
        for (std::size_t i = 0; i < base.profiles.size(); ++i) {
            const auto& p = base.profiles[i];
            const fs::path work = out / "work" / p.label;
            fs::create_directories(work);
            auto s = base;
            s.profiles = {p};
            s.seed = base.seed + i;
            report::write_text(work / "scenario.json", synth::scenario_to_json(s).dump(2) + "\n");

            SynthArgs sy;
            sy.scenario = work / "scenario.json";
            sy.out_dir = work;
            sy.half_bands = via_halves;
            stage("synth (" + p.label + ")", [&] { do_synth(sy); });
            fs::path capture = work / "merged.data";
            if (via_halves) {
                MergeArgs m;
                m.lower = work / "lower.data";
                m.upper = work / "upper.data";
                m.out = work / "merged_from_halves.data";
                stage("merge (" + p.label + ")", [&] { do_merge(m); });
                capture = m.out;
            }
            per_source(p.label, work, capture);
        }
    }

    cl.in = csvs;
    cl.out_dir = out;
    stage("classify", [&] { do_classify(cl); });
    ReportArgs rp;
    rp.in = csvs;
    rp.metrics = out / "metrics.json";
    rp.out_dir = out;
    stage("report", [&] { do_report(rp); });
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Bluetooth RF fingerprinting pipeline", "btfp"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::optional<std::string> config_path;
    app.add_option("--seed", seed, "Seed for synthesis and the train/test split");
    app.add_flag("-v,--verbose", g_verbose, "Progress on stderr");
    app.add_option("--config", config_path, "Pipeline config JSON; other subcommands read their section")
        ->check(CLI::ExistingFile);

    MergeArgs merge;
    std::string merge_lower, merge_upper, merge_out;
    auto* c_merge = app.add_subcommand("merge", "Merge two 40 MHz half-band captures into one 80 MHz stream");
    c_merge->add_option("--lower", merge_lower, "Lower half-band capture")->required();
    c_merge->add_option("--upper", merge_upper, "Upper half-band capture")->required();
    c_merge->add_option("--out", merge_out, "Merged capture")->required();
    c_merge->add_option("--offset-samples", merge.offset_samples, "Delay of the upper capture (input samples)");
    c_merge->add_option("--rate", merge.rate_hz, "Half-band sample rate (Hz), overrides sidecars");
    c_merge->add_option("--lower-center", merge.lower_center_hz, "Lower centre frequency (Hz)");
    c_merge->add_option("--upper-center", merge.upper_center_hz, "Upper centre frequency (Hz)");

    SynthArgs syn;
    std::string syn_scenario, syn_out;
    bool syn_no_half = false;
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic capture with ground truth");
    c_synth->add_option("--scenario", syn_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    c_synth->add_option("--out-dir", syn_out, "Output directory")->required();
    c_synth->add_flag("--no-half-bands", syn_no_half, "Skip lower.data and upper.data");

    ExtractArgs ext;
    std::string ext_in, ext_out;
    auto* c_extract = app.add_subcommand("extract", "Detect, dehop and filter bursts");
    c_extract->add_option("--in", ext_in, "Merged capture")->required();
    c_extract->add_option("--out-dir", ext_out, "Burst directory")->required();
    auto* o_plan = c_extract->add_option("--plan", ext.plan, "Channel plan")->check(CLI::IsMember({"classic", "ble"}));
    auto* o_thr = c_extract->add_option("--threshold-db", ext.detector.threshold_db, "Detection threshold above floor");
    auto* o_hys = c_extract->add_option("--hysteresis-db", ext.detector.hysteresis_db, "Release hysteresis");
    auto* o_min = c_extract->add_option("--min-us", ext.detector.min_burst_us, "Shortest burst");
    auto* o_max = c_extract->add_option("--max-us", ext.detector.max_burst_us, "Longest burst");
    auto* o_guard = c_extract->add_option("--guard-us", ext.detector.guard_us, "Guard kept on each side");
    auto* o_win = c_extract->add_option("--window", ext.detector.window_samples, "Power smoothing window");
    c_extract->add_option("--rate", ext.rate_hz, "Sample rate (Hz), overrides the sidecar");
    c_extract->add_option("--center", ext.center_hz, "Centre frequency (Hz), overrides the sidecar");

    FingerprintArgs fpa;
    std::string fp_in, fp_out, fp_variant = "paper_literal";
    std::optional<std::string> fp_truth;
    auto* c_fp = app.add_subcommand("fingerprint", "Compute (CFO, scaling factor) per burst");
    c_fp->add_option("--in-dir", fp_in, "Burst directory")->required();
    c_fp->add_option("--out", fp_out, "Fingerprint CSV")->required();
    auto* o_variant = c_fp->add_option("--variant", fp_variant, "Median combination")
                          ->check(CLI::IsMember({"paper_literal", "symmetric"}));
    auto* o_label = c_fp->add_option("--label", fpa.label, "Device label for every burst");
    c_fp->add_option("--truth", fp_truth, "truth.csv to label bursts by overlap")->excludes(o_label);

    ClassifyArgs cla;
    std::vector<std::string> cl_in;
    std::string cl_out, cl_avg = "weighted";
    auto* c_cl = app.add_subcommand("classify", "Train and evaluate kNN on fingerprint CSVs");
    c_cl->add_option("--in", cl_in, "Fingerprint CSV (repeatable)")->required();
    c_cl->add_option("--out-dir", cl_out, "Output directory")->required();
    auto* o_k = c_cl->add_option("--k", cla.k, "Neighbours");
    auto* o_tf = c_cl->add_option("--test-fraction", cla.test_fraction, "Share of each class held out");
    auto* o_avg = c_cl->add_option("--averaging", cl_avg, "Metric averaging")->check(CLI::IsMember({"weighted", "macro"}));

    ReportArgs rpa;
    std::vector<std::string> rp_in;
    std::string rp_out;
    std::optional<std::string> rp_metrics;
    auto* c_rp = app.add_subcommand("report", "Scatter plot and metrics table");
    c_rp->add_option("--in", rp_in, "Fingerprint CSV (repeatable)")->required();
    c_rp->add_option("--metrics", rp_metrics, "metrics.json from classify");
    c_rp->add_option("--out-dir", rp_out, "Output directory")->required();

    std::optional<std::string> pl_out;
    auto* c_pl = app.add_subcommand("pipeline", "synth|merge, extract, fingerprint, classify and report from --config");
    c_pl->add_option("--out-dir", pl_out, "Output directory, overrides outputs.dir");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "btfp: " << e.what() << "\n" << app.help();
        return 2;
    }

    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        json cfg = json::object();
        if (config_path) cfg = load_json(*config_path);

        if (sub == c_merge) {
            merge.lower = merge_lower;
            merge.upper = merge_upper;
            merge.out = merge_out;
            do_merge(merge);
        } else if (sub == c_synth) {
            syn.scenario = syn_scenario;
            syn.out_dir = syn_out;
            syn.seed = seed;
            syn.half_bands = !syn_no_half;
            do_synth(syn);
        } else if (sub == c_extract) {
            // Config supplies defaults; explicit flags win.
            ExtractArgs from_cfg;
            apply_detector(section(cfg, "detector"), from_cfg);
            if (!o_plan->count()) ext.plan = from_cfg.plan;
            auto& d = ext.detector;
            const auto& f = from_cfg.detector;
            if (!o_thr->count()) d.threshold_db = f.threshold_db;
            if (!o_hys->count()) d.hysteresis_db = f.hysteresis_db;
            if (!o_min->count()) d.min_burst_us = f.min_burst_us;
            if (!o_max->count()) d.max_burst_us = f.max_burst_us;
            if (!o_guard->count()) d.guard_us = f.guard_us;
            if (!o_win->count()) d.window_samples = f.window_samples;
            d.floor_percentile = f.floor_percentile;
            d.lowpass_cutoff_hz = f.lowpass_cutoff_hz;
            d.lowpass_transition_hz = f.lowpass_transition_hz;
            d.max_out_of_channel_fraction = f.max_out_of_channel_fraction;
            ext.in = ext_in;
            ext.out_dir = ext_out;
            do_extract(ext);
        } else if (sub == c_fp) {
            fpa.in_dir = fp_in;
            fpa.out = fp_out;
            fpa.variant = o_variant->count() ? variant_from_string(fp_variant)
                                             : variant_from_config(cfg, Variant::paper_literal);
            if (fp_truth) fpa.truth = *fp_truth;
            do_fingerprint(fpa);
        } else if (sub == c_cl) {
            ClassifyArgs from_cfg;
            apply_classifier(section(cfg, "classifier"), from_cfg);
            if (!o_k->count()) cla.k = from_cfg.k;
            if (!o_tf->count()) cla.test_fraction = from_cfg.test_fraction;
            cla.averaging = o_avg->count() ? averaging_from_string(cl_avg) : from_cfg.averaging;
            cla.seed = seed ? *seed : from_cfg.seed;
            cla.in.assign(cl_in.begin(), cl_in.end());
            cla.out_dir = cl_out;
            do_classify(cla);
        } else if (sub == c_rp) {
            rpa.in.assign(rp_in.begin(), rp_in.end());
            if (rp_metrics) rpa.metrics = *rp_metrics;
            rpa.out_dir = rp_out;
            do_report(rpa);
        } else if (sub == c_pl) {
            if (!config_path) {
                std::cerr << "btfp: pipeline requires --config\n" << app.help();
                return 2;
            }
            PipelineArgs pa;
            pa.config = cfg;
            if (pl_out) pa.out_dir = *pl_out;
            pa.seed = seed;
            do_pipeline(pa);
        }
    } catch (const std::exception& e) {
        std::cerr << "btfp " << name << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace btfp::cli
