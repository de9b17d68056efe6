// kptrack: synthetic trajectory generation, per-run tracking evaluation,
// and multi-run aggregation for keypoint-based representations.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kptrack/affine.hpp"
#include "kptrack/errors.hpp"
#include "kptrack/io.hpp"
#include "kptrack/metrics.hpp"
#include "kptrack/parallel.hpp"
#include "kptrack/sim.hpp"
#include "kptrack/stats.hpp"
#include "kptrack/trajectory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kptrack;

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t z = seed;
    for (std::uint64_t x : {a, b, c}) {
        z += 0x9e3779b97f4a7c15ULL * (x + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
    }
    return z;
}

// Unknown keys are configuration errors, not warnings; a typo in a
// threshold name must not silently evaluate with defaults.
void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& context) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ValidationError("unknown key '" + key + "' in " + context);
}

json load_config(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    if (!doc.is_object())
        throw ValidationError("config " + path + ": top-level value must be an object");
    check_keys(doc, {"generate", "evaluate"}, path);
    return doc;
}

// ---------------------------------------------------------------- generate

struct GenerateConfig {
    std::size_t num_runs = 1;
    std::size_t episodes_per_run = 10;
    std::size_t steps = 100;
    std::size_t num_epochs = 1;
    struct ObjectSpec {
        std::string name;
        AffineTransform2D transform;
        double noise_std = 0.0;
    };
    std::vector<ObjectSpec> objects;
    std::size_t num_distractors = 0;
    DistractorPolicy distractor_policy = DistractorPolicy::RandomWalk;
    double distractor_step_std = 0.05;
    MotionPolicy motion_policy = MotionPolicy::SmoothedRandomWalk;
    double motion_step_std = 0.02;
    double noise_decay = 1.0; ///< per-epoch multiplier on observation noise
    long seed = 0;
};

AffineTransform2D transform_from_json(const json& a, const json& b) {
    AffineTransform2D tf;
    tf.A = {{{a[0][0].get<double>(), a[0][1].get<double>()},
             {a[1][0].get<double>(), a[1][1].get<double>()}}};
    tf.b = {b[0].get<double>(), b[1].get<double>()};
    return tf;
}

GenerateConfig parse_generate_config(const json& root) {
    GenerateConfig cfg;
    if (!root.contains("generate")) {
        cfg.objects.push_back({"object_0", AffineTransform2D{}, 0.0});
        return cfg;
    }
    const json& g = root["generate"];
    check_keys(g, {"num_runs", "episodes_per_run", "steps", "num_epochs", "objects",
                   "num_distractors", "distractor_policy", "distractor_step_std",
                   "motion", "noise_decay", "seed"},
               "generate");
    cfg.num_runs = g.value("num_runs", cfg.num_runs);
    cfg.episodes_per_run = g.value("episodes_per_run", cfg.episodes_per_run);
    cfg.steps = g.value("steps", cfg.steps);
    cfg.num_epochs = g.value("num_epochs", cfg.num_epochs);
    cfg.num_distractors = g.value("num_distractors", cfg.num_distractors);
    if (g.contains("distractor_policy"))
        cfg.distractor_policy = distractor_policy_from_string(g["distractor_policy"].get<std::string>());
    cfg.distractor_step_std = g.value("distractor_step_std", cfg.distractor_step_std);
    cfg.noise_decay = g.value("noise_decay", cfg.noise_decay);
    cfg.seed = g.value("seed", cfg.seed);
    if (g.contains("motion")) {
        const json& m = g["motion"];
        check_keys(m, {"policy", "step_std"}, "generate.motion");
        if (m.contains("policy"))
            cfg.motion_policy = motion_policy_from_string(m["policy"].get<std::string>());
        cfg.motion_step_std = m.value("step_std", cfg.motion_step_std);
    }
    if (g.contains("objects")) {
        for (const json& o : g["objects"]) {
            check_keys(o, {"name", "A", "b", "noise_std"}, "generate.objects[]");
            GenerateConfig::ObjectSpec spec;
            spec.name = o.at("name").get<std::string>();
            if (o.contains("A") != o.contains("b"))
                throw ValidationError("generate.objects[]: A and b must be given together");
            if (o.contains("A")) spec.transform = transform_from_json(o["A"], o["b"]);
            spec.noise_std = o.value("noise_std", 0.0);
            cfg.objects.push_back(std::move(spec));
        }
    }
    if (cfg.objects.empty())
        cfg.objects.push_back({"object_0", AffineTransform2D{}, 0.0});
    if (cfg.num_epochs < 1 || cfg.num_runs < 1 || cfg.episodes_per_run < 1)
        throw ValidationError("generate: num_runs, episodes_per_run, num_epochs must be >= 1");
    return cfg;
}

int cmd_generate(const std::string& config_path, const std::string& out_dir, long seed_override,
                 bool has_seed_override) {
    GenerateConfig cfg = parse_generate_config(load_config(config_path));
    if (has_seed_override) cfg.seed = seed_override;

    const std::size_t K = cfg.objects.size();
    for (std::size_t r = 0; r < cfg.num_runs; ++r) {
        std::string run_id = "run_" + std::to_string(r);
        fs::path run_dir = fs::path(out_dir) / run_id;

        // Ground truth is fixed per (run, episode); keypoints vary per epoch.
        std::vector<std::vector<PointTrajectory>> gts(cfg.episodes_per_run);
        for (std::size_t i = 0; i < cfg.episodes_per_run; ++i) {
            MotionConfig mc;
            mc.num_objects = K;
            mc.steps = cfg.steps;
            mc.policy = cfg.motion_policy;
            mc.step_std = cfg.motion_step_std;
            mc.seed = static_cast<long>(mix(static_cast<std::uint64_t>(cfg.seed), r, i, 0));
            gts[i] = generate_gt(mc);
        }

        RunManifest manifest;
        manifest.run_id = run_id;
        manifest.seed = cfg.seed;
        for (std::size_t e = 0; e < cfg.num_epochs; ++e) {
            RunManifest::Snapshot snap;
            snap.epoch = static_cast<int>(e);
            double decay = std::pow(cfg.noise_decay, static_cast<double>(e));
            for (std::size_t i = 0; i < cfg.episodes_per_run; ++i) {
                KeypointSynthConfig kc;
                for (const auto& obj : cfg.objects)
                    kc.objects.push_back({obj.transform, obj.noise_std * decay});
                kc.num_distractors = cfg.num_distractors;
                kc.distractor_policy = cfg.distractor_policy;
                kc.distractor_step_std = cfg.distractor_step_std;
                kc.seed = static_cast<long>(mix(static_cast<std::uint64_t>(cfg.seed), r, i, e + 1));
                SynthesizedEpisode synth = synthesize_keypoints(gts[i], kc);
                synth.episode.episode_id = run_id + "_ep" + std::to_string(e) + "_" + std::to_string(i);
                for (std::size_t k = 0; k < K; ++k)
                    synth.episode.object_names[k] = cfg.objects[k].name;

                std::string rel = "epoch_" + std::to_string(e) + "/episode_" + std::to_string(i) + ".json";
                save_episode(synth.episode, (run_dir / rel).string());
                snap.episode_paths.push_back(rel);
            }
            manifest.snapshots.push_back(std::move(snap));
        }
        save_run_manifest(manifest, (run_dir / "manifest.json").string());
        std::cout << "generated " << run_id << " (" << cfg.num_epochs << " epochs, "
                  << cfg.episodes_per_run << " episodes)\n";
    }
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvalConfig {
    ThresholdConfig thresholds;
    ErrorNormalization normalization = ErrorNormalization::Mean;
    bool disjoint_fit_split = false;
    double softmax_alpha = 0.05;
    double heatmap_sigma = 0.1;
    double smoothing_sigma_steps = 2.5;
    double bootstrap_level = 0.95;
    std::size_t num_bootstrap = 2000;
    long bootstrap_seed = 0;
};

EvalConfig parse_eval_config(const json& root) {
    EvalConfig cfg;
    if (!root.contains("evaluate")) return cfg;
    const json& e = root["evaluate"];
    check_keys(e, {"thresholds", "normalization", "fit_eval_split", "softmax_alpha",
                   "heatmap_sigma", "smoothing_sigma_steps", "bootstrap"},
               "evaluate");
    if (e.contains("thresholds"))
        for (const auto& [name, mu] : e["thresholds"].items())
            cfg.thresholds.per_object[name] = mu.get<double>();
    if (e.contains("normalization"))
        cfg.normalization = normalization_from_string(e["normalization"].get<std::string>());
    if (e.contains("fit_eval_split")) {
        std::string split = e["fit_eval_split"].get<std::string>();
        if (split != "shared" && split != "disjoint")
            throw ValidationError("evaluate.fit_eval_split must be 'shared' or 'disjoint'");
        cfg.disjoint_fit_split = split == "disjoint";
    }
    cfg.softmax_alpha = e.value("softmax_alpha", cfg.softmax_alpha);
    cfg.heatmap_sigma = e.value("heatmap_sigma", cfg.heatmap_sigma);
    cfg.smoothing_sigma_steps = e.value("smoothing_sigma_steps", cfg.smoothing_sigma_steps);
    if (e.contains("bootstrap")) {
        const json& b = e["bootstrap"];
        check_keys(b, {"level", "num_bootstrap", "seed"}, "evaluate.bootstrap");
        cfg.bootstrap_level = b.value("level", cfg.bootstrap_level);
        cfg.num_bootstrap = b.value("num_bootstrap", cfg.num_bootstrap);
        cfg.bootstrap_seed = b.value("seed", cfg.bootstrap_seed);
    }
    return cfg;
}

json eval_config_to_json(const EvalConfig& cfg) {
    json thresholds = json::object();
    for (const auto& [name, mu] : cfg.thresholds.per_object) thresholds[name] = mu;
    return {{"thresholds", thresholds},
            {"normalization", to_string(cfg.normalization)},
            {"fit_eval_split", cfg.disjoint_fit_split ? "disjoint" : "shared"},
            {"softmax_alpha", cfg.softmax_alpha},
            {"heatmap_sigma", cfg.heatmap_sigma},
            {"smoothing_sigma_steps", cfg.smoothing_sigma_steps},
            {"bootstrap",
             {{"level", cfg.bootstrap_level},
              {"num_bootstrap", cfg.num_bootstrap},
              {"seed", cfg.bootstrap_seed}}}};
}

json transform_to_json(const AffineTransform2D& tf) {
    return {{"A", {{tf.A[0][0], tf.A[0][1]}, {tf.A[1][0], tf.A[1][1]}}},
            {"b", {tf.b[0], tf.b[1]}},
            {"degenerate", tf.degenerate}};
}

struct EpochEvaluation {
    TrackingReport report;
    std::vector<AffineTransform2D> best_transforms; // per object
};

EpochEvaluation evaluate_snapshot(const EpochSnapshot& snapshot, const std::string& run_id,
                                  const EvalConfig& cfg) {
    std::vector<EpisodeTrajectories> fit_set = snapshot.episodes;
    std::vector<EpisodeTrajectories> eval_set = snapshot.episodes;
    if (cfg.disjoint_fit_split && snapshot.episodes.size() >= 2) {
        std::size_t half = snapshot.episodes.size() / 2;
        fit_set.assign(snapshot.episodes.begin(),
                       snapshot.episodes.begin() + static_cast<std::ptrdiff_t>(half));
        eval_set.assign(snapshot.episodes.begin() + static_cast<std::ptrdiff_t>(half),
                        snapshot.episodes.end());
    }
    auto fits = fit_all_pairs(fit_set);
    ErrorMatrix errors = error_matrix(eval_set, fits, cfg.normalization);
    std::vector<std::size_t> association = associate(errors);

    EpochEvaluation ev;
    ev.report = tracking_report(errors, association, snapshot.episodes.front().object_names,
                                cfg.thresholds);
    ev.report.run_id = run_id;
    ev.report.epoch = snapshot.epoch;
    for (std::size_t k = 0; k < association.size(); ++k) {
        const AffineFit& fit = fits[association[k]][k];
        ev.report.objects[k].degenerate_fit = fit.transform.degenerate;
        ev.best_transforms.push_back(fit.transform);
    }
    return ev;
}

json report_to_json(const TrackingReport& report,
                    const std::vector<AffineTransform2D>& transforms) {
    json objects = json::array();
    for (std::size_t k = 0; k < report.objects.size(); ++k) {
        const ObjectResult& o = report.objects[k];
        json jo = {{"object", o.object_name},
                   {"best_keypoint", o.best_keypoint},
                   {"error", o.error},
                   {"threshold", o.threshold},
                   {"tracked", o.tracked},
                   {"degenerate_fit", o.degenerate_fit}};
        if (k < transforms.size()) jo["transform"] = transform_to_json(transforms[k]);
        objects.push_back(std::move(jo));
    }
    return {{"epoch", report.epoch},
            {"tc", report.tracking_capability},
            {"objects", std::move(objects)},
            {"shared_keypoints", report.shared_keypoints}};
}

int cmd_evaluate(const std::string& manifest_path, const std::string& config_path,
                 const std::string& out_dir, const std::string& norm_override,
                 const std::string& split_override) {
    EvalConfig cfg = parse_eval_config(load_config(config_path));
    if (!norm_override.empty()) cfg.normalization = normalization_from_string(norm_override);
    if (!split_override.empty()) {
        if (split_override != "shared" && split_override != "disjoint")
            throw ValidationError("--fit-split must be 'shared' or 'disjoint'");
        cfg.disjoint_fit_split = split_override == "disjoint";
    }

    RunRecord run = load_run(manifest_path);
    if (run.snapshots.empty())
        throw ValidationError("run " + run.run_id + ": no snapshots");
    for (const auto& snap : run.snapshots)
        for (const auto& ep : snap.episodes)
            if (!episode_in_domain(ep))
                std::cerr << "warning: episode " << ep.episode_id
                          << " has coordinates outside [-1, 1]^2\n";

    std::vector<EpochEvaluation> evals(run.snapshots.size());
    parallel_for(run.snapshots.size(), [&](std::size_t i) {
        evals[i] = evaluate_snapshot(run.snapshots[i], run.run_id, cfg);
    });

    const auto& object_names = run.snapshots.front().episodes.front().object_names;
    json series = json::object();
    for (std::size_t k = 0; k < object_names.size(); ++k) {
        std::vector<double> errs;
        for (const auto& ev : evals) errs.push_back(ev.report.objects[k].error);
        series[object_names[k]] = errs;
    }

    json epochs = json::array();
    for (const auto& ev : evals) {
        epochs.push_back(report_to_json(ev.report, ev.best_transforms));
        for (std::size_t n : ev.report.shared_keypoints)
            std::cerr << "warning: " << run.run_id << " epoch " << ev.report.epoch
                      << ": keypoint " << n << " is best for multiple objects\n";
    }

    json doc = {{"run_id", run.run_id},
                {"seed", run.seed},
                {"config", eval_config_to_json(cfg)},
                {"epochs", std::move(epochs)},
                {"series", std::move(series)}};
    fs::path out = fs::path(out_dir) / (run.run_id + "_report.json");
    write_text_atomic(out.string(), doc.dump(2) + "\n");
    std::cout << "evaluated " << run.run_id << ": final TC = "
              << evals.back().report.tracking_capability << " -> " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- aggregate

struct LoadedReport {
    std::string run_id;
    TrackingReport final_report;                 // last epoch
    std::map<std::string, std::vector<double>> series; // per-object error over epochs
};

LoadedReport load_report(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("report " + path + ": " + e.what());
    }
    LoadedReport rep;
    rep.run_id = doc.at("run_id").get<std::string>();
    const json& epochs = doc.at("epochs");
    if (epochs.empty())
        throw ValidationError("report " + path + ": no epochs");
    const json& last = epochs.back();
    rep.final_report.run_id = rep.run_id;
    rep.final_report.epoch = last.at("epoch").get<int>();
    rep.final_report.tracking_capability = last.at("tc").get<double>();
    std::size_t k = 0;
    for (const json& o : last.at("objects")) {
        ObjectResult res;
        res.object_name = o.at("object").get<std::string>();
        res.best_keypoint = o.at("best_keypoint").get<std::size_t>();
        res.error = o.at("error").get<double>();
        res.threshold = o.at("threshold").get<double>();
        res.tracked = o.at("tracked").get<bool>();
        res.degenerate_fit = o.value("degenerate_fit", false);
        if (res.tracked) rep.final_report.tracked_set.push_back(k);
        rep.final_report.objects.push_back(std::move(res));
        ++k;
    }
    for (const auto& [name, values] : doc.at("series").items())
        rep.series[name] = values.get<std::vector<double>>();
    return rep;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    return out + "\"";
}

json box_to_json(const BoxSummary& box) {
    return {{"q1", box.q1},       {"median", box.median},
            {"q3", box.q3},       {"whisker_low", box.whisker_low},
            {"whisker_high", box.whisker_high}, {"outliers", box.outliers}};
}

json interval_to_json(const IntervalEstimate& est) {
    return {{"point", est.point},
            {"lower", est.lower},
            {"upper", est.upper},
            {"level", est.level},
            {"num_bootstrap", est.num_bootstrap},
            {"seed", est.seed},
            {"point_outside_interval", est.point_outside_interval}};
}

int cmd_aggregate(const std::vector<std::string>& report_paths, const std::string& config_path,
                  const std::string& out_dir) {
    EvalConfig cfg = parse_eval_config(load_config(config_path));
    if (report_paths.empty())
        throw ValidationError("aggregate: no report files given");

    std::vector<LoadedReport> reports;
    for (const auto& path : report_paths) reports.push_back(load_report(path));

    std::vector<TrackingReport> finals;
    for (const auto& rep : reports) finals.push_back(rep.final_report);
    AggregateReport agg = aggregate_runs(finals);

    // Per-object distributions over runs plus smoothed mean epoch curves.
    json objects = json::array();
    for (std::size_t k = 0; k < agg.objects.size(); ++k) {
        const ObjectAggregate& oa = agg.objects[k];
        std::vector<double> errs;
        for (const auto& rep : reports) errs.push_back(rep.final_report.objects[k].error);

        json jo = {{"object", oa.object_name},
                   {"error_mean", oa.error_mean},
                   {"error_median", oa.error_median},
                   {"error_variance", oa.error_variance},
                   {"variance_defined", oa.variance_defined},
                   {"tc", oa.tracking_capability},
                   {"box", box_to_json(box_summary(errs))}};

        // Mean error over runs per epoch, then Gaussian-smoothed.
        std::size_t epochs = 0;
        for (const auto& rep : reports) {
            auto it = rep.series.find(oa.object_name);
            if (it == rep.series.end())
                throw ValidationError("aggregate: run " + rep.run_id + " lacks series for object '" +
                                      oa.object_name + "'");
            epochs = std::max(epochs, it->second.size());
        }
        std::vector<double> mean_series(epochs, 0.0);
        for (std::size_t e = 0; e < epochs; ++e) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& rep : reports) {
                const auto& s = rep.series.at(oa.object_name);
                if (e < s.size()) { sum += s[e]; ++count; }
            }
            mean_series[e] = sum / static_cast<double>(count);
        }
        jo["error_curve"] = mean_series;
        jo["error_curve_smoothed"] = gaussian_smooth(mean_series, cfg.smoothing_sigma_steps);
        objects.push_back(std::move(jo));
    }

    std::vector<double> tcs;
    for (const auto& rep : reports) tcs.push_back(rep.final_report.tracking_capability);
    json tc_stats = {{"mean", agg.mean_tracking_capability}, {"iqm", iqm(tcs)}};
    if (tcs.size() >= 2)
        tc_stats["bootstrap_ci"] = interval_to_json(bootstrap_ci(
            tcs, Statistic::Iqm, cfg.bootstrap_level, cfg.num_bootstrap, cfg.bootstrap_seed));

    json doc = {{"num_runs", agg.num_runs},
                {"config", eval_config_to_json(cfg)},
                {"tc", std::move(tc_stats)},
                {"objects", std::move(objects)}};
    fs::path out_json = fs::path(out_dir) / "aggregate.json";
    write_text_atomic(out_json.string(), doc.dump(2) + "\n");

    std::ostringstream csv;
    csv << "run_id,object,best_keypoint,error,threshold,tracked,tc\n";
    csv.precision(17);
    for (const auto& rep : reports)
        for (const ObjectResult& o : rep.final_report.objects)
            csv << csv_escape(rep.run_id) << ',' << csv_escape(o.object_name) << ','
                << o.best_keypoint << ',' << o.error << ',' << o.threshold << ','
                << (o.tracked ? "true" : "false") << ',' << rep.final_report.tracking_capability
                << '\n';
    fs::path out_csv = fs::path(out_dir) / "aggregate.csv";
    write_text_atomic(out_csv.string(), csv.str());

    std::cout << "aggregated " << agg.num_runs << " runs: mean TC = "
              << agg.mean_tracking_capability << " -> " << out_json.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"keypoint trajectory tracking evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, manifest_path, norm_override, split_override;
    long seed_override = 0;
    std::vector<std::string> report_paths;

    CLI::App* gen = app.add_subcommand("generate", "generate synthetic runs");
    gen->add_option("--config", config_path, "config file")->required();
    gen->add_option("--out", out_dir, "output directory")->required();
    CLI::Option* seed_opt = gen->add_option("--seed", seed_override, "override config seed");

    CLI::App* eval = app.add_subcommand("evaluate", "evaluate one run");
    eval->add_option("--run", manifest_path, "run manifest")->required();
    eval->add_option("--config", config_path, "config file")->required();
    eval->add_option("--out", out_dir, "output directory")->required();
    eval->add_option("--normalization", norm_override, "sum|mean");
    eval->add_option("--fit-split", split_override, "shared|disjoint");

    CLI::App* aggr = app.add_subcommand("aggregate", "aggregate run reports");
    aggr->add_option("--config", config_path, "config file")->required();
    aggr->add_option("--out", out_dir, "output directory")->required();
    aggr->add_option("reports", report_paths, "report JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed())
            return cmd_generate(config_path, out_dir, seed_override, seed_opt->count() > 0);
        if (eval->parsed())
            return cmd_evaluate(manifest_path, config_path, out_dir, norm_override, split_override);
        return cmd_aggregate(report_paths, config_path, out_dir);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
