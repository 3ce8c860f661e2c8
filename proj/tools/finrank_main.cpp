// finrank: contour-based individual identification from trailing edges.
//
// Subcommands: ingest, synthgen, build-index, learn-weights, query, evaluate.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "finrank/evaluation.hpp"
#include "finrank/learn.hpp"
#include "finrank/matchers.hpp"
#include "finrank/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace finrank;

namespace {

struct CommonOptions {
    std::string workspace = "finrank-workspace";
    std::string matcher = "dtw";
    std::string profile = "bottlenose";
    std::vector<double> scales;
    std::string axis;
    Eigen::Index contour_resample = -1;
    Eigen::Index resample = -1;
    Eigen::Index band = -2;
    int keypoints = -1;
    int descriptor_dim = -1;
    int lnbnn_k = -1;
    int trees = -1;
    int leaf_size = -1;
    bool exact = false;
    int search_budget = 0;
    int hocs_bins = -1;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    std::string weights_file;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool with_matcher = true) {
    cmd->add_option("--workspace", opt.workspace, "Workspace directory");
    if (with_matcher)
        cmd->add_option("--matcher", opt.matcher, "Matcher: dtw, lnbnn, or hocs")
            ->check(CLI::IsMember({"dtw", "lnbnn", "hocs"}));
    cmd->add_option("--profile", opt.profile, "Hyperparameter preset")
        ->check(CLI::IsMember({"bottlenose", "humpback"}));
    cmd->add_option("--scales", opt.scales, "Relative scales, e.g. --scales 0.04 0.06 0.08 0.10");
    cmd->add_option("--axis", opt.axis, "Extent axis for radii: height or width")
        ->check(CLI::IsMember({"height", "width"}));
    cmd->add_option("--contour-resample", opt.contour_resample,
                    "Edge points before curvature computation");
    cmd->add_option("--resample", opt.resample, "Curvature columns used by the aligner");
    cmd->add_option("--band", opt.band, "Warping band half-width (-1 for unbounded)");
    cmd->add_option("--keypoints", opt.keypoints, "Keypoints per scale");
    cmd->add_option("--descriptor-dim", opt.descriptor_dim, "Descriptor dimension");
    cmd->add_option("--k", opt.lnbnn_k, "Neighbor count for scoring");
    cmd->add_option("--trees", opt.trees, "Trees in the search forest");
    cmd->add_option("--leaf-size", opt.leaf_size, "Forest leaf size");
    cmd->add_flag("--exact", opt.exact, "Brute-force search instead of the forest");
    cmd->add_option("--search-budget", opt.search_budget, "Forest candidate budget (0: auto)");
    cmd->add_option("--bins", opt.hocs_bins, "Histogram bins for the hocs matcher");
    cmd->add_option("--seed", opt.seed, "RNG seed");
    cmd->add_option("--jobs", opt.jobs, "Worker threads (0: all cores)");
    cmd->add_option("--weights-file", opt.weights_file, "Spatial weights JSON for the aligner");
}

PipelineConfig build_config(const CommonOptions& opt) {
    PipelineConfig cfg = opt.profile == "humpback" ? humpback_profile() : bottlenose_profile();
    cfg.kind = matcher_from_string(opt.matcher);
    if (!opt.scales.empty() || !opt.axis.empty()) {
        const std::vector<double> scales =
            opt.scales.empty() ? cfg.scales.relative_scales : opt.scales;
        Axis axis = cfg.scales.axis;
        if (!opt.axis.empty()) axis = opt.axis == "height" ? Axis::Height : Axis::Width;
        cfg.scales = ScaleSet(scales, axis);
    }
    if (opt.contour_resample > 0) cfg.contour_resample = opt.contour_resample;
    if (opt.resample > 0) cfg.align.resample_to = opt.resample;
    if (opt.band >= -1) cfg.align.band = opt.band < 0 ? kUnboundedBand : opt.band;
    if (opt.keypoints > 0) cfg.keypoints = opt.keypoints;
    if (opt.descriptor_dim > 0) cfg.descriptor_dim = opt.descriptor_dim;
    if (opt.lnbnn_k > 0) cfg.lnbnn_k = opt.lnbnn_k;
    if (opt.trees > 0) cfg.trees = opt.trees;
    if (opt.leaf_size > 0) cfg.leaf_size = opt.leaf_size;
    cfg.exact_search = opt.exact;
    cfg.search_budget = opt.search_budget;
    if (opt.hocs_bins > 1) cfg.hocs_bins = opt.hocs_bins;
    cfg.seed = opt.seed;
    cfg.jobs = opt.jobs;

    if (!opt.weights_file.empty()) {
        std::ifstream in(opt.weights_file);
        if (!in) throw IoError("cannot open weights file " + opt.weights_file);
        const SpatialWeights w = load_weights(in);
        cfg.align.weights = w.evaluated(cfg.align.resample_to);
    }
    return cfg;
}

fs::path db_path(const CommonOptions& opt) {
    return fs::path(opt.workspace) / "db" / "contours.jsonl";
}

fs::path artifact_path(const CommonOptions& opt, const PipelineConfig& cfg) {
    const char* ext = cfg.kind == MatcherKind::Lnbnn ? ".idx" : ".curv";
    return fs::path(opt.workspace) / "artifacts" /
           (std::string(to_string(cfg.kind)) + "-" + config_hash(cfg) + ext);
}

EncounterDatabase load_workspace_db(const CommonOptions& opt) {
    std::ifstream in(db_path(opt));
    if (!in) throw IoError("no ingested database at " + db_path(opt).string() + "; run ingest first");
    ParseReport report = parse_contours(in, ContourFormat::Jsonl);
    if (report.db.empty()) throw EmptyInputError("ingested database is empty");
    return std::move(report.db);
}

// (individual, encounter) units of every encounter present in `db`.
std::vector<QueryUnit> all_units(const EncounterDatabase& db) {
    std::vector<QueryUnit> units;
    for (const auto& [ind, encs] : db.individuals())
        for (const auto& [enc, imgs] : encs) units.push_back({ind, enc});
    return units;
}

int cmd_ingest(const CommonOptions& opt, const std::vector<std::string>& inputs,
               const std::string& format, bool strict) {
    EncounterDatabase merged;
    std::size_t rejected = 0;
    std::size_t accepted = 0;
    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path);
        ParseReport report = parse_contours(
            in, format == "csv" ? ContourFormat::Csv : ContourFormat::Jsonl, {.strict = strict});
        rejected += report.diagnostics.size();
        accepted += report.accepted;
        for (const std::string& diag : report.diagnostics) std::cerr << path << ": " << diag << "\n";
        for (const Contour* c : report.db.all_contours()) merged.insert(*c);
    }
    if (accepted == 0) throw EmptyInputError("no records");

    fs::create_directories(db_path(opt).parent_path());
    std::ofstream out(db_path(opt), std::ios::trunc);
    serialize_contours(merged, out, ContourFormat::Jsonl);
    if (!out) throw IoError("cannot write " + db_path(opt).string());

    std::cout << merged.individual_count() << " individuals, " << merged.encounter_count()
              << " encounters, " << merged.image_count() << " images";
    if (rejected > 0) std::cout << " (" << rejected << " records rejected)";
    std::cout << "\n";
    return 0;
}

int cmd_synthgen(const BenchmarkConfig& cfg, const std::string& out_path) {
    const EncounterDatabase db = generate_benchmark(cfg);
    if (out_path.empty() || out_path == "-") {
        serialize_contours(db, std::cout, ContourFormat::Jsonl);
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + out_path);
        serialize_contours(db, out, ContourFormat::Jsonl);
    }
    std::cerr << "generated " << db.individual_count() << " individuals, " << db.encounter_count()
              << " encounters, " << db.image_count() << " images\n";
    return 0;
}

int cmd_build_index(const CommonOptions& opt) {
    const PipelineConfig cfg = build_config(opt);
    const EncounterDatabase db = load_workspace_db(opt);
    const fs::path path = artifact_path(opt, cfg);
    if (fs::exists(path)) {
        std::cout << "cache hit: " << path.string() << "\n";
        return 0;
    }
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());

    switch (cfg.kind) {
        case MatcherKind::Dtw:
            save_dtw_artifacts(compute_dtw_artifacts(db, cfg), out);
            break;
        case MatcherKind::Hocs:
            save_dtw_artifacts(compute_hocs_artifacts(db, cfg), out);
            break;
        case MatcherKind::Lnbnn: {
            const auto sets = compute_descriptor_sets(db, cfg);
            std::size_t total = 0;
            for (const auto& s : sets)
                for (const auto& d : s.items)
                    if (d.indexable) ++total;
            const NnIndex index = NnIndex::build(sets, {cfg.trees, cfg.leaf_size, cfg.seed});
            index.save(out);
            std::cout << "indexed " << total << " descriptors from " << db.image_count()
                      << " images\n";
            break;
        }
    }
    std::cout << "wrote " << path.string() << " (config " << config_hash(cfg) << ")\n";
    return 0;
}

std::vector<RankedList> rank_against_workspace(const CommonOptions& opt, const PipelineConfig& cfg,
                                               const EncounterDatabase& db,
                                               const EncounterDatabase& query_data,
                                               const std::vector<QueryUnit>& units) {
    const fs::path path = artifact_path(opt, cfg);
    if (!fs::exists(path))
        throw IoError("no artifacts for this configuration; run build-index first (" +
                      path.string() + ")");
    std::ifstream in(path, std::ios::binary);
    if (cfg.kind == MatcherKind::Lnbnn) {
        const NnIndex index = NnIndex::load(in);
        return rank_with_index(index, query_data, units, cfg);
    }
    const DtwArtifacts art = load_dtw_artifacts(in);
    if (cfg.kind == MatcherKind::Dtw)
        return rank_with_dtw_artifacts(art, db, query_data, units, cfg);
    return rank_with_hocs_artifacts(art, db, query_data, units, cfg);
}

int cmd_query(const CommonOptions& opt, const std::string& query_file,
              const std::string& out_path) {
    const PipelineConfig cfg = build_config(opt);
    const EncounterDatabase db = load_workspace_db(opt);

    std::ifstream qin(query_file);
    if (!qin) throw IoError("cannot open " + query_file);
    const ParseReport qreport = parse_contours(qin, ContourFormat::Jsonl);
    if (qreport.db.empty()) throw EmptyInputError("query file holds no contours");

    const auto units = all_units(qreport.db);
    const auto rankings = rank_against_workspace(opt, cfg, db, qreport.db, units);

    std::ostringstream body;
    body << json{{"meta", {{"config_hash", config_hash(cfg)}, {"seed", cfg.seed}}}}.dump() << "\n";
    dump_rankings(rankings, body);
    if (out_path.empty() || out_path == "-") {
        std::cout << body.str();
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + out_path);
        out << body.str();
    }
    return 0;
}

int cmd_learn_weights(const CommonOptions& opt, int budget, int k_objective, int degree,
                      int m_encounters, const std::string& out_path) {
    CommonOptions dtw_opt = opt;
    dtw_opt.matcher = "dtw";
    const PipelineConfig cfg = build_config(dtw_opt);
    const EncounterDatabase db = load_workspace_db(opt);
    const Split split = make_split(db, m_encounters, opt.seed);

    LearnConfig lc;
    lc.budget = budget;
    lc.k_objective = k_objective;
    lc.degree = degree;
    lc.seed = opt.seed;
    const LearnOutcome outcome = learn_weights(split, cfg, lc);

    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + out_path);
    save_weights(outcome.weights, cfg.align.resample_to, out);

    std::cout << "baseline top-" << k_objective << " objective " << outcome.baseline_objective
              << ", learned " << outcome.learned_objective << " after " << outcome.evaluations
              << " evaluations (config " << config_hash(cfg) << ")\n";
    return 0;
}

int cmd_evaluate(const CommonOptions& opt, const std::vector<std::string>& matchers, int runs,
                 int m_encounters, int max_k, const std::string& fuse_file,
                 const std::string& report_path, const std::string& csv_path) {
    const EncounterDatabase db = load_workspace_db(opt);

    std::vector<PipelineConfig> cfgs;
    for (const std::string& name : matchers) {
        CommonOptions o = opt;
        o.matcher = name;
        cfgs.push_back(build_config(o));
    }

    std::optional<std::vector<RankedList>> external;
    if (!fuse_file.empty()) {
        std::ifstream in(fuse_file);
        if (!in) throw IoError("cannot open " + fuse_file);
        external = load_rankings(in);
    }

    json report;
    report["m"] = m_encounters;
    report["max_k"] = max_k;
    report["base_seed"] = opt.seed;
    for (std::size_t c = 0; c < cfgs.size(); ++c)
        report["config_hash"][matchers[c]] = config_hash(cfgs[c]);

    std::vector<std::vector<std::vector<double>>> curves(cfgs.size());  // matcher -> run -> k
    std::vector<std::vector<double>> fused_curves;
    json runs_json = json::array();
    for (int run = 0; run < runs; ++run) {
        const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(run);
        const Split split = make_split(db, m_encounters, seed);
        json run_json;
        run_json["seed"] = seed;
        std::vector<std::vector<RankedList>> rankings_per_matcher;
        for (std::size_t c = 0; c < cfgs.size(); ++c) {
            PipelineConfig cfg = cfgs[c];
            cfg.seed = seed;
            const auto rankings = rank_queries(split.database, split.query_data, split.queries, cfg);
            const TopKReport rep = top_k_accuracy(rankings, max_k);
            curves[c].push_back(rep.accuracy);
            run_json["accuracy"][matchers[c]] = rep.accuracy;
            rankings_per_matcher.push_back(rankings);
        }
        if (rankings_per_matcher.size() >= 2) {
            const auto fused =
                fused_accuracy_curve(rankings_per_matcher[0], rankings_per_matcher[1], max_k);
            fused_curves.push_back(fused);
            run_json["accuracy"]["fused"] = fused;
        } else if (external) {
            const auto fused = fused_accuracy_curve(rankings_per_matcher[0], *external, max_k);
            fused_curves.push_back(fused);
            run_json["accuracy"]["fused"] = fused;
        }
        runs_json.push_back(std::move(run_json));
    }
    report["runs"] = std::move(runs_json);

    auto mean_stddev = [&](const std::vector<std::vector<double>>& per_run) {
        std::vector<double> mean(static_cast<std::size_t>(max_k), 0.0);
        std::vector<double> stddev(static_cast<std::size_t>(max_k), 0.0);
        for (const auto& r : per_run)
            for (int k = 0; k < max_k; ++k) mean[static_cast<std::size_t>(k)] += r[static_cast<std::size_t>(k)];
        for (double& v : mean) v /= static_cast<double>(per_run.size());
        if (per_run.size() > 1) {
            for (const auto& r : per_run)
                for (int k = 0; k < max_k; ++k) {
                    const double d = r[static_cast<std::size_t>(k)] - mean[static_cast<std::size_t>(k)];
                    stddev[static_cast<std::size_t>(k)] += d * d;
                }
            for (double& v : stddev) v = std::sqrt(v / static_cast<double>(per_run.size() - 1));
        }
        return std::pair(mean, stddev);
    };

    std::ostringstream csv;
    csv << "matcher,k,mean_accuracy,stddev\n";
    csv.precision(17);
    for (std::size_t c = 0; c < cfgs.size(); ++c) {
        const auto [mean, stddev] = mean_stddev(curves[c]);
        report["mean"][matchers[c]] = mean;
        report["stddev"][matchers[c]] = stddev;
        for (int k = 1; k <= max_k; ++k)
            csv << matchers[c] << ',' << k << ',' << mean[static_cast<std::size_t>(k - 1)] << ','
                << stddev[static_cast<std::size_t>(k - 1)] << "\n";
    }
    if (!fused_curves.empty()) {
        const auto [mean, stddev] = mean_stddev(fused_curves);
        report["mean"]["fused"] = mean;
        report["stddev"]["fused"] = stddev;
        for (int k = 1; k <= max_k; ++k)
            csv << "fused," << k << ',' << mean[static_cast<std::size_t>(k - 1)] << ','
                << stddev[static_cast<std::size_t>(k - 1)] << "\n";
    }

    // plain-text table
    std::cout << "k";
    for (const auto& name : matchers) std::cout << '\t' << name;
    if (!fused_curves.empty()) std::cout << "\tfused";
    std::cout << "\n";
    for (int k = 1; k <= max_k; ++k) {
        std::cout << k;
        for (std::size_t c = 0; c < cfgs.size(); ++c)
            std::cout << '\t' << report["mean"][matchers[c]][static_cast<std::size_t>(k - 1)].get<double>();
        if (!fused_curves.empty())
            std::cout << '\t' << report["mean"]["fused"][static_cast<std::size_t>(k - 1)].get<double>();
        std::cout << "\n";
    }

    if (!report_path.empty()) {
        const fs::path parent = fs::path(report_path).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        std::ofstream out(report_path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + report_path);
        out << report.dump(2) << "\n";
    }
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + csv_path);
        out << csv.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Individual identification from trailing-edge contours"};
    app.require_subcommand(1);

    CommonOptions opt;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate contour files into a workspace database");
    std::vector<std::string> ingest_inputs;
    std::string ingest_format = "jsonl";
    bool ingest_strict = false;
    ingest->add_option("inputs", ingest_inputs, "Contour files")->required();
    ingest->add_option("--format", ingest_format, "Input format")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    ingest->add_flag("--strict", ingest_strict, "Fail on the first malformed line or conflict");
    ingest->add_option("--workspace", opt.workspace, "Workspace directory");

    // synthgen
    auto* synth = app.add_subcommand("synthgen", "Generate a labeled synthetic contour dataset");
    BenchmarkConfig bench;
    std::string synth_out;
    synth->add_option("--individuals", bench.individuals, "Population size");
    synth->add_option("--notches", bench.notches, "Notches per individual");
    synth->add_option("--encounters", bench.encounters, "Encounters per individual");
    synth->add_option("--images", bench.images, "Images per encounter");
    synth->add_option("--seed", bench.seed, "RNG seed");
    synth->add_option("--rotation", bench.distortion.rotation_deg, "Rotation range, degrees");
    synth->add_option("--aniso", bench.distortion.aniso_scale, "Anisotropic scale range");
    synth->add_option("--truncation", bench.distortion.truncation,
                      "Total arc-length fraction cut from the ends");
    synth->add_option("--jitter", bench.distortion.jitter_sigma, "Point jitter sigma, pixels");
    synth->add_option("--occlusion", bench.per_encounter_occlusion,
                      "Per-encounter truncation bound");
    synth->add_option("--out", synth_out, "Output JSONL path (default stdout)");

    // build-index
    auto* build = app.add_subcommand("build-index", "Precompute matcher artifacts for the database");
    add_common_flags(build, opt);

    // learn-weights
    auto* learn = app.add_subcommand("learn-weights", "Learn spatial weights for the aligner");
    int learn_budget = 200;
    int learn_k = 1;
    int learn_degree = 10;
    int learn_m = 10;
    std::string learn_out = "weights.json";
    add_common_flags(learn, opt, false);
    learn->add_option("--budget", learn_budget, "Objective evaluations");
    learn->add_option("--k-objective", learn_k, "Top-k the search maximizes");
    learn->add_option("--degree", learn_degree, "Coefficient vector degree");
    learn->add_option("--m-encounters", learn_m, "Database encounters per individual");
    learn->add_option("--out", learn_out, "Weights JSON path");

    // query
    auto* query = app.add_subcommand("query", "Rank database individuals for query encounters");
    std::string query_file, query_out;
    add_common_flags(query, opt);
    query->add_option("--queries", query_file, "JSONL contour file of query encounters")->required();
    query->add_option("--out", query_out, "Ranking dump path (default stdout)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Split, rank, and report top-k accuracy");
    std::vector<std::string> eval_matchers{"dtw"};
    int eval_runs = 1;
    int eval_m = 10;
    int eval_k = 25;
    std::string eval_fuse, eval_report, eval_csv;
    add_common_flags(eval, opt, false);
    eval->add_option("--matchers", eval_matchers, "Matchers to evaluate (one or two)")
        ->check(CLI::IsMember({"dtw", "lnbnn", "hocs"}));
    eval->add_option("--runs", eval_runs, "Independent splits to average");
    eval->add_option("--m-encounters", eval_m, "Database encounters per individual");
    eval->add_option("--max-k", eval_k, "Largest k in the accuracy curve");
    eval->add_option("--fuse", eval_fuse, "External ranking JSONL to fuse with");
    eval->add_option("--report", eval_report, "Report JSON path");
    eval->add_option("--csv", eval_csv, "Accuracy curve CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*ingest) return cmd_ingest(opt, ingest_inputs, ingest_format, ingest_strict);
        if (*synth) return cmd_synthgen(bench, synth_out);
        if (*build) return cmd_build_index(opt);
        if (*learn)
            return cmd_learn_weights(opt, learn_budget, learn_k, learn_degree, learn_m, learn_out);
        if (*query) return cmd_query(opt, query_file, query_out);
        if (*eval)
            return cmd_evaluate(opt, eval_matchers, eval_runs, eval_m, eval_k, eval_fuse,
                                eval_report, eval_csv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
