// refdeblur-cli: command-line front end for the enrichment engine.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "refdeblur/refdeblur.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace refdeblur;

namespace {

void emit(const json& j) { std::cout << j.dump() << '\n'; }

[[noreturn]] void fail(const std::string& code, const std::string& message, int status = 1) {
    std::cout << json{{"error", code}, {"message", message}}.dump() << '\n';
    std::exit(status);
}

SharpnessThreshold parse_threshold(const std::string& s) {
    if (s == "relative") return SharpnessThreshold::Relative;
    if (s == "per-pixel") return SharpnessThreshold::PerPixel;
    throw ContractViolation("unknown sharpness threshold '" + s + "' (relative | per-pixel)");
}

std::string fixed6(double v) {
    if (!std::isfinite(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

FeaturePyramid feature_pyramid(const ImagePyramid& p, const Extractor& ex) {
    FeaturePyramid out;
    for (const auto& level : p.levels) out.levels.push_back(extract_features(level, ex));
    return out;
}

// ---- enrich ---------------------------------------------------------------

struct EnrichArgs {
    std::string blur, ref, weights, out = "enriched.png", dump;
    std::size_t K = 3, L = 16;
    bool no_inter = false;
    unsigned threads = 0;
};

void run_enrich(const EnrichArgs& a) {
    const ImageBuf blur = io::load_image(a.blur);
    const ImageBuf ref = io::load_image(a.ref);
    auto w = std::make_shared<const WeightBundle>(load_weights(a.weights));
    PipelineConfig cfg;
    cfg.K = a.K;
    cfg.L = a.L;
    cfg.C = Backbone<float>::from_bundle(*w).channels();
    cfg.weights = w;
    cfg.threads = a.threads;
    if (a.no_inter) cfg.matching_source = MatchingSource::DownscaledBlur;

    const EnrichmentTrace trace = enrich(blur, ref, cfg);
    io::save_image(a.out, trace.output());

    json scales = json::array();
    if (!a.dump.empty()) fs::create_directories(a.dump);
    for (const auto& s : trace.scales) {
        scales.push_back({{"k", s.k},
                          {"height", s.inter.height()},
                          {"width", s.inter.width()},
                          {"ops_performed", s.ops_performed},
                          {"mode", s.k == cfg.K ? "global" : "guided"}});
        if (a.dump.empty()) continue;
        const fs::path d = a.dump;
        const std::string k = std::to_string(s.k);
        io::save_rim1(d / ("index_" + k + ".rim"), s.match.index);
        io::save_rfm1(d / ("confidence_" + k + ".rfm"), s.match.confidence);
        io::save_rfm1(d / ("blur_features_" + k + ".rfm"), s.blur_features);
        io::save_rfm1(d / ("trans_features_" + k + ".rfm"), s.trans_features);
        io::save_rfm1(d / ("fused_features_" + k + ".rfm"), s.fused_features);
        io::save_image(d / ("inter_" + k + ".png"), s.inter);
        io::save_image(d / ("output_" + k + ".png"), s.output);
    }
    emit({{"output", a.out}, {"K", cfg.K}, {"L", cfg.L}, {"C", cfg.C},
          {"matching_source", a.no_inter ? "downscaled_blur" : "intermediate"}, {"scales", scales}});
}

// ---- match ----------------------------------------------------------------

struct MatchArgs {
    std::string query, ref, out, confidence;
    bool global = false;
    std::size_t K = 3, L = 16;
    unsigned threads = 0;
};

void run_match(const MatchArgs& a) {
    const ImageBuf q = io::load_image(a.query);
    const ImageBuf r = io::load_image(a.ref);
    const Extractor ex = FixedBank{};
    const MatchOptions opt{a.threads};
    MatchResult m;
    std::uint64_t total_ops = 0;
    if (a.global) {
        m = match_global(extract_features(q, ex), extract_features(r, ex), opt);
        total_ops = m.ops_performed;
    } else {
        const auto levels = match_multiscale(feature_pyramid(build_pyramid(q, a.K), ex),
                                             feature_pyramid(build_pyramid(r, a.K), ex), a.L, opt);
        for (const auto& l : levels) total_ops += l.ops_performed;
        m = levels.front();
    }
    io::save_rim1(a.out, m.index);
    if (!a.confidence.empty()) io::save_rfm1(a.confidence, m.confidence);
    emit({{"index", a.out},
          {"mode", a.global ? "global" : "guided"},
          {"height", m.height()},
          {"width", m.width()},
          {"ops_performed", m.ops_performed},
          {"total_ops", total_ops}});
}

// ---- select-ref / score ---------------------------------------------------

void run_select(const std::string& dir, const std::string& mode_name, const std::string& threshold) {
    const auto mode = parse_election_mode(mode_name);
    if (!mode) throw ContractViolation("unknown mode '" + mode_name + "' (most_blurry | intermediate | sharpest)");
    if (!fs::is_directory(dir)) throw IngestionError(dir + " is not a directory");
    const auto files = detail::sorted_frames(dir);
    if (files.empty()) throw ContractViolation("no image frames in " + dir);
    const SharpnessThreshold th = parse_threshold(threshold);
    std::vector<double> scores;
    for (const auto& f : files) scores.push_back(sharpness(io::load_image(f), th));
    const std::size_t i = elect_from_scores(scores, *mode);
    std::cout << "{\"file\":" << json(files[i].filename().string()).dump() << ",\"index\":" << i
              << ",\"score\":" << fixed6(scores[i]) << ",\"frames\":" << files.size() << "}\n";
}

void run_score(const std::string& truth_path, const std::string& est_path, const std::string& threshold) {
    const ImageBuf truth = io::load_image(truth_path);
    const ImageBuf est = io::load_image(est_path);
    const double p = psnr(truth, est), s = ssim(truth, est), sh = sharpness(est, parse_threshold(threshold));
    std::cout << "{\"psnr\":" << fixed6(p) << ",\"ssim\":" << fixed6(s) << ",\"sharpness\":" << fixed6(sh) << "}\n";
}

// ---- bench / grad-check ---------------------------------------------------

void run_bench(const BenchConfig& cfg) {
    const BenchReport r = bench_match(cfg);
    emit({{"height", cfg.height},
          {"width", cfg.width},
          {"channels", cfg.channels},
          {"K", r.levels_used},
          {"L", cfg.L},
          {"trials", cfg.trials},
          {"seed", cfg.seed},
          {"global_ops", r.global_ops},
          {"guided_ops", r.guided_ops},
          {"guided_total_ops", r.guided_total_ops},
          {"ops_ratio", r.ops_ratio},
          {"global_ms", r.global_ms},
          {"guided_ms", r.guided_ms},
          {"window_covers_grid", r.window_covers_grid},
          {"index_maps_equal", r.index_maps_equal},
          {"confidence_equal", r.confidence_equal}});
}

void run_grad_check(const GradCheckConfig& cfg, std::uint64_t seed) {
    const GradCheckReport r = grad_check(cfg, seed);
    json blocks = json::array();
    for (const auto& b : r.blocks)
        blocks.push_back({{"name", b.name}, {"count", b.count}, {"max_rel_err", b.max_rel_err},
                          {"max_abs_analytic", b.max_abs_analytic}});
    emit({{"seed", r.seed},
          {"size", cfg.size},
          {"channels", cfg.channels},
          {"levels", cfg.levels},
          {"alpha", cfg.loss.alpha},
          {"beta", cfg.loss.beta},
          {"epsilon", cfg.loss.epsilon},
          {"step", cfg.step},
          {"max_rel_err", r.max_rel_err},
          {"tolerance", kGradRelTolerance},
          {"kink_crossings", r.kink_crossings},
          {"passed", r.passed},
          {"blocks", blocks}});
    if (!r.passed) std::exit(3);
}

// ---- dataset / weights ----------------------------------------------------

void run_sample(const std::string& root, const std::string& scene_id, std::size_t frame, std::uint64_t seed,
                double ratio) {
    const auto scenes = scan_dataset(root);
    const auto it = std::ranges::find(scenes, scene_id, &SceneIndex::id);
    if (it == scenes.end()) throw IngestionError("no scene '" + scene_id + "' under " + root);
    Rng rng(seed);
    const RefChoice c = draw_reference(it->size(), frame, rng, {30, ratio});
    const FramePair& fp = it->frames[c.frame];
    emit({{"scene", scene_id},
          {"frame", frame},
          {"blur_path", it->frames[frame].blur.string()},
          {"ref_path", (c.kind == RefKind::Sharp ? fp.sharp : fp.blur).string()},
          {"kind", to_string(c.kind)},
          {"offset", c.offset}});
}

void run_weights_init(const WeightInit& init, const std::string& out) {
    const WeightBundle w = make_weights(init);
    w.save(out);
    emit({{"weights", out}, {"tensors", w.size()}, {"C", init.C}, {"image_channels", init.image_channels},
          {"seed", init.seed}, {"zero_fusion", init.zero_fusion}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference-guided feature enrichment: matching, fusion, losses and reference selection"};
    app.require_subcommand(1);

    EnrichArgs ea;
    auto* enrich_cmd = app.add_subcommand("enrich", "Run the coarse-to-fine pipeline and write the finest estimate");
    enrich_cmd->add_option("--blur", ea.blur, "Blurry input image")->required()->check(CLI::ExistingFile);
    enrich_cmd->add_option("--ref", ea.ref, "Reference image")->required()->check(CLI::ExistingFile);
    enrich_cmd->add_option("--weights", ea.weights, "RWB1 weight bundle")->required()->check(CLI::ExistingFile);
    enrich_cmd->add_option("--K", ea.K, "Pyramid levels")->capture_default_str();
    enrich_cmd->add_option("--L", ea.L, "Guide window side")->capture_default_str();
    enrich_cmd->add_option("--out", ea.out, "Output image (.png/.ppm/.pgm)")->capture_default_str();
    enrich_cmd->add_flag("--no-inter", ea.no_inter, "Match on the downscaled blur instead of intermediate outputs");
    enrich_cmd->add_option("--dump-trace", ea.dump, "Directory for per-scale RIM1/RFM1/PNG artifacts");
    enrich_cmd->add_option("--threads", ea.threads, "Worker threads (0 = all)");

    MatchArgs ma;
    auto* match_cmd = app.add_subcommand("match", "Fixed-bank patch matching between two images");
    match_cmd->add_option("--query", ma.query, "Query image")->required()->check(CLI::ExistingFile);
    match_cmd->add_option("--ref", ma.ref, "Reference image")->required()->check(CLI::ExistingFile);
    match_cmd->add_option("--out,--dump-index", ma.out, "Output index map (RIM1)")->required();
    match_cmd->add_option("--dump-confidence", ma.confidence, "Output confidence map (RFM1)");
    match_cmd->add_flag("--global", ma.global, "Exhaustive matching at full resolution");
    match_cmd->add_option("--K", ma.K, "Pyramid levels for guided matching")->capture_default_str();
    match_cmd->add_option("--L", ma.L, "Guide window side")->capture_default_str();
    match_cmd->add_option("--threads", ma.threads, "Worker threads (0 = all)");

    std::string sel_dir, sel_mode = "sharpest", threshold = "relative";
    auto* select_cmd = app.add_subcommand("select-ref", "Elect a reference frame by sharpness");
    select_cmd->add_option("--dir", sel_dir, "Directory of frames")->required();
    select_cmd->add_option("--mode", sel_mode, "most_blurry | intermediate | sharpest")->capture_default_str();
    select_cmd->add_option("--threshold", threshold, "Sharpness threshold: relative | per-pixel")->capture_default_str();

    std::string truth, est;
    auto* score_cmd = app.add_subcommand("score", "PSNR, SSIM and sharpness of an estimate");
    score_cmd->add_option("--truth", truth, "Ground-truth image")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--est", est, "Estimated image")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--threshold", threshold, "Sharpness threshold: relative | per-pixel")->capture_default_str();

    BenchConfig bc;
    std::size_t bench_size = 0;
    auto* bench_cmd = app.add_subcommand("bench", "Benchmarks");
    bench_cmd->require_subcommand(1);
    auto* bench_match_cmd = bench_cmd->add_subcommand("match", "Global vs guided similarity counts and timings");
    bench_match_cmd->add_option("--size", bench_size, "Square grid side (overrides --height/--width)");
    bench_match_cmd->add_option("--height", bc.height)->capture_default_str();
    bench_match_cmd->add_option("--width", bc.width)->capture_default_str();
    bench_match_cmd->add_option("--channels", bc.channels)->capture_default_str();
    bench_match_cmd->add_option("--K", bc.K)->capture_default_str();
    bench_match_cmd->add_option("--L", bc.L)->capture_default_str();
    bench_match_cmd->add_option("--trials", bc.trials)->capture_default_str();
    bench_match_cmd->add_option("--seed", bc.seed)->capture_default_str();
    bench_match_cmd->add_option("--threads", bc.threads, "Worker threads (0 = all)");

    GradCheckConfig gc;
    std::uint64_t gc_seed = 0;
    auto* grad_cmd = app.add_subcommand("grad-check", "Analytic vs finite-difference gradients of fuse -> head -> loss");
    grad_cmd->add_option("--seed", gc_seed)->capture_default_str();
    grad_cmd->add_option("--size", gc.size)->capture_default_str();
    grad_cmd->add_option("--channels", gc.channels)->capture_default_str();
    grad_cmd->add_option("--levels", gc.levels)->capture_default_str();
    grad_cmd->add_option("--alpha", gc.loss.alpha)->capture_default_str();
    grad_cmd->add_option("--beta", gc.loss.beta)->capture_default_str();
    grad_cmd->add_option("--epsilon", gc.loss.epsilon)->capture_default_str();
    grad_cmd->add_option("--step", gc.step)->capture_default_str();
    grad_cmd->add_flag("--zero-loss", gc.zero_loss, "Use truth == estimate");

    std::string root, scene;
    std::size_t frame = 0;
    std::uint64_t sample_seed = 0;
    double ratio = 0.8;
    auto* dataset_cmd = app.add_subcommand("dataset", "Dataset utilities");
    dataset_cmd->require_subcommand(1);
    auto* sample_cmd = dataset_cmd->add_subcommand("sample", "Draw a reference frame for one target");
    sample_cmd->add_option("--root", root, "Dataset root (<root>/<scene>/{blur,sharp})")->required();
    sample_cmd->add_option("--scene", scene, "Scene id")->required();
    sample_cmd->add_option("--frame", frame, "Target frame index")->required();
    sample_cmd->add_option("--seed", sample_seed)->capture_default_str();
    sample_cmd->add_option("--ratio", ratio, "Probability of a sharp reference")->capture_default_str();

    WeightInit wi;
    std::string weights_out;
    bool gray = false;
    auto* weights_cmd = app.add_subcommand("weights", "Weight bundle utilities");
    weights_cmd->require_subcommand(1);
    auto* init_cmd = weights_cmd->add_subcommand("init", "Write a seeded weight bundle");
    init_cmd->add_option("--out", weights_out, "Output RWB1 file")->required();
    init_cmd->add_option("--C", wi.C, "Feature channels")->capture_default_str();
    init_cmd->add_option("--seed", wi.seed)->capture_default_str();
    init_cmd->add_flag("--zero-fusion", wi.zero_fusion, "All-zero fusion convs (pipeline reduces to the backbone)");
    init_cmd->add_flag("--gray", gray, "Single-channel images");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        fail("usage", e.what(), 2);
    }

    try {
        if (*enrich_cmd) run_enrich(ea);
        else if (*match_cmd) run_match(ma);
        else if (*select_cmd) run_select(sel_dir, sel_mode, threshold);
        else if (*score_cmd) run_score(truth, est, threshold);
        else if (*bench_match_cmd) {
            if (bench_size != 0) bc.height = bc.width = bench_size;
            run_bench(bc);
        } else if (*grad_cmd) run_grad_check(gc, gc_seed);
        else if (*sample_cmd) run_sample(root, scene, frame, sample_seed, ratio);
        else if (*init_cmd) {
            wi.image_channels = gray ? 1 : 3;
            run_weights_init(wi, weights_out);
        }
    } catch (const Error& e) {
        fail(e.code(), e.what());
    } catch (const std::exception& e) {
        fail("internal", e.what());
    }
    return 0;
}
