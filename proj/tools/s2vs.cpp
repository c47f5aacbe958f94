// Command-line front end: synthetic corpora, feature extraction, training,
// scoring, evaluation, normalization, hard-subset filtering, matrix dumps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "s2vs/s2vs.hpp"

namespace fs = std::filesystem;

namespace {

s2vs::TrainConfig load_cfg_or_default(const std::string& config_path, uint64_t* seed_override) {
    s2vs::TrainConfig cfg = s2vs::desk_train_config();
    if (!config_path.empty()) cfg = s2vs::load_config(config_path, cfg);
    if (seed_override) cfg.seed = *seed_override;
    return cfg;
}

std::vector<s2vs::FrameSequence> load_videos_arg(const std::string& path) {
    // A corpus directory has a manifest; otherwise treat as one video dir.
    if (fs::exists(fs::path(path) / "manifest.tsv")) return s2vs::load_corpus(path);
    std::vector<s2vs::FrameSequence> one;
    one.push_back(s2vs::load_video(path));
    return one;
}

int cmd_make_synthetic(const std::string& out, const s2vs::CorpusSpec& spec) {
    auto corpus = s2vs::generate_synthetic_corpus(spec);
    s2vs::write_corpus(out, corpus);
    std::cout << "wrote " << corpus.size() << " videos to " << out << "\n";
    return 0;
}

int cmd_extract(const std::string& in, const std::string& out) {
    s2vs::Backbone backbone = s2vs::make_toy_backbone();
    if (fs::exists(fs::path(in) / "manifest.tsv")) {
        auto corpus = s2vs::load_corpus(in);
        fs::create_directories(out);
        for (const auto& video : corpus) {
            s2vs::RegionFeatureMap f = backbone.extract(video.frames);
            s2vs::write_features(fs::path(out) / (video.source_id + ".s2vf"), f);
        }
        std::cout << "extracted " << corpus.size() << " feature files to " << out << "\n";
    } else {
        s2vs::FrameSequence video = s2vs::load_video(in);
        s2vs::RegionFeatureMap f = backbone.extract(video.frames);
        s2vs::write_features(out, f);
        std::cout << "wrote " << out << " (" << f.t << " frames x " << f.r << " regions x " << f.d
                  << " dims)\n";
    }
    return 0;
}

int cmd_train(const s2vs::TrainConfig& cfg, const std::string& corpus_dir, const std::string& out,
              const std::string& resume_path) {
    auto corpus = s2vs::load_corpus(corpus_dir);
    s2vs::Backbone backbone = s2vs::make_toy_backbone();
    fs::create_directories(out);

    std::ofstream log(fs::path(out) / "train_log.csv");
    if (!log) throw s2vs::IngestError("train: cannot open log file in " + out);
    log << "step,nce,sshn,reg,total,lr\n";

    s2vs::Checkpoint resume;
    const s2vs::Checkpoint* resume_ptr = nullptr;
    if (!resume_path.empty()) {
        resume = s2vs::load_checkpoint(resume_path, backbone);
        resume_ptr = &resume;
    }
    s2vs::Checkpoint ck = s2vs::train(backbone, corpus, cfg, &log, resume_ptr, out);
    s2vs::save_config(fs::path(out) / "run.cfg", ck.cfg);
    std::cout << "trained to iteration " << ck.iteration << "; checkpoint in " << out << "\n";
    return 0;
}

int cmd_score(const std::string& ckpt, const std::string& a, const std::string& b) {
    s2vs::Backbone backbone = s2vs::make_toy_backbone();
    s2vs::Checkpoint ck = s2vs::load_checkpoint(ckpt, backbone);
    s2vs::FrameSequence va = s2vs::load_video(a), vb = s2vs::load_video(b);
    double s = s2vs::score_pair(ck.model, va.frames, vb.frames);
    std::cout.precision(10);
    std::cout << (s + 1.0) / 2.0 << "\n";
    return 0;
}

int cmd_evaluate(const std::string& run_path, bool per_query) {
    s2vs::EvalRun run = s2vs::read_run(run_path);
    double map = s2vs::mean_ap(run);
    double uap = s2vs::micro_ap(run);
    std::cout.precision(10);
    std::cout << "mAP: " << map << "\nuAP: " << uap << "\n";
    if (per_query) {
        for (const auto& row : s2vs::per_query_report(run)) {
            std::cout << row.query << ": ";
            if (row.skipped) std::cout << "skipped (no relevant candidates)\n";
            else std::cout << 100.0 * row.ap << "\n";
        }
    }
    return 0;
}

int cmd_normalize(const std::string& run_path, const std::string& ckpt,
                  const std::string& queries_dir, const std::string& background_dir, int k,
                  const std::string& out) {
    s2vs::Backbone backbone = s2vs::make_toy_backbone();
    s2vs::Checkpoint ck = s2vs::load_checkpoint(ckpt, backbone);
    s2vs::EvalRun run = s2vs::read_run(run_path);

    std::vector<std::pair<std::string, s2vs::RegionFeatureMap>> query_feats;
    for (const auto& video : load_videos_arg(queries_dir))
        query_feats.emplace_back(video.source_id, backbone.extract(video.frames));
    std::vector<s2vs::RegionFeatureMap> background;
    for (const auto& video : load_videos_arg(background_dir))
        background.push_back(backbone.extract(video.frames));

    s2vs::NormalizationConfig ncfg;
    ncfg.k = k;
    s2vs::EvalRun normalized = s2vs::similarity_normalize(run, query_feats, background, ncfg, ck.model);
    s2vs::write_run(out, normalized);
    std::cout << "normalized run written to " << out << "\n";
    return 0;
}

int cmd_hard_subset(const std::vector<std::string>& model_runs, const std::string& apply_to,
                    const std::string& out) {
    std::vector<s2vs::EvalRun> runs;
    for (const auto& p : model_runs) runs.push_back(s2vs::read_run(p));
    s2vs::HardSubset hs = s2vs::build_hard_subset(runs);
    s2vs::EvalRun base = apply_to.empty() ? runs[0] : s2vs::read_run(apply_to);
    s2vs::EvalRun filtered = s2vs::filter_run(base, hs);
    s2vs::write_run(out, filtered);
    std::cout << "removed " << hs.removal_count() << " easy positives; filtered run written to "
              << out << "\n";
    return 0;
}

int cmd_dump_simmatrix(const std::string& ckpt, const std::string& a, const std::string& b,
                       bool reverse_b, const std::string& out_prefix) {
    s2vs::Backbone backbone = s2vs::make_toy_backbone();
    s2vs::Checkpoint ck = s2vs::load_checkpoint(ckpt, backbone);
    s2vs::FrameSequence va = s2vs::load_video(a);
    s2vs::FrameSequence vb = b.empty() ? va : s2vs::load_video(b);
    if (reverse_b) std::reverse(vb.frames.begin(), vb.frames.end());
    s2vs::RegionFeatureMap fa = backbone.extract(va.frames), fb = backbone.extract(vb.frames);
    s2vs::PairSimilarity ps = s2vs::dump_similarity_matrix(ck.model, fa, fb, out_prefix);
    std::cout.precision(10);
    std::cout << "similarity " << (ps.video_sim + 1.0) / 2.0 << "; matrices written to "
              << out_prefix << "_{raw,filtered}.{csv,pgm}\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"video-to-video similarity: training, scoring, and evaluation"};
    app.require_subcommand(1);
    app.footer("config keys: " + s2vs::config_key_help());

    std::string config_path, corpus_dir, out, ckpt, a_path, b_path, run_path, resume_path;
    std::string queries_dir, background_dir, apply_to;
    std::vector<std::string> model_runs;
    uint64_t seed = 0;
    bool have_seed = false, per_query = false, reverse_b = false;
    int k = 10;
    s2vs::CorpusSpec corpus_spec;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
            have_seed = true;
        });
    };

    auto* mk = app.add_subcommand("make-synthetic", "generate a synthetic video corpus");
    mk->add_option("--out", out, "output corpus directory")->required();
    mk->add_option("--num-videos", corpus_spec.num_videos, "number of videos");
    mk->add_option("--duration-min", corpus_spec.duration_min, "minimum frames per video");
    mk->add_option("--duration-max", corpus_spec.duration_max, "maximum frames per video");
    mk->add_option("--motifs", corpus_spec.motif_count, "shared motif count");
    mk->add_option("--seed", corpus_spec.seed, "corpus seed");

    auto* ex = app.add_subcommand("extract", "extract region features with the toy backbone");
    ex->add_option("--in", corpus_dir, "corpus directory (with manifest.tsv) or one video directory")
        ->required();
    ex->add_option("--out", out, "output directory (corpus) or feature file (single video)")
        ->required();

    auto* tr = app.add_subcommand("train", "train attention and the temporal CNN");
    tr->add_option("--config", config_path, "run config file");
    tr->add_option("--corpus", corpus_dir, "training corpus directory")->required();
    tr->add_option("--out", out, "output directory for checkpoint and log")->required();
    tr->add_option("--resume", resume_path, "checkpoint to resume from");
    add_seed(tr);

    auto* sc = app.add_subcommand("score", "score one video pair, printing a [0,1] similarity");
    sc->add_option("--ckpt", ckpt, "checkpoint file")->required();
    sc->add_option("--a", a_path, "query video directory")->required();
    sc->add_option("--b", b_path, "candidate video directory")->required();

    auto* ev = app.add_subcommand("evaluate", "compute mAP and uAP for a scored run");
    ev->add_option("--run", run_path, "run CSV (query_id,candidate_id,similarity,relevant)")
        ->required();
    ev->add_option("--ckpt", ckpt, "checkpoint file (accepted for symmetry; metrics use the run)");
    ev->add_flag("--per-query", per_query, "also print per-query AP rows");

    auto* no = app.add_subcommand("normalize", "subtract per-query background bias from a run");
    no->add_option("--run", run_path, "run CSV to normalize")->required();
    no->add_option("--ckpt", ckpt, "checkpoint file")->required();
    no->add_option("--queries", queries_dir, "corpus or video directory with the query videos")
        ->required();
    no->add_option("--background", background_dir, "corpus or video directory with background videos")
        ->required();
    no->add_option("--k", k, "background neighbor count");
    no->add_option("--out", out, "output run CSV")->required();

    auto* hs = app.add_subcommand("hard-subset", "drop positives every model ranks above all negatives");
    hs->add_option("--models", model_runs, "run CSVs, one per model")->required()->delimiter(',');
    hs->add_option("--run", apply_to, "run to filter (default: first of --models)");
    hs->add_option("--out", out, "output run CSV")->required();

    auto* dm = app.add_subcommand("dump-simmatrix", "write raw and filtered similarity matrices");
    dm->add_option("--ckpt", ckpt, "checkpoint file")->required();
    dm->add_option("--a", a_path, "first video directory")->required();
    dm->add_option("--b", b_path, "second video directory (default: same as --a)");
    dm->add_flag("--reverse-b", reverse_b, "reverse the second video's frames");
    dm->add_option("--out", out, "output path prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (mk->parsed()) return cmd_make_synthetic(out, corpus_spec);
        if (ex->parsed()) return cmd_extract(corpus_dir, out);
        if (tr->parsed())
            return cmd_train(load_cfg_or_default(config_path, have_seed ? &seed : nullptr),
                             corpus_dir, out, resume_path);
        if (sc->parsed()) return cmd_score(ckpt, a_path, b_path);
        if (ev->parsed()) return cmd_evaluate(run_path, per_query);
        if (no->parsed()) return cmd_normalize(run_path, ckpt, queries_dir, background_dir, k, out);
        if (hs->parsed()) return cmd_hard_subset(model_runs, apply_to, out);
        if (dm->parsed()) return cmd_dump_simmatrix(ckpt, a_path, b_path, reverse_b, out);
    } catch (const s2vs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
