#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "log.hpp"
#include "slideflow/bench.hpp"
#include "slideflow/errors.hpp"
#include "slideflow/eval.hpp"
#include "slideflow/hash.hpp"

namespace fs = std::filesystem;

namespace slideflow::cli {

namespace {

// Replicate r != 0 gets a hash-mixed seed so adjacent global seeds do not
// alias; replicate 0 keeps the global seed verbatim. A manifest seed can be
// re-fed as `seed` with synth.replicates=1 to regenerate one slide, together
// with synth.map_seed set to the cohort's global seed (replicates share one
// gene program; see cmd_synth).
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t r) {
    if (r == 0) return seed;
    std::uint64_t bytes[2] = {seed, r};
    return fnv1a64(bytes, sizeof bytes);
}

void preflight(const RunConfig& rc) {
    if (rc.threads == 0) throw UsageError("threads must be >= 1");
    if (rc.threads > 1)
        log_warn("single-threaded build: --threads " + std::to_string(rc.threads) +
                 " still runs on one thread");
}

void require_path(const std::string& value, const char* what) {
    if (value.empty()) throw UsageError(std::string(what) + " is required");
}

fs::path prepare_out_dir(const RunConfig& rc) {
    require_path(rc.out, "--out (or io.out)");
    fs::path dir(rc.out);
    fs::create_directories(dir);
    return dir;
}

std::vector<SlideData> load_slides_dir(const std::string& dir, const char* cmd) {
    if (dir.empty()) throw UsageError(std::string(cmd) + ": io.data_dir is required");
    if (!fs::is_directory(dir))
        throw DataError(std::string(cmd) + ": '" + dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".slb1")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());  // directory order is not deterministic
    if (files.empty()) throw DataError(std::string(cmd) + ": no .slb1 slides in '" + dir + "'");
    std::vector<SlideData> slides;
    slides.reserve(files.size());
    for (const auto& f : files) slides.push_back(load_slide(f.string()));
    return slides;
}

// Genes come from the checkpoint; reuse the slide's names only when they can
// still mean the same thing.
std::vector<std::string> prediction_gene_names(const SlideData& slide, std::size_t genes) {
    if (slide.genes() == genes) return slide.gene_names;
    log_warn("predict: slide has " + std::to_string(slide.genes()) + " genes but the model has " +
             std::to_string(genes) + "; emitting placeholder gene names");
    std::vector<std::string> names(genes);
    char buf[32];
    for (std::size_t g = 0; g < genes; ++g) {
        std::snprintf(buf, sizeof buf, "g%04zu", g);
        names[g] = buf;
    }
    return names;
}

}  // namespace

void cmd_synth(RunConfig rc) {
    preflight(rc);
    rc.finalize();
    if (rc.replicates == 0) throw UsageError("synth.replicates must be >= 1");
    require_path(rc.out, "--out (or io.out)");

    fs::path dir(rc.out);
    if (fs::exists(dir) && !fs::is_empty(dir) && !rc.force)
        throw DataError("synth: output directory '" + rc.out +
                        "' is not empty (pass --force to overwrite)");
    fs::create_directories(dir);
    write_effective_config(rc, "synth", (dir / "effective_config.cfg").string());

    std::ofstream manifest(dir / "manifest.tsv", std::ios::trunc);
    if (!manifest) throw DataError("synth: cannot open manifest for writing");
    manifest << "replicate\tid\tseed\tspots\tgenes\tfile\n";
    for (std::size_t r = 0; r < rc.replicates; ++r) {
        SynthConfig sc = rc.synth;
        sc.seed = replicate_seed(rc.seed, r);
        // Replicates model sections of one tissue: same gene program, fresh
        // coordinates, features, and noise.
        if (sc.map_seed == 0) sc.map_seed = rc.seed;
        SlideData slide = synth_slide(sc);
        char name[32];
        std::snprintf(name, sizeof name, "slide_%04zu.slb1", r);
        save_slide(slide, (dir / name).string());
        manifest << r << '\t' << slide.id << '\t' << sc.seed << '\t' << slide.spots() << '\t'
                 << slide.genes() << '\t' << name << '\n';
        log_info("synth: wrote " + std::string(name) + " (" + std::to_string(slide.spots()) +
                 " spots, " + std::to_string(slide.genes()) + " genes)");
    }
    if (!manifest) throw DataError("synth: manifest write failed");
}

void cmd_train(RunConfig rc) {
    preflight(rc);
    rc.finalize();
    std::vector<SlideData> slides = load_slides_dir(rc.data_dir, "train");
    if (rc.val_count >= slides.size())
        throw UsageError("train.val_count = " + std::to_string(rc.val_count) + " leaves no training slides (found " +
                         std::to_string(slides.size()) + ")");

    if (rc.denoiser.genes == 0) rc.denoiser.genes = slides[0].genes();
    if (rc.denoiser.feature_dim == 0) rc.denoiser.feature_dim = slides[0].feature_dim();

    fs::path dir = prepare_out_dir(rc);
    write_effective_config(rc, "train", (dir / "effective_config.cfg").string());

    std::vector<SlideData> train_set(slides.begin(), slides.end() - rc.val_count);
    std::vector<SlideData> val_set(slides.end() - rc.val_count, slides.end());

    RngStream init_rng(rc.seed);
    DenoiserModel model = DenoiserModel::init(rc.denoiser, init_rng);
    log_info("train: " + std::to_string(train_set.size()) + " train / " +
             std::to_string(val_set.size()) + " val slides, " +
             std::to_string(model.param_count()) + " parameters");

    auto [best, report] = fit(train_set, val_set, std::move(model), rc.flow);
    save_checkpoint(best, (dir / "checkpoint.sfck").string());
    write_train_report(report, (dir / "train_report.csv").string());
    log_info("train: best epoch " + std::to_string(report.best_epoch) + ", val Pearson " +
             std::to_string(report.val_pearson[report.best_epoch]));
}

void cmd_predict(RunConfig rc) {
    preflight(rc);
    rc.finalize();
    require_path(rc.checkpoint, "io.checkpoint");
    require_path(rc.slide, "io.slide");

    DenoiserModel model = load_checkpoint(rc.checkpoint);
    SlideData slide = load_slide(rc.slide);
    if (model.config.feature_dim != slide.feature_dim())
        throw ShapeError("predict: checkpoint expects feature_dim=" +
                         std::to_string(model.config.feature_dim) + " but slide '" + slide.id +
                         "' has feature_dim=" + std::to_string(slide.feature_dim()));

    fs::path dir = prepare_out_dir(rc);
    write_effective_config(rc, "predict", (dir / "effective_config.cfg").string());

    RngStream rng(rc.seed);
    Tensor2 pred = sample(slide.coords, slide.features, model, rc.flow, rng);

    SlideData out;
    out.id = slide.id + "_pred";
    out.coords = slide.coords;
    out.features = slide.features;
    out.expression = std::move(pred);
    out.gene_names = prediction_gene_names(slide, model.config.genes);
    out.normalized = rc.flow.log1p_targets;  // predictions live in target space

    if (rc.predict_format == "csv") {
        slide_to_csv(out, (dir / "predictions.csv").string());
    } else {
        save_slide(out, (dir / "predictions.slb1").string());
    }
    log_info("predict: wrote predictions for " + std::to_string(out.spots()) + " spots x " +
             std::to_string(out.genes()) + " genes (S=" + std::to_string(rc.flow.steps) +
             ", prior=" + to_string(rc.flow.prior.kind) + ")");
}

void cmd_eval(RunConfig rc) {
    preflight(rc);
    rc.finalize();
    require_path(rc.truth, "io.truth");
    require_path(rc.predictions, "io.predictions");
    if (rc.hvg_count == 0) throw UsageError("eval.hvg must be >= 1");

    SlideData truth = load_slide(rc.truth);
    SlideData pred = load_slide(rc.predictions);
    if (pred.spots() != truth.spots())
        throw ShapeError("eval: predictions have " + std::to_string(pred.spots()) +
                         " spots but truth has " + std::to_string(truth.spots()));
    if (pred.gene_names != truth.gene_names) {
        std::size_t i = 0;
        while (i < pred.gene_names.size() && i < truth.gene_names.size() &&
               pred.gene_names[i] == truth.gene_names[i])
            ++i;
        std::string at = i < pred.gene_names.size() && i < truth.gene_names.size()
                             ? "'" + pred.gene_names[i] + "' vs '" + truth.gene_names[i] + "'"
                             : "gene counts " + std::to_string(pred.genes()) + " vs " +
                                   std::to_string(truth.genes());
        throw DataError("eval: gene names disagree at index " + std::to_string(i) + ": " + at);
    }

    // Protocol: highly variable genes are chosen on log1p-normalized truth.
    if (!truth.normalized) log1p_normalize(truth);
    if (!pred.normalized) log1p_normalize(pred);
    std::vector<std::size_t> hvg = select_hvg(truth.expression, std::min(rc.hvg_count, truth.genes()));

    EvalReport rep = evaluate(pred.expression, truth.expression, hvg);
    rep.gene_names.reserve(hvg.size());
    for (std::size_t g : hvg) rep.gene_names.push_back(truth.gene_names[g]);

    fs::path dir = prepare_out_dir(rc);
    write_effective_config(rc, "eval", (dir / "effective_config.cfg").string());
    write_eval_csv(rep, (dir / "eval.csv").string());

    char line[64];
    std::snprintf(line, sizeof line, "mean_r %.10g\n", rep.mean_r);
    std::fputs(line, stdout);
    log_info("eval: mean Pearson " + std::to_string(rep.mean_r) + " over " +
             std::to_string(hvg.size()) + " genes");
}

void cmd_ablate(RunConfig rc) {
    preflight(rc);
    rc.finalize();
    require_path(rc.checkpoint, "io.checkpoint");
    DenoiserModel model = load_checkpoint(rc.checkpoint);
    std::vector<SlideData> slides = load_slides_dir(rc.data_dir, "ablate");
    if (rc.hvg_count == 0) throw UsageError("eval.hvg must be >= 1");

    for (const SlideData& s : slides) {
        if (s.feature_dim() != model.config.feature_dim || s.genes() != model.config.genes)
            throw ShapeError("ablate: slide '" + s.id + "' (feature_dim=" +
                             std::to_string(s.feature_dim()) + ", genes=" +
                             std::to_string(s.genes()) + ") does not match checkpoint (feature_dim=" +
                             std::to_string(model.config.feature_dim) + ", genes=" +
                             std::to_string(model.config.genes) + ")");
    }

    fs::path dir = prepare_out_dir(rc);
    write_effective_config(rc, "ablate", (dir / "effective_config.cfg").string());

    // Ground truth in evaluation space plus per-slide HVG, computed once.
    std::vector<Tensor2> truth;
    std::vector<std::vector<std::size_t>> hvg;
    for (const SlideData& s : slides) {
        SlideData t = s;
        if (!t.normalized) log1p_normalize(t);
        hvg.push_back(select_hvg(t.expression, std::min(rc.hvg_count, t.genes())));
        truth.push_back(std::move(t.expression));
    }

    std::ofstream csv(dir / "ablation.csv", std::ios::trunc);
    if (!csv) throw DataError("ablate: cannot open ablation.csv for writing");
    csv << "steps,prior,mean_r\n";
    char num[32];
    for (PriorKind prior : rc.ablate_priors) {
        for (std::size_t steps : rc.ablate_steps) {
            FlowConfig fc = rc.flow;
            fc.steps = steps;
            fc.prior.kind = prior;
            double acc = 0.0;
            for (std::size_t i = 0; i < slides.size(); ++i) {
                // Same per-slide seed in every arm: shared data, shared draw.
                RngStream rng(replicate_seed(rc.seed, i));
                Tensor2 pred = sample(slides[i].coords, slides[i].features, model, fc, rng);
                acc += evaluate(pred, truth[i], hvg[i]).mean_r;
            }
            double mean_r = acc / static_cast<double>(slides.size());
            std::snprintf(num, sizeof num, "%.10g", mean_r);
            csv << steps << ',' << to_string(prior) << ',' << num << '\n';
            log_info("ablate: S=" + std::to_string(steps) + " prior=" + to_string(prior) +
                     " mean_r=" + std::to_string(mean_r));
        }
    }
    if (!csv) throw DataError("ablate: write failed for ablation.csv");
}

void cmd_bench(RunConfig rc) {
    preflight(rc);
    rc.finalize();
    if (rc.bench_repeats == 0) throw UsageError("bench.repeats must be >= 1");
    // Bench does not read data; unset dims fall back to the synth defaults.
    if (rc.denoiser.genes == 0) rc.denoiser.genes = rc.synth.genes;
    if (rc.denoiser.feature_dim == 0) rc.denoiser.feature_dim = rc.synth.feature_dim;

    fs::path dir = prepare_out_dir(rc);
    write_effective_config(rc, "bench", (dir / "effective_config.cfg").string());

    RngStream rng(rc.seed);
    DenoiserModel model = DenoiserModel::init(rc.denoiser, rng);
    std::vector<BenchRow> rows = scaling_benchmark(model, rc.bench_spots, rc.bench_repeats, rc.flow);
    write_bench_csv(rows, (dir / "bench.csv").string());
    write_bench_svg(rows, (dir / "bench.svg").string());
    for (const BenchRow& r : rows)
        log_info("bench: N=" + std::to_string(r.spots) + " median " +
                 std::to_string(r.median_seconds) + " s, peak " +
                 std::to_string(r.peak_bytes / (1024 * 1024)) + " MiB");
}

}  // namespace slideflow::cli
