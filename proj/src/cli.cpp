#include "mdsum/cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "mdsum/checkpoint.hpp"
#include "mdsum/config.hpp"
#include "mdsum/corpus.hpp"
#include "mdsum/extractive.hpp"
#include "mdsum/metrics.hpp"
#include "mdsum/parallel.hpp"
#include "mdsum/training.hpp"

namespace mdsum {

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
    std::string config_file;
    std::vector<std::string> overrides;
    std::string corpus_dir;
    std::string checkpoint;
    std::string out_dir;
    std::string split;
    std::string pipeline;
    std::string summaries_dir;
};

RunConfig resolve_config(const CommonOpts& opts) {
    RunConfig rc;
    if (!opts.config_file.empty())
        rc.load_file(opts.config_file);
    for (const std::string& o : opts.overrides)
        rc.set(o);
    if (!opts.corpus_dir.empty())
        rc.set("corpus.root=" + opts.corpus_dir);
    if (!opts.split.empty())
        rc.set("corpus.split=" + opts.split);
    return rc;
}

Corpus load_corpus(const RunConfig& rc) {
    const std::string& root = rc.get("corpus.root");
    if (root.empty())
        throw ConfigError("no corpus directory given (corpus.root or --corpus)");
    return preprocess_corpus(ingest_corpus(root));
}

std::string sentence_line(const Sentence& s) {
    std::string line;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        if (i > 0)
            line.push_back(' ');
        line += s.tokens[i].surface;
    }
    return line;
}

void write_summary_file(const fs::path& path, const std::vector<Sentence>& sentences) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write summary file: " + path.string());
    for (const Sentence& s : sentences)
        out << sentence_line(s) << '\n';
}

std::vector<TokenList> read_summary_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("missing summary file: " + path.string());
    std::vector<TokenList> sentences;
    std::string line;
    while (std::getline(in, line)) {
        // one sentence per line; re-mask digits so restored summaries compare
        // in the same space as the preprocessed corpus
        const std::vector<Token> toks = mask_digits(tokenize(line));
        if (toks.empty())
            continue;
        TokenList surfaces_only;
        for (const Token& t : toks)
            surfaces_only.push_back(t.surface);
        sentences.push_back(std::move(surfaces_only));
    }
    return sentences;
}

std::vector<Sentence> all_source_sentences(const DocumentSet& set) {
    std::vector<Sentence> out;
    for (const Document& doc : set.documents)
        for (const Sentence& s : doc.sentences)
            out.push_back(s);
    return out;
}

MethodScores score_one_set(const DocumentSet& set, const std::vector<TokenList>& summary) {
    MethodScores scores;
    TokenList candidate;
    for (const TokenList& s : summary)
        candidate.insert(candidate.end(), s.begin(), s.end());
    std::vector<TokenList> refs;
    for (const auto& ref : set.references) {
        TokenList r;
        for (const Sentence& s : ref)
            for (const Token& t : s.tokens)
                r.push_back(t.surface);
        refs.push_back(std::move(r));
    }
    scores.r1 = rouge_n(candidate, refs, 1);
    scores.r2 = rouge_n(candidate, refs, 2);
    scores.su4 = rouge_su4(candidate, refs);

    std::vector<TokenList> sources;
    for (const Document& doc : set.documents)
        for (const Sentence& s : doc.sentences)
            sources.push_back(surfaces(s));
    const EditDistanceReport ed = edit_distance_report(summary, sources);
    scores.ed = ed.ed;
    scores.ed_w = ed.ed_per_word;
    return scores;
}

EvalReport evaluate_method(
    const std::string& label, const std::vector<DocumentSet>& sets,
    const std::function<std::vector<TokenList>(const DocumentSet&)>& summary_of) {
    EvalReport report;
    report.method = label;
    for (const DocumentSet& set : sets) {
        if (set.references.empty())
            throw DataError("document set '" + set.id + "' has no reference summaries");
        SetScore ss;
        ss.set_id = set.id;
        ss.scores = score_one_set(set, summary_of(set));
        report.per_set.push_back(std::move(ss));
    }
    report.finalize();
    return report;
}

/// Generates summaries for every set of the split with one pipeline and
/// writes them under out_dir/<pipeline-label>/.
void summarize_split(const PipelineSpec& spec, const std::string& label,
                     const std::vector<DocumentSet>& sets, const Model* model,
                     const Vocabulary& vocab, const RunConfig& rc, const fs::path& out_root,
                     const AttentionConfig& attn_cfg, DocsetWeightMode docset_mode) {
    const fs::path dir = out_root / label;
    fs::create_directories(dir);
    rc.write_echo(dir);
    const GenerationConfig gen_cfg = rc.generation();
    std::vector<std::vector<Sentence>> results(sets.size());
    parallel_for(sets.size(), rc.workers(), [&](std::size_t i) {
        const SummaryResult res =
            run_pipeline(spec, sets[i], model, vocab, attn_cfg, gen_cfg, docset_mode);
        results[i] = restore_digits(res.sentences, all_source_sentences(sets[i]));
    });
    for (std::size_t i = 0; i < sets.size(); ++i)
        write_summary_file(dir / (sets[i].id + ".sum.txt"), results[i]);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write: " + path.string());
    out << text;
}

std::string render_per_set(const EvalReport& report) {
    std::ostringstream out;
    char line[256];
    out << "# " << report.method << " per-set scores\n";
    for (const SetScore& s : report.per_set) {
        std::snprintf(line, sizeof(line), "%-16s %8.2f %8.2f %8.2f %8.2f %8.2f\n",
                      s.set_id.c_str(), 100.0 * s.scores.r1.f1, 100.0 * s.scores.r2.f1,
                      100.0 * s.scores.su4.f1, s.scores.ed, s.scores.ed_w);
        out << line;
    }
    return out.str();
}

// ---- subcommands ------------------------------------------------------------

int cmd_ingest(const CommonOpts& opts) {
    const RunConfig rc = resolve_config(opts);
    const Corpus corpus = load_corpus(rc);
    for (const auto& [split, sets] : corpus.splits) {
        std::size_t docs = 0;
        std::size_t sentences = 0;
        std::size_t tokens = 0;
        std::size_t refs = 0;
        for (const DocumentSet& set : sets) {
            docs += set.documents.size();
            refs += set.references.size();
            for (const Document& d : set.documents)
                for (const Sentence& s : d.sentences) {
                    ++sentences;
                    tokens += s.tokens.size();
                }
        }
        std::cout << split << ": " << sets.size() << " sets, " << docs << " documents, "
                  << sentences << " sentences, " << tokens << " tokens, " << refs
                  << " references\n";
    }
    return 0;
}

std::string train_report_text(const TrainReport& report) {
    std::ostringstream out;
    out << "epoch\ttrain_loss\tdev_metric\n";
    for (std::size_t i = 0; i < report.epoch_loss.size(); ++i) {
        out << (i + 1) << '\t' << report.epoch_loss[i] << '\t';
        if (i < report.dev_metric.size())
            out << report.dev_metric[i];
        else
            out << "-";
        out << '\n';
    }
    out << "stopping_epoch\t" << report.stopping_epoch << '\n';
    out << "best_epoch\t" << report.best_epoch << '\n';
    return out.str();
}

int cmd_train(const CommonOpts& opts) {
    const RunConfig rc = resolve_config(opts);
    if (opts.out_dir.empty())
        throw ConfigError("train requires --out");
    const Corpus corpus = load_corpus(rc);
    const Vocabulary vocab = build_vocabulary(corpus, rc.vocab_max_size(), rc.vocab_min_freq());
    ModelDims dims = rc.model_dims();
    dims.vocab = vocab.size();
    Model model(dims);
    const TrainConfig cfg = rc.train(TrainConfig::Mode::pretrain_sds);
    model.init_uniform(cfg.seed);
    const TrainReport report = pretrain_sds(model, vocab, corpus, cfg);

    const fs::path out = opts.out_dir;
    fs::create_directories(out);
    rc.write_echo(out);
    save_checkpoint(model, vocab, out / "checkpoint.json");
    write_text(out / "train_report.txt", train_report_text(report));
    std::cout << "trained " << report.stopping_epoch << " epochs, best epoch "
              << report.best_epoch << ", final train loss "
              << report.epoch_loss.back() << "\n";
    return 0;
}

int cmd_finetune(const CommonOpts& opts) {
    const RunConfig rc = resolve_config(opts);
    if (opts.checkpoint.empty())
        throw ConfigError("finetune requires --checkpoint");
    if (opts.out_dir.empty())
        throw ConfigError("finetune requires --out");
    LoadedCheckpoint loaded = load_checkpoint(opts.checkpoint);
    const Corpus corpus = load_corpus(rc);
    const TrainConfig cfg = rc.train(TrainConfig::Mode::finetune_mds);
    const TrainReport report = finetune_mds(loaded.model, loaded.vocab, corpus, cfg);

    const fs::path out = opts.out_dir;
    fs::create_directories(out);
    rc.write_echo(out);
    save_checkpoint(loaded.model, loaded.vocab, out / "checkpoint.json");
    write_text(out / "train_report.txt", train_report_text(report));
    std::cout << "fine-tuned " << report.stopping_epoch << " epochs, best epoch "
              << report.best_epoch << ", final train loss "
              << report.epoch_loss.back() << "\n";
    return 0;
}

int cmd_summarize(const CommonOpts& opts) {
    const RunConfig rc = resolve_config(opts);
    if (opts.pipeline.empty())
        throw ConfigError("summarize requires --pipeline");
    if (opts.out_dir.empty())
        throw ConfigError("summarize requires --out");
    PipelineSpec spec = parse_pipeline_name(opts.pipeline);
    spec.intermediate_budget = rc.intermediate_budget();
    spec.final_budget = rc.get_int("pipeline.final_budget");

    const Corpus corpus = load_corpus(rc);
    const auto& sets = corpus.split(rc.get("corpus.split"));

    std::unique_ptr<LoadedCheckpoint> loaded;
    Vocabulary fallback_vocab;
    const Model* model = nullptr;
    const Vocabulary* vocab = &fallback_vocab;
    if (!opts.checkpoint.empty()) {
        loaded = std::make_unique<LoadedCheckpoint>(load_checkpoint(opts.checkpoint));
        model = &loaded->model;
        vocab = &loaded->vocab;
    }
    summarize_split(spec, opts.pipeline, sets, model, *vocab, rc, opts.out_dir,
                    rc.attention(), rc.docset_mode());
    std::cout << "wrote " << sets.size() << " summaries under "
              << (fs::path(opts.out_dir) / opts.pipeline).string() << "\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& opts) {
    const RunConfig rc = resolve_config(opts);
    if (opts.summaries_dir.empty())
        throw ConfigError("evaluate requires --summaries");
    const Corpus corpus = load_corpus(rc);
    const auto& sets = corpus.split(rc.get("corpus.split"));

    std::vector<fs::path> method_dirs;
    for (const auto& entry : fs::directory_iterator(opts.summaries_dir))
        if (entry.is_directory())
            method_dirs.push_back(entry.path());
    std::sort(method_dirs.begin(), method_dirs.end());
    if (method_dirs.empty())
        throw DataError("no method directories under " + opts.summaries_dir);

    std::vector<EvalReport> reports;
    for (const fs::path& dir : method_dirs) {
        reports.push_back(evaluate_method(
            dir.filename().string(), sets, [&dir](const DocumentSet& set) {
                return read_summary_file(dir / (set.id + ".sum.txt"));
            }));
    }
    std::string text = render_report_table(reports);
    text += '\n';
    for (const EvalReport& r : reports)
        text += render_per_set(r);
    write_text(fs::path(opts.summaries_dir) / "report.txt", text);
    std::cout << render_report_table(reports);
    return 0;
}

int cmd_gradcheck(const CommonOpts& opts) {
    RunConfig rc = resolve_config(opts);
    // tiny synthetic fixture: 2 documents, 3 + 2 sentences, vocabulary of 10
    Vocabulary vocab;
    for (const char* w : {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"})
        vocab.add(w);
    Model model({vocab.size(), 4, 4});
    model.init_uniform(271828, 0.5);
    const std::vector<std::vector<std::vector<int>>> docs = {
        {{4, 5, 6}, {7, 8}, {9, 4}},
        {{5, 7}, {6, 9, 8}},
    };
    const std::vector<std::vector<int>> reference = {{4, 6}, {8, 5, 9}};
    AttentionConfig attn;
    attn.mode = AttentionConfig::Mode::raw;
    attn.damping = 0.9;

    model.zero_grads();
    teacher_forced_loss(model, docs, reference, attn, DocsetWeightMode::learned, vocab.eos_id(),
                        vocab.eod_id());
    const auto loss_fn = [&] {
        return teacher_forced_loss(model, docs, reference, attn, DocsetWeightMode::learned,
                                   vocab.eos_id(), vocab.eod_id(), 1.0, false)
            .loss;
    };
    const GradCheckReport report =
        finite_diff_gradcheck(loss_fn, model.parameters(), 1e-5, 1e-4);
    std::printf("checked %zu coordinates, max relative error %.3e (worst: %s[%zu])\n",
                report.coordinates_checked, report.max_rel_error, report.worst_param.c_str(),
                report.worst_index);
    std::printf("%s (tolerance %.1e)\n", report.passed() ? "PASS" : "FAIL", report.tolerance);
    return report.passed() ? 0 : 1;
}

int cmd_ablate(const CommonOpts& opts) {
    const RunConfig rc = resolve_config(opts);
    if (opts.checkpoint.empty())
        throw ConfigError("ablate requires --checkpoint");
    if (opts.out_dir.empty())
        throw ConfigError("ablate requires --out");
    const Corpus corpus = load_corpus(rc);
    const auto& sets = corpus.split(rc.get("corpus.split"));
    const LoadedCheckpoint base = load_checkpoint(opts.checkpoint);

    AttentionConfig raw_attn = rc.attention();
    raw_attn.mode = AttentionConfig::Mode::raw;
    AttentionConfig conc_attn = rc.attention();
    conc_attn.mode = AttentionConfig::Mode::concentrated;

    struct Variant {
        std::string label;
        std::string dir;
        AttentionConfig attn;
        DocsetWeightMode docset;
        bool tuned;
    };
    const std::vector<Variant> variants = {
        {"Model-1", "model-1", raw_attn, DocsetWeightMode::uniform, false},
        {"Model-2", "model-2", conc_attn, DocsetWeightMode::uniform, false},
        {"Model-3", "model-3", conc_attn, DocsetWeightMode::uniform, true},
        {"Our Model", "ours", conc_attn, DocsetWeightMode::learned, true},
    };

    PipelineSpec spec;
    spec.kind = PipelineSpec::Kind::full_ab;
    spec.final_budget = rc.get_int("pipeline.final_budget");

    std::vector<EvalReport> reports;
    for (const Variant& v : variants) {
        Model model = base.model;
        if (v.tuned) {
            TrainConfig cfg = rc.train(TrainConfig::Mode::finetune_mds);
            cfg.attention = v.attn;
            cfg.docset_mode = v.docset;
            finetune_mds(model, base.vocab, corpus, cfg);
        }
        summarize_split(spec, v.dir, sets, &model, base.vocab, rc, opts.out_dir, v.attn,
                        v.docset);
        const fs::path dir = fs::path(opts.out_dir) / v.dir;
        EvalReport rep = evaluate_method(v.label, sets, [&dir](const DocumentSet& set) {
            return read_summary_file(dir / (set.id + ".sum.txt"));
        });
        reports.push_back(std::move(rep));
    }
    const std::string table = render_report_table(reports);
    write_text(fs::path(opts.out_dir) / "ablate_report.txt", table);
    std::cout << table;
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"hierarchical abstractive multi-document summarization toolkit", "mdsum"};
    app.require_subcommand(1);
    CommonOpts opts;

    auto add_common = [&opts](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_file, "INI config file");
        cmd->add_option("--set", opts.overrides,
                        "override a config key, e.g. --set attention.k=5");
        cmd->add_option("--corpus", opts.corpus_dir, "corpus root directory");
        cmd->add_option("--split", opts.split, "corpus split to operate on");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "validate a corpus and print statistics");
    add_common(ingest);
    CLI::App* train = app.add_subcommand("train", "pre-train on single-document sets");
    add_common(train);
    train->add_option("--out", opts.out_dir, "output directory");
    CLI::App* finetune =
        app.add_subcommand("finetune", "selective fine-tuning on multi-document sets");
    add_common(finetune);
    finetune->add_option("--checkpoint", opts.checkpoint, "checkpoint to start from");
    finetune->add_option("--out", opts.out_dir, "output directory");
    CLI::App* summarize =
        app.add_subcommand("summarize", "write one summary per document set");
    add_common(summarize);
    summarize->add_option("--pipeline", opts.pipeline,
                          "pipeline name (ours, single-ab, lead+ab, lex+ab, text+ab, cent+ab, "
                          "ab+lead, ab+cov, ab+lex, ab+text, ab+cent, ab+ab, or a plain "
                          "extractive method)");
    summarize->add_option("--checkpoint", opts.checkpoint, "model checkpoint");
    summarize->add_option("--out", opts.out_dir, "output directory");
    CLI::App* evaluate = app.add_subcommand("evaluate", "score summary directories");
    add_common(evaluate);
    evaluate->add_option("--summaries", opts.summaries_dir,
                         "directory whose subdirectories hold per-method summaries");
    CLI::App* gradcheck = app.add_subcommand(
        "gradcheck", "finite-difference gradient check on a tiny model");
    add_common(gradcheck);
    CLI::App* ablate =
        app.add_subcommand("ablate", "run the Model-1/2/3/full configuration comparison");
    add_common(ablate);
    ablate->add_option("--checkpoint", opts.checkpoint, "base checkpoint");
    ablate->add_option("--out", opts.out_dir, "output directory");

    try {
        std::vector<const char*> argv;
        argv.push_back("mdsum");
        for (const std::string& a : args)
            argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (ingest->parsed())
            return cmd_ingest(opts);
        if (train->parsed())
            return cmd_train(opts);
        if (finetune->parsed())
            return cmd_finetune(opts);
        if (summarize->parsed())
            return cmd_summarize(opts);
        if (evaluate->parsed())
            return cmd_evaluate(opts);
        if (gradcheck->parsed())
            return cmd_gradcheck(opts);
        if (ablate->parsed())
            return cmd_ablate(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace mdsum
