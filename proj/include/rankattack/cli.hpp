#pragma once

// Command-line driver. Kept in a header so tests can run commands in-process;
// tools/rankattack.cpp is a thin main() around run_cli().

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankattack/backend.hpp"
#include "rankattack/blackbox.hpp"
#include "rankattack/corpus.hpp"
#include "rankattack/embedding.hpp"
#include "rankattack/error.hpp"
#include "rankattack/mlp.hpp"
#include "rankattack/ranking.hpp"
#include "rankattack/text.hpp"
#include "rankattack/whitebox.hpp"

namespace rankattack::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 2, kBackendOrIo = 3, kNumeric = 4 };

struct SharedOptions {
    std::string backend = "tfidf";
    std::string endpoint = "http://127.0.0.1:8080";
    std::uint64_t seed = 0;
    std::string stopwords;
    std::size_t jobs = 1;
    std::string out = "out";
    std::size_t dim = 256;
};

struct GenCorpusOptions {
    std::size_t n_resumes = 100;
    std::size_t n_jobs = 50;
    std::size_t skill_pool = 80;
    double overlap = 0.3;
};

struct RankOptions {
    std::string corpus;
    std::string job;
};

struct WhiteboxOptions {
    std::string corpus;
    std::string gram = "unigram";
    std::vector<std::size_t> budgets{1, 2, 5, 10, 20, 50};
    std::size_t shortlist = 50;
    std::vector<std::string> job_ids;
    std::size_t max_jobs = 0;
    std::size_t max_resumes = 0;
    double bin_width = 2.0;
};

struct BlackboxOptions {
    std::string corpus;
    std::string setting = "simple";
    std::string oracle;
    std::vector<std::string> rule_words{"python"};
    std::string job;
    std::size_t epochs = 100;
    std::size_t batch_size = 50;
    double lr = 0.001;
    double dropout = 0.1;
    std::vector<std::size_t> hidden{128, 64, 32};
    std::size_t vocab_size = 0;
    std::size_t top_k = 50;
    std::size_t label_top = 50;
    double threshold = 0.5;
    double test_fraction = 0.3;
    bool no_augment = false;
};

namespace detail {

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// argv without any --out value, so a manifest can be replayed elsewhere.
inline std::vector<std::string> strip_out(const std::vector<std::string>& args) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out") {
            ++i;
            continue;
        }
        if (args[i].rfind("--out=", 0) == 0) continue;
        kept.push_back(args[i]);
    }
    return kept;
}

template <typename Fn>
void write_file(const fs::path& p, Fn&& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    body(out);
    if (!out) throw IoError("cannot write " + p.string());
}

inline void prepare_out(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

class Context {
public:
    Context(const SharedOptions& shared, std::vector<std::string> args, std::ostream& out)
        : shared_(shared), args_(std::move(args)), out_(out) {
        stopwords_ = shared.stopwords.empty() ? default_stopwords() : load_stopwords(shared.stopwords);
    }

    const SharedOptions& shared() const { return shared_; }
    const StopwordSet& stopwords() const { return stopwords_; }
    std::ostream& out() { return out_; }
    std::size_t threads() const { return std::max<std::size_t>(1, shared_.jobs); }
    fs::path out_dir() const { return shared_.out; }

    std::shared_ptr<const Embedder> backend(std::span<const Document> fit_corpus) const {
        BackendOptions opt;
        opt.kind = parse_backend_kind(shared_.backend);
        opt.hashed_dim = shared_.dim;
        opt.hashed_seed = derive_seed(shared_.seed, "hash");
        opt.endpoint = shared_.endpoint;
        return make_backend(opt, fit_corpus, stopwords_);
    }

    /// Written before the experiment runs.
    void write_manifest(const std::string& command, const json& config, const std::string& corpus_source,
                        const json& backend, const std::vector<std::string>& outputs) const {
        json m = {{"command", command},
                  {"args", strip_out(args_)},
                  {"config", config},
                  {"corpus_source", corpus_source},
                  {"backend", backend},
                  {"seed", shared_.seed},
                  {"timestamp", utc_timestamp()},
                  {"outputs", outputs}};
        write_file(out_dir() / "manifest.json", [&](std::ostream& o) { o << m.dump(2) << '\n'; });
    }

private:
    SharedOptions shared_;
    std::vector<std::string> args_;
    std::ostream& out_;
    StopwordSet stopwords_;
};

inline json shared_json(const SharedOptions& s) {
    return {{"backend", s.backend}, {"endpoint", s.endpoint}, {"seed", s.seed},
            {"stopwords", s.stopwords}, {"jobs", s.jobs}, {"dim", s.dim}};
}

// ---------------------------------------------------------------------------

inline int cmd_gen_corpus(Context& ctx, const GenCorpusOptions& o) {
    const fs::path dir = ctx.out_dir();
    try {
        prepare_out(dir);
    } catch (const IoError& e) {
        throw ArgumentError(e.what());
    }
    SyntheticConfig cfg{ctx.shared().seed, o.n_resumes, o.n_jobs, o.skill_pool, o.overlap};
    json config = shared_json(ctx.shared());
    config["n_resumes"] = o.n_resumes;
    config["n_jobs"] = o.n_jobs;
    config["skill_pool"] = o.skill_pool;
    config["overlap"] = o.overlap;
    ctx.write_manifest("gen-corpus", config, "synthetic(" + std::to_string(cfg.seed) + ")", json(nullptr),
                       {"resumes/", "jobs/"});
    const auto corpus = generate_synthetic(cfg);
    write_corpus(corpus, dir);
    ctx.out() << "wrote " << corpus.resumes.size() << " resumes and " << corpus.jobs.size() << " jobs to "
              << dir.string() << '\n';
    return kOk;
}

inline int cmd_stats(Context& ctx, const std::string& corpus_dir, bool write_out) {
    const auto corpus = load_corpus(corpus_dir);
    const auto stats = to_json(corpus_stats(corpus));
    if (write_out) {
        prepare_out(ctx.out_dir());
        json config = shared_json(ctx.shared());
        config["corpus"] = corpus_dir;
        ctx.write_manifest("stats", config, corpus.source, json(nullptr), {"stats.json"});
        write_file(ctx.out_dir() / "stats.json", [&](std::ostream& o) { o << stats.dump(2) << '\n'; });
    }
    ctx.out() << stats.dump(2) << '\n';
    return kOk;
}

inline int cmd_rank(Context& ctx, const RankOptions& o) {
    const auto corpus = load_corpus(o.corpus);
    const auto& job = corpus.job(o.job);
    prepare_out(ctx.out_dir());
    const auto all = corpus.all();
    const auto backend = ctx.backend(all);
    json config = shared_json(ctx.shared());
    config["corpus"] = o.corpus;
    config["job"] = o.job;
    ctx.write_manifest("rank", config, corpus.source, to_json(backend->descriptor()), {"ranked.csv", "ranked.json"});

    const auto ranked = rank(job, corpus.resumes, *backend, ctx.threads());
    write_file(ctx.out_dir() / "ranked.csv", [&](std::ostream& os) { write_ranked_csv(os, ranked); });
    write_file(ctx.out_dir() / "ranked.json", [&](std::ostream& os) { os << to_json(ranked).dump(2) << '\n'; });
    ctx.out() << "rank  doc_id  score\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(10, ranked.entries.size()); ++i) {
        ctx.out() << (i + 1) << "  " << ranked.entries[i].doc_id << "  " << format_score(ranked.entries[i].score)
                  << '\n';
    }
    return kOk;
}

inline int cmd_attack_whitebox(Context& ctx, const WhiteboxOptions& o) {
    const auto corpus = load_corpus(o.corpus);
    AttackConfig cfg;
    cfg.gram = parse_gram(o.gram);
    cfg.budgets = o.budgets;
    cfg.shortlist = o.shortlist;
    cfg.validate();

    std::vector<Document> jobs;
    if (o.job_ids.empty()) {
        jobs = corpus.jobs;
    } else {
        for (const auto& id : o.job_ids) jobs.push_back(corpus.job(id));
    }
    if (o.max_jobs && jobs.size() > o.max_jobs) jobs.resize(o.max_jobs);
    auto resumes = corpus.resumes;
    if (o.max_resumes && resumes.size() > o.max_resumes) resumes.resize(o.max_resumes);
    if (resumes.size() < 2) throw ArgumentError("attack-whitebox needs at least 2 resumes");

    prepare_out(ctx.out_dir());
    const auto backend = ctx.backend(corpus.all());
    json config = shared_json(ctx.shared());
    config["corpus"] = o.corpus;
    config["gram"] = to_string(cfg.gram);
    config["budgets"] = cfg.budgets;
    config["shortlist"] = cfg.shortlist;
    config["job_ids"] = o.job_ids;
    config["max_jobs"] = o.max_jobs;
    config["max_resumes"] = o.max_resumes;
    config["bin_width"] = o.bin_width;
    ctx.write_manifest("attack-whitebox", config, corpus.source, to_json(backend->descriptor()),
                       {"reports.csv", "summary.json"});

    const auto reports = phase3_attack(jobs, resumes, cfg, *backend, ctx.stopwords(), ctx.threads());
    const auto summary = aggregate(reports, o.bin_width);
    write_file(ctx.out_dir() / "reports.csv", [&](std::ostream& os) { write_reports_csv(os, reports); });
    write_file(ctx.out_dir() / "summary.json", [&](std::ostream& os) { os << to_json(summary).dump(2) << '\n'; });
    for (const auto& g : summary.groups) {
        ctx.out() << to_string(g.gram) << " budget " << g.budget << ": mean rank change "
                  << format_score(g.mean_rank_change) << " over " << g.count << " experiments\n";
    }
    return kOk;
}

inline ExperimentConfig experiment_config(const SharedOptions& s, const BlackboxOptions& o) {
    ExperimentConfig cfg;
    cfg.train.epochs = o.epochs;
    cfg.train.batch_size = o.batch_size;
    cfg.train.learning_rate = o.lr;
    cfg.train.seed = derive_seed(s.seed, "train");
    cfg.hidden = o.hidden;
    cfg.dropout_rate = o.dropout;
    cfg.threshold = o.threshold;
    cfg.top_k = o.top_k;
    cfg.test_fraction = o.test_fraction;
    return cfg;
}

inline json final_metrics(const std::vector<EpochMetrics>& metrics) {
    json out = json::object();
    for (const auto& m : metrics) {
        if (m.epoch == metrics.back().epoch)
            out[m.split] = {{"loss", m.loss}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    }
    return out;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + path + ": " + e.what());
    }
}

inline int cmd_attack_blackbox(Context& ctx, const BlackboxOptions& o) {
    if (o.setting != "simple" && o.setting != "complex") throw ArgumentError("--setting must be simple or complex");
    if (o.hidden.size() != 3) throw ArgumentError("--hidden needs exactly three widths");
    const auto corpus = load_corpus(o.corpus);
    const auto cfg = experiment_config(ctx.shared(), o);
    const std::optional<json> oracle_json = o.oracle.empty() ? std::nullopt : std::optional(read_json_file(o.oracle));
    prepare_out(ctx.out_dir());

    json config = shared_json(ctx.shared());
    config["corpus"] = o.corpus;
    config["setting"] = o.setting;
    config["oracle"] = oracle_json.value_or(json(nullptr));
    config["rule_words"] = o.rule_words;
    config["epochs"] = o.epochs;
    config["batch_size"] = o.batch_size;
    config["learning_rate"] = o.lr;
    config["dropout"] = o.dropout;
    config["hidden"] = o.hidden;
    config["top_k"] = o.top_k;
    config["label_top"] = o.label_top;
    config["threshold"] = o.threshold;
    config["test_fraction"] = o.test_fraction;
    config["augment"] = !o.no_augment;

    if (o.setting == "simple") {
        const auto oracle = oracle_json ? rule_oracle_from_json(*oracle_json) : RuleOracle(o.rule_words);
        const std::size_t vocab = o.vocab_size ? o.vocab_size : 20;
        config["vocab_size"] = vocab;
        ctx.write_manifest("attack-blackbox", config, corpus.source, json(nullptr),
                           {"dataset.jsonl", "metrics.csv", "model.json", "binary_rows.csv", "report.json"});

        const auto ds = build_simple_dataset(corpus.resumes, corpus.jobs, oracle, ctx.stopwords(), vocab);
        write_file(ctx.out_dir() / "dataset.jsonl", [&](std::ostream& os) { write_groundtruth_jsonl(os, ds); });
        const auto trained = train_surrogate(ds, cfg);
        save_mlp(trained.model, (ctx.out_dir() / "model.json").string());
        write_file(ctx.out_dir() / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, trained.metrics); });
        const auto res = run_binary_experiment(ds, oracle, trained.model, trained.split.test_rows, cfg);
        write_file(ctx.out_dir() / "binary_rows.csv", [&](std::ostream& os) {
            os << "id,accepted_before,accepted_after,inserted\n";
            for (std::size_t t = 0; t < trained.split.test_rows.size(); ++t) {
                const auto r = trained.split.test_rows[t];
                const auto& subject = ds.subjects[r];
                os << csv_field(ds.ids[r]) << ',' << oracle.accepts(subject.text) << ','
                   << oracle.accepts(append_phrases(subject.text, res.inserted[t])) << ','
                   << csv_field(join(res.inserted[t], ";")) << '\n';
            }
        });
        json report = {{"setting", "simple"},
                       {"required_words", oracle.required_words()},
                       {"rows", ds.rows()},
                       {"test_rows", res.test_rows},
                       {"acceptance_before", res.acceptance_before},
                       {"acceptance_after", res.acceptance_after},
                       {"vocab_features", ds.vocab_features.words()},
                       {"final_metrics", trained.metrics.empty() ? json(nullptr) : final_metrics(trained.metrics)}};
        write_file(ctx.out_dir() / "report.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });
        ctx.out() << "acceptance before " << format_score(res.acceptance_before) << ", after "
                  << format_score(res.acceptance_after) << " on " << res.test_rows << " test rows\n";
        return kOk;
    }

    // complex setting
    std::string job_id = o.job;
    json backend_override;
    if (oracle_json) {
        const auto rc = ranking_oracle_config_from_json(*oracle_json);
        if (job_id.empty()) job_id = rc.job_id;
        backend_override = rc.backend;
    }
    if (job_id.empty()) job_id = corpus.jobs.front().id;
    const auto& job = corpus.job(job_id);

    std::vector<Document> pool;
    if (o.no_augment) {
        pool = corpus.resumes;
    } else {
        auto aug = augment_split(corpus.resumes);
        for (const auto& w : aug.warnings) std::cerr << "warning: " << w.doc_id << ": " << w.message << '\n';
        pool = std::move(aug.documents);
    }
    if (pool.size() < 2) throw ArgumentError("complex setting needs at least 2 resumes in the pool");

    SharedOptions shared = ctx.shared();
    if (backend_override.is_object()) {
        if (backend_override.contains("kind")) shared.backend = backend_override["kind"].get<std::string>();
        if (backend_override.contains("endpoint")) shared.endpoint = backend_override["endpoint"].get<std::string>();
        if (backend_override.contains("dim")) shared.dim = backend_override["dim"].get<std::size_t>();
    }
    Context bctx(shared, {}, ctx.out());
    std::vector<Document> fit = pool;
    fit.insert(fit.end(), corpus.jobs.begin(), corpus.jobs.end());
    const auto backend = bctx.backend(fit);

    ComplexDatasetOptions dopt;
    dopt.vocab_size = o.vocab_size ? o.vocab_size : 500;
    dopt.label_top = o.label_top;
    dopt.threads = ctx.threads();
    config["vocab_size"] = dopt.vocab_size;
    config["job"] = job_id;
    ctx.write_manifest("attack-blackbox", config, corpus.source, to_json(backend->descriptor()),
                       {"dataset.jsonl", "metrics.csv", "model.json", "reports.csv", "summary.json", "report.json"});

    const auto ds = build_complex_dataset(pool, job, *backend, ctx.stopwords(), dopt);
    write_file(ctx.out_dir() / "dataset.jsonl", [&](std::ostream& os) { write_groundtruth_jsonl(os, ds); });
    const auto trained = train_surrogate(ds, cfg);
    save_mlp(trained.model, (ctx.out_dir() / "model.json").string());
    write_file(ctx.out_dir() / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, trained.metrics); });

    const RankingOracle oracle(job, pool, backend, ctx.threads());
    const auto reports = run_ranking_experiment(ds, oracle, trained.model, trained.split.test_rows, cfg, ctx.threads());
    write_file(ctx.out_dir() / "reports.csv", [&](std::ostream& os) { write_reports_csv(os, reports); });

    auto p1 = phase1_extract(job, Gram::Unigram, *backend, ctx.stopwords(), ctx.threads());
    if (p1.size() > dopt.shortlist) p1.resize(dopt.shortlist);
    std::vector<Document> test_docs;
    for (auto r : trained.split.test_rows) test_docs.push_back(ds.subjects[r]);
    const auto wb = whitebox_reference(oracle, test_docs, p1, std::min(cfg.top_k, ds.Y.cols), ctx.threads());

    json summary = reports.empty() ? json(nullptr) : to_json(aggregate(reports));
    write_file(ctx.out_dir() / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
    json report = {{"setting", "complex"},
                   {"job", job_id},
                   {"pool_size", pool.size()},
                   {"feature_width", ds.X.cols},
                   {"label_width", ds.Y.cols},
                   {"test_rows", reports.size()},
                   {"blackbox_mean_rank_change", mean_rank_change(reports)},
                   {"whitebox_mean_rank_change", mean_rank_change(wb)},
                   {"final_metrics", trained.metrics.empty() ? json(nullptr) : final_metrics(trained.metrics)}};
    write_file(ctx.out_dir() / "report.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    ctx.out() << "black-box mean rank change " << format_score(mean_rank_change(reports)) << " (white-box "
              << format_score(mean_rank_change(wb)) << ") over " << reports.size() << " test resumes\n";
    return kOk;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

namespace detail {

inline int cmd_replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
                      std::ostream& err) {
    const auto m = read_json_file(manifest_path);
    std::vector<std::string> args;
    try {
        args = m.at("args").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw IoError("manifest has no args: " + std::string(e.what()));
    }
    args.push_back("--out");
    args.push_back(out_dir);
    return run_cli(args, out, err);
}

}  // namespace detail

/// Parses args (without the program name) and runs one subcommand. Returns
/// the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Embedding-similarity ranking and keyword-insertion rank attacks"};
    app.require_subcommand(1);
    SharedOptions shared;
    auto add_shared = [&](CLI::App* sub) {
        sub->add_option("--backend", shared.backend, "Embedding backend")
            ->check(CLI::IsMember({"tfidf", "remote", "hashed"}));
        sub->add_option("--endpoint", shared.endpoint, "Remote embedding service URL");
        sub->add_option("--seed", shared.seed, "Master seed");
        sub->add_option("--stopwords", shared.stopwords, "Stopword file (one word per line)");
        sub->add_option("--jobs", shared.jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", shared.out, "Output directory");
        sub->add_option("--dim", shared.dim, "Hashed backend dimension")->check(CLI::Range(8, 1 << 16));
    };

    GenCorpusOptions gen;
    auto* gen_cmd = app.add_subcommand("gen-corpus", "Write a synthetic corpus");
    add_shared(gen_cmd);
    gen_cmd->add_option("--n-resumes", gen.n_resumes)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--n-jobs", gen.n_jobs)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--skill-pool", gen.skill_pool)->check(CLI::Range(20, 100000));
    gen_cmd->add_option("--overlap", gen.overlap)->check(CLI::Range(0.0, 1.0));

    std::string stats_corpus;
    auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics as JSON");
    add_shared(stats_cmd);
    stats_cmd->add_option("--corpus", stats_corpus)->required();

    RankOptions rank_opt;
    auto* rank_cmd = app.add_subcommand("rank", "Rank resumes against one job");
    add_shared(rank_cmd);
    rank_cmd->add_option("--corpus", rank_opt.corpus)->required();
    rank_cmd->add_option("--job", rank_opt.job, "Job id")->required();

    WhiteboxOptions wb;
    auto* wb_cmd = app.add_subcommand("attack-whitebox", "White-box keyword insertion attack");
    add_shared(wb_cmd);
    wb_cmd->add_option("--corpus", wb.corpus)->required();
    wb_cmd->add_option("--gram", wb.gram)->check(CLI::IsMember({"unigram", "bigram", "trigram", "1", "2", "3"}));
    wb_cmd->add_option("--budgets", wb.budgets)->delimiter(',');
    wb_cmd->add_option("--shortlist", wb.shortlist);
    wb_cmd->add_option("--job-ids", wb.job_ids)->delimiter(',');
    wb_cmd->add_option("--max-jobs", wb.max_jobs);
    wb_cmd->add_option("--max-resumes", wb.max_resumes);
    wb_cmd->add_option("--bin-width", wb.bin_width)->check(CLI::PositiveNumber);

    BlackboxOptions bb;
    auto* bb_cmd = app.add_subcommand("attack-blackbox", "Surrogate-network black-box attack");
    add_shared(bb_cmd);
    bb_cmd->add_option("--corpus", bb.corpus)->required();
    bb_cmd->add_option("--setting", bb.setting)->check(CLI::IsMember({"simple", "complex"}));
    bb_cmd->add_option("--oracle", bb.oracle, "Oracle config JSON");
    bb_cmd->add_option("--rule-words", bb.rule_words)->delimiter(',');
    bb_cmd->add_option("--job", bb.job);
    bb_cmd->add_option("--epochs", bb.epochs);
    bb_cmd->add_option("--batch-size", bb.batch_size)->check(CLI::PositiveNumber);
    bb_cmd->add_option("--lr", bb.lr)->check(CLI::PositiveNumber);
    bb_cmd->add_option("--dropout", bb.dropout)->check(CLI::Range(0.0, 0.5));
    bb_cmd->add_option("--hidden", bb.hidden)->delimiter(',');
    bb_cmd->add_option("--vocab-size", bb.vocab_size);
    bb_cmd->add_option("--top-k", bb.top_k);
    bb_cmd->add_option("--label-top", bb.label_top);
    bb_cmd->add_option("--threshold", bb.threshold);
    bb_cmd->add_option("--test-fraction", bb.test_fraction);
    bb_cmd->add_flag("--no-augment", bb.no_augment);

    std::string manifest;
    std::string replay_out = "replay";
    auto* replay_cmd = app.add_subcommand("replay", "Rerun a command from its manifest.json");
    replay_cmd->add_option("manifest", manifest)->required();
    replay_cmd->add_option("--out", replay_out);

    std::vector<std::string> argv_store{"rankattack"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (*replay_cmd) return detail::cmd_replay(manifest, replay_out, out, err);
        detail::Context ctx(shared, args, out);
        if (*gen_cmd) return detail::cmd_gen_corpus(ctx, gen);
        if (*stats_cmd) return detail::cmd_stats(ctx, stats_corpus, stats_cmd->count("--out") > 0);
        if (*rank_cmd) return detail::cmd_rank(ctx, rank_opt);
        if (*wb_cmd) return detail::cmd_attack_whitebox(ctx, wb);
        if (*bb_cmd) return detail::cmd_attack_blackbox(ctx, bb);
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const BackendError& e) {
        err << "backend failure: " << e.what() << '\n';
        return kBackendOrIo;
    } catch (const IoError& e) {
        err << "I/O failure: " << e.what() << '\n';
        return kBackendOrIo;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return kBackendOrIo;
    }
    return kUsage;
}

}  // namespace rankattack::cli
