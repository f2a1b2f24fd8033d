// rlink: record-linkage pipeline driver and clerical-review service.

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <iostream>

#include "rlink/beta_rl.hpp"
#include "rlink/comparison.hpp"
#include "rlink/estimators.hpp"
#include "rlink/evaluation.hpp"
#include "rlink/fs_mixture.hpp"
#include "rlink/io.hpp"
#include "rlink/review.hpp"
#include "rlink/review_server.hpp"
#include "rlink/synth.hpp"

using namespace rlink;

namespace {

class StageError : public std::runtime_error {
  public:
    StageError(const std::string& input, const std::string& what)
        : std::runtime_error("input '" + input + "': " + what) {}
};

/// Runs f, attributing failures to the named input file.
template <class F>
auto reading(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(path, e.what());
    }
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string sibling(const std::string& out, const std::string& suffix) { return out + suffix; }

ComparisonFile load_comparison(const std::string& path) {
    return reading(path, [&] { return read_comparison(path); });
}

struct ChainFile {
    Json doc;
    std::size_t n1 = 0, n2 = 0;
    bool swapped = false;
};

ChainFile load_chain(const std::string& posterior_path) {
    const auto path = sibling(posterior_path, ".chain.json");
    return reading(path, [&] {
        ChainFile c;
        c.doc = Json::parse(read_text(path));
        c.n1 = c.doc.at("n1").get<std::size_t>();
        c.n2 = c.doc.at("n2").get<std::size_t>();
        c.swapped = c.doc.value("swapped", false);
        return c;
    });
}

PosteriorSummary load_posterior(const std::string& path, const ChainFile& chain) {
    return reading(path, [&] {
        auto p = parse_posterior(read_text(path), chain.n1, chain.n2);
        p.validate(1e-6);
        return p;
    });
}

LinkageConfig config_or_default(const std::string& path) {
    if (path.empty()) return synthetic_config();
    return reading(path, [&] { return load_config(path); });
}

Json base_meta(const Timer& t) {
    return Json{{"seconds", t.seconds()}};
}

// -------------------------------------------------------------------------
//     Stages
// -------------------------------------------------------------------------

struct SimulateArgs {
    std::string out;
    GeneratorConfig gen;
};

void run_simulate(const SimulateArgs& a) {
    Timer t;
    a.gen.validate();
    auto pair = generate_pair(a.gen);
    const auto cfg = synthetic_config();
    write_datafile(a.out + ".file1.csv", pair.file1, cfg);
    write_datafile(a.out + ".file2.csv", pair.file2, cfg);
    write_text(a.out + ".truth.csv", format_truth(pair.truth));
    write_text(a.out + ".config.json", config_to_json(cfg).dump(2) + "\n");
    auto meta = base_meta(t);
    meta["seed"] = a.gen.seed;
    meta["records_per_file"] = a.gen.records_per_file;
    meta["overlap"] = a.gen.overlap;
    meta["erroneous_fields"] = a.gen.erroneous_fields;
    meta["max_errors_per_field"] = a.gen.max_errors_per_field;
    meta["distorted_fraction"] = a.gen.distorted_fraction;
    meta["true_matches"] = pair.truth.overlap_size();
    write_meta(a.out, "simulate", meta);
}

struct CompareArgs {
    std::vector<std::string> inputs;
    std::string config, out;
    bool serial = false;
};

void run_compare(const CompareArgs& a) {
    Timer t;
    const auto cfg = config_or_default(a.config);
    auto first = reading(a.inputs[0], [&] { return read_datafile(a.inputs[0], cfg); });
    auto second = reading(a.inputs[1], [&] { return read_datafile(a.inputs[1], cfg); });
    auto files = orient_files(std::move(first), std::move(second));
    const auto data = a.serial ? build_comparison_data_serial(files.file1, files.file2, cfg.comparators, cfg.blocking)
                               : build_comparison_data(files.file1, files.file2, cfg.comparators, cfg.blocking);
    write_comparison(a.out, data, files.swapped);
    auto meta = base_meta(t);
    meta["inputs"] = a.inputs;
    meta["n1"] = data.n1();
    meta["n2"] = data.n2();
    meta["pairs"] = data.num_pairs();
    meta["patterns"] = data.num_patterns();
    meta["swapped"] = files.swapped;
    write_meta(a.out, "compare", meta);
}

struct EmArgs {
    std::string input, out;
    std::size_t max_iterations = 1000;
    double tolerance = 1e-8;
};

void run_em(const EmArgs& a) {
    Timer t;
    const auto cmp = load_comparison(a.input);
    EmOptions opt;
    opt.max_iterations = a.max_iterations;
    opt.tolerance = a.tolerance;
    const auto fit = em_fit(cmp.data, std::nullopt, opt);
    write_text(a.out, phi_to_json(fit.phi, cmp.data.fields()).dump(2) + "\n");
    write_text(sibling(a.out, ".weights.csv"), format_weights(cmp.data, pair_weights(fit.phi, cmp.data)));
    auto meta = base_meta(t);
    meta["input"] = a.input;
    meta["iterations"] = fit.iterations;
    meta["converged"] = fit.converged;
    meta["degenerate"] = fit.degenerate;
    meta["log_likelihood"] = fit.log_likelihood.empty() ? Json(nullptr) : Json(fit.log_likelihood.back());
    write_meta(a.out, "em", meta);
    if (fit.degenerate) std::cerr << "rlink em: warning: all pairs share one comparison pattern\n";
}

PhiParams load_phi(const std::string& path, const ComparisonData& data) {
    return reading(path, [&] { return phi_from_json(Json::parse(read_text(path)), data.fields()); });
}

struct MleArgs {
    std::string input, params, out;
};

void run_mle(const MleArgs& a) {
    Timer t;
    const auto cmp = load_comparison(a.input);
    const auto phi = load_phi(a.params, cmp.data);
    const auto mle = mle_matching(WeightMatrix::from_comparison(phi, cmp.data));
    auto est = estimate_from_labeling(mle.z, "fs-mle");
    write_text(a.out, format_estimate(est, cmp.swapped));
    auto meta = base_meta(t);
    meta["input"] = a.input;
    meta["params"] = a.params;
    meta["objective"] = mle.objective;
    meta["links"] = est.count(Decision::Link);
    write_meta(a.out, "mle", meta);
}

struct FsRuleArgs {
    std::string input, params, out;
    FSRuleConfig cfg;
};

void run_fsrule(const FsRuleArgs& a) {
    Timer t;
    a.cfg.validate();
    const auto cmp = load_comparison(a.input);
    const auto phi = load_phi(a.params, cmp.data);
    const auto weights = WeightMatrix::from_comparison(phi, cmp.data);
    const auto mle = mle_matching(weights);
    const auto rule = fs_decision_rule(phi, cmp.data, mle.z, a.cfg);
    LinkageEstimate est{cmp.data.n1(), {}, "fs-rule", {}};
    est.loss.lambda_R = 1.0;
    for (const auto& d : rule.decisions) {
        EstimateEntry e;
        e.decision = d.decision == FsDecision::Link ? Decision::Link
                     : d.decision == FsDecision::Review ? Decision::Reject
                                                        : Decision::NonLink;
        if (e.decision == Decision::Link) e.i = d.i;
        e.prob = d.weight;
        est.entries.push_back(e);
    }
    write_text(a.out, format_estimate(est, cmp.swapped));
    auto meta = base_meta(t);
    meta["input"] = a.input;
    meta["mu"] = a.cfg.mu;
    meta["lambda"] = a.cfg.lambda_fs;
    meta["links"] = rule.links;
    meta["reviews"] = rule.reviews;
    meta["nonlinks"] = rule.nonlinks;
    meta["review_rate"] = rule.review_rate();
    meta["note"] = "probability column holds the pair weight";
    write_meta(a.out, "fsrule", meta);
}

struct GibbsArgs {
    std::string input, out, draws;
    GibbsOptions opt;
    PriorConfig prior;
};

void run_gibbs(const GibbsArgs& a) {
    Timer t;
    const auto cmp = load_comparison(a.input);
    auto opt = a.opt;
    opt.keep_samples = true;
    const auto post = run_gibbs(cmp.data, a.prior, opt);
    write_text(a.out, format_posterior(post));
    write_text(sibling(a.out, ".overlap.csv"), format_overlap(post));
    if (!a.draws.empty()) write_text(a.draws, format_draws(post));
    auto chain = chain_to_json(post, a.prior);
    chain["swapped"] = cmp.swapped;
    chain["overlap_summary"] = overlap_to_json(overlap_summary(post, 0.95));
    write_text(sibling(a.out, ".chain.json"), chain.dump(2) + "\n");
    auto meta = base_meta(t);
    meta["input"] = a.input;
    meta["seed"] = opt.seed;
    meta["iterations"] = opt.iterations;
    meta["burn_in"] = opt.burn_in;
    meta["chains"] = opt.chains;
    write_meta(a.out, "gibbs", meta);
}

struct EstimateArgs {
    std::string input, loss = "1,1,2", estimator = "auto", out;
};

void run_estimate(const EstimateArgs& a) {
    Timer t;
    const auto chain = load_chain(a.input);
    const auto post = load_posterior(a.input, chain);
    const auto loss = LossConfig::parse(a.loss);
    LinkageEstimate est;
    if (a.estimator == "general") est = bayes_estimate_general(post, loss);
    else if (a.estimator == "full") est = bayes_full(post, loss);
    else if (a.estimator == "partial") est = bayes_partial(post, loss);
    else if (a.estimator == "auto") {
        if (!loss.lambda_R && loss.theorem1()) est = bayes_full(post, loss);
        else if (loss.lambda_R && loss.theorem3()) est = bayes_partial(post, loss);
        else est = bayes_estimate_general(post, loss);
    } else {
        throw ConfigError("unknown estimator '" + a.estimator + "'");
    }
    write_text(a.out, format_estimate(est, chain.swapped));
    auto meta = base_meta(t);
    meta["input"] = a.input;
    meta["estimator"] = est.estimator;
    meta["loss"] = loss.to_string();
    meta["links"] = est.count(Decision::Link);
    meta["nonlinks"] = est.count(Decision::NonLink);
    meta["rejections"] = est.count(Decision::Reject);
    meta["total_expected_loss"] = est.total_loss();
    write_meta(a.out, "estimate", meta);
}

struct EvaluateArgs {
    std::string input, truth, out;
};

void run_evaluate(const EvaluateArgs& a) {
    Timer t;
    const auto ef = reading(a.input, [&] { return parse_estimate(read_text(a.input)); });
    const auto truth = reading(a.truth, [&] { return parse_truth(read_text(a.truth), ef.estimate.n1); });
    const auto report = ef.estimate.count(Decision::Reject) ? score_partial(truth, ef.estimate)
                                                            : score_full(truth, ef.estimate);
    auto doc = report_to_json(report);
    doc["estimator"] = ef.estimate.estimator;
    const auto text = doc.dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text(a.out, text);
        auto meta = base_meta(t);
        meta["input"] = a.input;
        meta["truth"] = a.truth;
        write_meta(a.out, "evaluate", meta);
    }
}

struct ServeArgs {
    std::string input, posterior, comparison, config, log, host = "127.0.0.1";
    std::vector<std::string> files;
    int port = 8080;
};

ReviewServer* g_server = nullptr;

void run_serve(const ServeArgs& a) {
    const auto ef = reading(a.input, [&] { return parse_estimate(read_text(a.input)); });
    const auto chain = load_chain(a.posterior);
    auto post = load_posterior(a.posterior, chain);
    const auto cmp = load_comparison(a.comparison);
    std::optional<FilePair> files;
    if (!a.files.empty()) {
        if (a.files.size() != 2) throw ConfigError("--files needs two datafiles");
        const auto cfg = config_or_default(a.config);
        auto first = reading(a.files[0], [&] { return read_datafile(a.files[0], cfg); });
        auto second = reading(a.files[1], [&] { return read_datafile(a.files[1], cfg); });
        files = orient_files(std::move(first), std::move(second));
    }
    auto tasks = build_tasks(ef.estimate, post, cmp.data, files ? &files->file1 : nullptr, files ? &files->file2 : nullptr);
    const auto log = a.log.empty() ? a.input + ".decisions.jsonl" : a.log;
    ReviewSession session(ef.estimate, std::move(post), std::move(tasks), log);
    std::vector<std::string> names, cmp_names;
    if (files) {
        for (const auto& f : files->file1.schema()) names.push_back(f.name);
    }
    for (const auto& f : cmp.data.fields()) cmp_names.push_back(f.name);
    session.set_field_names(names, cmp_names);

    ReviewServer server(session);
    if (!server.bind(a.host, a.port)) throw std::runtime_error("cannot bind " + a.host + ":" + std::to_string(a.port));
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    std::cerr << "rlink serve: " << session.tasks().size() << " tasks on http://" << a.host << ":" << a.port
              << ", log " << log << "\n";
    server.listen();
    g_server = nullptr;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Record linkage with Fellegi-Sunter and Bayesian beta record linkage"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Generate a synthetic pair of datafiles with known truth");
    c_sim->add_option("--out", sim.out, "Output prefix")->required();
    c_sim->add_option("--seed", sim.gen.seed, "Random seed");
    c_sim->add_option("--records", sim.gen.records_per_file, "Records per file");
    c_sim->add_option("--overlap", sim.gen.overlap, "Fraction of file-2 records with a match");
    c_sim->add_option("--erroneous-fields", sim.gen.erroneous_fields, "Fields in error per distorted record");
    c_sim->add_option("--max-errors", sim.gen.max_errors_per_field, "Maximum errors per erroneous field");
    c_sim->add_option("--distorted", sim.gen.distorted_fraction, "Fraction of file-2 records distorted");

    CompareArgs cmp;
    auto* c_cmp = app.add_subcommand("compare", "Build comparison vectors for two datafiles");
    c_cmp->add_option("--input", cmp.inputs, "The two datafiles")->required()->expected(2);
    c_cmp->add_option("--config", cmp.config, "Linkage configuration (JSON)");
    c_cmp->add_option("--out", cmp.out, "Comparison file")->required();
    c_cmp->add_flag("--serial", cmp.serial, "Use the single-threaded reference path");

    EmArgs em;
    auto* c_em = app.add_subcommand("em", "Fit the Fellegi-Sunter mixture by EM");
    c_em->add_option("--input", em.input, "Comparison file")->required();
    c_em->add_option("--out", em.out, "Parameter file (JSON)")->required();
    c_em->add_option("--iterations", em.max_iterations, "Maximum EM iterations");
    c_em->add_option("--tolerance", em.tolerance, "Relative log-likelihood tolerance");

    MleArgs mle;
    auto* c_mle = app.add_subcommand("mle", "Maximum-likelihood bipartite matching");
    c_mle->add_option("--input", mle.input, "Comparison file")->required();
    c_mle->add_option("--params", mle.params, "Parameter file from em")->required();
    c_mle->add_option("--out", mle.out, "Estimate file")->required();

    FsRuleArgs fsr;
    auto* c_fsr = app.add_subcommand("fsrule", "Fellegi-Sunter link/review/non-link rule on the MLE matching");
    c_fsr->add_option("--input", fsr.input, "Comparison file")->required();
    c_fsr->add_option("--params", fsr.params, "Parameter file from em")->required();
    c_fsr->add_option("--mu", fsr.cfg.mu, "Admissible false-link rate");
    c_fsr->add_option("--lambda", fsr.cfg.lambda_fs, "Admissible false-non-link rate");
    c_fsr->add_option("--out", fsr.out, "Estimate file (review as reject)")->required();

    GibbsArgs gb;
    auto* c_gb = app.add_subcommand("gibbs", "Gibbs sampler for the Bayesian beta record linkage model");
    c_gb->add_option("--input", gb.input, "Comparison file")->required();
    c_gb->add_option("--out", gb.out, "Posterior file")->required();
    c_gb->add_option("--seed", gb.opt.seed, "Random seed");
    c_gb->add_option("--iterations", gb.opt.iterations, "Total iterations");
    c_gb->add_option("--burn-in", gb.opt.burn_in, "Discarded iterations");
    c_gb->add_option("--chains", gb.opt.chains, "Independent chains");
    c_gb->add_flag("--random-scan", gb.opt.random_scan, "Random sweep order");
    c_gb->add_option("--alpha-pi", gb.prior.alpha_pi, "Beta prior shape for the overlap fraction");
    c_gb->add_option("--beta-pi", gb.prior.beta_pi, "Beta prior shape for the overlap fraction");
    c_gb->add_flag("--flat-prior", gb.prior.flat_matching_prior, "Uniform prior over matchings");
    c_gb->add_option("--draws", gb.draws, "Write retained draws to this file");

    EstimateArgs es;
    auto* c_es = app.add_subcommand("estimate", "Bayes estimate from a posterior");
    c_es->add_option("--input", es.input, "Posterior file from gibbs")->required();
    c_es->add_option("--loss", es.loss, "l10,l01,l11p[,lR]");
    c_es->add_option("--estimator", es.estimator, "auto, general, full or partial")
        ->check(CLI::IsMember({"auto", "general", "full", "partial"}));
    c_es->add_option("--out", es.out, "Estimate file")->required();

    EvaluateArgs ev;
    auto* c_ev = app.add_subcommand("evaluate", "Score an estimate against the truth");
    c_ev->add_option("--input", ev.input, "Estimate file")->required();
    c_ev->add_option("--truth", ev.truth, "Truth file")->required();
    c_ev->add_option("--out", ev.out, "Report file (JSON); stdout when omitted");

    ServeArgs sv;
    auto* c_sv = app.add_subcommand("serve", "Clerical-review service for rejected records");
    c_sv->add_option("--input", sv.input, "Estimate file")->required();
    c_sv->add_option("--posterior", sv.posterior, "Posterior file from gibbs")->required();
    c_sv->add_option("--comparison", sv.comparison, "Comparison file")->required();
    c_sv->add_option("--files", sv.files, "The two datafiles, for field values")->expected(2);
    c_sv->add_option("--config", sv.config, "Linkage configuration (JSON)");
    c_sv->add_option("--log", sv.log, "Decision log (default <input>.decisions.jsonl)");
    c_sv->add_option("--host", sv.host, "Listen address");
    c_sv->add_option("--port", sv.port, "Listen port");

    CLI11_PARSE(app, argc, argv);

    const auto* sub = app.get_subcommands().front();
    const std::string stage = sub->get_name();
    try {
        if (sub == c_sim) run_simulate(sim);
        else if (sub == c_cmp) run_compare(cmp);
        else if (sub == c_em) run_em(em);
        else if (sub == c_mle) run_mle(mle);
        else if (sub == c_fsr) run_fsrule(fsr);
        else if (sub == c_gb) run_gibbs(gb);
        else if (sub == c_es) run_estimate(es);
        else if (sub == c_ev) run_evaluate(ev);
        else if (sub == c_sv) run_serve(sv);
    } catch (const std::exception& e) {
        std::cerr << "rlink " << stage << ": error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
