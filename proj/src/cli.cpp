#include "alloyopt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "alloyopt/analysis.hpp"
#include "alloyopt/bo.hpp"
#include "alloyopt/cross_validation.hpp"
#include "alloyopt/element_data.hpp"
#include "alloyopt/environment.hpp"
#include "alloyopt/error.hpp"
#include "alloyopt/featurize.hpp"
#include "alloyopt/fom.hpp"
#include "alloyopt/ga_select.hpp"
#include "alloyopt/metrics.hpp"
#include "alloyopt/parallel.hpp"
#include "alloyopt/text_io.hpp"

namespace alloyopt {
namespace {

using nlohmann::json;

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(path + ": invalid JSON: " + e.what());
    }
}

void write_json(const std::string& path, const json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

/// Appends `--key value` for every config entry whose flag is not already on the command
/// line, so that explicit flags win over the file and the file wins over defaults.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    const auto it = std::find(args.begin(), args.end(), "--config");
    if (it == args.end() || it + 1 == args.end()) return args;
    const json config = read_json(*(it + 1));
    if (!config.is_object()) throw Error("config file must contain a JSON object");
    auto present = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
    };
    std::vector<std::string> extra;
    for (const auto& [key, value] : config.items()) {
        const std::string flag = "--" + key;
        if (key == "config" || present(flag)) continue;
        auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (value.is_boolean()) {
            if (value.get<bool>()) extra.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& v : value) {
                extra.push_back(flag);
                extra.push_back(text(v));
            }
        } else if (!value.is_null()) {
            extra.push_back(flag);
            extra.push_back(text(value));
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

/// Effective flags of a parsed subcommand, in the form merge_config() reads back.
json effective_config(const CLI::App& app) {
    json j = json::object();
    for (const CLI::Option* opt : app.get_options()) {
        const std::string name = opt->get_lnames().empty() ? std::string() : opt->get_lnames().front();
        if (name.empty() || name == "help" || name == "config" || name == "save-config") continue;
        if (opt->count() == 0 && opt->get_default_str().empty()) continue;
        if (opt->get_type_size() == 0) {
            j[name] = opt->count() > 0;
            continue;
        }
        auto results = opt->count() > 0 ? opt->results() : std::vector<std::string>{opt->get_default_str()};
        if (opt->get_expected_max() > 1)
            j[name] = results;
        else
            j[name] = results.back();
    }
    return j;
}

void add_config_flags(CLI::App* sub, std::string& save_path) {
    sub->add_option("--config", "JSON file of flag values; explicit flags take precedence");
    sub->add_option("--save-config", save_path, "Write the effective flag values to this JSON file");
}

SyntheticEnvironment resolve_environment(const std::string& name, std::uint64_t env_seed, const std::string& env_file) {
    if (!env_file.empty()) {
        auto env = environment_from_json(read_json(env_file));
        if (!name.empty() && to_string(env.kind) != name)
            throw Error("--env " + name + " does not match environment file (" + std::string(to_string(env.kind)) + ")");
        return env;
    }
    if (name.empty()) throw Error("either --env or --env-file is required");
    return make_environment(parse_environment_kind(name), env_seed);
}

Dataset maybe_subsample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
    if (n == 0 || n >= ds.size()) return ds;
    std::vector<std::size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + uniform_index(rng, ds.size() - i)]);
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return ds.subset(idx);
}

struct GaFlags {
    std::size_t population = 192, generations = 100, rounds = 4, folds = 10, stagnation = 20;
    double crossover = 0.8, mutation = 0.1;
    int trees = 100;

    void attach(CLI::App* sub, const std::string& prefix) {
        sub->add_option("--" + prefix + "population", population, "GA population size")->capture_default_str();
        sub->add_option("--" + prefix + "generations", generations, "GA maximum generations")->capture_default_str();
        sub->add_option("--" + prefix + "crossover", crossover, "GA crossover rate")->capture_default_str();
        sub->add_option("--" + prefix + "mutation", mutation, "GA per-gene mutation rate")->capture_default_str();
        sub->add_option("--" + prefix + "rounds", rounds, "CV repeats averaged into one fitness value")->capture_default_str();
        sub->add_option("--" + prefix + "folds", folds, "CV folds inside the fitness")->capture_default_str();
        sub->add_option("--" + prefix + "stagnation", stagnation, "Stop after this many generations without improvement")
            ->capture_default_str();
        sub->add_option("--trees", trees, "Random-forest trees")->capture_default_str();
    }

    GaConfig config(std::size_t k, int jobs) const {
        GaConfig c;
        c.population_size = population;
        c.max_generations = generations;
        c.crossover_rate = crossover;
        c.mutation_rate = mutation;
        c.fitness_rounds = rounds;
        c.cv_folds = folds;
        c.stagnation_limit = stagnation;
        c.subset_size = k;
        c.forest.n_trees = trees;
        c.jobs = jobs;
        return c;
    }
};

std::string join_columns(const std::vector<std::size_t>& cols) {
    std::string s;
    for (auto c : cols) s += (s.empty() ? "" : ";") + std::to_string(c);
    return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Composition featurization, GA feature selection and Bayesian optimization for alloys", "alloyopt"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "alloyopt 0.1.0");
    std::function<void()> action;
    std::string save_config;

    // gen-synthetic ------------------------------------------------------------------
    struct {
        std::string env, env_file, out, env_out;
        std::size_t samples = 100;
        std::uint64_t seed = 0, env_seed = 0;
        double noise = 0.0, target_temperature = 350.0;
        bool no_fom = false;
    } gen;
    auto* gen_cmd = app.add_subcommand("gen-synthetic", "Sample a dataset from a synthetic alloy environment");
    gen_cmd->add_option("--env", gen.env, "Alloy family: sma, ti or hea");
    gen_cmd->add_option("--env-file", gen.env_file, "Environment JSON (overrides --env-seed)");
    gen_cmd->add_option("--env-seed", gen.env_seed, "Seed of the ground-truth surfaces")->capture_default_str();
    gen_cmd->add_option("--samples", gen.samples, "Number of rows")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Sampling and noise seed")->capture_default_str();
    gen_cmd->add_option("--noise", gen.noise, "Gaussian noise standard deviation added to every property")
        ->capture_default_str();
    gen_cmd->add_option("--target-temperature", gen.target_temperature, "SMA target working temperature (K)")
        ->capture_default_str();
    gen_cmd->add_flag("--no-fom", gen.no_fom, "Do not append the prop:fom column");
    gen_cmd->add_option("--out", gen.out, "Dataset CSV to write")->required();
    gen_cmd->add_option("--env-out", gen.env_out, "Also archive the environment as JSON");
    add_config_flags(gen_cmd, save_config);
    gen_cmd->callback([&] {
        action = [&] {
            const auto env = resolve_environment(gen.env, gen.env_seed, gen.env_file);
            Dataset ds = generate_synthetic_dataset(env, gen.samples, gen.noise, gen.seed);
            if (!gen.no_fom) {
                const auto fcfg = default_fom_config(env, gen.target_temperature);
                auto names = ds.property_names();
                std::vector<DatasetRow> rows = ds.rows();
                for (auto& r : rows) {
                    PropertyMap props;
                    for (std::size_t i = 0; i < names.size(); ++i) props.emplace(names[i], r.properties[i]);
                    r.properties.push_back(fom(fcfg, props));
                }
                names.push_back("fom");
                ds = Dataset(ds.elements(), names, std::move(rows));
            }
            write_dataset(gen.out, ds);
            if (!gen.env_out.empty()) {
                json j = env;
                write_json(gen.env_out, j);
            }
            out << "wrote " << ds.size() << " rows to " << gen.out << "\n";
        };
    });

    // featurize ----------------------------------------------------------------------
    struct {
        std::string data, embeddings, subset, out;
    } feat;
    auto* feat_cmd = app.add_subcommand("featurize", "Mole-average descriptor columns over dataset compositions");
    feat_cmd->add_option("--data", feat.data, "Dataset CSV")->required();
    feat_cmd->add_option("--embeddings", feat.embeddings, "Embedding-table CSV")->required();
    feat_cmd->add_option("--subset", feat.subset, "Feature-subset JSON restricting the columns");
    feat_cmd->add_option("--out", feat.out, "Feature CSV to write")->required();
    add_config_flags(feat_cmd, save_config);
    feat_cmd->callback([&] {
        action = [&] {
            const auto table = load_embedding_table(feat.embeddings);
            const auto ds = load_dataset(feat.data);
            std::optional<FeatureSubset> subset;
            if (!feat.subset.empty()) subset = subset_from_json(read_json(feat.subset), table.dim());
            const auto fm = featurize_dataset(ds, table, subset);
            std::string csv;
            for (std::size_t j = 0; j < fm.column_ids.size(); ++j)
                csv += (j ? ",e" : "e") + std::to_string(fm.column_ids[j]);
            for (const auto& p : ds.property_names()) csv += ",prop:" + p;
            if (ds.has_class()) csv += ",class";
            csv += '\n';
            for (std::size_t r = 0; r < ds.size(); ++r) {
                for (Eigen::Index j = 0; j < fm.values.cols(); ++j)
                    csv += (j ? "," : "") + io::format_double(fm.values(static_cast<Eigen::Index>(r), j));
                for (double v : ds.rows()[r].properties) csv += "," + io::format_double(v);
                if (ds.has_class()) csv += "," + ds.rows()[r].label.value_or("");
                csv += '\n';
            }
            io::write_file_atomic(feat.out, csv);
            out << "wrote " << ds.size() << "x" << fm.column_ids.size() << " features to " << feat.out << "\n";
        };
    });

    // select -------------------------------------------------------------------------
    struct {
        std::string data, embeddings, target = "fom", out, report;
        std::size_t k = 0, subsample = 0;
        std::uint64_t seed = 0;
        int jobs = 1;
        GaFlags ga;
    } sel;
    auto* sel_cmd = app.add_subcommand("select", "Genetic-algorithm feature-subset selection");
    sel_cmd->add_option("--data", sel.data, "Dataset CSV")->required();
    sel_cmd->add_option("--embeddings", sel.embeddings, "Embedding-table CSV")->required();
    sel_cmd->add_option("--target", sel.target, "Property to predict, or 'class'")->capture_default_str();
    sel_cmd->add_option("--k", sel.k, "Subset cardinality")->required();
    sel_cmd->add_option("--seed", sel.seed, "Random seed")->capture_default_str();
    sel_cmd->add_option("--subsample", sel.subsample, "Use this many randomly chosen rows (0 = all)")->capture_default_str();
    sel_cmd->add_option("--jobs", sel.jobs, "Worker threads")->capture_default_str();
    sel.ga.attach(sel_cmd, "");
    sel_cmd->add_option("--out", sel.out, "Feature-subset JSON to write")->required();
    sel_cmd->add_option("--report", sel.report, "GA report JSON to write");
    add_config_flags(sel_cmd, save_config);
    sel_cmd->callback([&] {
        action = [&] {
            const auto table = load_embedding_table(sel.embeddings);
            const auto ds = maybe_subsample(load_dataset(sel.data), sel.subsample, derive_seed(sel.seed, {0x5AULL}));
            const auto report = ga_select(ds, table, sel.target, sel.ga.config(sel.k, sel.jobs), sel.seed);
            write_json(sel.out, subset_to_json(report.best));
            if (!sel.report.empty()) write_json(sel.report, to_json(report));
            out << "best subset [" << join_columns(report.best.columns()) << "] fitness "
                << io::format_double(report.best_fitness) << " after " << report.evaluations << " evaluations\n";
        };
    });

    // cv -----------------------------------------------------------------------------
    struct {
        std::string data, embeddings, target = "fom", model = "rf", out, summary_out;
        std::size_t k_min = 1, k_max = 8, tests = 8, subsample = 100, repeats = 64, folds = 10;
        std::uint64_t seed = 0;
        int jobs = 1;
        GaFlags ga;
    } cv;
    auto* cv_cmd = app.add_subcommand("cv", "Feature-count sweep: GA selection then repeated k-fold CV per subset size");
    cv_cmd->add_option("--data", cv.data, "Dataset CSV")->required();
    cv_cmd->add_option("--embeddings", cv.embeddings, "Embedding-table CSV")->required();
    cv_cmd->add_option("--target", cv.target, "Property to predict, or 'class'")->capture_default_str();
    cv_cmd->add_option("--model", cv.model, "Evaluation model: rf or gpr")
        ->check(CLI::IsMember({"rf", "gpr"}))
        ->capture_default_str();
    cv_cmd->add_option("--k-min", cv.k_min, "Smallest subset size")->capture_default_str();
    cv_cmd->add_option("--k-max", cv.k_max, "Largest subset size")->capture_default_str();
    cv_cmd->add_option("--tests", cv.tests, "Independent selections per subset size")->capture_default_str();
    cv_cmd->add_option("--subsample", cv.subsample, "Rows drawn per test (0 = all)")->capture_default_str();
    cv_cmd->add_option("--cv-repeats", cv.repeats, "Seeded CV repeats for the final score")->capture_default_str();
    cv_cmd->add_option("--folds", cv.folds, "Folds for the final score")->capture_default_str();
    cv_cmd->add_option("--seed", cv.seed, "Random seed")->capture_default_str();
    cv_cmd->add_option("--jobs", cv.jobs, "Worker threads")->capture_default_str();
    cv.ga.attach(cv_cmd, "ga-");
    cv_cmd->add_option("--out", cv.out, "Per-test CSV to write")->required();
    cv_cmd->add_option("--summary-out", cv.summary_out, "Per-size mean/std CSV to write");
    add_config_flags(cv_cmd, save_config);
    cv_cmd->callback([&] {
        action = [&] {
            if (cv.k_min < 1 || cv.k_max < cv.k_min) throw Error("need 1 <= --k-min <= --k-max");
            const auto table = load_embedding_table(cv.embeddings);
            const auto full = load_dataset(cv.data);
            const bool classify = cv.target == kClassTarget && !full.property_index(cv.target);

            struct Job {
                std::size_t k, test;
                std::uint64_t seed;
                std::vector<std::size_t> columns;
                double fitness = 0.0;
                CvResult result;
            };
            std::vector<Job> jobs;
            for (std::size_t k = cv.k_min; k <= cv.k_max; ++k)
                for (std::size_t t = 0; t < cv.tests; ++t) jobs.push_back({k, t, derive_seed(cv.seed, {k, t}), {}, 0.0, {}});

            ModelSpec model;
            model.kind = cv.model == "gpr" ? ModelKind::gpr : ModelKind::random_forest;
            model.gpr_auto = true;
            model.forest.n_trees = cv.ga.trees;
            parallel_for(jobs.size(), cv.jobs, [&](std::size_t i) {
                auto& job = jobs[i];
                const auto ds = maybe_subsample(full, cv.subsample, derive_seed(job.seed, {1}));
                const auto report = ga_select(ds, table, cv.target, cv.ga.config(job.k, 1), derive_seed(job.seed, {2}));
                job.columns = report.best.columns();
                job.fitness = report.best_fitness;
                const auto fm = featurize_dataset(ds, table, report.best);
                CvTargets targets;
                if (classify)
                    targets = class_targets(ds);
                else
                    targets = property_targets(ds, cv.target);
                CvOptions options{cv.folds, cv.repeats, classify ? Metric::f1_weighted : Metric::mae,
                                  derive_seed(job.seed, {3}), false, 1};
                job.result = kfold_cv(fm.values, targets, model, options);
            });

            std::string csv = "k,test,seed,columns,ga_fitness,cv_mean,cv_std\n";
            std::map<std::size_t, std::vector<double>> by_k;
            for (const auto& job : jobs) {
                csv += std::to_string(job.k) + ',' + std::to_string(job.test) + ',' + std::to_string(job.seed) + ',' +
                       join_columns(job.columns) + ',' + io::format_double(job.fitness) + ',' +
                       io::format_double(job.result.mean) + ',' + io::format_double(job.result.std) + '\n';
                by_k[job.k].push_back(job.result.mean);
            }
            io::write_file_atomic(cv.out, csv);
            if (!cv.summary_out.empty()) {
                std::string s = "k,mean,std,n\n";
                for (const auto& [k, v] : by_k)
                    s += std::to_string(k) + ',' + io::format_double(mean_of(v)) + ',' + io::format_double(stddev_of(v)) +
                         ',' + std::to_string(v.size()) + '\n';
                io::write_file_atomic(cv.summary_out, s);
            }
            out << "wrote " << jobs.size() << " sweep rows to " << cv.out << "\n";
        };
    });

    // bo -----------------------------------------------------------------------------
    struct {
        std::string env, env_file, embeddings, fom_config, subset, out_curve, out_trajectories, out_summary, label;
        std::string third_term = "one-minus-deviation";
        std::size_t iters = 60, init = 40, trajectories = 16, k = 4, pool = 4096, refine_top = 8, refine_steps = 100;
        std::uint64_t seed = 0, env_seed = 0;
        double target_temperature = 350.0, max_noise = 1e-3;
        bool no_refit = false, full_ga = false;
        int jobs = 1;
        GaFlags ga;
    } bo;
    auto* bo_cmd = app.add_subcommand("bo", "Parallel expected-improvement BO trajectories on a synthetic environment");
    bo_cmd->add_option("--env", bo.env, "Alloy family: sma, ti or hea");
    bo_cmd->add_option("--env-file", bo.env_file, "Environment JSON (overrides --env-seed)");
    bo_cmd->add_option("--env-seed", bo.env_seed, "Seed of the ground-truth surfaces")->capture_default_str();
    bo_cmd->add_option("--embeddings", bo.embeddings, "Embedding-table CSV")->required();
    bo_cmd->add_option("--iters", bo.iters, "BO iterations after the initial design")->capture_default_str();
    bo_cmd->add_option("--init", bo.init, "Random initial compositions")->capture_default_str();
    bo_cmd->add_option("--trajectories", bo.trajectories, "Independent trajectories")->capture_default_str();
    bo_cmd->add_option("--seed", bo.seed, "Base seed; trajectory i uses seed + i")->capture_default_str();
    bo_cmd->add_option("--k", bo.k, "Feature-subset size chosen by the GA")->capture_default_str();
    bo_cmd->add_option("--subset", bo.subset, "Fixed feature-subset JSON (skips the GA)");
    bo_cmd->add_option("--pool", bo.pool, "Random candidates scored per proposal")->capture_default_str();
    bo_cmd->add_option("--refine-top", bo.refine_top, "Best candidates refined by gradient ascent")->capture_default_str();
    bo_cmd->add_option("--refine-steps", bo.refine_steps, "Ascent steps per refined candidate")->capture_default_str();
    bo_cmd->add_flag("--no-refit", bo.no_refit, "Fit GPR hyperparameters once instead of every iteration");
    bo_cmd->add_option("--max-noise", bo.max_noise, "Upper bound on the fitted GPR noise variance (standardized units)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bo_cmd->add_flag("--full-ga-protocol", bo.full_ga,
                     "Keep the configured GA rounds/folds even when the initial design is small");
    bo_cmd->add_option("--fom-config", bo.fom_config, "FOM configuration JSON (default: percentile normalizers)");
    bo_cmd->add_option("--target-temperature", bo.target_temperature, "SMA target working temperature (K)")
        ->capture_default_str();
    bo_cmd->add_option("--sma-third-term", bo.third_term, "one-minus-deviation or literal")
        ->check(CLI::IsMember({"one-minus-deviation", "literal"}))
        ->capture_default_str();
    bo_cmd->add_option("--jobs", bo.jobs, "Worker threads")->capture_default_str();
    bo.ga.attach(bo_cmd, "ga-");
    bo_cmd->add_option("--label", bo.label, "Label stored in the summary JSON");
    bo_cmd->add_option("--out-curve", bo.out_curve, "iteration,mean_best,std_best CSV")->required();
    bo_cmd->add_option("--out-trajectories", bo.out_trajectories, "Per-record trajectory CSV");
    bo_cmd->add_option("--out-summary", bo.out_summary, "Final-FOM distribution JSON");
    add_config_flags(bo_cmd, save_config);
    bo_cmd->callback([&] {
        action = [&] {
            const auto env = resolve_environment(bo.env, bo.env_seed, bo.env_file);
            const auto table = load_embedding_table(bo.embeddings);
            FomConfig fcfg = bo.fom_config.empty() ? default_fom_config(env, bo.target_temperature)
                                                   : fom_config_from_json(read_json(bo.fom_config));
            if (bo.fom_config.empty())
                fcfg.sma_third_term =
                    bo.third_term == "literal" ? SmaThirdTerm::literal : SmaThirdTerm::one_minus_deviation;
            BoConfig bcfg;
            bcfg.n_initial = bo.init;
            bcfg.n_iterations = bo.iters;
            bcfg.n_trajectories = bo.trajectories;
            bcfg.candidate_pool = bo.pool;
            bcfg.refine_top = bo.refine_top;
            bcfg.refine_steps = bo.refine_steps;
            bcfg.refit_every_iteration = !bo.no_refit;
            bcfg.gpr_search.max_log_noise = std::log(bo.max_noise);
            bcfg.full_ga_protocol = bo.full_ga;
            bcfg.jobs = bo.jobs;
            if (!bo.subset.empty()) bcfg.fixed_subset = subset_from_json(read_json(bo.subset), table.dim());
            const auto summary =
                run_parallel_bo(env, table, fcfg, bcfg, bo.ga.config(bo.k, 1), bo.seed);
            io::write_file_atomic(bo.out_curve, summary_csv(summary));
            if (!bo.out_trajectories.empty()) io::write_file_atomic(bo.out_trajectories, trajectories_csv(summary));
            if (!bo.out_summary.empty()) {
                auto j = summary_json(summary, bo.label.empty() ? table.source_label() : bo.label);
                j["environment"] = env;
                j["fom_config"] = to_json(fcfg);
                write_json(bo.out_summary, j);
            }
            out << "final best FOM mean " << io::format_double(summary.mean_best.back()) << " std "
                << io::format_double(summary.std_best.back()) << " over " << summary.trajectories.size()
                << " trajectories\n";
        };
    });

    // analyze ------------------------------------------------------------------------
    struct {
        std::string embeddings, other, mode = "pearson", out;
    } an;
    auto* an_cmd = app.add_subcommand("analyze", "Pearson correlation between descriptor columns, or cosine similarity between elements");
    an_cmd->add_option("--embeddings", an.embeddings, "Embedding-table CSV")->required();
    an_cmd->add_option("--other", an.other, "Second table for pearson (defaults to the first)");
    an_cmd->add_option("--mode", an.mode, "pearson or cosine")
        ->check(CLI::IsMember({"pearson", "cosine"}))
        ->capture_default_str();
    an_cmd->add_option("--out", an.out, "Matrix CSV to write")->required();
    add_config_flags(an_cmd, save_config);
    an_cmd->callback([&] {
        action = [&] {
            const auto a = load_embedding_table(an.embeddings);
            SimilarityMatrix m;
            if (an.mode == "cosine") {
                m = cosine_similarity_matrix(a);
            } else {
                const auto b = an.other.empty() ? a : load_embedding_table(an.other);
                m = pearson_matrix(a, b);
            }
            io::write_file_atomic(an.out, m.to_csv());
            for (const auto& w : m.warnings) err << "warning: " << w << "\n";
            out << "wrote " << m.values.rows() << "x" << m.values.cols() << " matrix to " << an.out << "\n";
        };
    });

    // report -------------------------------------------------------------------------
    struct {
        std::vector<std::string> ga, compare;
        std::string out;
    } rep;
    auto* rep_cmd = app.add_subcommand("report", "Aggregate GA reports and compare BO final-FOM distributions");
    rep_cmd->add_option("--ga", rep.ga, "GA report JSON files for the feature-frequency tally");
    rep_cmd->add_option("--compare", rep.compare, "Two BO summary JSON files (first vs second)")->expected(2);
    rep_cmd->add_option("--out", rep.out, "Report JSON to write")->required();
    add_config_flags(rep_cmd, save_config);
    rep_cmd->callback([&] {
        action = [&] {
            json report = json::object();
            if (!rep.ga.empty()) {
                std::map<std::size_t, std::size_t> freq;
                for (const auto& path : rep.ga)
                    for (auto c : read_json(path).at("best").at("columns").get<std::vector<std::size_t>>()) ++freq[c];
                json f = json::object();
                for (const auto& [c, n] : freq) f[std::to_string(c)] = n;
                report["feature_frequency"] = f;
                report["ga_reports"] = rep.ga.size();
            }
            if (!rep.compare.empty()) {
                json groups = json::array();
                std::vector<std::vector<double>> samples;
                for (const auto& path : rep.compare) {
                    const auto j = read_json(path);
                    samples.push_back(j.at("final_fom").get<std::vector<double>>());
                    const auto& s = samples.back();
                    groups.push_back({{"label", j.value("label", path)},
                                      {"mean", mean_of(s)},
                                      {"std", s.size() > 1 ? sample_stddev_of(s) : 0.0},
                                      {"n", s.size()}});
                }
                const auto w = welch_t_test(samples[0], samples[1]);
                report["groups"] = groups;
                report["comparison"] = {{"t_statistic", w.t_statistic},
                                        {"dof", w.dof},
                                        {"p_greater", w.p_greater},
                                        {"p_two_sided", w.p_two_sided}};
            }
            if (report.empty()) throw Error("report needs --ga and/or --compare inputs");
            write_json(rep.out, report);
            out << report.dump(2) << "\n";
        };
    });

    try {
        auto args = merge_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (!save_config.empty()) {
            for (const auto* sub : app.get_subcommands()) write_json(save_config, effective_config(*sub));
        }
        if (action) action();
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace alloyopt
