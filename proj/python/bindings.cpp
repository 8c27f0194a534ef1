#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "alloyopt/analysis.hpp"
#include "alloyopt/bo.hpp"
#include "alloyopt/cli.hpp"
#include "alloyopt/cross_validation.hpp"
#include "alloyopt/error.hpp"
#include "alloyopt/featurize.hpp"
#include "alloyopt/fom.hpp"
#include "alloyopt/ga_select.hpp"
#include "alloyopt/gpr.hpp"
#include "alloyopt/metrics.hpp"

namespace py = pybind11;
using namespace alloyopt;

namespace {

std::vector<std::vector<double>> records_fractions(const BoTrajectory& t) {
    std::vector<std::vector<double>> out;
    for (const auto& r : t.records) out.push_back(r.fractions);
    return out;
}

std::vector<double> records_fom(const BoTrajectory& t) {
    std::vector<double> out;
    for (const auto& r : t.records) out.push_back(r.fom);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Composition featurization, GA descriptor selection and Bayesian optimization for alloys.";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", error.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<InfeasibleSpace>(m, "InfeasibleSpace", error.ptr());
    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", error.ptr());

    py::class_<EmbeddingTable>(m, "EmbeddingTable")
        .def(py::init<std::vector<std::string>, Eigen::MatrixXd, std::string>(), py::arg("elements"),
             py::arg("values"), py::arg("source_label") = "")
        .def_property_readonly("elements", &EmbeddingTable::elements)
        .def_property_readonly("values", &EmbeddingTable::values)
        .def_property_readonly("source_label", &EmbeddingTable::source_label)
        .def_property_readonly("dim", &EmbeddingTable::dim)
        .def("to_csv", &EmbeddingTable::to_csv)
        .def("__len__", &EmbeddingTable::size);
    m.def("load_embedding_table", &load_embedding_table, py::arg("path"), py::arg("source_label") = "");

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("elements", &Dataset::elements)
        .def_property_readonly("property_names", &Dataset::property_names)
        .def_property_readonly("has_class", &Dataset::has_class)
        .def("property", &Dataset::property, py::arg("name"))
        .def("labels", &Dataset::labels)
        .def("fractions", &fraction_matrix)
        .def("to_csv", &Dataset::to_csv)
        .def("__len__", &Dataset::size);
    m.def("load_dataset", &load_dataset, py::arg("path"), py::arg("expected_elements") = std::nullopt);

    m.def(
        "featurize",
        [](const Dataset& ds, const EmbeddingTable& table, std::optional<std::vector<std::size_t>> columns) {
            std::optional<FeatureSubset> subset;
            if (columns) subset = FeatureSubset(*columns, table.dim());
            return featurize_dataset(ds, table, subset).values;
        },
        py::arg("dataset"), py::arg("table"), py::arg("columns") = std::nullopt);
    m.def(
        "mole_average",
        [](const std::vector<std::string>& elements, const std::vector<double>& fractions, const EmbeddingTable& table) {
            return mole_average(make_composition(elements, fractions), table).values;
        },
        py::arg("elements"), py::arg("fractions"), py::arg("table"));

    py::class_<ForestConfig>(m, "ForestConfig")
        .def(py::init<>())
        .def_readwrite("n_trees", &ForestConfig::n_trees)
        .def_readwrite("max_depth", &ForestConfig::max_depth)
        .def_readwrite("min_samples_leaf", &ForestConfig::min_samples_leaf)
        .def_readwrite("max_features", &ForestConfig::max_features)
        .def_readwrite("bootstrap", &ForestConfig::bootstrap)
        .def_readwrite("jobs", &ForestConfig::jobs);

    py::class_<GaConfig>(m, "GaConfig")
        .def(py::init<>())
        .def_readwrite("population_size", &GaConfig::population_size)
        .def_readwrite("crossover_rate", &GaConfig::crossover_rate)
        .def_readwrite("mutation_rate", &GaConfig::mutation_rate)
        .def_readwrite("max_generations", &GaConfig::max_generations)
        .def_readwrite("subset_size", &GaConfig::subset_size)
        .def_readwrite("fitness_rounds", &GaConfig::fitness_rounds)
        .def_readwrite("cv_folds", &GaConfig::cv_folds)
        .def_readwrite("tournament_size", &GaConfig::tournament_size)
        .def_readwrite("elitism_count", &GaConfig::elitism_count)
        .def_readwrite("stagnation_limit", &GaConfig::stagnation_limit)
        .def_readwrite("forest", &GaConfig::forest)
        .def_readwrite("jobs", &GaConfig::jobs);

    py::class_<GaReport>(m, "GaReport")
        .def_property_readonly("columns", [](const GaReport& r) { return r.best.columns(); })
        .def_readonly("best_fitness", &GaReport::best_fitness)
        .def_readonly("evaluations", &GaReport::evaluations)
        .def_readonly("seed", &GaReport::seed)
        .def("to_json", [](const GaReport& r) { return to_json(r).dump(); });
    m.def("ga_select", py::overload_cast<const Dataset&, const EmbeddingTable&, const std::string&, const GaConfig&,
                                         std::uint64_t>(&ga_select),
          py::arg("dataset"), py::arg("table"), py::arg("target"), py::arg("config"), py::arg("seed") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "fitness",
        [](const std::vector<std::size_t>& columns, const Dataset& ds, const EmbeddingTable& table,
           const std::string& target, const GaConfig& config, std::uint64_t seed) {
            return fitness(FeatureSubset(columns, table.dim()), ds, table, target, config, seed);
        },
        py::arg("columns"), py::arg("dataset"), py::arg("table"), py::arg("target"), py::arg("config"),
        py::arg("seed") = 0);

    py::class_<KernelConfig>(m, "KernelConfig")
        .def(py::init([](double s2, double l, double n) { return KernelConfig{s2, l, n}; }),
             py::arg("signal_variance") = 1.0, py::arg("length_scale") = 1.0, py::arg("noise_variance") = 1e-6)
        .def_readwrite("signal_variance", &KernelConfig::signal_variance)
        .def_readwrite("length_scale", &KernelConfig::length_scale)
        .def_readwrite("noise_variance", &KernelConfig::noise_variance);

    py::class_<GprModel>(m, "GprModel")
        .def_static(
            "fit",
            [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& k, bool standardize) {
                return GprModel::fit(X, y, k, GprOptions{standardize});
            },
            py::arg("X"), py::arg("y"), py::arg("kernel") = KernelConfig{}, py::arg("standardize") = true)
        .def_static(
            "fit_auto",
            [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::uint64_t seed) {
                HyperparameterSearch s;
                s.seed = seed;
                return GprModel::fit_auto(X, y, s);
            },
            py::arg("X"), py::arg("y"), py::arg("seed") = 0)
        .def("predict",
             [](const GprModel& model, const Eigen::MatrixXd& Xq) {
                 auto p = model.predict(Xq);
                 return py::make_tuple(p.mean, p.stddev);
             })
        .def_property_readonly("kernel", &GprModel::kernel)
        .def_property_readonly("jitter", &GprModel::jitter)
        .def_property_readonly("log_marginal_likelihood", &GprModel::log_marginal_likelihood);

    m.def("expected_improvement", &expected_improvement, py::arg("mu"), py::arg("sigma"), py::arg("f_best"));

    py::enum_<EnvironmentKind>(m, "EnvironmentKind")
        .value("sma", EnvironmentKind::sma)
        .value("ti", EnvironmentKind::ti)
        .value("hea", EnvironmentKind::hea);
    m.def("default_elements", &default_elements, py::arg("kind"));

    py::class_<SyntheticEnvironment>(m, "SyntheticEnvironment")
        .def_readonly("kind", &SyntheticEnvironment::kind)
        .def_readonly("seed", &SyntheticEnvironment::seed)
        .def_property_readonly("elements", [](const SyntheticEnvironment& e) { return e.space.elements(); })
        .def_property_readonly("property_names", &SyntheticEnvironment::property_names)
        .def("ground_truth",
             [](const SyntheticEnvironment& e, const std::vector<double>& fractions) {
                 return ground_truth(e, make_composition(e.space.elements(), fractions));
             })
        .def("to_json", [](const SyntheticEnvironment& e) {
            nlohmann::json j;
            to_json(j, e);
            return j.dump();
        });
    m.def("make_environment", [](EnvironmentKind kind, std::uint64_t seed) { return make_environment(kind, seed); },
          py::arg("kind"), py::arg("seed") = 0);
    m.def("generate_synthetic_dataset", &generate_synthetic_dataset, py::arg("env"), py::arg("n"),
          py::arg("noise_std") = 0.0, py::arg("seed") = 0);

    py::enum_<SmaThirdTerm>(m, "SmaThirdTerm")
        .value("one_minus_deviation", SmaThirdTerm::one_minus_deviation)
        .value("literal", SmaThirdTerm::literal);
    py::class_<FomConfig>(m, "FomConfig")
        .def(py::init<>())
        .def_readwrite("kind", &FomConfig::kind)
        .def_readwrite("normalizers", &FomConfig::normalizers)
        .def_readwrite("weights", &FomConfig::weights)
        .def_readwrite("target_temperature", &FomConfig::target_temperature)
        .def_readwrite("sma_third_term", &FomConfig::sma_third_term);
    m.def("default_fom_config", &default_fom_config, py::arg("env"), py::arg("target_temperature") = 350.0,
          py::arg("samples") = 10000, py::arg("seed") = 0);
    m.def(
        "fom", [](const FomConfig& c, const std::map<std::string, double>& p) {
            return fom(c, PropertyMap(p.begin(), p.end()));
        },
        py::arg("config"), py::arg("properties"));

    py::class_<BoConfig>(m, "BoConfig")
        .def(py::init<>())
        .def_readwrite("n_initial", &BoConfig::n_initial)
        .def_readwrite("n_iterations", &BoConfig::n_iterations)
        .def_readwrite("n_trajectories", &BoConfig::n_trajectories)
        .def_readwrite("candidate_pool", &BoConfig::candidate_pool)
        .def_readwrite("refine_top", &BoConfig::refine_top)
        .def_readwrite("refine_steps", &BoConfig::refine_steps)
        .def_readwrite("refit_every_iteration", &BoConfig::refit_every_iteration)
        .def_readwrite("full_ga_protocol", &BoConfig::full_ga_protocol)
        .def_property(
            "max_noise_variance", [](const BoConfig& c) { return std::exp(c.gpr_search.max_log_noise); },
            [](BoConfig& c, double v) { c.gpr_search.max_log_noise = std::log(v); })
        .def_property(
            "fixed_subset",
            [](const BoConfig& c) -> std::optional<std::vector<std::size_t>> {
                if (!c.fixed_subset) return std::nullopt;
                return c.fixed_subset->columns();
            },
            [](BoConfig& c, std::optional<std::vector<std::size_t>> cols) {
                if (!cols)
                    c.fixed_subset.reset();
                else
                    c.fixed_subset = FeatureSubset(*cols, cols->empty() ? 0 : *std::max_element(cols->begin(), cols->end()) + 1);
            })
        .def_readwrite("jobs", &BoConfig::jobs);

    py::class_<BoTrajectory>(m, "BoTrajectory")
        .def_readonly("seed", &BoTrajectory::seed)
        .def_property_readonly("subset", [](const BoTrajectory& t) { return t.subset.columns(); })
        .def_property_readonly("fractions", &records_fractions)
        .def_property_readonly("fom", &records_fom)
        .def("best_curve", &BoTrajectory::best_curve)
        .def("final_best", &BoTrajectory::final_best);
    m.def("run_bo", &run_bo, py::arg("env"), py::arg("table"), py::arg("fom_config"), py::arg("bo_config"),
          py::arg("ga_config"), py::arg("seed") = 0, py::call_guard<py::gil_scoped_release>());

    py::class_<BoSummary>(m, "BoSummary")
        .def_readonly("trajectories", &BoSummary::trajectories)
        .def_readonly("mean_best", &BoSummary::mean_best)
        .def_readonly("std_best", &BoSummary::std_best)
        .def_readonly("final_fom", &BoSummary::final_fom)
        .def_readonly("seeds", &BoSummary::seeds)
        .def("to_json", [](const BoSummary& s, const std::string& label) { return summary_json(s, label).dump(); },
             py::arg("label") = "");
    m.def("run_parallel_bo", &run_parallel_bo, py::arg("env"), py::arg("table"), py::arg("fom_config"),
          py::arg("bo_config"), py::arg("ga_config"), py::arg("base_seed") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("random_search_curve", &random_search_curve, py::arg("env"), py::arg("fom_config"), py::arg("evaluations"),
          py::arg("seed") = 0);

    m.def(
        "pearson_matrix",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return pearson_matrix(a, b).values; }, py::arg("a"),
        py::arg("b"));
    m.def(
        "cosine_similarity_matrix", [](const EmbeddingTable& t) { return cosine_similarity_matrix(t).values; },
        py::arg("table"));

    m.def(
        "welch_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto w = welch_t_test(a, b);
            py::dict d;
            d["t_statistic"] = w.t_statistic;
            d["dof"] = w.dof;
            d["p_greater"] = w.p_greater;
            d["p_two_sided"] = w.p_two_sided;
            return d;
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "f1_weighted",
        [](const std::vector<std::string>& pred, const std::vector<std::string>& truth) {
            return f1_weighted(pred, truth);
        },
        py::arg("pred"), py::arg("truth"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
