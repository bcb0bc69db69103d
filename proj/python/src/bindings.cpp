#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "distfor/archive.hpp"
#include "distfor/emos.hpp"
#include "distfor/eval.hpp"
#include "distfor/forest.hpp"
#include "distfor/mle.hpp"
#include "distfor/synthetic.hpp"

namespace py = pybind11;
using namespace distfor;

namespace {

py::array_t<double> params_to_array(const std::vector<ParamVector>& params) {
    py::array_t<double> out({static_cast<py::ssize_t>(params.size()), static_cast<py::ssize_t>(2)});
    auto r = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < params.size(); ++i) {
        r(static_cast<py::ssize_t>(i), 0) = params[i].location();
        r(static_cast<py::ssize_t>(i), 1) = params[i].scale();
    }
    return out;
}

std::vector<ParamVector> params_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw DataError("parameter array must have shape (n, 2)");
    auto r = a.unchecked<2>();
    std::vector<ParamVector> out;
    out.reserve(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) out.push_back(ParamVector{r(i, 0), r(i, 1)});
    return out;
}

ForestConfig config_from_kwargs(int ntree, int mtry, double subsample, int minsplit, int minbucket, double alpha,
                                const std::string& statistic, std::uint64_t seed) {
    ForestConfig cfg;
    cfg.ntree = ntree;
    cfg.mtry = mtry;
    cfg.subsample_fraction = subsample;
    cfg.minsplit = minsplit;
    cfg.minbucket = minbucket;
    cfg.alpha = alpha;
    if (statistic == "quad") cfg.statistic = TestStatistic::quad;
    else if (statistic == "max") cfg.statistic = TestStatistic::max;
    else throw ConfigError("statistic must be 'quad' or 'max'");
    cfg.seed = seed;
    return cfg;
}

FittedModel make_model(ModelKind kind, std::shared_ptr<const DistributionFamily> family, const Dataset& ds) {
    FittedModel model;
    model.kind = kind;
    model.family = std::move(family);
    model.schema = ds.column_specs();
    model.response_name = ds.response_name;
    model.data_fingerprint = dataset_fingerprint(ds);
    return model;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Distributional regression forests for zero-censored responses";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

    // ------------------------------- families -------------------------------
    py::class_<DistributionFamily, std::shared_ptr<DistributionFamily>>(m, "Family")
        .def_property_readonly("name", [](const DistributionFamily& f) { return std::string(f.name()); })
        .def_property_readonly("censoring_point", &DistributionFamily::censoring_point)
        .def("loglik", [](const DistributionFamily& f, double mu, double sigma,
                          double y) { return f.loglik(ParamVector{mu, sigma}, y); })
        .def("score", [](const DistributionFamily& f, double mu, double sigma,
                         double y) { return f.score(ParamVector{mu, sigma}, y); })
        .def("cdf", [](const DistributionFamily& f, double mu, double sigma,
                       double y) { return f.cdf(ParamVector{mu, sigma}, y); })
        .def("quantile", [](const DistributionFamily& f, double mu, double sigma,
                            double p) { return f.quantile(ParamVector{mu, sigma}, p); })
        .def("crps", [](const DistributionFamily& f, double mu, double sigma,
                        double y) { return f.crps(ParamVector{mu, sigma}, y); })
        .def("prob_censored", [](const DistributionFamily& f, double mu,
                                 double sigma) { return f.prob_censored(ParamVector{mu, sigma}); })
        .def("sample",
             [](const DistributionFamily& f, double mu, double sigma, int n, std::uint64_t seed) {
                 Rng rng(seed);
                 py::array_t<double> out({static_cast<py::ssize_t>(n)});
                 auto r = out.mutable_unchecked<1>();
                 for (int i = 0; i < n; ++i) r(i) = f.sample(ParamVector{mu, sigma}, rng);
                 return out;
             },
             py::arg("mu"), py::arg("sigma"), py::arg("n"), py::arg("seed") = 1);

    m.def("family", [](const std::string& name, double censoring) {
              return std::const_pointer_cast<DistributionFamily>(make_family(name, censoring));
          },
          py::arg("name") = "cgaussian", py::arg("censoring") = 0.0);

    // --------------------------------- MLE ---------------------------------
    m.def("fit_mle",
          [](const DistributionFamily& family, const std::vector<double>& y, const std::vector<double>& w) {
              const FitResult r = fit(family, WeightedSample{y, w});
              py::dict out;
              out["mu"] = r.theta.location();
              out["sigma"] = r.theta.scale();
              out["loglik"] = r.loglik_value;
              out["iterations"] = r.iterations;
              out["converged"] = r.converged;
              out["gradient_norm"] = r.gradient_norm;
              return out;
          },
          py::arg("family"), py::arg("y"), py::arg("weights") = std::vector<double>{});

    // -------------------------------- dataset --------------------------------
    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("n", &Dataset::n)
        .def_property_readonly("m", &Dataset::m)
        .def_property_readonly("response", [](const Dataset& d) { return d.y; })
        .def_property_readonly("column_names",
                               [](const Dataset& d) {
                                   std::vector<std::string> names;
                                   for (const Covariate& c : d.covariates) names.push_back(c.name);
                                   return names;
                               })
        .def("numeric_column",
             [](const Dataset& d, const std::string& name) {
                 const int j = d.covariate_index(name);
                 if (j < 0) throw DataError("no covariate named '" + name + "'");
                 if (d.covariate(j).kind != ColumnKind::numeric) throw DataError("column is categorical");
                 return d.covariate(j).numeric;
             })
        .def("save_csv", [](const Dataset& d, const std::string& path) { save_csv(d, path); });

    m.def("load_csv",
          [](const std::string& path, const std::string& response, const std::vector<std::string>& categorical,
             const std::string& missing, const std::string& delimiter, const std::string& group_key,
             const std::string& weight_column, const std::vector<std::string>& transform_columns,
             double transform_exponent) {
              Schema schema;
              schema.response = response;
              schema.categorical = categorical;
              schema.missing_token = missing;
              if (delimiter.size() != 1) throw ConfigError("delimiter must be a single character");
              schema.delimiter = delimiter[0];
              schema.group_key = group_key;
              schema.weight_column = weight_column;
              schema.transform.columns = transform_columns;
              schema.transform.exponent = transform_exponent;
              return load_csv(path, schema, !response.empty());
          },
          py::arg("path"), py::arg("response") = "y", py::arg("categorical") = std::vector<std::string>{},
          py::arg("missing") = "NA", py::arg("delimiter") = ",", py::arg("group_key") = "",
          py::arg("weight_column") = "", py::arg("transform_columns") = std::vector<std::string>{},
          py::arg("transform_exponent") = 1.0 / 1.6);

    m.def("dataset_from_arrays",
          [](const std::vector<double>& y, const std::vector<std::string>& names,
             const std::vector<std::vector<double>>& columns) {
              if (names.size() != columns.size()) throw DataError("names and columns differ in length");
              Dataset ds;
              ds.y = y;
              for (std::size_t j = 0; j < names.size(); ++j) {
                  if (columns[j].size() != y.size()) throw DataError("column length mismatch");
                  Covariate cov;
                  cov.name = names[j];
                  cov.kind = ColumnKind::numeric;
                  cov.numeric = columns[j];
                  ds.covariates.push_back(std::move(cov));
              }
              return ds;
          },
          py::arg("y"), py::arg("names"), py::arg("columns"));

    m.def("generate_scenario",
          [](const std::string& kind, int n, int m_noise, std::uint64_t seed, py::kwargs kwargs) {
              SyntheticScenario sc;
              sc.kind = scenario_kind_from_string(kind);
              sc.n = n;
              sc.m_noise = m_noise;
              sc.seed = seed;
              for (auto item : kwargs) {
                  const std::string key = py::cast<std::string>(item.first);
                  const double value = py::cast<double>(item.second);
                  if (key == "changepoint") sc.changepoint = value;
                  else if (key == "mu_low") sc.mu_low = value;
                  else if (key == "mu_high") sc.mu_high = value;
                  else if (key == "sigma_low") sc.sigma_low = value;
                  else if (key == "sigma_high") sc.sigma_high = value;
                  else if (key == "mu") sc.mu_const = value;
                  else if (key == "sigma") sc.sigma_const = value;
                  else if (key == "beta0") sc.beta0 = value;
                  else if (key == "beta1") sc.beta1 = value;
                  else if (key == "gamma0") sc.gamma0 = value;
                  else if (key == "gamma1") sc.gamma1 = value;
                  else throw ConfigError("unknown scenario parameter '" + key + "'");
              }
              GeneratedData g = generate(sc);
              return py::make_tuple(std::move(g.data), g.true_mu, g.true_sigma);
          },
          py::arg("kind"), py::arg("n"), py::arg("m_noise") = 0, py::arg("seed") = 1);

    // --------------------------------- models ---------------------------------
    py::class_<FittedModel>(m, "Model")
        .def_property_readonly("kind", [](const FittedModel& model) { return to_string(model.kind); })
        .def_property_readonly("family", [](const FittedModel& model) { return std::string(model.family->name()); })
        .def("predict",
             [](const FittedModel& model, const Dataset& ds, int workers) {
                 return params_to_array(model.predict(ds, workers));
             },
             py::arg("dataset"), py::arg("workers") = 1)
        .def("prob_zero",
             [](const FittedModel& model, const Dataset& ds, int workers) {
                 const std::vector<ParamVector> p = model.predict(ds, workers);
                 py::array_t<double> out({static_cast<py::ssize_t>(p.size())});
                 auto r = out.mutable_unchecked<1>();
                 for (std::size_t i = 0; i < p.size(); ++i)
                     r(static_cast<py::ssize_t>(i)) = model.family->prob_censored(p[i]);
                 return out;
             },
             py::arg("dataset"), py::arg("workers") = 1)
        .def("predict_quantiles",
             [](const FittedModel& model, const Dataset& ds, const std::vector<double>& probs, int workers) {
                 const std::vector<ParamVector> p = model.predict(ds, workers);
                 py::array_t<double> out(
                     {static_cast<py::ssize_t>(p.size()), static_cast<py::ssize_t>(probs.size())});
                 auto r = out.mutable_unchecked<2>();
                 for (std::size_t i = 0; i < p.size(); ++i)
                     for (std::size_t q = 0; q < probs.size(); ++q)
                         r(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(q)) =
                             model.family->quantile(p[i], probs[q]);
                 return out;
             },
             py::arg("dataset"), py::arg("probs") = std::vector<double>{0.1, 0.5, 0.9}, py::arg("workers") = 1)
        .def("forest_weights",
             [](const FittedModel& model, const Dataset& ds, int row) {
                 if (!model.forest) throw ConfigError("not a forest model");
                 return model.forest->weights(ds, row);
             })
        .def_property_readonly("n_trees",
                               [](const FittedModel& model) {
                                   return model.forest ? static_cast<int>(model.forest->trees.size()) : 0;
                               })
        .def_property_readonly("mean_depth",
                               [](const FittedModel& model) { return model.forest ? model.forest->mean_depth() : 0.0; })
        .def_property_readonly("mean_leaves",
                               [](const FittedModel& model) { return model.forest ? model.forest->mean_leaves() : 0.0; })
        .def("save", [](const FittedModel& model, const std::string& path, bool slim) {
                 save_model(slim ? make_slim(model) : model, path);
             },
             py::arg("path"), py::arg("slim") = false)
        .def("serialize", [](const FittedModel& model) { return serialize_model(model); });

    m.def("fit_forest",
          [](const Dataset& ds, const std::string& family_name, double censoring, int ntree, int mtry,
             double subsample, int minsplit, int minbucket, double alpha, const std::string& statistic,
             std::uint64_t seed, int workers) {
              auto family = make_family(family_name, censoring);
              FittedModel model = make_model(ModelKind::forest, family, ds);
              model.forest = grow_forest(
                  ds, family, config_from_kwargs(ntree, mtry, subsample, minsplit, minbucket, alpha, statistic, seed),
                  workers);
              return model;
          },
          py::arg("dataset"), py::arg("family") = "cgaussian", py::arg("censoring") = 0.0, py::arg("ntree") = 100,
          py::arg("mtry") = 0, py::arg("subsample") = 0.632, py::arg("minsplit") = 50, py::arg("minbucket") = 20,
          py::arg("alpha") = 1.0, py::arg("statistic") = "quad", py::arg("seed") = 1, py::arg("workers") = 1);

    m.def("fit_tree",
          [](const Dataset& ds, const std::string& family_name, double censoring, int minsplit, int minbucket,
             double alpha, const std::string& statistic, std::uint64_t seed) {
              auto family = make_family(family_name, censoring);
              FittedModel model = make_model(ModelKind::tree, family, ds);
              ForestConfig cfg = config_from_kwargs(1, ds.m(), 1.0, minsplit, minbucket, alpha, statistic, seed);
              model.forest = grow_forest(ds, family, cfg, 1);
              return model;
          },
          py::arg("dataset"), py::arg("family") = "cgaussian", py::arg("censoring") = 0.0, py::arg("minsplit") = 50,
          py::arg("minbucket") = 20, py::arg("alpha") = 0.05, py::arg("statistic") = "quad", py::arg("seed") = 1);

    m.def("fit_emos",
          [](const Dataset& ds, const std::string& loc_column, const std::string& scale_column,
             const std::string& family_name, double censoring, const std::string& scale_transform) {
              auto family = make_family(family_name, censoring);
              FittedModel model = make_model(ModelKind::emos, family, ds);
              EmosOptions opts;
              if (scale_transform == "log") opts.scale_transform = ScaleTransform::log_input;
              else if (scale_transform == "identity") opts.scale_transform = ScaleTransform::identity;
              else throw ConfigError("scale_transform must be 'log' or 'identity'");
              model.emos = fit_emos(ds, *family, loc_column, scale_column, opts);
              return model;
          },
          py::arg("dataset"), py::arg("loc_column"), py::arg("scale_column"), py::arg("family") = "cgaussian",
          py::arg("censoring") = 0.0, py::arg("scale_transform") = "log");

    m.def("fit_intercept",
          [](const Dataset& ds, const std::string& family_name, double censoring) {
              auto family = make_family(family_name, censoring);
              FittedModel model = make_model(ModelKind::intercept, family, ds);
              model.intercept = fit(*family, WeightedSample{ds.y, ds.weights}).theta;
              return model;
          },
          py::arg("dataset"), py::arg("family") = "cgaussian", py::arg("censoring") = 0.0);

    m.def("load_model", &load_model, py::arg("path"));

    // -------------------------------- evaluation --------------------------------
    m.def("mean_crps",
          [](const DistributionFamily& family, const py::array_t<double, py::array::c_style | py::array::forcecast>& params,
             const std::vector<double>& y) { return mean_crps(family, params_from_array(params), y); },
          py::arg("family"), py::arg("params"), py::arg("y"));

    m.def("crpss", &crpss, py::arg("method_mean_crps"), py::arg("reference_mean_crps"));

    m.def("variable_importance",
          [](const FittedModel& model, const Dataset& test, std::uint64_t seed, int n_permutations, int workers) {
              if (!model.forest) throw ConfigError("importance needs a forest or tree model");
              Rng rng(seed);
              const std::vector<ImportanceEntry> imp =
                  variable_importance(*model.forest, test, rng, n_permutations, workers);
              std::vector<std::pair<std::string, double>> out;
              out.reserve(imp.size());
              for (const ImportanceEntry& e : imp) out.emplace_back(e.variable, e.delta_crps);
              return out;
          },
          py::arg("model"), py::arg("test"), py::arg("seed") = 1, py::arg("n_permutations") = 5,
          py::arg("workers") = 1);

    m.def("quantile_residuals",
          [](const DistributionFamily& family, const py::array_t<double, py::array::c_style | py::array::forcecast>& params,
             const std::vector<double>& y, std::uint64_t seed, int n_draws) {
              Rng rng(seed);
              const QuantileResidualReport rep = quantile_residuals(family, params_from_array(params), y, rng, n_draws);
              const py::ssize_t n = static_cast<py::ssize_t>(rep.residuals.size());
              py::array_t<double> residuals({n, static_cast<py::ssize_t>(n_draws)});
              py::array_t<double> pit({n, static_cast<py::ssize_t>(n_draws)});
              auto rr = residuals.mutable_unchecked<2>();
              auto rp = pit.mutable_unchecked<2>();
              for (py::ssize_t i = 0; i < n; ++i)
                  for (py::ssize_t d = 0; d < n_draws; ++d) {
                      rr(i, d) = rep.residuals[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
                      rp(i, d) = rep.pit[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
                  }
              return py::make_tuple(residuals, pit, rep.clamped);
          },
          py::arg("family"), py::arg("params"), py::arg("y"), py::arg("seed") = 1, py::arg("n_draws") = 100);
}
