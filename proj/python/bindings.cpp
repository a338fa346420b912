#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dyclu/baselines.hpp"
#include "dyclu/config.hpp"
#include "dyclu/dyclu.hpp"
#include "dyclu/environment.hpp"
#include "dyclu/error.hpp"
#include "dyclu/harness.hpp"
#include "dyclu/homogeneity.hpp"
#include "dyclu/numerics.hpp"
#include "dyclu/replay.hpp"
#include "dyclu/rng.hpp"

namespace py = pybind11;
using namespace dyclu;

namespace {

void bind_numerics(py::module_& m) {
  m.def("pseudo_inverse", [](const Matrix& a, double tol) { return pseudo_inverse(a, RankTolerance(tol)); },
        py::arg("m"), py::arg("tol") = 1e-10);
  m.def("numerical_rank", [](const Matrix& a, double tol) { return numerical_rank(a, RankTolerance(tol)); },
        py::arg("m"), py::arg("tol") = 1e-10);
  m.def("min_eigenvalue", &min_eigenvalue, py::arg("m"));
  m.def("central_chi2_cdf", &central_chi2_cdf, py::arg("x"), py::arg("df"));
  m.def("noncentral_chi2_cdf", &noncentral_chi2_cdf, py::arg("x"), py::arg("df"), py::arg("psi"));
  m.def("chi2_quantile", &chi2_quantile, py::arg("p"), py::arg("df"));
  m.def("hoeffding_margin", &hoeffding_margin, py::arg("delta_e"), py::arg("tau"));
  m.def("min_eig_lower_bound", &min_eig_lower_bound, py::arg("n_obs"), py::arg("lambda_prime"),
        py::arg("d"), py::arg("delta_prime"));
}

void bind_homogeneity(py::module_& m) {
  py::class_<Dataset>(m, "Dataset")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def("append", &Dataset::append, py::arg("context"), py::arg("reward"))
      .def_property_readonly("dim", &Dataset::dim)
      .def("__len__", &Dataset::size)
      .def_property_readonly("rank", &Dataset::rank)
      .def_property_readonly("gram", &Dataset::gram)
      .def_property_readonly("moment", &Dataset::moment)
      .def("mle", &Dataset::mle)
      .def("design", &Dataset::design)
      .def("responses", &Dataset::responses)
      .def("fingerprint", &Dataset::fingerprint);

  py::class_<TestStatistic>(m, "TestStatistic")
      .def_readonly("statistic", &TestStatistic::statistic)
      .def_readonly("df", &TestStatistic::df);
  py::class_<TestResult>(m, "TestResult")
      .def_readonly("statistic", &TestResult::statistic)
      .def_readonly("df", &TestResult::df)
      .def_readonly("threshold", &TestResult::threshold)
      .def_readonly("reject", &TestResult::reject);

  m.def("homogeneity_statistic",
        [](const Dataset& a, const Dataset& b, double sigma2) {
          return homogeneity_statistic(a, b, NoiseModel(sigma2));
        },
        py::arg("first"), py::arg("second"), py::arg("sigma2"));
  m.def("homogeneity_test",
        [](const Dataset& a, const Dataset& b, double sigma2, double threshold) {
          return homogeneity_test(a, b, NoiseModel(sigma2), threshold);
        },
        py::arg("first"), py::arg("second"), py::arg("sigma2"), py::arg("threshold"));
  m.def("type1_bound", &type1_bound, py::arg("upsilon"), py::arg("df"));
  m.def("type2_bound",
        [](double upsilon, std::size_t d, double l1, double l2, double gap, double sigma2) {
          return type2_bound(upsilon, d, l1, l2, gap, NoiseModel(sigma2));
        },
        py::arg("upsilon"), py::arg("d"), py::arg("lmin1"), py::arg("lmin2"), py::arg("gap"),
        py::arg("sigma2"));
}

void bind_simulation(py::module_& m) {
  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_static("for_stream", &Rng::for_stream, py::arg("seed"), py::arg("stream"),
                  py::arg("index") = 0)
      .def("next", &Rng::next)
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal)
      .def("below", &Rng::below, py::arg("n"))
      .def("unit_vector", &Rng::unit_vector, py::arg("d"));

  py::class_<DyCluConfig>(m, "DyCluConfig")
      .def_static("with_defaults", &DyCluConfig::with_defaults, py::arg("d"), py::arg("sigma2"))
      .def_readwrite("d", &DyCluConfig::d)
      .def_readwrite("tau", &DyCluConfig::tau)
      .def_readwrite("delta", &DyCluConfig::delta)
      .def_readwrite("delta_e", &DyCluConfig::delta_e)
      .def_readwrite("upsilon_e", &DyCluConfig::upsilon_e)
      .def_readwrite("upsilon_c", &DyCluConfig::upsilon_c)
      .def_readwrite("lambda_", &DyCluConfig::lambda)
      .def_readwrite("sigma2", &DyCluConfig::sigma2)
      .def_readwrite("max_outdated", &DyCluConfig::max_outdated);
  m.def("detection_threshold", &detection_threshold, py::arg("cfg"));

  py::class_<EnvironmentConfig>(m, "EnvironmentConfig")
      .def(py::init<>())
      .def_readwrite("d", &EnvironmentConfig::d)
      .def_readwrite("n_users", &EnvironmentConfig::n_users)
      .def_readwrite("m", &EnvironmentConfig::m)
      .def_readwrite("arm_pool_size", &EnvironmentConfig::arm_pool_size)
      .def_readwrite("candidate_size", &EnvironmentConfig::candidate_size)
      .def_readwrite("horizon", &EnvironmentConfig::horizon)
      .def_readwrite("smin", &EnvironmentConfig::smin)
      .def_readwrite("smax", &EnvironmentConfig::smax)
      .def_readwrite("sigma", &EnvironmentConfig::sigma)
      .def_readwrite("gamma", &EnvironmentConfig::gamma);

  py::class_<EnvSpec>(m, "EnvSpec")
      .def_readonly("seed", &EnvSpec::seed)
      .def_readonly("unique_params", &EnvSpec::unique_params)
      .def_readonly("arm_pool", &EnvSpec::arm_pool)
      .def("param_at",
           [](const EnvSpec& e, std::size_t user, std::size_t local) {
             return e.param_at(UserId(user), local);
           },
           py::arg("user"), py::arg("local_step"))
      .def("to_json", &env_to_json);
  m.def("generate_environment", &generate_environment, py::arg("config"), py::arg("seed"));

  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("environment", &RunSummary::environment)
      .def_readonly("learner", &RunSummary::learner)
      .def_readonly("seed", &RunSummary::seed)
      .def_readonly("final_regret", &RunSummary::final_regret)
      .def_readonly("detections", &RunSummary::detections)
      .def_readonly("mean_neighborhood", &RunSummary::mean_neighborhood)
      .def_readonly("wall_ms", &RunSummary::wall_ms);

  m.def("run_experiment",
        [](const std::string& json_text) {
          const ExperimentConfig cfg = parse_experiment_config(json_text);
          py::gil_scoped_release release;
          return run_experiment(cfg).runs;
        },
        py::arg("config_json"), "Run a config given as JSON text; returns per-run summaries.");
  m.def("summarize", [](const std::filesystem::path& dir) { return summarize(dir).runs; },
        py::arg("dir"));

  m.def("load_replay",
        [](const std::filesystem::path& path) {
          py::list out;
          for (const ReplayEvent& ev : load_replay(path)) {
            out.append(py::make_tuple(ev.user, ev.candidates, ev.chosen, ev.reward));
          }
          return out;
        },
        py::arg("path"), "Logged interactions as (user, candidates, chosen, reward) tuples.");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Clustered piecewise-stationary linear bandits: homogeneity tests, DyClu and baselines";
  py::register_exception<Error>(m, "DycluError", PyExc_RuntimeError);
  bind_numerics(m);
  bind_homogeneity(m);
  bind_simulation(m);
}
