// Python bindings for the dbkf core library.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dbkf/config.hpp"
#include "dbkf/errors.hpp"
#include "dbkf/estimator.hpp"
#include "dbkf/io.hpp"
#include "dbkf/kinematics.hpp"
#include "dbkf/metrics.hpp"
#include "dbkf/simulator.hpp"

namespace py = pybind11;
using namespace dbkf;

namespace {

Eigen::MatrixXd stack(const PositionSeries& p) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(p.size()), 3);
  for (std::size_t i = 0; i < p.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = p[i].transpose();
  return m;
}

PositionSeries unstack(const Eigen::MatrixXd& m) {
  if (m.cols() != 3) throw InvalidArgument("positions must have shape (N, 3)");
  PositionSeries p(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) p[static_cast<std::size_t>(i)] = m.row(i).transpose();
  return p;
}

const LegGeometry& leg_geometry(int leg) {
  static const RobotGeometry geo = RobotGeometry::go2();
  if (leg < 0 || leg >= kNumLegs) throw InvalidArgument("leg index must be 0..3");
  return geo.legs[leg];
}

struct EstimateResult {
  Variant variant;
  Eigen::VectorXd t;
  Eigen::MatrixXd positions;
  Eigen::MatrixXd params;
  std::string csv;
};

EstimateResult run_on(const Simulation& sim, const EstimatorSpec& spec) {
  RobotState x0 = sim.truth.frames.at(0).state;
  x0.gyro_bias.setZero();
  x0.accel_bias.setZero();
  const EstimatorOutput out = run(spec.to_config(), sim.dataset.frames, x0,
                                  LegParams::uniform(spec.initial_calf),
                                  default_initial_covariance());
  EstimateResult r;
  r.variant = out.variant;
  const auto n = static_cast<Eigen::Index>(out.records.size());
  r.t.resize(n);
  r.positions.resize(n, 3);
  r.params.resize(n, kNumLegs);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = out.records[static_cast<std::size_t>(i)];
    r.t[i] = rec.t;
    r.positions.row(i) = rec.state.p.transpose();
    r.params.row(i) = rec.params.calf.transpose();
  }
  r.csv = estimate_csv(out);
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dual beta-Kalman filter: simulation, estimation and evaluation";

  py::register_exception<Error>(m, "DbkfError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<AlignmentError>(m, "AlignmentError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<Quaternion>(m, "Quaternion")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("w"), py::arg("x"), py::arg("y"),
           py::arg("z"))
      .def_property_readonly("w", &Quaternion::w)
      .def_property_readonly("x", &Quaternion::x)
      .def_property_readonly("y", &Quaternion::y)
      .def_property_readonly("z", &Quaternion::z)
      .def("coeffs", &Quaternion::coeffs)
      .def("rotation_matrix", [](const Quaternion& q) { return rotation_matrix(q); })
      .def("__mul__", [](const Quaternion& a, const Quaternion& b) { return quat_mul(a, b); })
      .def("__repr__", [](const Quaternion& q) {
        return "Quaternion(" + std::to_string(q.w()) + ", " + std::to_string(q.x()) + ", " +
               std::to_string(q.y()) + ", " + std::to_string(q.z()) + ")";
      });
  m.def("quat_exp", &quat_exp, py::arg("rotation_vector"));
  m.def("quat_log", &quat_log, py::arg("q"));

  m.def("fk", [](const Vec3& angles, int leg, double lc) { return fk(angles, leg_geometry(leg), lc); },
        py::arg("angles"), py::arg("leg"), py::arg("calf_length") = kNominalCalfLength);
  m.def("leg_jacobian",
        [](const Vec3& angles, int leg, double lc) { return jacobian(angles, leg_geometry(leg), lc); },
        py::arg("angles"), py::arg("leg"), py::arg("calf_length") = kNominalCalfLength);
  m.def("statics_torque",
        [](const Vec3& angles, int leg, double lc, const Vec3& force) {
          return statics_torque(angles, leg_geometry(leg), lc, force);
        },
        py::arg("angles"), py::arg("leg"), py::arg("calf_length"), py::arg("force"));
  m.def("statics_normal_force",
        [](const Vec3& angles, int leg, double lc, const Vec3& torques) {
          return statics_normal_force(angles, leg_geometry(leg), lc, torques);
        },
        py::arg("angles"), py::arg("leg"), py::arg("calf_length"), py::arg("torques"));

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("duration", &ScenarioConfig::duration)
      .def_readwrite("rate", &ScenarioConfig::rate)
      .def_readwrite("mass", &ScenarioConfig::mass)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_property(
          "slip_probability", [](const ScenarioConfig& s) { return s.slip.probability; },
          [](ScenarioConfig& s, double p) { s.slip.probability = p; })
      .def("frame_count", &ScenarioConfig::frame_count)
      .def("validate", &ScenarioConfig::validate);
  m.def("standard_scenario", &standard_scenario);

  py::class_<Simulation>(m, "Simulation")
      .def_property_readonly("num_frames",
                             [](const Simulation& s) { return s.dataset.frames.size(); })
      .def("times",
           [](const Simulation& s) {
             Eigen::VectorXd t(static_cast<Eigen::Index>(s.truth.frames.size()));
             for (std::size_t i = 0; i < s.truth.frames.size(); ++i) {
               t[static_cast<Eigen::Index>(i)] = s.truth.frames[i].t;
             }
             return t;
           })
      .def("truth_positions",
           [](const Simulation& s) {
             PositionSeries p;
             for (const auto& f : s.truth.frames) p.push_back(f.state.p);
             return stack(p);
           })
      .def("truth_params",
           [](const Simulation& s) {
             Eigen::MatrixXd m(static_cast<Eigen::Index>(s.truth.frames.size()), kNumLegs);
             for (std::size_t i = 0; i < s.truth.frames.size(); ++i) {
               m.row(static_cast<Eigen::Index>(i)) = s.truth.frames[i].params.calf.transpose();
             }
             return m;
           })
      .def("sensors_csv", [](const Simulation& s) { return sensors_csv(s.dataset); })
      .def("truth_csv", [](const Simulation& s) { return truth_csv(s.truth); });
  m.def("generate", &generate, py::arg("scenario"), py::call_guard<py::gil_scoped_release>());

  py::enum_<Variant>(m, "Variant")
      .value("QEKF", Variant::QEKF)
      .value("UKF_OR", Variant::UKF_OR)
      .value("DualQEKF", Variant::DualQEKF)
      .value("BetaKF", Variant::BetaKF)
      .value("DualBetaKF", Variant::DualBetaKF)
      .value("IEKF", Variant::IteratedEKF);
  m.def("variant_name", [](Variant v) { return std::string(variant_name(v)); });
  m.def("parse_variant", [](const std::string& s) { return parse_variant(s); });

  py::class_<NoiseSigmas>(m, "NoiseSigmas")
      .def(py::init<>())
      .def_readwrite("meas_position", &NoiseSigmas::meas_position)
      .def_readwrite("meas_velocity", &NoiseSigmas::meas_velocity)
      .def_readwrite("param_walk", &NoiseSigmas::param_walk)
      .def_readwrite("normal_force", &NoiseSigmas::normal_force)
      .def_readwrite("gyro_bias", &NoiseSigmas::gyro_bias)
      .def_readwrite("accel_bias", &NoiseSigmas::accel_bias)
      .def_readwrite("foot", &NoiseSigmas::foot);

  py::class_<EstimatorSpec>(m, "EstimatorSpec")
      .def(py::init([](Variant v, double beta) {
             EstimatorSpec e;
             e.variant = v;
             e.name = std::string(variant_name(v));
             e.beta = beta;
             return e;
           }),
           py::arg("variant"), py::arg("beta") = 1e-3)
      .def_readwrite("name", &EstimatorSpec::name)
      .def_readwrite("variant", &EstimatorSpec::variant)
      .def_readwrite("beta", &EstimatorSpec::beta)
      .def_readwrite("noise", &EstimatorSpec::noise)
      .def_readwrite("threshold", &EstimatorSpec::threshold)
      .def_readwrite("contact_threshold", &EstimatorSpec::contact_threshold)
      .def_readwrite("initial_calf", &EstimatorSpec::initial_calf)
      .def_readwrite("initial_param_std", &EstimatorSpec::initial_param_std);

  py::class_<EstimateResult>(m, "EstimateResult")
      .def_readonly("variant", &EstimateResult::variant)
      .def_readonly("t", &EstimateResult::t)
      .def_readonly("positions", &EstimateResult::positions)
      .def_readonly("params", &EstimateResult::params)
      .def_readonly("csv", &EstimateResult::csv);
  m.def("run_estimator", &run_on, py::arg("simulation"), py::arg("spec"),
        py::call_guard<py::gil_scoped_release>());

  m.def("ate", [](const Eigen::MatrixXd& e, const Eigen::MatrixXd& t) { return ate(unstack(e), unstack(t)); });
  m.def("mpd", [](const Eigen::MatrixXd& e, const Eigen::MatrixXd& t) { return mpd(unstack(e), unstack(t)); });
  m.def("drift_ratio", [](const Eigen::MatrixXd& e, const Eigen::MatrixXd& t) {
    return drift_ratio(unstack(e), unstack(t));
  });

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("output", &RunConfig::output)
      .def_readwrite("seed", &RunConfig::seed)
      .def_property_readonly("has_scenario", [](const RunConfig& c) { return c.scenario.has_value(); })
      .def_property_readonly("estimators", [](const RunConfig& c) { return c.estimators; })
      .def("serialize", &serialize_run_config)
      .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; });
  m.def("parse_run_config", &parse_run_config, py::arg("yaml_text"));
}
