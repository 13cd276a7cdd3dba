#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spmqc/channel.hpp"
#include "spmqc/io.hpp"
#include "spmqc/protocol.hpp"
#include "spmqc/qcore.hpp"
#include "spmqc/security.hpp"
#include "spmqc/verify.hpp"

namespace py = pybind11;

namespace {

py::dict basis_map_to_dict(const spmqc::channel::BasisMap& m) {
  py::dict d;
  for (spmqc::channel::Basis u : spmqc::channel::kAllBases) {
    d[spmqc::channel::to_string(u)] = m[u];
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_spmqc, m) {
  m.doc() =
      "Analytic model and Monte Carlo engine for a single-photon-memory "
      "measurement-device-independent QSDC protocol";

  using namespace spmqc;

  py::enum_<channel::Basis>(m, "Basis")
      .value("X", channel::Basis::X)
      .value("Y", channel::Basis::Y)
      .value("Z", channel::Basis::Z);

  py::class_<channel::ChannelParams>(m, "ChannelParams")
      .def(py::init<>())
      .def_readwrite("delta", &channel::ChannelParams::delta)
      .def_readwrite("eta_d", &channel::ChannelParams::eta_d)
      .def_readwrite("e0", &channel::ChannelParams::e0)
      .def_readwrite("e_det", &channel::ChannelParams::e_det)
      .def_readwrite("p_d", &channel::ChannelParams::p_d)
      .def_readwrite("e_d", &channel::ChannelParams::e_d);

  py::class_<channel::PerformancePoint>(m, "PerformancePoint")
      .def_readonly("distance_km", &channel::PerformancePoint::distance_km)
      .def_readonly("eta_c", &channel::PerformancePoint::eta_c)
      .def_readonly("q_c2", &channel::PerformancePoint::q_c2)
      .def_readonly("qber", &channel::PerformancePoint::qber)
      .def_property_readonly("gains",
                             [](const channel::PerformancePoint& p) {
                               return basis_map_to_dict(p.gains);
                             })
      .def_property_readonly("q_c1",
                             [](const channel::PerformancePoint& p) {
                               return basis_map_to_dict(p.q_c1);
                             })
      .def_property_readonly("big_q",
                             [](const channel::PerformancePoint& p) {
                               return basis_map_to_dict(p.big_q);
                             })
      .def_property_readonly("dber_raw",
                             [](const channel::PerformancePoint& p) {
                               return basis_map_to_dict(p.dber_raw);
                             })
      .def_property_readonly("dber",
                             [](const channel::PerformancePoint& p) {
                               return basis_map_to_dict(p.dber);
                             })
      .def_property_readonly("capacity_raw",
                             [](const channel::PerformancePoint& p) {
                               return basis_map_to_dict(p.capacity_raw);
                             })
      .def_property_readonly("capacity",
                             [](const channel::PerformancePoint& p) {
                               return basis_map_to_dict(p.capacity);
                             })
      .def_property_readonly("capacity_incum",
                             [](const channel::PerformancePoint& p) {
                               return basis_map_to_dict(p.capacity_incum);
                             })
      .def("selected_capacity", &channel::PerformancePoint::selected_capacity);

  m.def("transmittance", &channel::transmittance, py::arg("params"),
        py::arg("distance_km"));
  m.def("binary_entropy", &channel::binary_entropy, py::arg("p"));
  m.def("qber", &channel::qber, py::arg("params"), py::arg("eta_c"));
  m.def("gain", &channel::gain, py::arg("basis"), py::arg("eta_c"),
        py::arg("p_d"));
  m.def(
      "dber",
      [](channel::Basis basis, const channel::ChannelParams& params,
         double eta_c) { return channel::dber(basis, params, eta_c); },
      py::arg("basis"), py::arg("params"), py::arg("eta_c"));
  m.def("secrecy_capacity", &channel::secrecy_capacity, py::arg("params"),
        py::arg("distance_km"), py::arg("check_basis"), py::arg("incum"));

  m.def("holevo_bound", &security::holevo_bound, py::arg("basis"),
        py::arg("epsilon"));
  m.def(
      "gram_eigenvalues",
      [](channel::Basis basis, double epsilon) {
        const auto eigs =
            security::eigenvalues(security::gram_matrix(basis, epsilon));
        return std::vector<double>(eigs.begin(), eigs.end());
      },
      py::arg("basis"), py::arg("epsilon"));

  m.def(
      "prepare_state",
      [](const std::string& label) {
        return qcore::prepare_state(label).amplitudes();
      },
      py::arg("label"));
  m.def(
      "teleport_outcome",
      [](const std::string& bob_initial, int outcome) {
        const auto r = qcore::teleport_oracle(
            bob_initial, static_cast<qcore::BellOutcome>(outcome));
        py::dict d;
        d["label"] = r.label;
        d["phase"] = r.phase;
        d["amplitudes"] = r.state.amplitudes();
        return d;
      },
      py::arg("bob_initial"), py::arg("bell_outcome"));

  py::class_<protocol::AttackConfig>(m, "AttackConfig")
      .def(py::init<>())
      .def_readwrite("enabled", &protocol::AttackConfig::enabled)
      .def_readwrite("fraction", &protocol::AttackConfig::fraction)
      .def_readwrite("target", &protocol::AttackConfig::target)
      .def_readwrite("fixed_conjugate",
                     &protocol::AttackConfig::fixed_conjugate);

  py::class_<protocol::SessionConfig>(m, "SessionConfig")
      .def(py::init<>())
      .def_readwrite("params", &protocol::SessionConfig::params)
      .def_readwrite("distance_km", &protocol::SessionConfig::distance_km)
      .def_readwrite("check_basis", &protocol::SessionConfig::check_basis)
      .def_readwrite("incum", &protocol::SessionConfig::incum)
      .def_readwrite("repetition", &protocol::SessionConfig::repetition)
      .def_readwrite("check_round_fraction",
                     &protocol::SessionConfig::check_round_fraction)
      .def_readwrite("integrity_check_fraction",
                     &protocol::SessionConfig::integrity_check_fraction)
      .def_readwrite("dber_threshold",
                     &protocol::SessionConfig::dber_threshold)
      .def_readwrite("qber_threshold",
                     &protocol::SessionConfig::qber_threshold)
      .def_readwrite("message_bits", &protocol::SessionConfig::message_bits)
      .def_readwrite("bootstrap_key_bits",
                     &protocol::SessionConfig::bootstrap_key_bits)
      .def_readwrite("bootstrap_key_seed",
                     &protocol::SessionConfig::bootstrap_key_seed)
      .def_readwrite("bootstrap_capacity_factor",
                     &protocol::SessionConfig::bootstrap_capacity_factor)
      .def_readwrite("max_frame_retries",
                     &protocol::SessionConfig::max_frame_retries)
      .def_readwrite("step5_max_attempts",
                     &protocol::SessionConfig::step5_max_attempts)
      .def_readwrite("record_transcript",
                     &protocol::SessionConfig::record_transcript)
      .def_readwrite("attack", &protocol::SessionConfig::attack);

  m.def(
      "run_session",
      [](const protocol::SessionConfig& config, std::size_t n_frames,
         std::uint64_t seed) {
        const auto reports = protocol::run_session(config, n_frames, seed);
        py::list out;
        for (const auto& r : reports) {
          py::dict d;
          d["frame"] = r.frame_index;
          d["delivered"] = r.delivered;
          d["message_intact"] = r.message_intact;
          d["aborted_at"] = protocol::to_string(r.aborted_at);
          d["passes"] = r.passes;
          d["qber_estimate"] = r.qber_estimate;
          d["dber_estimate"] = basis_map_to_dict(r.dber_estimate);
          d["capacity_estimate"] = r.capacity_estimate;
          d["distilled_key_len"] = r.distilled_key_len;
          d["check_rounds"] = r.check_rounds;
          d["message_rounds"] = r.message_rounds;
          d["step5_uses"] = r.step5_uses;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("n_frames"), py::arg("seed"));

  m.def(
      "sweep_csv",
      [](const channel::ChannelParams& params, double d_min, double d_max,
         double d_step) {
        io::SweepSpec spec;
        spec.params = params;
        spec.d_min = d_min;
        spec.d_max = d_max;
        spec.d_step = d_step;
        spec.incum_flags = {false, true};
        return io::sweep_csv(spec);
      },
      py::arg("params"), py::arg("d_min") = 0.0, py::arg("d_max") = 120.0,
      py::arg("d_step") = 0.5);

  m.def("verify", [](std::uint64_t seed) {
    py::list out;
    for (const auto& c : verify::run_verification(seed)) {
      py::dict d;
      d["name"] = c.name;
      d["deviation"] = c.deviation;
      d["tolerance"] = c.tolerance;
      d["pass"] = c.pass;
      out.append(d);
    }
    return out;
  }, py::arg("seed") = 20260808);
}
