#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spmqc/channel.hpp"
#include "spmqc/io.hpp"
#include "spmqc/protocol.hpp"
#include "spmqc/verify.hpp"

namespace {

int run_sweep(const std::string& basis_arg, const std::string& incum_arg,
              const spmqc::io::SweepSpec& base,
              const std::vector<double>& dark_counts,
              const std::string& out_path) {
  spmqc::io::SweepSpec spec = base;
  spec.bases.clear();
  if (basis_arg == "all") {
    spec.bases = {spmqc::channel::Basis::X, spmqc::channel::Basis::Y,
                  spmqc::channel::Basis::Z};
  } else {
    spec.bases = {spmqc::channel::basis_from_string(basis_arg)};
  }
  if (incum_arg == "on") {
    spec.incum_flags = {true};
  } else if (incum_arg == "off") {
    spec.incum_flags = {false};
  } else if (incum_arg == "both") {
    spec.incum_flags = {false, true};
  } else {
    throw std::invalid_argument("--incum must be on, off or both");
  }
  spec.dark_counts = dark_counts;
  if (out_path.empty()) {
    std::cout << spmqc::io::sweep_csv(spec);
  } else {
    spmqc::io::write_sweep_csv(spec, out_path);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int run_simulate(const std::string& config_path, std::uint64_t seed,
                 std::size_t frames_override, const std::string& out_path) {
  spmqc::io::SessionFileConfig file_config =
      spmqc::io::load_session_config(config_path);
  if (frames_override > 0) file_config.frames = frames_override;

  spmqc::protocol::Session session(file_config.session, seed);
  const auto reports = session.run(file_config.frames);

  if (!out_path.empty()) {
    spmqc::io::write_transcript(session, reports, seed, out_path);
    std::cout << "transcript: " << out_path << "\n";
  }
  const auto summary = spmqc::io::summarize_session(session, reports);
  std::cout << summary.text;
  return summary.invariants_ok ? 0 : 1;
}

int run_verify(std::uint64_t seed) {
  const auto checks = spmqc::verify::run_verification(seed);
  bool all_pass = true;
  for (const auto& c : checks) {
    std::printf("[%s] %-60s deviation %.3e (tolerance %.3e)\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.deviation,
                c.tolerance);
    all_pass = all_pass && c.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Analytic model, Monte Carlo engine and self-checks for a "
      "single-photon-memory measurement-device-independent QSDC protocol"};
  app.require_subcommand(1);

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Evaluate the analytic model over a distance grid (CSV)");
  spmqc::io::SweepSpec spec;
  std::string basis_arg = "all";
  std::string incum_arg = "both";
  std::vector<double> dark_counts;
  std::string sweep_out;
  sweep->add_option("--distance-min", spec.d_min, "start of the grid, km");
  sweep->add_option("--distance-max", spec.d_max, "end of the grid, km");
  sweep->add_option("--distance-step", spec.d_step, "grid step, km");
  sweep->add_option("--basis", basis_arg, "x, y, z or all");
  sweep->add_option("--incum", incum_arg, "on, off or both");
  sweep->add_option("--dark-count", dark_counts,
                    "dark-count probability (repeatable)");
  sweep->add_option("--delta", spec.params.delta, "attenuation, dB/km");
  sweep->add_option("--eta-d", spec.params.eta_d, "detector efficiency");
  sweep->add_option("--e0", spec.params.e0, "background error rate");
  sweep->add_option("--e-det", spec.params.e_det, "detector error rate");
  sweep->add_option("--e-d", spec.params.e_d, "misalignment probability");
  sweep->add_option("--out", sweep_out, "output CSV path (default: stdout)");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Run protocol frames end to end from a config file");
  std::string config_path;
  std::uint64_t seed = 1;
  std::size_t frames_override = 0;
  std::string transcript_out;
  simulate->add_option("--config", config_path, "session config (JSON)")
      ->required();
  simulate->add_option("--seed", seed, "session seed");
  simulate->add_option("--frames", frames_override,
                       "override the config's frame count");
  simulate->add_option("--out", transcript_out, "transcript output path");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Run the cross-module oracle self-checks");
  std::uint64_t verify_seed = 20260808;
  verify->add_option("--seed", verify_seed, "seed for the randomized checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      return run_sweep(basis_arg, incum_arg, spec, dark_counts, sweep_out);
    }
    if (simulate->parsed()) {
      return run_simulate(config_path, seed, frames_override, transcript_out);
    }
    if (verify->parsed()) {
      return run_verify(verify_seed);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
