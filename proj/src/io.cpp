#include "spmqc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spmqc::io {

namespace {

using nlohmann::json;

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

[[noreturn]] void config_error(const std::string& path,
                               const std::string& what) {
  throw std::invalid_argument("config." + path + ": " + what);
}

double get_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) config_error(key, "expected a number");
  return j.at(key).get<double>();
}

std::int64_t get_integer(const json& j, const std::string& key,
                         std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) config_error(key, "expected an integer");
  return j.at(key).get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) config_error(key, "expected true or false");
  return j.at(key).get<bool>();
}

channel::Basis get_basis(const json& j, const std::string& key,
                         channel::Basis fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) config_error(key, "expected \"X\", \"Y\" or \"Z\"");
  try {
    return channel::basis_from_string(j.at(key).get<std::string>());
  } catch (const std::exception&) {
    config_error(key, "expected \"X\", \"Y\" or \"Z\"");
  }
}

const char* incum_label(bool incum) { return incum ? "on" : "off"; }

json bits_to_json(const protocol::BitVec& bits) {
  std::string s;
  s.reserve(bits.size());
  for (std::uint8_t b : bits) s.push_back(b ? '1' : '0');
  return json(s);
}

}  // namespace

const char* const kSweepCsvHeader =
    "distance_km,basis,incum,p_d,eta_c,G_X,G_Y,G_Z,q_c1,q_c2,Q,qber,"
    "dber_raw,dber,capacity_raw,capacity";

void SweepSpec::validate() const {
  params.validate();
  if (d_min < 0.0 || d_min > d_max) {
    throw std::invalid_argument("sweep: need 0 <= d_min <= d_max");
  }
  if (d_step <= 0.0) {
    throw std::invalid_argument("sweep: d_step must be positive");
  }
  if (bases.empty()) {
    throw std::invalid_argument("sweep: at least one basis required");
  }
  if (incum_flags.empty()) {
    throw std::invalid_argument("sweep: at least one masking flag required");
  }
  for (double p : dark_counts) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("sweep: dark counts must lie in [0, 1]");
    }
  }
}

std::string sweep_csv(const SweepSpec& spec) {
  spec.validate();
  std::vector<double> dark = spec.dark_counts;
  if (dark.empty()) dark.push_back(spec.params.p_d);

  std::string out = kSweepCsvHeader;
  out.push_back('\n');
  for (double p_d : dark) {
    channel::ChannelParams params = spec.params;
    params.p_d = p_d;
    const auto steps = static_cast<std::size_t>(
        std::floor((spec.d_max - spec.d_min) / spec.d_step + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) {
      const double d = spec.d_min + static_cast<double>(i) * spec.d_step;
      const auto point =
          channel::secrecy_capacity(params, d, channel::Basis::X, false);
      for (channel::Basis basis : spec.bases) {
        for (bool incum : spec.incum_flags) {
          const double cap_raw = incum ? point.capacity_incum_raw[basis]
                                       : point.capacity_raw[basis];
          const double cap = incum ? point.capacity_incum[basis]
                                   : point.capacity[basis];
          out += fmt12(d);
          out.push_back(',');
          out += channel::to_string(basis);
          out.push_back(',');
          out += incum_label(incum);
          out.push_back(',');
          out += fmt12(p_d);
          out.push_back(',');
          out += fmt12(point.eta_c);
          out.push_back(',');
          out += fmt12(point.gains[channel::Basis::X]);
          out.push_back(',');
          out += fmt12(point.gains[channel::Basis::Y]);
          out.push_back(',');
          out += fmt12(point.gains[channel::Basis::Z]);
          out.push_back(',');
          out += fmt12(point.q_c1[basis]);
          out.push_back(',');
          out += fmt12(point.q_c2);
          out.push_back(',');
          out += fmt12(point.big_q[basis]);
          out.push_back(',');
          out += fmt12(point.qber);
          out.push_back(',');
          out += fmt12(point.dber_raw[basis]);
          out.push_back(',');
          out += fmt12(point.dber[basis]);
          out.push_back(',');
          out += fmt12(cap_raw);
          out.push_back(',');
          out += fmt12(cap);
          out.push_back('\n');
        }
      }
    }
  }
  return out;
}

void write_sweep_csv(const SweepSpec& spec, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open output file '" + path + "'");
  }
  file << sweep_csv(spec);
  if (!file) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

SessionFileConfig parse_session_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                err.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config: top level must be an object");
  }

  static const std::vector<std::string> known = {
      "delta", "eta_d", "e0", "e_det", "p_d", "e_d",
      "distance_km", "check_basis", "incum", "repetition",
      "check_round_fraction", "integrity_check_fraction",
      "dber_threshold", "qber_threshold", "message_bits",
      "bootstrap_key_bits", "bootstrap_key_seed",
      "bootstrap_capacity_factor", "max_frame_retries",
      "step5_max_attempts", "record_transcript", "attack", "frames"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      config_error(key, "unknown key");
    }
  }

  SessionFileConfig out;
  protocol::SessionConfig& s = out.session;
  s.params.delta = get_number(j, "delta", s.params.delta);
  s.params.eta_d = get_number(j, "eta_d", s.params.eta_d);
  s.params.e0 = get_number(j, "e0", s.params.e0);
  s.params.e_det = get_number(j, "e_det", s.params.e_det);
  s.params.p_d = get_number(j, "p_d", s.params.p_d);
  s.params.e_d = get_number(j, "e_d", s.params.e_d);
  s.distance_km = get_number(j, "distance_km", s.distance_km);
  s.check_basis = get_basis(j, "check_basis", s.check_basis);
  s.incum = get_bool(j, "incum", s.incum);
  s.repetition = static_cast<int>(get_integer(j, "repetition", s.repetition));
  s.check_round_fraction =
      get_number(j, "check_round_fraction", s.check_round_fraction);
  s.integrity_check_fraction =
      get_number(j, "integrity_check_fraction", s.integrity_check_fraction);
  s.dber_threshold = get_number(j, "dber_threshold", s.dber_threshold);
  s.qber_threshold = get_number(j, "qber_threshold", s.qber_threshold);
  s.message_bits = static_cast<std::size_t>(
      get_integer(j, "message_bits", static_cast<std::int64_t>(s.message_bits)));
  s.bootstrap_key_bits = static_cast<std::size_t>(get_integer(
      j, "bootstrap_key_bits", static_cast<std::int64_t>(s.bootstrap_key_bits)));
  s.bootstrap_key_seed = static_cast<std::uint64_t>(get_integer(
      j, "bootstrap_key_seed",
      static_cast<std::int64_t>(s.bootstrap_key_seed)));
  s.bootstrap_capacity_factor =
      get_number(j, "bootstrap_capacity_factor", s.bootstrap_capacity_factor);
  s.max_frame_retries = static_cast<int>(
      get_integer(j, "max_frame_retries", s.max_frame_retries));
  s.step5_max_attempts = static_cast<int>(
      get_integer(j, "step5_max_attempts", s.step5_max_attempts));
  s.record_transcript = get_bool(j, "record_transcript", s.record_transcript);
  if (j.contains("attack")) {
    const json& a = j.at("attack");
    if (!a.is_object()) config_error("attack", "expected an object");
    for (const auto& [key, value] : a.items()) {
      if (key != "enabled" && key != "fraction" && key != "target" &&
          key != "fixed_conjugate") {
        config_error("attack." + key, "unknown key");
      }
    }
    s.attack.enabled = get_bool(a, "enabled", s.attack.enabled);
    s.attack.fraction = get_number(a, "fraction", s.attack.fraction);
    s.attack.target = get_basis(a, "target", s.attack.target);
    s.attack.fixed_conjugate =
        get_bool(a, "fixed_conjugate", s.attack.fixed_conjugate);
  }
  out.frames = static_cast<std::size_t>(
      get_integer(j, "frames", static_cast<std::int64_t>(out.frames)));
  s.validate();
  return out;
}

SessionFileConfig load_session_config(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open config file '" + path + "'");
  }
  std::ostringstream text;
  text << file.rdbuf();
  return parse_session_config(text.str());
}

std::string transcript_text(const protocol::Session& session,
                            const std::vector<protocol::RoundReport>& reports,
                            std::uint64_t seed) {
  const protocol::SessionConfig& cfg = session.config();
  const channel::PerformancePoint& point = session.point();
  std::string out;

  json header;
  header["type"] = "session";
  header["seed"] = seed;
  header["distance_km"] = cfg.distance_km;
  header["check_basis"] = channel::to_string(cfg.check_basis);
  header["incum"] = cfg.incum;
  header["repetition"] = cfg.repetition;
  header["message_bits"] = cfg.message_bits;
  header["codeword_bits"] = session.codeword_bits();
  header["integrity_bits"] = session.integrity_bits();
  header["dber_threshold"] = cfg.resolved_dber_threshold();
  header["qber_threshold"] = cfg.resolved_qber_threshold();
  header["analytic"] = {
      {"eta_c", point.eta_c},
      {"q_c1", point.selected_q_c1()},
      {"q_c2", point.q_c2},
      {"qber", point.qber},
      {"dber_X", point.dber[channel::Basis::X]},
      {"dber_Y", point.dber[channel::Basis::Y]},
      {"dber_Z", point.dber[channel::Basis::Z]},
      {"capacity", point.selected_capacity()}};
  out += header.dump();
  out.push_back('\n');

  for (const auto& r : reports) {
    json line;
    line["type"] = "frame";
    line["frame"] = r.frame_index;
    line["delivered"] = r.delivered;
    line["message_intact"] = r.message_intact;
    line["aborted_at"] = protocol::to_string(r.aborted_at);
    line["passes"] = r.passes;
    line["qber_estimate"] = r.qber_estimate;
    line["dber_estimate"] = {
        {"X", r.dber_estimate[channel::Basis::X]},
        {"Y", r.dber_estimate[channel::Basis::Y]},
        {"Z", r.dber_estimate[channel::Basis::Z]}};
    line["dber_coincidences"] = r.dber_coincidences;
    line["capacity_estimate"] = r.capacity_estimate;
    line["distilled_key_len"] = r.distilled_key_len;
    line["check_rounds"] = r.check_rounds;
    line["message_rounds"] = r.message_rounds;
    line["step5_uses"] = r.step5_uses;
    out += line.dump();
    out.push_back('\n');
  }

  for (const auto& trace : session.traces()) {
    json frame_line;
    frame_line["type"] = "frame_data";
    frame_line["frame"] = trace.frame_index;
    frame_line["pass"] = trace.pass;
    frame_line["delivered"] = trace.delivered;
    frame_line["message"] = bits_to_json(trace.message);
    frame_line["key"] = bits_to_json(trace.key);
    frame_line["ciphertext"] = bits_to_json(trace.ciphertext);
    frame_line["codeword"] = bits_to_json(trace.codeword);
    frame_line["mask"] = bits_to_json(trace.mask);
    frame_line["masked"] = bits_to_json(trace.masked);
    frame_line["check_positions"] = trace.check_positions;
    frame_line["check_bits"] = bits_to_json(trace.check_bits);
    frame_line["position_valid"] = bits_to_json(trace.position_valid);
    frame_line["announced_mask_positions"] = trace.announced_mask_positions;
    out += frame_line.dump();
    out.push_back('\n');

    std::uint64_t seq = 0;
    for (const auto& round : trace.rounds) {
      json q;
      q["type"] = "qubit";
      q["frame"] = trace.frame_index;
      q["pass"] = trace.pass;
      q["seq"] = seq++;
      q["kind"] = round.kind == protocol::RoundKind::Check ? "check"
                                                           : "message";
      q["alice_state"] = round.alice_state;
      q["bob_state"] = round.bob_state;
      if (round.kind == protocol::RoundKind::Check) {
        q["sifted"] = round.sifted;
        q["pair"] = round.pair_index;
        q["error"] = round.error;
        q["attacked"] = round.attacked;
      } else {
        q["bsm"] = round.bsm;
        q["recovery"] = round.recovery;
        q["position"] = round.position;
        q["attempt"] = round.attempt;
        q["encode_op"] = round.encode_op;
        q["mask_bit"] = round.mask_bit;
        q["step5_click"] = round.step5_click;
        q["step5_bit"] = round.step5_bit;
      }
      out += q.dump();
      out.push_back('\n');
    }
  }
  return out;
}

void write_transcript(const protocol::Session& session,
                      const std::vector<protocol::RoundReport>& reports,
                      std::uint64_t seed, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open output file '" + path + "'");
  }
  file << transcript_text(session, reports, seed);
  if (!file) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

SessionSummary summarize_session(
    const protocol::Session& session,
    const std::vector<protocol::RoundReport>& reports) {
  const protocol::SessionConfig& cfg = session.config();
  const channel::PerformancePoint& point = session.point();
  SessionSummary summary;
  std::ostringstream out;

  std::size_t delivered = 0;
  std::size_t intact = 0;
  std::size_t distilled = 0;
  std::array<std::size_t, 5> aborts{};
  double qber_err = 0.0;
  double qber_n = 0.0;
  std::array<double, 3> dber_err{};
  std::array<double, 3> dber_n{};
  for (const auto& r : reports) {
    if (r.delivered) {
      ++delivered;
      if (r.message_intact) ++intact;
      qber_err += r.qber_estimate * static_cast<double>(r.qber_samples);
      qber_n += static_cast<double>(r.qber_samples);
    }
    ++aborts[static_cast<std::size_t>(r.aborted_at)];
    distilled += r.distilled_key_len;
    for (std::size_t u = 0; u < 3; ++u) {
      dber_n[u] += static_cast<double>(r.dber_coincidences[u]);
      dber_err[u] += r.dber_estimate.values[u] *
                     static_cast<double>(r.dber_coincidences[u]);
    }
  }

  out << "frames: " << reports.size() << "  delivered: " << delivered
      << "  intact: " << intact << "\n";
  out << "aborts: security_check="
      << aborts[static_cast<std::size_t>(
             protocol::FrameAbort::SecurityCheck)]
      << " integrity_check="
      << aborts[static_cast<std::size_t>(
             protocol::FrameAbort::IntegrityCheck)]
      << " decode="
      << aborts[static_cast<std::size_t>(protocol::FrameAbort::Decode)]
      << " key_underflow="
      << aborts[static_cast<std::size_t>(protocol::FrameAbort::KeyUnderflow)]
      << "\n";

  if (qber_n > 0) {
    const double mean_qber = qber_err / qber_n;
    const double sigma =
        std::sqrt(std::max(point.qber * (1.0 - point.qber), 1e-12) / qber_n);
    out << "qber: empirical " << fmt12(mean_qber) << " analytic "
        << fmt12(point.qber) << " (" << fmt12(qber_n)
        << " check bits, 3 sigma = " << fmt12(3.0 * sigma) << ")\n";
  }
  for (channel::Basis u : channel::kAllBases) {
    const auto ui = static_cast<std::size_t>(u);
    if (dber_n[ui] > 0) {
      const double est = dber_err[ui] / dber_n[ui];
      const double ana = point.dber[u];
      const double sigma =
          std::sqrt(std::max(ana * (1.0 - ana), 1e-12) / dber_n[ui]);
      out << "dber_" << channel::to_string(u) << ": empirical " << fmt12(est)
          << " analytic " << fmt12(ana) << " (" << fmt12(dber_n[ui])
          << " coincidences, 3 sigma = " << fmt12(3.0 * sigma) << ")\n";
    }
  }
  out << "distilled_keys: " << distilled
      << "  sink_alice: " << session.alice_sink().size()
      << "  sink_bob: " << session.bob_sink().size() << "\n";

  const double wiretap_limit =
      point.selected_big_q() > 0.0
          ? point.selected_capacity() / point.selected_big_q()
          : 0.0;
  const double code_rate = 1.0 / static_cast<double>(cfg.repetition);
  if (code_rate > wiretap_limit) {
    out << "warning: code rate " << fmt12(code_rate)
        << " exceeds the wiretap limit Cs/Q = " << fmt12(wiretap_limit)
        << "\n";
  }
  if (!session.sinks_synced()) {
    out << "error: key sinks diverged\n";
    summary.invariants_ok = false;
  }
  summary.text = out.str();
  return summary;
}

}  // namespace spmqc::io
