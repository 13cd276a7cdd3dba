#include "doctest.h"

#include <stdexcept>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "spmqc/io.hpp"

using namespace spmqc;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

TEST_CASE("sweep header is stable") {
  const std::string csv = io::sweep_csv(io::SweepSpec{.d_max = 1.0});
  const auto lines = split(csv, '\n');
  REQUIRE_FALSE(lines.empty());
  CHECK(lines[0] ==
        "distance_km,basis,incum,p_d,eta_c,G_X,G_Y,G_Z,q_c1,q_c2,Q,qber,"
        "dber_raw,dber,capacity_raw,capacity");
}

TEST_CASE("identical sweep specs serialize identically") {
  io::SweepSpec spec;
  spec.d_max = 10.0;
  spec.incum_flags = {false, true};
  spec.dark_counts = {1e-5, 1e-6};
  const std::string a = io::sweep_csv(spec);
  const std::string b = io::sweep_csv(spec);
  CHECK(a == b);
  CHECK(a.size() > 1000);
}

TEST_CASE("sweep rows re-evaluate to themselves") {
  io::SweepSpec spec;
  spec.d_max = 5.0;
  spec.d_step = 1.0;
  spec.bases = {channel::Basis::Z};
  spec.incum_flags = {false};
  const auto lines = split(io::sweep_csv(spec), '\n');
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = split(lines[i], ',');
    REQUIRE(cols.size() == 16);
    const double d = std::stod(cols[0]);
    const auto point = channel::secrecy_capacity(spec.params, d,
                                                 channel::Basis::Z, false);
    CHECK(std::stod(cols[4]) ==
          doctest::Approx(point.eta_c).epsilon(1e-11));
    CHECK(std::stod(cols[11]) ==
          doctest::Approx(point.qber).epsilon(1e-11));
    CHECK(std::stod(cols[13]) ==
          doctest::Approx(point.dber[channel::Basis::Z]).epsilon(1e-11));
    CHECK(std::stod(cols[15]) ==
          doctest::Approx(point.capacity[channel::Basis::Z]).epsilon(1e-11));
    CHECK(cols[1] == "Z");
    CHECK(cols[2] == "off");
  }
}

TEST_CASE("masked capacity dominates row-wise in the CSV") {
  io::SweepSpec spec;
  spec.d_max = 60.0;
  spec.d_step = 2.0;
  spec.bases = {channel::Basis::X};
  spec.incum_flags = {false, true};
  const auto lines = split(io::sweep_csv(spec), '\n');
  // rows alternate off/on for each distance
  for (std::size_t i = 1; i + 1 < lines.size(); i += 2) {
    if (lines[i].empty() || lines[i + 1].empty()) break;
    const auto off = split(lines[i], ',');
    const auto on = split(lines[i + 1], ',');
    REQUIRE(off[2] == "off");
    REQUIRE(on[2] == "on");
    REQUIRE(off[0] == on[0]);
    CHECK(std::stod(on[15]) >= std::stod(off[15]));
    CHECK(std::stod(on[14]) >= std::stod(off[14]));
  }
}

TEST_CASE("sweep validation rejects bad grids") {
  io::SweepSpec spec;
  spec.d_min = 10.0;
  spec.d_max = 5.0;
  CHECK_THROWS_AS(io::sweep_csv(spec), std::invalid_argument);
  spec.d_min = 0.0;
  spec.d_step = 0.0;
  CHECK_THROWS_AS(io::sweep_csv(spec), std::invalid_argument);
}

TEST_CASE("session config parsing mirrors the struct") {
  const std::string text = R"({
    "delta": 0.21, "p_d": 2e-6, "distance_km": 15.5,
    "check_basis": "Z", "incum": false, "repetition": 5,
    "message_bits": 32, "frames": 7,
    "attack": {"enabled": true, "fraction": 0.5, "target": "Y"}
  })";
  const auto cfg = io::parse_session_config(text);
  CHECK(cfg.session.params.delta == doctest::Approx(0.21));
  CHECK(cfg.session.params.p_d == doctest::Approx(2e-6));
  CHECK(cfg.session.params.eta_d == doctest::Approx(0.6));  // default kept
  CHECK(cfg.session.distance_km == doctest::Approx(15.5));
  CHECK(cfg.session.check_basis == channel::Basis::Z);
  CHECK_FALSE(cfg.session.incum);
  CHECK(cfg.session.repetition == 5);
  CHECK(cfg.session.message_bits == 32);
  CHECK(cfg.frames == 7);
  CHECK(cfg.session.attack.enabled);
  CHECK(cfg.session.attack.fraction == doctest::Approx(0.5));
  CHECK(cfg.session.attack.target == channel::Basis::Y);
}

TEST_CASE("config errors name the offending field") {
  CHECK_THROWS_WITH_AS(io::parse_session_config(R"({"delta": "high"})"),
                       "config.delta: expected a number",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(io::parse_session_config(R"({"response": 1})"),
                       "config.response: unknown key", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      io::parse_session_config(R"({"attack": {"mode": "x"}})"),
      "config.attack.mode: unknown key", std::invalid_argument);
  CHECK_THROWS_AS(io::parse_session_config("not json"),
                  std::invalid_argument);
  // values that parse but violate the contracts are rejected too
  CHECK_THROWS_AS(io::parse_session_config(R"({"repetition": 2})"),
                  std::invalid_argument);
}

TEST_CASE("transcripts are byte-identical for identical runs") {
  protocol::SessionConfig cfg;
  cfg.params.p_d = 0.0;
  cfg.params.e_det = 0.0;
  cfg.params.e_d = 0.0;
  cfg.distance_km = 1.0;
  cfg.message_bits = 8;
  cfg.bootstrap_key_bits = 64;
  cfg.record_transcript = true;
  auto render = [&cfg] {
    protocol::Session session(cfg, 2024);
    const auto reports = session.run(3);
    return io::transcript_text(session, reports, 2024);
  };
  const std::string a = render();
  const std::string b = render();
  CHECK(a == b);
  CHECK(a.find("\"type\":\"session\"") != std::string::npos);
  CHECK(a.find("\"type\":\"frame\"") != std::string::npos);
  CHECK(a.find("\"type\":\"qubit\"") != std::string::npos);
}

TEST_CASE("summary flags a code rate above the wiretap limit") {
  protocol::SessionConfig cfg;  // reference noise parameters
  cfg.distance_km = 30.0;
  cfg.incum = false;
  cfg.message_bits = 8;
  cfg.bootstrap_key_bits = 8 * 32;
  cfg.repetition = 1;  // rate 1 sits far above 1 - h(e) - g h(eps)
  protocol::Session session(cfg, 5);
  const auto reports = session.run(2);
  const auto summary = io::summarize_session(session, reports);
  CHECK(summary.text.find("wiretap") != std::string::npos);
  CHECK(summary.invariants_ok);
}
