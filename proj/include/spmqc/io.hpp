#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spmqc/channel.hpp"
#include "spmqc/protocol.hpp"

namespace spmqc::io {

/// Distance sweep of the analytic model, flattened to CSV rows.
struct SweepSpec {
  double d_min = 0.0;
  double d_max = 120.0;
  double d_step = 0.5;
  channel::ChannelParams params{};
  std::vector<channel::Basis> bases = {channel::Basis::X, channel::Basis::Y,
                                       channel::Basis::Z};
  std::vector<bool> incum_flags = {false};
  std::vector<double> dark_counts;  // empty: use params.p_d

  void validate() const;
};

extern const char* const kSweepCsvHeader;

/// Full CSV text (header + rows); identical specs produce identical bytes.
/// Row order: dark count, then distance, then basis, then masking flag.
std::string sweep_csv(const SweepSpec& spec);

void write_sweep_csv(const SweepSpec& spec, const std::string& path);

/// Session configuration file (JSON, keys mirror the config structs).
struct SessionFileConfig {
  protocol::SessionConfig session;
  std::size_t frames = 100;
};

SessionFileConfig parse_session_config(const std::string& text);
SessionFileConfig load_session_config(const std::string& path);

/// Line-delimited transcript: one session line, one line per frame report,
/// one line per recorded transmission round.
std::string transcript_text(const protocol::Session& session,
                            const std::vector<protocol::RoundReport>& reports,
                            std::uint64_t seed);

void write_transcript(const protocol::Session& session,
                      const std::vector<protocol::RoundReport>& reports,
                      std::uint64_t seed, const std::string& path);

/// Human-readable session summary; compares the empirical error rates with
/// the analytic model and flags wiretap-condition violations.
struct SessionSummary {
  std::string text;
  bool invariants_ok = true;
};

SessionSummary summarize_session(
    const protocol::Session& session,
    const std::vector<protocol::RoundReport>& reports);

}  // namespace spmqc::io
