#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spmqc::verify {

/// One self-check: a named deviation measured against its tolerance.
struct Check {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Cross-module oracle suite: the teleportation correspondence table, the
/// recovery-operation soundness search, the entropy closed form of the
/// Gram-matrix chain, the two routes to the coincidence probabilities, and
/// seeded Monte-Carlo-versus-analytic agreement.
std::vector<Check> run_verification(std::uint64_t seed);

}  // namespace spmqc::verify
