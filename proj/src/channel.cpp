#include "spmqc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spmqc::channel {

namespace {

void require_probability(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(name) +
                                " must lie in [0, 1], got " +
                                std::to_string(value));
  }
}

// Terms shared by every coincidence expression: two dark counts on an empty
// pair, and one surviving photon assisted by one dark count.
double base_terms(double eta_c, double p_d) {
  const double miss = 1.0 - eta_c;
  const double quiet = (1.0 - p_d) * (1.0 - p_d);
  return miss * miss * p_d * p_d * quiet + miss * eta_c * p_d * quiet;
}

enum class ComboKind { OppositePol, SamePol };

ComboKind combo_kind(Pol a, Pol b) { return a == b ? ComboKind::SamePol
                                                   : ComboKind::OppositePol; }

// Conditional two-fold click probability when both photons arrive,
// p_ij(1,1), for same-basis inputs. The Z basis has no pair dependence; in
// the diagonal (and circular) basis the interference term lands on the
// cross pairs for opposite polarizations and on the shared-port pairs for
// equal polarizations.
double both_arrive_term(ClickPair pair, Pol pol_a, Pol pol_b, double p_d) {
  const double quiet = (1.0 - p_d) * (1.0 - p_d);
  const Basis basis = basis_of(pol_a);
  const ComboKind kind = combo_kind(pol_a, pol_b);
  if (basis == Basis::Z) {
    return kind == ComboKind::OppositePol ? 0.25 * quiet
                                          : 0.5 * p_d * quiet;
  }
  const bool interference =
      (kind == ComboKind::OppositePol) == is_cross_pair(pair);
  return interference ? 0.25 * (p_d + 1.0) * quiet : 0.25 * p_d * quiet;
}

double check_pair_inputs(ClickPair pair, Pol pol_a, Pol pol_b) {
  if (!is_coincidence_pair(pair)) {
    throw std::invalid_argument("pair_click_prob: not a coincidence pair");
  }
  if (basis_of(pol_a) != basis_of(pol_b)) {
    throw std::invalid_argument(
        "pair_click_prob: polarizations must share a basis");
  }
  return 0.0;
}

}  // namespace

const char* to_string(Basis basis) {
  switch (basis) {
    case Basis::X: return "X";
    case Basis::Y: return "Y";
    case Basis::Z: return "Z";
  }
  return "?";
}

Basis basis_from_string(std::string_view name) {
  if (name == "X" || name == "x") return Basis::X;
  if (name == "Y" || name == "y") return Basis::Y;
  if (name == "Z" || name == "z") return Basis::Z;
  throw std::invalid_argument("unknown basis '" + std::string(name) + "'");
}

void ChannelParams::validate() const {
  if (delta < 0.0) {
    throw std::invalid_argument("delta must be non-negative");
  }
  require_probability(eta_d, "eta_d");
  require_probability(e0, "e0");
  require_probability(e_det, "e_det");
  require_probability(p_d, "p_d");
  require_probability(e_d, "e_d");
}

bool is_coincidence_pair(ClickPair pair) {
  return std::find(kCoincidencePairs.begin(), kCoincidencePairs.end(), pair) !=
         kCoincidencePairs.end();
}

bool is_cross_pair(ClickPair pair) {
  return pair == ClickPair{1, 4} || pair == ClickPair{2, 3};
}

Basis basis_of(Pol pol) {
  switch (pol) {
    case Pol::H:
    case Pol::V:
      return Basis::Z;
    case Pol::DiagPlus:
    case Pol::DiagMinus:
      return Basis::X;
    case Pol::CircPlus:
    case Pol::CircMinus:
      return Basis::Y;
  }
  throw std::invalid_argument("basis_of: unknown polarization");
}

Pol pol_eigenstate(Basis basis, int bit) {
  switch (basis) {
    case Basis::Z: return bit ? Pol::V : Pol::H;
    case Basis::X: return bit ? Pol::DiagMinus : Pol::DiagPlus;
    case Basis::Y: return bit ? Pol::CircMinus : Pol::CircPlus;
  }
  throw std::invalid_argument("pol_eigenstate: unknown basis");
}

const char* to_string(Pol pol) {
  switch (pol) {
    case Pol::H: return "H";
    case Pol::V: return "V";
    case Pol::DiagPlus: return "+";
    case Pol::DiagMinus: return "-";
    case Pol::CircPlus: return "~+";
    case Pol::CircMinus: return "~-";
  }
  return "?";
}

double transmittance(const ChannelParams& params, double distance_km) {
  if (distance_km < 0.0) {
    throw std::invalid_argument("transmittance: negative distance");
  }
  return params.eta_d * std::pow(10.0, -params.delta * distance_km / 10.0);
}

double pair_click_prob(ClickPair pair, Pol pol_a, Pol pol_b, double eta_c,
                       double p_d) {
  check_pair_inputs(pair, pol_a, pol_b);
  return base_terms(eta_c, p_d) +
         eta_c * eta_c * both_arrive_term(pair, pol_a, pol_b, p_d);
}

double pair_click_prob_expanded(ClickPair pair, Pol pol_a, Pol pol_b,
                                double eta_c, double p_d) {
  check_pair_inputs(pair, pol_a, pol_b);
  const double quiet = (1.0 - p_d) * (1.0 - p_d);
  // Binomial expansion over the numbers of surviving photons (k1, k2) for
  // single-photon sources, with conditional click probabilities
  //   p(0,0) = p_d^2 (1-p_d)^2, p(0,1) = p(1,0) = p_d (1-p_d)^2 / 2,
  // and p(1,1) depending on the polarization combination and the pair.
  const double p00 = p_d * p_d * quiet;
  const double p01 = 0.5 * p_d * quiet;
  const double p11 = both_arrive_term(pair, pol_a, pol_b, p_d);
  const double miss = 1.0 - eta_c;
  double total = 0.0;
  total += miss * miss * p00;
  total += miss * eta_c * p01;
  total += eta_c * miss * p01;
  total += eta_c * eta_c * p11;
  return total;
}

bool is_error_coincidence(ClickPair pair, Pol pol_a, Pol pol_b) {
  if (basis_of(pol_a) != basis_of(pol_b)) {
    throw std::invalid_argument(
        "is_error_coincidence: polarizations must share a basis");
  }
  if (basis_of(pol_a) == Basis::Z) {
    return pol_a == pol_b;
  }
  // Diagonal/circular bases: equal polarizations must not fire cross pairs,
  // opposite polarizations must not fire shared-port pairs.
  if (pol_a == pol_b) return is_cross_pair(pair);
  return !is_cross_pair(pair);
}

double gain(Basis basis, double eta_c, double p_d) {
  const Pol z0 = pol_eigenstate(basis, 0);
  const Pol z1 = pol_eigenstate(basis, 1);
  double sum = 0.0;
  for (ClickPair pair : kCoincidencePairs) {
    sum += pair_click_prob(pair, z0, z1, eta_c, p_d);
    sum += pair_click_prob(pair, z1, z0, eta_c, p_d);
    sum += pair_click_prob(pair, z0, z0, eta_c, p_d);
    sum += pair_click_prob(pair, z1, z1, eta_c, p_d);
  }
  return 0.25 * sum;
}

double click_rate_1(Basis check_basis, double eta_c, double p_d) {
  double others = 0.0;
  for (Basis b : kAllBases) {
    if (b != check_basis) others += gain(b, eta_c, p_d);
  }
  return eta_c / 3.0 * others;
}

double click_rate_2(double eta_c, double p_d) {
  return eta_c + (1.0 - eta_c) * p_d;
}

double qber(const ChannelParams& params, double eta_c) {
  const double denom = eta_c + (1.0 - eta_c) * params.p_d;
  if (denom <= 0.0) {
    throw std::domain_error("qber: no clicks (eta_c and p_d both zero)");
  }
  return (params.e0 * params.p_d + params.e_det * eta_c) / denom;
}

double dber_raw(Basis basis, double eta_c, double p_d) {
  const double g = gain(basis, eta_c, p_d);
  if (g <= 0.0) {
    throw std::domain_error("dber_raw: zero gain");
  }
  const Pol z0 = pol_eigenstate(basis, 0);
  const Pol z1 = pol_eigenstate(basis, 1);
  double wrong = 0.0;
  for (ClickPair pair : kCoincidencePairs) {
    for (Pol a : {z0, z1}) {
      for (Pol b : {z0, z1}) {
        if (is_error_coincidence(pair, a, b)) {
          wrong += pair_click_prob(pair, a, b, eta_c, p_d);
        }
      }
    }
  }
  return wrong / (4.0 * g);
}

double dber(Basis basis, const ChannelParams& params, double eta_c) {
  const double raw = dber_raw(basis, eta_c, params.p_d);
  return params.e_d * (1.0 - 2.0 * raw) + raw;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("binary_entropy: argument outside [0, 1]");
  }
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

PerformancePoint secrecy_capacity(const ChannelParams& params,
                                  double distance_km, Basis check_basis,
                                  bool incum) {
  params.validate();
  PerformancePoint point;
  point.distance_km = distance_km;
  point.check_basis = check_basis;
  point.incum = incum;
  point.eta_c = transmittance(params, distance_km);
  point.q_c2 = click_rate_2(point.eta_c, params.p_d);
  point.qber = qber(params, point.eta_c);

  const double h_e = binary_entropy(point.qber);
  const double g_loss = 1.0 / point.eta_c;
  for (Basis u : kAllBases) {
    point.gains[u] = gain(u, point.eta_c, params.p_d);
    point.q_c1[u] = click_rate_1(u, point.eta_c, params.p_d);
    point.big_q[u] = point.q_c1[u] * point.q_c2;
    point.dber_raw[u] = dber_raw(u, point.eta_c, params.p_d);
    point.dber[u] = dber(u, params, point.eta_c);

    const double h_eps = binary_entropy(std::clamp(point.dber[u], 0.0, 1.0));
    point.capacity_raw[u] = point.big_q[u] * (1.0 - h_e - g_loss * h_eps);
    point.capacity[u] = std::max(0.0, point.capacity_raw[u]);
    point.capacity_incum_raw[u] = point.big_q[u] * (1.0 - h_e - h_eps);
    point.capacity_incum[u] = std::max(0.0, point.capacity_incum_raw[u]);
  }
  return point;
}

double capacity_from_estimates(const PerformancePoint& point,
                               Basis check_basis, bool incum,
                               double qber_estimate, double dber_estimate) {
  const double e = std::clamp(qber_estimate, 0.0, 1.0);
  const double eps = std::clamp(dber_estimate, 0.0, 1.0);
  const double g = incum ? 1.0 : 1.0 / point.eta_c;
  return point.big_q[check_basis] *
         (1.0 - binary_entropy(e) - g * binary_entropy(eps));
}

}  // namespace spmqc::channel
