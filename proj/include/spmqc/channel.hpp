#pragma once

#include <array>
#include <string_view>

// Analytic performance model of the protocol over a lossy fiber with
// threshold detectors: channel transmittance, two-fold coincidence
// probabilities for single-photon inputs, per-basis gains, click rates,
// QBER/DBER, and the secrecy capacity Cs = Q * [1 - h(e) - g*h(eps_u)].
namespace spmqc::channel {

enum class Basis { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Basis, 3> kAllBases = {Basis::X, Basis::Y,
                                                   Basis::Z};

const char* to_string(Basis basis);
Basis basis_from_string(std::string_view name);

/// Map from security-check basis to a double, indexable by Basis.
struct BasisMap {
  std::array<double, 3> values{};

  double& operator[](Basis b) { return values[static_cast<std::size_t>(b)]; }
  double operator[](Basis b) const {
    return values[static_cast<std::size_t>(b)];
  }
  bool operator==(const BasisMap&) const = default;
};

/// Detector and fiber parameters. Defaults are the reference configuration
/// used throughout the test suite and the CLI.
struct ChannelParams {
  double delta = 0.2;     // fiber attenuation, dB/km
  double eta_d = 0.6;     // detector efficiency
  double e0 = 0.5;        // background (dark-count) error rate
  double e_det = 0.0131;  // intrinsic detector error rate
  double p_d = 1e-6;      // dark-count probability per detector per gate
  double e_d = 0.015;     // polarization misalignment probability

  void validate() const;  // throws std::invalid_argument on bad values
};

/// One of the four detector pairs that constitute a valid two-fold click.
struct ClickPair {
  int first = 1;
  int second = 4;

  bool operator==(const ClickPair&) const = default;
};

// Valid coincidence pairs; the first two connect detectors behind different
// output ports ("cross" pairs), the last two share a port.
inline constexpr std::array<ClickPair, 4> kCoincidencePairs = {
    ClickPair{1, 4}, ClickPair{2, 3}, ClickPair{1, 2}, ClickPair{3, 4}};

bool is_coincidence_pair(ClickPair pair);
bool is_cross_pair(ClickPair pair);  // {1,4} or {2,3}

/// Polarization eigenstate labels: H/V (Z basis), +/- (X), ~+/~- (Y).
enum class Pol { H, V, DiagPlus, DiagMinus, CircPlus, CircMinus };

Basis basis_of(Pol pol);
Pol pol_eigenstate(Basis basis, int bit);  // bit 0 -> H,+,~+; bit 1 -> V,-,~-
const char* to_string(Pol pol);

/// eta_c = eta_d * 10^(-delta*d/10); d in km, d >= 0.
double transmittance(const ChannelParams& params, double distance_km);

/// Two-fold coincidence probability on `pair` when the two incident photons
/// carry polarizations (pol_a, pol_b) from the same basis. Circular-basis
/// inputs follow the diagonal-basis expressions one-for-one.
double pair_click_prob(ClickPair pair, Pol pol_a, Pol pol_b, double eta_c,
                       double p_d);

/// Same quantity assembled from the photon-number binomial expansion with
/// the single-photon conditional click probabilities; kept as an
/// independent route for consistency checks against pair_click_prob.
double pair_click_prob_expanded(ClickPair pair, Pol pol_a, Pol pol_b,
                                double eta_c, double p_d);

/// True when a coincidence on `pair` for same-basis inputs (pol_a, pol_b)
/// counts as an error event in the DBER tally for that basis.
bool is_error_coincidence(ClickPair pair, Pol pol_a, Pol pol_b);

/// G_u: coincidence rate averaged over the four polarization combinations
/// of basis u, summed over the coincidence pairs.
double gain(Basis basis, double eta_c, double p_d);

/// q_C1 = (eta_c/3) * (sum of the gains of the two bases not used for the
/// security check).
double click_rate_1(Basis check_basis, double eta_c, double p_d);

/// q_C2 = eta_c + (1 - eta_c) * p_d.
double click_rate_2(double eta_c, double p_d);

/// e = (e0*p_d + e_det*eta_c) / (eta_c + (1 - eta_c)*p_d).
double qber(const ChannelParams& params, double eta_c);

/// Uncorrected DBER: error coincidences over 4*G_u.
double dber_raw(Basis basis, double eta_c, double p_d);

/// Misalignment-corrected DBER: eps = e_d*(1 - 2*eps_hat) + eps_hat.
double dber(Basis basis, const ChannelParams& params, double eta_c);

/// h(p) = -p log2 p - (1-p) log2(1-p), with h(0) = h(1) = 0.
double binary_entropy(double p);

/// Every derived quantity of the model at one distance. The per-basis maps
/// treat each basis in turn as the security-check basis; `check_basis` and
/// `incum` record which combination the caller asked for.
struct PerformancePoint {
  double distance_km = 0.0;
  double eta_c = 0.0;
  double q_c2 = 0.0;
  double qber = 0.0;
  BasisMap gains;
  BasisMap q_c1;
  BasisMap big_q;      // Q = q_C1 * q_C2 per check basis
  BasisMap dber_raw;   // eps_hat
  BasisMap dber;       // eps
  BasisMap capacity_raw;        // g = 1/eta_c, unclamped
  BasisMap capacity;            // g = 1/eta_c, clamped at 0
  BasisMap capacity_incum_raw;  // g = 1, unclamped
  BasisMap capacity_incum;      // g = 1, clamped at 0

  Basis check_basis = Basis::X;
  bool incum = false;

  double selected_q_c1() const { return q_c1[check_basis]; }
  double selected_big_q() const { return big_q[check_basis]; }
  double selected_dber_raw() const { return dber_raw[check_basis]; }
  double selected_dber() const { return dber[check_basis]; }
  double selected_capacity_raw() const {
    return incum ? capacity_incum_raw[check_basis] : capacity_raw[check_basis];
  }
  double selected_capacity() const {
    return incum ? capacity_incum[check_basis] : capacity[check_basis];
  }
};

PerformancePoint secrecy_capacity(const ChannelParams& params,
                                  double distance_km, Basis check_basis,
                                  bool incum);

/// Secrecy capacity assembled from externally estimated error rates, with
/// the gain factors taken from `point`.
double capacity_from_estimates(const PerformancePoint& point,
                               Basis check_basis, bool incum,
                               double qber_estimate, double dber_estimate);

}  // namespace spmqc::channel
