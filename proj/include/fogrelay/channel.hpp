#pragma once

#include <stdexcept>
#include <string>

namespace fogrelay {

class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// How relay movement enters the outage formula.
///  - Axis: the relay slides along its sensor-destination axis, so a move
///    toward the destination lengthens the sensor link and shortens the
///    destination link by the same amount.
///  - Literal: the same signed offset is added to both distances.
enum class DeltaMode { Axis, Literal };

struct ChannelParams {
  double noise_power = 2e-7;       // N0, watts
  double snr_threshold = 1.0;      // kappa, dimensionless
  double path_loss_exponent = 3.0; // sigma
  double step_delta = 0.25;        // metres per positional change
  double distance_floor = 0.1;     // metres, avoids the d^-sigma pole
  DeltaMode delta_mode = DeltaMode::Axis;

  void validate() const;
};

/// Distances already adjusted for the relay's displacement.
struct LinkGeometry {
  double sensor_relay = 0.0;  // D_I
  double relay_dest = 0.0;    // D_S

  friend bool operator==(const LinkGeometry&, const LinkGeometry&) = default;
};

/// sqrt(N0 * kappa * d^sigma / P_R).
double compute_psi(double p_relay, double d_relay_dest, const ChannelParams& params);

struct OutageEvaluation {
  double raw = 0.0;      // unclamped closed form, may leave [0,1]
  double value = 0.0;    // clamped to [0,1]
  bool clamped = false;
};

/// Two-hop decode-and-forward outage over Rayleigh links, evaluated on
/// effective distances. Throws DomainError on non-finite or non-positive
/// inputs and never returns a non-finite value.
OutageEvaluation evaluate_outage(double p_sensor, double p_relay, const LinkGeometry& geom,
                                 const ChannelParams& params);

inline double outage_probability(double p_sensor, double p_relay, const LinkGeometry& geom,
                                 const ChannelParams& params) {
  return evaluate_outage(p_sensor, p_relay, geom, params).value;
}

/// Applies a signed displacement (positive = toward the destination) to the
/// base distances, flooring both at params.distance_floor.
LinkGeometry effective_distances(const LinkGeometry& base, double displacement,
                                 const ChannelParams& params, double mobility_bound = 30.0);

}  // namespace fogrelay
