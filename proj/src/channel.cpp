#include "fogrelay/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fogrelay {

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    std::ostringstream os;
    os << name << " must be finite and positive, got " << v;
    throw DomainError(os.str());
  }
}

// N0 * kappa * d^sigma / P, the SNR-threshold-to-mean-SNR ratio of one hop.
double hop_ratio(double power, double distance, const ChannelParams& p) {
  return p.noise_power * p.snr_threshold * std::pow(distance, p.path_loss_exponent) / power;
}

}  // namespace

void ChannelParams::validate() const {
  require_positive(noise_power, "noise_power");
  require_positive(snr_threshold, "snr_threshold");
  require_positive(path_loss_exponent, "path_loss_exponent");
  require_positive(step_delta, "step_delta");
  require_positive(distance_floor, "distance_floor");
}

double compute_psi(double p_relay, double d_relay_dest, const ChannelParams& params) {
  require_positive(p_relay, "p_relay");
  require_positive(d_relay_dest, "d_relay_dest");
  const double psi = std::sqrt(hop_ratio(p_relay, d_relay_dest, params));
  if (!std::isfinite(psi) || psi <= 0.0) throw DomainError("psi is not finite and positive");
  return psi;
}

OutageEvaluation evaluate_outage(double p_sensor, double p_relay, const LinkGeometry& geom,
                                 const ChannelParams& params) {
  require_positive(p_sensor, "p_sensor");
  require_positive(p_relay, "p_relay");
  require_positive(geom.sensor_relay, "sensor_relay distance");
  require_positive(geom.relay_dest, "relay_dest distance");

  // 1 - (1 + psi^2 ln psi^2) e^{-t}, rewritten as -expm1(log1p(u) - t) so the
  // result keeps full relative precision when the outage is close to zero.
  const double psi_sq = hop_ratio(p_relay, geom.relay_dest, params);
  const double u = psi_sq * std::log(psi_sq);
  const double t = hop_ratio(p_sensor, geom.sensor_relay, params);
  const double raw = -std::expm1(std::log1p(u) - t);
  if (!std::isfinite(raw)) throw DomainError("outage probability is not finite");

  OutageEvaluation out;
  out.raw = raw;
  out.value = std::clamp(raw, 0.0, 1.0);
  out.clamped = out.value != raw;
  return out;
}

LinkGeometry effective_distances(const LinkGeometry& base, double displacement,
                                 const ChannelParams& params, double mobility_bound) {
  if (!std::isfinite(displacement) || std::abs(displacement) > mobility_bound) {
    std::ostringstream os;
    os << "displacement " << displacement << " outside mobility bound " << mobility_bound;
    throw DomainError(os.str());
  }
  const double floor = params.distance_floor;
  if (params.delta_mode == DeltaMode::Literal) {
    return {std::max(floor, base.sensor_relay - displacement),
            std::max(floor, base.relay_dest - displacement)};
  }
  return {std::max(floor, base.sensor_relay + displacement),
          std::max(floor, base.relay_dest - displacement)};
}

}  // namespace fogrelay
