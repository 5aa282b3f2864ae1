#pragma once

#include <string>
#include <vector>

namespace fogplace {

/// Linear device power model: a constant idle draw plus a part proportional
/// to load, reaching max_power at full capacity.
struct DevicePowerProfile {
  double max_power = 0.0;   // W
  double idle_power = 0.0;  // W
  double capacity = 1.0;    // bit/s (patients for processing servers)
  bool shared = false;      // shared with other applications
  double idle_share = 1.0;  // fraction of idle power charged when shared

  friend bool operator==(const DevicePowerProfile&, const DevicePowerProfile&) = default;
};

inline std::vector<std::string> validate(const DevicePowerProfile& p, const std::string& who) {
  std::vector<std::string> out;
  if (!(p.idle_power >= 0.0)) out.push_back(who + ": idle power must be >= 0");
  if (!(p.max_power >= p.idle_power)) out.push_back(who + ": max power must be >= idle power");
  if (!(p.capacity > 0.0)) out.push_back(who + ": capacity must be > 0");
  if (!(p.idle_share > 0.0 && p.idle_share <= 1.0))
    out.push_back(who + ": idle share must be in (0, 1]");
  return out;
}

/// Proportional energy per unit of capacity (J/bit for network devices).
inline double energy_per_bit(const DevicePowerProfile& p) {
  return (p.max_power - p.idle_power) / p.capacity;
}

/// Idle energy charged to a device over one monitoring window.
inline double device_idle_energy(const DevicePowerProfile& p, bool active, double window) {
  if (!active) return 0.0;
  const double share = p.shared ? p.idle_share : 1.0;
  return share * p.idle_power * window;
}

}  // namespace fogplace
