#pragma once

#include <array>
#include <string>
#include <vector>

#include "wban/body.h"
#include "wban/rng.h"
#include "wban/sim_time.h"

namespace wban {

/// Attenuation statistics for one pair of sites, both in dB.
struct LinkStats {
  double mean_db = 0.0;
  double std_db = 0.0;
  bool operator==(const LinkStats&) const = default;
};

using LinkMatrix = std::array<std::array<LinkStats, kNumSites>, kNumSites>;

struct ChannelConfig {
  std::array<LinkMatrix, kNumPostures> postures{};
  SimTime coherence_interval = SimTime::millis(63);
  double tx_power_dbm = -60.0;
  double sensitivity_dbm = -100.0;

  const LinkStats& link(Posture p, Site a, Site b) const {
    return postures[index(p)][index(a)][index(b)];
  }
  /// Writes both (a, b) and (b, a).
  void set_link(Posture p, Site a, Site b, LinkStats stats);

  /// Human-readable rule violations; empty when the config is usable.
  std::vector<std::string> violations() const;
};

/// Synthetic on-body channel shipped with the simulator. In the walk posture
/// the chest reaches head, upper arm and navel comfortably and the wrist at the
/// edge of range; the ankle hangs off the thigh as a leaf.
ChannelConfig default_channel_config();

/// tx_power - attenuation - sensitivity. A frame is receivable iff >= 0.
constexpr double link_margin(double tx_power_dbm, double attenuation_db,
                             double sensitivity_dbm) {
  return tx_power_dbm - attenuation_db - sensitivity_dbm;
}

/// One normal draw in the dB domain, clamped below at 0 dB.
double sample_attenuation(const LinkStats& stats, RngStream& rng);

enum class RxOutcome : std::uint8_t { kReceived, kCollision, kOutOfRange, kHalfDuplex };

std::string_view to_string(RxOutcome outcome);

struct Reception {
  Site receiver;
  RxOutcome outcome;
};

/// Shared radio medium of one run: holds the attenuation realization of the
/// current coherence interval and the set of frames in flight.
class Channel {
 public:
  Channel(const ChannelConfig& config, Posture posture, RngStream rng);

  /// Draws a fresh attenuation for every pair. Also re-evaluates audibility
  /// of frames currently in flight.
  void resample();

  double attenuation(Site a, Site b) const { return att_[index(a)][index(b)]; }
  double margin(Site from, Site to) const;
  bool audible(Site from, Site to) const { return from != to && margin(from, to) >= 0.0; }

  /// Registers a frame that occupies the medium until end_transmission().
  std::uint64_t begin_transmission(Site sender);
  /// Outcome at each of the six other sites.
  std::vector<Reception> end_transmission(std::uint64_t tx_id);

  /// True iff a frame in flight from another site is audible at `node`.
  bool carrier_busy(Site node) const;
  bool transmitting(Site node) const;
  std::size_t in_flight() const { return flights_.size(); }

  const ChannelConfig& config() const { return config_; }
  Posture posture() const { return posture_; }

 private:
  struct Flight {
    std::uint64_t id;
    Site sender;
    SiteSet audible_all;  // audible during the whole airtime so far
    SiteSet audible_any;  // audible at some point
    SiteSet corrupted;    // overlapped by another audible frame
    SiteSet half_duplex;  // receiver was itself transmitting
  };

  SiteSet audible_set(Site sender) const;
  static void interfere(Flight& a, Flight& b);

  ChannelConfig config_;
  Posture posture_;
  RngStream rng_;
  std::array<std::array<double, kNumSites>, kNumSites> att_{};
  std::vector<Flight> flights_;
  std::uint64_t next_id_ = 1;
};

}  // namespace wban
