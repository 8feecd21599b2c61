#include "wban/channel.h"

#include <algorithm>
#include <fmt/format.h>

namespace wban {

namespace {

struct PairEntry {
  Posture posture;
  Site a;
  Site b;
  double mean_db;
  double std_db;
};

// Upper triangle per posture; mean/std attenuation in dB.
constexpr PairEntry kDefaultLinks[] = {
  // walk
  {Posture::kWalk, Site::kHead, Site::kChest, 35, 2},
  {Posture::kWalk, Site::kHead, Site::kUpperArm, 32, 2.5},
  {Posture::kWalk, Site::kHead, Site::kWrist, 53, 6.5},
  {Posture::kWalk, Site::kHead, Site::kNavel, 42, 4.5},
  {Posture::kWalk, Site::kHead, Site::kThigh, 52, 2},
  {Posture::kWalk, Site::kHead, Site::kAnkle, 67, 1},
  {Posture::kWalk, Site::kChest, Site::kUpperArm, 33, 4.5},
  {Posture::kWalk, Site::kChest, Site::kWrist, 39, 5.5},
  {Posture::kWalk, Site::kChest, Site::kNavel, 37, 4},
  {Posture::kWalk, Site::kChest, Site::kThigh, 45, 2.5},
  {Posture::kWalk, Site::kChest, Site::kAnkle, 67, 4},
  {Posture::kWalk, Site::kUpperArm, Site::kWrist, 36, 5},
  {Posture::kWalk, Site::kUpperArm, Site::kNavel, 35, 3},
  {Posture::kWalk, Site::kUpperArm, Site::kThigh, 46, 4.5},
  {Posture::kWalk, Site::kUpperArm, Site::kAnkle, 54, 4},
  {Posture::kWalk, Site::kWrist, Site::kNavel, 39, 3.5},
  {Posture::kWalk, Site::kWrist, Site::kThigh, 38, 7},
  {Posture::kWalk, Site::kWrist, Site::kAnkle, 69, 0.5},
  {Posture::kWalk, Site::kNavel, Site::kThigh, 36, 3},
  {Posture::kWalk, Site::kNavel, Site::kAnkle, 59, 2},
  {Posture::kWalk, Site::kThigh, Site::kAnkle, 30, 3.5},
  // weak
  {Posture::kWeak, Site::kHead, Site::kChest, 34, 1.4},
  {Posture::kWeak, Site::kHead, Site::kUpperArm, 31, 1.8},
  {Posture::kWeak, Site::kHead, Site::kWrist, 52, 4.5},
  {Posture::kWeak, Site::kHead, Site::kNavel, 41, 3.1},
  {Posture::kWeak, Site::kHead, Site::kThigh, 51, 1.4},
  {Posture::kWeak, Site::kHead, Site::kAnkle, 66, 0.7},
  {Posture::kWeak, Site::kChest, Site::kUpperArm, 32, 3.1},
  {Posture::kWeak, Site::kChest, Site::kWrist, 38, 3.8},
  {Posture::kWeak, Site::kChest, Site::kNavel, 36, 2.8},
  {Posture::kWeak, Site::kChest, Site::kThigh, 44, 1.8},
  {Posture::kWeak, Site::kChest, Site::kAnkle, 66, 2.8},
  {Posture::kWeak, Site::kUpperArm, Site::kWrist, 35, 3.5},
  {Posture::kWeak, Site::kUpperArm, Site::kNavel, 34, 2.1},
  {Posture::kWeak, Site::kUpperArm, Site::kThigh, 45, 3.1},
  {Posture::kWeak, Site::kUpperArm, Site::kAnkle, 53, 2.8},
  {Posture::kWeak, Site::kWrist, Site::kNavel, 38, 2.4},
  {Posture::kWeak, Site::kWrist, Site::kThigh, 37, 4.9},
  {Posture::kWeak, Site::kWrist, Site::kAnkle, 68, 0.3},
  {Posture::kWeak, Site::kNavel, Site::kThigh, 35, 2.1},
  {Posture::kWeak, Site::kNavel, Site::kAnkle, 58, 1.4},
  {Posture::kWeak, Site::kThigh, Site::kAnkle, 29, 2.4},
  // run
  {Posture::kRun, Site::kHead, Site::kChest, 36, 3},
  {Posture::kRun, Site::kHead, Site::kUpperArm, 33, 3.8},
  {Posture::kRun, Site::kHead, Site::kWrist, 54, 9.8},
  {Posture::kRun, Site::kHead, Site::kNavel, 43, 6.8},
  {Posture::kRun, Site::kHead, Site::kThigh, 53, 3},
  {Posture::kRun, Site::kHead, Site::kAnkle, 68, 1.5},
  {Posture::kRun, Site::kChest, Site::kUpperArm, 34, 6.8},
  {Posture::kRun, Site::kChest, Site::kWrist, 40, 8.2},
  {Posture::kRun, Site::kChest, Site::kNavel, 38, 6},
  {Posture::kRun, Site::kChest, Site::kThigh, 46, 3.8},
  {Posture::kRun, Site::kChest, Site::kAnkle, 68, 6},
  {Posture::kRun, Site::kUpperArm, Site::kWrist, 37, 7.5},
  {Posture::kRun, Site::kUpperArm, Site::kNavel, 36, 4.5},
  {Posture::kRun, Site::kUpperArm, Site::kThigh, 47, 6.8},
  {Posture::kRun, Site::kUpperArm, Site::kAnkle, 55, 6},
  {Posture::kRun, Site::kWrist, Site::kNavel, 40, 5.2},
  {Posture::kRun, Site::kWrist, Site::kThigh, 39, 10.5},
  {Posture::kRun, Site::kWrist, Site::kAnkle, 70, 0.8},
  {Posture::kRun, Site::kNavel, Site::kThigh, 37, 4.5},
  {Posture::kRun, Site::kNavel, Site::kAnkle, 60, 3},
  {Posture::kRun, Site::kThigh, Site::kAnkle, 31, 5.2},
  // sit
  {Posture::kSit, Site::kHead, Site::kChest, 33, 1.6},
  {Posture::kSit, Site::kHead, Site::kUpperArm, 30, 2},
  {Posture::kSit, Site::kHead, Site::kWrist, 51, 5.2},
  {Posture::kSit, Site::kHead, Site::kNavel, 40, 3.6},
  {Posture::kSit, Site::kHead, Site::kThigh, 48, 1.6},
  {Posture::kSit, Site::kHead, Site::kAnkle, 63, 0.8},
  {Posture::kSit, Site::kChest, Site::kUpperArm, 31, 3.6},
  {Posture::kSit, Site::kChest, Site::kWrist, 37, 4.4},
  {Posture::kSit, Site::kChest, Site::kNavel, 35, 3.2},
  {Posture::kSit, Site::kChest, Site::kThigh, 41, 2},
  {Posture::kSit, Site::kChest, Site::kAnkle, 63, 3.2},
  {Posture::kSit, Site::kUpperArm, Site::kWrist, 34, 4},
  {Posture::kSit, Site::kUpperArm, Site::kNavel, 33, 2.4},
  {Posture::kSit, Site::kUpperArm, Site::kThigh, 42, 3.6},
  {Posture::kSit, Site::kUpperArm, Site::kAnkle, 50, 3.2},
  {Posture::kSit, Site::kWrist, Site::kNavel, 37, 2.8},
  {Posture::kSit, Site::kWrist, Site::kThigh, 34, 5.6},
  {Posture::kSit, Site::kWrist, Site::kAnkle, 65, 0.4},
  {Posture::kSit, Site::kNavel, Site::kThigh, 32, 2.4},
  {Posture::kSit, Site::kNavel, Site::kAnkle, 55, 1.6},
  {Posture::kSit, Site::kThigh, Site::kAnkle, 26, 2.8},
  // wear
  {Posture::kWear, Site::kHead, Site::kChest, 35, 2},
  {Posture::kWear, Site::kHead, Site::kUpperArm, 35, 2.5},
  {Posture::kWear, Site::kHead, Site::kWrist, 56, 6.5},
  {Posture::kWear, Site::kHead, Site::kNavel, 42, 4.5},
  {Posture::kWear, Site::kHead, Site::kThigh, 52, 2},
  {Posture::kWear, Site::kHead, Site::kAnkle, 67, 1},
  {Posture::kWear, Site::kChest, Site::kUpperArm, 36, 4.5},
  {Posture::kWear, Site::kChest, Site::kWrist, 42, 5.5},
  {Posture::kWear, Site::kChest, Site::kNavel, 37, 4},
  {Posture::kWear, Site::kChest, Site::kThigh, 45, 2.5},
  {Posture::kWear, Site::kChest, Site::kAnkle, 67, 4},
  {Posture::kWear, Site::kUpperArm, Site::kWrist, 39, 5},
  {Posture::kWear, Site::kUpperArm, Site::kNavel, 38, 3},
  {Posture::kWear, Site::kUpperArm, Site::kThigh, 49, 4.5},
  {Posture::kWear, Site::kUpperArm, Site::kAnkle, 57, 4},
  {Posture::kWear, Site::kWrist, Site::kNavel, 42, 3.5},
  {Posture::kWear, Site::kWrist, Site::kThigh, 41, 7},
  {Posture::kWear, Site::kWrist, Site::kAnkle, 72, 0.5},
  {Posture::kWear, Site::kNavel, Site::kThigh, 36, 3},
  {Posture::kWear, Site::kNavel, Site::kAnkle, 59, 2},
  {Posture::kWear, Site::kThigh, Site::kAnkle, 30, 3.5},
  // sleep
  {Posture::kSleep, Site::kHead, Site::kChest, 37, 1},
  {Posture::kSleep, Site::kHead, Site::kUpperArm, 34, 1},
  {Posture::kSleep, Site::kHead, Site::kWrist, 55, 1},
  {Posture::kSleep, Site::kHead, Site::kNavel, 44, 1},
  {Posture::kSleep, Site::kHead, Site::kThigh, 54, 1},
  {Posture::kSleep, Site::kHead, Site::kAnkle, 69, 1},
  {Posture::kSleep, Site::kChest, Site::kUpperArm, 35, 1},
  {Posture::kSleep, Site::kChest, Site::kWrist, 41, 1},
  {Posture::kSleep, Site::kChest, Site::kNavel, 39, 1},
  {Posture::kSleep, Site::kChest, Site::kThigh, 47, 1},
  {Posture::kSleep, Site::kChest, Site::kAnkle, 69, 1},
  {Posture::kSleep, Site::kUpperArm, Site::kWrist, 44, 1},
  {Posture::kSleep, Site::kUpperArm, Site::kNavel, 37, 1},
  {Posture::kSleep, Site::kUpperArm, Site::kThigh, 48, 1},
  {Posture::kSleep, Site::kUpperArm, Site::kAnkle, 56, 1},
  {Posture::kSleep, Site::kWrist, Site::kNavel, 41, 1},
  {Posture::kSleep, Site::kWrist, Site::kThigh, 40, 1},
  {Posture::kSleep, Site::kWrist, Site::kAnkle, 71, 1},
  {Posture::kSleep, Site::kNavel, Site::kThigh, 38, 1},
  {Posture::kSleep, Site::kNavel, Site::kAnkle, 61, 1},
  {Posture::kSleep, Site::kThigh, Site::kAnkle, 45, 1},
  // lie
  {Posture::kLie, Site::kHead, Site::kChest, 36, 1.6},
  {Posture::kLie, Site::kHead, Site::kUpperArm, 33, 2},
  {Posture::kLie, Site::kHead, Site::kWrist, 54, 5.2},
  {Posture::kLie, Site::kHead, Site::kNavel, 43, 3.6},
  {Posture::kLie, Site::kHead, Site::kThigh, 53, 1.6},
  {Posture::kLie, Site::kHead, Site::kAnkle, 68, 0.8},
  {Posture::kLie, Site::kChest, Site::kUpperArm, 34, 3.6},
  {Posture::kLie, Site::kChest, Site::kWrist, 40, 4.4},
  {Posture::kLie, Site::kChest, Site::kNavel, 38, 3.2},
  {Posture::kLie, Site::kChest, Site::kThigh, 46, 2},
  {Posture::kLie, Site::kChest, Site::kAnkle, 68, 3.2},
  {Posture::kLie, Site::kUpperArm, Site::kWrist, 37, 4},
  {Posture::kLie, Site::kUpperArm, Site::kNavel, 36, 2.4},
  {Posture::kLie, Site::kUpperArm, Site::kThigh, 47, 3.6},
  {Posture::kLie, Site::kUpperArm, Site::kAnkle, 55, 3.2},
  {Posture::kLie, Site::kWrist, Site::kNavel, 40, 2.8},
  {Posture::kLie, Site::kWrist, Site::kThigh, 39, 5.6},
  {Posture::kLie, Site::kWrist, Site::kAnkle, 70, 0.4},
  {Posture::kLie, Site::kNavel, Site::kThigh, 37, 2.4},
  {Posture::kLie, Site::kNavel, Site::kAnkle, 60, 1.6},
  {Posture::kLie, Site::kThigh, Site::kAnkle, 31, 2.8},
};

}  // namespace

void ChannelConfig::set_link(Posture p, Site a, Site b, LinkStats stats) {
  postures[index(p)][index(a)][index(b)] = stats;
  postures[index(p)][index(b)][index(a)] = stats;
}

std::vector<std::string> ChannelConfig::violations() const {
  std::vector<std::string> out;
  for (Posture p : kAllPostures) {
    for (int i = 0; i < kNumSites; ++i) {
      for (int j = i + 1; j < kNumSites; ++j) {
        const LinkStats& ij = postures[index(p)][i][j];
        const LinkStats& ji = postures[index(p)][j][i];
        const auto pair = fmt::format("{}: {}-{}", to_string(p), to_string(site_at(i)),
                                      to_string(site_at(j)));
        if (!(ij == ji)) out.push_back(pair + " matrix is not symmetric");
        if (!(ij.std_db >= 0.0) || !(ji.std_db >= 0.0))
          out.push_back(pair + " standard deviation must be >= 0");
      }
    }
  }
  if (coherence_interval <= SimTime()) out.push_back("coherence_interval must be > 0");
  return out;
}

ChannelConfig default_channel_config() {
  ChannelConfig cfg;
  for (const PairEntry& e : kDefaultLinks)
    cfg.set_link(e.posture, e.a, e.b, LinkStats{e.mean_db, e.std_db});
  return cfg;
}

double sample_attenuation(const LinkStats& stats, RngStream& rng) {
  return std::max(0.0, rng.normal(stats.mean_db, stats.std_db));
}

std::string_view to_string(RxOutcome outcome) {
  switch (outcome) {
    case RxOutcome::kReceived: return "received";
    case RxOutcome::kCollision: return "collision";
    case RxOutcome::kOutOfRange: return "out_of_range";
    case RxOutcome::kHalfDuplex: return "half_duplex";
  }
  return "?";
}

Channel::Channel(const ChannelConfig& config, Posture posture, RngStream rng)
    : config_(config), posture_(posture), rng_(std::move(rng)) {
  resample();
}

void Channel::resample() {
  for (int i = 0; i < kNumSites; ++i) {
    att_[i][i] = 0.0;
    for (int j = i + 1; j < kNumSites; ++j) {
      const double a = sample_attenuation(config_.link(posture_, site_at(i), site_at(j)), rng_);
      att_[i][j] = a;
      att_[j][i] = a;
    }
  }
  for (Flight& f : flights_) {
    const SiteSet now = audible_set(f.sender);
    f.audible_all = f.audible_all & now;
    f.audible_any |= now;
  }
  for (std::size_t i = 0; i < flights_.size(); ++i)
    for (std::size_t j = i + 1; j < flights_.size(); ++j) interfere(flights_[i], flights_[j]);
}

double Channel::margin(Site from, Site to) const {
  return link_margin(config_.tx_power_dbm, attenuation(from, to), config_.sensitivity_dbm);
}

SiteSet Channel::audible_set(Site sender) const {
  SiteSet s;
  for (Site r : kAllSites)
    if (audible(sender, r)) s.insert(r);
  return s;
}

void Channel::interfere(Flight& a, Flight& b) {
  a.corrupted |= b.audible_any;
  b.corrupted |= a.audible_any;
  a.half_duplex.insert(b.sender);
  b.half_duplex.insert(a.sender);
}

std::uint64_t Channel::begin_transmission(Site sender) {
  Flight f{next_id_++, sender, {}, {}, {}, {}};
  f.audible_all = audible_set(sender);
  f.audible_any = f.audible_all;
  for (Flight& other : flights_) interfere(other, f);
  flights_.push_back(f);
  return f.id;
}

std::vector<Reception> Channel::end_transmission(std::uint64_t tx_id) {
  auto it = std::find_if(flights_.begin(), flights_.end(),
                         [&](const Flight& f) { return f.id == tx_id; });
  std::vector<Reception> out;
  if (it == flights_.end()) return out;
  const Flight f = *it;
  flights_.erase(it);
  out.reserve(kNumSites - 1);
  for (Site r : kAllSites) {
    if (r == f.sender) continue;
    RxOutcome o = RxOutcome::kReceived;
    if (f.half_duplex.contains(r))
      o = RxOutcome::kHalfDuplex;
    else if (!f.audible_all.contains(r))
      o = RxOutcome::kOutOfRange;
    else if (f.corrupted.contains(r))
      o = RxOutcome::kCollision;
    out.push_back(Reception{r, o});
  }
  return out;
}

bool Channel::carrier_busy(Site node) const {
  return std::any_of(flights_.begin(), flights_.end(), [&](const Flight& f) {
    return f.sender != node && audible(f.sender, node);
  });
}

bool Channel::transmitting(Site node) const {
  return std::any_of(flights_.begin(), flights_.end(),
                     [&](const Flight& f) { return f.sender == node; });
}

}  // namespace wban
