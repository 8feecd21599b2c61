#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string_view>

namespace wban {

inline constexpr int kNumSites = 7;
inline constexpr int kNumPostures = 7;

/// On-body node positions. The chest node is the sink / gateway.
enum class Site : std::uint8_t { kHead, kChest, kUpperArm, kWrist, kNavel, kThigh, kAnkle };

inline constexpr Site kSink = Site::kChest;

enum class Posture : std::uint8_t { kWalk, kWeak, kRun, kSit, kWear, kSleep, kLie };

inline constexpr std::array<Site, kNumSites> kAllSites = {
    Site::kHead, Site::kChest, Site::kUpperArm, Site::kWrist,
    Site::kNavel, Site::kThigh, Site::kAnkle};

inline constexpr std::array<Posture, kNumPostures> kAllPostures = {
    Posture::kWalk, Posture::kWeak, Posture::kRun, Posture::kSit,
    Posture::kWear, Posture::kSleep, Posture::kLie};

constexpr int index(Site s) { return static_cast<int>(s); }
constexpr int index(Posture p) { return static_cast<int>(p); }
constexpr Site site_at(int i) { return static_cast<Site>(i); }

std::string_view to_string(Site s);
std::string_view to_string(Posture p);
std::optional<Site> parse_site(std::string_view name);
std::optional<Posture> parse_posture(std::string_view name);

/// Set of sites packed in 7 bits.
class SiteSet {
 public:
  constexpr SiteSet() = default;
  constexpr SiteSet(std::initializer_list<Site> sites) {
    for (Site s : sites) insert(s);
  }
  static constexpr SiteSet all() { return SiteSet(0x7f); }
  static constexpr SiteSet from_bits(std::uint8_t bits) {
    return SiteSet(static_cast<std::uint8_t>(bits & 0x7f));
  }

  constexpr void insert(Site s) { bits_ |= bit(s); }
  constexpr void erase(Site s) { bits_ &= static_cast<std::uint8_t>(~bit(s)); }
  constexpr bool contains(Site s) const { return (bits_ & bit(s)) != 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool full() const { return bits_ == 0x7f; }
  constexpr std::uint8_t bits() const { return bits_; }

  constexpr SiteSet operator|(SiteSet o) const { return SiteSet(bits_ | o.bits_); }
  constexpr SiteSet operator&(SiteSet o) const { return SiteSet(bits_ & o.bits_); }
  constexpr SiteSet operator~() const { return SiteSet(~bits_ & 0x7f); }
  constexpr SiteSet& operator|=(SiteSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr bool operator==(const SiteSet&) const = default;
  /// True when every member of this set is also in `o`.
  constexpr bool subset_of(SiteSet o) const { return (bits_ & ~o.bits_) == 0; }

 private:
  constexpr explicit SiteSet(int bits) : bits_(static_cast<std::uint8_t>(bits)) {}
  static constexpr std::uint8_t bit(Site s) {
    return static_cast<std::uint8_t>(1u << index(s));
  }
  std::uint8_t bits_ = 0;
};

}  // namespace wban
