#include "wban/body.h"

namespace wban {

namespace {
constexpr std::array<std::string_view, kNumSites> kSiteNames = {
    "head", "chest", "upper_arm", "wrist", "navel", "thigh", "ankle"};
constexpr std::array<std::string_view, kNumPostures> kPostureNames = {
    "walk", "weak", "run", "sit", "wear", "sleep", "lie"};
}  // namespace

std::string_view to_string(Site s) { return kSiteNames[index(s)]; }
std::string_view to_string(Posture p) { return kPostureNames[index(p)]; }

std::optional<Site> parse_site(std::string_view name) {
  for (int i = 0; i < kNumSites; ++i)
    if (kSiteNames[i] == name) return site_at(i);
  return std::nullopt;
}

std::optional<Posture> parse_posture(std::string_view name) {
  for (int i = 0; i < kNumPostures; ++i)
    if (kPostureNames[i] == name) return static_cast<Posture>(i);
  return std::nullopt;
}

}  // namespace wban
