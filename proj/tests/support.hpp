#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "adshield/adchannel.hpp"
#include "adshield/crypto.hpp"
#include "adshield/platform.hpp"

namespace adshield::testkit {

// splitmix64 stream. Kept separate from anything the library uses so
// generators and oracles never share code with the code under test.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
  bool coin(std::uint64_t one_in = 2) { return below(one_in) == 0; }

  template <std::size_t N>
  std::array<std::uint8_t, N> bytes() {
    std::array<std::uint8_t, N> out{};
    for (auto& b : out) b = static_cast<std::uint8_t>(next());
    return out;
  }
  Bytes bytes(std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(next());
    return out;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t state_;
};

inline const std::vector<std::string>& permission_names() {
  static const std::vector<std::string> kNames = {
      "INTERNET", "FINE_LOCATION", "COARSE_LOCATION", "READ_CONTACTS", "CAMERA",
      "VIBRATE",  "WAKE_LOCK",     "RECORD_AUDIO",    "GET_ACCOUNTS",  "READ_PHONE_STATE"};
  return kNames;
}

inline PermissionSet random_permissions(Gen& g, std::uint64_t one_in = 2) {
  PermissionSet out;
  for (const auto& n : permission_names()) {
    if (g.coin(one_in)) out.emplace(n);
  }
  return out;
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

// One host with an embedded ad, both with display regions, and an ad server.
struct World {
  explicit World(std::uint64_t seed = 1)
      : platform(PlatformOptions{seed}),
        host(platform.registry().install({make_permissions({"INTERNET", "FINE_LOCATION"})},
                                         PrincipalKind::Host, "host")),
        ad(platform.registry().install({make_permissions({"INTERNET"})}, PrincipalKind::Ad,
                                       "ad")),
        ad_region(platform.events().register_region(ad, Rect{0, 0, 320, 50})),
        host_region(platform.events().register_region(host, Rect{0, 50, 320, 430})),
        fingerprint(sha256(as_bytes("test server credential"))),
        server(platform.bus(), platform.events(), fingerprint,
               {to_bytes("<creative a>"), to_bytes("<creative b>")}) {}

  Registry& registry() { return platform.registry(); }
  IpcBus& bus() { return platform.bus(); }
  EventMonitor& events() { return platform.events(); }

  // Fetch and display a creative; `faithful=false` displays blank bytes.
  ImpressionRecord show(Timestamp t, bool faithful = true) {
    AdCreative c = fetch_creative(registry(), ad, server, fingerprint);
    return server.record_impression(ad, c, faithful ? c.content : Bytes{}, t);
  }

  ClickToken click(const ImpressionRecord& imp, Timestamp t) {
    auto [e, a] = events().input_device().emit(ad_region, 10, 10, t);
    return events().mint_click_token(ad, e, a, imp.impression_id, t + 20, server);
  }

  ClickReport honest_report(Timestamp t) {
    ImpressionRecord imp = show(t);
    ClickToken token = click(imp, t + 10);
    return make_click_report(bus(), ad, token, t + 50);
  }

  Platform platform;
  Principal host;
  Principal ad;
  RegionId ad_region;
  RegionId host_region;
  Digest fingerprint;
  AdServer server;
};

}  // namespace adshield::testkit
