#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adshield/crypto.hpp"
#include "adshield/principals.hpp"

namespace adshield {

using EventId = std::array<std::uint8_t, 16>;
using RegionId = std::string;
using ImpressionId = std::string;
using Timestamp = std::uint64_t;  // logical milliseconds since scenario epoch

inline constexpr std::uint64_t kDefaultFreshnessMs = 5000;

struct Rect {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t width = 0;
  std::int32_t height = 0;

  // Half-open: [x, x+width) x [y, y+height).
  bool contains(std::int32_t px, std::int32_t py) const noexcept {
    return px >= x && py >= y && static_cast<std::int64_t>(px) < std::int64_t{x} + width &&
           static_cast<std::int64_t>(py) < std::int64_t{y} + height;
  }
  bool operator==(const Rect&) const = default;
};

struct Region {
  RegionId id;
  PrincipalId owner;
  Rect bounds;
};

struct InputEvent {
  EventId event_id{};
  Timestamp timestamp = 0;
  std::int32_t x = 0;
  std::int32_t y = 0;
  RegionId region_id;

  bool operator==(const InputEvent&) const = default;
};

struct EventAttestation {
  Digest mac{};
  bool operator==(const EventAttestation&) const = default;
};

struct ClickToken {
  std::string token_id;
  EventId event_id{};
  ImpressionId impression_id;
  PrincipalId ad_principal;
  Digest mac{};

  bool operator==(const ClickToken&) const = default;
};

// 0x02 || event_id(16) || timestamp_u64_be || x_i32_be || y_i32_be || lp(region_id)
Bytes canonical_event_bytes(const InputEvent& e);
// 0x04 || lp(token_id) || event_id(16) || lp(impression_id) || lp(ad_principal)
Bytes canonical_token_bytes(const ClickToken& t);

// Lets the monitor ask who owns an impression without depending on the
// ad-delivery layer.
class ImpressionDirectory {
 public:
  virtual ~ImpressionDirectory() = default;
  virtual std::optional<PrincipalId> impression_owner(const ImpressionId& id) const = 0;
};

class InputDevice;

// Monitor-side input attestation. Events can only be emitted through an
// InputDevice handle; verification and minting are public.
class EventMonitor {
 public:
  EventMonitor(const Registry& registry, Keystore& keystore, Entropy& entropy,
               std::uint64_t freshness_ms = kDefaultFreshnessMs);
  EventMonitor(const EventMonitor&) = delete;
  EventMonitor& operator=(const EventMonitor&) = delete;

  RegionId register_region(const Principal& owner, const Rect& bounds);
  std::optional<Region> region(const RegionId& id) const;
  std::vector<Region> regions_owned_by(const PrincipalId& owner) const;

  void verify_event(const InputEvent& e, const EventAttestation& a, Timestamp now) const;

  ClickToken mint_click_token(const Principal& ad, const InputEvent& e,
                              const EventAttestation& a, const ImpressionId& impression_id,
                              Timestamp now, const ImpressionDirectory& impressions);

  // MAC check only; the ad server trusts the monitor's event key.
  bool verify_token_mac(const ClickToken& t) const;

  bool consumed(const EventId& id) const;
  std::size_t consumed_count() const;

  // Consumed-event ledger as bytes: "ADCL" || u8 version || u64 count ||
  // sorted event ids. restore() replaces the current ledger.
  Bytes checkpoint() const;
  void restore(ByteView snapshot);

  // Every emitted event, for ledger joins in tests and audits.
  std::vector<InputEvent> emitted_events() const;

  std::uint64_t freshness_ms() const noexcept { return freshness_ms_; }
  void set_freshness_ms(std::uint64_t ms) noexcept { freshness_ms_ = ms; }

  InputDevice input_device();

 private:
  friend class InputDevice;
  std::pair<InputEvent, EventAttestation> emit_event(const RegionId& region, std::int32_t x,
                                                     std::int32_t y, Timestamp timestamp);

  const Registry& registry_;
  Keystore& keystore_;
  Entropy& entropy_;
  std::uint64_t freshness_ms_;
  KeyId event_key_;

  mutable std::mutex mu_;
  std::map<RegionId, Region> regions_;
  std::set<EventId> issued_;
  std::vector<InputEvent> emitted_;
  std::set<EventId> consumed_;
};

// Trusted touchscreen driver handle. Scenario code holds one; adversary
// strategies never do.
class InputDevice {
 public:
  std::pair<InputEvent, EventAttestation> emit(const RegionId& region, std::int32_t x,
                                               std::int32_t y, Timestamp timestamp) {
    return monitor_->emit_event(region, x, y, timestamp);
  }

 private:
  friend class EventMonitor;
  explicit InputDevice(EventMonitor& monitor) : monitor_(&monitor) {}
  EventMonitor* monitor_;
};

}  // namespace adshield
