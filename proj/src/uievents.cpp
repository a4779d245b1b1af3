#include "adshield/uievents.hpp"

#include <algorithm>
#include <cstring>

#include "adshield/error.hpp"

namespace adshield {

namespace {

constexpr std::uint8_t kEventTag = 0x02;
constexpr std::uint8_t kTokenTag = 0x04;
constexpr char kCheckpointMagic[4] = {'A', 'D', 'C', 'L'};
constexpr std::uint8_t kCheckpointVersion = 1;

}  // namespace

Bytes canonical_event_bytes(const InputEvent& e) {
  return CanonicalWriter{}
      .u8(kEventTag)
      .raw(e.event_id)
      .u64(e.timestamp)
      .i32(e.x)
      .i32(e.y)
      .lp(e.region_id)
      .take();
}

Bytes canonical_token_bytes(const ClickToken& t) {
  return CanonicalWriter{}
      .u8(kTokenTag)
      .lp(t.token_id)
      .raw(t.event_id)
      .lp(t.impression_id)
      .lp(t.ad_principal)
      .take();
}

EventMonitor::EventMonitor(const Registry& registry, Keystore& keystore, Entropy& entropy,
                           std::uint64_t freshness_ms)
    : registry_(registry),
      keystore_(keystore),
      entropy_(entropy),
      freshness_ms_(freshness_ms),
      event_key_(keystore.create_key()) {}

RegionId EventMonitor::register_region(const Principal& owner, const Rect& bounds) {
  auto installed = registry_.find(owner.id);
  if (!installed || installed->uid != owner.uid) {
    throw Error(Errc::UnknownPrincipal, "'" + owner.id + "'");
  }
  if (bounds.width <= 0 || bounds.height <= 0) {
    throw Error(Errc::DegenerateBounds, "region needs positive width and height");
  }
  std::lock_guard lock(mu_);
  RegionId id = "region-" + std::to_string(regions_.size() + 1);
  regions_.emplace(id, Region{id, owner.id, bounds});
  return id;
}

std::optional<Region> EventMonitor::region(const RegionId& id) const {
  std::lock_guard lock(mu_);
  auto it = regions_.find(id);
  if (it == regions_.end()) return std::nullopt;
  return it->second;
}

std::vector<Region> EventMonitor::regions_owned_by(const PrincipalId& owner) const {
  std::lock_guard lock(mu_);
  std::vector<Region> out;
  for (const auto& [id, r] : regions_) {
    if (r.owner == owner) out.push_back(r);
  }
  return out;
}

std::pair<InputEvent, EventAttestation> EventMonitor::emit_event(const RegionId& region_id,
                                                                 std::int32_t x, std::int32_t y,
                                                                 Timestamp timestamp) {
  std::lock_guard lock(mu_);
  auto it = regions_.find(region_id);
  if (it == regions_.end()) throw Error(Errc::UnknownRegion, "'" + region_id + "'");
  if (!it->second.bounds.contains(x, y)) {
    throw Error(Errc::OutOfBounds, "(" + std::to_string(x) + "," + std::to_string(y) +
                                       ") outside " + region_id);
  }
  InputEvent e;
  do {
    e.event_id = entropy_.draw<16>();
  } while (!issued_.insert(e.event_id).second);
  e.timestamp = timestamp;
  e.x = x;
  e.y = y;
  e.region_id = region_id;
  emitted_.push_back(e);
  return {e, EventAttestation{keystore_.mac(event_key_, canonical_event_bytes(e))}};
}

void EventMonitor::verify_event(const InputEvent& e, const EventAttestation& a,
                                Timestamp now) const {
  if (!keystore_.verify(event_key_, canonical_event_bytes(e), a.mac)) {
    throw Error(Errc::BadEventMac, "event attestation does not verify");
  }
  if (now > e.timestamp && now - e.timestamp > freshness_ms_) {
    throw Error(Errc::StaleEvent, "event is " + std::to_string(now - e.timestamp) +
                                      " ms old, window is " + std::to_string(freshness_ms_));
  }
}

ClickToken EventMonitor::mint_click_token(const Principal& ad, const InputEvent& e,
                                          const EventAttestation& a,
                                          const ImpressionId& impression_id, Timestamp now,
                                          const ImpressionDirectory& impressions) {
  verify_event(e, a, now);
  auto r = region(e.region_id);
  if (!r) throw Error(Errc::UnknownRegion, "'" + e.region_id + "'");
  if (r->owner != ad.id) {
    throw Error(Errc::RegionOwnerMismatch,
                e.region_id + " is owned by '" + r->owner + "', not '" + ad.id + "'");
  }
  auto owner = impressions.impression_owner(impression_id);
  if (!owner || *owner != ad.id) {
    throw Error(Errc::UnknownImpression, "'" + impression_id + "' does not belong to '" +
                                             ad.id + "'");
  }

  {
    std::lock_guard lock(mu_);
    if (!consumed_.insert(e.event_id).second) {
      throw Error(Errc::EventAlreadyConsumed, "event " + to_hex(e.event_id) + " already minted");
    }
  }
  ClickToken token;
  token.event_id = e.event_id;
  token.impression_id = impression_id;
  token.ad_principal = ad.id;
  token.token_id = "tok-" + to_hex(entropy_.draw<16>());
  token.mac = keystore_.mac(event_key_, canonical_token_bytes(token));
  return token;
}

bool EventMonitor::verify_token_mac(const ClickToken& t) const {
  return keystore_.verify(event_key_, canonical_token_bytes(t), t.mac);
}

bool EventMonitor::consumed(const EventId& id) const {
  std::lock_guard lock(mu_);
  return consumed_.contains(id);
}

std::size_t EventMonitor::consumed_count() const {
  std::lock_guard lock(mu_);
  return consumed_.size();
}

Bytes EventMonitor::checkpoint() const {
  std::lock_guard lock(mu_);
  CanonicalWriter w;
  w.raw(as_bytes(std::string_view(kCheckpointMagic, 4)))
      .u8(kCheckpointVersion)
      .u64(consumed_.size());
  for (const auto& id : consumed_) w.raw(id);
  return w.take();
}

void EventMonitor::restore(ByteView snapshot) {
  constexpr std::size_t kHeader = 4 + 1 + 8;
  if (snapshot.size() < kHeader ||
      std::memcmp(snapshot.data(), kCheckpointMagic, 4) != 0 ||
      snapshot[4] != kCheckpointVersion) {
    throw Error(Errc::CorruptCheckpoint, "bad consumed-ledger header");
  }
  std::uint64_t count = 0;
  for (std::size_t i = 5; i < kHeader; ++i) count = (count << 8) | snapshot[i];
  if ((snapshot.size() - kHeader) % 16 != 0 || (snapshot.size() - kHeader) / 16 != count) {
    throw Error(Errc::CorruptCheckpoint, "consumed-ledger length mismatch");
  }
  std::set<EventId> restored;
  for (std::uint64_t i = 0; i < count; ++i) {
    EventId id{};
    std::memcpy(id.data(), snapshot.data() + kHeader + i * 16, 16);
    restored.insert(id);
  }
  if (restored.size() != count) {
    throw Error(Errc::CorruptCheckpoint, "duplicate event ids in checkpoint");
  }
  std::lock_guard lock(mu_);
  consumed_ = std::move(restored);
}

std::vector<InputEvent> EventMonitor::emitted_events() const {
  std::lock_guard lock(mu_);
  return emitted_;
}

InputDevice EventMonitor::input_device() { return InputDevice(*this); }

}  // namespace adshield
