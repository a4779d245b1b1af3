#pragma once

#include <cstdint>
#include <optional>

#include "adshield/crypto.hpp"
#include "adshield/ipcbus.hpp"
#include "adshield/principals.hpp"
#include "adshield/uievents.hpp"

namespace adshield {

struct PlatformOptions {
  // Seeded platforms derive every key and nonce from the seed.
  std::optional<std::uint64_t> seed;
  std::uint64_t freshness_ms = kDefaultFreshnessMs;
};

// The simulated OS reference monitor: keystore, principal registry, IPC bus
// and input attestation wired together.
class Platform {
 public:
  explicit Platform(const PlatformOptions& options = {})
      : entropy_(options.seed),
        keystore_(entropy_),
        registry_(keystore_),
        bus_(registry_, keystore_),
        events_(registry_, keystore_, entropy_, options.freshness_ms) {}

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  Registry& registry() noexcept { return registry_; }
  const Registry& registry() const noexcept { return registry_; }
  IpcBus& bus() noexcept { return bus_; }
  const IpcBus& bus() const noexcept { return bus_; }
  EventMonitor& events() noexcept { return events_; }
  const EventMonitor& events() const noexcept { return events_; }

  const Keystore& keystore_for_testing() const noexcept { return keystore_; }

 private:
  Entropy entropy_;
  Keystore keystore_;
  Registry registry_;
  IpcBus bus_;
  EventMonitor events_;
};

}  // namespace adshield
