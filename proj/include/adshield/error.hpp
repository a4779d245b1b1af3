#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adshield {

enum class Errc {
  InvalidPermission,
  InvalidLabel,
  DuplicatePrincipal,
  DuplicateSystem,
  UnknownPrincipal,
  NotHeldByGrantor,
  KindMismatch,
  UnknownToken,
  EmptyChain,
  InvalidParentChain,
  BadMac,
  BrokenLink,
  CounterReplay,
  DeputyPolicyDenied,
  NotRecipient,
  DegenerateBounds,
  OutOfBounds,
  UnknownRegion,
  BadEventMac,
  StaleEvent,
  EventAlreadyConsumed,
  RegionOwnerMismatch,
  UnknownImpression,
  PinMismatch,
  PermissionDenied,
  NoRegisteredRegion,
  CreativeMismatch,
  InvalidScenario,
  UnknownLibrary,
  DuplicateApp,
  ParseError,
  CorruptCheckpoint,
};

std::string_view to_string(Errc code) noexcept;

// All failures raised by the library. `index()` carries the offending
// position for chain verification errors.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail,
        std::optional<std::size_t> index = std::nullopt);

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  Errc code_;
  std::optional<std::size_t> index_;
};

}  // namespace adshield
