#include "adshield/error.hpp"

namespace adshield {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidPermission: return "InvalidPermission";
    case Errc::InvalidLabel: return "InvalidLabel";
    case Errc::DuplicatePrincipal: return "DuplicatePrincipal";
    case Errc::DuplicateSystem: return "DuplicateSystem";
    case Errc::UnknownPrincipal: return "UnknownPrincipal";
    case Errc::NotHeldByGrantor: return "NotHeldByGrantor";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::UnknownToken: return "UnknownToken";
    case Errc::EmptyChain: return "EmptyChain";
    case Errc::InvalidParentChain: return "InvalidParentChain";
    case Errc::BadMac: return "BadMac";
    case Errc::BrokenLink: return "BrokenLink";
    case Errc::CounterReplay: return "CounterReplay";
    case Errc::DeputyPolicyDenied: return "DeputyPolicyDenied";
    case Errc::NotRecipient: return "NotRecipient";
    case Errc::DegenerateBounds: return "DegenerateBounds";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::UnknownRegion: return "UnknownRegion";
    case Errc::BadEventMac: return "BadEventMac";
    case Errc::StaleEvent: return "StaleEvent";
    case Errc::EventAlreadyConsumed: return "EventAlreadyConsumed";
    case Errc::RegionOwnerMismatch: return "RegionOwnerMismatch";
    case Errc::UnknownImpression: return "UnknownImpression";
    case Errc::PinMismatch: return "PinMismatch";
    case Errc::PermissionDenied: return "PermissionDenied";
    case Errc::NoRegisteredRegion: return "NoRegisteredRegion";
    case Errc::CreativeMismatch: return "CreativeMismatch";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::UnknownLibrary: return "UnknownLibrary";
    case Errc::DuplicateApp: return "DuplicateApp";
    case Errc::ParseError: return "ParseError";
    case Errc::CorruptCheckpoint: return "CorruptCheckpoint";
  }
  return "Unknown";
}

namespace {

std::string format_message(Errc code, const std::string& detail,
                           std::optional<std::size_t> index) {
  std::string msg(to_string(code));
  if (index) msg += "{" + std::to_string(*index) + "}";
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

Error::Error(Errc code, const std::string& detail,
             std::optional<std::size_t> index)
    : std::runtime_error(format_message(code, detail, index)),
      code_(code),
      index_(index) {}

}  // namespace adshield
