#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "adshield/crypto.hpp"
#include "adshield/ipcbus.hpp"
#include "adshield/principals.hpp"
#include "adshield/uievents.hpp"

namespace adshield {

inline const PermissionId& internet_permission() {
  static const PermissionId kInternet{"INTERNET"};
  return kInternet;
}

struct AdCreative {
  std::string creative_id;
  Bytes content;
  Digest content_digest{};
  Digest server_fingerprint{};
};

// What a delivery endpoint hands back before the client checks the pin.
struct ServedCreative {
  std::string creative_id;
  Bytes content;
  Digest presented_fingerprint{};
};

class DeliveryEndpoint {
 public:
  virtual ~DeliveryEndpoint() = default;
  virtual ServedCreative serve(const PrincipalId& requester) = 0;
};

// Transparent proxy that blanks creatives and presents its own credential.
class BlankingProxy : public DeliveryEndpoint {
 public:
  BlankingProxy(DeliveryEndpoint& upstream, const Digest& fingerprint)
      : upstream_(upstream), fingerprint_(fingerprint) {}

  ServedCreative serve(const PrincipalId& requester) override;

 private:
  DeliveryEndpoint& upstream_;
  Digest fingerprint_;
};

// Permission check, then pin check. Without a requesting chain the ad's own
// grants decide; with one, the chain must end at `ad` and INTERNET must
// survive the chain's permission intersection.
AdCreative fetch_creative(const Registry& registry, const Principal& ad,
                          DeliveryEndpoint& endpoint, const Digest& pinned_fingerprint,
                          const VerifiedChain* requesting_chain = nullptr);

struct ImpressionRecord {
  ImpressionId impression_id;
  std::string creative_id;
  PrincipalId owner;
  Digest displayed_digest{};
  Timestamp timestamp = 0;
};

// Throws Error{CreativeMismatch} when the ids differ.
bool validate_display(const ImpressionRecord& record, const AdCreative& creative);

struct ClickReport {
  ImpressionId impression_id;
  ClickToken token;
  CallChain chain;
  Timestamp submitted_at = 0;
};

// Checked in this order; the first failure is reported.
enum class RejectReason {
  BadTokenMac,
  TokenImpressionMismatch,
  UnknownImpression,
  ImpressionOwnerMismatch,
  DisplayNotValidated,
  BadChain,
  ChainSpeakerMismatch,
  DuplicateToken,
};

std::string_view to_string(RejectReason reason) noexcept;

struct Verdict {
  std::optional<RejectReason> reason;  // empty when accepted

  bool accepted() const noexcept { return !reason.has_value(); }
  std::string_view name() const noexcept {
    return reason ? to_string(*reason) : std::string_view{"Accepted"};
  }
  bool operator==(const Verdict&) const = default;
};

struct RevenueTally {
  std::uint64_t accepted = 0;
  std::map<std::string, std::uint64_t> rejected_by_reason;

  std::uint64_t rejected() const;
  bool operator==(const RevenueTally&) const = default;
};

struct ServerLogEntry {
  Timestamp ts = 0;
  std::string token_id;
  std::string verdict;  // "Accepted" or "Rejected"
  std::string reason;   // empty when accepted
};

// One JSON object per line: {"reason":...,"token_id":...,"ts":...,"verdict":...}
std::string server_log_line(const ServerLogEntry& entry);

// Simulated remote ad server. Serves its creative catalogue under its own
// credential fingerprint, keeps the impression log, and verifies clicks.
class AdServer : public DeliveryEndpoint, public ImpressionDirectory {
 public:
  AdServer(const IpcBus& bus, const EventMonitor& events, const Digest& fingerprint,
           std::vector<Bytes> creatives);

  ServedCreative serve(const PrincipalId& requester) override;
  const Digest& fingerprint() const noexcept { return fingerprint_; }
  std::optional<AdCreative> creative(const std::string& creative_id) const;

  // Throws Error{NoRegisteredRegion} if `ad` owns no display region.
  ImpressionRecord record_impression(const Principal& ad, const AdCreative& creative,
                                     ByteView displayed, Timestamp ts);
  std::optional<ImpressionRecord> impression(const ImpressionId& id) const;
  std::optional<PrincipalId> impression_owner(const ImpressionId& id) const override;

  Verdict submit_click(const ClickReport& report, Timestamp now);

  RevenueTally revenue_tally() const;
  std::vector<ServerLogEntry> log() const;
  std::string log_jsonl() const;
  std::set<std::string> accepted_tokens() const;

 private:
  std::optional<RejectReason> check(const ClickReport& report) const;

  const IpcBus& bus_;
  const EventMonitor& events_;
  Digest fingerprint_;
  std::map<std::string, AdCreative> catalogue_;
  std::vector<std::string> catalogue_order_;

  mutable std::mutex mu_;
  std::uint64_t served_ = 0;
  std::map<ImpressionId, ImpressionRecord> impressions_;
  std::set<std::string> accepted_tokens_;
  std::vector<ServerLogEntry> log_;
  RevenueTally tally_;
};

// The ad principal reports a click by sending the token over the bus to the
// System network service; the resulting chain is the report's provenance.
ClickReport make_click_report(IpcBus& bus, const Principal& ad, const ClickToken& token,
                              Timestamp submitted_at);

}  // namespace adshield
