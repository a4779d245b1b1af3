#include "adshield/adchannel.hpp"

#include <sstream>

#include "adshield/error.hpp"
#include "json.hpp"

namespace adshield {

ServedCreative BlankingProxy::serve(const PrincipalId& requester) {
  ServedCreative upstream = upstream_.serve(requester);
  return ServedCreative{upstream.creative_id, Bytes{}, fingerprint_};
}

AdCreative fetch_creative(const Registry& registry, const Principal& ad,
                          DeliveryEndpoint& endpoint, const Digest& pinned_fingerprint,
                          const VerifiedChain* requesting_chain) {
  const PermissionId& internet = internet_permission();
  bool allowed = false;
  if (requesting_chain == nullptr) {
    allowed = registry.grant_check(ad, internet);
  } else {
    allowed = requesting_chain->last_speaker() == ad.id &&
              effective_permissions(*requesting_chain, registry).contains(internet);
  }
  if (!allowed) {
    throw Error(Errc::PermissionDenied, "'" + ad.id + "' may not use INTERNET");
  }

  ServedCreative served = endpoint.serve(ad.id);
  if (!digest_equal(served.presented_fingerprint, pinned_fingerprint)) {
    throw Error(Errc::PinMismatch, "endpoint presented fingerprint " +
                                       to_hex(served.presented_fingerprint));
  }
  AdCreative creative;
  creative.creative_id = std::move(served.creative_id);
  creative.content_digest = sha256(served.content);
  creative.content = std::move(served.content);
  creative.server_fingerprint = served.presented_fingerprint;
  return creative;
}

bool validate_display(const ImpressionRecord& record, const AdCreative& creative) {
  if (record.creative_id != creative.creative_id) {
    throw Error(Errc::CreativeMismatch,
                "impression shows '" + record.creative_id + "', not '" + creative.creative_id + "'");
  }
  return digest_equal(record.displayed_digest, creative.content_digest);
}

std::string_view to_string(RejectReason reason) noexcept {
  switch (reason) {
    case RejectReason::BadTokenMac: return "BadTokenMac";
    case RejectReason::TokenImpressionMismatch: return "TokenImpressionMismatch";
    case RejectReason::UnknownImpression: return "UnknownImpression";
    case RejectReason::ImpressionOwnerMismatch: return "ImpressionOwnerMismatch";
    case RejectReason::DisplayNotValidated: return "DisplayNotValidated";
    case RejectReason::BadChain: return "BadChain";
    case RejectReason::ChainSpeakerMismatch: return "ChainSpeakerMismatch";
    case RejectReason::DuplicateToken: return "DuplicateToken";
  }
  return "Unknown";
}

std::uint64_t RevenueTally::rejected() const {
  std::uint64_t total = 0;
  for (const auto& [reason, n] : rejected_by_reason) total += n;
  return total;
}

std::string server_log_line(const ServerLogEntry& entry) {
  nlohmann::json j;
  j["ts"] = entry.ts;
  j["token_id"] = entry.token_id;
  j["verdict"] = entry.verdict;
  j["reason"] = entry.reason.empty() ? nlohmann::json(nullptr) : nlohmann::json(entry.reason);
  return j.dump();
}

AdServer::AdServer(const IpcBus& bus, const EventMonitor& events, const Digest& fingerprint,
                   std::vector<Bytes> creatives)
    : bus_(bus), events_(events), fingerprint_(fingerprint) {
  for (auto& content : creatives) {
    AdCreative c;
    c.creative_id = "cr-" + std::to_string(catalogue_order_.size() + 1);
    c.content_digest = sha256(content);
    c.content = std::move(content);
    c.server_fingerprint = fingerprint_;
    catalogue_order_.push_back(c.creative_id);
    catalogue_.emplace(c.creative_id, std::move(c));
  }
  if (catalogue_.empty()) throw std::invalid_argument("AdServer needs at least one creative");
}

ServedCreative AdServer::serve(const PrincipalId& /*requester*/) {
  std::lock_guard lock(mu_);
  const AdCreative& c = catalogue_.at(catalogue_order_[served_++ % catalogue_order_.size()]);
  return ServedCreative{c.creative_id, c.content, fingerprint_};
}

std::optional<AdCreative> AdServer::creative(const std::string& creative_id) const {
  auto it = catalogue_.find(creative_id);
  if (it == catalogue_.end()) return std::nullopt;
  return it->second;
}

ImpressionRecord AdServer::record_impression(const Principal& ad, const AdCreative& creative,
                                             ByteView displayed, Timestamp ts) {
  if (events_.regions_owned_by(ad.id).empty()) {
    throw Error(Errc::NoRegisteredRegion, "'" + ad.id + "' has no display region");
  }
  std::lock_guard lock(mu_);
  ImpressionRecord r;
  r.impression_id = "imp-" + std::to_string(impressions_.size() + 1);
  r.creative_id = creative.creative_id;
  r.owner = ad.id;
  r.displayed_digest = sha256(displayed);
  r.timestamp = ts;
  impressions_.emplace(r.impression_id, r);
  return r;
}

std::optional<ImpressionRecord> AdServer::impression(const ImpressionId& id) const {
  std::lock_guard lock(mu_);
  auto it = impressions_.find(id);
  if (it == impressions_.end()) return std::nullopt;
  return it->second;
}

std::optional<PrincipalId> AdServer::impression_owner(const ImpressionId& id) const {
  auto r = impression(id);
  if (!r) return std::nullopt;
  return r->owner;
}

std::optional<RejectReason> AdServer::check(const ClickReport& report) const {
  const ClickToken& token = report.token;
  if (!events_.verify_token_mac(token)) return RejectReason::BadTokenMac;
  if (token.impression_id != report.impression_id) return RejectReason::TokenImpressionMismatch;

  auto record = impression(report.impression_id);
  if (!record) return RejectReason::UnknownImpression;
  if (record->owner != token.ad_principal) return RejectReason::ImpressionOwnerMismatch;
  auto served = creative(record->creative_id);
  if (!served || !validate_display(*record, *served)) return RejectReason::DisplayNotValidated;

  try {
    VerifiedChain chain = bus_.verify_chain(report.chain);
    if (chain.head_speaker() != token.ad_principal) return RejectReason::ChainSpeakerMismatch;
  } catch (const Error&) {
    return RejectReason::BadChain;
  }
  return std::nullopt;
}

Verdict AdServer::submit_click(const ClickReport& report, Timestamp now) {
  std::optional<RejectReason> reason = check(report);

  std::lock_guard lock(mu_);
  if (!reason && !accepted_tokens_.insert(report.token.token_id).second) {
    reason = RejectReason::DuplicateToken;
  }
  ServerLogEntry entry{now, report.token.token_id, reason ? "Rejected" : "Accepted",
                       reason ? std::string(to_string(*reason)) : std::string{}};
  if (reason) {
    ++tally_.rejected_by_reason[entry.reason];
  } else {
    ++tally_.accepted;
  }
  log_.push_back(std::move(entry));
  return Verdict{reason};
}

RevenueTally AdServer::revenue_tally() const {
  std::lock_guard lock(mu_);
  return tally_;
}

std::vector<ServerLogEntry> AdServer::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::string AdServer::log_jsonl() const {
  std::ostringstream out;
  for (const auto& entry : log()) out << server_log_line(entry) << '\n';
  return out.str();
}

std::set<std::string> AdServer::accepted_tokens() const {
  std::lock_guard lock(mu_);
  return accepted_tokens_;
}

ClickReport make_click_report(IpcBus& bus, const Principal& ad, const ClickToken& token,
                              Timestamp submitted_at) {
  const Principal& system = bus.registry().system();
  Message msg = bus.send(ad, system, "report_click", canonical_token_bytes(token));
  return ClickReport{token.impression_id, token, std::move(msg.chain), submitted_at};
}

}  // namespace adshield
