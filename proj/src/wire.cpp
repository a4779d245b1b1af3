#include "adshield/wire.hpp"

#include <algorithm>

#include "adshield/error.hpp"

namespace adshield::wire {

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(Errc::ParseError, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

EventId event_id_from_base64url(std::string_view text) {
  Bytes raw = base64url_decode(text);
  if (raw.size() != 16) throw Error(Errc::ParseError, "event_id must be 16 bytes");
  EventId id{};
  std::copy(raw.begin(), raw.end(), id.begin());
  return id;
}

}  // namespace

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
}

json permissions_to_json(const PermissionSet& perms) {
  json arr = json::array();
  for (const auto& p : perms) arr.push_back(p.name());
  return arr;
}

PermissionSet permissions_from_json(const json& j) {
  if (!j.is_array()) throw Error(Errc::ParseError, "permissions must be an array");
  PermissionSet out;
  for (const auto& item : j) {
    if (!item.is_string()) throw Error(Errc::ParseError, "permission must be a string");
    out.emplace(item.get<std::string>());
  }
  return out;
}

json manifest_to_json(PrincipalKind kind, const PermissionManifest& manifest) {
  return json{{"kind", std::string(to_string(kind))},
              {"permissions", permissions_to_json(manifest.requested)}};
}

std::pair<PrincipalKind, PermissionManifest> manifest_from_json(const json& j) {
  PrincipalKind kind = parse_principal_kind(field<std::string>(j, "kind"));
  if (!j.contains("permissions")) throw Error(Errc::ParseError, "missing field 'permissions'");
  return {kind, PermissionManifest{permissions_from_json(j.at("permissions"))}};
}

json registry_dump(const Registry& registry) {
  json principals = json::array();
  for (const auto& p : registry.principals()) {
    principals.push_back(json{{"id", p.id},
                              {"uid", p.uid},
                              {"kind", std::string(to_string(p.kind))},
                              {"permissions", permissions_to_json(p.manifest.requested)}});
  }
  json delegations = json::array();
  for (const auto& t : registry.ledger()) {
    delegations.push_back(json{{"token_id", t.token_id},
                               {"grantor", t.grantor},
                               {"grantee", t.grantee},
                               {"permission", t.permission.name()},
                               {"revoked", t.revoked}});
  }
  return json{{"principals", principals}, {"delegations", delegations}};
}

json statement_to_json(const Statement& s) {
  return json{{"speaker", s.speaker},
              {"counter", s.counter},
              {"payload_digest", base64url_encode(s.payload_digest)},
              {"prev_mac", base64url_encode(s.prev_mac)},
              {"mac", base64url_encode(s.mac)}};
}

Statement statement_from_json(const json& j) {
  Statement s;
  s.speaker = field<std::string>(j, "speaker");
  s.counter = field<std::uint64_t>(j, "counter");
  s.payload_digest = digest_from_base64url(field<std::string>(j, "payload_digest"));
  s.prev_mac = digest_from_base64url(field<std::string>(j, "prev_mac"));
  s.mac = digest_from_base64url(field<std::string>(j, "mac"));
  return s;
}

json chain_to_json(const CallChain& chain) {
  json arr = json::array();
  for (const auto& s : chain.statements) arr.push_back(statement_to_json(s));
  return arr;
}

CallChain chain_from_json(const json& j) {
  if (!j.is_array()) throw Error(Errc::ParseError, "chain must be an array");
  CallChain chain;
  for (const auto& item : j) chain.statements.push_back(statement_from_json(item));
  return chain;
}

json click_token_to_json(const ClickToken& t) {
  return json{{"token_id", t.token_id},
              {"event_id", base64url_encode(t.event_id)},
              {"impression_id", t.impression_id},
              {"ad_principal", t.ad_principal},
              {"mac", base64url_encode(t.mac)}};
}

ClickToken click_token_from_json(const json& j) {
  ClickToken t;
  t.token_id = field<std::string>(j, "token_id");
  t.event_id = event_id_from_base64url(field<std::string>(j, "event_id"));
  t.impression_id = field<std::string>(j, "impression_id");
  t.ad_principal = field<std::string>(j, "ad_principal");
  t.mac = digest_from_base64url(field<std::string>(j, "mac"));
  return t;
}

json click_report_to_json(const ClickReport& r) {
  return json{{"impression_id", r.impression_id},
              {"token", click_token_to_json(r.token)},
              {"chain", chain_to_json(r.chain)},
              {"submitted_at", r.submitted_at}};
}

ClickReport click_report_from_json(const json& j) {
  ClickReport r;
  r.impression_id = field<std::string>(j, "impression_id");
  if (!j.contains("token") || !j.contains("chain")) {
    throw Error(Errc::ParseError, "click report needs 'token' and 'chain'");
  }
  r.token = click_token_from_json(j.at("token"));
  r.chain = chain_from_json(j.at("chain"));
  r.submitted_at = field<std::uint64_t>(j, "submitted_at");
  return r;
}

}  // namespace adshield::wire
