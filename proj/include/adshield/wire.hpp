#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "adshield/adchannel.hpp"
#include "adshield/ipcbus.hpp"
#include "adshield/principals.hpp"
#include "adshield/uievents.hpp"
#include "json.hpp"

// JSON wire formats. Binary fields (macs, digests, event ids) are unpadded
// base64url. Parsers throw Error{ParseError} on malformed input and
// Error{InvalidPermission} on bad permission names.
namespace adshield::wire {

using nlohmann::json;

// {"kind":"Host","permissions":["INTERNET","FINE_LOCATION"]}
json manifest_to_json(PrincipalKind kind, const PermissionManifest& manifest);
std::pair<PrincipalKind, PermissionManifest> manifest_from_json(const json& j);

json permissions_to_json(const PermissionSet& perms);
PermissionSet permissions_from_json(const json& j);

// {"principals":[...], "delegations":[...]}
json registry_dump(const Registry& registry);

json statement_to_json(const Statement& s);
Statement statement_from_json(const json& j);
json chain_to_json(const CallChain& chain);
CallChain chain_from_json(const json& j);

json click_token_to_json(const ClickToken& t);
ClickToken click_token_from_json(const json& j);

// {"impression_id":..., "token":{...}, "chain":[...], "submitted_at":...}
json click_report_to_json(const ClickReport& r);
ClickReport click_report_from_json(const json& j);

// Parses text, mapping nlohmann errors to Error{ParseError}.
json parse(std::string_view text);

}  // namespace adshield::wire
