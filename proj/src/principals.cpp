#include "adshield/principals.hpp"

#include <algorithm>
#include <mutex>

#include "adshield/error.hpp"

namespace adshield {

PermissionId::PermissionId(std::string name) : name_(std::move(name)) {
  if (!valid(name_)) {
    throw Error(Errc::InvalidPermission, "'" + name_ + "' must match [A-Z_]{1,64}");
  }
}

bool PermissionId::valid(std::string_view name) noexcept {
  if (name.empty() || name.size() > 64) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return (c >= 'A' && c <= 'Z') || c == '_'; });
}

PermissionSet make_permissions(std::initializer_list<std::string_view> names) {
  PermissionSet out;
  for (auto n : names) out.emplace(std::string(n));
  return out;
}

std::string_view to_string(PrincipalKind kind) noexcept {
  switch (kind) {
    case PrincipalKind::Host: return "Host";
    case PrincipalKind::Ad: return "Ad";
    case PrincipalKind::System: return "System";
    case PrincipalKind::Blocker: return "Blocker";
  }
  return "Host";
}

PrincipalKind parse_principal_kind(std::string_view text) {
  if (text == "Host") return PrincipalKind::Host;
  if (text == "Ad") return PrincipalKind::Ad;
  if (text == "System") return PrincipalKind::System;
  if (text == "Blocker") return PrincipalKind::Blocker;
  throw Error(Errc::ParseError, "unknown principal kind '" + std::string(text) + "'");
}

// --- Keystore ---------------------------------------------------------------

KeyId Keystore::create_key() {
  MacKey key = entropy_.draw<kDigestSize>();
  std::unique_lock lock(mu_);
  keys_.push_back(key);
  return static_cast<KeyId>(keys_.size() - 1);
}

const MacKey& Keystore::lookup(KeyId key) const {
  if (key >= keys_.size()) {
    throw std::out_of_range("keystore: unknown key id " + std::to_string(key));
  }
  return keys_[key];
}

Digest Keystore::mac(KeyId key, ByteView data) const {
  std::shared_lock lock(mu_);
  return hmac_sha256(lookup(key), data);
}

bool Keystore::verify(KeyId key, ByteView data, const Digest& mac) const {
  std::shared_lock lock(mu_);
  if (key >= keys_.size()) return false;
  return digest_equal(hmac_sha256(keys_[key], data), mac);
}

std::size_t Keystore::size() const {
  std::shared_lock lock(mu_);
  return keys_.size();
}

MacKey Keystore::key_bytes_for_testing(KeyId key) const {
  std::shared_lock lock(mu_);
  return lookup(key);
}

// --- Registry ---------------------------------------------------------------

namespace {

bool valid_label(std::string_view label) {
  if (label.empty() || label.size() > 64) return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

Registry::Registry(Keystore& keystore) : keystore_(keystore) {
  system_ = Principal{std::string(kSystemPrincipalId), next_uid_++,
                      PrincipalKind::System, {}, keystore_.create_key()};
  by_id_.emplace(system_.id, system_);
  uids_.insert(system_.uid);
}

Principal Registry::install(const PermissionManifest& manifest, PrincipalKind kind,
                            std::optional<std::string> label) {
  if (kind == PrincipalKind::System) {
    throw Error(Errc::DuplicateSystem, "registry already has a System principal");
  }
  if (label && !valid_label(*label)) {
    throw Error(Errc::InvalidLabel, "'" + *label + "'");
  }
  std::unique_lock lock(mu_);
  std::uint32_t uid = next_uid_;
  PrincipalId id = label ? *label : "app-" + std::to_string(uid);
  if (by_id_.contains(id)) {
    throw Error(Errc::DuplicatePrincipal, "'" + id + "' is already installed");
  }
  Principal p{id, uid, kind, manifest, keystore_.create_key()};
  ++next_uid_;
  uids_.insert(uid);
  by_id_.emplace(id, p);
  return p;
}

void Registry::require_installed(const Principal& p) const {
  auto it = by_id_.find(p.id);
  if (it == by_id_.end() || it->second.uid != p.uid) {
    throw Error(Errc::UnknownPrincipal, "'" + p.id + "'");
  }
}

bool Registry::grant_check_locked(const Principal& p, const PermissionId& perm) const {
  if (p.kind == PrincipalKind::System) return true;
  if (p.manifest.requested.contains(perm)) return true;
  return std::any_of(ledger_.begin(), ledger_.end(), [&](const DelegationToken& t) {
    return !t.revoked && t.grantee == p.id && t.permission == perm;
  });
}

bool Registry::grant_check(const Principal& p, const PermissionId& perm) const {
  std::shared_lock lock(mu_);
  require_installed(p);
  return grant_check_locked(by_id_.at(p.id), perm);
}

DelegationToken Registry::delegate(const Principal& host, const Principal& ad,
                                   const PermissionId& perm) {
  std::unique_lock lock(mu_);
  require_installed(host);
  require_installed(ad);
  const Principal& grantor = by_id_.at(host.id);
  const Principal& grantee = by_id_.at(ad.id);
  if (grantor.kind != PrincipalKind::Host || grantee.kind != PrincipalKind::Ad) {
    throw Error(Errc::KindMismatch, "delegation runs from a Host to an Ad principal");
  }
  if (!grantor.manifest.requested.contains(perm)) {
    throw Error(Errc::NotHeldByGrantor, "'" + grantor.id + "' lacks " + perm.name());
  }
  DelegationToken token{grantor.id, grantee.id, perm,
                        "dlg-" + std::to_string(ledger_.size() + 1), false};
  token_index_.emplace(token.token_id, ledger_.size());
  ledger_.push_back(token);
  return token;
}

void Registry::revoke(const std::string& token_id) {
  std::unique_lock lock(mu_);
  auto it = token_index_.find(token_id);
  if (it == token_index_.end()) {
    throw Error(Errc::UnknownToken, "'" + token_id + "'");
  }
  ledger_[it->second].revoked = true;
}

PermissionSet Registry::universe_locked() const {
  PermissionSet all;
  for (const auto& [id, p] : by_id_) {
    all.insert(p.manifest.requested.begin(), p.manifest.requested.end());
  }
  for (const auto& t : ledger_) all.insert(t.permission);
  return all;
}

PermissionSet Registry::granted_permissions(const PrincipalId& id) const {
  std::shared_lock lock(mu_);
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error(Errc::UnknownPrincipal, "'" + id + "'");
  const Principal& p = it->second;
  if (p.kind == PrincipalKind::System) return universe_locked();
  PermissionSet out = p.manifest.requested;
  for (const auto& t : ledger_) {
    if (!t.revoked && t.grantee == id) out.insert(t.permission);
  }
  return out;
}

PermissionSet Registry::permission_universe() const {
  std::shared_lock lock(mu_);
  return universe_locked();
}

Principal Registry::get(const PrincipalId& id) const {
  auto p = find(id);
  if (!p) throw Error(Errc::UnknownPrincipal, "'" + id + "'");
  return *p;
}

std::optional<Principal> Registry::find(const PrincipalId& id) const {
  std::shared_lock lock(mu_);
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<Principal> Registry::principals() const {
  std::shared_lock lock(mu_);
  std::vector<Principal> out;
  out.reserve(by_id_.size());
  for (const auto& [id, p] : by_id_) out.push_back(p);
  std::sort(out.begin(), out.end(),
            [](const Principal& a, const Principal& b) { return a.uid < b.uid; });
  return out;
}

std::vector<DelegationToken> Registry::ledger() const {
  std::shared_lock lock(mu_);
  return ledger_;
}

std::size_t Registry::size() const {
  std::shared_lock lock(mu_);
  return by_id_.size();
}

}  // namespace adshield
