#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "adshield/crypto.hpp"

namespace adshield {

// An install-time permission token such as INTERNET or FINE_LOCATION.
// Always matches [A-Z_]{1,64}.
class PermissionId {
 public:
  // Throws Error{InvalidPermission}.
  explicit PermissionId(std::string name);

  const std::string& name() const noexcept { return name_; }
  auto operator<=>(const PermissionId&) const = default;

  static bool valid(std::string_view name) noexcept;

 private:
  std::string name_;
};

using PermissionSet = std::set<PermissionId>;

PermissionSet make_permissions(std::initializer_list<std::string_view> names);

struct PermissionManifest {
  PermissionSet requested;
  bool operator==(const PermissionManifest&) const = default;
};

enum class PrincipalKind { Host, Ad, System, Blocker };

std::string_view to_string(PrincipalKind kind) noexcept;
// Throws Error{ParseError}.
PrincipalKind parse_principal_kind(std::string_view text);

using PrincipalId = std::string;
using KeyId = std::uint32_t;

struct Principal {
  PrincipalId id;
  std::uint32_t uid = 0;
  PrincipalKind kind = PrincipalKind::Host;
  PermissionManifest manifest;
  KeyId mac_key_id = 0;

  bool operator==(const Principal&) const = default;
};

// Monitor-held secret keys. Nothing outside the trusted computing base gets
// a reference to this object.
class Keystore {
 public:
  explicit Keystore(Entropy& entropy) : entropy_(entropy) {}
  Keystore(const Keystore&) = delete;
  Keystore& operator=(const Keystore&) = delete;

  KeyId create_key();
  Digest mac(KeyId key, ByteView data) const;
  bool verify(KeyId key, ByteView data, const Digest& mac) const;
  std::size_t size() const;

  // Raw key access for test oracles only.
  MacKey key_bytes_for_testing(KeyId key) const;

 private:
  const MacKey& lookup(KeyId key) const;

  Entropy& entropy_;
  mutable std::shared_mutex mu_;
  std::vector<MacKey> keys_;
};

struct DelegationToken {
  PrincipalId grantor;
  PrincipalId grantee;
  PermissionId permission;
  std::string token_id;
  bool revoked = false;

  bool operator==(const DelegationToken&) const = default;
};

inline constexpr std::uint32_t kFirstUid = 1000;
inline constexpr std::string_view kSystemPrincipalId = "system";

// Registry of installed principals plus the delegation ledger.
//
// The System principal is installed by the constructor at uid 1000, so the
// first application install receives uid 1001. Reads are concurrent; all
// mutations are serialized by a single writer lock.
class Registry {
 public:
  explicit Registry(Keystore& keystore);
  Registry(const Registry&) = delete;
  Registry& operator=(const Registry&) = delete;

  // `label` becomes the principal id when given; otherwise "app-<uid>".
  Principal install(const PermissionManifest& manifest, PrincipalKind kind,
                    std::optional<std::string> label = std::nullopt);

  bool grant_check(const Principal& p, const PermissionId& perm) const;

  DelegationToken delegate(const Principal& host, const Principal& ad,
                           const PermissionId& perm);
  void revoke(const std::string& token_id);
  void revoke(const DelegationToken& token) { revoke(token.token_id); }

  // Every permission `id` currently passes grant_check for. For System the
  // result is permission_universe().
  PermissionSet granted_permissions(const PrincipalId& id) const;
  // Union of all manifests and delegated permissions known to the registry.
  PermissionSet permission_universe() const;

  Principal get(const PrincipalId& id) const;
  std::optional<Principal> find(const PrincipalId& id) const;
  const Principal& system() const noexcept { return system_; }
  std::vector<Principal> principals() const;
  std::vector<DelegationToken> ledger() const;
  std::size_t size() const;

 private:
  void require_installed(const Principal& p) const;
  bool grant_check_locked(const Principal& p, const PermissionId& perm) const;
  PermissionSet universe_locked() const;

  Keystore& keystore_;
  mutable std::shared_mutex mu_;
  std::map<PrincipalId, Principal> by_id_;
  std::set<std::uint32_t> uids_;
  std::uint32_t next_uid_ = kFirstUid;
  std::vector<DelegationToken> ledger_;
  std::map<std::string, std::size_t> token_index_;
  Principal system_;
};

}  // namespace adshield
