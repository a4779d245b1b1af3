#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adshield/crypto.hpp"
#include "adshield/principals.hpp"

namespace adshield {

// One MAC-signed hop of call-chain provenance.
struct Statement {
  PrincipalId speaker;
  std::uint64_t counter = 0;
  Digest payload_digest{};
  Digest prev_mac{};  // all-zero at the chain head
  Digest mac{};

  bool operator==(const Statement&) const = default;
};

// 0x01 || lp(speaker) || counter_u64_be || payload_digest || prev_mac
Bytes canonical_statement_bytes(const Statement& s);

struct CallChain {
  std::vector<Statement> statements;

  const Statement& head() const { return statements.front(); }
  const Statement& last() const { return statements.back(); }
  bool operator==(const CallChain&) const = default;
};

struct Message {
  PrincipalId from;
  PrincipalId to;
  std::string op_name;
  Bytes payload;
  CallChain chain;
};

// 0x01 || lp(from) || lp(to) || lp(op_name) || lp(payload)
Bytes canonical_message_bytes(const PrincipalId& from, const PrincipalId& to,
                              std::string_view op_name, ByteView payload);
Digest message_digest(const PrincipalId& from, const PrincipalId& to,
                      std::string_view op_name, ByteView payload);

// Payload digest of a deputy-asserted chain head:
// SHA-256(0x03 || lp(op_name) || lp(payload) || parent_digest).
Digest assertion_digest(std::string_view op_name, ByteView payload,
                        const Digest& parent_digest);

class IpcBus;

// A chain that passed verify_chain. Only the bus can construct one.
class VerifiedChain {
 public:
  const CallChain& chain() const noexcept { return chain_; }
  // Speakers in chain order (duplicates preserved).
  const std::vector<PrincipalId>& speakers() const noexcept { return speakers_; }
  const PrincipalId& head_speaker() const { return speakers_.front(); }
  const PrincipalId& last_speaker() const { return speakers_.back(); }

 private:
  friend class IpcBus;
  VerifiedChain(CallChain chain, std::vector<PrincipalId> speakers)
      : chain_(std::move(chain)), speakers_(std::move(speakers)) {}

  CallChain chain_;
  std::vector<PrincipalId> speakers_;
};

// Audit link recorded when a deputy starts a fresh chain on its own authority.
struct AuditRecord {
  PrincipalId deputy;
  std::string op_name;
  Digest parent_digest{};  // SHA-256 of the parent chain's last mac
  Digest new_head_mac{};
  std::vector<PrincipalId> parent_speakers;
};

// Intersection over all distinct speakers of their granted permissions.
PermissionSet effective_permissions(const VerifiedChain& chain, const Registry& registry);

class IpcPort;

// Reference-monitor-mediated message bus. Signs each hop with the sender's
// monitor-held key and delivers to per-recipient FIFO inboxes.
class IpcBus {
 public:
  IpcBus(Registry& registry, Keystore& keystore);
  IpcBus(const IpcBus&) = delete;
  IpcBus& operator=(const IpcBus&) = delete;

  Message send(const Principal& from, const Principal& to, std::string op_name,
               Bytes payload, const CallChain* parent = nullptr);

  VerifiedChain verify_chain(const CallChain& chain) const;

  // Verifies the chain and checks that its last hop binds exactly this
  // message (speaker == from, digest over from|to|op_name|payload).
  VerifiedChain verify_message(const Message& msg) const;

  void allow_deputy(const Principal& p, std::string op_name);
  bool deputy_allowed(const PrincipalId& p, const std::string& op_name) const;

  CallChain assert_authority(const Principal& p, const VerifiedChain& parent,
                             std::string op_name, Bytes payload);

  std::optional<Message> receive(const Principal& p);
  std::size_t pending(const PrincipalId& p) const;

  std::vector<AuditRecord> audit_log() const;

  IpcPort port(const PrincipalId& id);

  Registry& registry() noexcept { return registry_; }
  const Registry& registry() const noexcept { return registry_; }

 private:
  Statement sign_locked(const Principal& speaker, const Digest& payload_digest,
                        const Digest& prev_mac);
  void record_counter_locked(const Statement& s, const Digest& content) const;

  Registry& registry_;
  Keystore& keystore_;

  mutable std::mutex mu_;
  std::map<PrincipalId, std::uint64_t> next_counter_;
  // (speaker, counter) -> SHA-256 of the canonical statement bytes.
  mutable std::map<std::pair<PrincipalId, std::uint64_t>, Digest> counter_ledger_;
  // Last mac of every delivered chain -> recipient.
  std::map<Digest, PrincipalId> delivered_to_;
  std::map<PrincipalId, std::deque<Message>> inboxes_;
  std::map<PrincipalId, std::set<std::string>> deputy_ops_;
  std::vector<AuditRecord> audit_;
};

// The IPC surface handed to an untrusted principal: it can only speak as
// itself.
class IpcPort {
 public:
  const PrincipalId& self() const noexcept { return self_; }

  Message send(const PrincipalId& to, std::string op_name, Bytes payload,
               const CallChain* parent = nullptr);
  std::optional<Message> receive();
  void offer_deputy(std::string op_name);
  CallChain assert_authority(const VerifiedChain& parent, std::string op_name,
                             Bytes payload);
  VerifiedChain verify(const CallChain& chain) const { return bus_->verify_chain(chain); }

 private:
  friend class IpcBus;
  IpcPort(IpcBus& bus, PrincipalId self) : bus_(&bus), self_(std::move(self)) {}

  IpcBus* bus_;
  PrincipalId self_;
};

}  // namespace adshield
