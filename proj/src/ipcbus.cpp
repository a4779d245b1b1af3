#include "adshield/ipcbus.hpp"

#include <algorithm>
#include <iterator>

#include "adshield/error.hpp"

namespace adshield {

namespace {

constexpr std::uint8_t kStatementVersion = 0x01;
constexpr std::uint8_t kMessageVersion = 0x01;
constexpr std::uint8_t kAssertionTag = 0x03;

}  // namespace

Bytes canonical_statement_bytes(const Statement& s) {
  return CanonicalWriter{}
      .u8(kStatementVersion)
      .lp(s.speaker)
      .u64(s.counter)
      .raw(s.payload_digest)
      .raw(s.prev_mac)
      .take();
}

Bytes canonical_message_bytes(const PrincipalId& from, const PrincipalId& to,
                              std::string_view op_name, ByteView payload) {
  return CanonicalWriter{}.u8(kMessageVersion).lp(from).lp(to).lp(op_name).lp(payload).take();
}

Digest message_digest(const PrincipalId& from, const PrincipalId& to,
                      std::string_view op_name, ByteView payload) {
  return sha256(canonical_message_bytes(from, to, op_name, payload));
}

Digest assertion_digest(std::string_view op_name, ByteView payload,
                        const Digest& parent_digest) {
  return sha256(
      CanonicalWriter{}.u8(kAssertionTag).lp(op_name).lp(payload).raw(parent_digest).bytes());
}

PermissionSet effective_permissions(const VerifiedChain& chain, const Registry& registry) {
  // System's grant set is the registry universe, which is the identity for
  // this fold.
  std::set<PrincipalId> seen;
  std::optional<PermissionSet> acc;
  for (const auto& speaker : chain.speakers()) {
    if (!seen.insert(speaker).second) continue;
    PermissionSet granted = registry.granted_permissions(speaker);
    if (!acc) {
      acc = std::move(granted);
      continue;
    }
    PermissionSet next;
    std::set_intersection(acc->begin(), acc->end(), granted.begin(), granted.end(),
                          std::inserter(next, next.end()));
    acc = std::move(next);
  }
  return acc.value_or(PermissionSet{});
}

IpcBus::IpcBus(Registry& registry, Keystore& keystore)
    : registry_(registry), keystore_(keystore) {}

Statement IpcBus::sign_locked(const Principal& speaker, const Digest& payload_digest,
                              const Digest& prev_mac) {
  Statement s;
  s.speaker = speaker.id;
  s.counter = ++next_counter_[speaker.id];
  s.payload_digest = payload_digest;
  s.prev_mac = prev_mac;
  Bytes canonical = canonical_statement_bytes(s);
  s.mac = keystore_.mac(speaker.mac_key_id, canonical);
  counter_ledger_.emplace(std::make_pair(s.speaker, s.counter), sha256(canonical));
  return s;
}

Message IpcBus::send(const Principal& from, const Principal& to, std::string op_name,
                     Bytes payload, const CallChain* parent) {
  Principal sender = registry_.get(from.id);
  Principal recipient = registry_.get(to.id);
  if (sender.uid != from.uid) throw Error(Errc::UnknownPrincipal, "'" + from.id + "'");
  if (recipient.uid != to.uid) throw Error(Errc::UnknownPrincipal, "'" + to.id + "'");

  Digest prev{};
  CallChain chain;
  if (parent != nullptr) {
    try {
      verify_chain(*parent);
    } catch (const Error& e) {
      throw Error(Errc::InvalidParentChain, e.what());
    }
    chain = *parent;
    prev = parent->last().mac;
  }

  Digest digest = message_digest(sender.id, recipient.id, op_name, payload);
  std::lock_guard lock(mu_);
  chain.statements.push_back(sign_locked(sender, digest, prev));
  Message msg{sender.id, recipient.id, std::move(op_name), std::move(payload), std::move(chain)};
  delivered_to_[msg.chain.last().mac] = recipient.id;
  inboxes_[recipient.id].push_back(msg);
  return msg;
}

VerifiedChain IpcBus::verify_chain(const CallChain& chain) const {
  if (chain.statements.empty()) throw Error(Errc::EmptyChain, "call chain has no statements");

  std::vector<PrincipalId> speakers;
  std::vector<Digest> contents;
  speakers.reserve(chain.statements.size());
  contents.reserve(chain.statements.size());
  std::map<PrincipalId, std::uint64_t> last_counter;

  for (std::size_t i = 0; i < chain.statements.size(); ++i) {
    const Statement& s = chain.statements[i];
    auto speaker = registry_.find(s.speaker);
    Bytes canonical = canonical_statement_bytes(s);
    if (!speaker || !keystore_.verify(speaker->mac_key_id, canonical, s.mac)) {
      throw Error(Errc::BadMac, "statement mac does not verify", i);
    }
    const Digest expected_prev = i == 0 ? Digest{} : chain.statements[i - 1].mac;
    if (!digest_equal(s.prev_mac, expected_prev)) {
      throw Error(Errc::BrokenLink, "prev_mac does not match preceding statement", i);
    }
    auto [it, fresh] = last_counter.try_emplace(s.speaker, s.counter);
    if (!fresh) {
      if (s.counter <= it->second) {
        throw Error(Errc::CounterReplay, "speaker counter did not increase", i);
      }
      it->second = s.counter;
    }
    speakers.push_back(s.speaker);
    contents.push_back(sha256(canonical));
  }

  // Check-and-record against the counter ledger as one atomic step.
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < chain.statements.size(); ++i) {
    const Statement& s = chain.statements[i];
    auto it = counter_ledger_.find({s.speaker, s.counter});
    if (it != counter_ledger_.end() && !digest_equal(it->second, contents[i])) {
      throw Error(Errc::CounterReplay, "counter reused with different content", i);
    }
  }
  for (std::size_t i = 0; i < chain.statements.size(); ++i) {
    const Statement& s = chain.statements[i];
    counter_ledger_.emplace(std::make_pair(s.speaker, s.counter), contents[i]);
  }
  return VerifiedChain(chain, std::move(speakers));
}

VerifiedChain IpcBus::verify_message(const Message& msg) const {
  VerifiedChain verified = verify_chain(msg.chain);
  const std::size_t last = msg.chain.statements.size() - 1;
  if (verified.last_speaker() != msg.from) {
    throw Error(Errc::BadMac, "last speaker is not the sender", last);
  }
  if (!digest_equal(msg.chain.last().payload_digest,
                    message_digest(msg.from, msg.to, msg.op_name, msg.payload))) {
    throw Error(Errc::BadMac, "payload digest does not bind the message", last);
  }
  return verified;
}

void IpcBus::allow_deputy(const Principal& p, std::string op_name) {
  registry_.get(p.id);
  std::lock_guard lock(mu_);
  deputy_ops_[p.id].insert(std::move(op_name));
}

bool IpcBus::deputy_allowed(const PrincipalId& p, const std::string& op_name) const {
  std::lock_guard lock(mu_);
  auto it = deputy_ops_.find(p);
  return it != deputy_ops_.end() && it->second.contains(op_name);
}

CallChain IpcBus::assert_authority(const Principal& p, const VerifiedChain& parent,
                                   std::string op_name, Bytes payload) {
  Principal deputy = registry_.get(p.id);
  if (!deputy_allowed(deputy.id, op_name)) {
    throw Error(Errc::DeputyPolicyDenied,
                "'" + deputy.id + "' does not offer '" + op_name + "' as a deputy");
  }
  const Digest parent_digest = sha256(parent.chain().last().mac);
  const Digest payload_digest = assertion_digest(op_name, payload, parent_digest);

  std::lock_guard lock(mu_);
  auto delivered = delivered_to_.find(parent.chain().last().mac);
  if (delivered == delivered_to_.end() || delivered->second != deputy.id) {
    throw Error(Errc::NotRecipient, "'" + deputy.id + "' did not receive the parent chain");
  }
  CallChain head{{sign_locked(deputy, payload_digest, Digest{})}};
  audit_.push_back(AuditRecord{deputy.id, std::move(op_name), parent_digest,
                               head.last().mac, parent.speakers()});
  return head;
}

std::optional<Message> IpcBus::receive(const Principal& p) {
  std::lock_guard lock(mu_);
  auto it = inboxes_.find(p.id);
  if (it == inboxes_.end() || it->second.empty()) return std::nullopt;
  Message msg = std::move(it->second.front());
  it->second.pop_front();
  return msg;
}

std::size_t IpcBus::pending(const PrincipalId& p) const {
  std::lock_guard lock(mu_);
  auto it = inboxes_.find(p);
  return it == inboxes_.end() ? 0 : it->second.size();
}

std::vector<AuditRecord> IpcBus::audit_log() const {
  std::lock_guard lock(mu_);
  return audit_;
}

IpcPort IpcBus::port(const PrincipalId& id) {
  registry_.get(id);
  return IpcPort(*this, id);
}

Message IpcPort::send(const PrincipalId& to, std::string op_name, Bytes payload,
                      const CallChain* parent) {
  const Registry& reg = bus_->registry();
  return bus_->send(reg.get(self_), reg.get(to), std::move(op_name), std::move(payload),
                    parent);
}

std::optional<Message> IpcPort::receive() { return bus_->receive(bus_->registry().get(self_)); }

void IpcPort::offer_deputy(std::string op_name) {
  bus_->allow_deputy(bus_->registry().get(self_), std::move(op_name));
}

CallChain IpcPort::assert_authority(const VerifiedChain& parent, std::string op_name,
                                    Bytes payload) {
  return bus_->assert_authority(bus_->registry().get(self_), parent, std::move(op_name),
                                std::move(payload));
}

}  // namespace adshield
