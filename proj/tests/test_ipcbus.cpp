#include "doctest.h"

#include <map>
#include <set>
#include <thread>

#include "adshield/error.hpp"
#include "adshield/ipcbus.hpp"
#include "adshield/platform.hpp"
#include "adshield/wire.hpp"
#include "support.hpp"

using namespace adshield;
using adshield::testkit::Gen;
using adshield::testkit::to_bytes;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::ParseError;
}

// Signs a statement the way the monitor does, from raw key bytes. Only test
// oracles can do this.
Statement sign_with(const MacKey& key, Statement s) {
  s.mac = hmac_sha256(key, canonical_statement_bytes(s));
  return s;
}

// Invokes fn(mutant) for every single-bit flip of every field of every
// statement. Returns the number of mutants.
template <typename Fn>
std::size_t for_each_bit_flip(const CallChain& chain, Fn&& fn) {
  std::size_t n = 0;
  auto flip_all = [&](std::size_t i, auto member) {
    const std::size_t size = (chain.statements[i].*member).size();
    for (std::size_t byte = 0; byte < size; ++byte) {
      for (int bit = 0; bit < 8; ++bit) {
        CallChain mutant = chain;
        auto& f = mutant.statements[i].*member;
        f[byte] = static_cast<std::remove_reference_t<decltype(f[byte])>>(f[byte] ^ (1u << bit));
        fn(mutant);
        ++n;
      }
    }
  };
  for (std::size_t i = 0; i < chain.statements.size(); ++i) {
    flip_all(i, &Statement::speaker);
    flip_all(i, &Statement::payload_digest);
    flip_all(i, &Statement::prev_mac);
    flip_all(i, &Statement::mac);
    for (int bit = 0; bit < 64; ++bit) {
      CallChain mutant = chain;
      mutant.statements[i].counter ^= std::uint64_t{1} << bit;
      fn(mutant);
      ++n;
    }
  }
  return n;
}

struct Trio {
  explicit Trio(std::uint64_t seed = 5) : platform(PlatformOptions{seed}) {
    a = reg().install({make_permissions({"INTERNET", "FINE_LOCATION"})}, PrincipalKind::Host, "a");
    b = reg().install({make_permissions({"INTERNET"})}, PrincipalKind::Ad, "b");
    c = reg().install({}, PrincipalKind::Host, "c");
  }
  Registry& reg() { return platform.registry(); }
  IpcBus& bus() { return platform.bus(); }
  MacKey key(const Principal& p) {
    return platform.keystore_for_testing().key_bytes_for_testing(p.mac_key_id);
  }

  CallChain three_hop() {
    Message m1 = bus().send(a, b, "ping", to_bytes("one"));
    Message m2 = bus().send(b, c, "ping", to_bytes("two"), &m1.chain);
    Message m3 = bus().send(c, reg().system(), "ping", to_bytes("three"), &m2.chain);
    return m3.chain;
  }

  Platform platform;
  Principal a, b, c;
};

}  // namespace

TEST_CASE("send builds hash-linked chains") {
  Trio t;
  Message m1 = t.bus().send(t.a, t.b, "ping", {});
  CHECK(m1.chain.statements.size() == 1);
  CHECK(m1.chain.head().speaker == "a");
  CHECK(m1.chain.head().prev_mac == Digest{});
  CHECK(m1.chain.head().payload_digest ==
        sha256(canonical_message_bytes("a", "b", "ping", Bytes{})));

  Message m2 = t.bus().send(t.b, t.c, "ping", {}, &m1.chain);
  REQUIRE(m2.chain.statements.size() == 2);
  CHECK(m2.chain.statements[1].speaker == "b");
  CHECK(m2.chain.statements[1].prev_mac == m1.chain.head().mac);

  VerifiedChain v = t.bus().verify_chain(t.three_hop());
  CHECK(v.speakers() == std::vector<PrincipalId>{"a", "b", "c"});
  CHECK(v.head_speaker() == "a");
  CHECK(v.last_speaker() == "c");
}

TEST_CASE("canonical statement bytes layout") {
  Statement s;
  s.speaker = "ab";
  s.counter = 0x0102;
  s.payload_digest.fill(0x11);
  s.prev_mac.fill(0x22);
  Bytes b = canonical_statement_bytes(s);
  REQUIRE(b.size() == 1 + 4 + 2 + 8 + 32 + 32);
  CHECK(b[0] == 0x01);
  CHECK(Bytes(b.begin() + 1, b.begin() + 7) == Bytes{0, 0, 0, 2, 'a', 'b'});
  CHECK(Bytes(b.begin() + 7, b.begin() + 15) == Bytes{0, 0, 0, 0, 0, 0, 1, 2});
  CHECK(b[15] == 0x11);
  CHECK(b[47] == 0x22);
  CHECK(canonical_message_bytes("f", "t", "op", to_bytes("p")) ==
        Bytes{1, 0, 0, 0, 1, 'f', 0, 0, 0, 1, 't', 0, 0, 0, 2, 'o', 'p', 0, 0, 0, 1, 'p'});
}

TEST_CASE("messages are delivered FIFO and bound to their chain") {
  Trio t;
  for (int i = 0; i < 5; ++i) t.bus().send(t.a, t.b, "n", to_bytes(std::to_string(i)));
  CHECK(t.bus().pending("b") == 5);
  for (int i = 0; i < 5; ++i) {
    auto m = t.bus().receive(t.b);
    REQUIRE(m);
    CHECK(m->payload == to_bytes(std::to_string(i)));
    CHECK(t.bus().verify_message(*m).last_speaker() == "a");
    Message altered = *m;
    altered.op_name = "other";
    CHECK(code_of([&] { t.bus().verify_message(altered); }) == Errc::BadMac);
  }
  CHECK_FALSE(t.bus().receive(t.b));
  CHECK(code_of([&] { t.bus().verify_chain(CallChain{}); }) == Errc::EmptyChain);
  Principal ghost{"ghost", 9999, PrincipalKind::Host, {}, 0};
  CHECK(code_of([&] { t.bus().send(ghost, t.b, "x", {}); }) == Errc::UnknownPrincipal);
}

TEST_CASE("tampered parent chains are refused by send") {
  Trio t;
  Message m1 = t.bus().send(t.a, t.b, "ping", {});
  Message m2 = t.bus().send(t.b, t.c, "ping", {}, &m1.chain);
  std::size_t rejected = 0;
  std::size_t mutants = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t bit = 0; bit < 256; ++bit) {
      CallChain mutant = m2.chain;
      mutant.statements[i].mac[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      ++mutants;
      if (code_of([&] { t.bus().send(t.c, t.a, "fwd", {}, &mutant); }) ==
          Errc::InvalidParentChain) {
        ++rejected;
      }
    }
  }
  CHECK(mutants == 512);
  CHECK(rejected == mutants);
  // The untouched parent still extends.
  CHECK(t.bus().send(t.c, t.a, "fwd", {}, &m2.chain).chain.statements.size() == 3);
}

TEST_CASE("exhaustive single-bit mutation of a 3-statement chain") {
  Trio t;
  CallChain chain = t.three_hop();
  std::size_t rejected = 0;
  std::size_t n = for_each_bit_flip(chain, [&](const CallChain& mutant) {
    try {
      t.bus().verify_chain(mutant);
    } catch (const Error&) {
      ++rejected;
    }
  });
  CHECK(n >= 2000);
  CHECK(rejected == n);
  CHECK(t.bus().verify_chain(chain).speakers().size() == 3);
}

TEST_CASE("reordered statements break the link") {
  Trio t;
  CallChain chain = t.three_hop();
  CallChain swapped = chain;
  std::swap(swapped.statements[1], swapped.statements[2]);
  try {
    t.bus().verify_chain(swapped);
    FAIL("accepted a reordered chain");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BrokenLink);
    CHECK(e.index() == 1);
  }
  swapped = chain;
  std::swap(swapped.statements[0], swapped.statements[1]);
  CHECK(code_of([&] { t.bus().verify_chain(swapped); }) == Errc::BrokenLink);
}

TEST_CASE("counter reuse with different content is a replay") {
  Trio t;
  Message m = t.bus().send(t.a, t.b, "ping", to_bytes("original"));
  const Statement& orig = m.chain.head();
  t.bus().verify_chain(m.chain);
  t.bus().verify_chain(m.chain);  // same content again is fine

  Statement replay = orig;
  replay.payload_digest = message_digest("a", "b", "ping", to_bytes("substituted"));
  replay = sign_with(t.key(t.a), replay);
  try {
    t.bus().verify_chain(CallChain{{replay}});
    FAIL("accepted a reused counter");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CounterReplay);
    CHECK(e.index() == 0);
  }

  // Within one chain the same speaker must count upwards.
  Statement s0 = sign_with(t.key(t.a), Statement{"a", 100, {}, {}, {}});
  Statement s1 = sign_with(t.key(t.b), Statement{"b", 100, {}, s0.mac, {}});
  Statement s2 = sign_with(t.key(t.a), Statement{"a", 50, {}, s1.mac, {}});
  try {
    t.bus().verify_chain(CallChain{{s0, s1, s2}});
    FAIL("accepted a decreasing counter");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CounterReplay);
    CHECK(e.index() == 2);
  }
}

TEST_CASE("effective_permissions examples") {
  Trio t;
  Message single = t.bus().send(t.a, t.b, "x", {});
  CHECK(effective_permissions(t.bus().verify_chain(single.chain), t.reg()) ==
        make_permissions({"INTERNET", "FINE_LOCATION"}));
  Message two = t.bus().send(t.b, t.c, "x", {}, &single.chain);
  Message ab_msg = t.bus().send(t.b, t.a, "x", {}, &single.chain);
  CHECK(effective_permissions(t.bus().verify_chain(ab_msg.chain), t.reg()) ==
        make_permissions({"INTERNET"}));
  Message with_empty = t.bus().send(t.c, t.a, "x", {}, &two.chain);
  CHECK(effective_permissions(t.bus().verify_chain(with_empty.chain), t.reg()).empty());
}

// Oracle: fold-intersection over distinct speakers, computed from the test's
// own record of manifests and delegations. System contributes the union of
// everything granted anywhere.
TEST_CASE("effective_permissions equals a brute-force fold over 1000 random chains") {
  Gen g(2024);
  std::size_t cases = 0;
  for (int world = 0; world < 50; ++world) {
    Platform p(PlatformOptions{static_cast<std::uint64_t>(world)});
    Registry& reg = p.registry();
    std::vector<Principal> ps;
    std::map<PrincipalId, std::set<std::string>> granted;
    std::set<std::string> universe;
    const int n = 2 + static_cast<int>(g.below(5));
    for (int i = 0; i < n; ++i) {
      PermissionSet perms = testkit::random_permissions(g);
      Principal pr = reg.install({perms}, g.coin() ? PrincipalKind::Host : PrincipalKind::Ad);
      for (const auto& perm : perms) {
        granted[pr.id].insert(perm.name());
        universe.insert(perm.name());
      }
      ps.push_back(pr);
    }
    // A few delegations so the grant path is exercised too.
    for (const auto& h : ps) {
      if (h.kind != PrincipalKind::Host || h.manifest.requested.empty()) continue;
      for (const auto& a : ps) {
        if (a.kind != PrincipalKind::Ad || !g.coin(3)) continue;
        const PermissionId& perm = *h.manifest.requested.begin();
        reg.delegate(h, a, perm);
        granted[a.id].insert(perm.name());
      }
    }
    ps.push_back(reg.system());
    granted[reg.system().id] = universe;

    for (int k = 0; k < 20; ++k, ++cases) {
      const std::size_t len = 1 + g.below(6);
      std::vector<Principal> speakers;
      for (std::size_t i = 0; i < len; ++i) speakers.push_back(ps[g.below(ps.size())]);
      std::optional<CallChain> chain;
      std::optional<std::set<std::string>> previous;
      for (std::size_t i = 0; i < len; ++i) {
        const Principal& to = i + 1 < len ? speakers[i + 1] : ps[g.below(ps.size())];
        Message m = p.bus().send(speakers[i], to, "op", g.bytes(4), chain ? &*chain : nullptr);
        chain = m.chain;

        std::optional<std::set<std::string>> acc;
        for (std::size_t j = 0; j <= i; ++j) {
          const auto& s = granted[speakers[j].id];
          if (!acc) {
            acc = s;
            continue;
          }
          std::set<std::string> next;
          for (const auto& x : *acc) {
            if (s.contains(x)) next.insert(x);
          }
          acc = next;
        }
        std::set<std::string> got;
        for (const auto& perm : effective_permissions(p.bus().verify_chain(*chain), reg)) {
          got.insert(perm.name());
        }
        CHECK(got == *acc);
        if (previous) {
          for (const auto& x : got) CHECK(previous->contains(x));  // monotone privilege
        }
        previous = got;
      }
    }
  }
  CHECK(cases == 1000);
}

TEST_CASE("deputy assertion") {
  Platform p(PlatformOptions{9});
  Registry& reg = p.registry();
  Principal host = reg.install({}, PrincipalKind::Host, "host");
  Principal ad = reg.install({make_permissions({"INTERNET"})}, PrincipalKind::Ad, "ad");
  Principal other = reg.install({make_permissions({"INTERNET"})}, PrincipalKind::Ad, "other");

  Message m = p.bus().send(host, ad, "fetch", to_bytes("url"));
  auto received = p.bus().receive(ad);
  REQUIRE(received);
  VerifiedChain parent = p.bus().verify_message(*received);
  CHECK(effective_permissions(parent, reg).empty());

  CHECK(code_of([&] { p.bus().assert_authority(ad, parent, "fetch", {}); }) ==
        Errc::DeputyPolicyDenied);
  p.bus().allow_deputy(ad, "fetch");
  CHECK(p.bus().deputy_allowed("ad", "fetch"));
  CHECK(code_of([&] { p.bus().assert_authority(ad, parent, "other_op", {}); }) ==
        Errc::DeputyPolicyDenied);
  p.bus().allow_deputy(other, "fetch");
  CHECK(code_of([&] { p.bus().assert_authority(other, parent, "fetch", {}); }) ==
        Errc::NotRecipient);

  CallChain head = p.bus().assert_authority(ad, parent, "fetch", to_bytes("url"));
  REQUIRE(head.statements.size() == 1);
  CHECK(head.head().speaker == "ad");
  CHECK(head.head().prev_mac == Digest{});
  VerifiedChain fresh = p.bus().verify_chain(head);
  CHECK(effective_permissions(fresh, reg) == make_permissions({"INTERNET"}));

  auto audit = p.bus().audit_log();
  REQUIRE(audit.size() == 1);
  CHECK(audit[0].deputy == "ad");
  CHECK(audit[0].op_name == "fetch");
  CHECK(audit[0].parent_digest == sha256(m.chain.last().mac));
  CHECK(audit[0].new_head_mac == head.head().mac);
  CHECK(audit[0].parent_speakers == std::vector<PrincipalId>{"host"});
  CHECK(head.head().payload_digest ==
        sha256(CanonicalWriter{}
                   .u8(0x03)
                   .lp(std::string_view("fetch"))
                   .lp(std::string_view("url"))
                   .raw(sha256(m.chain.last().mac))
                   .bytes()));

  // Ports only speak as themselves.
  IpcPort port = p.bus().port("ad");
  Message via_port = port.send("host", "reply", {});
  CHECK(via_port.chain.head().speaker == "ad");
}

TEST_CASE("identical keys, messages and counters give identical statements") {
  auto run = [](std::uint64_t seed) {
    Trio t(seed);
    return t.three_hop();
  };
  CHECK(run(77) == run(77));
  CHECK(run(77) != run(78));
}

// Adversary: sees every chain on the bus, can fabricate arbitrary bytes,
// has no key handles.
TEST_CASE("10000 forged chains are all rejected") {
  Trio t(12);
  std::vector<CallChain> seen;
  for (int i = 0; i < 20; ++i) seen.push_back(t.three_hop());
  Gen g(99);
  const std::vector<PrincipalId> ids = {"a", "b", "c", "system"};
  std::size_t accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    CallChain forged;
    switch (g.below(4)) {
      case 0: {  // random statement claiming a real speaker
        Statement s{ids[g.below(ids.size())], g.next(), g.bytes<32>(), {}, g.bytes<32>()};
        forged.statements.push_back(s);
        break;
      }
      case 1: {  // observed statement with a new payload
        forged = seen[g.below(seen.size())];
        forged.statements[g.below(3)].payload_digest = g.bytes<32>();
        break;
      }
      case 2: {  // splice a fabricated hop onto a real chain
        forged = seen[g.below(seen.size())];
        forged.statements.push_back(
            Statement{ids[g.below(ids.size())], g.next(), g.bytes<32>(),
                      forged.last().mac, g.bytes<32>()});
        break;
      }
      default: {  // re-attribute an observed statement to another speaker
        forged = seen[g.below(seen.size())];
        auto& s = forged.statements[g.below(3)];
        PrincipalId other = ids[g.below(ids.size())];
        if (other == s.speaker) other = other == "a" ? "b" : "a";
        s.speaker = other;
        break;
      }
    }
    try {
      t.bus().verify_chain(forged);
      ++accepted;
    } catch (const Error&) {
    }
  }
  CHECK(accepted == 0);
}

TEST_CASE("concurrent senders keep per-sender order") {
  Platform p(PlatformOptions{4});
  Registry& reg = p.registry();
  Principal sink = reg.install({}, PrincipalKind::Host, "sink");
  std::vector<Principal> senders;
  for (int i = 0; i < 6; ++i) senders.push_back(reg.install({}, PrincipalKind::Ad));
  std::vector<std::thread> threads;
  for (const auto& s : senders) {
    threads.emplace_back([&, s] {
      for (int k = 0; k < 200; ++k) p.bus().send(s, sink, "n", to_bytes(std::to_string(k)));
    });
  }
  for (auto& th : threads) th.join();
  std::map<PrincipalId, int> next;
  std::set<std::pair<PrincipalId, std::uint64_t>> counters;
  while (auto m = p.bus().receive(sink)) {
    CHECK(m->payload == to_bytes(std::to_string(next[m->from]++)));
    CHECK(counters.emplace(m->from, m->chain.head().counter).second);
    p.bus().verify_message(*m);
  }
  CHECK(counters.size() == 1200);
}

TEST_CASE("chain wire json round trip") {
  Trio t;
  CallChain chain = t.three_hop();
  auto j = wire::chain_to_json(chain);
  CHECK(wire::chain_from_json(wire::parse(j.dump())) == chain);
  auto bad = j;
  bad[0]["mac"] = "!!";
  CHECK(code_of([&] { wire::chain_from_json(bad); }) == Errc::ParseError);
}
