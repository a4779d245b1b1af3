#include "adshield/fraudbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <thread>

#include "adshield/adchannel.hpp"
#include "adshield/error.hpp"
#include "adshield/platform.hpp"

namespace adshield::bench {

using nlohmann::json;

namespace {

// Logical timeline inside one user's slice of the simulated clock.
constexpr std::uint64_t kHostWorkOffset = 0;
constexpr std::uint64_t kShowAdOffset = 10;
constexpr std::uint64_t kDisplayOffset = 30;
constexpr std::uint64_t kFirstClickOffset = 100;
constexpr std::uint64_t kClickSpacing = 1000;
constexpr std::uint64_t kMinLatency = 5;
constexpr std::uint64_t kMaxLatency = 500;

constexpr std::int32_t kAdWidth = 320;
constexpr std::int32_t kAdHeight = 50;

constexpr std::uint64_t kMaxUsers = 100'000'000;
constexpr std::uint64_t kMaxClicksPerUser = 1'000'000;
constexpr std::uint64_t kMaxReplay = 10'000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// mt19937_64 output is fixed by the standard; distributions are not, so
// bounded draws and shuffles are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = 0;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> bytes() {
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; i += 8) {
      std::uint64_t v = gen_();
      for (std::size_t k = 0; k < 8 && i + k < N; ++k) {
        out[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
      }
    }
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

struct ClickPlan {
  std::int32_t dx = 0;
  std::int32_t dy = 0;
  std::uint64_t latency_ms = 0;
  // Adversary randomness for ForgeClick.
  std::array<std::uint8_t, 16> forged_token_id{};
  EventId forged_event{};
  Digest forged_token_mac{};
  Digest forged_chain_mac{};
  std::uint64_t forged_counter = 0;
};

using UserPlan = std::vector<std::vector<ClickPlan>>;  // [slot][click]

UserPlan make_user_plan(std::uint64_t seed, std::uint64_t user, std::size_t slots,
                        std::uint64_t clicks) {
  Rng rng(splitmix64(seed ^ splitmix64(user + 1)));
  UserPlan plan(slots);
  for (auto& slot : plan) {
    slot.resize(clicks);
    for (auto& c : slot) {
      c.dx = static_cast<std::int32_t>(rng.below(kAdWidth));
      c.dy = static_cast<std::int32_t>(rng.below(kAdHeight));
      c.latency_ms = kMinLatency + rng.below(kMaxLatency - kMinLatency + 1);
      c.forged_token_id = rng.bytes<16>();
      c.forged_event = rng.bytes<16>();
      c.forged_token_mac = rng.bytes<32>();
      c.forged_chain_mac = rng.bytes<32>();
      c.forged_counter = rng.below(1u << 20) + 1;
    }
  }
  return plan;
}

std::vector<UserPlan> make_plans(const Scenario& s, std::size_t slots, unsigned workers) {
  std::vector<UserPlan> plans(s.n_users);
  workers = std::max(1u, workers);
  auto fill = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t u = begin; u < end; ++u) {
      plans[u] = make_user_plan(s.seed, u, slots, s.clicks_per_user);
    }
  };
  if (workers == 1 || s.n_users < 2) {
    fill(0, s.n_users);
    return plans;
  }
  std::vector<std::thread> threads;
  const std::uint64_t chunk = (s.n_users + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::uint64_t begin = std::min<std::uint64_t>(s.n_users, w * chunk);
    std::uint64_t end = std::min<std::uint64_t>(s.n_users, begin + chunk);
    if (begin < end) threads.emplace_back(fill, begin, end);
  }
  for (auto& t : threads) t.join();
  return plans;
}

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

Digest labelled_digest(std::string_view label, std::uint64_t seed) {
  return sha256(CanonicalWriter{}.lp(label).u64(seed).bytes());
}

Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::vector<Bytes> catalogue(std::uint64_t seed) {
  std::vector<Bytes> out;
  for (int i = 1; i <= 3; ++i) {
    Digest d = labelled_digest("creative-" + std::to_string(i), seed);
    Bytes content = bytes_of("<creative " + std::to_string(i) + ">");
    content.insert(content.end(), d.begin(), d.end());
    out.push_back(std::move(content));
  }
  return out;
}

struct Slot {
  Principal ad;
  Principal host;
  RegionId region;
  Rect bounds;
  Strategy strategy = Strategy::Honest;
};

std::string host_log_line(const char* dir, Timestamp t, const Message& m) {
  json j{{"dir", dir}, {"t", t}, {"from", m.from}, {"to", m.to}, {"op", m.op_name}};
  if (std::string_view(dir) == "sent") {
    j["mac"] = base64url_encode(m.chain.last().mac);
  } else {
    j["digest"] = base64url_encode(message_digest(m.from, m.to, m.op_name, m.payload));
  }
  return j.dump();
}

class Simulation {
 public:
  Simulation(const Scenario& s, const RunOptions& options)
      : s_(s),
        platform_(PlatformOptions{s.seed, s.freshness_ms}),
        input_(platform_.events().input_device()),
        server_(platform_.bus(), platform_.events(), labelled_digest("ad-server", s.seed),
                catalogue(s.seed)),
        blocker_proxy_(server_, labelled_digest("blocker-proxy", s.seed)),
        host_proxy_(server_, labelled_digest("host-proxy", s.seed)) {
    install();
    plans_ = make_plans(s_, slots_.size(), options.workers);
    auto blockers = assign_blockers(s_.n_users, s_.blocker_fraction, s_.seed);
    blocker_set_.insert(blockers.begin(), blockers.end());
    result_.blocker_users = std::move(blockers);
    std::sort(result_.blocker_users.begin(), result_.blocker_users.end());
    result_.report.blockers_present = result_.blocker_users.size();
  }

  RunResult run() {
    const std::uint64_t span =
        kFirstClickOffset + s_.clicks_per_user * kClickSpacing + kClickSpacing;
    for (std::uint64_t u = 0; u < s_.n_users; ++u) {
      run_user(u, u * span);
    }
    RunReport& r = result_.report;
    RevenueTally tally = server_.revenue_tally();
    r.accepted_clicks = tally.accepted;
    r.rejected_by_reason = tally.rejected_by_reason;
    for (const auto& c : s_.crashes) {
      if (c.at_step < s_.n_users) ++r.crash_survivals;
    }
    r.host_messages = result_.host_log.size();
    r.wall_ms = s_.n_users * span;
    result_.server_log = server_.log_jsonl();
    CanonicalWriter logs;
    for (const auto& line : result_.host_log) logs.lp(line);
    logs.lp(result_.server_log);
    r.log_digest = to_hex(sha256(logs.bytes()));
    return std::move(result_);
  }

 private:
  Registry& registry() { return platform_.registry(); }
  IpcBus& bus() { return platform_.bus(); }

  void install() {
    std::map<std::string, Principal> installed;
    std::optional<std::string> first_host;
    for (const auto& sp : s_.principals) {
      installed.emplace(sp.id, registry().install(sp.manifest, sp.kind, sp.id));
      if (sp.kind == PrincipalKind::Host && !first_host) first_host = sp.id;
    }
    if (s_.blocker_fraction > 0.0) {
      registry().install({}, PrincipalKind::Blocker, std::string(kBlockerPrincipalId));
    }
    for (const auto& sp : s_.principals) {
      const Principal& p = installed.at(sp.id);
      if (sp.kind == PrincipalKind::Host) {
        hosts_.push_back(p);
        platform_.events().register_region(p, Rect{0, 0, 480, 800});
      }
    }
    std::int32_t row = 0;
    for (const auto& sp : s_.principals) {
      if (sp.kind != PrincipalKind::Ad) continue;
      Slot slot;
      slot.ad = installed.at(sp.id);
      slot.host = installed.at(sp.host.value_or(*first_host));
      slot.bounds = Rect{0, row * kAdHeight, kAdWidth, kAdHeight};
      slot.region = platform_.events().register_region(slot.ad, slot.bounds);
      Strategy host_strategy = strategy_of(slot.host.id);
      slot.strategy = host_strategy != Strategy::Honest ? host_strategy : strategy_of(slot.ad.id);
      slots_.push_back(std::move(slot));
      ++row;
    }
  }

  Strategy strategy_of(const std::string& id) const {
    auto it = s_.strategies.find(id);
    return it == s_.strategies.end() ? Strategy::Honest : it->second;
  }

  bool crashed(const std::string& id, std::uint64_t user) const {
    return std::any_of(s_.crashes.begin(), s_.crashes.end(), [&](const CrashInjection& c) {
      return c.principal == id && user >= c.at_step;
    });
  }

  void log_sent(Timestamp t, const Message& m) {
    result_.host_log.push_back(host_log_line("sent", t, m));
  }

  // The System service: answers host app work, adjudicates resource
  // requests by the chain's effective permissions, ignores click reports
  // (those reach the ad server directly).
  void service_system(Timestamp t) {
    const Principal& system = registry().system();
    while (auto msg = bus().receive(system)) {
      VerifiedChain verified = bus().verify_message(*msg);
      if (msg->op_name == "app_work") {
        bus().send(system, registry().get(msg->from), "app_work_done", msg->payload);
      } else if (msg->op_name == "resource_request") {
        PermissionId wanted(std::string(msg->payload.begin(), msg->payload.end()));
        ++result_.report.escalations_attempted;
        if (effective_permissions(verified, registry()).contains(wanted)) {
          ++result_.report.escalations_granted;
        }
      }
    }
    for (const auto& host : hosts_) {
      while (auto msg = bus().receive(host)) {
        result_.host_log.push_back(host_log_line("recv", t, *msg));
      }
    }
  }

  void run_user(std::uint64_t u, Timestamp base) {
    const std::string user_tag = "user:" + std::to_string(u);

    for (const auto& host : hosts_) {
      if (crashed(host.id, u)) continue;
      Timestamp t = base + kHostWorkOffset;
      log_sent(t, bus().send(host, registry().system(), "app_work", bytes_of(user_tag)));
    }
    service_system(base + kHostWorkOffset + 1);

    for (const auto& slot : slots_) {
      if (crashed(slot.host.id, u)) continue;
      Timestamp t = base + kShowAdOffset;
      log_sent(t, bus().send(slot.host, slot.ad, "show_ad", bytes_of(user_tag)));
      if (slot.strategy == Strategy::DeputyEscalation) {
        PermissionSet host_perms = registry().granted_permissions(slot.host.id);
        for (const auto& perm : registry().granted_permissions(slot.ad.id)) {
          if (host_perms.contains(perm)) continue;
          log_sent(t, bus().send(slot.host, slot.ad, "proxy_request", bytes_of(perm.name())));
        }
      }
    }

    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const Slot& slot = slots_[i];
      if (crashed(slot.host.id, u) || crashed(slot.ad.id, u)) continue;
      run_slot(u, base, slot, plans_[u][i]);
    }
    service_system(base + kDisplayOffset);
  }

  void run_slot(std::uint64_t u, Timestamp base, const Slot& slot,
                const std::vector<ClickPlan>& clicks) {
    RunReport& r = result_.report;

    // The ad drains its inbox; proxy requests are forwarded naively, without
    // asserting its own authority.
    while (auto msg = bus().receive(slot.ad)) {
      bus().verify_message(*msg);
      if (msg->op_name == "proxy_request") {
        bus().send(slot.ad, registry().system(), "resource_request", msg->payload, &msg->chain);
      }
    }

    const bool blocker_user = blocker_set_.contains(u);
    DeliveryEndpoint* endpoint = &server_;
    if (blocker_user) {
      endpoint = &blocker_proxy_;
    } else if (slot.strategy == Strategy::BlankProxy) {
      endpoint = &host_proxy_;
    }

    AdCreative creative;
    try {
      creative = fetch_creative(registry(), slot.ad, *endpoint, server_.fingerprint());
    } catch (const Error& e) {
      if (e.code() == Errc::PinMismatch) {
        ++r.pin_mismatches;
        if (blocker_user && (result_.detected_users.empty() || result_.detected_users.back() != u)) {
          result_.detected_users.push_back(u);
          ++r.blockers_detected;
        }
      } else if (e.code() == Errc::PermissionDenied) {
        ++r.permission_denied;
      } else {
        throw;
      }
      return;
    }

    const Bytes displayed =
        slot.strategy == Strategy::HiddenDisplay ? Bytes{} : creative.content;
    ImpressionRecord impression =
        server_.record_impression(slot.ad, creative, displayed, base + kDisplayOffset);
    if (validate_display(impression, creative)) {
      ++r.impressions_validated;
    } else {
      ++r.impressions_failed;
    }

    for (std::size_t c = 0; c < clicks.size(); ++c) {
      const ClickPlan& plan = clicks[c];
      const Timestamp event_time = base + kFirstClickOffset + c * kClickSpacing;
      const Timestamp submit_time = event_time + plan.latency_ms;

      if (slot.strategy == Strategy::ForgeClick) {
        submit(forge(slot, impression, plan, submit_time), submit_time);
        continue;
      }

      auto [event, attestation] = input_.emit(slot.region, slot.bounds.x + plan.dx,
                                              slot.bounds.y + plan.dy, event_time);
      ++r.genuine_clicks;
      ClickToken token;
      try {
        token = platform_.events().mint_click_token(slot.ad, event, attestation,
                                                    impression.impression_id, submit_time,
                                                    server_);
      } catch (const Error&) {
        ++r.mint_failures;
        continue;
      }
      ClickReport report = make_click_report(bus(), slot.ad, token, submit_time);
      const std::uint64_t copies =
          slot.strategy == Strategy::ReplayClick ? s_.replay_multiplicity : 1;
      for (std::uint64_t k = 0; k < copies; ++k) submit(report, submit_time + k);
    }
  }

  ClickReport forge(const Slot& slot, const ImpressionRecord& impression, const ClickPlan& plan,
                    Timestamp ts) {
    ClickToken token;
    token.token_id = "tok-" + to_hex(plan.forged_token_id);
    token.event_id = plan.forged_event;
    token.impression_id = impression.impression_id;
    token.ad_principal = slot.ad.id;
    token.mac = plan.forged_token_mac;

    if (strategy_of(slot.host.id) == Strategy::ForgeClick) {
      // The host cannot sign as the ad, so it fabricates the whole chain.
      Statement fake;
      fake.speaker = slot.ad.id;
      fake.counter = plan.forged_counter;
      fake.payload_digest = sha256(canonical_token_bytes(token));
      fake.mac = plan.forged_chain_mac;
      return ClickReport{impression.impression_id, token, CallChain{{fake}}, ts};
    }
    // A forging ad signs its own chain but still cannot mint the token.
    return make_click_report(bus(), slot.ad, token, ts);
  }

  void submit(const ClickReport& report, Timestamp ts) {
    ++result_.report.submissions;
    server_.submit_click(report, ts);
  }

  const Scenario& s_;
  Platform platform_;
  InputDevice input_;
  AdServer server_;
  BlankingProxy blocker_proxy_;
  BlankingProxy host_proxy_;
  std::vector<Principal> hosts_;
  std::vector<Slot> slots_;
  std::vector<UserPlan> plans_;
  std::set<std::uint64_t> blocker_set_;
  RunResult result_;
};

template <typename T>
T count_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number_integer() && !v.is_number_unsigned()) {
    throw Error(Errc::InvalidScenario, std::string("'") + key + "' must be >= 0");
  }
  if (!v.is_number_unsigned()) {
    throw Error(Errc::ParseError, std::string("'") + key + "' must be an integer");
  }
  return v.get<T>();
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Honest: return "Honest";
    case Strategy::ForgeClick: return "ForgeClick";
    case Strategy::ReplayClick: return "ReplayClick";
    case Strategy::BlankProxy: return "BlankProxy";
    case Strategy::HiddenDisplay: return "HiddenDisplay";
    case Strategy::DeputyEscalation: return "DeputyEscalation";
  }
  return "Honest";
}

Strategy parse_strategy(std::string_view text) {
  for (Strategy s : {Strategy::Honest, Strategy::ForgeClick, Strategy::ReplayClick,
                     Strategy::BlankProxy, Strategy::HiddenDisplay, Strategy::DeputyEscalation}) {
    if (to_string(s) == text) return s;
  }
  throw Error(Errc::ParseError, "unknown strategy '" + std::string(text) + "'");
}

void validate(const Scenario& s) {
  auto fail = [](const std::string& why) { throw Error(Errc::InvalidScenario, why); };
  if (!std::isfinite(s.blocker_fraction) || s.blocker_fraction < 0.0 ||
      s.blocker_fraction > 1.0) {
    fail("blocker_fraction must lie in [0, 1]");
  }
  if (s.n_users > kMaxUsers) fail("n_users is too large");
  if (s.clicks_per_user > kMaxClicksPerUser) fail("clicks_per_user is too large");
  if (s.replay_multiplicity < 1 || s.replay_multiplicity > kMaxReplay) {
    fail("replay_multiplicity must lie in [1, " + std::to_string(kMaxReplay) + "]");
  }

  std::map<std::string, PrincipalKind> kinds;
  bool has_host = false;
  bool has_ad = false;
  for (const auto& p : s.principals) {
    if (!valid_id(p.id)) fail("invalid principal id '" + p.id + "'");
    if (p.id == kSystemPrincipalId || p.id == kBlockerPrincipalId) {
      fail("principal id '" + p.id + "' is reserved");
    }
    if (p.kind == PrincipalKind::System) fail("the System principal is implicit");
    if (!kinds.emplace(p.id, p.kind).second) fail("duplicate principal id '" + p.id + "'");
    has_host |= p.kind == PrincipalKind::Host;
    has_ad |= p.kind == PrincipalKind::Ad;
  }
  if (!has_host || !has_ad) fail("a scenario needs at least one Host and one Ad principal");
  for (const auto& p : s.principals) {
    if (!p.host) continue;
    if (p.kind != PrincipalKind::Ad) fail("only Ad principals name a host");
    auto it = kinds.find(*p.host);
    if (it == kinds.end() || it->second != PrincipalKind::Host) {
      fail("'" + p.id + "' names unknown host '" + *p.host + "'");
    }
  }
  for (const auto& [id, strategy] : s.strategies) {
    if (!kinds.contains(id)) fail("strategy for unknown principal '" + id + "'");
  }
  for (const auto& c : s.crashes) {
    if (c.principal == kSystemPrincipalId) fail("the System principal cannot crash");
    if (!kinds.contains(c.principal)) fail("crash for unknown principal '" + c.principal + "'");
  }
}

Scenario inject_crash(Scenario s, const std::string& principal_id, std::uint64_t at_step) {
  if (principal_id == kSystemPrincipalId) {
    throw Error(Errc::InvalidScenario, "the System principal is the monitor and cannot crash");
  }
  bool known = std::any_of(s.principals.begin(), s.principals.end(),
                           [&](const ScenarioPrincipal& p) { return p.id == principal_id; });
  if (!known) throw Error(Errc::UnknownPrincipal, "'" + principal_id + "'");
  s.crashes.push_back(CrashInjection{principal_id, at_step});
  return s;
}

std::vector<std::uint64_t> assign_blockers(std::uint64_t n_users, double fraction,
                                           std::uint64_t seed) {
  std::vector<std::uint64_t> order(n_users);
  for (std::uint64_t i = 0; i < n_users; ++i) order[i] = i;
  Rng rng(splitmix64(seed ^ 0x626c6f636b657273ULL));
  for (std::uint64_t i = n_users; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  // The epsilon absorbs representation error, e.g. 0.4 * 10000.
  auto count = static_cast<std::uint64_t>(
      std::floor(fraction * static_cast<double>(n_users) + 1e-9));
  order.resize(std::min(count, n_users));
  return order;
}

std::uint64_t RunReport::rejected() const {
  std::uint64_t total = 0;
  for (const auto& [reason, n] : rejected_by_reason) total += n;
  return total;
}

RunResult run_scenario_detailed(const Scenario& s, const RunOptions& options) {
  validate(s);
  Simulation sim(s, options);
  return sim.run();
}

RunReport run_scenario(const Scenario& s, const RunOptions& options) {
  return run_scenario_detailed(s, options).report;
}

json report_to_json(const RunReport& r) {
  return json{{"submissions", r.submissions},
              {"accepted_clicks", r.accepted_clicks},
              {"rejected_by_reason", r.rejected_by_reason},
              {"genuine_clicks", r.genuine_clicks},
              {"mint_failures", r.mint_failures},
              {"blockers_present", r.blockers_present},
              {"blockers_detected", r.blockers_detected},
              {"pin_mismatches", r.pin_mismatches},
              {"permission_denied", r.permission_denied},
              {"impressions_validated", r.impressions_validated},
              {"impressions_failed", r.impressions_failed},
              {"escalations_attempted", r.escalations_attempted},
              {"escalations_granted", r.escalations_granted},
              {"crash_survivals", r.crash_survivals},
              {"host_messages", r.host_messages},
              {"wall_ms", r.wall_ms},
              {"log_digest", r.log_digest}};
}

std::string report_bytes(const RunReport& r) { return report_to_json(r).dump(); }

bool replay_report(const RunReport& a, const RunReport& b) {
  return report_bytes(a) == report_bytes(b);
}

json scenario_to_json(const Scenario& s) {
  json principals = json::array();
  for (const auto& p : s.principals) {
    json jp{{"id", p.id}, {"kind", std::string(to_string(p.kind))}};
    json perms = json::array();
    for (const auto& perm : p.manifest.requested) perms.push_back(perm.name());
    jp["permissions"] = perms;
    if (p.host) jp["host"] = *p.host;
    principals.push_back(jp);
  }
  json strategies = json::object();
  for (const auto& [id, st] : s.strategies) strategies[id] = std::string(to_string(st));
  json crashes = json::array();
  for (const auto& c : s.crashes) {
    crashes.push_back(json{{"principal", c.principal}, {"at_step", c.at_step}});
  }
  return json{{"principals", principals},
              {"strategies", strategies},
              {"n_users", s.n_users},
              {"blocker_fraction", s.blocker_fraction},
              {"clicks_per_user", s.clicks_per_user},
              {"freshness_ms", s.freshness_ms},
              {"seed", s.seed},
              {"replay_multiplicity", s.replay_multiplicity},
              {"crashes", crashes}};
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::ParseError, "scenario must be a JSON object");
  if (!j.contains("principals") || !j.at("principals").is_array()) {
    throw Error(Errc::ParseError, "scenario needs a 'principals' array");
  }
  Scenario s;
  try {
    for (const auto& jp : j.at("principals")) {
      ScenarioPrincipal p;
      p.id = jp.at("id").get<std::string>();
      p.kind = parse_principal_kind(jp.at("kind").get<std::string>());
      for (const auto& perm : jp.value("permissions", json::array())) {
        p.manifest.requested.emplace(perm.get<std::string>());
      }
      if (jp.contains("host")) p.host = jp.at("host").get<std::string>();
      s.principals.push_back(std::move(p));
    }
    const json strategies = j.value("strategies", json::object());
    for (const auto& [id, st] : strategies.items()) {
      s.strategies[id] = parse_strategy(st.get<std::string>());
    }
    for (const auto& jc : j.value("crashes", json::array())) {
      s.crashes.push_back(
          CrashInjection{jc.at("principal").get<std::string>(), count_field<std::uint64_t>(jc, "at_step", 0)});
    }
    if (j.contains("blocker_fraction")) {
      if (!j.at("blocker_fraction").is_number()) {
        throw Error(Errc::ParseError, "'blocker_fraction' must be a number");
      }
      s.blocker_fraction = j.at("blocker_fraction").get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  s.n_users = count_field<std::uint64_t>(j, "n_users", 0);
  s.clicks_per_user = count_field<std::uint64_t>(j, "clicks_per_user", 1);
  s.freshness_ms = count_field<std::uint64_t>(j, "freshness_ms", kDefaultFreshnessMs);
  s.seed = count_field<std::uint64_t>(j, "seed", 0);
  s.replay_multiplicity = count_field<std::uint64_t>(j, "replay_multiplicity", 2);
  return s;
}

}  // namespace adshield::bench
