#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adshield/principals.hpp"
#include "json.hpp"

namespace adshield::bench {

enum class Strategy { Honest, ForgeClick, ReplayClick, BlankProxy, HiddenDisplay, DeputyEscalation };

std::string_view to_string(Strategy s) noexcept;
Strategy parse_strategy(std::string_view text);

struct ScenarioPrincipal {
  std::string id;
  PrincipalKind kind = PrincipalKind::Host;
  PermissionManifest manifest;
  // Ad principals only: the host that embeds the ad. Defaults to the first
  // host in the scenario.
  std::optional<std::string> host;
};

struct CrashInjection {
  std::string principal;
  std::uint64_t at_step = 0;  // user index from which the principal is dead
};

struct Scenario {
  std::vector<ScenarioPrincipal> principals;
  std::map<std::string, Strategy> strategies;  // absent principals are Honest
  std::uint64_t n_users = 0;
  double blocker_fraction = 0.0;
  std::uint64_t clicks_per_user = 1;
  std::uint64_t freshness_ms = 5000;
  std::uint64_t seed = 0;
  // Submissions per click for ReplayClick slots.
  std::uint64_t replay_multiplicity = 2;
  std::vector<CrashInjection> crashes;
};

inline constexpr std::string_view kBlockerPrincipalId = "blocker-proxy";

// Throws Error{InvalidScenario}.
void validate(const Scenario& s);

// Throws Error{InvalidScenario} for the System principal (the monitor is the
// TCB) and Error{UnknownPrincipal} for ids not in the scenario.
Scenario inject_crash(Scenario s, const std::string& principal_id, std::uint64_t at_step);

// Users [0, floor(fraction * n)) of a seeded Fisher-Yates shuffle of 0..n-1.
std::vector<std::uint64_t> assign_blockers(std::uint64_t n_users, double fraction,
                                           std::uint64_t seed);

struct RunReport {
  std::uint64_t submissions = 0;
  std::uint64_t accepted_clicks = 0;
  std::map<std::string, std::uint64_t> rejected_by_reason;
  std::uint64_t genuine_clicks = 0;
  std::uint64_t mint_failures = 0;
  std::uint64_t blockers_present = 0;
  std::uint64_t blockers_detected = 0;
  std::uint64_t pin_mismatches = 0;
  std::uint64_t permission_denied = 0;
  std::uint64_t impressions_validated = 0;
  std::uint64_t impressions_failed = 0;
  std::uint64_t escalations_attempted = 0;
  std::uint64_t escalations_granted = 0;
  std::uint64_t crash_survivals = 0;
  std::uint64_t host_messages = 0;
  // Simulated (logical) milliseconds covered by the run; never wall-clock.
  std::uint64_t wall_ms = 0;
  // SHA-256 (hex) over the host log and server log, so equal reports imply
  // equal token ids, MACs and verdict order.
  std::string log_digest;

  std::uint64_t rejected() const;
  bool operator==(const RunReport&) const = default;
};

struct RunOptions {
  // Threads used to build per-user plans. Results never depend on it.
  unsigned workers = 1;
};

struct RunResult {
  RunReport report;
  // One JSON line per message sent or received by a Host principal.
  std::vector<std::string> host_log;
  std::string server_log;  // JSON-lines
  std::vector<std::uint64_t> blocker_users;
  std::vector<std::uint64_t> detected_users;
};

RunResult run_scenario_detailed(const Scenario& s, const RunOptions& options = {});
RunReport run_scenario(const Scenario& s, const RunOptions& options = {});

// Canonical report bytes (sorted-key JSON).
std::string report_bytes(const RunReport& r);
bool replay_report(const RunReport& a, const RunReport& b);

nlohmann::json report_to_json(const RunReport& r);
nlohmann::json scenario_to_json(const Scenario& s);
// Throws Error{ParseError} for malformed JSON shapes; semantic problems are
// left to validate().
Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace adshield::bench
