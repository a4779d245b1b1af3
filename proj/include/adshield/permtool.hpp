#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "adshield/principals.hpp"
#include "json.hpp"

namespace adshield::perm {

struct AppRecord {
  std::string app_id;
  PermissionSet permissions;
  std::set<std::string> libraries;

  bool operator==(const AppRecord&) const = default;
};

struct LibraryProfile {
  std::string library_id;
  PermissionSet required;

  bool operator==(const LibraryProfile&) const = default;
};

struct AppBloat {
  PermissionSet attributable;  // requested and required by a linked library
  PermissionSet residual;      // requested for the app's own reasons (upper bound)

  bool operator==(const AppBloat&) const = default;
};

struct BloatReport {
  std::map<std::string, AppBloat> per_app;
  // Apps whose every permission is attributable, with at least one.
  std::uint64_t ad_only_apps = 0;
  // Number of apps in which each permission is attributable.
  std::map<PermissionId, std::uint64_t> histogram;

  bool operator==(const BloatReport&) const = default;
};

// Throws Error{UnknownLibrary} when an app links a library without a
// profile and Error{DuplicateApp} for repeated app ids.
BloatReport attribute(const std::vector<AppRecord>& corpus,
                      const std::vector<LibraryProfile>& profiles);

// Illustrative ad-library profiles shipped with the tool.
std::vector<LibraryProfile> builtin_profiles();

// Deterministic for a seed. Every referenced library comes from
// `library_pool`, and each app requests at least what its libraries need.
std::vector<AppRecord> synth_corpus(std::uint64_t n_apps,
                                    const std::vector<LibraryProfile>& library_pool,
                                    std::uint64_t seed);

nlohmann::json app_to_json(const AppRecord& app);
AppRecord app_from_json(const nlohmann::json& j);
nlohmann::json profiles_to_json(const std::vector<LibraryProfile>& profiles);
std::vector<LibraryProfile> profiles_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const BloatReport& report);

// JSON-lines corpus, one AppRecord per line; blank lines are skipped.
std::string corpus_to_jsonl(const std::vector<AppRecord>& corpus);
std::vector<AppRecord> corpus_from_jsonl(std::string_view text);

}  // namespace adshield::perm
