#include "adshield/permtool.hpp"

#include <algorithm>
#include <iterator>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "adshield/error.hpp"

namespace adshield::perm {

using nlohmann::json;

BloatReport attribute(const std::vector<AppRecord>& corpus,
                      const std::vector<LibraryProfile>& profiles) {
  std::map<std::string, const LibraryProfile*> by_id;
  for (const auto& p : profiles) by_id[p.library_id] = &p;

  BloatReport report;
  for (const auto& app : corpus) {
    PermissionSet library_needs;
    for (const auto& lib : app.libraries) {
      auto it = by_id.find(lib);
      if (it == by_id.end()) {
        throw Error(Errc::UnknownLibrary, "'" + lib + "' linked by '" + app.app_id + "'");
      }
      library_needs.insert(it->second->required.begin(), it->second->required.end());
    }

    AppBloat bloat;
    std::set_intersection(app.permissions.begin(), app.permissions.end(),
                          library_needs.begin(), library_needs.end(),
                          std::inserter(bloat.attributable, bloat.attributable.end()));
    std::set_difference(app.permissions.begin(), app.permissions.end(),
                        bloat.attributable.begin(), bloat.attributable.end(),
                        std::inserter(bloat.residual, bloat.residual.end()));

    if (bloat.residual.empty() && !bloat.attributable.empty()) ++report.ad_only_apps;
    for (const auto& perm : bloat.attributable) ++report.histogram[perm];
    if (!report.per_app.emplace(app.app_id, std::move(bloat)).second) {
      throw Error(Errc::DuplicateApp, "'" + app.app_id + "'");
    }
  }
  return report;
}

std::vector<LibraryProfile> builtin_profiles() {
  return {
      {"banner_sdk", make_permissions({"INTERNET", "ACCESS_NETWORK_STATE"})},
      {"analytics_sdk", make_permissions({"INTERNET", "READ_PHONE_STATE"})},
      {"location_ads_sdk",
       make_permissions({"INTERNET", "ACCESS_NETWORK_STATE", "COARSE_LOCATION", "FINE_LOCATION"})},
      {"rich_media_sdk", make_permissions({"INTERNET", "ACCESS_NETWORK_STATE", "VIBRATE"})},
      {"offerwall_sdk", make_permissions({"INTERNET", "READ_PHONE_STATE", "GET_ACCOUNTS"})},
  };
}

namespace {

const std::vector<std::string_view>& app_permission_pool() {
  static const std::vector<std::string_view> kPool = {
      "INTERNET",       "ACCESS_NETWORK_STATE", "CAMERA",        "READ_CONTACTS",
      "FINE_LOCATION",  "COARSE_LOCATION",      "VIBRATE",       "WAKE_LOCK",
      "RECORD_AUDIO",   "READ_PHONE_STATE",     "WRITE_EXTERNAL_STORAGE", "GET_TASKS",
  };
  return kPool;
}

std::uint64_t below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t v = 0;
  do {
    v = gen();
  } while (v >= limit);
  return v % n;
}

}  // namespace

std::vector<AppRecord> synth_corpus(std::uint64_t n_apps,
                                    const std::vector<LibraryProfile>& library_pool,
                                    std::uint64_t seed) {
  std::mt19937_64 gen(seed ^ 0x7065726d746f6f6cULL);
  const auto& pool = app_permission_pool();
  std::vector<AppRecord> corpus;
  corpus.reserve(n_apps);
  for (std::uint64_t i = 0; i < n_apps; ++i) {
    AppRecord app;
    app.app_id = "app" + std::to_string(i);
    // Own needs: each pool permission with probability 1/4.
    for (auto name : pool) {
      if (below(gen, 4) == 0) app.permissions.emplace(std::string(name));
    }
    if (!library_pool.empty()) {
      const std::uint64_t links = below(gen, 3);  // 0, 1 or 2 libraries
      for (std::uint64_t k = 0; k < links; ++k) {
        const LibraryProfile& lib = library_pool[below(gen, library_pool.size())];
        app.libraries.insert(lib.library_id);
        app.permissions.insert(lib.required.begin(), lib.required.end());
      }
    }
    corpus.push_back(std::move(app));
  }
  return corpus;
}

json app_to_json(const AppRecord& app) {
  json perms = json::array();
  for (const auto& p : app.permissions) perms.push_back(p.name());
  return json{{"app_id", app.app_id}, {"permissions", perms}, {"libraries", app.libraries}};
}

AppRecord app_from_json(const json& j) {
  try {
    AppRecord app;
    app.app_id = j.at("app_id").get<std::string>();
    for (const auto& p : j.value("permissions", json::array())) {
      app.permissions.emplace(p.get<std::string>());
    }
    for (const auto& l : j.value("libraries", json::array())) {
      app.libraries.insert(l.get<std::string>());
    }
    return app;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
}

json profiles_to_json(const std::vector<LibraryProfile>& profiles) {
  json arr = json::array();
  for (const auto& p : profiles) {
    json req = json::array();
    for (const auto& perm : p.required) req.push_back(perm.name());
    arr.push_back(json{{"library_id", p.library_id}, {"required", req}});
  }
  return arr;
}

std::vector<LibraryProfile> profiles_from_json(const json& j) {
  if (!j.is_array()) throw Error(Errc::ParseError, "profiles must be a JSON array");
  std::vector<LibraryProfile> out;
  try {
    for (const auto& item : j) {
      LibraryProfile p;
      p.library_id = item.at("library_id").get<std::string>();
      for (const auto& perm : item.at("required")) p.required.emplace(perm.get<std::string>());
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  return out;
}

json report_to_json(const BloatReport& report) {
  auto names = [](const PermissionSet& s) {
    json arr = json::array();
    for (const auto& p : s) arr.push_back(p.name());
    return arr;
  };
  json per_app = json::object();
  for (const auto& [id, bloat] : report.per_app) {
    per_app[id] = json{{"attributable", names(bloat.attributable)},
                       {"residual", names(bloat.residual)}};
  }
  json histogram = json::object();
  for (const auto& [perm, n] : report.histogram) histogram[perm.name()] = n;
  return json{{"apps", report.per_app.size()},
              {"ad_only_apps", report.ad_only_apps},
              {"histogram", histogram},
              {"per_app", per_app}};
}

std::string corpus_to_jsonl(const std::vector<AppRecord>& corpus) {
  std::string out;
  for (const auto& app : corpus) {
    out += app_to_json(app).dump();
    out += '\n';
  }
  return out;
}

std::vector<AppRecord> corpus_from_jsonl(std::string_view text) {
  std::vector<AppRecord> corpus;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    corpus.push_back(app_from_json(j));
  }
  return corpus;
}

}  // namespace adshield::perm
