#include "adshield/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "adshield/demo.hpp"
#include "adshield/error.hpp"
#include "adshield/fraudbench.hpp"
#include "adshield/permtool.hpp"
#include "adshield/wire.hpp"

namespace adshield {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + out_path + "'");
  f << text;
  if (!f) throw IoError("write to '" + out_path + "' failed");
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("ADSHIELD_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::string text(raw);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.front() == '-') {
    throw IoError("ADSHIELD_SEED must be a non-negative integer, got '" + text + "'");
  }
  return v;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::ParseError:
    case Errc::CorruptCheckpoint:
      return kExitIo;
    default:
      return kExitInvalid;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Privilege-separated ad platform simulator and permission-bloat analyzer",
               "adshield"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_flag;
  std::string out_path;
  int verbosity = 0;

  auto* run = app.add_subcommand("run", "Run an adversarial scenario and print its RunReport");
  std::string scenario_path;
  std::optional<std::uint64_t> freshness;
  unsigned workers = 1;
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--seed", seed_flag, "Seed (overrides ADSHIELD_SEED and the scenario)");
  run->add_option("--out", out_path, "Write the report here instead of stdout");
  run->add_option("--freshness-ms", freshness, "Override the event freshness window");
  run->add_option("--workers", workers, "Planner threads (does not change results)")
      ->check(CLI::Range(1u, 256u));
  run->add_flag("-v,--verbose", verbosity, "Log a summary to stderr");

  auto* permscan = app.add_subcommand("permscan", "Attribute corpus permissions to ad libraries");
  std::string corpus_path;
  std::string profiles_path;
  permscan->add_option("corpus", corpus_path, "Corpus JSON-lines file")->required();
  permscan->add_option("--profiles", profiles_path,
                       "Library profile JSON array (default: built-in profiles)");
  permscan->add_option("--out", out_path, "Write the report here instead of stdout");
  int scan_verbosity = 0;
  permscan->add_flag("-v,--verbose", scan_verbosity, "Log a summary to stderr");

  auto* synth = app.add_subcommand("synth", "Write a synthetic app corpus as JSON-lines");
  std::uint64_t n_apps = 100;
  synth->add_option("--n", n_apps, "Number of apps");
  synth->add_option("--seed", seed_flag, "Seed (overrides ADSHIELD_SEED)");
  synth->add_option("--profiles", profiles_path, "Library pool (default: built-in profiles)");
  synth->add_option("--out", out_path, "Write the corpus here instead of stdout");

  auto* demo = app.add_subcommand("demo", "Run one honest click pipeline and print the verdict");
  demo->add_option("--seed", seed_flag, "Seed (overrides ADSHIELD_SEED)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    const std::optional<std::uint64_t> fallback_seed = seed_flag ? seed_flag : env_seed();

    if (*run) {
      bench::Scenario scenario = bench::scenario_from_json(wire::parse(read_file(scenario_path)));
      if (fallback_seed) scenario.seed = *fallback_seed;
      if (freshness) scenario.freshness_ms = *freshness;
      bench::RunReport report = bench::run_scenario(scenario, bench::RunOptions{workers});
      emit(bench::report_bytes(report) + "\n", out_path, out);
      if (verbosity > 0) {
        err << "adshield: " << report.submissions << " submissions, " << report.accepted_clicks
            << " accepted, " << report.rejected() << " rejected, " << report.blockers_detected
            << "/" << report.blockers_present << " blockers detected\n";
      }
    } else if (*permscan) {
      std::vector<perm::AppRecord> corpus = perm::corpus_from_jsonl(read_file(corpus_path));
      std::vector<perm::LibraryProfile> profiles =
          profiles_path.empty() ? perm::builtin_profiles()
                                : perm::profiles_from_json(wire::parse(read_file(profiles_path)));
      perm::BloatReport report = perm::attribute(corpus, profiles);
      emit(perm::report_to_json(report).dump() + "\n", out_path, out);
      if (scan_verbosity > 0) {
        err << "adshield: " << report.per_app.size() << " apps, " << report.ad_only_apps
            << " request only library-attributable permissions\n";
      }
    } else if (*synth) {
      std::vector<perm::LibraryProfile> pool =
          profiles_path.empty() ? perm::builtin_profiles()
                                : perm::profiles_from_json(wire::parse(read_file(profiles_path)));
      emit(perm::corpus_to_jsonl(perm::synth_corpus(n_apps, pool, fallback_seed.value_or(0))),
           out_path, out);
    } else if (*demo) {
      out << run_demo(fallback_seed.value_or(0)).dump() << "\n";
    }
  } catch (const IoError& e) {
    err << "adshield: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "adshield: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace adshield
