#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>

#include "adshield/adchannel.hpp"
#include "adshield/demo.hpp"
#include "adshield/error.hpp"
#include "adshield/fraudbench.hpp"
#include "adshield/permtool.hpp"
#include "adshield/platform.hpp"
#include "adshield/wire.hpp"

namespace py = pybind11;
using namespace py::literals;
using nlohmann::json;

namespace adshield {
namespace {

// Structured values cross the boundary as JSON text; the Python package
// turns them into dicts.
std::string run_scenario_json(const std::string& scenario, std::optional<std::uint64_t> seed,
                              std::optional<std::uint64_t> freshness_ms, unsigned workers) {
  bench::Scenario s = bench::scenario_from_json(wire::parse(scenario));
  if (seed) s.seed = *seed;
  if (freshness_ms) s.freshness_ms = *freshness_ms;
  bench::RunResult res;
  {
    py::gil_scoped_release release;
    res = bench::run_scenario_detailed(s, bench::RunOptions{workers});
  }
  json out{{"report", bench::report_to_json(res.report)},
           {"host_log", res.host_log},
           {"server_log", res.server_log},
           {"blocker_users", res.blocker_users},
           {"detected_users", res.detected_users}};
  return out.dump();
}

std::string inject_crash_json(const std::string& scenario, const std::string& principal,
                              std::uint64_t at_step) {
  bench::Scenario s = bench::scenario_from_json(wire::parse(scenario));
  return bench::scenario_to_json(bench::inject_crash(std::move(s), principal, at_step)).dump();
}

std::vector<perm::LibraryProfile> profiles_or_builtin(const std::optional<std::string>& profiles) {
  return profiles ? perm::profiles_from_json(wire::parse(*profiles)) : perm::builtin_profiles();
}

std::string attribute_json(const std::string& corpus_jsonl,
                           const std::optional<std::string>& profiles) {
  return perm::report_to_json(
             perm::attribute(perm::corpus_from_jsonl(corpus_jsonl), profiles_or_builtin(profiles)))
      .dump();
}

std::string synth_corpus_jsonl(std::uint64_t n, std::uint64_t seed,
                               const std::optional<std::string>& profiles) {
  return perm::corpus_to_jsonl(perm::synth_corpus(n, profiles_or_builtin(profiles), seed));
}

PermissionSet permissions_of(const std::vector<std::string>& names) {
  PermissionSet out;
  for (const auto& n : names) out.emplace(n);
  return out;
}

std::vector<std::string> names_of(const PermissionSet& perms) {
  std::vector<std::string> out;
  for (const auto& p : perms) out.push_back(p.name());
  return out;
}

// A simulated monitor for interactive use: principals, IPC and events.
class PyPlatform {
 public:
  explicit PyPlatform(std::optional<std::uint64_t> seed)
      : platform_(std::make_unique<Platform>(PlatformOptions{seed})) {}

  Principal install(const std::string& kind, const std::vector<std::string>& permissions,
                    std::optional<std::string> label) {
    return reg().install({permissions_of(permissions)}, parse_principal_kind(kind),
                         std::move(label));
  }

  bool grant_check(const std::string& id, const std::string& perm) const {
    return platform_->registry().grant_check(platform_->registry().get(id), PermissionId(perm));
  }

  std::string delegate(const std::string& host, const std::string& ad, const std::string& perm) {
    return reg().delegate(reg().get(host), reg().get(ad), PermissionId(perm)).token_id;
  }

  void revoke(const std::string& token_id) { reg().revoke(token_id); }

  std::string send(const std::string& from, const std::string& to, const std::string& op,
                   const py::bytes& payload, const std::optional<std::string>& parent) {
    std::string raw = payload;
    std::optional<CallChain> parent_chain;
    if (parent) parent_chain = wire::chain_from_json(wire::parse(*parent));
    Message m = platform_->bus().send(reg().get(from), reg().get(to), op,
                                      Bytes(raw.begin(), raw.end()),
                                      parent_chain ? &*parent_chain : nullptr);
    return wire::chain_to_json(m.chain).dump();
  }

  std::vector<std::string> verify_chain(const std::string& chain) const {
    return platform_->bus().verify_chain(wire::chain_from_json(wire::parse(chain))).speakers();
  }

  std::vector<std::string> effective_permissions(const std::string& chain) const {
    VerifiedChain v = platform_->bus().verify_chain(wire::chain_from_json(wire::parse(chain)));
    return names_of(adshield::effective_permissions(v, platform_->registry()));
  }

  void allow_deputy(const std::string& id, const std::string& op) {
    platform_->bus().allow_deputy(reg().get(id), op);
  }

  std::string assert_authority(const std::string& id, const std::string& parent,
                               const std::string& op, const py::bytes& payload) {
    std::string raw = payload;
    VerifiedChain v = platform_->bus().verify_chain(wire::chain_from_json(wire::parse(parent)));
    return wire::chain_to_json(platform_->bus().assert_authority(reg().get(id), v, op,
                                                                  Bytes(raw.begin(), raw.end())))
        .dump();
  }

  std::string registry_dump() const { return wire::registry_dump(platform_->registry()).dump(); }

 private:
  Registry& reg() { return platform_->registry(); }
  std::unique_ptr<Platform> platform_;
};

}  // namespace
}  // namespace adshield

PYBIND11_MODULE(_adshield, m) {
  using namespace adshield;
  m.doc() = "Privilege-separated ad platform simulator";

  // Raised with args (code_name, message).
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "Error").cast<py::object>(); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::tuple args = py::make_tuple(std::string(to_string(e.code())), std::string(e.what()));
      PyErr_SetObject(error_type.get_stored().ptr(), args.ptr());
    }
  });

  py::class_<Principal>(m, "Principal")
      .def_readonly("id", &Principal::id)
      .def_readonly("uid", &Principal::uid)
      .def_property_readonly("kind", [](const Principal& p) { return std::string(to_string(p.kind)); })
      .def_property_readonly("permissions",
                             [](const Principal& p) { return names_of(p.manifest.requested); })
      .def("__repr__", [](const Principal& p) {
        return "<Principal " + p.id + " uid=" + std::to_string(p.uid) + ">";
      });

  py::class_<PyPlatform>(m, "Platform")
      .def(py::init<std::optional<std::uint64_t>>(), "seed"_a = py::none())
      .def("install", &PyPlatform::install, "kind"_a, "permissions"_a = std::vector<std::string>{},
           "label"_a = py::none())
      .def("grant_check", &PyPlatform::grant_check, "principal_id"_a, "permission"_a)
      .def("delegate", &PyPlatform::delegate, "host_id"_a, "ad_id"_a, "permission"_a)
      .def("revoke", &PyPlatform::revoke, "token_id"_a)
      .def("_send", &PyPlatform::send)
      .def("_verify_chain", &PyPlatform::verify_chain)
      .def("_effective_permissions", &PyPlatform::effective_permissions)
      .def("allow_deputy", &PyPlatform::allow_deputy, "principal_id"_a, "op_name"_a)
      .def("_assert_authority", &PyPlatform::assert_authority)
      .def("_registry_dump", &PyPlatform::registry_dump);

  m.def("_run_scenario", &run_scenario_json, "scenario"_a, "seed"_a = py::none(),
        "freshness_ms"_a = py::none(), "workers"_a = 1u);
  m.def("_inject_crash", &inject_crash_json);
  m.def("assign_blockers", &bench::assign_blockers, "n_users"_a, "fraction"_a, "seed"_a);
  m.def("_attribute", &attribute_json, "corpus_jsonl"_a, "profiles"_a = py::none());
  m.def("_synth_corpus", &synth_corpus_jsonl, "n_apps"_a, "seed"_a, "profiles"_a = py::none());
  m.def("_builtin_profiles", [] { return perm::profiles_to_json(perm::builtin_profiles()).dump(); });
  m.def("_demo", [](std::uint64_t seed) { return run_demo(seed).dump(); }, "seed"_a = 0);
}
