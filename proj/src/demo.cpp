#include "adshield/demo.hpp"

#include "adshield/adchannel.hpp"
#include "adshield/platform.hpp"
#include "adshield/wire.hpp"

namespace adshield {

nlohmann::json run_demo(std::uint64_t seed) {
  Platform platform(PlatformOptions{seed});
  Registry& registry = platform.registry();
  Principal host = registry.install({}, PrincipalKind::Host, "demo.host");
  Principal ad = registry.install({make_permissions({"INTERNET"})}, PrincipalKind::Ad, "demo.ad");

  RegionId banner = platform.events().register_region(ad, Rect{0, 0, 320, 50});
  platform.events().register_region(host, Rect{0, 50, 320, 430});

  const Digest fingerprint = sha256(as_bytes("demo ad server credential"));
  const std::string body = "<creative>demo</creative>";
  AdServer server(platform.bus(), platform.events(), fingerprint,
                  {Bytes(body.begin(), body.end())});

  AdCreative creative = fetch_creative(registry, ad, server, fingerprint);
  ImpressionRecord impression = server.record_impression(ad, creative, creative.content, 100);

  auto [event, attestation] = platform.events().input_device().emit(banner, 10, 10, 1000);
  ClickToken token = platform.events().mint_click_token(ad, event, attestation,
                                                        impression.impression_id, 1020, server);
  ClickReport report = make_click_report(platform.bus(), ad, token, 1040);
  Verdict verdict = server.submit_click(report, 1040);

  nlohmann::json out;
  out["verdict"] = std::string(verdict.name());
  out["impression_id"] = impression.impression_id;
  out["display_validated"] = validate_display(impression, creative);
  out["report"] = wire::click_report_to_json(report);
  return out;
}

}  // namespace adshield
