import pytest

import adshield

SCENARIO = {
    "principals": [
        {"id": "news", "kind": "Host", "permissions": ["VIBRATE"]},
        {"id": "banner", "kind": "Ad", "permissions": ["INTERNET"]},
    ],
    "strategies": {"banner": "ReplayClick"},
    "n_users": 50,
    "blocker_fraction": 0.2,
    "clicks_per_user": 2,
}


def test_demo_accepts():
    out = adshield.demo(seed=3)
    assert out["verdict"] == "Accepted"
    assert out["display_validated"] is True


def test_run_scenario_matches_cli_numbers():
    report = adshield.run_scenario(SCENARIO, seed=7)
    assert report["accepted_clicks"] == 80
    assert report["rejected_by_reason"]["DuplicateToken"] == 80
    assert report["blockers_present"] == 10
    assert report["blockers_detected"] == 10
    assert adshield.run_scenario(SCENARIO, seed=7, workers=4) == report
    assert adshield.run_scenario(SCENARIO, seed=8)["log_digest"] != report["log_digest"]


def test_run_scenario_detailed():
    out = adshield.run_scenario(SCENARIO, seed=7, detailed=True)
    assert sorted(out["detected_users"]) == sorted(out["blocker_users"])
    assert out["blocker_users"] == sorted(adshield.assign_blockers(50, 0.2, 7))
    assert len(out["host_log"]) == out["report"]["host_messages"]


def test_freshness_override():
    report = adshield.run_scenario(SCENARIO, freshness_ms=1)
    assert report["accepted_clicks"] == 0
    assert report["mint_failures"] == 80


def test_invalid_scenario_raises():
    with pytest.raises(adshield.Error) as info:
        adshield.run_scenario({"principals": [{"id": "h", "kind": "Host"}], "n_users": 1})
    assert info.value.args[0] == "InvalidScenario"


def test_inject_crash_round_trips():
    crashed = adshield.inject_crash(SCENARIO, "banner", 3)
    report = adshield.run_scenario(crashed, seed=1)
    assert report["crash_survivals"] >= 1


def test_platform_chain_and_intersection():
    p = adshield.Platform(seed=5)
    host = p.install("Host", ["INTERNET", "FINE_LOCATION"], "host")
    ad = p.install("Ad", ["INTERNET"], "ad")
    assert host.uid == 1001 and ad.uid == 1002
    assert ad.kind == "Ad"
    assert p.grant_check("host", "FINE_LOCATION")
    assert not p.grant_check("ad", "FINE_LOCATION")

    first = p.send("host", "ad", "fetch", b"req")
    chain = p.send("ad", "system", "net", b"x", parent=first)
    assert p.verify_chain(chain) == ["host", "ad"]
    assert p.effective_permissions(chain) == {"INTERNET"}

    token = p.delegate("host", "ad", "FINE_LOCATION")
    assert p.effective_permissions(chain) == {"INTERNET", "FINE_LOCATION"}
    p.revoke(token)
    assert p.effective_permissions(chain) == {"INTERNET"}


def test_tampered_chain_rejected():
    p = adshield.Platform(seed=5)
    p.install("Host", ["INTERNET"], "host")
    p.install("Ad", ["INTERNET"], "ad")
    chain = p.send("host", "ad", "fetch", b"req")
    chain[0]["counter"] += 1
    with pytest.raises(adshield.Error) as info:
        p.verify_chain(chain)
    assert info.value.args[0] == "BadMac"


def test_permtool():
    corpus = adshield.synth_corpus(30, seed=2)
    assert len(corpus) == 30
    assert adshield.synth_corpus(30, seed=2) == corpus
    report = adshield.attribute(corpus)
    assert report["apps"] == 30
    profiles = [{"library_id": "banner_sdk", "required": ["INTERNET"]}]
    app = {"app_id": "a", "permissions": ["INTERNET"], "libraries": ["banner_sdk"]}
    assert adshield.attribute([app], profiles)["ad_only_apps"] == 1
    assert adshield.builtin_profiles()
    with pytest.raises(adshield.Error) as info:
        adshield.attribute([{"app_id": "a", "libraries": ["nope"]}])
    assert info.value.args[0] == "UnknownLibrary"
