"""Privilege-separated ad platform simulator.

Scenario runs, permission-bloat analysis and a small interactive monitor
(``Platform``) backed by the C++ core.
"""

import json

from . import _adshield
from ._adshield import Error, Principal, assign_blockers

__all__ = [
    "Error",
    "Platform",
    "Principal",
    "assign_blockers",
    "attribute",
    "builtin_profiles",
    "demo",
    "inject_crash",
    "run_scenario",
    "synth_corpus",
]


def run_scenario(scenario, seed=None, freshness_ms=None, workers=1, detailed=False):
    """Run a scenario dict. Returns the RunReport dict, or with
    ``detailed=True`` also the host log, server log and blocker joins."""
    out = json.loads(_adshield._run_scenario(json.dumps(scenario), seed, freshness_ms, workers))
    return out if detailed else out["report"]


def inject_crash(scenario, principal_id, at_step):
    return json.loads(_adshield._inject_crash(json.dumps(scenario), principal_id, at_step))


def _profiles_text(profiles):
    return None if profiles is None else json.dumps(profiles)


def attribute(corpus, profiles=None):
    """Attribute each app's permissions to its linked ad libraries."""
    text = "".join(json.dumps(app) + "\n" for app in corpus)
    return json.loads(_adshield._attribute(text, _profiles_text(profiles)))


def synth_corpus(n_apps, seed=0, profiles=None):
    text = _adshield._synth_corpus(n_apps, seed, _profiles_text(profiles))
    return [json.loads(line) for line in text.splitlines() if line]


def builtin_profiles():
    return json.loads(_adshield._builtin_profiles())


def demo(seed=0):
    return json.loads(_adshield._demo(seed))


class Platform(_adshield.Platform):
    """Reference monitor with a registry and IPC bus. Chains are wire dicts."""

    def send(self, from_id, to_id, op_name, payload=b"", parent=None):
        parent_text = None if parent is None else json.dumps(parent)
        return json.loads(self._send(from_id, to_id, op_name, payload, parent_text))

    def verify_chain(self, chain):
        return self._verify_chain(json.dumps(chain))

    def effective_permissions(self, chain):
        return set(self._effective_permissions(json.dumps(chain)))

    def assert_authority(self, principal_id, parent, op_name, payload=b""):
        return json.loads(self._assert_authority(principal_id, json.dumps(parent), op_name, payload))

    def registry_dump(self):
        return json.loads(self._registry_dump())
