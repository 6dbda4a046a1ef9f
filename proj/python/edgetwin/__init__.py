"""Digital-twin simulator of a device-edge-cloud-HPC compute continuum.

Thin pythonic wrapper over the C++ core: scenarios and reports cross the
boundary as JSON and come back as plain dicts/lists.
"""

import json as _json

from edgetwin._edgetwin import EdgetwinError, Twin
from edgetwin import _edgetwin as _core

__all__ = [
    "EdgetwinError",
    "Twin",
    "fixture_names",
    "load_fixture",
    "parse_scenario",
    "validate_scenario",
    "generate_synthetic",
    "simulate",
    "forecast",
    "train",
    "fitness",
]


def fixture_names():
    return list(_core.fixture_names())


def load_fixture(name):
    return _json.loads(_core.load_fixture(name))


def _as_text(scenario):
    if isinstance(scenario, str):
        return scenario
    return _json.dumps(scenario)


def parse_scenario(text):
    return _json.loads(_core.parse_scenario(_as_text(text)))


def validate_scenario(text):
    return _json.loads(_core.validate_scenario(_as_text(text)))


def generate_synthetic(params=None, seed=0):
    return _json.loads(_core.generate_synthetic(_json.dumps(params or {}), seed))


def simulate(scenario, scheduler="first-fit", weights=None, horizon_ms=-1,
             interval_ms=10000, strict_latency=False, include_log=False):
    out = _json.loads(_core.simulate(
        _as_text(scenario), scheduler, _json.dumps(weights) if weights else "",
        horizon_ms, interval_ms, strict_latency, include_log))
    if include_log:
        return out["kpis"], out["decision_log"].splitlines()
    return out["kpis"]


def forecast(scenario, events=(), horizon_ms=0, scheduler="first-fit"):
    return _json.loads(_core.forecast(
        _as_text(scenario), _json.dumps(list(events)), horizon_ms, scheduler))


def train(scenarios, generations=5, seed=0, population=16, elites=4, sigma=0.1,
          decay=0.95, horizon_ms=-1, interval_ms=10000, threads=0):
    texts = [_as_text(s) for s in scenarios]
    return _json.loads(_core.train(texts, generations, seed, population, elites,
                                   sigma, decay, horizon_ms, interval_ms, threads))


def fitness(kpis, alpha=1.0, beta=1.0, gamma=1.0, delta=1.0):
    return _core.fitness(_json.dumps(kpis), alpha, beta, gamma, delta)
