"""Smoke tests for the python module over the C++ core."""

import pytest

import edgetwin


def test_fixture_names():
    assert edgetwin.fixture_names() == ["intersection", "mri", "emergency"]


def test_load_fixture_shape():
    doc = edgetwin.load_fixture("intersection")
    assert set(doc) == {"name", "seed", "description", "topology", "events"}
    assert doc["name"] == "intersection"
    assert len(doc["topology"]["nodes"]) == 5
    with pytest.raises(edgetwin.EdgetwinError):
        edgetwin.load_fixture("nope")


def test_validate_reports_issues():
    doc = edgetwin.load_fixture("mri")
    doc["events"].append(doc["events"][0])  # duplicate job id, out of order
    issues = edgetwin.validate_scenario(doc)
    codes = {i["code"] for i in issues}
    assert "duplicate-job-id" in codes
    assert "ordering-violation" in codes


def test_simulate_mri_completes_all_scans():
    kpis = edgetwin.simulate(edgetwin.load_fixture("mri"), scheduler="best-fit")
    assert kpis["jobs_arrived"] == 12
    assert kpis["jobs_completed"] == 12
    assert kpis["latency_violation_count"] == 0
    assert kpis["energy_wh"] > 0


def test_simulate_is_deterministic():
    doc = edgetwin.load_fixture("emergency")
    a = edgetwin.simulate(doc, scheduler="weighted")
    b = edgetwin.simulate(doc, scheduler="weighted")
    assert a == b


def test_simulate_with_log():
    kpis, log = edgetwin.simulate(edgetwin.load_fixture("mri"), include_log=True)
    assert kpis["jobs_completed"] == 12
    assert any('"action":"place"' in line.replace(" ", "") for line in log)


def test_generate_synthetic_deterministic():
    params = {"job_count": 10, "horizon_ms": 60000}
    assert edgetwin.generate_synthetic(params, 5) == edgetwin.generate_synthetic(params, 5)
    assert edgetwin.validate_scenario(edgetwin.generate_synthetic(params, 5)) == []


def test_twin_path_queries():
    doc = {
        "name": "tri", "seed": 0, "description": "",
        "topology": {
            "nodes": [
                {"id": n, "tier": "edge", "cpu_m": 1000, "mem_mib": 1024,
                 "storage_gib": 10, "power_idle_w": 5.0, "power_max_w": 20.0}
                for n in ("A", "B", "C")
            ],
            "links": [
                {"a": "A", "b": "B", "latency_ms": 5, "bandwidth_mbps": 100.0},
                {"a": "B", "b": "C", "latency_ms": 7, "bandwidth_mbps": 100.0},
                {"a": "A", "b": "C", "latency_ms": 20, "bandwidth_mbps": 100.0},
            ],
        },
        "events": [],
    }
    twin = edgetwin.Twin(__import__("json").dumps(doc))
    assert twin.path_latency("A", "C") == 12
    assert twin.transfer_time("A", "C", 100.0) == 8012
    twin.apply_event('{"t": 50, "kind": "link_change", "a": "A", "b": "B", '
                     '"latency_ms": 50, "bandwidth_mbps": 100.0, "up": true}')
    assert twin.path_latency("A", "B") == 27  # now via C
    assert twin.clock() == 50


def test_fitness_worked_example():
    kpis = {
        "jobs_arrived": 2, "jobs_completed": 1, "jobs_failed": 0,
        "mean_response_ms": 5000.0, "latency_violation_count": 0,
        "energy_wh": 2.5, "horizon_ms": 10000, "energy_upper_bound_wh": 10.0,
    }
    assert edgetwin.fitness(kpis) == pytest.approx(-0.25)


def test_forecast_zero_horizon_is_empty():
    report = edgetwin.forecast(edgetwin.load_fixture("mri"), horizon_ms=0)
    assert report["jobs_completed"] == 0
    assert report["horizon_ms"] == 0


def test_train_two_generations_monotone():
    mri = edgetwin.load_fixture("mri")
    result = edgetwin.train([mri], generations=2, seed=3, population=6, elites=2)
    assert len(result["history"]) == 3
    bests = [g["best"] for g in result["history"]]
    assert bests == sorted(bests) or all(
        bests[i] <= bests[i + 1] for i in range(len(bests) - 1))
    assert 0.0 <= result["best"]["w_latency"] <= 1.0
