"""Smoke tests for the python bindings against the shipped sample data."""

import os

import pytest

import firmsim


def data_file(name):
    path = os.path.join(os.environ["FIRM_DATA_DIR"], name)
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


@pytest.fixture(scope="module")
def sample_registry():
    return firmsim.parse_registry(data_file("sample_registry.conf"))


def test_registry_catalog(sample_registry):
    assert sample_registry.top_level_count == 4
    assert "instance_count" in sample_registry.service_names
    assert sample_registry.composition_names == ["weather"]
    assert sample_registry.total_deployments("instance_count") == 54
    endpoints = sample_registry.lookup_endpoints("instance_count")
    assert len(endpoints) == 54
    assert endpoints[0].alias == "axa"
    sample_registry.validate()


def test_registry_round_trip(sample_registry):
    again = firmsim.parse_registry(sample_registry.serialize())
    assert again.serialize() == sample_registry.serialize()


def test_alternative_path_bound(sample_registry):
    assert firmsim.alternative_path_bound(sample_registry, "weather") == 10
    with pytest.raises(ValueError):
        firmsim.alternative_path_bound(sample_registry, "missing")


def test_fat_tree_counts_and_paths():
    topo = firmsim.Topology.fat_tree(4)
    assert topo.host_count == 16
    assert topo.switch_count == 20
    assert topo.shortest_path(0, 0).hop_count == 0
    assert topo.shortest_path(0, 1).hop_count == 2
    assert topo.shortest_path(0, 15).hop_count == 6
    assert topo.shortest_path(0, 15).inter_pod
    ranked = topo.proximity_rank([0], [15, 1])
    assert ranked == [1, 15]
    with pytest.raises(ValueError):
        firmsim.Topology.fat_tree(5)


def test_request_parsing():
    request = firmsim.parse_request("<Service3,(<Service1, Input1>,<Service2, Input2>)>")
    services = [node.service for node in request.nodes]
    assert services == ["Service3", "Service1", "Service2"]
    with pytest.raises(ValueError):
        firmsim.parse_request("<broken")


def test_run_is_deterministic():
    registry = firmsim.parse_registry(data_file("compare_registry.conf"))
    scenario = firmsim.parse_scenario(data_file("compare_scenario.conf"))
    scenario.requests = 25
    first = firmsim.run(scenario, registry)
    second = firmsim.run(scenario, registry)
    assert first.event_log_csv() == second.event_log_csv()
    assert first.totals.arrivals == 25
    assert first.totals.completed == len(first.metrics)
    assert all(m.completion_time > 0 for m in first.metrics)


def test_compare_shape():
    registry = firmsim.parse_registry(data_file("compare_registry.conf"))
    scenario = firmsim.parse_scenario(data_file("compare_scenario.conf"))
    rows = firmsim.compare_modes(scenario, registry, [10])
    assert [row.mode for row in rows] == [
        firmsim.Mode.base,
        firmsim.Mode.affinity,
        firmsim.Mode.firm,
    ]
    assert all(row.requests == 10 for row in rows)


def test_deviation_matches_known_value():
    assert firmsim.deviation_percent([10.0, 20.0]) == pytest.approx(47.14045207910317)
    with pytest.raises(ValueError):
        firmsim.deviation_percent([1.0])
