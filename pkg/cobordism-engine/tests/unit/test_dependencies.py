import importlib
import logging

import pytest

dependencies = importlib.import_module("cobordism.dependencies")
schemas = importlib.import_module("cobordism.schemas")
triangulation = importlib.import_module("cobordism.triangulation")


def test_defaults_match_the_settings_model():
    settings = dependencies.get_settings()
    assert settings == schemas.Settings()
    assert settings.exhaustive_bound == 4096
    assert settings.structure_bound == 65536
    assert settings.context_cache_size == 32
    assert settings.log_level == "WARNING"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("COBORDISM_EXHAUSTIVE_BOUND", "128")
    monkeypatch.setenv("COBORDISM_SAMPLE_SEED", "0")
    monkeypatch.setenv("COBORDISM_LOG_LEVEL", "debug")
    settings = dependencies.get_settings()
    assert settings.exhaustive_bound == 128
    assert settings.sample_seed == 0
    assert settings.log_level == "DEBUG"


@pytest.mark.parametrize("raw, message", [("many", "non-integer"), ("0", "must be >= 1")])
def test_bad_integers_fall_back_with_a_warning(monkeypatch, caplog, raw, message):
    monkeypatch.setenv("COBORDISM_SAMPLE_COUNT", raw)
    with caplog.at_level(logging.WARNING, logger="cobordism.dependencies"):
        assert dependencies.get_sample_count() == dependencies.DEFAULT_SAMPLE_COUNT
    assert message in caplog.text


def test_unknown_log_level(monkeypatch, caplog):
    monkeypatch.setenv("COBORDISM_LOG_LEVEL", "chatty")
    with caplog.at_level(logging.WARNING, logger="cobordism.dependencies"):
        assert dependencies.get_log_level() == "WARNING"
    assert "Unknown COBORDISM_LOG_LEVEL" in caplog.text


def test_context_cache_reuses_contexts():
    T = triangulation.grid_torus(4)
    before = dependencies.get_cache_stats()
    first = dependencies.get_context(T)
    second = dependencies.get_context(triangulation.grid_torus(4))
    after = dependencies.get_cache_stats()
    assert first is second
    assert after["hits"] >= before["hits"] + 1
    assert 0 <= after["hit_rate"] <= 1


def test_clearing_the_cache_resets_the_statistics():
    dependencies.get_context(triangulation.sphere(2))
    dependencies.clear_context_cache()
    stats = dependencies.get_cache_stats()
    assert stats["cached_contexts"] == 0
    assert (stats["hits"], stats["misses"]) == (0, 0)
    assert stats["last_build"] is None
    dependencies.get_context(triangulation.sphere(2))
    assert dependencies.get_cache_stats()["misses"] == 1


def test_context_cache_evicts_the_least_recently_used(monkeypatch):
    monkeypatch.setenv("COBORDISM_CONTEXT_CACHE_SIZE", "2")
    dependencies.clear_context_cache()
    tori = [triangulation.grid_torus(m) for m in (3, 4, 5)]
    first = dependencies.get_context(tori[0])
    dependencies.get_context(tori[1])
    # touching the first torus makes the second one the oldest
    assert dependencies.get_context(tori[0]) is first
    dependencies.get_context(tori[2])

    stats = dependencies.get_cache_stats()
    assert stats["cached_contexts"] == 2
    assert stats["evictions"] == 1
    assert dependencies.get_context(tori[0]) is first
    misses = dependencies.get_cache_stats()["misses"]
    dependencies.get_context(tori[1])
    assert dependencies.get_cache_stats()["misses"] == misses + 1
    dependencies.clear_context_cache()


@pytest.mark.parametrize(
    "module, name",
    [
        ("gf2", "GF2Error"),
        ("triangulation", "TriangulationError"),
        ("homology", "HomologyError"),
        ("cobordgroup", "GroupError"),
        ("immersion", "ImmersionError"),
        ("bands", "BandError"),
        ("utils", "ParseError"),
    ],
)
def test_domain_errors_share_a_base(module, name):
    error = getattr(importlib.import_module(f"cobordism.{module}"), name)
    assert issubclass(error, dependencies.DomainError)
