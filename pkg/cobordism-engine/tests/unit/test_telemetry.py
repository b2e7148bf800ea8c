import importlib

from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.trace import StatusCode

telemetry = importlib.import_module("cobordism.telemetry")


def test_disabled_sdk_gives_no_provider():
    assert telemetry.init_tracer() is None


def test_provider_is_created_once(monkeypatch):
    monkeypatch.setenv("OTEL_SDK_DISABLED", "false")
    monkeypatch.setattr(telemetry, "_provider", None)
    monkeypatch.setattr(telemetry.trace, "set_tracer_provider", lambda provider: None)
    provider = telemetry.init_tracer()
    assert isinstance(provider, TracerProvider)
    assert telemetry.init_tracer() is provider


def test_span_helpers_without_a_provider():
    with telemetry.create_span("unit-test-span", {"order": 8}):
        telemetry.add_span_attributes({"passed": True})
        telemetry.mark_span_error(ValueError("ignored"))


def test_attributes_are_cleaned():
    cleaned = telemetry._clean({"order": 8, "factors": [2, 4], "seed": None, "mode": "sampled"})
    assert cleaned == {"order": 8, "factors": "[2, 4]", "mode": "sampled"}


def test_span_helpers_record_on_a_real_span():
    tracer = TracerProvider().get_tracer("unit-test")
    with tracer.start_as_current_span("verify") as span:
        telemetry.add_span_attributes({"order": 32, "structure": [2, 2, 2, 4]})
        telemetry.mark_span_error(RuntimeError("commutativity failed"))
    assert span.attributes["order"] == 32
    assert span.attributes["structure"] == "[2, 2, 2, 4]"
    assert span.status.status_code == StatusCode.ERROR
