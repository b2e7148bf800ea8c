import os
import logging
from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional

from opentelemetry import trace
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor
from opentelemetry.sdk.resources import SERVICE_NAME, Resource
from opentelemetry.trace import Status, StatusCode

logger = logging.getLogger(__name__)

try:
    from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
except ImportError:
    logger.debug("OTLP exporter not available, spans stay in-process")
    OTLPSpanExporter = None

_provider: Optional[TracerProvider] = None


def init_tracer() -> Optional[TracerProvider]:
    """Initialize the OpenTelemetry tracer provider once per process."""
    global _provider
    if os.environ.get("OTEL_SDK_DISABLED", "").lower() == "true":
        logger.info("OpenTelemetry is disabled via OTEL_SDK_DISABLED environment variable")
        return None
    if _provider is not None:
        return _provider

    try:
        resource = Resource(attributes={
            SERVICE_NAME: os.environ.get("SERVICE_NAME", "cobordism-engine")
        })
        provider = TracerProvider(resource=resource)

        endpoint = os.environ.get("OTLP_ENDPOINT")
        if endpoint:
            if OTLPSpanExporter is None:
                logger.warning("OTLP_ENDPOINT is set but the OTLP exporter is not installed")
            else:
                provider.add_span_processor(BatchSpanProcessor(OTLPSpanExporter(endpoint=endpoint, insecure=True)))

        trace.set_tracer_provider(provider)
        _provider = provider
        logger.info(f"OpenTelemetry tracer initialized for {os.environ.get('SERVICE_NAME', 'cobordism-engine')}")
        return provider
    except Exception as e:
        logger.error(f"Failed to initialize OpenTelemetry tracer: {str(e)}")
        return None


def get_tracer():
    return trace.get_tracer("cobordism-engine")


def _clean(attributes: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    # span attributes only take primitives
    cleaned = {}
    for key, value in (attributes or {}).items():
        if value is None:
            continue
        if isinstance(value, (str, bool, int, float)):
            cleaned[key] = value
        else:
            cleaned[key] = str(value)
    return cleaned


@contextmanager
def create_span(name: str, attributes: Optional[Dict[str, Any]] = None) -> Iterator[Any]:
    """Run a block inside a named span carrying the given attributes."""
    with get_tracer().start_as_current_span(name, attributes=_clean(attributes)) as span:
        yield span


def add_span_attributes(attributes: Dict[str, Any]) -> None:
    span = trace.get_current_span()
    if span.is_recording():
        for key, value in _clean(attributes).items():
            span.set_attribute(key, value)


def mark_span_error(exception: BaseException) -> None:
    span = trace.get_current_span()
    if span.is_recording():
        span.record_exception(exception)
        span.set_status(Status(StatusCode.ERROR, str(exception)))
