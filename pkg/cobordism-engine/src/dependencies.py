import logging
import os
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import TYPE_CHECKING, Dict, Optional

from .schemas import Settings

if TYPE_CHECKING:
    from .homology import HomologyContext
    from .triangulation import Triangulation

logger = logging.getLogger(__name__)

DEFAULT_EXHAUSTIVE_BOUND = 1 << 12
DEFAULT_STRUCTURE_BOUND = 1 << 16
DEFAULT_SAMPLE_COUNT = 2000
DEFAULT_SAMPLE_SEED = 1999
DEFAULT_CAYLEY_CSV_BOUND = 64
DEFAULT_CONTEXT_CACHE_SIZE = 32
DEFAULT_LOG_LEVEL = "WARNING"


class DomainError(Exception):
    """Invalid mathematical input or violated precondition; the CLI exits with code 1"""


@dataclass
class ContextCacheStats:
    """Homology context cache statistics"""
    hits: int = 0
    misses: int = 0
    evictions: int = 0
    total_build_time: float = 0.0
    max_build_time: float = 0.0
    last_build: Optional[datetime] = None


_cache_stats = ContextCacheStats()
_context_cache: "OrderedDict[str, HomologyContext]" = OrderedDict()
_context_lock = threading.RLock()


def _int_from_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}, using default {default}")
        return default
    if value < minimum:
        logger.warning(f"Ignoring {name}={value} (must be >= {minimum}), using default {default}")
        return default
    return value


def get_exhaustive_bound() -> int:
    """Largest group order verified exhaustively"""
    return _int_from_env("COBORDISM_EXHAUSTIVE_BOUND", DEFAULT_EXHAUSTIVE_BOUND)


def get_structure_bound() -> int:
    return _int_from_env("COBORDISM_STRUCTURE_BOUND", DEFAULT_STRUCTURE_BOUND)


def get_sample_count() -> int:
    return _int_from_env("COBORDISM_SAMPLE_COUNT", DEFAULT_SAMPLE_COUNT)


def get_sample_seed() -> int:
    return _int_from_env("COBORDISM_SAMPLE_SEED", DEFAULT_SAMPLE_SEED, minimum=0)


def get_cayley_csv_bound() -> int:
    return _int_from_env("COBORDISM_CAYLEY_CSV_BOUND", DEFAULT_CAYLEY_CSV_BOUND)


def get_context_cache_size() -> int:
    return _int_from_env("COBORDISM_CONTEXT_CACHE_SIZE", DEFAULT_CONTEXT_CACHE_SIZE)


def get_log_level() -> str:
    level = os.environ.get("COBORDISM_LOG_LEVEL", DEFAULT_LOG_LEVEL).strip().upper()
    if not isinstance(logging.getLevelName(level), int):
        logger.warning(f"Unknown COBORDISM_LOG_LEVEL={level!r}, using {DEFAULT_LOG_LEVEL}")
        return DEFAULT_LOG_LEVEL
    return level


def get_settings() -> Settings:
    """Snapshot of the engine configuration read from the environment"""
    return Settings(
        exhaustive_bound=get_exhaustive_bound(),
        structure_bound=get_structure_bound(),
        sample_count=get_sample_count(),
        sample_seed=get_sample_seed(),
        cayley_csv_bound=get_cayley_csv_bound(),
        context_cache_size=get_context_cache_size(),
        log_level=get_log_level(),
    )


def get_context(triangulation: "Triangulation") -> "HomologyContext":
    """
    Return the homology context of a triangulation, building it once per content hash.

    At most COBORDISM_CONTEXT_CACHE_SIZE contexts are kept; the least recently
    used one is evicted first.
    """
    from .homology import build_context

    key = triangulation.context_hash
    with _context_lock:
        cached = _context_cache.get(key)
        if cached is not None:
            _cache_stats.hits += 1
            _context_cache.move_to_end(key)
            return cached
        _cache_stats.misses += 1

    start = time.perf_counter()
    context = build_context(triangulation)
    elapsed = time.perf_counter() - start

    with _context_lock:
        _cache_stats.total_build_time += elapsed
        _cache_stats.max_build_time = max(_cache_stats.max_build_time, elapsed)
        _cache_stats.last_build = datetime.now(timezone.utc)
        context = _context_cache.setdefault(key, context)
        _context_cache.move_to_end(key)
        limit = get_context_cache_size()
        while len(_context_cache) > limit:
            evicted, _ = _context_cache.popitem(last=False)
            _cache_stats.evictions += 1
            logger.debug(f"Evicted homology context {evicted}")
    logger.debug(f"Homology context {key} built in {elapsed:.3f}s")
    return context


def get_cache_stats() -> Dict[str, object]:
    with _context_lock:
        lookups = _cache_stats.hits + _cache_stats.misses
        return {
            "cached_contexts": len(_context_cache),
            "hits": _cache_stats.hits,
            "misses": _cache_stats.misses,
            "evictions": _cache_stats.evictions,
            "hit_rate": _cache_stats.hits / lookups if lookups else 0.0,
            "avg_build_time": _cache_stats.total_build_time / _cache_stats.misses if _cache_stats.misses else 0.0,
            "max_build_time": _cache_stats.max_build_time,
            "last_build": _cache_stats.last_build.isoformat() if _cache_stats.last_build else None,
        }


def clear_context_cache() -> None:
    global _cache_stats
    with _context_lock:
        _context_cache.clear()
        _cache_stats = ContextCacheStats()
