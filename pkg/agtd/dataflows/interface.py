import json
import logging
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from agtd.dataflows.corpus import Document
from agtd.dataflows.rewriter import CommandRewriter
from agtd.errors import RewriterError

# Configuration and routing logic
from .config import get_config

logger = logging.getLogger(__name__)


@lru_cache(maxsize=8)
def _load_rewrites_file(path: str) -> Dict[str, Tuple[str, ...]]:
    table: Dict[str, Tuple[str, ...]] = {}
    try:
        with open(path, "rb") as f:
            lines = f.read().decode("utf-8").split("\n")
    except UnicodeDecodeError as e:
        raise RewriterError(f"{path}: not valid UTF-8 at byte {e.start}") from e
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise RewriterError(f"{path} line {line_number}: malformed JSON ({e.msg})") from e
        if not isinstance(record, dict) or "id" not in record or not isinstance(record.get("rewrites"), list):
            raise RewriterError(f"{path} line {line_number}: expected {{\"id\", \"rewrites\": [...]}}")
        table[str(record["id"])] = tuple(str(r) for r in record["rewrites"])
    logger.debug("Loaded rewrites for %d documents from %s", len(table), path)
    return table


def get_rewrites_from_file(doc: Document, prompts: Sequence[str]) -> List[str]:
    path = get_config().get("rewrites_file")
    if not path:
        raise RewriterError("no rewrites_file configured")
    rewrites = _load_rewrites_file(str(path)).get(doc.id)
    if rewrites is None:
        raise RewriterError(f"{path} has no rewrites for document '{doc.id}'")
    if len(rewrites) != len(prompts):
        raise RewriterError(f"document '{doc.id}' has {len(rewrites)} rewrites, expected {len(prompts)}")
    return list(rewrites)


_REWRITERS: Dict[Tuple[str, str, float], CommandRewriter] = {}


def get_command_rewriter() -> CommandRewriter:
    """Shared adapter for the configured command, so its cache locks are process-wide."""
    config = get_config()
    command = config.get("rewriter_command")
    if not command:
        raise RewriterError("no rewriter_command configured")
    key = (str(command), str(config["cache_dir"]), float(config["rewriter_timeout"]))
    if key not in _REWRITERS:
        _REWRITERS[key] = CommandRewriter(command, cache_dir=config["cache_dir"], timeout=config["rewriter_timeout"])
    return _REWRITERS[key]


def get_rewrites_from_command(doc: Document, prompts: Sequence[str]) -> List[str]:
    rewriter = get_command_rewriter()
    return [rewriter.rewrite(doc.text, prompt) for prompt in prompts]


# Mapping of methods to their vendor-specific implementations
VENDOR_METHODS = {
    "get_rewrites": {
        "file": get_rewrites_from_file,
        "command": get_rewrites_from_command,
    },
}


# Config key holding the vendor preference of each method
METHOD_VENDOR_KEYS = {
    "get_rewrites": "rewrite_vendor",
}


def get_vendor(method: str) -> str:
    """Comma-separated vendor preference for ``method``; first entry is primary."""
    if method not in METHOD_VENDOR_KEYS:
        raise ValueError(f"Method '{method}' not supported")
    return get_config().get(METHOD_VENDOR_KEYS[method]) or ",".join(VENDOR_METHODS[method])


def route_to_vendor(method: str, *args, **kwargs):
    if method not in VENDOR_METHODS:
        raise ValueError(f"Method '{method}' not supported")

    primary_vendors = [v.strip() for v in get_vendor(method).split(",") if v.strip()]

    # Primary vendors first, then remaining vendors as fallbacks
    fallback_vendors = primary_vendors.copy()
    for vendor in VENDOR_METHODS[method]:
        if vendor not in fallback_vendors:
            fallback_vendors.append(vendor)
    logger.debug("%s - primary: [%s] | fallback order: [%s]", method, " → ".join(primary_vendors), " → ".join(fallback_vendors))

    failures = []
    for vendor in fallback_vendors:
        if vendor not in VENDOR_METHODS[method]:
            logger.info("Vendor '%s' not supported for method '%s', falling back to next vendor", vendor, method)
            continue
        impl_func = VENDOR_METHODS[method][vendor]
        try:
            result = impl_func(*args, **kwargs)
        except RewriterError as e:
            logger.debug("%s from vendor '%s' failed: %s", impl_func.__name__, vendor, e)
            failures.append(f"{vendor}: {e}")
            continue
        logger.debug("%s served by vendor '%s'", method, vendor)
        return result

    raise RewriterError(f"All vendor implementations failed for method '{method}' ({'; '.join(failures)})")
