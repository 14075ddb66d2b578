"""Canonical JSON serialization and content digests.

Artifacts (frontiers, contracts, model files) are digested over a canonical
byte encoding: object keys sorted, compact separators, floats rendered with
17 significant digits so the encoding round-trips IEEE doubles exactly and
is stable across platforms.
"""

import hashlib
import json
import math


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isinf(obj):
            return '"Infinity"' if obj > 0 else '"-Infinity"'
        if math.isnan(obj):
            raise ValueError("NaN is not representable in canonical JSON")
        if obj == int(obj) and abs(obj) < 1e16:
            return f"{obj:.1f}"
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(x) for x in obj) + "]"
    if isinstance(obj, dict):
        items = []
        for k in sorted(obj):
            if not isinstance(k, str):
                raise TypeError(f"canonical JSON keys must be strings, got {k!r}")
            items.append(json.dumps(k, ensure_ascii=False) + ":" + _encode(obj[k]))
        return "{" + ",".join(items) + "}"
    raise TypeError(f"not canonically serializable: {type(obj)!r}")


def canonical_dumps(obj) -> str:
    return _encode(obj)


def canonical_bytes(obj) -> bytes:
    return _encode(obj).encode("utf-8")


def _restore_inf(obj):
    if obj == "Infinity":
        return math.inf
    if obj == "-Infinity":
        return -math.inf
    if isinstance(obj, list):
        return [_restore_inf(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _restore_inf(v) for k, v in obj.items()}
    return obj


def canonical_loads(data):
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return _restore_inf(json.loads(data))


def digest_of(obj) -> str:
    """sha256 hex digest of the canonical encoding."""
    return hashlib.sha256(canonical_bytes(obj)).hexdigest()


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
