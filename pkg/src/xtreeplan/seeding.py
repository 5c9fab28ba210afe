"""Stable seed derivation so one master seed reproduces a whole experiment."""

import hashlib


def derive_seed(master_seed: int, role: str, *keys) -> int:
    """Return a 63-bit seed from ``(master_seed, role, *keys)``.

    Uses SHA-256 rather than ``hash()`` so values do not change across
    interpreter runs (``PYTHONHASHSEED``).
    """
    text = "|".join([str(int(master_seed)), role, *(str(k) for k in keys)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
