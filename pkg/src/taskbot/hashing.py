"""Stable 64-bit FNV-1a hashing for seed derivation and corpus digests."""

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def derive_seed(seed: int, index: int) -> int:
    """Per-item seed: FNV-1a over ``seed || index`` (decimal, colon-joined)."""
    return fnv1a64(f"{seed}:{index}".encode("utf-8"))
