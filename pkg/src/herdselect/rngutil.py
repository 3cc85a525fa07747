"""Seed derivation for sub-runs.

Child seeds are produced by ``mix64(parent, label)``: the label (an int or a
string) is folded into the parent seed with FNV-1a and the result is passed
through the splitmix64 finalizer.  The scheme is splittable and documented so
that derived streams can be reproduced from a run manifest.
"""

MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix64(parent: int, *labels) -> int:
    """Derive a child seed from a parent seed and one or more labels."""
    x = parent & MASK64
    for label in labels:
        if isinstance(label, int):
            data = label.to_bytes(8, "little", signed=label < 0)
        else:
            data = str(label).encode("utf-8")
        x = _splitmix64(x ^ _fnv1a(data))
    return x
