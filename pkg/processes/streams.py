"""
Reproducible random streams.

Every draw in the toolkit comes from a counter-based Philox generator keyed by
(experiment seed, spawn key, role), so replicate streams never overlap and any
single replicate can be regenerated in isolation.
"""
import numpy as np

from schema import STREAM_ROLES

SEED_MASK = (1 << 64) - 1


def stream_key(*indices: int, role: str = 'history') -> tuple[int, ...]:
    """Spawn key for a derived stream; the role becomes the last component."""
    if role not in STREAM_ROLES:
        raise ValueError(f"Unknown stream role '{role}', expected one of {STREAM_ROLES}")
    return tuple(int(i) for i in indices) + (STREAM_ROLES.index(role),)


def stream_id(seed: int, *indices: int, role: str = 'history') -> str:
    """Printable identifier of a derived stream, recorded with results."""
    key = stream_key(*indices, role=role)
    return f"{seed & SEED_MASK}:" + '.'.join(str(k) for k in key)


def derive_rng(seed: int, *indices: int, role: str = 'history') -> np.random.Generator:
    """Generator for the stream (seed, indices..., role).

    Args:
        seed: 64-bit experiment seed
        indices: Replicate coordinates (e.g. grid index, replicate index)
        role: One of ``STREAM_ROLES``

    Returns:
        A Philox-backed numpy Generator
    """
    seq = np.random.SeedSequence(entropy=seed & SEED_MASK, spawn_key=stream_key(*indices, role=role))
    return np.random.Generator(np.random.Philox(seq))
