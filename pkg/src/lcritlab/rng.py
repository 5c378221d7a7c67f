"""Counter-based random numbers: pure functions of (seed, domain, keys).

Draws are hashes of their coordinates, never stateful streams, so any value
can be regenerated independently, extending a prime cutoff or resampling a
stratum never perturbs other draws, and worker count cannot change results.
The mixer is the splitmix64 finalizer applied after folding in each key.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.asarray(0x9E3779B97F4A7C15, dtype=np.uint64)
_OFFSET = np.asarray(0xD1B54A32D192ED03, dtype=np.uint64)
_MIX1 = np.asarray(0xBF58476D1CE4E5B9, dtype=np.uint64)
_MIX2 = np.asarray(0x94D049BB133111EB, dtype=np.uint64)
_MASK = (1 << 64) - 1
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)

# domain tags keep unrelated draw families on disjoint counters
DOMAIN_ASSIGNMENT = 0x616E676C
DOMAIN_STRATA = 0x73747261
DOMAIN_GAUSS = 0x67617573
DOMAIN_SPLIT = 0x73706C74


def _u64(x):
    if isinstance(x, np.ndarray):
        return x.astype(np.uint64) if x.dtype != np.uint64 else x
    return np.asarray(int(x) & _MASK, dtype=np.uint64)


def _mix(h):
    h = (h ^ (h >> _S30)) * _MIX1
    h = (h ^ (h >> _S27)) * _MIX2
    return h ^ (h >> _S31)


def prepared_key(x):
    """Precompute the per-key additive part so hot loops fold with one mix."""
    return _u64(x) * _GOLDEN + _OFFSET


def fold_prepared(h, prekey):
    return _mix(prekey ^ h)


def fold(h, key):
    return _mix(prepared_key(key) ^ h)


def hash_u64(*keys):
    """Fold integer keys (scalars or uint arrays, broadcastable) into one hash."""
    h = _GOLDEN
    for k in keys:
        h = fold(h, k)
    return h


def to_unit(h):
    """Map hashes to uniform draws in the open interval (0, 1)."""
    return ((h >> _S11).astype(np.float64) + 0.5) * (2.0**-53)


def uniform01(*keys):
    return to_unit(hash_u64(*keys))


def angles(*keys):
    """Uniform angles in [0, 2pi)."""
    return 2.0 * np.pi * uniform01(*keys)
