"""Seed derivation: every random stream comes from one root seed plus a key path."""

import numpy as np

STREAMS = {"shoe": 1, "policy": 2, "backtest": 3, "bets": 4, "table": 5}


def derive_seed(root: int, *keys) -> int:
    """Deterministic 64-bit child seed for ``(root, *keys)``.

    String keys are mapped through :data:`STREAMS`; integers (run index,
    deck count, ...) are mixed in as-is.
    """
    words = [int(root) & 0xFFFFFFFFFFFFFFFF]
    for k in keys:
        if isinstance(k, str):
            k = STREAMS.get(k) or sum(ord(ch) * 31 ** i for i, ch in enumerate(k))
        words.append(int(k) & 0xFFFFFFFFFFFFFFFF)
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0])
