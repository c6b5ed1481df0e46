import hashlib

import numpy as np


def derive_seed(master_seed: int, *parts) -> int:
    """
    Derive a stable 64-bit seed from a master seed and labels.

    The same inputs give the same seed on every platform and process.

    Args:
        master_seed: Seed of the whole run.
        *parts: Labels identifying the consumer, e.g. a scenario key.

    Returns:
        int: Seed in [0, 2**64).
    """
    text = ":".join([str(int(master_seed))] + [str(p) for p in parts])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(seed: int, stream: str) -> np.random.Generator:
    """Independent generator for one named noise stream of a trial."""
    return np.random.default_rng(derive_seed(seed, stream))
