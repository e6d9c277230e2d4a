import numpy as np

from swarmfs.errors import DataError
from swarmfs.rng import stream


def stratified_folds(y, k, seed, *path):
    """Fold index per sample: each class is shuffled, then dealt round-robin.

    The deal for class 1 continues where class 0 stopped, so total fold sizes
    differ by at most one as well as the per-class counts.
    """
    y = np.asarray(y)
    if k < 2:
        raise DataError(f"need k >= 2 folds, got {k}")
    rng = stream(seed, "kfold", *path)
    folds = np.empty(y.shape[0], dtype=np.int64)
    offset = 0
    for label in (0, 1):
        members = np.flatnonzero(y == label)
        if members.size < k:
            raise DataError(f"class {label} has {members.size} samples, fewer than k={k}")
        members = rng.permutation(members)
        folds[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    return folds
