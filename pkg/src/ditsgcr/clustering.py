"""Differentiable clustering of high-dimensional node embeddings.

Soft K-means under cosine similarity: responsibilities are a softmax over
beta-scaled similarities, centroids are responsibility-weighted means
renormalized to unit length. compute_subx turns distances to the final
centroids into a low-dimensional row-stochastic embedding.
"""

import numpy as np

EPS = 1e-10

# a centroid whose total responsibility falls below this is re-seeded
DEAD_CENTROID_TOTAL = 1e-8

# rows whose centroid-distance spread falls below this get uniform subx
DEGENERATE_SPREAD = 1e-9


def normalize_rows(H: np.ndarray) -> np.ndarray:
    """Divide each row by (its L2 norm + 1e-10); zero rows stay zero."""
    norms = np.linalg.norm(H, axis=1, keepdims=True)
    return H / (norms + EPS)


def kmeanspp_init(H_norm: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Choose k distinct seed rows by squared-distance weighted sampling.

    Deterministic for a fixed seed. When all remaining rows duplicate the
    chosen ones (total weight zero) the next index is drawn uniformly from
    the unchosen ones, so indices stay distinct even with duplicate rows.
    """
    n = H_norm.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < k:
        raise ValueError(f"need at least {k} rows to seed {k} centroids, got {n}")
    rng = np.random.default_rng(seed)
    chosen = np.empty(k, dtype=np.int64)
    is_chosen = np.zeros(n, dtype=bool)
    chosen[0] = rng.integers(n)
    is_chosen[chosen[0]] = True
    d2 = ((H_norm - H_norm[chosen[0]]) ** 2).sum(axis=1)
    for j in range(1, k):
        d2_eff = np.where(is_chosen, 0.0, d2)
        total = d2_eff.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2_eff / total))
        else:
            idx = int(rng.choice(np.flatnonzero(~is_chosen)))
        chosen[j] = idx
        is_chosen[idx] = True
        d2 = np.minimum(d2, ((H_norm - H_norm[idx]) ** 2).sum(axis=1))
    return H_norm[chosen].copy()


def cosine_similarities(H_norm: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities with 1e-10 guards on both norms."""
    hn = np.linalg.norm(H_norm, axis=1)
    cn = np.linalg.norm(centroids, axis=1)
    return (H_norm @ centroids.T) / ((hn[:, None] + EPS) * (cn[None, :] + EPS))


def soft_assign(sims: np.ndarray, beta: float) -> np.ndarray:
    """Row-wise softmax of beta-scaled similarities.

    The row max is subtracted before exponentiation so large beta cannot
    overflow; rows sum to 1.
    """
    logits = beta * sims
    logits = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)


def _reseed_dead_centroids(H_norm, centroids, totals):
    """Move centroids with ~zero responsibility to the row farthest from
    its nearest centroid. Sequential and deterministic."""
    for c in np.flatnonzero(totals < DEAD_CENTROID_TOTAL):
        d2 = np.full(H_norm.shape[0], np.inf)
        for mu in centroids:
            d2 = np.minimum(d2, ((H_norm - mu) ** 2).sum(axis=1))
        idx = int(np.argmax(d2))
        row = H_norm[idx]
        centroids[c] = row / (np.linalg.norm(row) + EPS)
    return centroids


def soft_kmeans(H_norm: np.ndarray, k: int, beta: float, iters: int, seed: int):
    """Run iters rounds of (soft assign, centroid update) from a seeded init.

    Returns (R, centroids): R is the last-computed responsibility matrix
    (n x k, rows sum to 1), centroids the last-updated set (unit rows, up
    to the 1e-10 guard; all-zero input rows can leave zero centroids).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if iters < 1:
        raise ValueError("need at least one iteration")
    centroids = kmeanspp_init(H_norm, k, seed)
    R = None
    for _ in range(iters):
        sims = cosine_similarities(H_norm, centroids)
        R = soft_assign(sims, beta)
        totals = R.sum(axis=0)
        centroids = (R.T @ H_norm) / (totals[:, None] + EPS)
        centroids = centroids / (np.linalg.norm(centroids, axis=1, keepdims=True) + EPS)
        if (totals < DEAD_CENTROID_TOTAL).any():
            centroids = _reseed_dead_centroids(H_norm, centroids, totals)
    return R, centroids


def compute_subx(H_norm: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Low-dimensional rows from closeness to each centroid.

    Per row: val_k = 1 - cos_sim_k, x_k = (max(val) - val_k) / (spread + 1e-10),
    subx_k = x_k / (sum(x) + 1e-10). Rows whose spread max(val) - min(val)
    is below 1e-9 (including k = 1) become uniform 1/k.
    """
    k = centroids.shape[0]
    sims = cosine_similarities(H_norm, centroids)
    val = 1.0 - sims
    hi = val.max(axis=1, keepdims=True)
    lo = val.min(axis=1, keepdims=True)
    x = (hi - val) / (hi - lo + EPS)
    subx = x / (x.sum(axis=1, keepdims=True) + EPS)
    degenerate = (hi - lo).ravel() < DEGENERATE_SPREAD
    if degenerate.any():
        subx[degenerate] = 1.0 / k
    return subx
