"""Deterministic synthetic rating data shaped like a small MovieLens export.

Used by the demo scripts and the end-to-end tests whenever no real dataset
file is available. The generator produces a popularity long tail (Zipf-ish
item weights), skewed user activity, and genre clusters: each user prefers
one or two genres, samples mostly from them, and rates in-genre items
higher. That gives neighborhood recommenders a real signal to find while
keeping the file small.
"""

from __future__ import annotations

import random
from pathlib import Path

from .domain import Rating

_BASE_TIMESTAMP = 874_724_710


def synthetic_ratings(
    n_ratings: int = 5000,
    n_users: int = 650,
    n_items: int = 600,
    n_genres: int = 8,
    seed: int = 13,
) -> list[Rating]:
    """Generate a deterministic rating list; same arguments, same ratings."""
    rng = random.Random(seed)
    users = [str(u + 1) for u in range(n_users)]
    items = [str(i + 1) for i in range(n_items)]
    genre = [i % n_genres for i in range(n_items)]
    item_weights = [(i + 1) ** -0.8 for i in range(n_items)]
    user_weights = [(u + 1) ** -0.6 for u in range(n_users)]
    preferred = [
        tuple(rng.sample(range(n_genres), k=rng.choice((1, 2)))) for _ in range(n_users)
    ]

    by_genre: dict[int, tuple[list[int], list[float]]] = {}
    for g in range(n_genres):
        idx = [i for i in range(n_items) if genre[i] == g]
        by_genre[g] = (idx, [item_weights[i] for i in idx])

    pairs: set[tuple[int, int]] = set()
    ratings: list[Rating] = []
    while len(ratings) < n_ratings:
        u = rng.choices(range(n_users), weights=user_weights)[0]
        if rng.random() < 0.75:
            g = rng.choice(preferred[u])
            idx, weights = by_genre[g]
            i = rng.choices(idx, weights=weights)[0]
        else:
            i = rng.choices(range(n_items), weights=item_weights)[0]
        if (u, i) in pairs:
            continue
        pairs.add((u, i))
        match = genre[i] in preferred[u]
        quality = 1.0 - i / n_items
        mean = 2.2 + (1.5 if match else 0.0) + 1.3 * quality
        value = round(min(5.0, max(1.0, rng.gauss(mean, 0.7))))
        ratings.append(
            Rating(
                user=users[u],
                item=items[i],
                value=float(value),
                timestamp=_BASE_TIMESTAMP + len(ratings) * 251,
            )
        )
    return ratings


def write_movielens_100k(path: str | Path, ratings: list[Rating]) -> Path:
    """Write ratings in the tab-separated u.data layout."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for r in ratings:
            handle.write(f"{r.user}\t{r.item}\t{int(r.value)}\t{r.timestamp}\n")
    return path
