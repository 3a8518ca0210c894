"""The seven ranking-quality metrics computed over one experiment's outputs.

All metrics are means over the test users of a per-user term and share the
same precomputed context, so every recommender in an experiment is scored
against identical data. Conventions that the formulas leave open:

* Denominators always use the configured list length k, even when a
  recommender returned fewer items; a recommender that cannot fill its
  lists is penalized rather than excused.
* An item absent from the training set has frequency 0 and contributes a
  zero term to novelty (log2(0) is taken as 0), is excluded from the
  coverage numerator, and has an empty liker vector for diversity.
* Cosine similarity of liker vectors is 0 whenever either vector is empty.
* Popularity ties are broken lexicographically by item id, so the top-k
  popular list used by serendipity is deterministic.
* Diversity divides the sum over unordered item pairs by k*(k-1); the value
  therefore lives in [0, 1], and with non-negative similarities tops out at
  0.5. It is undefined (reported as absent) for k == 1.

Per-user terms are accumulated with ``math.fsum`` so that evaluation order
cannot perturb results.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum, log2, sqrt
from typing import Mapping

from .domain import MetricsReport, RatingSet, RecommendationList


@dataclass(frozen=True)
class EvaluationContext:
    """Precomputed training/test statistics that every metric reads from.

    ``item_freq`` maps each training item to its share of all training
    ratings (the shares sum to 1). ``like_vectors`` maps each training item
    to the set of users who rated it strictly above the threshold.
    ``popular_topk`` is the k most-rated training items, most popular first.
    ``test_likes`` caches, per test user, the items they rated strictly
    above the threshold in the test set.
    """

    train: RatingSet
    test: RatingSet
    threshold: float
    k: int
    test_users: frozenset[str]
    train_items: frozenset[str]
    item_freq: Mapping[str, float]
    like_vectors: Mapping[str, frozenset[str]]
    popular_topk: tuple[str, ...]
    test_likes: Mapping[str, frozenset[str]]


def build_context(
    train: RatingSet, test: RatingSet, threshold: float, k: int
) -> EvaluationContext:
    """Precompute everything the seven metrics need.

    Raises ValueError for an empty training set or an empty test set: with
    no training items or no test users none of the metrics is defined.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(train) == 0:
        raise ValueError("training set is empty; no metric is defined")
    if not test.users:
        raise ValueError("test set has no users; no metric is defined")

    counts: dict[str, int] = {}
    likers: dict[str, set[str]] = {}
    for r in train:
        counts[r.item] = counts.get(r.item, 0) + 1
        if r.value > threshold:
            likers.setdefault(r.item, set()).add(r.user)

    n = len(train)
    item_freq = {item: c / n for item, c in counts.items()}
    like_vectors = {item: frozenset(likers.get(item, ())) for item in counts}
    ranked = sorted(counts, key=lambda item: (-counts[item], item))
    popular_topk = tuple(ranked[: min(k, len(ranked))])
    test_likes = {
        user: frozenset(r.item for r in test.by_user[user] if r.value > threshold)
        for user in test.users
    }
    return EvaluationContext(
        train=train,
        test=test,
        threshold=threshold,
        k=k,
        test_users=test.users,
        train_items=train.items,
        item_freq=item_freq,
        like_vectors=like_vectors,
        popular_topk=popular_topk,
        test_likes=test_likes,
    )


def _check_recs(ctx: EvaluationContext, recs: Mapping[str, RecommendationList]) -> None:
    users = set(recs)
    if users != ctx.test_users:
        missing = sorted(ctx.test_users - users)[:5]
        extra = sorted(users - ctx.test_users)[:5]
        raise ValueError(
            "recommendations must cover exactly the test users "
            f"(missing {missing}, unexpected {extra})"
        )
    for user, rec in recs.items():
        if rec.user != user:
            raise ValueError(f"list keyed {user!r} belongs to user {rec.user!r}")
        if len(rec.items) > ctx.k:
            raise ValueError(
                f"list for user {user!r} has {len(rec.items)} items, more than k={ctx.k}"
            )


def coverage(ctx: EvaluationContext, recs: Mapping[str, RecommendationList]) -> float:
    """Share of the training catalog that appears in at least one list."""
    _check_recs(ctx, recs)
    suggested: set[str] = set()
    for rec in recs.values():
        suggested.update(rec.items)
    return len(suggested & ctx.train_items) / len(ctx.train_items)


def precision(ctx: EvaluationContext, recs: Mapping[str, RecommendationList]) -> float:
    """Mean fraction of each list that the user liked in the test set."""
    _check_recs(ctx, recs)
    terms = (
        len(set(recs[u].items) & ctx.test_likes[u]) / ctx.k for u in ctx.test_users
    )
    return fsum(terms) / len(ctx.test_users)


def recall(ctx: EvaluationContext, recs: Mapping[str, RecommendationList]) -> float:
    """Mean fraction of each user's liked test items that made the list.

    A user with no liked test items contributes 0.
    """
    _check_recs(ctx, recs)
    terms = []
    for u in ctx.test_users:
        ref = ctx.test_likes[u]
        if not ref:
            terms.append(0.0)
        else:
            terms.append(len(set(recs[u].items) & ref) / len(ref))
    return fsum(terms) / len(ctx.test_users)


def ndcg(ctx: EvaluationContext, recs: Mapping[str, RecommendationList]) -> float:
    """Position-discounted hit gain, normalized by the all-relevant ideal.

    The ideal ranking always has k relevant items, so the normalizer is
    user-independent and per-user normalization equals normalizing the mean.
    """
    _check_recs(ctx, recs)
    idcg = fsum(1.0 / log2(i + 1) for i in range(1, ctx.k + 1))
    terms = []
    for u in ctx.test_users:
        ref = ctx.test_likes[u]
        dcg = fsum(
            1.0 / log2(i + 1)
            for i, item in enumerate(recs[u].items, start=1)
            if item in ref
        )
        terms.append(dcg / idcg)
    return fsum(terms) / len(ctx.test_users)


def novelty(ctx: EvaluationContext, recs: Mapping[str, RecommendationList]) -> float:
    """Mean negative log2 training frequency of recommended items.

    Items never seen in training have frequency 0 and contribute 0.
    """
    _check_recs(ctx, recs)
    terms = []
    for u in ctx.test_users:
        for item in recs[u].items:
            freq = ctx.item_freq.get(item, 0.0)
            if freq > 0.0:
                terms.append(-log2(freq))
    return fsum(terms) / (len(ctx.test_users) * ctx.k)


def diversity(ctx: EvaluationContext, recs: Mapping[str, RecommendationList]) -> float:
    """Mean pairwise dissimilarity (1 - cosine of liker vectors) within lists.

    Undefined for k == 1; raises ValueError so callers report the metric as
    absent rather than zero.
    """
    if ctx.k < 2:
        raise ValueError("diversity is undefined for k = 1")
    _check_recs(ctx, recs)
    sim_cache: dict[tuple[str, str], float] = {}

    def sim(a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        cached = sim_cache.get(key)
        if cached is not None:
            return cached
        va = ctx.like_vectors.get(a, frozenset())
        vb = ctx.like_vectors.get(b, frozenset())
        if not va or not vb:
            value = 0.0
        else:
            value = len(va & vb) / sqrt(len(va) * len(vb))
        sim_cache[key] = value
        return value

    denom = ctx.k * (ctx.k - 1)
    terms = []
    for u in ctx.test_users:
        items = recs[u].items
        pair_sum = fsum(
            1.0 - sim(items[i], items[j])
            for i in range(len(items))
            for j in range(i + 1, len(items))
        )
        terms.append(pair_sum / denom)
    return fsum(terms) / len(ctx.test_users)


def serendipity(ctx: EvaluationContext, recs: Mapping[str, RecommendationList]) -> float:
    """Precision counted only on hits outside the top-k most popular items."""
    _check_recs(ctx, recs)
    obvious = frozenset(ctx.popular_topk)
    terms = (
        len((set(recs[u].items) - obvious) & ctx.test_likes[u]) / ctx.k
        for u in ctx.test_users
    )
    return fsum(terms) / len(ctx.test_users)


def evaluate_all(
    ctx: EvaluationContext, recs: Mapping[str, RecommendationList]
) -> MetricsReport:
    """Compute all seven metrics on the same inputs.

    Pure function of (ctx, recs); diversity comes back as None when k == 1.
    """
    _check_recs(ctx, recs)
    return MetricsReport(
        coverage=coverage(ctx, recs),
        precision=precision(ctx, recs),
        recall=recall(ctx, recs),
        ndcg=ndcg(ctx, recs),
        novelty=novelty(ctx, recs),
        diversity=diversity(ctx, recs) if ctx.k >= 2 else None,
        serendipity=serendipity(ctx, recs),
    )
