"""All-pairs Max BET screening with family-wise error control.

Planes are expanded once per gene and shared read-only; the per-pair inner
loop is one XOR and one popcount per cross interaction over the packed
planes (arbitrary-precision ints, so words are handled in bulk), with no
per-pair rank arrays.  A pair is significant when

    min(1, m_pairs * min(1, m_bids * p_raw)) <= alpha

i.e. Bonferroni across the interactions of the pair and then across all
pairs.  m_pairs defaults to C(G, 2) of the screened matrix and may be
overridden upward (never downward) to adjust against a larger external
family, e.g. the full pair count of a parent dataset when screening a
sample-subset context.

Results stream in pair-index order (gene index i < j, lexicographic), and
the order is identical whatever worker_count is: workers own contiguous
pair-index ranges whose outputs are concatenated in range order.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .core.bids import (
    BidId,
    all_bids,
    bid_class_of,
    bid_count,
    bid_from_name,
    class_members,
    parse_class_label,
)
from .core.copula import CopulaColumn, empirical_copula
from .core.expansion import BitPlanes, binary_expansion
from .core.maxbet import MODES, BetResult
from .core.nulls import (
    EXACT_PERMUTATION_MAX_N,
    pvalue_binomial,
    pvalue_hypergeometric,
    pvalue_normal,
    pvalue_permutation,
)
from .core.stats import (
    all_symmetry_statistics,
    mask_combos,
    sign_factor,
    symmetry_statistic,
    z_score,
)
from .errors import EmptyIntersectionError
from .preprocess import ExpressionMatrix

__all__ = [
    "ScreenConfig",
    "ScreenSummary",
    "PairResult",
    "BetRun",
    "CompareRow",
    "precompute_bitplanes",
    "precompute_copulas",
    "screen_all_pairs",
    "write_results_csv",
    "read_results_csv",
    "write_compare_csv",
    "all_bid_diagnostics",
    "write_diagnostics_csv",
    "top_k_genes",
    "compare_runs",
    "class_z",
    "RESULT_COLUMNS",
]

RESULT_COLUMNS = (
    "gene_i",
    "gene_j",
    "bid",
    "bid_class",
    "s",
    "z",
    "p_raw",
    "p_bid_adj",
    "p_pair_adj",
    "approximate",
    "method",
)


@dataclass(frozen=True)
class ScreenConfig:
    d1: int = 2
    d2: int = 2
    alpha: float = 0.05
    m_pairs: int | None = None
    bid_filter: frozenset[str] | None = None
    worker_count: int = 1
    output_path: str | Path | None = None
    emit_all: bool = False
    mode: str = "exact"
    permutation_iterations: int = 999
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")


@dataclass
class ScreenSummary:
    total_pairs: int
    significant_pairs: int
    class_counts: dict[str, int]
    wall_time_s: float
    n_genes: int
    n_samples: int
    alpha: float
    m_pairs: int
    d1: int
    d2: int
    mode: str

    def to_dict(self) -> dict:
        return {
            "total_pairs": self.total_pairs,
            "significant_pairs": self.significant_pairs,
            "class_counts": self.class_counts,
            "wall_time_s": float(f"{self.wall_time_s:.12g}"),
            "n_genes": self.n_genes,
            "n_samples": self.n_samples,
            "alpha": self.alpha,
            "m_pairs": self.m_pairs,
            "d1": self.d1,
            "d2": self.d2,
            "mode": self.mode,
        }


@dataclass(frozen=True)
class PairResult:
    gene_i: str
    gene_j: str
    result: BetResult


@dataclass
class BetRun:
    """A screening run bundled with the planes it was computed from."""

    gene_ids: list[str]
    results: list[PairResult]
    planes: dict[str, BitPlanes] = field(default_factory=dict)
    n: int = 0


def precompute_bitplanes(matrix: ExpressionMatrix, d1: int) -> list[BitPlanes]:
    """Copula-transform and expand every gene once."""
    return [
        binary_expansion(empirical_copula(matrix.values[g]), d1)
        for g in range(matrix.n_genes)
    ]


def precompute_copulas(matrix: ExpressionMatrix) -> list[CopulaColumn]:
    return [empirical_copula(matrix.values[g]) for g in range(matrix.n_genes)]


def run_from_matrix(matrix: ExpressionMatrix, d: int = 2) -> BetRun:
    """Expand a matrix into a BetRun usable as a comparison target."""
    planes = precompute_bitplanes(matrix, d)
    return BetRun(
        gene_ids=list(matrix.gene_ids),
        results=[],
        planes=dict(zip(matrix.gene_ids, planes)),
        n=matrix.n_samples,
    )


def _pair_offset(i: int, g: int) -> int:
    return i * (2 * g - i - 1) // 2


def _unrank_pair(k: int, g: int) -> tuple[int, int]:
    # invert k = offset(i) + (j - i - 1)
    i = int(g - 0.5 - math.sqrt(max(0.0, (g - 0.5) ** 2 - 2.0 * k)))
    while _pair_offset(i + 1, g) <= k:
        i += 1
    while _pair_offset(i, g) > k:
        i -= 1
    return i, k - _pair_offset(i, g) + i + 1


# Worker-process state, installed once per worker by the pool initializer.
_W: dict = {}


def _init_worker(state: dict) -> None:
    _W.clear()
    _W.update(state)


def _score_range(bounds: tuple[int, int]) -> list[tuple[int, int, BetResult]]:
    lo, hi = bounds
    g = _W["n_genes"]
    out = []
    for k in range(lo, hi):
        i, j = _unrank_pair(k, g)
        res = _score_pair(i, j)
        if res is not None:
            out.append((i, j, res))
    return out


def _score_pair(i: int, j: int) -> BetResult | None:
    n = _W["n"]
    cu = _W["combos"][i]
    cv = _W["combos"][j]
    bids = _W["bids"]

    best_idx = 0
    best_count = 0
    best_abs = -1
    for t, (a, b) in enumerate(bids):
        c = (cu[a] ^ cv[b]).bit_count()
        mag = abs(n - 2 * c)
        if mag > best_abs:
            best_abs = mag
            best_idx = t
            best_count = c
    a, b = bids[best_idx]
    s = _W["signs"][best_idx] * (n - 2 * best_count)

    p_raw, method, approximate = _pair_pvalue(s, i, j, best_idx)
    p_bid = min(1.0, _W["m_bids"] * p_raw)
    p_pair = min(1.0, _W["m_pairs"] * p_bid)

    if not (p_pair <= _W["alpha"] or _W["emit_all"]):
        return None
    bid = BidId(a, b)
    cls = bid_class_of(bid)
    if _W["bid_filter"] is not None and cls.label not in _W["bid_filter"]:
        return None
    return BetResult(
        bid=bid,
        bid_class=cls,
        s=s,
        n=n,
        z=z_score(s, n),
        p_raw=p_raw,
        p_bid_adjusted=p_bid,
        p_pair_adjusted=p_pair,
        approximate=approximate,
        method=method,
    )


def _pair_pvalue(s: int, i: int, j: int, bid_idx: int) -> tuple[float, str, bool]:
    mode = _W["mode"]
    n = _W["n"]
    if mode == "exact" and _W["exact_ok"]:
        cache = _W["p_cache"]
        p = cache.get(abs(s))
        if p is None:
            p = pvalue_hypergeometric(s, n)
            cache[abs(s)] = p
        return p, "hypergeometric", False
    if mode in ("exact", "approx"):
        return pvalue_normal(s, n), "normal_approx", True
    if mode == "binomial":
        cache = _W["p_cache"]
        p = cache.get(abs(s))
        if p is None:
            p = pvalue_binomial(s, n)
            cache[abs(s)] = p
        return p, "binomial", False
    # permutation: per-pair seed, so output does not depend on visit order
    a, b = _W["bids"][bid_idx]
    p = pvalue_permutation(
        _W["planes"][i],
        _W["ranks"][j],
        BidId(a, b),
        iterations=_W["perm_iterations"],
        seed=(_W["seed"] << 32) ^ (i * _W["n_genes"] + j),
    )
    return p, "permutation", n > EXACT_PERMUTATION_MAX_N


def _build_state(
    planes: Sequence[BitPlanes],
    config: ScreenConfig,
    m_pairs: int,
    ranks: Sequence[CopulaColumn] | None,
) -> dict:
    n = planes[0].n
    bids = all_bids(config.d1, config.d2)
    block = 1 << max(config.d1, config.d2)
    state = {
        "n": n,
        "n_genes": len(planes),
        "combos": [mask_combos(p) for p in planes],
        "bids": [(b.a_mask, b.b_mask) for b in bids],
        "signs": [sign_factor(b) for b in bids],
        "m_bids": bid_count(config.d1, config.d2),
        "m_pairs": m_pairs,
        "alpha": config.alpha,
        "emit_all": config.emit_all,
        "bid_filter": set(config.bid_filter) if config.bid_filter else None,
        "mode": config.mode,
        "exact_ok": n % block == 0,
        "p_cache": {},
        "perm_iterations": config.permutation_iterations,
        "seed": config.seed,
        "planes": list(planes) if config.mode == "permutation" else None,
        "ranks": list(ranks) if ranks is not None else None,
    }
    if config.mode == "permutation" and state["ranks"] is None:
        raise ValueError("permutation mode needs the rank columns")
    return state


def screen_all_pairs(
    planes: Sequence[BitPlanes],
    gene_ids: Sequence[str],
    config: ScreenConfig,
    ranks: Sequence[CopulaColumn] | None = None,
) -> tuple[list[PairResult], ScreenSummary]:
    """Score every unordered gene pair; see the module docstring for rules."""
    g = len(planes)
    if g < 2:
        raise ValueError("need at least two genes")
    if len(gene_ids) != g:
        raise ValueError("gene_ids and planes disagree in length")
    total_pairs = g * (g - 1) // 2
    m_pairs = config.m_pairs if config.m_pairs is not None else total_pairs
    if m_pairs < total_pairs:
        raise ValueError(
            f"m_pairs={m_pairs} below the {total_pairs} pairs screened; "
            "the external family may only be larger"
        )

    started = time.perf_counter()
    state = _build_state(planes, config, m_pairs, ranks)

    if config.worker_count == 1:
        _init_worker(state)
        scored = _score_range((0, total_pairs))
        _W.clear()
    else:
        chunk = max(1, math.ceil(total_pairs / (config.worker_count * 4)))
        bounds = [
            (lo, min(lo + chunk, total_pairs))
            for lo in range(0, total_pairs, chunk)
        ]
        with ProcessPoolExecutor(
            max_workers=config.worker_count,
            initializer=_init_worker,
            initargs=(state,),
        ) as pool:
            scored = []
            for part in pool.map(_score_range, bounds):
                scored.extend(part)

    results = [
        PairResult(gene_i=gene_ids[i], gene_j=gene_ids[j], result=r)
        for i, j, r in scored
    ]
    class_counts: dict[str, int] = {}
    n_sig = 0
    for row in results:
        if row.result.p_pair_adjusted <= config.alpha:
            n_sig += 1
            lab = row.result.bid_class.label
            class_counts[lab] = class_counts.get(lab, 0) + 1

    summary = ScreenSummary(
        total_pairs=total_pairs,
        significant_pairs=n_sig,
        class_counts=dict(sorted(class_counts.items())),
        wall_time_s=time.perf_counter() - started,
        n_genes=g,
        n_samples=planes[0].n,
        alpha=config.alpha,
        m_pairs=m_pairs,
        d1=config.d1,
        d2=config.d2,
        mode=config.mode,
    )
    if config.output_path is not None:
        write_results_csv(results, config.output_path)
    return results, summary


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.12g}"


def write_results_csv(results: Iterable[PairResult], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in results:
            r = row.result
            writer.writerow(
                [
                    row.gene_i,
                    row.gene_j,
                    r.bid.name,
                    r.bid_class.label,
                    str(r.s),
                    _fmt(r.z),
                    _fmt(r.p_raw),
                    _fmt(r.p_bid_adjusted),
                    _fmt(r.p_pair_adjusted),
                    "true" if r.approximate else "false",
                    r.method,
                ]
            )


def read_results_csv(path, n: int | None = None) -> list[PairResult]:
    """Load a results CSV back into PairResult rows.

    The sample count is not stored per row; pass n when downstream code
    needs BetResult.n, otherwise it is reconstructed from s and z (0 when
    s = 0).
    """
    out: list[PairResult] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            s = int(rec["s"])
            z = float(rec["z"])
            n_row = n if n is not None else (round((s / z) ** 2) if z > 0 else 0)
            bid = bid_from_name(rec["bid"])
            out.append(
                PairResult(
                    gene_i=rec["gene_i"],
                    gene_j=rec["gene_j"],
                    result=BetResult(
                        bid=bid,
                        bid_class=bid_class_of(bid),
                        s=s,
                        n=n_row,
                        z=z,
                        p_raw=float(rec["p_raw"]),
                        p_bid_adjusted=float(rec["p_bid_adj"]),
                        p_pair_adjusted=(
                            float(rec["p_pair_adj"]) if rec["p_pair_adj"] else None
                        ),
                        approximate=rec["approximate"] == "true",
                        method=rec["method"],
                    ),
                )
            )
    return out


def all_bid_diagnostics(
    planes: Sequence[BitPlanes],
    gene_ids: Sequence[str],
    results: Iterable[PairResult],
) -> list[tuple[str, str, str, str, int, float]]:
    """Every interaction's statistic for the emitted pairs (diagnostics).

    Rows are (gene_i, gene_j, bid, bid_class, s, z); inference stays with
    the winning interaction in the main results.
    """
    index = {g: i for i, g in enumerate(gene_ids)}
    out = []
    for row in results:
        u = planes[index[row.gene_i]]
        v = planes[index[row.gene_j]]
        for st in all_symmetry_statistics(u, v):
            out.append(
                (
                    row.gene_i,
                    row.gene_j,
                    st.bid.name,
                    bid_class_of(st.bid).label,
                    st.s,
                    st.z,
                )
            )
    return out


def write_diagnostics_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["gene_i", "gene_j", "bid", "bid_class", "s", "z"])
        for gene_i, gene_j, bid, cls, s, z in rows:
            writer.writerow([gene_i, gene_j, bid, cls, str(s), f"{z:.12g}"])


def top_k_genes(
    results: Iterable[PairResult], k: int = 200
) -> list[tuple[str, float]]:
    """Genes ranked by their maximum z over the given (significant) pairs.

    Descending z, ties broken by gene id; the first k are returned.
    """
    best: dict[str, float] = {}
    for row in results:
        z = row.result.z
        for gene in (row.gene_i, row.gene_j):
            if z > best.get(gene, -1.0):
                best[gene] = z
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


@dataclass(frozen=True)
class CompareRow:
    gene_i: str
    gene_j: str
    z_a: float
    z_b: float
    flag: str


def class_z(planes_u: BitPlanes, planes_v: BitPlanes, class_label: str) -> float:
    """Largest |S|/sqrt(n) over the member interactions of a class.

    Taking the max over the reflection orbit makes the value independent
    of which gene sits on which axis.
    """
    members = class_members(class_label, planes_u.depth, planes_v.depth)
    return max(symmetry_statistic(planes_u, planes_v, m).z for m in members)


def compare_runs(
    results_a: Iterable[PairResult],
    run_b: BetRun,
    bid_class: str,
) -> list[CompareRow]:
    """Class-specific z of run A's significant pairs, recomputed in run B.

    Rows of run A whose winning class matches are kept; for each, the
    class statistic is recomputed from run B's planes even when that class
    is not the winner there.  Pairs with a gene missing from run B are
    flagged 'missing_in_b' (z_b = nan) rather than dropped.
    """
    label = parse_class_label(bid_class)
    rows_a = [r for r in results_a if r.result.bid_class.label == label]
    genes_a = {g for r in rows_a for g in (r.gene_i, r.gene_j)}
    if genes_a and not (genes_a & set(run_b.planes)):
        raise EmptyIntersectionError(
            "no gene of the selected pairs exists in the comparison run"
        )
    out = []
    for r in rows_a:
        pu = run_b.planes.get(r.gene_i)
        pv = run_b.planes.get(r.gene_j)
        if pu is None or pv is None:
            out.append(
                CompareRow(r.gene_i, r.gene_j, r.result.z, float("nan"), "missing_in_b")
            )
            continue
        out.append(
            CompareRow(r.gene_i, r.gene_j, r.result.z, class_z(pu, pv, label), "ok")
        )
    return out


def write_compare_csv(rows: Iterable[CompareRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["gene_i", "gene_j", "z_a", "z_b", "flag"])
        for row in rows:
            writer.writerow(
                [row.gene_i, row.gene_j, _fmt(row.z_a), _fmt(row.z_b), row.flag]
            )
