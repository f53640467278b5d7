"""Missing/spurious link splits, AUC, and repeated experiments.

Missing links: a random fraction of edges is withheld as the probe set; AUC
is the chance a probe edge outscores a pair absent from the original graph.
Spurious links: random non-edges are injected; AUC is the chance an injected
edge scores lower than a real one.  Ties count half in both.
"""
from __future__ import annotations

import configparser
import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .graph import DomainError, Graph, read_edge_list
from .predictors import DEFAULT_EAGER_CAP, PredictorId, score_matrix, score_pairs

__all__ = [
    "AucDetails",
    "AucResult",
    "EvalSplit",
    "ExperimentConfig",
    "RESULT_HEADER",
    "ConfigError",
    "add_spurious",
    "auc",
    "auc_details",
    "auc_from_scores",
    "mix_seed",
    "probe_size",
    "random_scorer",
    "run_experiment",
    "split_missing",
    "write_results_csv",
]

log = logging.getLogger(__name__)

MISSING = "missing"
SPURIOUS = "spurious"
MODES = (MISSING, SPURIOUS)
METHODS = ("auto", "exact", "sampled")

RESULT_HEADER = (
    "dataset", "predictor", "mode", "fraction", "trials",
    "auc_mean", "auc_std", "method", "comparisons",
)

_MASK64 = (1 << 64) - 1

# a scorer maps (graph, (k, 2) pair array) -> k scores
Scorer = Callable[[Graph, np.ndarray], np.ndarray]
PredictorLike = Union[PredictorId, str, Scorer]


class ConfigError(ValueError):
    pass


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix_seed(base_seed: int, trial: int) -> int:
    """Seed of trial ``trial``: splitmix64 of ``base_seed XOR trial``."""
    return _splitmix64((int(base_seed) ^ int(trial)) & _MASK64)


def probe_size(fraction: float, num_edges: int) -> int:
    """``fraction * num_edges`` rounded half up."""
    return int(math.floor(fraction * num_edges + 0.5))


@dataclass(frozen=True, eq=False)
class EvalSplit:
    original: Graph
    train: Graph
    probe: np.ndarray  # (k, 2), rows u < v, sorted
    mode: str
    fraction: float
    seed: int

    def probe_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.probe}


def _check_fraction(fraction: float) -> None:
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"fraction must lie in (0, 1), got {fraction}")


def _sorted_pairs(pairs: np.ndarray) -> np.ndarray:
    pairs = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def split_missing(original: Graph, fraction: float, seed: int) -> EvalSplit:
    """Withhold a uniform random ``fraction`` of the edges as the probe set.

    The training graph keeps every node, so degrees may drop to zero.
    """
    _check_fraction(fraction)
    m = original.num_edges
    if m < 2:
        raise DomainError("need at least two edges to split")
    k = probe_size(fraction, m)
    if k == 0 or k == m:
        raise DomainError(f"fraction {fraction} of {m} edges leaves an empty probe or training set")
    rng = np.random.default_rng(seed)
    edges = original.edge_array
    chosen = np.zeros(m, dtype=bool)
    chosen[rng.choice(m, size=k, replace=False)] = True
    train = original.with_edges(map(tuple, edges[~chosen]))
    return EvalSplit(original, train, _sorted_pairs(edges[chosen]), MISSING, fraction, seed)


def add_spurious(original: Graph, fraction: float, seed: int) -> EvalSplit:
    """Inject ``round(fraction * |E|)`` uniform random non-edges."""
    _check_fraction(fraction)
    n, m = original.num_nodes, original.num_edges
    k = probe_size(fraction, m)
    available = n * (n - 1) // 2 - m
    if k == 0:
        raise DomainError(f"fraction {fraction} of {m} edges adds no spurious links")
    if k > available:
        raise DomainError(
            f"need {k} non-edges but only {available} exist (short by {k - available})"
        )
    rng = np.random.default_rng(seed)
    picked: list[np.ndarray] = []
    have = 0
    while have < k:
        keys = _draw_non_edges(original, max(2 * (k - have), 16), rng)
        if picked:
            keys = keys[~np.isin(keys, np.concatenate(picked))]
        _, first = np.unique(keys, return_index=True)
        keys = keys[np.sort(first)][: k - have]
        picked.append(keys)
        have += len(keys)
    keys = np.concatenate(picked)
    out = [(int(x // n), int(x % n)) for x in keys]
    probe = _sorted_pairs(np.array(out))
    train = original.with_edges(original.edges() + out)
    return EvalSplit(original, train, probe, SPURIOUS, fraction, seed)


# --- AUC ------------------------------------------------------------------------


def auc_from_scores(positive: Sequence[float], negative: Sequence[float]) -> tuple[float, int, int, int]:
    """Exact AUC of positives ranked above negatives, ties weighted 0.5.

    Returns ``(auc, wins, ties, comparisons)``.
    """
    pos = np.asarray(positive, dtype=np.float64)
    neg = np.sort(np.asarray(negative, dtype=np.float64))
    n = len(pos) * len(neg)
    if n == 0:
        raise DomainError("AUC needs at least one positive and one negative score")
    below = np.searchsorted(neg, pos, side="left")
    upto = np.searchsorted(neg, pos, side="right")
    wins = int(below.sum())
    ties = int((upto - below).sum())
    return (wins + 0.5 * ties) / n, wins, ties, n


def random_scorer(seed: int) -> Scorer:
    """I.i.d. uniform scores in [0, 1), a fixed function of (seed, pair)."""

    def scorer(g: Graph, pairs: np.ndarray) -> np.ndarray:
        pairs = np.sort(np.asarray(pairs, dtype=np.uint64).reshape(-1, 2), axis=1)
        x = pairs[:, 0] * np.uint64(g.num_nodes) + pairs[:, 1]
        x ^= np.uint64(_splitmix64(seed))
        with np.errstate(over="ignore"):
            x = x + np.uint64(0x9E3779B97F4A7C15)
            x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            x = x ^ (x >> np.uint64(31))
        return (x >> np.uint64(11)).astype(np.float64) / float(1 << 53)

    return scorer


@dataclass(frozen=True)
class AucDetails:
    auc: float
    method: str
    comparisons: int
    wins: int
    ties: int


def _non_edges(g: Graph) -> np.ndarray:
    n = g.num_nodes
    r, s = np.triu_indices(n, k=1)
    mask = g.adjacency_matrix[r, s].A1 == 0
    return np.stack([r[mask], s[mask]], axis=1)


def _edge_keys(g: Graph) -> np.ndarray:
    e = g.edge_array
    return np.sort(e[:, 0] * g.num_nodes + e[:, 1])


def _draw_non_edges(g: Graph, size: int, rng: np.random.Generator) -> np.ndarray:
    """Up to ``size`` uniform ordered draws, keeping those that are non-edges.

    Returned as keys ``u * n + v`` with ``u < v``.
    """
    n = g.num_nodes
    draw = rng.integers(0, n, size=(size, 2))
    lo = draw.min(axis=1)
    hi = draw.max(axis=1)
    keys = lo * n + hi
    keep = (lo != hi) & ~np.isin(keys, _edge_keys(g), assume_unique=False)
    return keys[keep]


def _sample_non_edges(g: Graph, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform pairs (with replacement) absent from ``g``, by rejection."""
    n = g.num_nodes
    chunks = []
    filled = 0
    while filled < count:
        keys = _draw_non_edges(g, 2 * (count - filled) + 16, rng)[: count - filled]
        chunks.append(keys)
        filled += len(keys)
    keys = np.concatenate(chunks)
    return np.stack([keys // n, keys % n], axis=1)


class _CachedScorer:
    """Scores every requested pair set with one matrix per (graph, predictor)."""

    def __init__(self, p: PredictorLike, cap: int | None):
        self.p = p
        self.cap = cap
        self._matrix: np.ndarray | None = None
        self._graph: Graph | None = None

    def __call__(self, g: Graph, pairs: np.ndarray) -> np.ndarray:
        if callable(self.p) and not isinstance(self.p, (str, PredictorId)):
            return np.asarray(self.p(g, pairs), dtype=np.float64)
        pid = PredictorId.parse(self.p)
        if self.cap is not None and g.num_nodes > self.cap:
            return score_pairs(g, pid, pairs)
        if self._graph is not g:
            self._matrix = score_matrix(g, pid, cap=None)
            self._graph = g
        return score_pairs(g, pid, pairs, matrix=self._matrix)


def auc_details(
    split: EvalSplit,
    p: PredictorLike,
    method: str = "auto",
    sample_comparisons: int = 100_000,
    seed: int = 0,
    pair_budget: int = 50_000_000,
    eager_cap: int | None = DEFAULT_EAGER_CAP,
) -> AucDetails:
    """AUC of predictor ``p`` on ``split`` with bookkeeping.

    ``p`` is a :class:`PredictorId` (or its name) or a callable
    ``scorer(graph, pairs) -> scores``.  ``method="auto"`` is exact when the
    number of positive x negative comparisons fits ``pair_budget`` and
    sampled otherwise.
    """
    if method not in METHODS:
        raise DomainError(f"unknown AUC method {method!r}")
    if len(split.probe) == 0:
        raise DomainError("empty probe set")
    scorer = _CachedScorer(p, eager_cap)
    g = split.train
    n_nodes = g.num_nodes
    if split.mode == MISSING:
        positives = split.probe
        num_neg = n_nodes * (n_nodes - 1) // 2 - split.original.num_edges
    elif split.mode == SPURIOUS:
        positives = split.original.edge_array
        num_neg = len(split.probe)
    else:
        raise DomainError(f"unknown mode {split.mode!r}")
    if num_neg == 0 or len(positives) == 0:
        raise DomainError(f"empty comparison class in {split.mode} mode")

    if method == "auto":
        method = "exact" if len(positives) * num_neg <= pair_budget else "sampled"

    if method == "exact":
        negatives = _non_edges(split.original) if split.mode == MISSING else split.probe
        value, wins, ties, n = auc_from_scores(scorer(g, positives), scorer(g, negatives))
        return AucDetails(value, "exact", n, wins, ties)

    if sample_comparisons < 1:
        raise DomainError("sample_comparisons must be positive")
    rng = np.random.default_rng(seed)
    pos_pairs = positives[rng.integers(0, len(positives), size=sample_comparisons)]
    if split.mode == MISSING:
        neg_pairs = _sample_non_edges(split.original, sample_comparisons, rng)
    else:
        neg_pairs = split.probe[rng.integers(0, len(split.probe), size=sample_comparisons)]
    ps = scorer(g, pos_pairs)
    ns = scorer(g, neg_pairs)
    wins = int(np.count_nonzero(ps > ns))
    ties = int(np.count_nonzero(ps == ns))
    return AucDetails((wins + 0.5 * ties) / sample_comparisons, "sampled", sample_comparisons, wins, ties)


def auc(
    split: EvalSplit,
    p: PredictorLike,
    method: str = "auto",
    sample_comparisons: int = 100_000,
    seed: int = 0,
    **kwargs,
) -> float:
    return auc_details(split, p, method, sample_comparisons, seed, **kwargs).auc


# --- experiments ----------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    predictors: tuple[PredictorId, ...] = tuple(PredictorId)
    modes: tuple[str, ...] = MODES
    fractions: tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(1, 10))
    trials: int = 100
    base_seed: int = 0
    auc_method: str = "auto"
    sample_comparisons: int = 100_000
    pair_budget: int = 50_000_000
    eager_cap: int = DEFAULT_EAGER_CAP

    def __post_init__(self):
        if not self.predictors:
            raise ConfigError("at least one predictor is required")
        for m in self.modes:
            if m not in MODES:
                raise ConfigError(f"unknown mode {m!r}; expected one of {', '.join(MODES)}")
        if not self.modes:
            raise ConfigError("at least one mode is required")
        if not self.fractions:
            raise ConfigError("at least one fraction is required")
        for f in self.fractions:
            if not 0.0 < f < 1.0:
                raise ConfigError(f"fraction {f} outside (0, 1)")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.auc_method not in METHODS:
            raise ConfigError(f"auc_method must be one of {', '.join(METHODS)}")
        if self.sample_comparisons < 1:
            raise ConfigError("sample_comparisons must be >= 1")

    _KEYS = (
        "dataset", "predictors", "modes", "fractions", "trials", "base_seed",
        "auc_method", "sample_comparisons", "pair_budget", "eager_cap",
    )

    @classmethod
    def from_mapping(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        unknown = set(data) - set(cls._KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "dataset" not in data:
            raise ConfigError("config is missing the required 'dataset' key")

        def split_list(value):
            if isinstance(value, str):
                return [x for x in (t.strip() for t in value.replace(",", " ").split()) if x]
            return list(value)

        def as_int(key):
            try:
                return int(str(data[key]).replace("_", ""))
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {data[key]!r}") from None

        kwargs: dict = {}
        dataset = Path(str(data["dataset"]))
        if base_dir is not None and not dataset.is_absolute():
            dataset = base_dir / dataset
        kwargs["dataset"] = str(dataset)
        try:
            if "predictors" in data:
                kwargs["predictors"] = tuple(PredictorId.parse(x) for x in split_list(data["predictors"]))
            if "fractions" in data:
                kwargs["fractions"] = tuple(float(x) for x in split_list(data["fractions"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if "modes" in data:
            kwargs["modes"] = tuple(x.lower() for x in split_list(data["modes"]))
        if "auc_method" in data:
            kwargs["auc_method"] = str(data["auc_method"]).strip().lower()
        for key in ("trials", "base_seed", "sample_comparisons", "pair_budget", "eager_cap"):
            if key in data:
                kwargs[key] = as_int(key)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        """Read an INI file with an ``[experiment]`` section."""
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not parser.has_section("experiment"):
            raise ConfigError(f"{path}: missing [experiment] section")
        return cls.from_mapping(dict(parser["experiment"]), base_dir=Path(path).resolve().parent)

    def echo(self) -> dict:
        return {
            "dataset": self.dataset,
            "predictors": [p.value for p in self.predictors],
            "modes": list(self.modes),
            "fractions": list(self.fractions),
            "trials": self.trials,
            "base_seed": self.base_seed,
            "auc_method": self.auc_method,
            "sample_comparisons": self.sample_comparisons,
            "pair_budget": self.pair_budget,
            "eager_cap": self.eager_cap,
        }


@dataclass
class AucResult:
    predictor: PredictorId
    mode: str
    fraction: float
    trials: list[float] = field(default_factory=list)
    method: str = ""
    comparisons_per_trial: int = 0
    error: str | None = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.trials)) if self.trials else float("nan")

    @property
    def std(self) -> float:
        if len(self.trials) < 2:
            return 0.0
        return float(np.std(self.trials, ddof=1))

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_trial(graph: Graph, cfg: ExperimentConfig, mode: str, fraction: float, trial: int):
    """One independent split scored by every predictor.

    Returns ``{predictor: (auc, method, comparisons)}`` or an error string
    per predictor.
    """
    seed = mix_seed(cfg.base_seed, trial)
    try:
        if mode == MISSING:
            split = split_missing(graph, fraction, seed)
        else:
            split = add_spurious(graph, fraction, seed)
    except Exception as exc:  # recorded per cell, never aborts the run
        return {p: f"{type(exc).__name__}: {exc}" for p in cfg.predictors}
    sample_seed = mix_seed(seed, 0x5A3D1E)
    out = {}
    for p in cfg.predictors:
        try:
            d = auc_details(
                split, p, cfg.auc_method, cfg.sample_comparisons, sample_seed,
                pair_budget=cfg.pair_budget, eager_cap=cfg.eager_cap,
            )
            out[p] = (d.auc, d.method, d.comparisons)
        except Exception as exc:
            out[p] = f"{type(exc).__name__}: {exc}"
    return out


_WORKER_STATE: dict = {}


def _init_worker(graph: Graph, cfg: ExperimentConfig) -> None:
    _WORKER_STATE["graph"] = graph
    _WORKER_STATE["cfg"] = cfg


def _run_task(task: tuple[str, float, int]):
    mode, fraction, trial = task
    return _run_trial(_WORKER_STATE["graph"], _WORKER_STATE["cfg"], mode, fraction, trial)


def run_experiment(
    cfg: ExperimentConfig,
    graph: Graph | None = None,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> list[AucResult]:
    """Run every (predictor, mode, fraction) cell for ``cfg.trials`` trials.

    Trial ``t`` of every cell uses the seed ``mix_seed(base_seed, t)``, and
    all predictors share that split.  Results come back ordered by predictor,
    mode and fraction as listed in the config, independent of ``workers``.
    """
    if graph is None:
        graph = read_edge_list(cfg.dataset)
    tasks = [(mode, f, t) for mode in cfg.modes for f in cfg.fractions for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(graph, cfg)) as pool:
            outcomes = []
            for i, res in enumerate(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * workers)))):
                outcomes.append(res)
                if progress:
                    progress(i + 1, len(tasks))
    else:
        outcomes = []
        for i, (mode, f, t) in enumerate(tasks):
            outcomes.append(_run_trial(graph, cfg, mode, f, t))
            if progress:
                progress(i + 1, len(tasks))

    cells: dict[tuple, AucResult] = {}
    for p in cfg.predictors:
        for mode in cfg.modes:
            for f in cfg.fractions:
                cells[p, mode, f] = AucResult(p, mode, f)
    for (mode, f, _t), outcome in zip(tasks, outcomes):
        for p, value in outcome.items():
            cell = cells[p, mode, f]
            if cell.error is not None:
                continue
            if isinstance(value, str):
                cell.error = value
                cell.trials.clear()
                continue
            auc_value, method, comparisons = value
            cell.trials.append(auc_value)
            if cell.method and cell.method != method:
                cell.method = "mixed"
            elif not cell.method:
                cell.method = method
            cell.comparisons_per_trial = max(cell.comparisons_per_trial, comparisons)
    for cell in cells.values():
        if cell.error:
            log.warning("cell %s/%s/%s failed: %s", cell.predictor.value, cell.mode, cell.fraction, cell.error)
    return list(cells.values())


def write_results_csv(results: Iterable[AucResult], dataset: str, fh: io.TextIOBase) -> None:
    """CSV with full round-trip float precision; failed cells have blank AUCs."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for r in results:
        if r.ok:
            w.writerow([
                dataset, r.predictor.value, r.mode, repr(r.fraction), len(r.trials),
                repr(r.mean), repr(r.std), r.method, r.comparisons_per_trial,
            ])
        else:
            w.writerow([dataset, r.predictor.value, r.mode, repr(r.fraction), 0, "", "", "failed", 0])
