"""Boosted ensembles: SAMME stumps and a second-order gradient-boosted
tree engine with level-wise, leaf-wise and symmetric growth presets."""

import heapq
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..dataio import Dataset
from ..errors import DataWarning, ParameterError
from .base import FittedModel, PROB, register
from .trees import Tree, grow_classification_tree


# ---------------------------------------------------------------------------
# AdaBoost (depth-1 stumps, SAMME weighting)


@dataclass
class AdaBoostParams:
    stumps: list
    alphas: list

    def margin(self, X):
        total = np.zeros(X.shape[0])
        for stump, alpha in zip(self.stumps, self.alphas):
            h = np.where(stump.scores(X) >= 0.5, 1.0, -1.0)
            total += alpha * h
        return total

    def score_matrix(self, X):
        total = self.margin(X)
        norm = sum(self.alphas)
        return 0.5 * (total / norm + 1.0) if norm > 0 else np.full(X.shape[0], 0.5)

    def to_state(self):
        return {"stumps": [s.to_state() for s in self.stumps],
                "alphas": list(self.alphas)}

    @classmethod
    def from_state(cls, state):
        return cls(stumps=[Tree.from_state(s) for s in state["stumps"]],
                   alphas=[float(a) for a in state["alphas"]])


def fit_adaboost(train: Dataset, n_rounds: int = 50, seed: int = 0) -> FittedModel:
    """Adaptive boosting of depth-1 stumps.

    Round weight alpha = ln((1 - err) / err); stops early on a perfect
    stump or one that cannot beat chance. Weights renormalize each round.
    """
    if n_rounds < 1:
        raise ParameterError("n_rounds must be positive")
    X, y = train.X, train.y.astype(np.float64)
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    stumps, alphas = [], []
    for round_idx in range(n_rounds):
        stump = grow_classification_tree(X, y, w=w, max_depth=1)
        pred = (stump.scores(X) >= 0.5).astype(np.float64)
        err = float(w[pred != y].sum())
        if err >= 0.5:
            if not stumps:
                warnings.warn("weak learner no better than chance on round 1; "
                              "keeping the single stump", DataWarning)
                stumps.append(stump)
                alphas.append(1.0)
            break
        if err == 0.0:
            stumps.append(stump)
            alphas.append(1.0)
            break
        alpha = np.log((1.0 - err) / err)
        stumps.append(stump)
        alphas.append(alpha)
        w = w * np.exp(alpha * (pred != y))
        w /= w.sum()
    return FittedModel(
        algorithm="adaboost",
        feature_names=train.feature_names,
        hyperparameters={"n_rounds": n_rounds, "seed": seed},
        params=AdaBoostParams(stumps=stumps, alphas=alphas),
        kind=PROB,
    )


# ---------------------------------------------------------------------------
# Newton boosting on logistic loss


@dataclass(frozen=True)
class BoostConfig:
    n_rounds: int = 100
    learning_rate: float = 0.1
    growth: str = "level-wise"      # "level-wise" | "leaf-wise"
    max_depth: int = 6
    max_leaves: int = 31
    l2_reg: float = 1.0
    min_child_weight: float = 1.0
    symmetric: bool = False         # oblivious trees (one split per level)
    handle_missing: bool = False

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ParameterError("n_rounds must be positive")
        if self.learning_rate < 0:
            raise ParameterError("learning_rate must be nonnegative")
        if self.growth not in ("level-wise", "leaf-wise"):
            raise ParameterError(f"unknown growth mode {self.growth!r}")
        if self.l2_reg < 0:
            raise ParameterError("l2_reg must be nonnegative")


PRESETS = {
    "xgboost-like": BoostConfig(growth="level-wise", max_depth=6),
    "lightgbm-like": BoostConfig(growth="leaf-wise", max_leaves=31, max_depth=32),
    "catboost-like": BoostConfig(growth="level-wise", max_depth=6, symmetric=True),
}


def _leaf_value(G, H, l2):
    return -G / (H + l2)


def _gain(GL, HL, GR, HR, l2):
    G, H = GL + GR, HL + HR
    return 0.5 * (GL ** 2 / (HL + l2) + GR ** 2 / (HR + l2) - G ** 2 / (H + l2))


def _best_newton_split(x, g, h, l2, min_child_weight, handle_missing):
    """Best (gain, threshold, default_left) for one feature of one node."""
    if handle_missing:
        miss = np.isnan(x)
        gm, hm = g[miss].sum(), h[miss].sum()
        x, g, h = x[~miss], g[~miss], h[~miss]
    else:
        gm = hm = 0.0
    if x.size < 2:
        return None
    order = np.argsort(x, kind="stable")
    xs, gs, hs = x[order], g[order], h[order]
    G, H = gs.sum() + gm, hs.sum() + hm
    cg = np.cumsum(gs)[:-1]
    ch = np.cumsum(hs)[:-1]
    valid = xs[1:] != xs[:-1]
    if not valid.any():
        return None
    best = None
    # Missing values go with the side that yields the larger gain.
    for default_left in ((True, False) if (handle_missing and (gm or hm)) else (True,)):
        GL = cg + (gm if default_left else 0.0)
        HL = ch + (hm if default_left else 0.0)
        GR, HR = G - GL, H - HL
        gains = _gain(GL, HL, GR, HR, l2)
        ok = valid & (HL >= min_child_weight) & (HR >= min_child_weight)
        gains = np.where(ok, gains, -np.inf)
        p = int(np.argmax(gains))
        if np.isfinite(gains[p]) and (best is None or gains[p] > best[0]):
            best = (float(gains[p]), float((xs[p] + xs[p + 1]) / 2.0), default_left)
    return best


class _NewtonTreeBuilder:
    def __init__(self, X, g, h, cfg: BoostConfig):
        self.X, self.g, self.h, self.cfg = X, g, h, cfg
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []
        self.default_left = []

    def new_node(self, idx):
        G, H = self.g[idx].sum(), self.h[idx].sum()
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(_leaf_value(G, H, self.cfg.l2_reg))
        self.default_left.append(True)
        return len(self.feature) - 1

    def best_split(self, idx):
        best = None
        for j in range(self.X.shape[1]):
            s = _best_newton_split(self.X[idx, j], self.g[idx], self.h[idx],
                                   self.cfg.l2_reg, self.cfg.min_child_weight,
                                   self.cfg.handle_missing)
            if s is not None and s[0] > 0 and (best is None or s[0] > best[0]):
                best = (s[0], j, s[1], s[2])
        return best

    def apply_split(self, node, idx, j, thr, default_left):
        x = self.X[idx, j]
        go_left = x <= thr
        if self.cfg.handle_missing:
            go_left = np.where(np.isnan(x), default_left, go_left)
        li, ri = idx[go_left], idx[~go_left]
        l, r = self.new_node(li), self.new_node(ri)
        self.feature[node] = j
        self.threshold[node] = thr
        self.left[node] = l
        self.right[node] = r
        self.default_left[node] = bool(default_left)
        return l, li, r, ri

    def finish(self) -> Tree:
        return Tree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            value=np.array(self.value, dtype=np.float64),
            default_left=np.array(self.default_left, dtype=bool),
        )


def _grow_level_wise(X, g, h, cfg):
    b = _NewtonTreeBuilder(X, g, h, cfg)
    frontier = [(b.new_node(np.arange(X.shape[0])), np.arange(X.shape[0]))]
    for _ in range(cfg.max_depth):
        nxt = []
        for node, idx in frontier:
            best = b.best_split(idx)
            if best is None:
                continue
            _, j, thr, dl = best
            l, li, r, ri = b.apply_split(node, idx, j, thr, dl)
            nxt.append((l, li))
            nxt.append((r, ri))
        if not nxt:
            break
        frontier = nxt
    return b.finish()


def _grow_leaf_wise(X, g, h, cfg):
    b = _NewtonTreeBuilder(X, g, h, cfg)
    root = b.new_node(np.arange(X.shape[0]))
    heap = []
    counter = 0

    def push(node, idx, depth):
        nonlocal counter
        if depth >= cfg.max_depth:
            return
        best = b.best_split(idx)
        if best is not None:
            heapq.heappush(heap, (-best[0], counter, node, idx, depth, best))
            counter += 1

    push(root, np.arange(X.shape[0]), 0)
    n_leaves = 1
    while heap and n_leaves < cfg.max_leaves:
        _, _, node, idx, depth, best = heapq.heappop(heap)
        _, j, thr, dl = best
        l, li, r, ri = b.apply_split(node, idx, j, thr, dl)
        n_leaves += 1
        push(l, li, depth + 1)
        push(r, ri, depth + 1)
    return b.finish()


def _quantile_borders(x, max_borders=254):
    finite = x[~np.isnan(x)]
    vals = np.unique(finite)
    if vals.size < 2:
        return np.empty(0)
    mids = (vals[1:] + vals[:-1]) / 2.0
    if mids.size <= max_borders:
        return mids
    qs = np.quantile(finite, np.linspace(0, 1, max_borders + 2)[1:-1])
    return np.unique(qs)


def _grow_oblivious(X, g, h, cfg, borders):
    b = _NewtonTreeBuilder(X, g, h, cfg)
    leaves = [(b.new_node(np.arange(X.shape[0])), np.arange(X.shape[0]))]
    for _ in range(cfg.max_depth):
        best = None  # (total_gain, feature, threshold)
        for j in range(X.shape[1]):
            cand = borders[j]
            if cand.size == 0:
                continue
            total = np.zeros(cand.size)
            usable = np.zeros(cand.size, dtype=bool)
            for _, idx in leaves:
                x = X[idx, j]
                order = np.argsort(x, kind="stable")
                xs = x[order]
                cg = np.concatenate([[0.0], np.cumsum(g[idx][order])])
                ch = np.concatenate([[0.0], np.cumsum(h[idx][order])])
                pos = np.searchsorted(xs, cand, side="right")
                GL, HL = cg[pos], ch[pos]
                GR, HR = cg[-1] - GL, ch[-1] - HL
                ok = (HL >= cfg.min_child_weight) & (HR >= cfg.min_child_weight)
                gains = np.where(ok, _gain(GL, HL, GR, HR, cfg.l2_reg), 0.0)
                total += gains
                usable |= ok
            total = np.where(usable, total, -np.inf)
            p = int(np.argmax(total))
            if np.isfinite(total[p]) and total[p] > 0 and (best is None or total[p] > best[0]):
                best = (float(total[p]), j, float(cand[p]))
        if best is None:
            break
        _, j, thr = best
        nxt = []
        for node, idx in leaves:
            l, li, r, ri = b.apply_split(node, idx, j, thr, True)
            # Empty children keep the parent's value so stray rows are no-ops.
            if li.size == 0:
                b.value[l] = b.value[node]
            if ri.size == 0:
                b.value[r] = b.value[node]
            nxt.append((l, li))
            nxt.append((r, ri))
        leaves = nxt
    return b.finish()


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class GbdtParams:
    base_score: float
    learning_rate: float
    trees: list
    loss_trace: list = field(default_factory=list)

    def raw_margin(self, X):
        F = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            F += self.learning_rate * tree.scores(X)
        return F

    def score_matrix(self, X):
        return _sigmoid(self.raw_margin(X))

    def to_state(self):
        return {"base_score": self.base_score,
                "learning_rate": self.learning_rate,
                "trees": [t.to_state() for t in self.trees],
                "loss_trace": [float(v) for v in self.loss_trace]}

    @classmethod
    def from_state(cls, state):
        return cls(base_score=float(state["base_score"]),
                   learning_rate=float(state["learning_rate"]),
                   trees=[Tree.from_state(t) for t in state["trees"]],
                   loss_trace=list(state["loss_trace"]))


def _logloss(y, p):
    eps = 1e-12
    p = np.clip(p, eps, 1 - eps)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def fit_gbdt(train: Dataset, cfg: BoostConfig = None,
             preset: str = "xgboost-like") -> FittedModel:
    """Newton boosting on logistic loss.

    Per-leaf value is -sum(g)/(sum(h) + l2) with g, h the first and second
    loss derivatives. Presets choose the growth strategy: level-wise
    (xgboost-like), best-first leaf-wise (lightgbm-like), or level-wise
    symmetric/oblivious trees (catboost-like).
    """
    if cfg is None:
        if preset not in PRESETS:
            raise ParameterError(f"unknown preset {preset!r}")
        cfg = PRESETS[preset]
    X, y = train.X, train.y.astype(np.float64)
    pbar = float(np.clip(y.mean(), 1e-12, 1 - 1e-12))
    base = float(np.log(pbar / (1.0 - pbar)))
    F = np.full(X.shape[0], base)
    trees, trace = [], []
    borders = None
    if cfg.symmetric:
        borders = [_quantile_borders(X[:, j]) for j in range(X.shape[1])]
    for _ in range(cfg.n_rounds):
        p = _sigmoid(F)
        g = p - y
        h = np.maximum(p * (1.0 - p), 1e-16)
        if cfg.symmetric:
            tree = _grow_oblivious(X, g, h, cfg, borders)
        elif cfg.growth == "leaf-wise":
            tree = _grow_leaf_wise(X, g, h, cfg)
        else:
            tree = _grow_level_wise(X, g, h, cfg)
        trees.append(tree)
        F = F + cfg.learning_rate * tree.scores(X)
        trace.append(_logloss(y, _sigmoid(F)))
    return FittedModel(
        algorithm="gbdt",
        feature_names=train.feature_names,
        hyperparameters={"preset": preset, **cfg.__dict__},
        params=GbdtParams(base_score=base, learning_rate=cfg.learning_rate,
                          trees=trees, loss_trace=trace),
        kind=PROB,
    )


register("adaboost", AdaBoostParams)
register("gbdt", GbdtParams)
