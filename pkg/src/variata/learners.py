"""In-house nuisance learners.

Two learners are available:

* :class:`TableLearner` - saturated frequency table (cell means) for fully
  categorical covariates. Exact on discrete data.
* :class:`BoostedTrees` - gradient-boosted depth-2 trees on histogram bins,
  squared loss for regression and logistic loss for classification, with
  early stopping on a held-out slice.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

__all__ = ["LearnerConfig", "TableLearner", "BoostedTrees", "make_learner", "ConstantModel"]


@dataclass(frozen=True)
class LearnerConfig:
    """Learner choice, boosting hyperparameters and clipping constants.

    Attributes
    ----------
    kind : {"table", "stumps"}
    rounds, learning_rate, ridge : boosting settings (``ridge`` is the L2
        penalty on leaf values).
    max_bins, min_leaf, val_fraction, patience : histogram and early-stop settings.
    clip_e : float
        Propensity clipping; predictions lie in [clip_e, 1 - clip_e].
    clip_mu : float
        Outcome-mean clipping on the log scales.
    max_levels : int
        Largest number of distinct values per column accepted by the table learner.
    """

    kind: str = "table"
    rounds: int = 200
    learning_rate: float = 0.1
    ridge: float = 1.0
    max_bins: int = 32
    min_leaf: int = 20
    val_fraction: float = 0.2
    patience: int = 50
    clip_e: float = 0.01
    clip_mu: float = 0.005
    max_levels: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("table", "stumps"):
            raise ValueError(f"unknown learner {self.kind!r}; use 'table' or 'stumps'")
        if not 0 < self.clip_e < 0.5:
            raise ValueError("clip_e must lie in (0, 0.5)")
        if not 0 < self.clip_mu < 0.5:
            raise ValueError("clip_mu must lie in (0, 0.5)")
        if self.rounds < 1 or self.learning_rate <= 0:
            raise ValueError("rounds must be >= 1 and learning_rate > 0")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class ConstantModel:
    def __init__(self, value):
        self.value = float(value)

    def predict(self, X):
        return np.full(np.asarray(X).shape[0], self.value)


# -- frequency table ------------------------------------------------------------

class _TableModel:
    def __init__(self, levels, radix, keys, means, fallback):
        self.levels = levels
        self.radix = radix
        self.keys = keys
        self.means = means
        self.fallback = fallback
        self.unseen = 0

    def _encode(self, X):
        n = X.shape[0]
        key = np.zeros(n, dtype=np.int64)
        valid = np.ones(n, dtype=bool)
        for j, lev in enumerate(self.levels):
            col = X[:, j]
            pos = np.searchsorted(lev, col)
            pos = np.minimum(pos, len(lev) - 1)
            valid &= lev[pos] == col
            key = key * self.radix[j] + pos
        return key, valid

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if not self.levels:
            return np.full(X.shape[0], self.means[0])
        key, valid = self._encode(X)
        pos = np.searchsorted(self.keys, key)
        pos = np.minimum(pos, len(self.keys) - 1)
        hit = valid & (self.keys[pos] == key)
        out = np.where(hit, self.means[pos], self.fallback)
        missed = int((~hit).sum())
        if missed:
            self.unseen += missed
            warnings.warn(
                f"frequency table: {missed} prediction rows fall in cells unseen in training; "
                "using the training mean", RuntimeWarning, stacklevel=2)
        return out


class TableLearner:
    """Cell-mean learner for categorical covariates."""

    def __init__(self, config: LearnerConfig | None = None):
        self.config = config or LearnerConfig()

    def fit(self, X, y, loss="squared"):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[1] == 0:
            return _TableModel([], [], np.zeros(1, dtype=np.int64), np.array([y.mean()]), y.mean())
        levels = []
        for j in range(X.shape[1]):
            lev = np.unique(X[:, j])
            if len(lev) > self.config.max_levels:
                raise ValueError(
                    f"frequency-table learner: column {j} has {len(lev)} distinct values "
                    f"(> {self.config.max_levels}); use the 'stumps' learner for continuous covariates")
            levels.append(lev)
        radix = [len(lev) for lev in levels]
        model = _TableModel(levels, radix, None, None, y.mean())
        key, _ = model._encode(X)
        keys, inv = np.unique(key, return_inverse=True)
        sums = np.bincount(inv, weights=y, minlength=len(keys))
        counts = np.bincount(inv, minlength=len(keys))
        model.keys = keys
        model.means = sums / counts
        return model


# -- boosted depth-2 trees ----------------------------------------------------------

class _TreeEnsemble:
    def __init__(self, edges, base, trees, lr):
        self.edges = edges
        self.base = base
        self.trees = trees  # rows: j0, t0, j1, t1, j2, t2, v_ll, v_lr, v_rl, v_rr
        self.lr = lr
        self.link = "identity"

    def raw(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        bins = _apply_bins(X, self.edges)
        return self.base + self.lr * _tree_sum(bins, self.trees)

    def predict(self, X):
        f = self.raw(X)
        return expit(f) if self.link == "logit" else f


def _make_edges(X, max_bins):
    edges = []
    qs = np.linspace(0, 1, max_bins + 1)[1:-1]
    for j in range(X.shape[1]):
        col = X[:, j]
        uniq = np.unique(col)
        if len(uniq) <= max_bins:
            e = (uniq[:-1] + uniq[1:]) / 2
        else:
            e = np.unique(np.quantile(col, qs))
        edges.append(e)
    return edges


def _apply_bins(X, edges):
    out = np.empty(X.shape, dtype=np.int32)
    for j, e in enumerate(edges):
        out[:, j] = np.searchsorted(e, X[:, j], side="right")
    return out


def _tree_sum(bins, trees):
    total = np.zeros(bins.shape[0])
    for j0, t0, j1, t1, j2, t2, a, b, c, d in trees:
        left = bins[:, int(j0)] <= t0
        total += np.where(left,
                          np.where(bins[:, int(j1)] <= t1, a, b),
                          np.where(bins[:, int(j2)] <= t2, c, d))
    return total


class BoostedTrees:
    """Gradient boosting with depth-2 trees on quantile bins."""

    def __init__(self, config: LearnerConfig | None = None):
        self.config = config or LearnerConfig(kind="stumps")

    def _best_split(self, G, H, C, width):
        """Best (feature, bin) from per-feature histograms of shape (d, width)."""
        cfg = self.config
        GL = np.cumsum(G, axis=1)[:, :-1]
        HL = np.cumsum(H, axis=1)[:, :-1]
        CL = np.cumsum(C, axis=1)[:, :-1]
        Gt, Ht, Ct = G[0].sum(), H[0].sum(), C[0].sum()
        GR, HR, CR = Gt - GL, Ht - HL, Ct - CL
        lam = cfg.ridge
        gain = GL**2 / (HL + lam) + GR**2 / (HR + lam) - Gt**2 / (Ht + lam)
        gain[(CL < cfg.min_leaf) | (CR < cfg.min_leaf)] = -np.inf
        if gain.size == 0:
            return None
        k = int(np.argmax(gain))
        if not np.isfinite(gain.flat[k]) or gain.flat[k] <= 1e-12:
            return None
        return divmod(k, gain.shape[1])

    def fit(self, X, y, loss="squared"):
        cfg = self.config
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        n, d = X.shape
        logistic = loss == "logistic"
        if logistic:
            m = np.clip(y.mean(), 1e-6, 1 - 1e-6)
            base = float(np.log(m / (1 - m)))
        else:
            base = float(y.mean())
        if d == 0 or n < 2 * cfg.min_leaf:
            model = _TreeEnsemble([np.empty(0)] * d, base, np.zeros((0, 10)), cfg.learning_rate)
            model.link = "logit" if logistic else "identity"
            return model
        rng = np.random.default_rng(cfg.seed)
        n_val = int(round(cfg.val_fraction * n)) if n >= 5 * cfg.min_leaf else 0
        perm = rng.permutation(n)
        val_idx, tr_idx = perm[:n_val], perm[n_val:]
        edges = _make_edges(X[tr_idx], cfg.max_bins)
        bins_all = _apply_bins(X, edges)
        btr, ytr = bins_all[tr_idx], y[tr_idx]
        bval, yval = bins_all[val_idx], y[val_idx]
        width = max(len(e) for e in edges) + 1
        flat = (btr + (np.arange(d) * width)[None, :]).astype(np.int64)
        nbin = d * width
        ntr = len(tr_idx)
        counts_root = np.bincount(flat.ravel(), minlength=nbin).reshape(d, width).astype(float)

        f_tr = np.full(ntr, base)
        f_val = np.full(n_val, base)
        trees = []
        curve = []
        best_loss, best_round, since = np.inf, 0, 0
        lr = cfg.learning_rate

        def hist(rows, g, h):
            fr = flat[rows]
            G = np.bincount(fr.ravel(), weights=np.repeat(g[rows], d), minlength=nbin).reshape(d, width)
            if h is None:
                C = np.bincount(fr.ravel(), minlength=nbin).reshape(d, width).astype(float)
                return G, C, C
            H = np.bincount(fr.ravel(), weights=np.repeat(h[rows], d), minlength=nbin).reshape(d, width)
            C = np.bincount(fr.ravel(), minlength=nbin).reshape(d, width).astype(float)
            return G, H, C

        for _ in range(cfg.rounds):
            if logistic:
                p = expit(f_tr)
                g = ytr - p
                h = p * (1 - p)
                G = np.bincount(flat.ravel(), weights=np.repeat(g, d), minlength=nbin).reshape(d, width)
                H = np.bincount(flat.ravel(), weights=np.repeat(h, d), minlength=nbin).reshape(d, width)
            else:
                g = ytr - f_tr
                h = None
                G = np.bincount(flat.ravel(), weights=np.repeat(g, d), minlength=nbin).reshape(d, width)
                H = counts_root
            root = self._best_split(G, H, counts_root, width)
            if root is None:
                break
            j0, t0 = root
            left = btr[:, j0] <= t0
            lrows = np.flatnonzero(left)
            rrows = np.flatnonzero(~left)
            GLh, HLh, CLh = hist(lrows, g, h)
            GRh, HRh, CRh = G - GLh, H - HLh, counts_root - CLh
            node = [j0, t0]
            leaf_vals = []
            leaf_of = np.empty(ntr, dtype=np.int8)
            for side, (Gs, Hs, Cs, rows) in enumerate(((GLh, HLh, CLh, lrows), (GRh, HRh, CRh, rrows))):
                sp = self._best_split(Gs, Hs, Cs, width)
                hs = np.ones(len(rows)) if h is None else h[rows]
                if sp is None:
                    jj, tt = 0, width  # everything goes left
                    sub = np.ones(len(rows), dtype=bool)
                else:
                    jj, tt = sp
                    sub = btr[rows, jj] <= tt
                node += [jj, tt]
                for mask in (sub, ~sub):
                    r = rows[mask]
                    hsum = hs[mask].sum()
                    leaf_vals.append(g[r].sum() / (hsum + cfg.ridge) if len(r) else 0.0)
                leaf_of[rows] = np.where(sub, 2 * side, 2 * side + 1)
            vals = np.asarray(leaf_vals)
            tree = np.array(node + leaf_vals, dtype=float)
            f_tr += lr * vals[leaf_of]
            trees.append(tree)
            if n_val:
                f_val += lr * _tree_sum(bval, tree[None, :])
                if logistic:
                    pv = np.clip(expit(f_val), 1e-12, 1 - 1e-12)
                    vloss = -np.mean(yval * np.log(pv) + (1 - yval) * np.log(1 - pv))
                else:
                    vloss = np.mean((yval - f_val) ** 2)
                curve.append(float(vloss))
                if vloss < best_loss - 1e-12:
                    best_loss, best_round, since = vloss, len(trees), 0
                else:
                    since += 1
                    if since >= cfg.patience:
                        break
            else:
                best_round = len(trees)
        trees = np.asarray(trees[:best_round]).reshape(-1, 10)
        model = _TreeEnsemble(edges, base, trees, lr)
        model.link = "logit" if logistic else "identity"
        model.val_curve = curve
        return model


def make_learner(config: LearnerConfig):
    return TableLearner(config) if config.kind == "table" else BoostedTrees(config)
