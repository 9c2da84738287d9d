"""IRIS ingestion, ternary feature coding, MLP training, GA discretization.

The pipeline runs in three stages: a real-valued 4-4-3 sigmoid MLP is
trained with plain gradient descent on MSE loss; features are coded to
{0,1,2} with per-feature equal-frequency tertiles fitted on the
training partition; and a genetic algorithm searches one scale factor
plus one threshold per neuron so that clamp(round(s*w), -2, 2) yields
an integer-weight network whose discrete accuracy is maximal.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .snn import DEFAULT_THRESHOLD_SET, LayerSpec, NetworkSpec

log = logging.getLogger("fluxon.train")

CLASS_NAMES = ("Iris-setosa", "Iris-versicolor", "Iris-virginica")
_CLASS_INDEX = {name.lower(): i for i, name in enumerate(CLASS_NAMES)}


class DataError(ValueError):
    pass


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Sample:
    features: tuple[float, float, float, float]
    label: int


def load_iris(csv_text: str) -> list[Sample]:
    """Parse UCI-format rows `5.1,3.5,1.4,0.2,Iris-setosa`."""
    samples: list[Sample] = []
    for lineno, raw in enumerate(csv_text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise DataError(f"line {lineno}: expected 5 fields, got {len(parts)}")
        try:
            feats = tuple(float(p) for p in parts[:4])
        except ValueError as exc:
            raise DataError(f"line {lineno}: bad feature value ({exc})") from None
        name = parts[4].strip().lower()
        if name not in _CLASS_INDEX:
            raise DataError(f"line {lineno}: unknown class name {parts[4]!r}")
        samples.append(Sample(feats, _CLASS_INDEX[name]))
    return samples


def split_dataset(
    samples: Sequence[Sample],
    train_fraction: float,
    seed: int,
    stratified: bool = True,
) -> tuple[list[Sample], list[Sample]]:
    """Deterministic train/test split; stratified keeps per-class ratios."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0,1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train: list[Sample] = []
    test: list[Sample] = []
    if stratified:
        labels = sorted({s.label for s in samples})
        for lab in labels:
            group = [s for s in samples if s.label == lab]
            order = rng.permutation(len(group))
            n_train = round(len(group) * train_fraction)
            if n_train == 0 or n_train == len(group):
                raise ValueError(
                    f"fraction {train_fraction} empties one side of class {lab}"
                )
            train.extend(group[i] for i in order[:n_train])
            test.extend(group[i] for i in order[n_train:])
    else:
        order = rng.permutation(len(samples))
        n_train = round(len(samples) * train_fraction)
        train = [samples[i] for i in order[:n_train]]
        test = [samples[i] for i in order[n_train:]]
    return train, test


# --- feature quantization ------------------------------------------------


@dataclass(frozen=True)
class FeatureQuantizer:
    """Per-feature tertile cut points mapping reals onto {0,1,2}."""

    cuts: np.ndarray  # shape (n_features, 2)

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        lo = self.cuts[:, 0][None, :]
        hi = self.cuts[:, 1][None, :]
        return ((X >= lo).astype(int) + (X >= hi).astype(int))

    def to_json(self) -> str:
        return json.dumps({"cuts": self.cuts.tolist()}, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "FeatureQuantizer":
        return FeatureQuantizer(np.asarray(json.loads(text)["cuts"], dtype=float))


def quantize_features(train_samples: Sequence[Sample]) -> tuple[FeatureQuantizer, np.ndarray]:
    """Fit equal-frequency tertiles on the training set and code it.

    A degenerate (constant) feature collapses both cuts and maps to a
    constant code; that case is logged as a warning rather than raised.
    """
    if not train_samples:
        raise ValueError("empty training set")
    X = np.asarray([s.features for s in train_samples], dtype=float)
    cuts = np.column_stack(
        [np.percentile(X, 100.0 / 3.0, axis=0), np.percentile(X, 200.0 / 3.0, axis=0)]
    )
    for j in range(X.shape[1]):
        if cuts[j, 0] == cuts[j, 1]:
            log.warning("feature %d is degenerate: both tertile cuts equal %.4g", j, cuts[j, 0])
    q = FeatureQuantizer(cuts)
    return q, q.apply(X)


def labels_of(samples: Sequence[Sample]) -> np.ndarray:
    return np.asarray([s.label for s in samples], dtype=int)


def features_of(samples: Sequence[Sample]) -> np.ndarray:
    return np.asarray([s.features for s in samples], dtype=float)


# --- real-valued MLP -----------------------------------------------------


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class RealMlp:
    """Sigmoid MLP; weights row-per-neuron, one hidden layer."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @staticmethod
    def init(n_in: int, n_hidden: int, n_out: int, seed: int) -> "RealMlp":
        rng = np.random.default_rng(seed)
        return RealMlp(
            w1=rng.uniform(-1.0, 1.0, size=(n_hidden, n_in)),
            b1=rng.uniform(-1.0, 1.0, size=n_hidden),
            w2=rng.uniform(-1.0, 1.0, size=(n_out, n_hidden)),
            b2=rng.uniform(-1.0, 1.0, size=n_out),
        )

    def forward(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        H = _sigmoid(X @ self.w1.T + self.b1)
        O = _sigmoid(H @ self.w2.T + self.b2)
        return H, O

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.forward(np.atleast_2d(X))[1]

    def to_json(self) -> str:
        doc = {
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2.tolist(),
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "RealMlp":
        doc = json.loads(text)
        return RealMlp(*(np.asarray(doc[k], dtype=float) for k in ("w1", "b1", "w2", "b2")))


def mlp_loss(mlp: RealMlp, X: np.ndarray, T: np.ndarray) -> float:
    _, O = mlp.forward(X)
    return 0.5 * float(np.mean((O - T) ** 2))


def mlp_gradients(mlp: RealMlp, X: np.ndarray, T: np.ndarray) -> dict[str, np.ndarray]:
    """Analytic full-batch gradients of mlp_loss."""
    H, O = mlp.forward(X)
    n = O.size
    d_o = (O - T) / n * O * (1.0 - O)
    d_h = (d_o @ mlp.w2) * H * (1.0 - H)
    return {
        "w2": d_o.T @ H,
        "b2": d_o.sum(axis=0),
        "w1": d_h.T @ X,
        "b1": d_h.sum(axis=0),
    }


def one_hot(labels: Sequence[int], n_classes: int) -> np.ndarray:
    T = np.zeros((len(labels), n_classes))
    T[np.arange(len(labels)), list(labels)] = 1.0
    return T


def train_mlp(
    X: np.ndarray,
    T: np.ndarray,
    *,
    epochs: int,
    learning_rate: float,
    seed: int,
    n_hidden: int = 4,
    train_biases: bool = True,
) -> tuple[RealMlp, list[float]]:
    """Full-batch gradient descent; returns the net and the loss per epoch.

    The returned loss list has epochs+1 entries (initial loss first).
    Aborts on a non-finite loss. With train_biases=False the biases are
    pinned at zero, which keeps the learned function expressible by the
    integer-weight hardware decode (positive pulse-count thresholds
    cannot absorb arbitrary bias terms).
    """
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    mlp = RealMlp.init(X.shape[1], n_hidden, T.shape[1], seed)
    if not train_biases:
        mlp.b1[:] = 0.0
        mlp.b2[:] = 0.0
    losses = [mlp_loss(mlp, X, T)]
    for epoch in range(epochs):
        grads = mlp_gradients(mlp, X, T)
        mlp.w1 -= learning_rate * grads["w1"]
        mlp.w2 -= learning_rate * grads["w2"]
        if train_biases:
            mlp.b1 -= learning_rate * grads["b1"]
            mlp.b2 -= learning_rate * grads["b2"]
        loss = mlp_loss(mlp, X, T)
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss {loss} at epoch {epoch + 1}")
        losses.append(loss)
    return mlp, losses


# --- genetic discretization ----------------------------------------------


@dataclass(frozen=True)
class GaConfig:
    population: int = 100
    generations: int = 200
    mutation_rate: float = 0.15
    crossover_rate: float = 0.7
    elitism: int = 2
    seed: int = 0
    threshold_set: tuple[int, ...] = DEFAULT_THRESHOLD_SET
    weight_range: tuple[int, int] = (-2, 2)
    scale_bounds: tuple[float, float] = (0.05, 20.0)

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        for r in (self.mutation_rate, self.crossover_rate):
            if not 0.0 <= r <= 1.0:
                raise ValueError("rates must lie in [0,1]")


def _decode(
    mlp: RealMlp, scales: np.ndarray, thresholds: np.ndarray, cfg: GaConfig
) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = cfg.weight_range
    n_hidden = mlp.w1.shape[0]
    w1 = np.clip(np.round(scales[:n_hidden, None] * mlp.w1), lo, hi).astype(int)
    w2 = np.clip(np.round(scales[n_hidden:, None] * mlp.w2), lo, hi).astype(int)
    return w1, w2


def _batch_fitness(
    w1: np.ndarray,
    th1: np.ndarray,
    w2: np.ndarray,
    th2: np.ndarray,
    Xq: np.ndarray,
    labels: np.ndarray,
) -> tuple[float, int, int]:
    """(accuracy, nonzero weight count, sum |w|) for tie-breaking."""
    H = (Xq @ w1.T >= th1).astype(int)
    O = (H @ w2.T >= th2).astype(int)
    want = np.zeros_like(O)
    want[np.arange(len(labels)), labels] = 1
    acc = float(np.mean(np.all(O == want, axis=1)))
    nz = int(np.count_nonzero(w1) + np.count_nonzero(w2))
    mass = int(np.abs(w1).sum() + np.abs(w2).sum())
    return acc, nz, mass


def _fitness_key(f: tuple[float, int, int]) -> tuple[float, int, int]:
    acc, nz, mass = f
    return (acc, -nz, -mass)


def ga_discretize(
    mlp: RealMlp,
    Xq: np.ndarray,
    labels: Sequence[int],
    cfg: GaConfig,
) -> tuple[NetworkSpec, list[tuple[int, float, float]]]:
    """Search per-neuron scales and thresholds for the best discrete net.

    Chromosome: one scale in scale_bounds (log-uniform init) and one
    threshold from threshold_set per neuron. Tournament selection
    (k=3), uniform crossover, Gaussian log-space mutation on scales,
    random-reset mutation on thresholds, plus elitism. Returns the
    best NetworkSpec and the (generation, best, mean) accuracy trace.
    """
    Xq = np.asarray(Xq, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if len(Xq) == 0:
        raise ValueError("empty training data")
    rng = np.random.default_rng(cfg.seed)
    n_neurons = mlp.w1.shape[0] + mlp.w2.shape[0]
    thr_set = np.asarray(cfg.threshold_set, dtype=int)
    s_lo, s_hi = cfg.scale_bounds

    scales = np.exp(rng.uniform(math.log(s_lo), math.log(s_hi), size=(cfg.population, n_neurons)))
    thresholds = rng.choice(thr_set, size=(cfg.population, n_neurons))
    # Identity-scale candidates with uniform thresholds: if the MLP's
    # weights are already integers in range, generation 0 contains the
    # undistorted network for each available threshold.
    for i, t in enumerate(thr_set[: cfg.population]):
        scales[i] = 1.0
        thresholds[i] = t

    def evaluate(sc, th):
        w1, w2 = _decode(mlp, sc, th, cfg)
        nh = mlp.w1.shape[0]
        return _batch_fitness(w1, th[:nh], w2, th[nh:], Xq, labels)

    fits = [evaluate(scales[i], thresholds[i]) for i in range(cfg.population)]
    best_i = max(range(cfg.population), key=lambda i: _fitness_key(fits[i]))
    best = (scales[best_i].copy(), thresholds[best_i].copy(), fits[best_i])
    trace = [(0, best[2][0], float(np.mean([f[0] for f in fits])))]

    for gen in range(1, cfg.generations + 1):
        order = sorted(range(cfg.population), key=lambda i: _fitness_key(fits[i]), reverse=True)
        new_s = [scales[i].copy() for i in order[: cfg.elitism]]
        new_t = [thresholds[i].copy() for i in order[: cfg.elitism]]

        def tournament():
            cand = rng.integers(0, cfg.population, size=3)
            return max(cand, key=lambda i: _fitness_key(fits[i]))

        while len(new_s) < cfg.population:
            pa, pb = tournament(), tournament()
            sa, ta = scales[pa].copy(), thresholds[pa].copy()
            if rng.random() < cfg.crossover_rate:
                mask = rng.random(n_neurons) < 0.5
                sa[mask] = scales[pb][mask]
                ta[mask] = thresholds[pb][mask]
            mut = rng.random(n_neurons) < cfg.mutation_rate
            if mut.any():
                sa[mut] = np.clip(sa[mut] * np.exp(rng.normal(0.0, 0.35, mut.sum())), s_lo, s_hi)
            mut_t = rng.random(n_neurons) < cfg.mutation_rate
            if mut_t.any():
                ta[mut_t] = rng.choice(thr_set, size=mut_t.sum())
            new_s.append(sa)
            new_t.append(ta)

        scales = np.asarray(new_s)
        thresholds = np.asarray(new_t)
        fits = [evaluate(scales[i], thresholds[i]) for i in range(cfg.population)]
        gen_best = max(range(cfg.population), key=lambda i: _fitness_key(fits[i]))
        if _fitness_key(fits[gen_best]) > _fitness_key(best[2]):
            best = (scales[gen_best].copy(), thresholds[gen_best].copy(), fits[gen_best])
        trace.append((gen, best[2][0], float(np.mean([f[0] for f in fits]))))

    w1, w2 = _decode(mlp, best[0], best[1], cfg)
    nh = mlp.w1.shape[0]
    spec = NetworkSpec(
        input_dim=mlp.w1.shape[1],
        layers=(
            LayerSpec(w1, tuple(int(t) for t in best[1][:nh]), "SM4"),
            LayerSpec(w2, tuple(int(t) for t in best[1][nh:]), "SM2"),
        ),
        threshold_set=cfg.threshold_set,
    )
    return spec, trace


def find_echo_split(
    samples: Sequence[Sample],
    *,
    n_unique: int = 12,
    train_fraction: float = 0.8,
    max_seed: int = 10_000,
) -> int | None:
    """Scan split seeds until the quantized test partition has n_unique vectors."""
    for seed in range(max_seed):
        train, test = split_dataset(samples, train_fraction, seed)
        q, _ = quantize_features(train)
        codes = q.apply(features_of(test))
        if len({tuple(row) for row in codes}) == n_unique:
            return seed
    return None
