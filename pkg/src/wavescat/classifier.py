"""Pooled linear detection head trained with binary cross-entropy.

Architecture: mean-pool the feature sequence, optionally pass each branch
through a trained linear projection (the fusion strategies demand width
144), then a single affine map and a sigmoid produce p_hat = P(fake).
Optimization is plain full-batch gradient descent so the analytic
gradient can be checked against central finite differences exactly;
the returned parameters are those of the epoch with the lowest dev EER.
"""

import base64
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DivergenceError, TrainingError
from .metrics import ScoreSet, eer

PROJECTION_WIDTH = 144


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-4
    epochs: int = 100
    batch_size: int = 0  # 0 = full batch; the only mode implemented
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise TrainingError("learning_rate must be > 0")
        if self.epochs < 1:
            raise TrainingError("epochs must be >= 1")


@dataclass
class LinearHead:
    """Trained parameters: optional per-branch projections plus classifier.

    `projections` maps branch name -> (W, b) with W of shape
    (branch_dim, 144); `weights`/`bias` act on the concatenated projected
    vector (or directly on the pooled features when there are no
    projections). Standardization learned from the training set is folded
    into the affine parameters, so scoring is a pure affine-plus-sigmoid.
    """

    branches: tuple
    projections: dict
    weights: np.ndarray
    bias: float
    trained: bool = False
    dev_eer_history: list = field(default_factory=list)

    @property
    def feature_width(self):
        return len(self.weights)

    def save(self, path):
        def enc(a):
            a = np.ascontiguousarray(a, dtype="<f8")
            return {"shape": list(a.shape),
                    "data": base64.b64encode(a.tobytes()).decode("ascii")}

        doc = {
            "branches": list(self.branches),
            "projections": {k: {"W": enc(w), "b": enc(b)}
                            for k, (w, b) in self.projections.items()},
            "weights": enc(self.weights),
            "bias": self.bias,
            "trained": self.trained,
            "dev_eer_history": self.dev_eer_history,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        def dec(d):
            arr = np.frombuffer(base64.b64decode(d["data"]), dtype="<f8")
            return arr.reshape(d["shape"]).copy()

        with open(path) as fh:
            doc = json.load(fh)
        projections = {k: (dec(v["W"]), dec(v["b"]))
                       for k, v in doc["projections"].items()}
        return cls(branches=tuple(doc["branches"]), projections=projections,
                   weights=dec(doc["weights"]), bias=float(doc["bias"]),
                   trained=doc["trained"],
                   dev_eer_history=list(doc["dev_eer_history"]))


def _sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def pool_features(features):
    """Mean over the sequence axis of one example's feature matrix."""
    values = getattr(features, "values", features)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        return values
    if values.ndim != 2:
        raise ContractError(f"expected a sequence x width matrix, got {values.shape}")
    return values.mean(axis=0)


def _pool_all(feature_list):
    return np.vstack([pool_features(f) for f in feature_list])


def _labels_to_array(labels):
    arr = np.asarray(labels)
    if arr.dtype.kind in "US":
        arr = np.array([1 if str(v) == "fake" else 0 for v in labels])
    return arr.astype(float)


class _JointModel:
    """Flattened-parameter view of (projections, classifier) for GD.

    branch_dims: dict name -> input width; projected branches contribute
    PROJECTION_WIDTH columns each to the classifier input.
    """

    def __init__(self, branch_dims, project):
        self.branch_dims = dict(branch_dims)
        self.project = project
        self.names = list(branch_dims)
        if project:
            self.clf_width = PROJECTION_WIDTH * len(self.names)
        else:
            self.clf_width = sum(branch_dims.values())

    def init_params(self, seed):
        """Identity embedding for branches that fit inside the projection
        width (lossless start), seeded Gaussian otherwise; classifier
        weights start at zero."""
        rng = np.random.default_rng(seed)
        parts = []
        if self.project:
            for name in self.names:
                d = self.branch_dims[name]
                if d <= PROJECTION_WIDTH:
                    w = np.zeros((d, PROJECTION_WIDTH))
                    w[:, :d] = np.eye(d)
                else:
                    w = rng.standard_normal((d, PROJECTION_WIDTH)) / np.sqrt(d)
                parts.append(w.ravel())
                parts.append(np.zeros(PROJECTION_WIDTH))
        parts.append(np.zeros(self.clf_width + 1))
        return np.concatenate(parts)

    def unpack(self, params):
        pos = 0
        proj = {}
        if self.project:
            for name in self.names:
                d = self.branch_dims[name]
                w = params[pos:pos + d * PROJECTION_WIDTH].reshape(d, PROJECTION_WIDTH)
                pos += d * PROJECTION_WIDTH
                b = params[pos:pos + PROJECTION_WIDTH]
                pos += PROJECTION_WIDTH
                proj[name] = (w, b)
        w_clf = params[pos:pos + self.clf_width]
        b_clf = params[pos + self.clf_width]
        return proj, w_clf, b_clf

    def logits(self, params, branches):
        proj, w_clf, b_clf = self.unpack(params)
        if self.project:
            cols = [branches[name] @ proj[name][0] + proj[name][1]
                    for name in self.names]
            z = np.hstack(cols)
        else:
            z = np.hstack([branches[name] for name in self.names])
        return z @ w_clf + b_clf

    def loss_and_grad(self, params, branches, y):
        """Mean binary cross-entropy and its exact gradient."""
        proj, w_clf, b_clf = self.unpack(params)
        n = len(y)
        if self.project:
            cols = [branches[name] @ proj[name][0] + proj[name][1]
                    for name in self.names]
            z = np.hstack(cols)
        else:
            z = np.hstack([branches[name] for name in self.names])
        logit = z @ w_clf + b_clf
        p = _sigmoid(logit)
        eps = 1e-12
        loss = -np.mean(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps))
        dlogit = (p - y) / n
        grads = []
        if self.project:
            for i, name in enumerate(self.names):
                w_i = w_clf[i * PROJECTION_WIDTH:(i + 1) * PROJECTION_WIDTH]
                dcol = np.outer(dlogit, w_i)
                grads.append((branches[name].T @ dcol).ravel())
                grads.append(dcol.sum(axis=0))
        grads.append(z.T @ dlogit)
        grads.append(np.array([dlogit.sum()]))
        return loss, np.concatenate(grads)


def _standardize_fit(branches):
    """Per-branch z-scoring statistics.

    The variance floor is relative to the branch's largest deviation so
    numerically dead features (e.g. scattering paths whose band carries
    no envelope energy) stay negligible instead of being amplified to
    unit scale.
    """
    stats = {}
    for name, x in branches.items():
        mu = x.mean(axis=0)
        sd = x.std(axis=0)
        floor = max(1e-6 * float(sd.max(initial=0.0)), 1e-12)
        sd = np.maximum(sd, floor)
        stats[name] = (mu, sd)
    return stats


def _standardize_apply(branches, stats):
    return {name: (x - stats[name][0]) / stats[name][1]
            for name, x in branches.items()}


def fit_branches(branches, labels, cfg, dev_branches=None, dev_labels=None,
                 project=False):
    """Core trainer over named branch matrices (n_examples x dim each).

    Standardizes per branch on the training statistics, runs full-batch
    gradient descent on the mean BCE, tracks dev EER every epoch and
    returns the head snapshot from the best epoch. With `project`, each
    branch gets a trained linear projection to width 144 ahead of the
    classifier; standardization is folded into the returned parameters so
    scoring needs no preprocessing.
    """
    names = list(branches)
    y = _labels_to_array(labels)
    if len(np.unique(y)) < 2:
        raise TrainingError("training set must contain both classes")
    for name in names:
        if branches[name].shape[0] != len(y):
            raise ContractError(f"branch {name}: examples/labels mismatch")

    stats = _standardize_fit(branches)
    xb = _standardize_apply(branches, stats)
    have_dev = dev_branches is not None and dev_labels is not None
    if have_dev:
        xd = _standardize_apply(dev_branches, stats)
        yd = _labels_to_array(dev_labels)
    else:
        xd, yd = xb, y

    model = _JointModel({n: branches[n].shape[1] for n in names}, project)
    params = model.init_params(cfg.seed)

    best = (np.inf, 0, params.copy())
    history = []
    prev = params
    for epoch in range(cfg.epochs):
        loss, grad = model.loss_and_grad(params, xb, y)
        if not np.isfinite(loss):
            raise DivergenceError(
                f"loss diverged at epoch {epoch}",
                head=_finalize(model, prev, stats, names, history))
        prev = params.copy()
        params = params - cfg.learning_rate * grad
        dev_scores = _sigmoid(model.logits(params, xd))
        dev_eer = eer(ScoreSet(dev_scores, yd))[0]
        history.append(float(dev_eer))
        if dev_eer < best[0]:
            best = (dev_eer, epoch, params.copy())

    head = _finalize(model, best[2], stats, names, history)
    return head


def _finalize(model, params, stats, names, history):
    """Fold standardization into the affine parameters."""
    proj, w_clf, b_clf = model.unpack(params)
    if model.project:
        projections = {}
        for name in names:
            mu, sd = stats[name]
            w, b = proj[name]
            w_fold = w / sd[:, None]
            b_fold = b - (mu / sd) @ w
            projections[name] = (w_fold, b_fold)
        weights = w_clf.copy()
        bias = float(b_clf)
    else:
        projections = {}
        w_parts, bias = [], float(b_clf)
        pos = 0
        for name in names:
            mu, sd = stats[name]
            d = len(mu)
            w = w_clf[pos:pos + d]
            pos += d
            w_parts.append(w / sd)
            bias -= float((mu / sd) @ w)
        weights = np.concatenate(w_parts)
    return LinearHead(branches=tuple(names), projections=projections,
                      weights=weights, bias=bias, trained=True,
                      dev_eer_history=history)


def train(features, labels, cfg, dev_features=None, dev_labels=None):
    """Train a pooled logistic head on a list of feature matrices.

    `features` may be FeatureMap/FusedFeatures objects, 2D arrays or
    already-pooled vectors; each is mean-pooled over its sequence axis.
    """
    branches = {"features": _pool_all(features)}
    dev = None
    if dev_features is not None:
        dev = {"features": _pool_all(dev_features)}
    return fit_branches(branches, labels, cfg, dev, dev_labels, project=False)


def train_fused(branch_features, labels, cfg, dev_branch_features=None,
                dev_labels=None):
    """Train projections-to-144 jointly with the classifier.

    branch_features: dict name -> (n_examples x dim) pooled branch matrix;
    the fusion front-ends consume head.projections afterwards, making the
    trained projections the fixed extraction parameters.
    """
    return fit_branches(branch_features, labels, cfg, dev_branch_features,
                        dev_labels, project=True)


def score(head, features):
    """p_hat in (0, 1) for one example: sigmoid of an affine map of the
    mean-pooled features.

    For fusion heads, `features` is either the FusedFeatures sequence
    already projected through head.projections, or a dict of raw pooled
    branch vectors to be projected here; both give identical scores.
    """
    if isinstance(features, dict):
        if not head.projections:
            raise ContractError("head has no projections for branch scoring")
        cols = []
        for name in head.branches:
            w, b = head.projections[name]
            v = np.asarray(features[name], dtype=float)
            if v.shape[0] != w.shape[0]:
                raise ContractError(
                    f"branch {name}: width {v.shape[0]} != expected {w.shape[0]}")
            cols.append(v @ w + b)
        pooled = np.hstack(cols)
    else:
        pooled = pool_features(features)
    if pooled.shape[0] != head.feature_width:
        raise ContractError(
            f"feature width {pooled.shape[0]} != head width {head.feature_width}")
    z = float(pooled @ head.weights + head.bias)
    return float(_sigmoid(np.array([z]))[0])


def score_many(head, feature_list):
    return np.array([score(head, f) for f in feature_list])
