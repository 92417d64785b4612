"""Internal/evaluation classifiers and stratified cross-validated accuracy.

Multinomial Naive Bayes over fractional TF-IDF weights plus a Gini decision
tree, both operating on mask-restricted columns of a DocTermMatrix. All argmax
ties break to the lowest class index so results are reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .corpus import DocTermMatrix


class ClassifierError(Exception):
    pass


@dataclass(frozen=True)
class NbModel:
    log_priors: np.ndarray  # (C,)
    log_likelihoods: np.ndarray  # (C, M') over the selected features
    alpha: float
    feature_indices: np.ndarray  # columns of the training matrix the model uses


@dataclass(frozen=True)
class DtNode:
    feature: int  # index into the model's feature_indices; -1 at leaves
    threshold: float
    left: "DtNode | None"
    right: "DtNode | None"
    klass: int  # majority class; the prediction at leaves


@dataclass(frozen=True)
class DtModel:
    root: DtNode
    feature_indices: np.ndarray
    max_depth: int
    min_split: int


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_of: np.ndarray  # fold index per row
    seed: int


@dataclass(frozen=True)
class EvalReport:
    mean_accuracy: float
    fold_accuracies: tuple[float, ...]
    classifier: str


def _mask_columns(mask) -> np.ndarray:
    cols = np.flatnonzero(np.asarray(mask, dtype=bool))
    if len(cols) == 0:
        raise ClassifierError("empty feature mask")
    return cols


def nb_train(
    matrix: DocTermMatrix, mask, row_subset, alpha: float = 1.0
) -> NbModel:
    """P(t|c) = (W(t,c)+alpha) / (W(.,c)+alpha*M') with W summing TF-IDF weight."""
    cols = _mask_columns(mask)
    rows = np.asarray(row_subset, dtype=np.int64)
    if len(rows) == 0:
        raise ClassifierError("empty row subset")
    n_classes = matrix.n_classes
    sub = matrix.weights[rows][:, cols]
    labels = matrix.labels[rows]

    onehot = np.zeros((len(rows), n_classes))
    onehot[np.arange(len(rows)), labels] = 1.0
    class_weight = onehot.T @ sub  # (C, M') summed TF-IDF mass
    class_weight = np.asarray(class_weight)

    m_prime = len(cols)
    totals = class_weight.sum(axis=1, keepdims=True) + alpha * m_prime
    log_likelihoods = np.log(class_weight + alpha) - np.log(totals)

    counts = np.bincount(labels, minlength=n_classes).astype(float)
    with np.errstate(divide="ignore"):
        log_priors = np.log(counts / len(rows))
    return NbModel(
        log_priors=log_priors,
        log_likelihoods=log_likelihoods,
        alpha=alpha,
        feature_indices=cols,
    )


def nb_predict(model: NbModel, row) -> int:
    scores = _nb_scores(model, row)
    return int(np.argmax(scores))  # argmax takes the first (lowest) on ties


def _nb_scores(model: NbModel, row) -> np.ndarray:
    if sp.issparse(row):
        row = np.asarray(row.todense()).ravel()
    sel = np.asarray(row).ravel()[model.feature_indices]
    return model.log_priors + model.log_likelihoods @ sel


def _nb_predict_batch(model: NbModel, rows: sp.csr_matrix) -> np.ndarray:
    sel = rows[:, model.feature_indices]
    scores = sel @ model.log_likelihoods.T + model.log_priors
    return np.argmax(np.asarray(scores), axis=1)


def _gini_best_split(values: np.ndarray, labels: np.ndarray, n_classes: int):
    """Best (threshold, impurity) for one feature, or None if constant.

    Thresholds are midpoints between consecutive distinct sorted values.
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    y = labels[order]
    n = len(v)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    left_counts = np.cumsum(onehot, axis=0)  # counts with the first i+1 rows left
    total = left_counts[-1]

    boundaries = np.flatnonzero(v[:-1] < v[1:])  # split after position b
    if len(boundaries) == 0:
        return None
    lc = left_counts[boundaries]
    rc = total - lc
    nl = lc.sum(axis=1)
    nr = rc.sum(axis=1)
    gini_l = 1.0 - ((lc / nl[:, None]) ** 2).sum(axis=1)
    gini_r = 1.0 - ((rc / nr[:, None]) ** 2).sum(axis=1)
    weighted = (nl * gini_l + nr * gini_r) / n
    best = int(np.argmin(weighted))  # first index on ties -> lowest threshold
    b = boundaries[best]
    threshold = (v[b] + v[b + 1]) / 2.0
    return threshold, float(weighted[best])


def _dt_build(x: np.ndarray, y: np.ndarray, n_classes: int, depth: int,
              max_depth: int, min_split: int) -> DtNode:
    counts = np.bincount(y, minlength=n_classes)
    majority = int(np.argmax(counts))
    if depth >= max_depth or len(y) < min_split or counts.max() == len(y):
        return DtNode(feature=-1, threshold=0.0, left=None, right=None, klass=majority)

    best = None  # (impurity, feature, threshold)
    for j in range(x.shape[1]):
        split = _gini_best_split(x[:, j], y, n_classes)
        if split is None:
            continue
        threshold, impurity = split
        if best is None or impurity < best[0]:
            best = (impurity, j, threshold)
    if best is None:
        return DtNode(feature=-1, threshold=0.0, left=None, right=None, klass=majority)

    _, j, threshold = best
    go_left = x[:, j] <= threshold
    left = _dt_build(x[go_left], y[go_left], n_classes, depth + 1, max_depth, min_split)
    right = _dt_build(x[~go_left], y[~go_left], n_classes, depth + 1, max_depth, min_split)
    return DtNode(feature=j, threshold=threshold, left=left, right=right, klass=majority)


def dt_train(
    matrix: DocTermMatrix, mask, row_subset, max_depth: int = 20, min_split: int = 2
) -> DtModel:
    cols = _mask_columns(mask)
    rows = np.asarray(row_subset, dtype=np.int64)
    if len(rows) == 0:
        raise ClassifierError("empty row subset")
    x = np.asarray(matrix.weights[rows][:, cols].todense())
    y = matrix.labels[rows]
    root = _dt_build(x, y, matrix.n_classes, 0, max_depth, min_split)
    return DtModel(root=root, feature_indices=cols, max_depth=max_depth, min_split=min_split)


def dt_predict(model: DtModel, row) -> int:
    if sp.issparse(row):
        row = np.asarray(row.todense()).ravel()
    sel = np.asarray(row).ravel()[model.feature_indices]
    node = model.root
    while node.feature >= 0:
        node = node.left if sel[node.feature] <= node.threshold else node.right
    return node.klass


def stratified_folds(labels, k: int, seed: int) -> FoldAssignment:
    """Per-class shuffle (seeded) then round-robin deal into k folds."""
    labels = np.asarray(labels)
    if k < 2:
        raise ClassifierError("need k >= 2 folds")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(labels), dtype=np.int64)
    for c in range(int(labels.max()) + 1):
        rows = np.flatnonzero(labels == c)
        if 0 < len(rows) < k:
            raise ClassifierError(f"class {c} has {len(rows)} rows, fewer than k={k}")
        rng.shuffle(rows)
        fold_of[rows] = np.arange(len(rows)) % k
    return FoldAssignment(k=k, fold_of=fold_of, seed=seed)


def cross_val_accuracy(
    matrix: DocTermMatrix,
    mask,
    classifier: str = "nb",
    k: int = 5,
    seed: int = 0,
    alpha: float = 1.0,
    max_depth: int = 20,
    min_split: int = 2,
) -> EvalReport:
    folds = stratified_folds(matrix.labels, k, seed)
    accs = []
    all_rows = np.arange(matrix.n_docs)
    for fold in range(k):
        test = all_rows[folds.fold_of == fold]
        train = all_rows[folds.fold_of != fold]
        if classifier == "nb":
            model = nb_train(matrix, mask, train, alpha=alpha)
            pred = _nb_predict_batch(model, matrix.weights[test])
        elif classifier == "dt":
            model = dt_train(matrix, mask, train, max_depth=max_depth, min_split=min_split)
            x = np.asarray(matrix.weights[test][:, model.feature_indices].todense())
            pred = np.array([_dt_traverse(model.root, r) for r in x])
        else:
            raise ClassifierError(f"unknown classifier: {classifier!r}")
        accs.append(float(np.mean(pred == matrix.labels[test])))
    return EvalReport(
        mean_accuracy=float(np.mean(accs)),
        fold_accuracies=tuple(accs),
        classifier=classifier,
    )


def _dt_traverse(node: DtNode, sel: np.ndarray) -> int:
    while node.feature >= 0:
        node = node.left if sel[node.feature] <= node.threshold else node.right
    return node.klass
