"""Non-tree learners: kNN, Gaussian naive Bayes, softmax regression, MLP."""

from __future__ import annotations

import numpy as np


def standardizer(X):
    """Training-fold mean and std (zero stds replaced by one)."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


# --- k-nearest neighbors ---

def fit_knn(X, y, n_classes, params, seed, jobs=1):
    if params["standardize"]:
        mean, std = standardizer(X)
    else:
        mean = np.zeros(X.shape[1])
        std = np.ones(X.shape[1])
    return {"X": (X - mean) / std, "y": y, "mean": mean, "std": std,
            "k": min(params["k"], X.shape[0])}


def predict_knn(state, X, n_classes, chunk=512):
    Xt = (X - state["mean"]) / state["std"]
    Xs = state["X"]
    ys = state["y"]
    k = state["k"]
    sq_train = np.einsum("ij,ij->i", Xs, Xs)
    labels = np.empty(X.shape[0], dtype=np.int64)
    scores = np.empty((X.shape[0], n_classes))
    for lo in range(0, X.shape[0], chunk):
        block = Xt[lo:lo + chunk]
        d = sq_train[None, :] - 2.0 * (block @ Xs.T)
        if k < len(ys):
            nn = np.argpartition(d, k - 1, axis=1)[:, :k]
        else:
            nn = np.broadcast_to(np.arange(len(ys)), (len(block), len(ys)))
        for i in range(len(block)):
            counts = np.bincount(ys[nn[i]], minlength=n_classes)
            labels[lo + i] = np.argmax(counts)
            scores[lo + i] = counts / counts.sum()
    return labels, scores


# --- Gaussian naive Bayes ---

def fit_gaussian_nb(X, y, n_classes, params, seed, jobs=1):
    n, d = X.shape
    priors = np.bincount(y, minlength=n_classes) / n
    means = np.zeros((n_classes, d))
    variances = np.zeros((n_classes, d))
    overall_max_var = float(X.var(axis=0).max())
    floor = params["var_floor"] * max(overall_max_var, 1e-300)
    for c in range(n_classes):
        rows = X[y == c]
        if len(rows) == 0:
            variances[c] = 1.0
            continue
        means[c] = rows.mean(axis=0)
        variances[c] = np.maximum(rows.var(axis=0), floor)
    variances = np.maximum(variances, 1e-300)
    return {"priors": priors, "means": means, "vars": variances}


def predict_gaussian_nb(state, X, n_classes):
    priors = state["priors"]
    log_post = np.empty((X.shape[0], n_classes))
    with np.errstate(divide="ignore"):
        log_priors = np.where(priors > 0, np.log(priors), -np.inf)
    for c in range(n_classes):
        var = state["vars"][c]
        diff = X - state["means"][c]
        ll = -0.5 * np.sum(np.log(2.0 * np.pi * var) + diff * diff / var, axis=1)
        log_post[:, c] = log_priors[c] + ll
    scores = _softmax(log_post)
    return np.argmax(log_post, axis=1), scores


# --- multinomial logistic regression ---

def fit_multinom_logreg(X, y, n_classes, params, seed, jobs=1):
    n, d = X.shape
    mean, std = standardizer(X)
    Xs = (X - mean) / std
    Xb = np.hstack([Xs, np.ones((n, 1))])
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0
    W = np.zeros((d + 1, n_classes))
    lr = params["lr"]
    l2 = params["l2"]
    grad = W
    for _ in range(params["epochs"]):
        P = _softmax(Xb @ W)
        grad = Xb.T @ (P - Y) / n
        grad[:-1] += l2 * W[:-1]
        W = W - lr * grad
    converged = float(np.abs(grad).max()) < 1e-5
    return {"W": W, "mean": mean, "std": std}, converged


def predict_multinom_logreg(state, X, n_classes):
    Xs = (X - state["mean"]) / state["std"]
    Xb = np.hstack([Xs, np.ones((X.shape[0], 1))])
    scores = _softmax(Xb @ state["W"])
    return np.argmax(scores, axis=1), scores


# --- single-hidden-layer perceptron ---

def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))


def fit_shallow_mlp(X, y, n_classes, params, seed, jobs=1):
    n, d = X.shape
    if params["standardize"]:
        mean, std = standardizer(X)
    else:
        mean = np.zeros(d)
        std = np.ones(d)
    Xs = (X - mean) / std
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    h = params["hidden"]
    W1 = rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, h))
    b1 = np.zeros(h)
    W2 = rng.normal(0.0, 1.0 / np.sqrt(h), size=(h, n_classes))
    b2 = np.zeros(n_classes)
    vW1 = np.zeros_like(W1)
    vb1 = np.zeros_like(b1)
    vW2 = np.zeros_like(W2)
    vb2 = np.zeros_like(b2)
    lr = params["lr"]
    mom = params["momentum"]

    best = (np.inf, W1, b1, W2, b2)
    for _ in range(params["epochs"]):
        H = _sigmoid(Xs @ W1 + b1)
        P = _softmax(H @ W2 + b2)
        loss = -np.mean(np.log(np.maximum(P[np.arange(n), y], 1e-300)))
        if loss < best[0]:
            best = (loss, W1.copy(), b1.copy(), W2.copy(), b2.copy())
        dZ2 = (P - Y) / n
        dW2 = H.T @ dZ2
        db2 = dZ2.sum(axis=0)
        dH = dZ2 @ W2.T * H * (1.0 - H)
        dW1 = Xs.T @ dH
        db1 = dH.sum(axis=0)
        vW1 = mom * vW1 - lr * dW1
        vb1 = mom * vb1 - lr * db1
        vW2 = mom * vW2 - lr * dW2
        vb2 = mom * vb2 - lr * db2
        W1 = W1 + vW1
        b1 = b1 + vb1
        W2 = W2 + vW2
        b2 = b2 + vb2

    H = _sigmoid(Xs @ W1 + b1)
    P = _softmax(H @ W2 + b2)
    final_loss = -np.mean(np.log(np.maximum(P[np.arange(n), y], 1e-300)))
    if final_loss > best[0]:
        # keep the best epoch seen and flag the run as non-converged
        _, W1, b1, W2, b2 = best
        converged = False
    else:
        converged = bool(np.isfinite(final_loss))
    state = {"W1": W1, "b1": b1, "W2": W2, "b2": b2, "mean": mean, "std": std}
    return state, converged


def predict_shallow_mlp(state, X, n_classes):
    Xs = (X - state["mean"]) / state["std"]
    H = _sigmoid(Xs @ state["W1"] + state["b1"])
    scores = _softmax(H @ state["W2"] + state["b2"])
    return np.argmax(scores, axis=1), scores
