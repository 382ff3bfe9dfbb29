"""Independent brute-force oracles the tests check the library against.

Nothing in here may call into sentistock's implementation paths for the
quantity being verified; these are deliberately naive re-derivations.
"""

from fractions import Fraction

import numpy as np

LABELS = ("Positive", "Neutral", "Negative")


def jacobi_eigh(matrix, tol=1e-12, max_sweeps=100):
    """Classic cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors-as-columns) sorted descending.
    """
    A = np.array(matrix, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < tol * 1e-3:
                    continue
                theta = 0.5 * np.arctan2(2.0 * A[p, q], A[q, q] - A[p, p])
                c, s = np.cos(theta), np.sin(theta)
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    eigvals = np.diag(A).copy()
    order = np.argsort(eigvals)[::-1]
    return eigvals[order], V[:, order]


def naive_nb_posterior(train_docs, tokens, alpha=1):
    """Exact-arithmetic multinomial NB posterior over the three labels.

    train_docs: list of (token_list, label).  Uses Fractions end to end;
    tokens outside the training vocabulary are ignored.
    """
    vocab = sorted({t for toks, _ in train_docs for t in toks})
    n = len(train_docs)
    joint = {}
    for label in LABELS:
        cls = [toks for toks, lab in train_docs if lab == label]
        total = sum(len(t) for t in cls)
        score = Fraction(len(cls) + alpha, n + alpha * len(LABELS))
        for tok in tokens:
            if tok not in vocab:
                continue
            count = sum(t.count(tok) for t in cls)
            score *= Fraction(count + alpha, total + alpha * len(vocab))
        joint[label] = score
    norm = sum(joint.values())
    return {label: joint[label] / norm for label in LABELS}


def naive_nb_label(train_docs, tokens, alpha=1):
    posterior = naive_nb_posterior(train_docs, tokens, alpha)
    best = LABELS[0]
    for label in LABELS[1:]:
        if posterior[label] > posterior[best]:
            best = label
    return best


def naive_counting_metrics(predictions, truth):
    """Confusion counts and metrics by plain counting (Increase=1 positive)."""
    tp = sum(1 for (_, lab), y in zip(predictions, truth) if lab == 1 and y == 1)
    fp = sum(1 for (_, lab), y in zip(predictions, truth) if lab == 1 and y == 0)
    fn = sum(1 for (_, lab), y in zip(predictions, truth) if lab == 0 and y == 1)
    tn = sum(1 for (_, lab), y in zip(predictions, truth) if lab == 0 and y == 0)
    n = len(truth)

    def prf(tp_, fp_, fn_):
        precision = tp_ / (tp_ + fp_) if tp_ + fp_ else 0.0
        recall = tp_ / (tp_ + fn_) if tp_ + fn_ else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return precision, recall, f1

    p_inc, r_inc, f_inc = prf(tp, fp, fn)
    p_dec, r_dec, f_dec = prf(tn, fn, fp)
    mse = sum((p - (1.0 if y == 1 else 0.0)) ** 2 for (p, _), y in zip(predictions, truth)) / n
    return {
        "tp": tp, "fp": fp, "fn": fn, "tn": tn,
        "accuracy": (tp + tn) / n,
        "precision_increase": p_inc, "recall_increase": r_inc, "f1_increase": f_inc,
        "precision_decrease": p_dec, "recall_decrease": r_dec, "f1_decrease": f_dec,
        "macro_f1": (f_inc + f_dec) / 2.0,
        "mse": mse,
    }


def exhaustive_knn_neighbors(X, query, k, metric):
    """k nearest row indices by a full distance table; ties keep lower index."""
    table = [(metric(X[i], query), i) for i in range(len(X))]
    table.sort(key=lambda pair: (pair[0], pair[1]))
    return [i for _, i in table[:k]]


def euclidean(a, b):
    return float(np.sqrt(np.sum((np.asarray(a) - np.asarray(b)) ** 2)))


def lorentzian(a, b):
    return float(np.sum(np.log(1.0 + np.abs(np.asarray(a) - np.asarray(b)))))


def cosine(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(1.0 - np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
