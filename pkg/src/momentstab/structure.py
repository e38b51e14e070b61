"""Zero-pattern classification of nonnegative matrices.

A nonnegative matrix is primitive, irreducible with period ``h >= 2``, or
reducible. Reducible matrices are permuted to block upper-triangular
(Frobenius) form; irreducible imprimitive ones split into ``h`` cyclic
classes whose blocks of ``A**h`` are primitive.
"""

from dataclasses import dataclass, field
from math import gcd
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import NegativeEntry, NotPrimitive
from .spectral import as_matrix

ZERO_RTOL = 1e-14
PRIMITIVE = "Primitive"
IMPRIMITIVE = "IrreducibleImprimitive"
REDUCIBLE = "Reducible"


@dataclass(frozen=True)
class Classification:
    """Structural verdict.

    ``blocks`` lists the index sets of the diagonal blocks of the Frobenius
    form in order (for a reducible matrix); ``permutation`` is their
    concatenation. ``cyclic_classes`` lists the ``h`` classes of an
    irreducible imprimitive matrix, ordered so that arcs go from class
    ``i`` to class ``i + 1 (mod h)``.
    """

    kind: str
    h: int = 1
    blocks: list = field(default_factory=list)
    cyclic_classes: list = field(default_factory=list)

    @property
    def permutation(self) -> list:
        return [i for b in self.blocks for i in b]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "h": self.h, "blocks": self.blocks, "cyclic_classes": self.cyclic_classes}


def pattern(A) -> np.ndarray:
    """Boolean adjacency ``A_ij > 0`` with tiny entries treated as zero."""
    A = as_matrix(A)
    if np.any(A < 0):
        raise NegativeEntry("classification needs a nonnegative matrix")
    scale = A.max()
    return A > ZERO_RTOL * scale if scale > 0 else np.zeros(A.shape, dtype=bool)


def _period(P: np.ndarray, nodes) -> tuple:
    """Period and cyclic classes of the strongly connected subgraph on ``nodes``."""
    nodes = list(nodes)
    sub = P[np.ix_(nodes, nodes)]
    order, pred = breadth_first_order(csr_matrix(sub.astype(float)), 0, directed=True, return_predecessors=True)
    level = np.full(len(nodes), -1)
    level[0] = 0
    for i in order[1:]:
        level[i] = level[pred[i]] + 1
    h = 0
    for i, j in zip(*np.nonzero(sub)):
        h = gcd(h, int(level[i] + 1 - level[j]))
    h = abs(h)
    classes = [[nodes[i] for i in range(len(nodes)) if level[i] % h == c] for c in range(h)] if h else []
    return h, classes


def _components(P: np.ndarray):
    """Strongly connected components in an order where arcs go forward."""
    ncomp, labels = connected_components(csr_matrix(P.astype(float)), directed=True, connection="strong")
    members = [sorted(np.nonzero(labels == c)[0].tolist()) for c in range(ncomp)]
    # condensation DAG, then topological order (sources first)
    succ = [set() for _ in range(ncomp)]
    indeg = [0] * ncomp
    for i, j in zip(*np.nonzero(P)):
        a, b = labels[i], labels[j]
        if a != b and b not in succ[a]:
            succ[a].add(b)
            indeg[b] += 1
    ready = sorted((c for c in range(ncomp) if indeg[c] == 0), key=lambda c: members[c][0])
    out = []
    while ready:
        c = ready.pop(0)
        out.append(members[c])
        for d in sorted(succ[c], key=lambda d: members[d][0]):
            indeg[d] -= 1
            if indeg[d] == 0:
                ready.append(d)
        ready.sort(key=lambda c: members[c][0])
    return out


def classify(A) -> Classification:
    P = pattern(A)
    n = P.shape[0]
    comps = _components(P)
    if len(comps) > 1:
        return Classification(REDUCIBLE, blocks=comps)
    if n == 1 and not P[0, 0]:
        # a single zero entry has no cycles; treat as reducible (its power never becomes positive)
        return Classification(REDUCIBLE, blocks=comps)
    h, classes = _period(P, range(n))
    if h == 1:
        return Classification(PRIMITIVE, blocks=comps)
    return Classification(IMPRIMITIVE, h=h, blocks=comps, cyclic_classes=classes)


def primitive_components(A, cls: Optional[Classification] = None) -> list:
    """Primitive matrices whose stability governs that of ``A``.

    Diagonal blocks of the Frobenius form are reduced recursively. Blocks
    of an irreducible imprimitive matrix come from ``A**h`` restricted to
    each cyclic class. ``1 x 1`` zero blocks carry no dynamics and are
    dropped.
    """
    A = as_matrix(A)
    cls = classify(A) if cls is None else cls
    if cls.kind == PRIMITIVE:
        return [A]
    if cls.kind == IMPRIMITIVE:
        Ah = np.linalg.matrix_power(A, cls.h)
        out = []
        for c in cls.cyclic_classes:
            out.extend(primitive_components(Ah[np.ix_(c, c)]))
        return out
    out = []
    for b in cls.blocks:
        sub = A[np.ix_(b, b)]
        if len(b) == 1 and not pattern(sub)[0, 0]:
            continue
        out.extend(primitive_components(sub))
    return out


def index_of_primitivity(A) -> int:
    """Smallest ``p`` with ``A**p`` entrywise positive."""
    P = pattern(A)
    cls = classify(A)
    if cls.kind != PRIMITIVE:
        raise NotPrimitive(f"matrix is {cls.kind}")
    n = P.shape[0]
    bound = n * n - 2 * n + 2
    M = P.astype(np.int64)
    Q = P.copy()
    for p in range(1, bound + 1):
        if Q.all():
            return p
        Q = (Q.astype(np.int64) @ M) > 0
    raise AssertionError(f"primitive matrix not positive at the bound {bound}")
