"""Greedy nearest-neighbor matching without replacement, plus rank rematching
and optimal complete matchings for equal-size groups.

Greedy semantics: treated objects are processed one at a time; each takes its
nearest still-unmatched control if and only if that control is within the
caliper. There is no fallback to the second-nearest control when the nearest
one fails the caliper. Equidistant left/right candidates resolve to the
smaller score; among equal scores the control adjacent in sorted order wins
(the rightmost strictly below, the leftmost at-or-above the treated score).
That rule makes the list scan, the tree search, and the brute-force reference
agree pair for pair, duplicates included.

``nn_match_sorted`` exploits sorted processing order for O(K + L) total work
via a doubly-linked list over the controls. ``nn_match_tree`` supports any
processing order in O(N log N) using a balanced tree that keeps already
matched internal nodes around as "void" placeholders until they lose a child.
"""

from __future__ import annotations

import numpy as np

from .calipers import as_caliper
from .core import (
    GroupSizeError,
    InputValidationError,
    MatchResult,
    ScoreSet,
    make_match_result,
)

__all__ = [
    "resolve_processing_order",
    "nn_match_sorted",
    "nn_match_tree",
    "ControlTree",
    "TreeNode",
    "nearest_candidate",
    "rematch_by_rank",
    "complete_match_min_cost",
    "complete_match_max_cost",
]

PROCESSING_ORDERS = ("sorted", "given", "random")


def resolve_processing_order(
    scores: ScoreSet, order: str = "sorted", random_state=None
) -> np.ndarray:
    """Positions into the sorted treated array, in the order to process them.

    ``sorted`` walks ascending scores; ``given`` restores the caller's input
    order; ``random`` draws a uniform permutation from ``random_state``.
    """
    K = scores.n_treated
    if order == "sorted":
        return np.arange(K)
    if order == "given":
        return np.argsort(scores.treated_perm, kind="stable")
    if order == "random":
        return np.random.default_rng(random_state).permutation(K)
    raise InputValidationError(
        f"unknown processing order {order!r}; expected one of {PROCESSING_ORDERS}"
    )


def nn_match_sorted(scores: ScoreSet, caliper) -> MatchResult:
    """Greedy nearest-neighbor matching with treated processed in score order.

    A doubly-linked list over the sorted controls makes the whole run
    O(K + L): the scan cursor only ever moves right because treated scores
    arrive ascending, and unlinking a matched control is O(1).
    """
    caliper = as_caliper(caliper)
    xs = scores.treated_scores.tolist()
    ys = scores.control_scores.tolist()
    K, L = len(xs), len(ys)
    treated: list[int] = []
    control: list[int] = []
    dists: list[float] = []
    # nxt[j] / prv[j] link unmatched controls; position L is the end sentinel
    nxt = list(range(1, L + 1))
    prv = list(range(-1, L))
    cursor = 0 if L else L
    iterations = 0
    for i in range(K):
        iterations += 1
        x = xs[i]
        while cursor != L and ys[cursor] < x:
            cursor = nxt[cursor]
            iterations += 1
        right = cursor if cursor != L else -1
        left = prv[cursor]
        if left < 0 and right < 0:
            continue
        if right < 0:
            pick = left
        elif left < 0:
            pick = right
        else:
            pick = left if (x - ys[left]) <= (ys[right] - x) else right
        d = abs(x - ys[pick])
        if d <= caliper(x, ys[pick]):
            treated.append(i)
            control.append(pick)
            dists.append(d)
            if pick == cursor:
                cursor = nxt[pick]
            pl, pr = prv[pick], nxt[pick]
            if pl >= 0:
                nxt[pl] = pr
            prv[pr] = pl
    return make_match_result(treated, control, dists, iterations)


class TreeNode:
    """One control observation in a ControlTree.

    ``index`` is the control's position in the sorted array (which is also its
    in-order rank in the tree). ``void`` marks a matched control whose node is
    retained because it still has two children.
    """

    __slots__ = ("index", "score", "left", "right", "parent", "void")

    def __init__(self, index: int, score: float):
        self.index = index
        self.score = score
        self.left: TreeNode | None = None
        self.right: TreeNode | None = None
        self.parent: TreeNode | None = None
        self.void = False

    def __repr__(self):  # pragma: no cover
        flag = " void" if self.void else ""
        return f"<TreeNode {self.index}: {self.score:g}{flag}>"


class ControlTree:
    """Balanced search tree over the sorted controls, supporting extraction.

    Built perfectly balanced once from the sorted array and never rebalanced;
    extraction only shrinks it, so depth never grows. Extracting a node with
    two children leaves it in place as a void placeholder; a void node is
    spliced out the moment it would drop below two children, so voids always
    have exactly two children.
    """

    def __init__(self, control_scores):
        scores = np.asarray(control_scores, dtype=float)
        self.size = int(scores.size)
        self.n_built = self.size
        self.initial_depth = 0
        self.root = self._build(scores.tolist(), 0, self.size, None, 1)

    def _build(self, ys, lo, hi, parent, depth):
        if lo >= hi:
            return None
        self.initial_depth = max(self.initial_depth, depth)
        mid = (lo + hi) // 2
        node = TreeNode(mid, ys[mid])
        node.parent = parent
        node.left = self._build(ys, lo, mid, node, depth + 1)
        node.right = self._build(ys, mid + 1, hi, node, depth + 1)
        return node

    def _replace(self, node: TreeNode, child: TreeNode | None) -> None:
        parent = node.parent
        if child is not None:
            child.parent = parent
        if parent is None:
            self.root = child
        elif parent.left is node:
            parent.left = child
        else:
            parent.right = child

    def extract(self, node: TreeNode) -> None:
        """Remove a matched (non-void) control from the tree."""
        if node.void:
            raise InputValidationError("node is already void (matched earlier)")
        self.size -= 1
        if node.left is not None and node.right is not None:
            node.void = True
            return
        child = node.left if node.left is not None else node.right
        self._replace(node, child)
        if child is None:
            # removing a leaf may leave a void parent with a single child
            parent = node.parent
            if parent is not None and parent.void:
                remaining = parent.left if parent.left is not None else parent.right
                self._replace(parent, remaining)

    def nodes_in_order(self):
        """Yield all nodes (void included) in in-order sequence."""
        stack: list[TreeNode] = []
        node = self.root
        while stack or node is not None:
            while node is not None:
                stack.append(node)
                node = node.left
            node = stack.pop()
            yield node
            node = node.right


def nearest_candidate(tree: ControlTree, x: float):
    """Find the remaining control nearest to ``x``, with the step count.

    Descends the tree carrying two to four guesses, each flagged static or
    branching, bracketed by two permanent static dummies below and above all
    scores. Every step either narrows the branching guesses by one level or,
    once the bracketing guesses are both static, picks the nearer non-dummy
    one. Returns (node, steps); node is None when no controls remain.
    """
    # guess tuples: (score, in-order position, node, static); dummies have no node
    low = (-np.inf, -1, None, True)
    high = (np.inf, tree.n_built, None, True)
    guesses = [low, high]
    if tree.root is not None:
        guesses.append((tree.root.score, tree.root.index, tree.root, False))
    steps = 0
    while True:
        steps += 1
        left_guess = None
        right_guess = None
        for g in guesses:
            if g[0] < x:
                if left_guess is None or g[1] > left_guess[1]:
                    left_guess = g
            else:
                if right_guess is None or g[1] < right_guess[1]:
                    right_guess = g
        if left_guess[3] and right_guess[3]:
            ln, rn = left_guess[2], right_guess[2]
            if ln is None and rn is None:
                return None, steps
            if rn is None:
                return ln, steps
            if ln is None:
                return rn, steps
            return (ln if (x - ln.score) <= (rn.score - x) else rn), steps
        nxt = []
        for guess, is_left in ((left_guess, True), (right_guess, False)):
            score, idx, node, static = guess
            if static:
                nxt.append(guess)
            elif node.void:
                for ch in (node.left, node.right):
                    nxt.append((ch.score, ch.index, ch, False))
            else:
                nxt.append((score, idx, node, True))
                ch = node.right if is_left else node.left
                if ch is not None:
                    nxt.append((ch.score, ch.index, ch, False))
        guesses = nxt


def nn_match_tree(
    scores: ScoreSet, caliper, order: str = "given", random_state=None
) -> MatchResult:
    """Greedy nearest-neighbor matching for any processing order, O(N log N).

    Produces exactly the pairs the reference O(N^2) scan produces for the same
    order, caliper, and tie rule. ``order`` is resolved by
    resolve_processing_order; pass ``random_state`` for reproducible random
    orders. Pairs are reported in processing order.
    """
    caliper = as_caliper(caliper)
    positions = resolve_processing_order(scores, order, random_state)
    xs = scores.treated_scores.tolist()
    tree = ControlTree(scores.control_scores)
    treated: list[int] = []
    control: list[int] = []
    dists: list[float] = []
    iterations = 0
    for i in positions.tolist():
        x = xs[i]
        node, steps = nearest_candidate(tree, x)
        iterations += steps
        if node is None:
            continue
        d = abs(x - node.score)
        if d <= caliper(x, node.score):
            treated.append(i)
            control.append(node.index)
            dists.append(d)
            tree.extract(node)
    return make_match_result(treated, control, dists, iterations)


def _check_one_to_one(result: MatchResult, scores: ScoreSet, caliper) -> None:
    ti = result.treated_indices
    ci = result.control_indices
    if ti.size != ci.size or ti.size != result.distances.size:
        raise InputValidationError("malformed matching: ragged index/distance arrays")
    if ti.size == 0:
        return
    if ti.min() < 0 or ti.max() >= scores.n_treated:
        raise InputValidationError("malformed matching: treated index out of range")
    if ci.min() < 0 or ci.max() >= scores.n_control:
        raise InputValidationError("malformed matching: control index out of range")
    if np.unique(ti).size != ti.size:
        raise InputValidationError("malformed matching: a treated index repeats")
    if np.unique(ci).size != ci.size:
        raise InputValidationError("malformed matching: a control index repeats")
    X = scores.treated_scores
    Y = scores.control_scores
    for i, j in zip(ti.tolist(), ci.tolist()):
        x, y = float(X[i]), float(Y[j])
        if abs(x - y) > caliper(x, y):
            raise InputValidationError(
                f"malformed matching: pair ({i}, {j}) violates the caliper "
                f"(|{x:g} - {y:g}| > {caliper(x, y):g})"
            )


def rematch_by_rank(result: MatchResult, scores: ScoreSet, caliper) -> MatchResult:
    """Re-pair a valid one-to-one matching by score rank.

    Keeps the matched subsets on both sides and pairs the k-th smallest
    matched treated score with the k-th smallest matched control score. For a
    certified Lipschitz caliper the new pairs always satisfy the caliper, and
    neither the total nor the maximum within-pair distance can increase. The
    input must be a valid one-to-one matching under the caliper; anything else
    is rejected as malformed.
    """
    caliper = as_caliper(caliper)
    _check_one_to_one(result, scores, caliper)
    ti = np.sort(result.treated_indices)
    ci = np.sort(result.control_indices)
    d = np.abs(scores.treated_scores[ti] - scores.control_scores[ci])
    return make_match_result(ti, ci, d, loop_iterations=int(ti.size))


def _complete_pairs(scores: ScoreSet, reversed_controls: bool) -> MatchResult:
    K, L = scores.n_treated, scores.n_control
    if K != L:
        raise GroupSizeError(
            f"complete matching requires equal group sizes, got {K} treated "
            f"and {L} controls"
        )
    ti = np.arange(K)
    ci = ti[::-1] if reversed_controls else ti
    d = np.abs(scores.treated_scores[ti] - scores.control_scores[ci])
    return make_match_result(ti, ci, d, loop_iterations=K)


def complete_match_min_cost(scores: ScoreSet) -> MatchResult:
    """Rank-aligned complete matching of equal-size groups.

    Pairing the i-th smallest treated score with the i-th smallest control
    score minimizes sum(phi(x - y)) over all complete matchings for every
    convex nonnegative phi, and with it the maximum within-pair distance.
    """
    return _complete_pairs(scores, reversed_controls=False)


def complete_match_max_cost(scores: ScoreSet) -> MatchResult:
    """Rank-reversed complete matching: maximizes every convex pair cost."""
    return _complete_pairs(scores, reversed_controls=True)
