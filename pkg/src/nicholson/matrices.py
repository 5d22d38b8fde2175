"""Cooperative-matrix algebra: block decomposition, spectral bounds, and
the linear feasibility / solve primitives the threshold theory runs on.

A matrix is cooperative when its off-diagonal entries are non-negative; the
community matrix M = A + B - D is always of this kind. Its spectral bound
s(M) = max Re(spectrum) is the extinction/persistence threshold, computed
here per irreducible diagonal block by shifted power iteration with
Collatz-Wielandt bracketing.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional, Sequence, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .model import PatchSystem

__all__ = [
    "CommunityMatrix",
    "FrobeniusForm",
    "SpectralResult",
    "SpectralConvergenceError",
    "SingularMatrixError",
    "community_matrix",
    "strongly_connected_blocks",
    "is_irreducible",
    "spectral_bound",
    "eigen_oracle",
    "is_nonsingular_m_matrix",
    "find_positive_c",
    "find_positive_c_auto",
    "linear_solve",
    "determinant",
]

POWER_ITERATION_CAP = 100_000
POWER_ITERATION_BRACKET = 1e-12
PIVOT_TOL = 1e-12
EPS_LADDER = (1e-2, 1e-4, 1e-8)
C_MAX = 1e6


class SpectralConvergenceError(RuntimeError):
    """Power iteration failed to bracket the Perron root within the cap."""


class SingularMatrixError(RuntimeError):
    """A pivot underflowed the tolerance during elimination."""


@dataclass(frozen=True)
class CommunityMatrix:
    """M = A + B - D, with non-negative off-diagonal entries."""

    entries: np.ndarray
    provenance: Optional["PatchSystem"] = None

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"community matrix must be square, got shape {arr.shape}")
        off = arr - np.diag(np.diag(arr))
        if np.any(off < 0):
            raise ValueError("community matrix must be cooperative (off-diagonal entries >= 0)")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def community_matrix(sys: "PatchSystem") -> CommunityMatrix:
    m = sys.a + np.diag(sys.beta_totals) - np.diag(sys.d)
    return CommunityMatrix(m, provenance=sys)


def _as_square(matrix) -> np.ndarray:
    if isinstance(matrix, CommunityMatrix):
        return matrix.entries
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class FrobeniusForm:
    """Simultaneous row/column reordering exposing the irreducible diagonal blocks.

    ``permutation[p]`` is the original index placed at position p; applying it
    to rows and columns yields a block upper-triangular matrix whose diagonal
    blocks are ``blocks`` (stored in that topological order). Flow runs from
    later blocks into earlier ones, matching the digraph edge j -> i whenever
    M_ij > 0.
    """

    permutation: tuple[int, ...]
    block_sizes: tuple[int, ...]
    blocks: tuple[np.ndarray, ...]
    block_patches: tuple[tuple[int, ...], ...]  # original indices per block

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    def permuted(self, matrix) -> np.ndarray:
        arr = _as_square(matrix)
        idx = np.asarray(self.permutation)
        return arr[np.ix_(idx, idx)]


def _tarjan_sccs(adjacency: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan; returns SCCs (order handled by the caller)."""
    n = len(adjacency)
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(adjacency[v]):
                w = adjacency[v][pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
    return sccs


def strongly_connected_blocks(matrix) -> FrobeniusForm:
    """SCC decomposition of the digraph with edge j -> i whenever M_ij > 0.

    Blocks are ordered so that the permuted matrix is block upper-triangular
    (every coupling points from a later block into an earlier one); ties are
    broken by the smallest original patch index for determinism.
    """
    arr = _as_square(matrix)
    n = arr.shape[0]
    # successors of j are the rows i with arr[i, j] > 0
    adjacency = [[i for i in range(n) if i != j and arr[i, j] > 0] for j in range(n)]
    sccs = _tarjan_sccs(adjacency)

    comp_of = {}
    for ci, comp in enumerate(sccs):
        for v in comp:
            comp_of[v] = ci
    # condensation edges between distinct components, following j -> i
    out_edges: list[set[int]] = [set() for _ in sccs]
    in_deg = [0] * len(sccs)
    for j in range(n):
        for i in adjacency[j]:
            cj, ci = comp_of[j], comp_of[i]
            if cj != ci and ci not in out_edges[cj]:
                out_edges[cj].add(ci)
                in_deg[ci] += 1

    # Sinks of the condensation come first: a block may only feed blocks
    # already placed, which is exactly upper-triangularity.
    remaining_out = [len(s) for s in out_edges]
    feeds_into: list[set[int]] = [set() for _ in sccs]
    for cj, outs in enumerate(out_edges):
        for ci in outs:
            feeds_into[ci].add(cj)
    ready = [c for c in range(len(sccs)) if remaining_out[c] == 0]
    order: list[int] = []
    heap = [(sccs[c][0], c) for c in ready]
    heapq.heapify(heap)
    while heap:
        _, c = heapq.heappop(heap)
        order.append(c)
        for parent in feeds_into[c]:
            remaining_out[parent] -= 1
            if remaining_out[parent] == 0:
                heapq.heappush(heap, (sccs[parent][0], parent))
    if len(order) != len(sccs):
        raise AssertionError("condensation ordering failed; graph bookkeeping is inconsistent")

    permutation: list[int] = []
    block_sizes: list[int] = []
    block_patches: list[tuple[int, ...]] = []
    blocks: list[np.ndarray] = []
    for c in order:
        comp = sccs[c]
        permutation.extend(comp)
        block_sizes.append(len(comp))
        block_patches.append(tuple(comp))
        sub = arr[np.ix_(comp, comp)].copy()
        sub.setflags(write=False)
        blocks.append(sub)
    return FrobeniusForm(
        permutation=tuple(permutation),
        block_sizes=tuple(block_sizes),
        blocks=tuple(blocks),
        block_patches=tuple(block_patches),
    )


def is_irreducible(matrix) -> bool:
    return strongly_connected_blocks(matrix).num_blocks == 1


@dataclass(frozen=True)
class SpectralResult:
    bound: float
    achieving_block: int
    per_block_bounds: tuple[float, ...]
    right_vector: Optional[np.ndarray]
    left_vector: Optional[np.ndarray]
    iterations: int

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "achieving_block": self.achieving_block,
            "per_block_bounds": list(self.per_block_bounds),
            "right_vector": None if self.right_vector is None else self.right_vector.tolist(),
            "left_vector": None if self.left_vector is None else self.left_vector.tolist(),
            "iterations": self.iterations,
        }


def _perron_root(block: np.ndarray) -> tuple[float, np.ndarray, int]:
    """Perron root and right vector of an irreducible non-negative-shifted block.

    The +1 shift past the most negative diagonal entry makes the matrix
    non-negative with strictly positive diagonal, hence primitive, so the
    Collatz-Wielandt bracket closes geometrically.
    """
    k = block.shape[0]
    if k == 1:
        return float(block[0, 0]), np.ones(1), 0
    alpha = max(0.0, float(-(block.diagonal().min()))) + 1.0
    shifted = block + alpha * np.eye(k)
    v = np.ones(k)
    for it in range(1, POWER_ITERATION_CAP + 1):
        w = shifted @ v
        ratios = w / v
        lo = float(ratios.min())
        hi = float(ratios.max())
        if hi - lo < POWER_ITERATION_BRACKET:
            rho = 0.5 * (lo + hi)
            vec = w / w.max()
            return rho - alpha, vec, it
        v = w / w.max()
    raise SpectralConvergenceError(
        f"Collatz-Wielandt bracket did not close within {POWER_ITERATION_CAP} iterations"
    )


def spectral_bound(matrix) -> SpectralResult:
    """s(M) per irreducible block; Perron vectors returned for irreducible input."""
    arr = _as_square(matrix)
    off = arr - np.diag(np.diag(arr))
    if np.any(off < 0):
        raise ValueError("spectral_bound expects a cooperative matrix")
    form = strongly_connected_blocks(arr)
    bounds: list[float] = []
    total_iter = 0
    right_local: Optional[np.ndarray] = None
    for block in form.blocks:
        s, vec, used = _perron_root(block)
        bounds.append(s)
        total_iter += used
        right_local = vec
    best = int(np.argmax(bounds))
    result_bound = bounds[best]

    right = left = None
    if form.num_blocks == 1:
        n = arr.shape[0]
        if n == 1:
            right = np.ones(1)
            left = np.ones(1)
        else:
            # map the block-local vector back through the (identity-up-to-order)
            # permutation of the single block
            right = np.empty(n)
            for pos, orig in enumerate(form.permutation):
                right[orig] = right_local[pos]
            _, left_perm, used = _perron_root(form.blocks[0].T)
            total_iter += used
            left = np.empty(n)
            for pos, orig in enumerate(form.permutation):
                left[orig] = left_perm[pos]
    return SpectralResult(
        bound=float(result_bound),
        achieving_block=best,
        per_block_bounds=tuple(float(b) for b in bounds),
        right_vector=right,
        left_vector=left,
        iterations=total_iter,
    )


def _characteristic_polynomial(arr: np.ndarray) -> np.ndarray:
    """Coefficients of det(lambda I - A), highest power first (Faddeev-LeVerrier)."""
    n = arr.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    mk = np.zeros_like(arr)
    for k in range(1, n + 1):
        mk = arr @ mk + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(arr @ mk) / k
    return coeffs


def eigen_oracle(matrix, tol: float = 1e-12, max_iter: int = 2000) -> list[complex]:
    """All eigenvalues via Durand-Kerner on the expanded characteristic polynomial.

    Test oracle for small matrices (n <= 8); deliberately independent of the
    power-iteration path in :func:`spectral_bound`.
    """
    arr = _as_square(matrix)
    n = arr.shape[0]
    if n > 8:
        raise ValueError("eigen_oracle is restricted to n <= 8")
    if n == 1:
        return [complex(arr[0, 0])]
    coeffs = _characteristic_polynomial(arr)

    def poly(z: complex) -> complex:
        acc = 0j
        for c in coeffs:
            acc = acc * z + c
        return acc

    radius = 1.0 + float(np.abs(coeffs[1:]).max())
    seed = 0.4 + 0.9j
    roots = [radius * seed ** k for k in range(1, n + 1)]
    for _ in range(max_iter):
        worst = 0.0
        new_roots = list(roots)
        for i in range(n):
            denom = 1.0 + 0j
            for j in range(n):
                if j != i:
                    denom *= roots[i] - roots[j]
            if denom == 0:
                denom = 1e-30
            delta = poly(roots[i]) / denom
            new_roots[i] = roots[i] - delta
            worst = max(worst, abs(delta))
        roots = new_roots
        if worst < tol:
            return roots
    raise SpectralConvergenceError(f"Durand-Kerner did not converge within {max_iter} iterations")


def is_nonsingular_m_matrix(matrix) -> bool:
    """Non-positive off-diagonal entries and all eigenvalue real parts > 0.

    Equivalent test: -N is cooperative and s(-N) < 0. A singular M-matrix
    (s(-N) = 0) is rejected.
    """
    arr = _as_square(matrix)
    off = arr - np.diag(np.diag(arr))
    if np.any(off > 0):
        return False
    return spectral_bound(-arr).bound < 0.0


def linear_solve(matrix, b) -> np.ndarray:
    """Solve N x = b by partial-pivot elimination with one refinement pass."""
    arr = _as_square(matrix).copy()
    rhs = np.asarray(b, dtype=float).reshape(-1).copy()
    n = arr.shape[0]
    if rhs.shape != (n,):
        raise ValueError(f"right-hand side must have shape ({n},), got {rhs.shape}")
    lu, perm = _lu_factor(arr)
    x = _lu_solve(lu, perm, rhs)
    # single refinement pass keeps the residual at the contract level
    resid = rhs - _as_square(matrix) @ x
    x = x + _lu_solve(lu, perm, resid)
    return x


def _lu_factor(arr: np.ndarray) -> tuple[np.ndarray, list[int]]:
    n = arr.shape[0]
    lu = arr.copy()
    perm = list(range(n))
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(lu[col:, col])))
        if abs(lu[pivot_row, col]) < PIVOT_TOL:
            raise SingularMatrixError(f"pivot {lu[pivot_row, col]:.3e} below tolerance {PIVOT_TOL}")
        if pivot_row != col:
            lu[[col, pivot_row]] = lu[[pivot_row, col]]
            perm[col], perm[pivot_row] = perm[pivot_row], perm[col]
        factors = lu[col + 1:, col] / lu[col, col]
        lu[col + 1:, col] = factors
        lu[col + 1:, col + 1:] -= np.outer(factors, lu[col, col + 1:])
    return lu, perm


def _lu_solve(lu: np.ndarray, perm: list[int], rhs: np.ndarray) -> np.ndarray:
    n = lu.shape[0]
    y = rhs[perm].astype(float)
    for i in range(1, n):
        y[i] -= lu[i, :i] @ y[:i]
    x = y
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


def determinant(matrix) -> float:
    """Determinant via the same partial-pivot factorization (0.0 when singular)."""
    arr = _as_square(matrix).copy()
    try:
        lu, perm = _lu_factor(arr)
    except SingularMatrixError:
        return 0.0
    sign = 1.0
    # parity from the cycle structure of the recorded row permutation
    visited = [False] * len(perm)
    for i in range(len(perm)):
        if visited[i]:
            continue
        j = i
        cycle = 0
        while not visited[j]:
            visited[j] = True
            j = perm[j]
            cycle += 1
        if cycle % 2 == 0:
            sign = -sign
    return sign * float(np.prod(np.diag(lu)))


def find_positive_c(matrix, eps: float) -> Optional[np.ndarray]:
    """Positive vector c with Mc strictly positive at margin eps, or None.

    Solves the feasibility program {Mc >= eta, 1 <= c_i <= C_MAX} with
    eta = eps * max(1, ||M||_inf) by a phase-1 dense simplex (Bland's rule).
    Strict inequalities need a margin to be decidable in floating point;
    callers retry with smaller eps before declaring infeasibility.
    """
    arr = _as_square(matrix)
    off = arr - np.diag(np.diag(arr))
    if np.any(off < 0):
        raise ValueError("find_positive_c expects a cooperative matrix")
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = arr.shape[0]
    eta = eps * max(1.0, float(np.abs(arr).sum(axis=1).max()))

    # substitute c = 1 + y with y in [0, C_MAX - 1]:
    #   M y - s = eta - M 1        (n rows, surplus s >= 0)
    #   y + u = C_MAX - 1          (n rows, slack u >= 0)
    upper = C_MAX - 1.0
    b1 = eta - arr.sum(axis=1)
    num_struct = 3 * n  # y, s, u
    rows = []
    rhs = []
    basis: list[int] = []
    artificial_cols: list[int] = []
    art_count = 0
    for i in range(n):
        row = np.zeros(num_struct)
        row[:n] = arr[i]
        row[n + i] = -1.0
        bi = b1[i]
        if bi < 0:
            row = -row
            bi = -bi
        rows.append(row)
        rhs.append(bi)
        if row[n + i] == 1.0 and bi >= 0:
            basis.append(n + i)
        else:
            basis.append(None)  # placeholder, artificial assigned below
            art_count += 1
    for i in range(n):
        row = np.zeros(num_struct)
        row[i] = 1.0
        row[2 * n + i] = 1.0
        rows.append(row)
        rhs.append(upper)
        basis.append(2 * n + i)

    total_rows = len(rows)
    tableau = np.zeros((total_rows, num_struct + art_count))
    tableau[:, :num_struct] = np.array(rows)
    b_vec = np.array(rhs)
    next_art = num_struct
    for r in range(total_rows):
        if basis[r] is None:
            tableau[r, next_art] = 1.0
            basis[r] = next_art
            artificial_cols.append(next_art)
            next_art += 1

    if artificial_cols:
        feasible, basis = _phase1_simplex(tableau, b_vec, basis, set(artificial_cols))
        if not feasible:
            return None
    y = np.zeros(num_struct)
    for r, col in enumerate(basis):
        if col < num_struct:
            y[col] = b_vec[r]
    c = 1.0 + y[:n]
    if np.any(arr @ c <= 0):
        return None
    return c


def _phase1_simplex(tableau: np.ndarray, b: np.ndarray, basis: list[int],
                    artificial: set[int]) -> tuple[bool, list[int]]:
    """Minimize the artificial sum in place; Bland's rule guarantees termination."""
    rows, cols = tableau.shape
    # objective row: cost 1 on artificials, reduced through the current basis
    obj = np.zeros(cols)
    for col in artificial:
        obj[col] = 1.0
    z = 0.0
    for r, bcol in enumerate(basis):
        if bcol in artificial:
            obj -= tableau[r]
            z -= b[r]
    while True:
        entering = -1
        for j in range(cols):
            if obj[j] < -1e-9:
                entering = j
                break
        if entering < 0:
            break
        leaving = -1
        best_ratio = np.inf
        for r in range(rows):
            coef = tableau[r, entering]
            if coef > 1e-9:
                ratio = b[r] / coef
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12 and (leaving < 0 or basis[r] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = r
        if leaving < 0:
            # unbounded phase-1 cannot happen with finite box constraints
            return False, basis
        pivot = tableau[leaving, entering]
        tableau[leaving] /= pivot
        b[leaving] /= pivot
        for r in range(rows):
            if r != leaving and tableau[r, entering] != 0.0:
                factor = tableau[r, entering]
                tableau[r] -= factor * tableau[leaving]
                b[r] -= factor * b[leaving]
        factor = obj[entering]
        obj -= factor * tableau[leaving]
        z -= factor * b[leaving]
        basis[leaving] = entering
    return -z < 1e-9, basis


def find_positive_c_auto(matrix, ladder: Sequence[float] = EPS_LADDER) -> Optional[np.ndarray]:
    """Retry :func:`find_positive_c` down the margin ladder; None when all fail."""
    for eps in ladder:
        c = find_positive_c(matrix, eps)
        if c is not None:
            return c
    return None
