"""Shape functions: univariate B-splines, tensor-product rational bases, simplices.

Knot vectors are open with unit-length spans (span k occupies [k, k+1]), so
parametric distance is distance measured in element lengths. All evaluation
routines are vectorized over points; the pointwise entry points are thin
wrappers over the batched ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Evaluation point outside the parametric domain."""


class InvalidWeightsError(ValueError):
    """Rational weight function is nonpositive."""


# ordering convention for mixed second derivatives, per spatial dimension
MIXED_PAIRS = {1: (), 2: ((0, 1),), 3: ((0, 1), (0, 2), (1, 2))}


class BasisSpec:
    """Tensor-product B-spline/NURBS basis or a linear simplex family.

    Tensor family: per-direction degrees and open knot vectors plus one
    positive weight per control point (all ones gives a plain B-spline).
    Simplex family: linear barycentric functions; only the dimension is
    carried here, connectivity lives with the mesh.
    """

    def __init__(self, family, degrees=None, knots=None, weights=None, dim=None):
        self.family = family
        if family == "simplex":
            if dim not in (2, 3):
                raise ValueError("simplex basis supports dim 2 or 3")
            self.dim = dim
            self.degrees = (1,) * dim
            self.knots = ()
            self.weights = None
            self.n_funcs_per_dir = ()
            self.n_funcs = dim + 1  # per element
            return
        if family != "tensor":
            raise ValueError(f"unknown basis family {family!r}")
        self.degrees = tuple(int(p) for p in degrees)
        self.knots = tuple(np.asarray(k, dtype=np.float64) for k in knots)
        self.dim = len(self.degrees)
        if len(self.knots) != self.dim:
            raise ValueError("one knot vector per direction required")
        for p, kv in zip(self.degrees, self.knots):
            if p < 1:
                raise ValueError("degree must be >= 1")
            if np.any(np.diff(kv) < 0):
                raise ValueError("knot vector must be nondecreasing")
            if len(kv) < 2 * (p + 1):
                raise ValueError("knot vector too short for an open basis")
            if not (np.all(kv[: p + 1] == kv[0]) and np.all(kv[-(p + 1):] == kv[-1])):
                raise ValueError("knot vectors must be open (end knots repeated degree+1 times)")
        self.n_funcs_per_dir = tuple(
            len(kv) - p - 1 for p, kv in zip(self.degrees, self.knots)
        )
        self.n_funcs = int(np.prod(self.n_funcs_per_dir))
        if weights is None:
            self.weights = None
        else:
            w = np.asarray(weights, dtype=np.float64).ravel()
            if len(w) != self.n_funcs:
                raise ValueError("one weight per control point required")
            if np.any(w <= 0):
                raise InvalidWeightsError("weights must be strictly positive")
            self.weights = w

    @classmethod
    def tensor_uniform(cls, degrees, n_elements, continuity=None, weights=None):
        """Open knot vectors with unit spans on [0, n] per direction.

        ``continuity`` limits inter-element smoothness (default: degree - 1,
        the maximum); interior knots are repeated ``degree - continuity``
        times.
        """
        degrees = tuple(int(p) for p in np.atleast_1d(degrees))
        n_elements = tuple(int(n) for n in np.atleast_1d(n_elements))
        if len(degrees) == 1 and len(n_elements) > 1:
            degrees = degrees * len(n_elements)
        if continuity is None:
            cont = tuple(p - 1 for p in degrees)
        else:
            cont = tuple(int(c) for c in np.atleast_1d(continuity))
            if len(cont) == 1:
                cont = cont * len(degrees)
        knots = []
        for p, n, c in zip(degrees, n_elements, cont):
            if not 0 <= c <= p - 1:
                raise ValueError("continuity must be in [0, degree-1]")
            mult = p - c
            kv = [0.0] * (p + 1)
            for k in range(1, n):
                kv.extend([float(k)] * mult)
            kv.extend([float(n)] * (p + 1))
            knots.append(np.array(kv))
        return cls("tensor", degrees=degrees, knots=knots, weights=weights)

    @classmethod
    def simplex(cls, dim):
        return cls("simplex", dim=dim)

    def span_of_element(self, direction, element):
        """Knot-span index of an element along one direction."""
        kv = self.knots[direction]
        # elements sit on unit spans [k, k+1]; the span index is the last
        # occurrence of the left breakpoint
        return int(np.searchsorted(kv, float(element), side="right") - 1)


@dataclass
class BasisEval:
    """Active basis functions at one parametric point.

    ``second_mixed`` holds mixed parametric second derivatives ordered by
    :data:`MIXED_PAIRS` (tensor-product only; ``None`` otherwise).
    """

    indices: np.ndarray
    values: np.ndarray
    grads: np.ndarray
    second_mixed: np.ndarray | None = None


def _find_spans(knots, degree, u):
    """Span indices for an array of parametric coordinates (open knots)."""
    u = np.asarray(u, dtype=np.float64)
    lo, hi = knots[0], knots[-1]
    if np.any(u < lo) or np.any(u > hi):
        raise DomainError(
            f"parametric coordinate outside knot range [{lo:g}, {hi:g}]"
        )
    spans = np.searchsorted(knots, u, side="right") - 1
    last = len(knots) - degree - 2
    return np.clip(spans, degree, last)


def _ders_basis_batched(knots, p, u, nd, spans=None):
    """Nonzero basis functions and derivatives at each point of ``u``.

    Returns ``(spans, ders)`` with ``ders`` of shape (nd+1, m, p+1);
    ``ders[k][i]`` are the k-th derivatives of the p+1 functions active at
    point i. Triangular-table recursion; only the (small) degree loops run
    in Python. An explicit ``spans`` array forces one-sided evaluation for
    points sitting exactly on interior knots.
    """
    u = np.asarray(u, dtype=np.float64)
    m = len(u)
    if spans is None:
        spans = _find_spans(knots, p, u)
    else:
        spans = np.asarray(spans, dtype=np.int64)
    left = np.zeros((p + 1, m))
    right = np.zeros((p + 1, m))
    ndu = np.zeros((p + 1, p + 1, m))
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = u - knots[spans + 1 - j]
        right[j] = knots[spans + j] - u
        saved = np.zeros(m)
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved
    ders = np.zeros((nd + 1, m, p + 1))
    for j in range(p + 1):
        ders[0, :, j] = ndu[j, p]
    if nd == 0:
        return spans, ders
    a = np.zeros((2, p + 1, m))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[:] = 0.0
        a[0, 0] = 1.0
        for k in range(1, nd + 1):
            d = np.zeros(m)
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d = d + a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d = d + a[s2, k] * ndu[r, pk]
            ders[k, :, r] = d
            s1, s2 = s2, s1
    factor = float(p)
    for k in range(1, nd + 1):
        ders[k] *= factor
        factor *= p - k
    return spans, ders


def eval_bspline(spec, direction, xi):
    """Univariate B-spline values and first derivatives at one coordinate.

    Returns ``(first_index, values, derivatives)`` for the degree+1 functions
    active on the containing span. Raises :class:`DomainError` outside the
    knot range.
    """
    if spec.family != "tensor":
        raise ValueError("eval_bspline requires a tensor-product basis")
    p = spec.degrees[direction]
    spans, ders = _ders_basis_batched(spec.knots[direction], p, np.array([float(xi)]), 1)
    return int(spans[0]) - p, ders[0, 0].copy(), ders[1, 0].copy()


class TensorBatchEval:
    """Batched tensor-product (rational) basis evaluation at many points."""

    __slots__ = ("indices", "values", "grads", "second_mixed")

    def __init__(self, indices, values, grads, second_mixed):
        self.indices = indices
        self.values = values
        self.grads = grads
        self.second_mixed = second_mixed


def eval_tensor_batched(spec, points, mixed=False, spans_per_dir=None):
    """Evaluate a tensor-product basis at ``points`` (m, dim).

    Returns a :class:`TensorBatchEval` with active global indices (m, nen),
    values (m, nen), parametric gradients (m, nen, dim) and, when requested
    and dim >= 2, mixed second derivatives (m, nen, n_pairs).

    Rational weighting follows the quotient expansions
        R   = N/W
        R_x = N_x/W - R W_x/W
        R_xy= N_xy/W - R_x W_y/W - R_y W_x/W - R W_xy/W
    with N the weighted numerator and W the weight function.
    """
    if spec.family != "tensor":
        raise ValueError("eval_tensor_batched requires a tensor-product basis")
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    m, dim = points.shape
    if dim != spec.dim:
        raise ValueError(f"points have dim {dim}, basis has dim {spec.dim}")
    per_dir = []
    firsts = []
    for d in range(dim):
        p = spec.degrees[d]
        forced = None if spans_per_dir is None else spans_per_dir[d]
        spans, ders = _ders_basis_batched(spec.knots[d], p, points[:, d], 1, spans=forced)
        per_dir.append((ders[0], ders[1]))  # each (m, p+1)
        firsts.append(spans - p)
    sizes = [spec.degrees[d] + 1 for d in range(dim)]
    nen = int(np.prod(sizes))

    def _outer(factors):
        # factors[d] has shape (m, p_d+1); combine so direction 0 varies fastest
        out = factors[dim - 1]
        for d in range(dim - 2, -1, -1):
            out = out[:, :, None] * factors[d][:, None, :]
            out = out.reshape(m, -1)
        return out

    vals = _outer([per_dir[d][0] for d in range(dim)])
    grads = np.empty((m, nen, dim))
    for g in range(dim):
        grads[:, :, g] = _outer(
            [per_dir[d][1] if d == g else per_dir[d][0] for d in range(dim)]
        )
    pairs = MIXED_PAIRS[dim]
    mixed_arr = None
    if mixed and pairs:
        mixed_arr = np.empty((m, nen, len(pairs)))
        for ip, (da, db) in enumerate(pairs):
            mixed_arr[:, :, ip] = _outer(
                [per_dir[d][1] if d in (da, db) else per_dir[d][0] for d in range(dim)]
            )

    # global function indices, direction 0 fastest
    local = [np.arange(sz) for sz in sizes]
    idx = firsts[dim - 1][:, None] + local[dim - 1][None, :]
    for d in range(dim - 2, -1, -1):
        idx = idx[:, :, None] * spec.n_funcs_per_dir[d] + (
            firsts[d][:, None] + local[d][None, :]
        )[:, None, :]
        idx = idx.reshape(m, -1)
    indices = idx

    if spec.weights is not None:
        w = spec.weights[indices]  # (m, nen)
        nw = vals * w
        wsum = nw.sum(axis=1)
        if np.any(wsum <= 0):
            raise InvalidWeightsError("weight function nonpositive at an evaluation point")
        winv = 1.0 / wsum
        r = nw * winv[:, None]
        nw_d = grads * w[:, :, None]
        w_d = nw_d.sum(axis=1)  # (m, dim)
        r_d = nw_d * winv[:, None, None] - r[:, :, None] * (w_d * winv[:, None])[:, None, :]
        if mixed_arr is not None:
            nw_m = mixed_arr * w[:, :, None]
            w_m = nw_m.sum(axis=1)  # (m, n_pairs)
            r_m = np.empty_like(nw_m)
            for ip, (da, db) in enumerate(pairs):
                r_m[:, :, ip] = (
                    nw_m[:, :, ip] * winv[:, None]
                    - r_d[:, :, da] * (w_d[:, db] * winv)[:, None]
                    - r_d[:, :, db] * (w_d[:, da] * winv)[:, None]
                    - r * (w_m[:, ip] * winv)[:, None]
                )
            mixed_arr = r_m
        vals, grads = r, r_d
    return TensorBatchEval(indices, vals, grads, mixed_arr)


def eval_rational(spec, point):
    """Rational basis values and derivatives at a single parametric point."""
    be = eval_tensor_batched(spec, np.asarray(point, dtype=np.float64).reshape(1, -1),
                             mixed=spec.dim >= 2)
    second = be.second_mixed[0] if be.second_mixed is not None else None
    return BasisEval(be.indices[0], be.values[0], be.grads[0], second)


# reference-simplex gradients of the barycentric functions with respect to
# the reference coordinates (lambda_0 = 1 - sum xi_i, lambda_i = xi_i)
_SIMPLEX_REF_GRADS = {
    2: np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]),
    3: np.array([[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
}


def eval_simplex(bary):
    """Linear simplex basis at a barycentric point (3 or 4 coordinates).

    Values are the barycentric coordinates themselves; gradients are the
    constant reference-simplex gradients. Raises :class:`DomainError` for
    points outside the reference simplex.
    """
    lam = np.asarray(bary, dtype=np.float64).ravel()
    if len(lam) not in (3, 4):
        raise ValueError("barycentric point must have 3 (triangle) or 4 (tet) coordinates")
    dim = len(lam) - 1
    tol = 1e-12
    if np.any(lam < -tol) or abs(lam.sum() - 1.0) > tol:
        raise DomainError("point outside the reference simplex")
    return BasisEval(np.arange(dim + 1), lam.copy(), _SIMPLEX_REF_GRADS[dim].copy(), None)
