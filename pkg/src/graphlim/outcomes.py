"""Polynomial outcome responses in treatment and treated-neighbor fraction."""

from __future__ import annotations

import numbers

import numpy as np

from .graphs import Permutation

__all__ = [
    "OutcomeFunction",
    "OutcomeProfile",
    "OutcomeVector",
    "PROFILE_PRESETS",
    "eval_outcome",
    "profile_at",
    "discretize_profile",
    "sample_profile",
    "outcome_l1_distance",
    "class_f_bound",
]

MAX_X_POWER = 4
MAX_T_POWER = 4
MAX_DERIVATIVE_ORDER = 3

_X_WIDTH = MAX_X_POWER + 1
_T_WIDTH = MAX_T_POWER + 1


def _derive_x(coeffs: np.ndarray, order: int) -> np.ndarray:
    """Coefficient transform for d^order/dx^order along the last axis."""
    c = coeffs
    for _ in range(order):
        width = c.shape[-1]
        if width <= 1:
            return np.zeros(c.shape[:-1] + (1,), dtype=float)
        c = c[..., 1:] * np.arange(1, width, dtype=float)
    return c


def _check_w(w) -> float:
    if isinstance(w, (bool, np.bool_)):
        return float(w)
    if isinstance(w, numbers.Real) and float(w) in (0.0, 1.0):
        return float(w)
    raise ValueError(f"treatment value must be 0 or 1, got {w!r}")


def _check_x(x) -> float:
    xf = float(x)
    if not 0.0 <= xf <= 1.0:
        raise ValueError(f"exposure fraction must lie in [0, 1], got {x!r}")
    return xf


def _check_order(order) -> int:
    k = int(order)
    if not 0 <= k <= MAX_DERIVATIVE_ORDER:
        raise ValueError(
            f"derivative_order must lie in 0..{MAX_DERIVATIVE_ORDER}, got {order!r}"
        )
    return k


class OutcomeFunction:
    """One unit's response f(w, x), polynomial in x with a treatment shift.

    Stored as a coefficient matrix ``coeffs[w_power, x_power]`` with
    ``w_power`` in {0, 1} and ``x_power`` up to 4; build one from a term
    list with :meth:`from_terms`.
    """

    def __init__(self, coeffs) -> None:
        c = np.asarray(coeffs, dtype=float)
        if c.shape != (2, _X_WIDTH):
            raise ValueError(f"coefficient matrix must have shape (2, {_X_WIDTH})")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c = c.copy()
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_terms(cls, terms) -> "OutcomeFunction":
        """Build from (coef, w_power, x_power) triples; repeated powers add."""
        c = np.zeros((2, _X_WIDTH), dtype=float)
        for coef, w_pow, x_pow in terms:
            wp, xp = int(w_pow), int(x_pow)
            if wp not in (0, 1):
                raise ValueError(f"w_power must be 0 or 1, got {w_pow!r}")
            if not 0 <= xp <= MAX_X_POWER:
                raise ValueError(f"x_power must lie in 0..{MAX_X_POWER}, got {x_pow!r}")
            c[wp, xp] += float(coef)
        return cls(c)

    def eval(self, w, x: float, derivative_order: int = 0) -> float:
        wf = _check_w(w)
        xf = _check_x(x)
        k = _check_order(derivative_order)
        c = _derive_x(self.coeffs, k)
        powers = xf ** np.arange(c.shape[-1])
        return float(c[0] @ powers + wf * (c[1] @ powers))

    def __eq__(self, other) -> bool:
        return isinstance(other, OutcomeFunction) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):  # frozen arrays, safe to key on bytes
        return hash(self.coeffs.tobytes())


class OutcomeProfile:
    """A response surface ell(t, w, x), polynomial in the unit label t."""

    def __init__(self, coeffs) -> None:
        c = np.asarray(coeffs, dtype=float)
        if c.shape != (_T_WIDTH, 2, _X_WIDTH):
            raise ValueError(f"profile coefficients must have shape ({_T_WIDTH}, 2, {_X_WIDTH})")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c = c.copy()
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_terms(cls, terms) -> "OutcomeProfile":
        """Build from (coef, t_power, w_power, x_power) tuples."""
        c = np.zeros((_T_WIDTH, 2, _X_WIDTH), dtype=float)
        for coef, t_pow, w_pow, x_pow in terms:
            tp, wp, xp = int(t_pow), int(w_pow), int(x_pow)
            if not 0 <= tp <= MAX_T_POWER:
                raise ValueError(f"t_power must lie in 0..{MAX_T_POWER}, got {t_pow!r}")
            if wp not in (0, 1):
                raise ValueError(f"w_power must be 0 or 1, got {w_pow!r}")
            if not 0 <= xp <= MAX_X_POWER:
                raise ValueError(f"x_power must lie in 0..{MAX_X_POWER}, got {x_pow!r}")
            c[tp, wp, xp] += float(coef)
        return cls(c)

    def at(self, t: float) -> "OutcomeFunction":
        tf = float(t)
        if not 0.0 <= tf <= 1.0:
            raise ValueError(f"profile label must lie in [0, 1], got {t!r}")
        powers = tf ** np.arange(_T_WIDTH)
        return OutcomeFunction(np.einsum("a,awx->wx", powers, self.coeffs))

    def eval_batch(self, t, w, x, derivative_order: int = 0) -> np.ndarray:
        """Vectorised ell evaluation; t, w, x broadcast together."""
        t = np.asarray(t, dtype=float)
        c = _derive_x(self.coeffs, int(derivative_order))
        tp = t[..., None] ** np.arange(_T_WIDTH)
        cw = np.einsum("...a,awp->...wp", tp, c)
        xp = np.asarray(x, dtype=float)[..., None] ** np.arange(c.shape[-1])
        base = np.einsum("...p,...p->...", cw[..., 0, :], xp)
        slope = np.einsum("...p,...p->...", cw[..., 1, :], xp)
        return base + np.asarray(w, dtype=float) * slope

    def __eq__(self, other) -> bool:
        return isinstance(other, OutcomeProfile) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())


class OutcomeVector:
    """Per-unit outcome functions for a size-n experiment, stored as one array."""

    def __init__(self, coeffs) -> None:
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 3 or c.shape[1:] != (2, _X_WIDTH) or c.shape[0] < 1:
            raise ValueError(f"expected coefficients of shape (n, 2, {_X_WIDTH})")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c = c.copy()
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_functions(cls, functions) -> "OutcomeVector":
        fns = list(functions)
        if not fns:
            raise ValueError("need at least one outcome function")
        return cls(np.stack([f.coeffs for f in fns]))

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def unit(self, i: int) -> OutcomeFunction:
        return OutcomeFunction(self.coeffs[i])

    def permute(self, perm: Permutation) -> "OutcomeVector":
        if perm.size != len(self):
            raise ValueError("permutation size does not match outcome vector length")
        return OutcomeVector(self.coeffs[perm.mapping])

    def eval_units(self, w, x, derivative_order: int = 0) -> np.ndarray:
        """Evaluate unit i at (w_i, x_i); w and x are scalars or length-n arrays."""
        c = _derive_x(self.coeffs, int(derivative_order))
        n = len(self)
        x_arr = np.broadcast_to(np.asarray(x, dtype=float), (n,))
        w_arr = np.broadcast_to(np.asarray(w, dtype=float), (n,))
        powers = x_arr[:, None] ** np.arange(c.shape[-1])
        base = np.einsum("np,np->n", c[:, 0, :], powers)
        slope = np.einsum("np,np->n", c[:, 1, :], powers)
        return base + w_arr * slope

    def __eq__(self, other) -> bool:
        return isinstance(other, OutcomeVector) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())


# Quadratic interference response shipped with the replication presets:
# ell(t, w, x) = t + (1 + 4 t) w + (2 + 2 t) x + 5 x^2 + 4 w x
PROFILE_PRESETS: dict[str, OutcomeProfile] = {
    "paper_sec4": OutcomeProfile.from_terms(
        [
            (1.0, 1, 0, 0),
            (1.0, 0, 1, 0),
            (4.0, 1, 1, 0),
            (2.0, 0, 0, 1),
            (2.0, 1, 0, 1),
            (5.0, 0, 0, 2),
            (4.0, 0, 1, 1),
        ]
    )
}


def eval_outcome(fn: OutcomeFunction, w, x: float, derivative_order: int = 0) -> float:
    """Evaluate f (or an x-derivative of order up to 3) at one point."""
    return fn.eval(w, x, derivative_order)


def profile_at(profile: OutcomeProfile, t: float) -> OutcomeFunction:
    """Freeze the unit label: returns f(w, x) = ell(t, w, x)."""
    return profile.at(t)


def discretize_profile(profile: OutcomeProfile, n: int) -> OutcomeVector:
    """Outcome functions at the evenly spaced labels t_i = i / n, i = 1..n."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    t = np.arange(1, n + 1, dtype=float) / n
    tp = t[:, None] ** np.arange(_T_WIDTH)
    return OutcomeVector(np.einsum("na,awx->nwx", tp, profile.coeffs))


def sample_profile(profile: OutcomeProfile, latents) -> OutcomeVector:
    """Outcome functions at the sampled labels t_i = U_i."""
    u = np.asarray(latents, dtype=float)
    if u.ndim != 1 or u.shape[0] < 1:
        raise ValueError("latents must be a non-empty one-dimensional array")
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("latents must lie in [0, 1]")
    tp = u[:, None] ** np.arange(_T_WIDTH)
    return OutcomeVector(np.einsum("na,awx->nwx", tp, profile.coeffs))


def outcome_l1_distance(
    a: OutcomeVector, b: OutcomeVector, w, pi: float, derivative_order: int = 0
) -> float:
    """Mean absolute gap (1/n) sum_i |a_i(w, pi) - b_i(w, pi)|, derivatives allowed."""
    if len(a) != len(b):
        raise ValueError("outcome vectors must have equal length")
    wf = _check_w(w)
    xf = _check_x(pi)
    k = _check_order(derivative_order)
    gap = a.eval_units(wf, xf, k) - b.eval_units(wf, xf, k)
    return float(np.mean(np.abs(gap)))


def class_f_bound(item, grid_points: int = 129) -> float:
    """Upper bound for max over derivative order k <= 3, w, x of |d^k f / dx^k|.

    Accepts an :class:`OutcomeFunction`, :class:`OutcomeVector`, or
    :class:`OutcomeProfile`.  Each derivative order is evaluated on a
    uniform x-grid including the endpoints (profiles are also sampled on a
    label grid) and inflated by a Lipschitz pad: grid spacing times a
    coefficient bound on the next derivative in the padded direction.  The
    result is therefore a certified upper bound, not a bare grid max.  The
    bound is reported, never enforced.
    """
    g = int(grid_points)
    if g < 2:
        raise ValueError("grid_points must be at least 2")
    if isinstance(item, OutcomeFunction):
        stacks, profile_coeffs = item.coeffs[None, :, :], None
    elif isinstance(item, OutcomeVector):
        stacks, profile_coeffs = item.coeffs, None
    elif isinstance(item, OutcomeProfile):
        t = np.linspace(0.0, 1.0, g)
        tp = t[:, None] ** np.arange(_T_WIDTH)
        stacks, profile_coeffs = np.einsum("ma,awp->mwp", tp, item.coeffs), item.coeffs
    else:
        raise ValueError(f"unsupported argument of type {type(item).__name__}")

    xs = np.linspace(0.0, 1.0, g)
    spacing = 1.0 / (g - 1)
    best = 0.0
    for k in range(MAX_DERIVATIVE_ORDER + 1):
        ck = _derive_x(stacks, k)
        powers = xs[:, None] ** np.arange(ck.shape[-1])
        vals = np.einsum("mwp,gp->mwg", ck, powers)
        grid_max = max(
            float(np.abs(vals[:, 0, :]).max()),
            float(np.abs(vals[:, 0, :] + vals[:, 1, :]).max()),
        )
        # x-direction pad: coefficient bound on |d^(k+1)/dx^(k+1)| over both w
        next_c = np.abs(_derive_x(stacks, k + 1)).sum(axis=-1)
        pad = spacing * float(next_c.sum(axis=1).max())
        if profile_coeffs is not None:
            # label-direction pad at this derivative order
            dt_c = _derive_x(profile_coeffs, k) * np.arange(_T_WIDTH)[:, None, None]
            pad += spacing * float(np.abs(dt_c).sum(axis=(0, 2)).sum())
        best = max(best, grid_max + pad)
    return best
