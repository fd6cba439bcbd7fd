"""Thresholded greedy forward selection.

At each step every unselected covariate is scored by its incremental
loss reduction against the current working model; the argmax among the
scores strictly exceeding the threshold t enters the model, and the loop
stops when no score qualifies. The final coefficients come from a fresh
least-squares refit on the selected support.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core_linalg import (
    COLLINEAR_TOL,
    Dataset,
    OrthoState,
    initial_state,
    is_standardized,
    least_squares_on_support,
    ortho_extend,
)
from .errors import NotStandardized


@dataclass(frozen=True)
class SelectionStep:
    index: int
    gain: float
    loss_after: float


@dataclass(frozen=True)
class SelectionTrace:
    """Ordered record of the selection loop: every gain strictly exceeds
    the threshold and the working loss drops by exactly that gain."""

    steps: tuple[SelectionStep, ...]
    threshold: float


@dataclass(frozen=True)
class FitResult:
    trace: SelectionTrace
    theta_hat: np.ndarray
    support: tuple[int, ...]
    loss: float
    pred_error_norm: Optional[float] = None
    l2_error: Optional[float] = None
    l1_error: Optional[float] = None
    budget_exhausted: bool = False

    @property
    def s_hat(self) -> int:
        return len(self.support)


def score_all(state: OrthoState, ds: Dataset) -> np.ndarray:
    """Gain -Delta_j l(S) for every candidate column.

    Entry j is (E_n[x~_ij r_i])^2 / E_n[x~_ij^2] where x~_j is column j
    residualized against the current basis and r the current residual.
    Already-selected and collinear columns get a -inf sentinel.
    """
    x = ds.x
    n = ds.n
    basis = state.basis
    if basis.shape[1]:
        xt = x - basis @ (basis.T @ x / n)
        # second pass keeps the sentinel test honest near collinearity
        xt = xt - basis @ (basis.T @ xt / n)
    else:
        xt = x
    denom = np.einsum("ij,ij->j", xt, xt) / n
    num = xt.T @ state.residual / n
    scores = np.full(ds.p, -np.inf)
    usable = denom > COLLINEAR_TOL
    scores[usable] = num[usable] ** 2 / denom[usable]
    if state.support:
        scores[list(state.support)] = -np.inf
    return scores


def forward_regression(
    ds: Dataset, t: float, max_steps: Optional[int] = None
) -> FitResult:
    """Run the greedy selection loop at threshold t, then refit.

    Ties in the argmax break toward the lowest column index, which makes
    the result independent of any parallel scoring schedule. Stopping is
    strict: a gain equal to t exactly is not selected. If the step budget
    (default min(n, p)) runs out while a qualifying candidate remains,
    the result is flagged ``budget_exhausted`` rather than an error.
    """
    if t <= 0:
        raise ValueError("threshold t must be positive")
    if not is_standardized(ds.x):
        raise NotStandardized("columns must be centered with unit second moment")
    cap = min(ds.n, ds.p)
    if max_steps is not None:
        cap = min(cap, int(max_steps))

    state = initial_state(ds)
    steps: list[SelectionStep] = []
    budget_exhausted = False
    while True:
        scores = score_all(state, ds)
        best = int(np.argmax(scores))
        if not scores[best] > t:
            break
        if len(steps) >= cap:
            budget_exhausted = True
            break
        state = ortho_extend(state, best, ds)
        steps.append(SelectionStep(best, float(scores[best]), state.residual_loss))

    support = tuple(sorted(s.index for s in steps))
    theta_hat, loss = least_squares_on_support(ds, support)

    pred = l2 = l1 = None
    if ds.theta0 is not None:
        l2, l1, pred = parameter_errors(ds, theta_hat, ds.theta0)

    return FitResult(
        trace=SelectionTrace(steps=tuple(steps), threshold=float(t)),
        theta_hat=theta_hat,
        support=support,
        loss=loss,
        pred_error_norm=pred,
        l2_error=l2,
        l1_error=l1,
        budget_exhausted=budget_exhausted,
    )


def parameter_errors(
    ds: Dataset, theta_hat: np.ndarray, theta0: np.ndarray
) -> tuple[float, float, float]:
    """l2 and l1 coefficient errors plus the prediction error norm
    E_n[(x_i'(theta0 - theta_hat))^2]^{1/2}."""
    d = np.asarray(theta0, dtype=float) - theta_hat
    if d.shape[0] != ds.p:
        raise ValueError("theta0 length must match the number of covariates")
    fit_gap = ds.x @ d
    pred = float(np.sqrt((fit_gap * fit_gap).mean()))
    return float(np.linalg.norm(d)), float(np.abs(d).sum()), pred
