"""MCMC transition operators for targets of the form N(f; 0, cov) * L(f).

Four operators share one contract: step(state, prior, model, rng) returns a
:class:`StepResult` with the new state and per-step diagnostics. All of them
propose moves built from a single auxiliary draw nu ~ N(0, cov):

* :func:`elliptical_slice_step` -- rejection-free slice sampling on the
  ellipse f*cos(t) + nu*sin(t), with bracket shrinkage toward the current
  state (the recommended operator).
* :func:`elliptical_slice_aux_step` -- the two-stage augmented-model variant
  (resample the ellipse parameterization, then slice-sample the angle);
  equivalent in distribution, kept as a reference implementation.
* :func:`neal_mh_step` -- Metropolis-Hastings with proposal
  sqrt(1-eps^2)*f + eps*nu and a fixed step size eps.
* :func:`line_slice_step` -- slice sampling along the straight line
  f + eps*nu, which (unlike the ellipse) must evaluate the prior density at
  every proposal.

Operators never mutate their inputs; each chain owns its RNG stream.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .diagnostics import ChainTrace
from .errors import (
    ChainError,
    EllsliceError,
    InvalidConfig,
    NonFiniteLikelihood,
    ShrinkLimitExceeded,
)
from .gaussian import GaussianPrior

TWO_PI = 2.0 * math.pi


class LikelihoodModel(Protocol):
    """Anything mapping a latent vector to a log-likelihood."""

    n: int

    def log_lik(self, f: np.ndarray) -> float: ...


@dataclass
class SamplerState:
    """Current latent vector with its cached log-likelihood and counters.

    ``log_lik`` may be None for a freshly constructed state; the first step
    then computes it (and counts the evaluation).
    """

    f: np.ndarray
    log_lik: float | None = None
    lik_evals: int = 0
    prior_evals: int = 0
    iterations: int = 0


@dataclass(frozen=True)
class EllipticalConfig:
    """Options for the slice-based operators.

    ``bracket_width`` in (0, 2*pi] narrows the initial angle bracket below a
    full revolution (a tuning knob that trades likelihood evaluations for
    smaller moves); ``max_shrinks`` bounds the shrink loop, and hitting it is
    an error rather than a silent no-op.
    """

    bracket_width: float = TWO_PI
    max_shrinks: int = 1000

    def __post_init__(self):
        if not (0.0 < self.bracket_width <= TWO_PI + 1e-12):
            raise InvalidConfig(
                f"bracket_width must be in (0, 2*pi], got {self.bracket_width!r}"
            )
        if self.max_shrinks < 1:
            raise InvalidConfig("max_shrinks must be a positive integer")


@dataclass(frozen=True)
class MhConfig:
    """Step size for the Metropolis-Hastings operator."""

    epsilon: float = 0.5

    def __post_init__(self):
        if not abs(self.epsilon) <= 1.0:
            raise InvalidConfig(f"|epsilon| must be <= 1, got {self.epsilon!r}")


@dataclass
class StepResult:
    """One transition: new state plus diagnostics for tests and accounting.

    ``angles`` is the ordered sequence of positions considered (angles on
    the ellipse, step fractions on the line); ``log_threshold`` is the slice
    height log(y), None for Metropolis-Hastings.
    """

    new_state: SamplerState
    accepted: bool
    proposals_considered: int
    angles: list[float] = field(default_factory=list)
    log_threshold: float | None = None


StepFn = Callable[
    [SamplerState, GaussianPrior, "LikelihoodModel", np.random.Generator], StepResult
]


def _eval_log_lik(model: LikelihoodModel, f: np.ndarray) -> float:
    value = float(model.log_lik(f))
    if math.isnan(value):
        raise NonFiniteLikelihood("log-likelihood returned NaN")
    return value


def _cached_log_lik(
    state: SamplerState, model: LikelihoodModel
) -> tuple[float, int]:
    """Current log-likelihood and how many evaluations resolving it cost."""
    if state.log_lik is not None:
        return state.log_lik, 0
    return _eval_log_lik(model, state.f), 1


def _require_finite_start(log_lik: float) -> None:
    if not math.isfinite(log_lik):
        raise ValueError(
            "initial state has zero likelihood (log L = -inf); "
            "start the chain from a point with non-zero likelihood"
        )


def _log_slice_height(log_lik: float, rng: np.random.Generator) -> float:
    u = rng.uniform()
    return log_lik + (math.log(u) if u > 0.0 else -math.inf)


def elliptical_slice_step(
    state: SamplerState,
    prior: GaussianPrior,
    model: LikelihoodModel,
    cfg: EllipticalConfig = EllipticalConfig(),
    rng: np.random.Generator | None = None,
) -> StepResult:
    """One elliptical slice sampling transition.

    Draws nu ~ N(0, cov) to fix an ellipse through the current state, draws
    a log-likelihood threshold uniformly under the current value, then
    proposes angles from a bracket that shrinks toward the current state
    (angle 0) until a proposal clears the threshold. The first proposal's
    angle also sets both bracket edges, so with the default full-width
    bracket the move is de facto parameter-free.

    There are no rejections: the returned ``accepted`` is always True.

    Raises
    ------
    ShrinkLimitExceeded
        After ``cfg.max_shrinks`` shrinks; the slice is numerically empty.
    NonFiniteLikelihood
        If the likelihood returns NaN at a proposal.
    """
    if rng is None:
        raise ValueError("rng is required")
    cur_log_lik, evals = _cached_log_lik(state, model)
    _require_finite_start(cur_log_lik)

    nu = prior.sample(rng)
    log_y = _log_slice_height(cur_log_lik, rng)

    theta = rng.uniform(0.0, cfg.bracket_width)
    theta_min, theta_max = theta - cfg.bracket_width, theta

    angles: list[float] = []
    for _ in range(cfg.max_shrinks + 1):
        angles.append(theta)
        f_prop = state.f * math.cos(theta) + nu * math.sin(theta)
        prop_log_lik = _eval_log_lik(model, f_prop)
        evals += 1
        if prop_log_lik > log_y:
            new_state = SamplerState(
                f=f_prop,
                log_lik=prop_log_lik,
                lik_evals=state.lik_evals + evals,
                prior_evals=state.prior_evals,
                iterations=state.iterations + 1,
            )
            return StepResult(
                new_state=new_state,
                accepted=True,
                proposals_considered=len(angles),
                angles=angles,
                log_threshold=log_y,
            )
        # Shrink the bracket toward the current state and redraw
        if theta < 0.0:
            theta_min = theta
        else:
            theta_max = theta
        assert theta_min <= 0.0 <= theta_max, "bracket lost the current state"
        theta = rng.uniform(theta_min, theta_max)
    raise ShrinkLimitExceeded(
        f"no acceptable point after {cfg.max_shrinks} bracket shrinks"
    )


def elliptical_slice_aux_step(
    state: SamplerState,
    prior: GaussianPrior,
    model: LikelihoodModel,
    rng: np.random.Generator | None = None,
) -> StepResult:
    """The two-stage augmented-model form of the elliptical update.

    Stage one resamples the ellipse parameterization (nu0, nu1, theta)
    holding the current state fixed: theta ~ Uniform[0, 2*pi), nu ~ N(0, cov),
    nu0 = f*sin(theta) + nu*cos(theta), nu1 = f*cos(theta) - nu*sin(theta),
    so that nu0*sin(theta) + nu1*cos(theta) reproduces f exactly. Stage two
    slice-samples the angle against L(nu0*sin + nu1*cos) with the same
    shrink rule as :func:`elliptical_slice_step`, the bracket re-centered at
    the entry angle. Statistically equivalent to the one-stage operator;
    retained so the equivalence is testable.
    """
    if rng is None:
        raise ValueError("rng is required")
    cur_log_lik, evals = _cached_log_lik(state, model)
    _require_finite_start(cur_log_lik)

    theta0 = rng.uniform(0.0, TWO_PI)
    nu = prior.sample(rng)
    sin0, cos0 = math.sin(theta0), math.cos(theta0)
    nu0 = state.f * sin0 + nu * cos0
    nu1 = state.f * cos0 - nu * sin0

    # the current angle theta0 reproduces the current state, so its cached
    # likelihood seeds the slice threshold
    log_y = _log_slice_height(cur_log_lik, rng)

    offset = rng.uniform(0.0, TWO_PI)
    off_min, off_max = offset - TWO_PI, offset

    max_shrinks = EllipticalConfig().max_shrinks
    angles: list[float] = []
    for _ in range(max_shrinks + 1):
        theta = theta0 + offset
        angles.append(theta)
        f_prop = nu0 * math.sin(theta) + nu1 * math.cos(theta)
        prop_log_lik = _eval_log_lik(model, f_prop)
        evals += 1
        if prop_log_lik > log_y:
            new_state = SamplerState(
                f=f_prop,
                log_lik=prop_log_lik,
                lik_evals=state.lik_evals + evals,
                prior_evals=state.prior_evals,
                iterations=state.iterations + 1,
            )
            return StepResult(
                new_state=new_state,
                accepted=True,
                proposals_considered=len(angles),
                angles=angles,
                log_threshold=log_y,
            )
        if offset < 0.0:
            off_min = offset
        else:
            off_max = offset
        assert off_min <= 0.0 <= off_max, "bracket lost the current state"
        offset = rng.uniform(off_min, off_max)
    raise ShrinkLimitExceeded(f"no acceptable point after {max_shrinks} bracket shrinks")


def neal_mh_step(
    state: SamplerState,
    prior: GaussianPrior,
    model: LikelihoodModel,
    cfg: MhConfig = MhConfig(),
    rng: np.random.Generator | None = None,
) -> StepResult:
    """Metropolis-Hastings with proposal sqrt(1-eps^2)*f + eps*nu.

    The proposal leaves the Gaussian prior invariant for any fixed eps in
    [-1, 1] (a prior draw at eps = 1, the current state at eps = 0), so the
    acceptance ratio reduces to the likelihood ratio. On rejection the new
    state is a copy of the current one with counters advanced.
    """
    if rng is None:
        raise ValueError("rng is required")
    cur_log_lik, evals = _cached_log_lik(state, model)
    _require_finite_start(cur_log_lik)

    nu = prior.sample(rng)
    eps = cfg.epsilon
    f_prop = math.sqrt(1.0 - eps * eps) * state.f + eps * nu
    prop_log_lik = _eval_log_lik(model, f_prop)
    evals += 1

    delta = prop_log_lik - cur_log_lik
    accepted = rng.uniform() < math.exp(min(delta, 0.0))
    new_state = SamplerState(
        f=f_prop if accepted else state.f.copy(),
        log_lik=prop_log_lik if accepted else cur_log_lik,
        lik_evals=state.lik_evals + evals,
        prior_evals=state.prior_evals,
        iterations=state.iterations + 1,
    )
    return StepResult(
        new_state=new_state, accepted=accepted, proposals_considered=1
    )


def line_slice_step(
    state: SamplerState,
    prior: GaussianPrior,
    model: LikelihoodModel,
    cfg: EllipticalConfig = EllipticalConfig(),
    rng: np.random.Generator | None = None,
) -> StepResult:
    """Slice sampling along the straight line f + eps*nu.

    The prior density does not cancel along a line the way it does around
    the ellipse, so the slice is taken through the full log posterior and
    every proposal costs a prior log-density evaluation on top of the
    likelihood. The initial bracket of width ``cfg.bracket_width / 2`` is
    positioned uniformly at random around eps = 0 and shrinks toward it.
    """
    if rng is None:
        raise ValueError("rng is required")
    cur_log_lik, evals = _cached_log_lik(state, model)
    _require_finite_start(cur_log_lik)

    nu = prior.sample(rng)
    prior_evals = 1  # current-state prior density seeds the threshold
    log_y = _log_slice_height(prior.log_density(state.f) + cur_log_lik, rng)

    half = 0.5 * cfg.bracket_width
    u = rng.uniform()
    eps_min, eps_max = -half * u, half * (1.0 - u)
    eps = rng.uniform(eps_min, eps_max)

    steps: list[float] = []
    for _ in range(cfg.max_shrinks + 1):
        steps.append(eps)
        f_prop = state.f + eps * nu
        prop_log_lik = _eval_log_lik(model, f_prop)
        evals += 1
        prior_evals += 1
        if prior.log_density(f_prop) + prop_log_lik > log_y:
            new_state = SamplerState(
                f=f_prop,
                log_lik=prop_log_lik,
                lik_evals=state.lik_evals + evals,
                prior_evals=state.prior_evals + prior_evals,
                iterations=state.iterations + 1,
            )
            return StepResult(
                new_state=new_state,
                accepted=True,
                proposals_considered=len(steps),
                angles=steps,
                log_threshold=log_y,
            )
        if eps < 0.0:
            eps_min = eps
        else:
            eps_max = eps
        assert eps_min <= 0.0 <= eps_max, "bracket lost the current state"
        eps = rng.uniform(eps_min, eps_max)
    raise ShrinkLimitExceeded(
        f"no acceptable point after {cfg.max_shrinks} bracket shrinks"
    )


OPERATOR_KINDS = ("elliptical", "elliptical-aux", "neal-mh", "line-slice")


def make_operator(kind: str, **params) -> StepFn:
    """Build a step function from a (kind, parameters) spec.

    Parameters are the matching config fields: ``bracket_width`` and
    ``max_shrinks`` for the slice operators, ``epsilon`` for ``neal-mh``.
    """
    if kind == "elliptical":
        cfg = EllipticalConfig(**params)
        return lambda state, prior, model, rng: elliptical_slice_step(
            state, prior, model, cfg, rng
        )
    if kind == "elliptical-aux":
        if params:
            raise InvalidConfig("elliptical-aux takes no parameters")
        return elliptical_slice_aux_step
    if kind == "neal-mh":
        mh_cfg = MhConfig(**params)
        return lambda state, prior, model, rng: neal_mh_step(
            state, prior, model, mh_cfg, rng
        )
    if kind == "line-slice":
        line_cfg = EllipticalConfig(**params)
        return lambda state, prior, model, rng: line_slice_step(
            state, prior, model, line_cfg, rng
        )
    raise InvalidConfig(f"unknown sampler kind {kind!r}; expected one of {OPERATOR_KINDS}")


def chain_rng(master_seed: int, *stream: int) -> np.random.Generator:
    """Independent, schedule-free RNG stream for (seed, chain/cell indices)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=stream))


def run_chain(
    initial: np.ndarray,
    step_fn: StepFn,
    prior: GaussianPrior,
    model: LikelihoodModel,
    *,
    n_burn: int,
    n_keep: int,
    thin: int = 0,
    rng: np.random.Generator,
) -> ChainTrace:
    """Apply an operator ``n_burn + n_keep`` times and record the kept part.

    Records log-likelihood, cumulative evaluation counts, and the accepted
    flag every kept iteration; snapshots the latent vector every ``thin``
    kept iterations (0 disables snapshots). Operator errors are re-raised as
    :class:`ChainError` carrying the failing iteration index.
    """
    if n_keep < 1:
        raise ValueError("n_keep must be >= 1")
    if n_burn < 0 or thin < 0:
        raise ValueError("n_burn and thin must be non-negative")

    state = SamplerState(f=np.array(initial, dtype=float))
    log_lik = np.empty(n_keep)
    lik_evals = np.empty(n_keep, dtype=np.int64)
    prior_evals = np.empty(n_keep, dtype=np.int64)
    accepted = np.empty(n_keep, dtype=bool)
    snapshots = [] if thin > 0 else None

    start = time.perf_counter()
    for i in range(n_burn + n_keep):
        try:
            result = step_fn(state, prior, model, rng)
        except EllsliceError as exc:
            raise ChainError(i, exc) from exc
        state = result.new_state
        k = i - n_burn
        if k >= 0:
            log_lik[k] = state.log_lik
            lik_evals[k] = state.lik_evals
            prior_evals[k] = state.prior_evals
            accepted[k] = result.accepted
            if snapshots is not None and k % thin == 0:
                snapshots.append(state.f.copy())

    return ChainTrace(
        log_lik=log_lik,
        lik_evals_cum=lik_evals,
        prior_evals_cum=prior_evals,
        accepted=accepted,
        snapshots=np.array(snapshots) if snapshots is not None else None,
        wall_time=time.perf_counter() - start,
    )
