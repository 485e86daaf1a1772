"""Scenario orchestration: shooting, tracking, classification and fits.

A run evolves prepared initial data, samples a modulation decomposition
on a fixed cadence into a tabular record, and summarizes the record with
least-squares fits and a classification.  Multi-soliton runs are kept on
the unstable threshold by bisection along the exponential directions;
because double precision limits a single shot to a few dozen time units
of instability, long runs re-bisect a small corrective amplitude (built
with the soliton-adapted projection map) on a fixed cadence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlowupError,
    BracketingError,
    FitWindowError,
    IllConditionedError,
    InvalidParameterError,
    OutOfTubeError,
)
from .grid import Grid1D, energy_norm_sq
from .ground_state import GroundStateConsts, ModelParams, compute_constants, eval_Q
from .interaction_ode import OdeState, exact_profile_y, integrate_centers, tau_profile
from .modulation import decompose, diagnostics, soliton_sum, translation_modes
from .solver import FieldState, StepConfig, energy, iterate
from .spectrum import SpectralData, cached_spectral_data

_WIDEN_LIMIT = 64.0
_FATE_GROW_FACTOR = 2.5
_FATE_DECAY_FACTOR = 0.5


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BisectionConfig:
    lo: float = -0.1
    hi: float = 0.1
    max_iter: int = 60
    width_tol: float = 1e-12

    def as_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "max_iter": self.max_iter,
            "width_tol": self.width_tol,
        }


SCENARIOS = (
    "vanishing",
    "single_soliton",
    "two_soliton_shoot",
    "k_soliton_shoot",
    "same_sign_pair",
    "ode_only",
)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run byte for byte."""

    scenario: str
    alpha: float = 1.0
    p: float = 3.0
    domain_half_width: float = 60.0
    dx: float = 0.02
    dt: float = 0.01
    K: int = 0
    signs: tuple[int, ...] = ()
    z0: tuple[float, ...] = ()
    amplitude: float = 0.0
    stable_amplitude: float = 0.0
    bisection: BisectionConfig | None = None
    restart_cadence: float = 25.0
    restart_margin: float = 12.0
    sample_dt: float = 0.5
    t_end: float = 50.0
    t_start: float = 10.0
    theta_fit: float = 1.2
    eigen_half_width: float = 40.0
    eigen_n: int = 8192
    vanish_threshold: float = 1e-4
    tube_radius: float = 0.3
    mu: float | None = None
    kappa: float | None = None
    seed: int = 0
    output_dir: str | None = None
    render_figures: bool = True
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise InvalidParameterError(f"unknown scenario {self.scenario!r}")
        ModelParams(alpha=self.alpha, p=self.p)  # validates positivity/power
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        object.__setattr__(self, "z0", tuple(float(z) for z in self.z0))
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        needs_solitons = self.scenario in (
            "single_soliton",
            "two_soliton_shoot",
            "k_soliton_shoot",
            "same_sign_pair",
            "ode_only",
        )
        if needs_solitons:
            if self.K < 1:
                raise InvalidParameterError(f"{self.scenario} requires K >= 1")
            if len(self.z0) != self.K or len(self.signs) != self.K:
                raise InvalidParameterError("signs and z0 must both have length K")
        if self.scenario.endswith("shoot") and self.bisection is None:
            raise InvalidParameterError(f"{self.scenario} requires a bisection block")
        if self.K > 1 and not all(np.diff(self.z0) > 0):
            raise InvalidParameterError("initial centers must be strictly increasing")

    @property
    def params(self) -> ModelParams:
        return ModelParams(alpha=self.alpha, p=self.p)

    def grid(self) -> Grid1D:
        n = int(round(2.0 * self.domain_half_width / self.dx)) + 1
        return Grid1D(self.domain_half_width, n)

    def step_config(self) -> StepConfig:
        return StepConfig(dt=self.dt, alpha=self.alpha, p=self.p)

    def spectral(self) -> SpectralData:
        return cached_spectral_data(
            self.p, self.alpha, self.eigen_half_width, self.eigen_n
        )

    def as_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "alpha": self.alpha,
            "p": self.p,
            "domain_half_width": self.domain_half_width,
            "dx": self.dx,
            "dt": self.dt,
            "K": self.K,
            "signs": list(self.signs),
            "z0": list(self.z0),
            "amplitude": self.amplitude,
            "stable_amplitude": self.stable_amplitude,
            "bisection": self.bisection.as_dict() if self.bisection else None,
            "restart_cadence": self.restart_cadence,
            "restart_margin": self.restart_margin,
            "sample_dt": self.sample_dt,
            "t_end": self.t_end,
            "t_start": self.t_start,
            "theta_fit": self.theta_fit,
            "eigen_half_width": self.eigen_half_width,
            "eigen_n": self.eigen_n,
            "vanish_threshold": self.vanish_threshold,
            "tube_radius": self.tube_radius,
            "mu": self.mu,
            "kappa": self.kappa,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "render_figures": self.render_figures,
            "snapshot_times": list(self.snapshot_times),
        }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        bis = data.get("bisection")
        if isinstance(bis, dict):
            data["bisection"] = BisectionConfig(**bis)
        return cls(**data)


def timeseries_columns(K: int) -> list[str]:
    cols = ["t"]
    cols += [f"z_{k}" for k in range(1, K + 1)]
    cols += [f"ell_{k}" for k in range(1, K + 1)]
    cols += ["N", "F_minus", "F_plus", "b", "E", "dtu_L2"]
    cols += [f"a_plus_{k}" for k in range(1, K + 1)]
    cols += [f"a_minus_{k}" for k in range(1, K + 1)]
    return cols


@dataclass
class RunRecord:
    """Config echo, sampled rows and a summary reproducible from them."""

    config: RunConfig
    K: int
    columns: list[str]
    rows: np.ndarray
    meta: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def gaps(self) -> np.ndarray:
        """Neighbor center gaps z_{k+1} - z_k, shape (n_rows, K-1)."""
        z = np.stack([self.column(f"z_{k}") for k in range(1, self.K + 1)], axis=1)
        return np.diff(z, axis=1)


# ---------------------------------------------------------------------------
# initial data and the projection map along the exponential directions
# ---------------------------------------------------------------------------


def _symmetrize(w: np.ndarray, parity: str | None) -> np.ndarray:
    # (w -+ w[::-1])/2 is bitwise (anti)palindromic under IEEE rounding,
    # which matters: the evolution amplifies any ulp-level parity defect
    # of a threshold state like e^{nu+ t}
    if parity == "odd":
        return 0.5 * (w - w[::-1])
    if parity == "even":
        return 0.5 * (w + w[::-1])
    return w


def _symmetrize_state(state: FieldState, parity: str | None) -> FieldState:
    if parity is None:
        return state
    return FieldState(
        state.t, _symmetrize(state.u, parity), _symmetrize(state.v, parity), state.grid
    )


@dataclass(frozen=True)
class WPair:
    """Field pair spanning the unstable directions of a soliton family."""

    u: np.ndarray
    v: np.ndarray
    B: np.ndarray
    V: np.ndarray


def _w_system(z, spectral: SpectralData, sigma, grid: Grid1D):
    x = grid.x
    dx = grid.dx
    y_modes = np.stack([s * spectral.y_at(x - zk) for s, zk in zip(sigma, z)])
    t_modes = translation_modes(x, sigma, z, spectral.p)
    basis = np.vstack([y_modes, t_modes])  # 2K rows
    gram_y = dx * (basis @ y_modes.T)  # <basis_j, Y_k>
    gram_t = dx * (basis @ t_modes.T)  # <basis_j, dxQ_k>
    system = np.vstack([gram_t.T, gram_y.T])  # rows: constraints, cols: coeffs
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > 1e8:
        raise IllConditionedError(
            f"mode Gram system is ill-conditioned (cond ~ {cond:.2e}); solitons too close"
        )
    return system, basis


def build_W(
    a,
    z,
    ell,
    spectral: SpectralData,
    *,
    sigma,
    grid: Grid1D,
) -> WPair:
    """Least-degree combination of eigenmodes and translation modes whose
    pair form has prescribed projections a_k on the growing directions and
    none on the translation constraints.

    The velocities `ell` are accepted for interface completeness; the
    projection conditions involve the centers only.  Raises
    IllConditionedError when the mode Gram system is numerically singular
    (solitons too close).
    """
    a = np.asarray(a, dtype=float)
    z = np.asarray(z, dtype=float)
    K = a.size
    if z.shape != (K,):
        raise InvalidParameterError("a and z must have the same length")
    if ell is not None and len(ell) != K:
        raise InvalidParameterError("ell must have length K when given")
    sigma = np.asarray(sigma, dtype=float)
    system, basis = _w_system(z, spectral, sigma, grid)
    rhs = np.concatenate([np.zeros(K), spectral.beta * a])
    coeffs = np.linalg.solve(system, rhs)
    w = coeffs @ basis
    return WPair(u=w, v=spectral.nu_plus * w, B=coeffs[:K], V=coeffs[K:])


def projection_map_matrices(
    z, spectral: SpectralData, *, sigma, grid: Grid1D
) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of the linear maps a -> B(a), a -> V(a).

    B approaches beta times the identity as the spacing grows; V decays
    like exp(-spacing/2).
    """
    z = np.asarray(z, dtype=float)
    K = z.size
    system, _ = _w_system(z, spectral, np.asarray(sigma, float), grid)
    rhs = np.vstack([np.zeros((K, K)), spectral.beta * np.eye(K)])
    coeffs = np.linalg.solve(system, rhs)
    return coeffs[:K, :], coeffs[K:, :]


def multi_soliton_state(config: RunConfig, grid: Grid1D) -> FieldState:
    sigma = np.asarray(config.signs, dtype=float)
    z = np.asarray(config.z0, dtype=float)
    u = soliton_sum(grid.x, sigma, z, config.p)
    return FieldState(t=0.0, u=u, v=grid.zeros(), grid=grid)


def eigenmode_pattern(
    config: RunConfig, grid: Grid1D, spectral: SpectralData, weights
) -> tuple[np.ndarray, np.ndarray]:
    """Sum of shifted signed eigenmodes paired with its growing-velocity part."""
    sigma = np.asarray(config.signs, dtype=float)
    z = np.asarray(config.z0, dtype=float)
    w = np.zeros(grid.n)
    for c, s, zk in zip(weights, sigma, z):
        w += c * s * spectral.y_at(grid.x - zk)
    return w, spectral.nu_plus * w


# ---------------------------------------------------------------------------
# far-field fate detection (cheap, no modulation)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FateProbe:
    """Outcome of evolving until the sup-norm leaves the soliton band."""

    side: int  # +1 grow, -1 decay, 0 survived to the horizon
    t_exit: float
    state: FieldState | None  # surviving state at the horizon when side == 0


def far_field_fate(
    state: FieldState,
    cfg: StepConfig,
    t_horizon: float,
    *,
    check_dt: float = 0.25,
    keep_state: bool = False,
) -> FateProbe:
    qmax = float(eval_Q(cfg.p, 0.0))
    hi = _FATE_GROW_FACTOR * qmax
    lo = _FATE_DECAY_FACTOR * qmax
    check_every = max(1, int(round(check_dt / cfg.dt)))
    n_steps = int(round((t_horizon - state.t) / cfg.dt))
    last = state
    try:
        for k, st in enumerate(iterate(state, cfg), start=1):
            if k % check_every == 0 or k >= n_steps:
                m = float(np.max(np.abs(st.u)))
                if m > hi:
                    return FateProbe(side=1, t_exit=st.t, state=None)
                if m < lo:
                    return FateProbe(side=-1, t_exit=st.t, state=None)
                last = st
            if k >= n_steps:
                break
    except BlowupError as exc:
        return FateProbe(side=1, t_exit=exc.t_last_finite, state=None)
    return FateProbe(side=0, t_exit=t_horizon, state=last if keep_state else None)


# ---------------------------------------------------------------------------
# bisection along one corrective direction
# ---------------------------------------------------------------------------


@dataclass
class BisectionOutcome:
    c: float
    width: float
    survived: bool
    history: list[tuple[float, int]]
    lo: float
    hi: float


def bisect_direction(
    base: FieldState,
    direction: tuple[np.ndarray, np.ndarray],
    cfg: StepConfig,
    lo: float,
    hi: float,
    t_horizon: float,
    *,
    max_iter: int = 60,
    width_tol: float = 0.0,
    accept_survivor: bool = True,
    extend_horizon_to: float | None = None,
) -> BisectionOutcome:
    """Bisect the amplitude along one perturbation direction.

    Endpoint sides are established first (widening the bracket up to a
    factor 64 when both endpoints agree).  With accept_survivor, the first
    trial still inside the soliton band at the horizon is accepted;
    otherwise bisection continues to width_tol, re-running survivors with
    a horizon extended to extend_horizon_to so that every trial classifies.
    """
    du, dv = direction

    def probe(c: float, horizon: float) -> int:
        st = FieldState(base.t, base.u + c * du, base.v + c * dv, base.grid)
        fate = far_field_fate(st, cfg, horizon)
        if fate.side == 0 and not accept_survivor and extend_horizon_to is not None:
            fate = far_field_fate(st, cfg, base.t + extend_horizon_to)
        return fate.side

    history: list[tuple[float, int]] = []

    def classified(c: float) -> int:
        s = probe(c, t_horizon)
        history.append((c, s))
        return s

    side_lo, side_hi = classified(lo), classified(hi)
    width0 = hi - lo
    widen = 2.0
    while side_lo == side_hi and widen <= _WIDEN_LIMIT:
        lo, hi = lo - widen * width0, hi + widen * width0
        side_lo, side_hi = classified(lo), classified(hi)
        widen *= 2.0
    if side_lo == side_hi:
        raise BracketingError(
            f"no sign change in [{lo:.3e}, {hi:.3e}] (both endpoints side {side_lo})"
        )
    if side_lo > side_hi:
        lo, hi = hi, lo  # keep lo on the decay side

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        side = probe(mid, t_horizon)
        history.append((mid, side))
        if side == 0:
            if accept_survivor:
                return BisectionOutcome(
                    c=mid, width=abs(hi - lo), survived=True, history=history, lo=lo, hi=hi
                )
            raise BracketingError("trial survived the extended horizon; widen it")
        if side < 0:
            lo = mid
        else:
            hi = mid
        if abs(hi - lo) <= width_tol:
            break
    mid = 0.5 * (lo + hi)
    return BisectionOutcome(
        c=mid, width=abs(hi - lo), survived=False, history=history, lo=lo, hi=hi
    )


# ---------------------------------------------------------------------------
# tracked evolution
# ---------------------------------------------------------------------------


class Tracker:
    """Accumulates timeseries rows by decomposing states on a cadence."""

    def __init__(self, config: RunConfig, spectral: SpectralData):
        self.config = config
        self.spectral = spectral
        self.sigma = np.asarray(config.signs, dtype=float)
        self.z_warm = np.asarray(config.z0, dtype=float)
        self.rows: list[list[float]] = []
        self.meta: dict = {}

    def sample(self, st: FieldState):
        dec = decompose(
            st,
            self.config.K,
            self.sigma,
            self.z_warm,
            self.spectral,
            tube_radius=self.config.tube_radius,
        )
        self.z_warm = dec.z
        diag = diagnostics(dec, self.config.mu)
        e_val = energy(st, self.config.p)
        dtu = math.sqrt(float(np.dot(st.v, st.v)) * st.grid.dx)
        row = (
            [st.t]
            + dec.z.tolist()
            + dec.ell.tolist()
            + [diag.N, diag.F_minus, diag.F_plus, diag.b, e_val, dtu]
            + dec.a_plus.tolist()
            + dec.a_minus.tolist()
        )
        self.rows.append(row)
        return dec


def _norm_row(st: FieldState, p: float) -> list[float]:
    norm = math.sqrt(energy_norm_sq(st.grid, st.u, st.v))
    dtu = math.sqrt(max(0.0, float(np.dot(st.v, st.v)) * st.grid.dx))
    return [st.t, norm, 0.0, 0.0, 0.0, energy(st, p), dtu]


def _fate_run(
    state: FieldState, config: RunConfig, t_end: float
) -> tuple[list[list[float]], dict]:
    """Untracked run recording only norms and energy; detects blowup/vanishing."""
    cfg = config.step_config()
    rows = [_norm_row(state, config.p)]
    meta: dict = {"blowup": False, "blowup_t": None}
    sample_every = max(1, int(round(config.sample_dt / config.dt)))
    n_steps = int(round((t_end - state.t) / config.dt))
    try:
        for k, st in enumerate(iterate(state, cfg), start=1):
            if k % sample_every == 0:
                rows.append(_norm_row(st, config.p))
            if k >= n_steps:
                break
    except BlowupError as exc:
        meta["blowup"] = True
        meta["blowup_t"] = exc.t_last_finite
    meta["final_state_norm"] = rows[-1][1]
    meta["first_state_norm"] = rows[0][1]
    return rows, meta


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def classify_run(record: RunRecord) -> str:
    """Apply the decision rules to a completed record.

    Returns one of 'blowup', 'vanishing', 'single_soliton',
    'multi_soliton(K)', 'undecided'.
    """
    meta = record.meta
    if meta.get("blowup"):
        return "blowup"
    n = record.column("N")
    if record.K == 0:
        terminal = meta.get("final_state_norm", n[-1])
        if terminal < record.config.vanish_threshold and terminal <= n[0]:
            return "vanishing"
        return "undecided"
    if meta.get("tube_exit_t") is not None:
        post = meta.get("post_exit_classification")
        return post if post else "undecided"
    quarter = max(1, len(n) // 4)
    head, tail = np.median(n[:quarter]), np.median(n[-quarter:])
    n_ok = tail <= 1.2 * head or tail < 0.05 * record.config.tube_radius
    if record.K == 1:
        return "single_soliton" if n_ok else "undecided"
    gaps = record.gaps()
    spacing_ok = bool(np.all(gaps[-1] >= gaps[0]))
    if n_ok and spacing_ok:
        return f"multi_soliton({record.K})"
    return "undecided"


# ---------------------------------------------------------------------------
# least-squares fits
# ---------------------------------------------------------------------------


def _fit_window_mask(t: np.ndarray, config: RunConfig) -> np.ndarray:
    t_min = t[0] + (t[-1] - t[0]) / 3.0
    return t >= t_min


def _log_spaced_subset(t: np.ndarray, mask: np.ndarray, max_points: int = 400) -> np.ndarray:
    idx = np.flatnonzero(mask)
    if idx.size <= max_points:
        return idx
    targets = np.geomspace(t[idx[0]], t[idx[-1]], max_points)
    pick = np.unique(np.searchsorted(t, targets))
    pick = pick[pick < t.size]
    return pick[mask[pick]]


def _slope(xs: np.ndarray, ys: np.ndarray) -> float:
    return float(np.polyfit(xs, ys, 1)[0])


def fit_asymptotics(record: RunRecord) -> dict:
    """Least-squares summaries of one record.

    For multi-soliton records: gap growth against log t, exponential of
    the gap against t, and the residual-norm decay exponent.  For
    norm-tracked records: the exponential decay rate of the norm
    envelope.  Requires at least 50 samples in the fit window.
    """
    t = record.column("t")
    mask = _fit_window_mask(t, record.config)
    if np.count_nonzero(mask) < 50:
        raise FitWindowError(
            f"need >= 50 samples in the fit window, have {int(np.count_nonzero(mask))}"
        )
    idx = _log_spaced_subset(t, mask)
    fits: dict = {"theta_fit": record.config.theta_fit, "window": [float(t[idx[0]]), float(t[idx[-1]])]}

    tw = t[idx]
    if record.K >= 2:
        gaps = record.gaps()[idx]
        slopes_logt = []
        slopes_exp = []
        residual_exponents = []
        for k in range(record.K - 1):
            r = gaps[:, k]
            coeff = np.polyfit(np.log(tw), r, 1)
            slopes_logt.append(float(coeff[0]))
            slopes_exp.append(_slope(tw, np.exp(r)))
            resid = r - np.polyval(coeff, np.log(tw))
            big = np.abs(resid) > 1e-12
            if np.count_nonzero(big) > 10:
                residual_exponents.append(_slope(np.log(tw[big]), np.log(np.abs(resid[big]))))
            else:
                residual_exponents.append(float("nan"))
        fits["gap_vs_logt_slope"] = slopes_logt
        fits["exp_gap_vs_t_slope"] = slopes_exp
        fits["gap_fit_residual_exponent"] = residual_exponents

    n = record.column("N")[idx]
    pos = n > 0
    if np.count_nonzero(pos) > 10:
        fits["logN_vs_logt_slope"] = _slope(np.log(tw[pos]), np.log(n[pos]))
        fits["logN_vs_t_slope"] = _slope(tw[pos], np.log(n[pos]))
        fits["N_times_t_max"] = float(np.max(n[pos] * tw[pos]))
        fits["N_times_t_trend"] = _slope(np.log(tw[pos]), np.log(n[pos] * tw[pos]))
    if record.K == 0:
        fits["envelope_rate"] = envelope_decay_rate(t, record.column("N"))
    return fits


def envelope_decay_rate(t: np.ndarray, norm: np.ndarray, window: float = 8.0) -> float:
    """Exponential decay rate of the norm envelope (sliding maximum).

    The window should cover at least one oscillation period so the
    envelope, not the carrier, is fitted.
    """
    mask = norm > 1e-13
    t, norm = t[mask], norm[mask]
    if t.size < 20:
        raise FitWindowError("too few positive samples for an envelope fit")
    envelope = np.empty_like(norm)
    for i, ti in enumerate(t):
        sel = (t >= ti - window / 2) & (t <= ti + window / 2)
        envelope[i] = np.max(norm[sel])
    interior = (t > t[0] + window) & (t < t[-1] - window)
    if np.count_nonzero(interior) < 10:
        raise FitWindowError("fit window shorter than the envelope window")
    return -_slope(t[interior], np.log(envelope[interior]))


# ---------------------------------------------------------------------------
# threshold shooting (segmented: re-bisect corrective amplitudes on a cadence)
# ---------------------------------------------------------------------------


@dataclass
class ShootResult:
    a_star: float
    record: RunRecord
    endpoint_lo: RunRecord
    endpoint_hi: RunRecord
    history: list[tuple[float, int]]
    segments: list[dict]


def _correction_direction(
    config: RunConfig,
    spectral: SpectralData,
    grid: Grid1D,
    z: np.ndarray,
    pattern: np.ndarray,
    parity: str | None,
) -> tuple[np.ndarray, np.ndarray]:
    wp = build_W(
        pattern, z, np.zeros_like(z), spectral, sigma=np.asarray(config.signs, float), grid=grid
    )
    du = _symmetrize(wp.u, parity)
    return du, spectral.nu_plus * du


def _track_segment(
    state: FieldState,
    t_to: float,
    config: RunConfig,
    tracker: Tracker,
    *,
    include_start: bool,
) -> FieldState:
    """Evolve with modulation sampling on the cadence; returns the end state."""
    cfg = config.step_config()
    sample_every = max(1, int(round(config.sample_dt / config.dt)))
    n_steps = int(round((t_to - state.t) / config.dt))
    if include_start:
        tracker.sample(state)
    last = state
    for k, st in enumerate(iterate(state, cfg), start=1):
        if k % sample_every == 0:
            tracker.sample(st)
            last = st
        if k >= n_steps:
            last = st
            break
    return last


def _shoot_threshold(
    config: RunConfig,
    *,
    pattern: np.ndarray,
    parity: str | None,
    pure_first_stage: bool,
) -> ShootResult:
    """Bisect onto the unstable threshold and track it to t_end.

    Stage 0 bisects the amplitude of the prescribed eigenmode pattern on
    the prepared template.  Because the bracket resolution is amplified
    like e^{nu+ t}, the tracked run is renewed on the restart cadence:
    at each restart a small correction along the projection-map direction
    is bisected so the next segment survives inside the soliton band.
    """
    grid = config.grid()
    spectral = config.spectral()
    cfg = config.step_config()
    bis = config.bisection
    assert bis is not None

    base = multi_soliton_state(config, grid)
    if config.stable_amplitude:
        contracting = np.zeros(grid.n)
        for c, s, zk in zip(pattern, config.signs, config.z0):
            contracting += c * s * spectral.y_at(grid.x - zk)
        contracting = _symmetrize(contracting, parity)
        base = FieldState(
            0.0,
            base.u + config.stable_amplitude * contracting,
            base.v + config.stable_amplitude * spectral.nu_minus * contracting,
            grid,
        )

    du0, dv0 = eigenmode_pattern(config, grid, spectral, pattern)
    du0 = _symmetrize(du0, parity)
    dv0 = spectral.nu_plus * du0

    # survivors must outlive the tracked horizon by this much: the residual
    # instability at the horizon is then ~ e^{-12} of the band size, below
    # the discretization floor of the tracked diagnostics
    margin = config.restart_margin / spectral.nu_plus
    horizon0 = min(config.restart_cadence, config.t_end)
    outcome = bisect_direction(
        base,
        (du0, dv0),
        cfg,
        bis.lo,
        bis.hi,
        horizon0 + margin,
        max_iter=bis.max_iter,
        # in survivor mode the width must keep halving until a trial
        # outlives the horizon; a width floor would truncate too early
        width_tol=bis.width_tol if pure_first_stage else 0.0,
        accept_survivor=not pure_first_stage,
        extend_horizon_to=4.0 * config.restart_cadence if pure_first_stage else None,
    )
    a_star = outcome.c
    history = list(outcome.history)
    segments = [{"t": 0.0, "c": a_star, "width": outcome.width}]

    endpoint_lo = _endpoint_record(config, base, (du0, dv0), bis.lo, grid)
    endpoint_hi = _endpoint_record(config, base, (du0, dv0), bis.hi, grid)

    tracker = Tracker(config, spectral)
    state = _symmetrize_state(
        FieldState(0.0, base.u + a_star * du0, base.v + a_star * dv0, grid), parity
    )
    meta: dict = {"blowup": False, "blowup_t": None, "tube_exit_t": None}
    t_now = 0.0
    include_start = True
    # a width-tol first stage leaves a residual offset that e^{nu+ t}
    # amplifies past the band within one cadence; renew immediately
    needs_renewal = pure_first_stage
    while t_now < config.t_end:
        seg_horizon = min(t_now + config.restart_cadence, config.t_end)
        if needs_renewal:
            z_now = tracker.z_warm if tracker.rows else np.asarray(config.z0, float)
            if tracker.rows:
                a_now = np.array(tracker.rows[-1][-2 * config.K : -config.K])
                scale = max(1e-4, 8.0 * float(np.max(np.abs(a_now))))
            else:
                scale = max(1e-4, 8.0 * abs(outcome.width))
            direction = _correction_direction(config, spectral, grid, z_now, pattern, parity)
            seg = bisect_direction(
                state,
                direction,
                cfg,
                -scale,
                scale,
                seg_horizon + margin,
                max_iter=bis.max_iter,
                width_tol=0.0,
                accept_survivor=True,
            )
            history.extend(seg.history)
            segments.append({"t": state.t, "c": seg.c, "width": seg.width})
            state = _symmetrize_state(
                FieldState(
                    state.t, state.u + seg.c * direction[0], state.v + seg.c * direction[1], grid
                ),
                parity,
            )
        state = _track_segment(state, seg_horizon, config, tracker, include_start=include_start)
        include_start = False
        needs_renewal = True
        t_now = seg_horizon

    rows = np.array(tracker.rows)
    meta["final_state_norm"] = math.sqrt(energy_norm_sq(grid, state.u, state.v))
    meta["segments"] = segments
    record = RunRecord(
        config=config, K=config.K, columns=timeseries_columns(config.K), rows=rows, meta=meta
    )
    return ShootResult(
        a_star=a_star,
        record=record,
        endpoint_lo=endpoint_lo,
        endpoint_hi=endpoint_hi,
        history=history,
        segments=segments,
    )


def _endpoint_record(
    config: RunConfig,
    base: FieldState,
    direction: tuple[np.ndarray, np.ndarray],
    c: float,
    grid: Grid1D,
) -> RunRecord:
    """Untracked fate run validating one original bracket endpoint."""
    du, dv = direction
    st = FieldState(0.0, base.u + c * du, base.v + c * dv, grid)
    horizon = min(config.t_end, 40.0)
    rows, meta = _fate_run(st, config, horizon)
    rec = RunRecord(
        config=config, K=0, columns=timeseries_columns(0), rows=np.array(rows), meta=meta
    )
    rec.summary = {"classification": classify_run(rec), "endpoint_amplitude": c}
    return rec


def shoot_single(config: RunConfig) -> ShootResult:
    """One-soliton dichotomy: bisect the eigenmode amplitude to width_tol."""
    if config.K != 1:
        raise InvalidParameterError("shoot_single requires K = 1")
    return _shoot_threshold(
        config, pattern=np.ones(1), parity=None, pure_first_stage=True
    )


def shoot_two_soliton(config: RunConfig) -> ShootResult:
    """Odd-reduced two-soliton shooting with alternating signs."""
    if config.K != 2:
        raise InvalidParameterError("shoot_two_soliton requires K = 2")
    if config.signs[0] == config.signs[1]:
        raise InvalidParameterError("two-soliton shooting requires alternating signs")
    if abs(config.z0[0] + config.z0[1]) > 1e-12:
        raise InvalidParameterError("odd reduction requires centers -z, +z")
    return _shoot_threshold(
        config, pattern=np.ones(2), parity="odd", pure_first_stage=False
    )


def shoot_k_soliton(config: RunConfig) -> ShootResult:
    """Even-reduced three-soliton shooting.

    Even symmetry ties the outer pair of unstable amplitudes but leaves
    the middle soliton's amplitude free, so two corrective directions are
    interleaved: whichever band-exit fires is attributed to the louder
    direction and that bracket is refined.  Implemented for K = 3.
    """
    if config.K != 3:
        raise InvalidParameterError("k_soliton_shoot is implemented for K = 3")
    signs = config.signs
    if not (signs[0] == signs[2] == -signs[1]):
        raise InvalidParameterError("three-soliton shooting requires alternating signs")
    if abs(config.z0[0] + config.z0[2]) > 1e-12 or abs(config.z0[1]) > 1e-12:
        raise InvalidParameterError("even reduction requires centers -z, 0, +z")

    grid = config.grid()
    spectral = config.spectral()
    cfg = config.step_config()
    bis = config.bisection
    assert bis is not None

    base = _symmetrize_state(multi_soliton_state(config, grid), "even")
    outer = np.array([1.0, 0.0, 1.0])
    inner = np.array([0.0, 1.0, 0.0])

    def directions(z):
        d_out = _correction_direction(config, spectral, grid, z, outer, "even")
        d_in = _correction_direction(config, spectral, grid, z, inner, "even")
        return d_out, d_in

    z_now = np.asarray(config.z0, dtype=float)
    state = base
    t_now = 0.0
    history: list[tuple[float, int]] = []
    segments: list[dict] = []
    tracker = Tracker(config, spectral)
    include_start = True
    a_star = None
    margin = config.restart_margin / spectral.nu_plus
    while t_now < config.t_end:
        seg_horizon = min(t_now + config.restart_cadence, config.t_end)
        d_out, d_in = directions(z_now)
        c_out, c_in = _joint_bisect(
            state,
            (d_out, d_in),
            cfg,
            bis,
            seg_horizon + margin,
            history,
            z_now,
            required_until=seg_horizon,
        )
        if a_star is None:
            a_star = c_out
        segments.append({"t": t_now, "c_outer": c_out, "c_inner": c_in})
        state = _symmetrize_state(
            FieldState(
                state.t,
                state.u + c_out * d_out[0] + c_in * d_in[0],
                state.v + c_out * d_out[1] + c_in * d_in[1],
                grid,
            ),
            "even",
        )
        state = _track_segment(state, seg_horizon, config, tracker, include_start=include_start)
        include_start = False
        z_now = tracker.z_warm
        t_now = seg_horizon

    rows = np.array(tracker.rows)
    meta = {
        "blowup": False,
        "blowup_t": None,
        "tube_exit_t": None,
        "final_state_norm": math.sqrt(energy_norm_sq(grid, state.u, state.v)),
        "segments": segments,
    }
    record = RunRecord(
        config=config, K=config.K, columns=timeseries_columns(config.K), rows=rows, meta=meta
    )
    endpoint = _endpoint_record(config, base, directions(np.asarray(config.z0, float))[0], bis.hi, grid)
    endpoint_lo = _endpoint_record(config, base, directions(np.asarray(config.z0, float))[0], bis.lo, grid)
    return ShootResult(
        a_star=float(a_star),
        record=record,
        endpoint_lo=endpoint_lo,
        endpoint_hi=endpoint,
        history=history,
        segments=segments,
    )


def _local_amp_fate(
    state: FieldState, cfg: StepConfig, t_horizon: float, centers: np.ndarray
) -> tuple[int, int, float]:
    """Fate probe attributing the band exit to the soliton region that fired.

    Returns (side, region index, exit time); side 0 means survival, with
    region index -1.
    """
    qmax = float(eval_Q(cfg.p, 0.0))
    hi, lo = _FATE_GROW_FACTOR * qmax, _FATE_DECAY_FACTOR * qmax
    x = state.grid.x
    windows = [np.abs(x - zk) < 3.0 for zk in centers]
    check_every = max(1, int(round(0.25 / cfg.dt)))
    n_steps = int(round((t_horizon - state.t) / cfg.dt))
    try:
        for k, st in enumerate(iterate(state, cfg), start=1):
            if k % check_every == 0 or k >= n_steps:
                amps = np.array([float(np.max(np.abs(st.u[w]))) for w in windows])
                worst = int(np.argmax(np.abs(np.log(np.maximum(amps, 1e-12) / qmax))))
                if amps[worst] > hi:
                    return 1, worst, st.t
                if amps[worst] < lo:
                    return -1, worst, st.t
            if k >= n_steps:
                break
    except BlowupError as exc:
        return 1, -1, exc.t_last_finite
    return 0, -1, t_horizon


def _joint_bisect(
    state, directions, cfg, bis, horizon, history, centers, required_until=None
) -> tuple[float, float]:
    """Bisect two corrective amplitudes (outer pair, middle) until survival.

    Each failed trial refines the bracket of the coordinate whose soliton
    region left the band: the outer solitons answer for the tied outer
    amplitude, the middle one for its own.  An untraceable exit (blowup
    past all regions) refines the coordinate adjusted least recently.
    Near threshold the modes mix and the attribution degrades; if the
    budget runs out, the longest-surviving trial is accepted as long as
    it outlives required_until (the tracked span without margin).
    """
    (du_o, dv_o), (du_i, dv_i) = directions
    width0 = bis.hi - bis.lo
    coords = {
        name: {"lo": bis.lo, "hi": bis.hi, "seen": set(), "grow": width0}
        for name in ("outer", "inner")
    }
    c = {name: 0.5 * (bis.lo + bis.hi) for name in ("outer", "inner")}
    last_refined = "inner"
    best = {"t_exit": -np.inf, "c": None}
    for _ in range(4 * bis.max_iter):
        u = state.u + c["outer"] * du_o + c["inner"] * du_i
        v = state.v + c["outer"] * dv_o + c["inner"] * dv_i
        side, region, t_exit = _local_amp_fate(
            FieldState(state.t, u, v, state.grid), cfg, horizon, centers
        )
        history.append((c["outer"], side))
        if side == 0:
            return c["outer"], c["inner"]
        if t_exit > best["t_exit"]:
            best = {"t_exit": t_exit, "c": (c["outer"], c["inner"])}
        if region == 1:
            which = "inner"
        elif region in (0, 2):
            which = "outer"
        else:
            which = "inner" if last_refined == "outer" else "outer"
        # near threshold the unstable modes mix regions: once the attributed
        # bracket is exhausted to float resolution, the information belongs
        # to the other coordinate
        chosen = coords[which]
        if chosen["hi"] - chosen["lo"] < 1e-14 * max(1.0, abs(chosen["hi"])):
            which = "inner" if which == "outer" else "outer"
        co = coords[which]
        co["seen"].add(side)
        if side < 0:
            co["lo"] = c[which]
            if 1 not in co["seen"]:
                # threshold not yet bracketed above: explore upward
                co["hi"] = co["hi"] + co["grow"]
                co["grow"] *= 2.0
        else:
            co["hi"] = c[which]
            if -1 not in co["seen"]:
                co["lo"] = co["lo"] - co["grow"]
                co["grow"] *= 2.0
        if co["grow"] > _WIDEN_LIMIT * width0:
            raise BracketingError(
                f"{which} corrective amplitude not bracketed within "
                f"{_WIDEN_LIMIT} times the configured range"
            )
        c[which] = 0.5 * (co["lo"] + co["hi"])
        last_refined = which
    if required_until is not None and best["t_exit"] >= required_until:
        return best["c"]
    raise BracketingError("joint bisection exhausted its iteration budget")


# ---------------------------------------------------------------------------
# probes and plain scenarios
# ---------------------------------------------------------------------------


def same_sign_probe(config: RunConfig) -> RunRecord:
    """Track an equal-sign pair: the spacing shrinks until the tube exits,
    after which the post-exit fate is recorded qualitatively."""
    if config.K != 2 or config.signs[0] != config.signs[1]:
        raise InvalidParameterError("same_sign_probe requires two equal signs")
    grid = config.grid()
    spectral = config.spectral()
    cfg = config.step_config()
    state = multi_soliton_state(config, grid)
    tracker = Tracker(config, spectral)
    meta: dict = {"blowup": False, "blowup_t": None, "tube_exit_t": None}
    sample_every = max(1, int(round(config.sample_dt / config.dt)))
    n_steps = int(round(config.t_end / config.dt))
    tracker.sample(state)
    last_good = state
    try:
        for k, st in enumerate(iterate(state, cfg), start=1):
            if k % sample_every == 0:
                tracker.sample(st)  # raises once the pair leaves the tube
                last_good = st
            if k >= n_steps:
                last_good = st
                break
    except (OutOfTubeError, IllConditionedError) as exc:
        meta["tube_exit_t"] = getattr(exc, "t", None) or float(last_good.t)
        meta["tube_exit_reason"] = str(exc)
        fate = far_field_fate(last_good, cfg, last_good.t + 40.0)
        meta["post_exit_classification"] = {1: "blowup", -1: "vanishing", 0: "undecided"}[
            fate.side
        ]
    except BlowupError as exc:
        meta["blowup"] = True
        meta["blowup_t"] = exc.t_last_finite
    meta["final_state_norm"] = math.sqrt(energy_norm_sq(grid, last_good.u, last_good.v))
    rows = np.array(tracker.rows)
    record = RunRecord(
        config=config, K=config.K, columns=timeseries_columns(config.K), rows=rows, meta=meta
    )
    return record


def vanishing_run(config: RunConfig) -> RunRecord:
    """Small-data run recording norms only."""
    grid = config.grid()
    amp = config.amplitude if config.amplitude else 0.1
    u = amp * eval_Q(config.p, grid.x)
    state = FieldState(0.0, u, grid.zeros(), grid)
    rows, meta = _fate_run(state, config, config.t_end)
    return RunRecord(
        config=config, K=0, columns=timeseries_columns(0), rows=np.array(rows), meta=meta
    )


def single_soliton_run(config: RunConfig) -> RunRecord:
    """Track one soliton, optionally nudged along its eigenmode pair."""
    grid = config.grid()
    spectral = config.spectral()
    state = multi_soliton_state(config, grid)
    if config.amplitude:
        du, dv = eigenmode_pattern(config, grid, spectral, np.ones(config.K))
        state = FieldState(0.0, state.u + config.amplitude * du, state.v + config.amplitude * dv, grid)
    if config.stable_amplitude:
        w = np.zeros(grid.n)
        for s, zk in zip(config.signs, config.z0):
            w += s * spectral.y_at(grid.x - zk)
        state = FieldState(
            0.0,
            state.u + config.stable_amplitude * w,
            state.v + config.stable_amplitude * spectral.nu_minus * w,
            grid,
        )
    tracker = Tracker(config, spectral)
    meta: dict = {"blowup": False, "blowup_t": None, "tube_exit_t": None}
    try:
        end = _track_segment(state, config.t_end, config, tracker, include_start=True)
        meta["final_state_norm"] = math.sqrt(energy_norm_sq(grid, end.u, end.v))
    except (OutOfTubeError, IllConditionedError) as exc:
        meta["tube_exit_t"] = getattr(exc, "t", None)
        meta["tube_exit_reason"] = str(exc)
    except BlowupError as exc:
        meta["blowup"] = True
        meta["blowup_t"] = exc.t_last_finite
    return RunRecord(
        config=config,
        K=config.K,
        columns=timeseries_columns(config.K),
        rows=np.array(tracker.rows),
        meta=meta,
    )


def ode_only_run(config: RunConfig, consts: GroundStateConsts) -> RunRecord:
    """Center-system integration emitted in the common record schema."""
    kappa = config.kappa if config.kappa else consts.kappa
    K = config.K
    if config.z0:
        y0 = OdeState(t=config.t_start, y=np.asarray(config.z0, dtype=float))
    else:
        profile = tau_profile(K, config.alpha, kappa)
        y0 = OdeState(t=config.t_start, y=exact_profile_y(config.t_start, profile))
    ts, ys = integrate_centers(
        y0, config.t_end, alpha=config.alpha, kappa=kappa, n_samples=512
    )
    sigma = np.asarray(config.signs, dtype=float)
    rows = []
    c1k = consts.c_1 * consts.kappa
    for t, y in zip(ts, ys):
        gaps = np.diff(y)
        same = sigma[:-1] == sigma[1:]
        f_plus = float(np.sum(np.exp(-gaps)[same]))
        f_minus = float(np.sum(np.exp(-gaps)[~same]))
        e_val = K * consts.E_Q - c1k * f_plus + c1k * f_minus
        rows.append(
            [t]
            + y.tolist()
            + [0.0] * K
            + [0.0, f_minus, f_plus, 0.0, e_val, 0.0]
            + [0.0] * (2 * K)
        )
    meta = {"blowup": False, "blowup_t": None, "tube_exit_t": None, "kappa": kappa}
    return RunRecord(
        config=config, K=K, columns=timeseries_columns(K), rows=np.array(rows), meta=meta
    )


# ---------------------------------------------------------------------------
# top-level orchestration
# ---------------------------------------------------------------------------


def run_scenario(config: RunConfig) -> RunRecord:
    """Dispatch a configured scenario, summarize it, optionally persist it."""
    consts = compute_constants(config.params)
    shoot: ShootResult | None = None
    if config.scenario == "vanishing":
        record = vanishing_run(config)
    elif config.scenario == "single_soliton":
        record = single_soliton_run(config)
    elif config.scenario == "two_soliton_shoot":
        shoot = shoot_two_soliton(config)
        record = shoot.record
    elif config.scenario == "k_soliton_shoot":
        shoot = shoot_k_soliton(config)
        record = shoot.record
    elif config.scenario == "same_sign_pair":
        record = same_sign_probe(config)
    elif config.scenario == "ode_only":
        record = ode_only_run(config, consts)
    else:  # pragma: no cover - guarded in RunConfig
        raise InvalidParameterError(config.scenario)

    record.summary = summarize(record, consts)
    if shoot is not None:
        record.summary["a_star"] = shoot.a_star
        record.summary["segments"] = shoot.segments
        record.summary["endpoint_lo"] = shoot.endpoint_lo.summary
        record.summary["endpoint_hi"] = shoot.endpoint_hi.summary

    if config.output_dir:
        from . import reporting

        reporting.write_run(record, config.output_dir)
        if config.render_figures:
            reporting.render_figures(record, config.output_dir)
    return record


def summarize(record: RunRecord, consts: GroundStateConsts) -> dict:
    """Classification, fits and measured limits, recomputable from the rows."""
    summary: dict = {
        "classification": classify_run(record),
        "constants_used": {
            "c_Q": consts.c_Q,
            "c_1": consts.c_1,
            "kappa": consts.kappa,
            "E_Q": consts.E_Q,
        },
        "thresholds": {
            "vanish_threshold": record.config.vanish_threshold,
            "tube_radius": record.config.tube_radius,
        },
        "tube_exit_t": record.meta.get("tube_exit_t"),
        "blowup_t": record.meta.get("blowup_t"),
    }
    try:
        summary["fits"] = fit_asymptotics(record)
    except FitWindowError as exc:
        summary["fits"] = {"error": str(exc)}
    if record.K >= 1 and record.rows.size:
        summary["ell_limit"] = record.rows[-1, record.columns.index("z_1")]
    if record.K >= 2 and record.rows.size:
        alpha = record.config.alpha
        kappa = record.meta.get("kappa", consts.kappa)
        profile = tau_profile(record.K, alpha, kappa)
        t = record.column("t")
        mask = _fit_window_mask(t, record.config)
        z = np.stack([record.column(f"z_{k}") for k in range(1, record.K + 1)], axis=1)
        ybar = np.stack([exact_profile_y(ti, profile) for ti in t[mask]])
        summary["y_sharp"] = float(np.mean(z[mask] - ybar))
    return summary
