"""Pseudo-spectral time integration of the rotating 2D vorticity equation.

The evolved unknown is the profile fhat(t) = exp(i beta t xi1/|xi|^2) what(t),
so the linear dispersive term is applied exactly and classical RK4 only sees
the transport nonlinearity. Products are formed in physical space with
2/3-rule dealiasing; the velocity is recovered spectrally from the vorticity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    ConfigurationError,
    Grid2D,
    InputError,
    NormReport,
    Profile,
    RealField2D,
    SpectralField2D,
    besov_norm,
    fhat_sup_weighted,
    l2_norm,
    linf_norm,
    require_mean_zero,
    sobolev_norm,
    transform_forward,
    transform_inverse,
    weighted_profile_norm,
    write_field,
    zero_mean,
)
from .propagator import dispersion_symbol


class StabilityError(RuntimeError):
    """Advective CFL bound violated; carries a suggested time step."""

    def __init__(self, message, suggested_dt):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class BlowUpError(RuntimeError):
    """Sup-norm guard tripped or NaN detected during a run."""


@dataclass
class SimConfig:
    n: int = 128
    box_length: float = 50.0
    beta: float = 1.0
    dt: float = 0.02
    t_end: float = 10.0
    k_energy: int = 4
    output_stride: int = 50
    init: str = "gaussian"
    eps: float = 0.1
    init_width: float = 0.0       # 0 -> box_length / 16
    init_file: str | None = None
    nonlinear: bool = True
    retain_checkpoints: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        if self.t_end < 0:
            raise ConfigurationError("t_end must be >= 0")
        if self.output_stride < 1:
            raise ConfigurationError("output_stride must be >= 1")

    @property
    def grid(self) -> Grid2D:
        return Grid2D(self.n, self.box_length)

    @property
    def width(self) -> float:
        return self.init_width if self.init_width > 0 else self.box_length / 16.0


@dataclass
class SimState:
    t: float
    profile: Profile
    step_count: int = 0


@dataclass
class RunResult:
    config: SimConfig
    reports: list
    checkpoints: list          # (t, Profile) pairs, when retained
    aborted: bool = False
    abort_reason: str = ""


CONFIG_KEYS = {
    "n": int, "L": float, "beta": float, "dt": float, "t_end": float,
    "k_energy": int, "output_stride": int, "init": str, "eps": float,
    "init_width": float, "init_file": str, "nonlinear": lambda s: s.lower() in ("1", "true", "yes"),
}

_KEY_TO_FIELD = {"L": "box_length"}


def parse_config(text: str) -> SimConfig:
    """Flat key=value config (e.g. n=256, L=100.0, beta=1.0, ...)."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        try:
            kwargs[_KEY_TO_FIELD.get(key, key)] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return SimConfig(**kwargs)


# ---------------------------------------------------------------------------
# velocity recovery

_BS_SIGN_CACHE: dict[int, float] = {}


def _biot_savart_components(omega: SpectralField2D, sign: float):
    g = omega.grid
    k1, k2 = g.wavenumbers()
    mag2 = k1 ** 2 + k2 ** 2
    inv = np.zeros_like(mag2)
    nz = mag2 > 0
    inv[nz] = 1.0 / mag2[nz]
    # xi_perp = (-xi2, xi1)
    u1 = sign * 1j * (-k2) * inv * omega.modes
    u2 = sign * 1j * k1 * inv * omega.modes
    return SpectralField2D(g, u1), SpectralField2D(g, u2)


def biot_savart_sign() -> float:
    """Orientation of the velocity recovery, fixed once by requiring the
    discrete curl d1 u2 - d2 u1 to reproduce the vorticity."""
    if 0 not in _BS_SIGN_CACHE:
        g = Grid2D(16, 2.0 * np.pi)
        x = g.x_coords()
        w = RealField2D(g, np.sin(x)[:, None] * np.ones(g.n)[None, :])
        wh = zero_mean(transform_forward(w))
        k1, k2 = g.wavenumbers()
        best, best_err = 1.0, np.inf
        for sign in (1.0, -1.0):
            u1, u2 = _biot_savart_components(wh, sign)
            curl = 1j * k1 * u2.modes - 1j * k2 * u1.modes
            err = float(np.abs(curl - wh.modes).max())
            if err < best_err:
                best, best_err = sign, err
        if best_err > 1e-12:
            raise RuntimeError("curl-consistency oracle failed for both signs")
        _BS_SIGN_CACHE[0] = best
    return _BS_SIGN_CACHE[0]


def biot_savart(omega: SpectralField2D):
    """Divergence-free velocity (u1hat, u2hat) with curl u = omega."""
    require_mean_zero(omega)
    return _biot_savart_components(omega, biot_savart_sign())


# ---------------------------------------------------------------------------
# nonlinearity

def dealias_mask(grid: Grid2D) -> np.ndarray:
    k = np.fft.fftfreq(grid.n) * grid.n          # integer lattice
    keep = np.abs(k) <= (2.0 / 3.0) * (grid.n / 2.0)
    return keep[:, None] & keep[None, :]


def dealias(f: SpectralField2D) -> SpectralField2D:
    return SpectralField2D(f.grid, f.modes * dealias_mask(f.grid))


def nonlinear_term(omega: SpectralField2D) -> SpectralField2D:
    """Spectral coefficients of -u.grad omega, alias-free by the 2/3 rule."""
    require_mean_zero(omega)
    g = omega.grid
    wd = dealias(omega)
    u1h, u2h = biot_savart(wd)
    k1, k2 = g.wavenumbers()
    d1h = SpectralField2D(g, 1j * k1 * wd.modes)
    d2h = SpectralField2D(g, 1j * k2 * wd.modes)
    u1 = transform_inverse(u1h).samples
    u2 = transform_inverse(u2h).samples
    w1 = transform_inverse(d1h).samples
    w2 = transform_inverse(d2h).samples
    advect = transform_forward(RealField2D(g, u1 * w1 + u2 * w2))
    return SpectralField2D(g, -dealias(advect).modes)


def max_speed(omega: SpectralField2D) -> float:
    u1h, u2h = biot_savart(omega)
    u1 = transform_inverse(u1h).samples
    u2 = transform_inverse(u2h).samples
    return float(np.sqrt(u1 ** 2 + u2 ** 2).max())


# ---------------------------------------------------------------------------
# time stepping

def omega_from_profile(profile: Profile, beta: float) -> SpectralField2D:
    sym = dispersion_symbol(profile.field.grid)
    phase = np.exp(-1j * beta * profile.t * sym)
    return SpectralField2D(profile.field.grid, profile.field.modes * phase)


def profile_from_omega(omega: SpectralField2D, t: float, beta: float) -> Profile:
    sym = dispersion_symbol(omega.grid)
    phase = np.exp(+1j * beta * t * sym)
    return Profile(SpectralField2D(omega.grid, omega.modes * phase), t)


def _profile_rhs(fmodes: np.ndarray, s: float, grid: Grid2D, beta: float,
                 nonlinear: bool) -> np.ndarray:
    """d/dt of the profile modes at time s."""
    if not nonlinear:
        return np.zeros_like(fmodes)
    sym = dispersion_symbol(grid)
    omega = SpectralField2D(grid, fmodes * np.exp(-1j * beta * s * sym))
    nl = nonlinear_term(omega)
    return nl.modes * np.exp(+1j * beta * s * sym)


def step(state: SimState, cfg: SimConfig) -> SimState:
    """One classical RK4 step on the profile modes."""
    g = cfg.grid
    t, dt = state.t, cfg.dt
    if cfg.nonlinear:
        omega = omega_from_profile(state.profile, cfg.beta)
        speed = max_speed(omega)
        if speed > 0:
            bound = 0.5 * g.dx / speed
            if dt > bound:
                raise StabilityError(
                    f"dt={dt} violates advective bound {bound:.3e}", suggested_dt=0.5 * bound)
    f0 = state.profile.field.modes
    k1 = _profile_rhs(f0, t, g, cfg.beta, cfg.nonlinear)
    k2 = _profile_rhs(f0 + 0.5 * dt * k1, t + 0.5 * dt, g, cfg.beta, cfg.nonlinear)
    k3 = _profile_rhs(f0 + 0.5 * dt * k2, t + 0.5 * dt, g, cfg.beta, cfg.nonlinear)
    k4 = _profile_rhs(f0 + dt * k3, t + dt, g, cfg.beta, cfg.nonlinear)
    fnew = f0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    fnew[0, 0] = 0.0
    prof = Profile(SpectralField2D(g, fnew), t + dt)
    return SimState(t=t + dt, profile=prof, step_count=state.step_count + 1)


# ---------------------------------------------------------------------------
# initial data

def initial_vorticity(cfg: SimConfig) -> SpectralField2D:
    g = cfg.grid
    x = g.x_coords()
    X, Y = np.meshgrid(x, x, indexing="ij")
    a = cfg.width
    if cfg.init in ("gaussian", "gaussian-vortex"):
        r2 = (X ** 2 + Y ** 2) / (2.0 * a ** 2)
        # mean-zero radial vortex (second radial moment of a Gaussian)
        samples = cfg.eps * (1.0 - r2) * np.exp(-r2)
    elif cfg.init in ("shell", "shell-bump"):
        from .spectral import lp_bump
        mag = g.wavenumber_magnitude()
        modes = cfg.eps * lp_bump(mag)
        return zero_mean(SpectralField2D(g, modes))
    elif cfg.init in ("pair", "vortex-pair"):
        d = 2.0 * a
        rp = ((X - d) ** 2 + Y ** 2) / (2.0 * a ** 2)
        rm = ((X + d) ** 2 + Y ** 2) / (2.0 * a ** 2)
        samples = cfg.eps * (np.exp(-rp) - np.exp(-rm))
    elif cfg.init == "file":
        from .spectral import read_field
        if not cfg.init_file:
            raise ConfigurationError("init=file requires init_file")
        fld = read_field(cfg.init_file)
        wh = transform_forward(fld)
        if abs(wh.mean_mode()) > 1e-10 * max(1.0, float(np.abs(wh.modes).max())):
            raise InputError("field file has nonzero mean vorticity")
        return zero_mean(wh)
    else:
        raise ConfigurationError(f"unknown init descriptor {cfg.init!r}")
    return zero_mean(transform_forward(RealField2D(g, samples)))


# ---------------------------------------------------------------------------
# diagnostics per output and the run driver

def linear_operator_field(omega: SpectralField2D, beta: float = 1.0) -> SpectralField2D:
    """beta L1 omega, with symbol -i beta xi1/|xi|^2."""
    sym = dispersion_symbol(omega.grid)
    return SpectralField2D(omega.grid, -1j * beta * sym * omega.modes)


def velocity_sup_norms(omega: SpectralField2D):
    """(|u|_Linf, |Du|_Linf) with Du the max over the four entries of grad u."""
    g = omega.grid
    u1h, u2h = biot_savart(omega)
    u1 = transform_inverse(u1h).samples
    u2 = transform_inverse(u2h).samples
    u_sup = float(np.sqrt(u1 ** 2 + u2 ** 2).max())
    k1, k2 = g.wavenumbers()
    du_sup = 0.0
    for uh in (u1h, u2h):
        for k in (k1, k2):
            comp = transform_inverse(SpectralField2D(g, 1j * k * uh.modes)).samples
            du_sup = max(du_sup, float(np.abs(comp).max()))
    return u_sup, du_sup


def make_report(state: SimState, cfg: SimConfig) -> NormReport:
    omega = omega_from_profile(state.profile, cfg.beta)
    u_sup, du_sup = velocity_sup_norms(omega)
    warnings: list = []
    return NormReport(
        t=state.t,
        l2=l2_norm(omega),
        hk=sobolev_norm(omega, cfg.k_energy),
        linf_omega=linf_norm(omega),
        linf_u=u_sup,
        linf_du=du_sup,
        besov311=besov_norm(omega, 3.0, 1.0, 1.0),
        weighted2=weighted_profile_norm(state.profile, 2, warnings),
        weighted3=weighted_profile_norm(state.profile, 3, warnings),
        fhat_sup2=fhat_sup_weighted(state.profile),
        warnings=warnings,
    )


def run(cfg: SimConfig, dump_path=None) -> RunResult:
    """Integrate to t_end, emitting a NormReport every output_stride steps.

    Aborts cleanly when |omega|_Linf exceeds 1000x its initial value; on NaN
    the last good state is dumped to dump_path (when given) and the run is
    marked aborted.
    """
    w0 = initial_vorticity(cfg)
    state = SimState(t=0.0, profile=profile_from_omega(w0, 0.0, cfg.beta))
    reports = [make_report(state, cfg)]
    checkpoints = [(0.0, state.profile)] if cfg.retain_checkpoints else []
    linf0 = reports[0].linf_omega
    n_steps = int(round(cfg.t_end / cfg.dt))
    last_good = state
    for i in range(n_steps):
        try:
            state = step(state, cfg)
        except StabilityError as exc:
            return RunResult(cfg, reports, checkpoints, aborted=True,
                             abort_reason=f"stability: {exc} (try dt={exc.suggested_dt:.3e})")
        if not np.all(np.isfinite(state.profile.field.modes)):
            if dump_path is not None:
                write_field(dump_path, transform_inverse(
                    omega_from_profile(last_good.profile, cfg.beta)))
            return RunResult(cfg, reports, checkpoints, aborted=True,
                             abort_reason=f"NaN at step {state.step_count}")
        last_good = state
        if (i + 1) % cfg.output_stride == 0 or i == n_steps - 1:
            rep = make_report(state, cfg)
            reports.append(rep)
            if cfg.retain_checkpoints:
                checkpoints.append((state.t, state.profile))
            if linf0 > 0 and rep.linf_omega > 1e3 * linf0:
                return RunResult(cfg, reports, checkpoints, aborted=True,
                                 abort_reason=f"blow-up guard at t={state.t}")
    return RunResult(cfg, reports, checkpoints)


# ---------------------------------------------------------------------------
# scaling symmetry

def scaling_transform(omega: RealField2D, lam: float) -> RealField2D:
    """lambda^-1 omega(lambda x), sampled by evaluating the trigonometric
    interpolant on the dilated grid."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    g = omega.grid
    if lam > 1.0:
        # reading omega on lambda*box: require the mass to live inside box/lambda
        x = g.x_coords()
        inside = (np.abs(x)[:, None] <= g.box_length / (2.0 * lam)) & \
                 (np.abs(x)[None, :] <= g.box_length / (2.0 * lam))
        total = float(np.sum(omega.samples ** 2))
        if total > 0 and float(np.sum(omega.samples[inside] ** 2)) / total < 0.99:
            raise ValueError("rescaled support does not fit the box")
    wh = transform_forward(omega)
    k = 2.0 * np.pi * np.fft.fftfreq(g.n, d=g.dx)
    x = g.x_coords()
    # separable evaluation of the interpolant at lambda * x
    E = np.exp(1j * np.outer(lam * x, k))        # (n_x, n_k)
    vals = (E @ wh.modes @ E.T) * g.dxi ** 2
    return RealField2D(g, vals.real / lam)
