"""Canonical end-to-end runs producing tables and pass/fail checks.

Four named scenarios cover the model's headline behaviours: the linear
dispersion of the free particle, the discrete level spectrum in a synthetic
field, helicity conservation, and the opposite-chirality trajectories of
the two spin orientations.  Each runner consumes a declarative config and
returns columnar tables, a list of checks (each naming the basis its
expected value rests on), and a manifest of the resolved run.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import analyze as an
from . import evolve as ev
from . import fockspace as fs
from . import model as md
from . import probe as pr
from .errors import DomainError
from .evolve import NoiseSpec, TimeGrid
from .fockspace import SingleModeSpec, SpaceSpec
from .model import SimParams

SCENARIO_NAMES = ("dispersion", "landau", "helicity", "trajectory")

# scenario defaults; frequencies in kHz, times in ms
DISPERSION_OMEGA_KHZ = 4.75
LANDAU_OMEGA_KHZ = 4.2
TRAJECTORY_OMEGA_KHZ = 5.0
TAU_D_X_MS = 4.0
TAU_D_Y_MS = 3.5
DEFAULT_SWEEP = (0.59, 1.19, 1.78, 2.38)

PEAK_FRAC_MAIN = 0.15
PEAK_FRAC_FINE = 0.02
INSET_SPAN_MS = 5.0
INSET_SAMPLES = 501
PREDICTOR_TOL = 1e-8
PREDICTOR_N_MAX_FLOOR = 40  # two-mode reference is converged past here
SLOPE_TOL = 0.02
PY_DRIFT_TOL = 1e-6
ANGLE_MEAN_TOL = 0.75  # rad; ideal-run mean deviation is ~0.40
WOBBLE_RMS_MIN = 0.02  # ideal-run radial RMS residual is ~0.20


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    params: SimParams
    space: SpaceSpec
    grid: TimeGrid | None
    sweep: tuple[float, ...] | None = None
    initial_spin: str = "plus_z"
    alpha_x: complex = 0j
    alpha_y: complex = 0j
    noise_on: bool = False

    def __post_init__(self):
        if self.name not in SCENARIO_NAMES:
            raise DomainError(f"unknown scenario {self.name!r}")
        if self.name == "dispersion":
            if not self.sweep:
                raise DomainError("dispersion requires a non-empty sweep")
            if self.params.r != 0:
                raise DomainError("dispersion requires r = 0")
        else:
            if self.sweep is not None:
                raise DomainError("sweep is only meaningful for dispersion")
            if self.params.r <= 0:
                raise DomainError(f"{self.name} requires r > 0")
            if self.grid is None:
                raise DomainError(f"{self.name} requires a time grid")


def default_config(
    name: str, n_max: int | None = None, noise_on: bool | None = None
) -> ScenarioConfig:
    """Resolved defaults for a named scenario."""
    if name == "dispersion":
        noise = bool(noise_on) if noise_on is not None else False
        nm = n_max if n_max is not None else 18
        return ScenarioConfig(
            name=name,
            params=SimParams.from_khz(
                DISPERSION_OMEGA_KHZ,
                r=0.0,
                tau_d_x=TAU_D_X_MS if noise else math.inf,
                tau_d_y=TAU_D_Y_MS if noise else math.inf,
            ),
            space=SpaceSpec(nm, nm),
            grid=None,
            sweep=DEFAULT_SWEEP,
            initial_spin="plus_z",
            noise_on=noise,
        )
    if name == "landau":
        noise = bool(noise_on) if noise_on is not None else True
        nm = n_max if n_max is not None else (10 if noise else 40)
        return ScenarioConfig(
            name=name,
            params=SimParams.from_khz(
                LANDAU_OMEGA_KHZ,
                r=1.0,
                tau_d_x=TAU_D_X_MS if noise else math.inf,
                tau_d_y=TAU_D_Y_MS if noise else math.inf,
            ),
            space=SpaceSpec(nm, nm),
            grid=TimeGrid(0.0, 0.6, 201),
            initial_spin="plus_z",
            alpha_x=1j,
            noise_on=noise,
        )
    if name == "helicity":
        noise = bool(noise_on) if noise_on is not None else False
        nm = n_max if n_max is not None else 15
        return ScenarioConfig(
            name=name,
            params=SimParams.from_khz(
                LANDAU_OMEGA_KHZ,
                r=1.0,
                tau_d_x=TAU_D_X_MS if noise else math.inf,
                tau_d_y=TAU_D_Y_MS if noise else math.inf,
            ),
            space=SpaceSpec(nm, nm),
            grid=TimeGrid(0.0, 0.8, 201),
            initial_spin="plus_x",
            alpha_x=1j,
            noise_on=noise,
        )
    if name == "trajectory":
        noise = bool(noise_on) if noise_on is not None else False
        nm = n_max if n_max is not None else 15
        return ScenarioConfig(
            name=name,
            params=SimParams.from_khz(
                TRAJECTORY_OMEGA_KHZ,
                r=1.0,
                tau_d_x=TAU_D_X_MS if noise else math.inf,
                tau_d_y=TAU_D_Y_MS if noise else math.inf,
            ),
            space=SpaceSpec(nm, nm),
            grid=TimeGrid(0.0, 0.6, 201),
            initial_spin="plus_x",
            alpha_x=1j,
            noise_on=noise,
        )
    raise DomainError(f"unknown scenario {name!r}")


@dataclass(frozen=True)
class Check:
    """One pass/fail comparison with its tolerance and value basis."""

    name: str
    expected: float | str
    actual: float | str
    tolerance: float
    passed: bool
    basis: str  # "analytic" | "identity" | "oracle"


@dataclass
class ScenarioResult:
    name: str
    tables: dict[str, dict[str, np.ndarray]]
    checks: list[Check]
    manifest: dict


def _num_check(name, expected, actual, tol, basis) -> Check:
    return Check(
        name=name,
        expected=float(expected),
        actual=float(actual),
        tolerance=float(tol),
        passed=bool(abs(actual - expected) <= tol),
        basis=basis,
    )


def _cat_check(name, expected, actual, basis) -> Check:
    return Check(
        name=name,
        expected=str(expected),
        actual=str(actual),
        tolerance=0.0,
        passed=bool(str(actual) == str(expected)),
        basis=basis,
    )


def _encode(value):
    if isinstance(value, complex):
        return str(value)
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


def config_dict(cfg: ScenarioConfig) -> dict:
    """JSON-safe dictionary of a fully resolved config."""
    p = cfg.params
    out = {
        "scenario": cfg.name,
        "omega_khz": p.omega / (2 * math.pi),
        "omega_probe_khz": p.omega_probe / (2 * math.pi),
        "r": p.r,
        "tau_d_x_ms": _encode(p.tau_d_x),
        "tau_d_y_ms": _encode(p.tau_d_y),
        "n_max_x": cfg.space.n_max_x,
        "n_max_y": cfg.space.n_max_y,
        "initial_spin": cfg.initial_spin,
        "alpha_x": _encode(complex(cfg.alpha_x)),
        "alpha_y": _encode(complex(cfg.alpha_y)),
        "noise_on": cfg.noise_on,
    }
    if cfg.grid is not None:
        out.update(
            t_start_us=cfg.grid.t_start * 1e3,
            t_end_us=cfg.grid.t_end * 1e3,
            n_samples=cfg.grid.n_samples,
            dt_max_us=cfg.grid.dt_max * 1e3,
        )
    if cfg.sweep is not None:
        out["sweep"] = list(cfg.sweep)
    return out


def _threads() -> int:
    env = os.environ.get("WEYLSIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _finish(name, cfg, tables, checks, started, t0) -> ScenarioResult:
    manifest = {
        "scenario": name,
        "config": config_dict(cfg),
        "version": __version__,
        "started_utc": started,
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "checks_passed": sum(c.passed for c in checks),
        "checks_failed": sum(not c.passed for c in checks),
    }
    return ScenarioResult(name=name, tables=tables, checks=checks, manifest=manifest)


# ---------------------------------------------------------------------------
# dispersion
# ---------------------------------------------------------------------------


def run_dispersion(cfg: ScenarioConfig) -> ScenarioResult:
    """Energy-versus-momentum sweep of the free particle."""
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    sweep = list(cfg.sweep)

    def one(p):
        return pr.measure_energy_slope(p, 0.0, cfg.params, space=cfg.space)

    with ThreadPoolExecutor(max_workers=min(_threads(), len(sweep))) as pool:
        energies = list(pool.map(one, sweep))
    energies = np.array(energies)
    ps = np.array(sweep)

    slope = an.linear_fit_through_origin(ps, energies)
    expected_slope = cfg.params.omega / math.sqrt(2)
    checks = [
        _num_check(
            "dispersion_slope_kHz",
            expected_slope / (2 * math.pi),
            slope / (2 * math.pi),
            SLOPE_TOL * expected_slope / (2 * math.pi),
            "analytic",
        )
    ]
    for p, e in zip(ps, energies):
        if p == 0:
            continue  # a p = 0 row carries no relative residual
        resid = abs(e - slope * p) / (slope * p)
        checks.append(
            _num_check(f"dispersion_residual_p{p:g}", 0.0, resid, SLOPE_TOL, "analytic")
        )

    tables = {
        "dispersion": {
            "p": ps,
            "E_over_2pi(kHz)": energies / (2 * math.pi),
        }
    }
    return _finish("dispersion", cfg, tables, checks, started, t0)


# ---------------------------------------------------------------------------
# landau
# ---------------------------------------------------------------------------


def sigma_z_series_blocked(cfg: ScenarioConfig, grid: TimeGrid) -> np.ndarray:
    """Noiseless spin-z dynamics via the conserved-p_y block split.

    The y-momentum commutes with the Hamiltonian even on the truncated
    space, so a product initial state evolves as a classical mixture over
    p_y eigensectors, each a qubit (x) mode-x problem.  Bit-identical in
    value to dense propagation, at a fraction of the cost.
    """
    dy = cfg.space.n_max_y + 1
    a1 = np.zeros((dy, dy), dtype=complex)
    for n in range(1, dy):
        a1[n - 1, n] = math.sqrt(n)
    py_mat = 1j * (a1.conj().T - a1) / math.sqrt(2)
    py_vals, py_vecs = np.linalg.eigh(py_mat)
    weights = np.abs(py_vecs.conj().T @ fs.coherent_amplitudes(cfg.alpha_y, dy)) ** 2

    sm = SingleModeSpec(cfg.space.n_max_x)
    psi_x = fs.QState(
        "pure",
        np.kron(
            fs.spin_vector(cfg.initial_spin),
            fs.coherent_amplitudes(cfg.alpha_x, cfg.space.n_max_x + 1),
        ),
        sm,
    )
    sz_op = fs.pauli(sm, "z")
    total = np.zeros(grid.n_samples)
    for w, py in zip(weights, py_vals):
        if w < 1e-16:
            continue
        h_k = md.weyl_block_hamiltonian(sm, cfg.params, float(py))
        states = ev.evolve_unitary(h_k, psi_x, grid)
        total += w * ev.observable_series(states, sz_op, grid).values
    return total


def _nearest_peak(peaks, target):
    if not peaks:
        return math.nan, math.nan
    freq, amp = min(peaks, key=lambda fa: abs(fa[0] - target))
    return freq, amp


def _spectrum_tables(series: an.TimeSeries, suffix: str, frac: float):
    spec = an.fourier_spectrum(series, pad_factor=8)
    peaks = an.find_peaks(spec, frac)
    spec = replace(spec, peaks=tuple(peaks))
    tables = {
        "sigma_z" + suffix: {
            "t(us)": series.times * 1e3,
            "sigma_z": series.values,
        },
        "spectrum" + suffix: {"freq(kHz)": spec.freqs, "amp": spec.amps},
        "peaks" + suffix: {
            "freq(kHz)": np.array([f for f, _ in peaks]),
            "amp": np.array([a for _, a in peaks]),
        },
    }
    return spec, peaks, tables


def run_landau(cfg: ScenarioConfig) -> ScenarioResult:
    """Spin dynamics in the synthetic field and their level spectrum."""
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    grid = cfg.grid
    params = cfg.params
    tables: dict = {}
    checks: list[Check] = []

    if cfg.noise_on:
        psi0 = fs.coherent_state(cfg.space, cfg.alpha_x, cfg.alpha_y, cfg.initial_spin)
        h = md.weyl_hamiltonian(cfg.space, params)
        states = ev.evolve_lindblad(h, NoiseSpec.from_params(params), psi0, grid)
        main = ev.observable_series(states, fs.pauli(cfg.space, "z"), grid, "sigma_z")
    else:
        main = an.TimeSeries(grid.times, sigma_z_series_blocked(cfg, grid), "sigma_z")

    spec, peaks, main_tables = _spectrum_tables(main, "", PEAK_FRAC_MAIN)
    tables.update(main_tables)

    for n_level, label in ((1, "peak_n1_kHz"), (2, "peak_n2_kHz")):
        target = 2 * md.landau_level(n_level, params) / (2 * math.pi)
        found, _ = _nearest_peak(peaks, target)
        checks.append(_num_check(label, target, found, spec.resolution, "analytic"))

    if cfg.noise_on:
        by_amp = sorted(an.find_peaks(spec, 0.05), key=lambda fa: -fa[1])[:2]
        got = sorted(f for f, _ in by_amp)
        want = sorted(2 * md.landau_level(n, params) / (2 * math.pi) for n in (1, 2))
        ok = len(got) == 2 and all(
            abs(g - w) <= spec.resolution for g, w in zip(got, want)
        )
        checks.append(
            _cat_check("largest_two_peaks_are_n1_n2", True, ok, "analytic")
        )
    elif min(cfg.space.n_max_x, cfg.space.n_max_y) >= PREDICTOR_N_MAX_FLOOR:
        # cross-check of the analytic single-mode predictor against the
        # two-mode numerics; below the floor the two-mode reference itself
        # is not converged to the tolerance, so the comparison says nothing
        reduced = md.cyclotron_frame_state(
            fs.coherent_state(cfg.space, cfg.alpha_x, cfg.alpha_y, cfg.initial_spin),
            params,
        )
        predicted = an.predict_sigma_z_series(reduced, params, grid)
        dev = float(np.abs(predicted.values - main.values).max())
        checks.append(
            _num_check("predictor_max_dev", 0.0, dev, PREDICTOR_TOL, "analytic")
        )

    # long noiseless record resolving the higher levels
    inset_grid = TimeGrid(0.0, INSET_SPAN_MS, INSET_SAMPLES, grid.dt_max)
    inset = an.TimeSeries(
        inset_grid.times, sigma_z_series_blocked(cfg, inset_grid), "sigma_z_ideal"
    )
    ispec, ipeaks, inset_tables = _spectrum_tables(inset, "_ideal", PEAK_FRAC_FINE)
    tables.update(inset_tables)
    for n_level in (1, 2, 3, 4):
        target = 2 * md.landau_level(n_level, params) / (2 * math.pi)
        found, _ = _nearest_peak(ipeaks, target)
        checks.append(
            _num_check(
                f"inset_peak_n{n_level}_kHz", target, found, ispec.resolution, "analytic"
            )
        )

    return _finish("landau", cfg, tables, checks, started, t0)


# ---------------------------------------------------------------------------
# helicity
# ---------------------------------------------------------------------------


def run_helicity(cfg: ScenarioConfig) -> ScenarioResult:
    """Spin and kinetic-momentum alignment during cyclotron-like motion."""
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    grid = cfg.grid
    psi0 = fs.coherent_state(cfg.space, cfg.alpha_x, cfg.alpha_y, cfg.initial_spin)
    h = md.weyl_hamiltonian(cfg.space, cfg.params)
    if cfg.noise_on:
        states = ev.evolve_lindblad(h, NoiseSpec.from_params(cfg.params), psi0, grid)
    else:
        states = ev.evolve_unitary(h, psi0, grid)

    sx = pr.spin_series(states, "x", grid)
    sy = pr.spin_series(states, "y", grid)
    pix, piy = pr.kinetic_momentum_series(states, cfg.params, grid)
    py_series = ev.observable_series(
        states, fs.quadrature(cfg.space, "y", "momentum"), grid, "p_y"
    )
    az = an.azimuth_pair_series(sx, sy, pix, piy)

    tables = {
        "spin": {"t(us)": grid.times * 1e3, "sigma_x": sx.values, "sigma_y": sy.values},
        "kinetic_momentum": {
            "t(us)": grid.times * 1e3,
            "pi_x": pix.values,
            "pi_y": piy.values,
        },
        "angles": {
            "t(us)": grid.times * 1e3,
            "phi_spin(rad)": az.phi_spin.values,
            "phi_momentum(rad)": az.phi_momentum.values,
        },
        "ratios": {
            "t(us)": grid.times * 1e3,
            "spin_x_over_y": az.ratio_spin,
            "spin_pole": az.poles_spin.astype(float),
            "momentum_x_over_y": az.ratio_momentum,
            "momentum_pole": az.poles_momentum.astype(float),
        },
    }

    checks = [
        _num_check(
            "initial_alignment_rad",
            0.0,
            max(abs(az.phi_spin.values[0]), abs(az.phi_momentum.values[0])),
            1e-9,
            "analytic",
        )
    ]
    if not cfg.noise_on:
        drift = float(np.abs(py_series.values - py_series.values[0]).max())
        checks.append(_num_check("py_conservation", 0.0, drift, PY_DRIFT_TOL, "identity"))
        mean_dev = float(np.mean(np.abs(az.phi_spin.values - az.phi_momentum.values)))
        checks.append(
            _num_check("angle_mean_dev_rad", 0.0, mean_dev, ANGLE_MEAN_TOL, "oracle")
        )
        swept = abs(az.phi_spin.values[-1] - az.phi_spin.values[0])
        checks.append(
            _cat_check("full_rotation_swept", True, swept >= 2 * math.pi, "oracle")
        )
    return _finish("helicity", cfg, tables, checks, started, t0)


# ---------------------------------------------------------------------------
# trajectory
# ---------------------------------------------------------------------------


def _circle_radial_rms(x: np.ndarray, y: np.ndarray) -> float:
    """RMS radial residual of the best algebraic circle fit."""
    design = np.column_stack([x, y, np.ones_like(x)])
    sol, *_ = np.linalg.lstsq(design, x**2 + y**2, rcond=None)
    cx, cy = sol[0] / 2, sol[1] / 2
    radius = math.sqrt(max(sol[2] + cx**2 + cy**2, 0.0))
    rr = np.sqrt((x - cx) ** 2 + (y - cy) ** 2)
    return float(np.sqrt(np.mean((rr - radius) ** 2)))


def run_trajectory(cfg: ScenarioConfig) -> ScenarioResult:
    """Mean-position orbits for the two opposite-helicity preparations."""
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    grid = cfg.grid
    h = md.weyl_hamiltonian(cfg.space, cfg.params)
    x_op = fs.quadrature(cfg.space, "x", "position")
    y_op = fs.quadrature(cfg.space, "y", "position")

    def branch(spin):
        psi0 = fs.coherent_state(cfg.space, cfg.alpha_x, cfg.alpha_y, spin)
        if cfg.noise_on:
            states = ev.evolve_lindblad(
                h, NoiseSpec.from_params(cfg.params), psi0, grid
            )
        else:
            states = ev.evolve_unitary(h, psi0, grid)
        return (
            ev.observable_series(states, x_op, grid, "x"),
            ev.observable_series(states, y_op, grid, "y"),
        )

    with ThreadPoolExecutor(max_workers=min(_threads(), 2)) as pool:
        fut_p = pool.submit(branch, "plus_x")
        fut_m = pool.submit(branch, "minus_x")
        (xp, yp), (xm, ym) = fut_p.result(), fut_m.result()

    tables = {
        "trajectory": {
            "t(us)": grid.times * 1e3,
            "x_plus": xp.values,
            "y_plus": yp.values,
            "x_minus": xm.values,
            "y_minus": ym.values,
        }
    }

    chir_p = an.trajectory_chirality(xp, yp)
    chir_m = an.trajectory_chirality(xm, ym)
    checks = [
        _cat_check("chirality_plus_x", "clockwise", chir_p, "analytic"),
        _cat_check("chirality_minus_x", "counterclockwise", chir_m, "analytic"),
        _cat_check("chirality_flip", True, chir_p != chir_m, "analytic"),
    ]

    # exact initial velocity d<x>/dt(0) = i<[H, x]> = (omega/sqrt(2)) <sigma_x>;
    # the truncated commutator picks up an edge term bounded by
    # (n_max + 1) * (state weight at the edge level), folded into the tolerance
    expected_v = cfg.params.omega / math.sqrt(2)
    comm = 1j * (h @ x_op - x_op @ h)
    for spin, sign, label in (("plus_x", 1.0, "plus"), ("minus_x", -1.0, "minus")):
        psi0 = fs.coherent_state(cfg.space, cfg.alpha_x, cfg.alpha_y, spin)
        vel = fs.expectation(comm, psi0)
        nmx = cfg.space.n_max_x
        p_edge = float(
            np.sum(
                np.abs(
                    psi0.data.reshape(2, nmx + 1, cfg.space.n_max_y + 1)[:, nmx, :]
                )
                ** 2
            )
        )
        tol = expected_v * ((nmx + 1) * p_edge + 1e-9)
        checks.append(
            _num_check(
                f"initial_velocity_{label}", sign * expected_v, vel, tol, "identity"
            )
        )

    n_fit = min(12, grid.n_samples)
    early = slice(0, n_fit)
    vel_p = an.fit_polynomial(
        an.TimeSeries(grid.times[early], xp.values[early]), 3
    ).slope_at_zero
    vel_m = an.fit_polynomial(
        an.TimeSeries(grid.times[early], xm.values[early]), 3
    ).slope_at_zero
    checks.append(
        _cat_check(
            "initial_velocities_opposite",
            True,
            vel_p > 0 and vel_m < 0,
            "analytic",
        )
    )
    if not cfg.noise_on:
        # wobble on top of the circular orbit; an indicator, not a precision
        # value (its magnitude converges slowly with truncation)
        rms = _circle_radial_rms(xp.values, yp.values)
        checks.append(
            _cat_check(
                "orbit_wobble_indicator", True, rms > WOBBLE_RMS_MIN, "oracle"
            )
        )
    return _finish("trajectory", cfg, tables, checks, started, t0)


RUNNERS = {
    "dispersion": run_dispersion,
    "landau": run_landau,
    "helicity": run_helicity,
    "trajectory": run_trajectory,
}
