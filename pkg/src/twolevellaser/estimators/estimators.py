"""Statistical estimates of field observables from simulated ensembles.

Estimators accept either recorded trajectories (an Ensemble) or the
streaming sums of a simulate_moments run; trajectories are folded into the
same sums first.

Field trajectories only carry normally ordered information. Wherever an
antinormally ordered factor <b b^dagger> is needed it is taken as
(gamma_c / kappa) n_b with n_b from the population steady state.
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from ..models.results import (
    Comparison,
    ComparisonReport,
    CorrelationEstimate,
    EnsembleMoments,
    SpectrumEstimate,
)
from ..models.spec import LaserParams, RunConfig, SimConfig
from ..models.state import Ensemble
from ..simulation.accumulators import MomentPlan, StreamingMoments, lag_key
from ..simulation.langevin import recorded_times
from ..simulation.population import ode_steady_state
from ..theory import analytics
from ..theory.analytics import photon_ratio
from ..theory.model import classify_regime
from .statistics import BatchMeans, pooled_batch_means

logger = logging.getLogger(__name__)

BATCH_RELAXATION_TIMES = 10.0
TAPER_FRACTION = 0.01
COVERAGE_FRACTION = 0.01

FieldSamples = Union[Ensemble, StreamingMoments]


class InsufficientLagCoverage(ValueError):
    """The correlation has not decayed inside the lag window."""

    def __init__(self, message: str, required_max_lag: float):
        self.required_max_lag = required_max_lag
        super().__init__(f"{message}; try max_lag >= {required_max_lag:.4g}")


class PhotonVarianceEstimate(NamedTuple):
    value: float
    se: float


class QuadratureEstimate(NamedTuple):
    var_plus: float
    var_minus: float
    se_plus: float
    se_minus: float


def batch_size_for(sample_dt: float, params: LaserParams) -> int:
    """Samples per batch covering ten correlation times, 10 / min(kappa, eta)."""
    length = BATCH_RELAXATION_TIMES / min(params.kappa, params.eta)
    return max(1, int(math.ceil(length / sample_dt - 1e-9)))


def default_taper_rate(params: LaserParams) -> float:
    return TAPER_FRACTION * min(params.kappa, params.eta)


def lag_steps_for(max_lag: float, n_lags: int, sample_dt: float) -> np.ndarray:
    """Requested lags rounded to whole recorded samples, without repeats."""
    if n_lags < 2:
        raise ValueError("n_lags must be >= 2")
    return np.unique(np.rint(np.linspace(0.0, max_lag, n_lags) / sample_dt).astype(int))


def _check_max_lag(t_last: float, burn_in: float, max_lag: float) -> None:
    available = (t_last - burn_in) / 2.0
    if max_lag > available * (1 + 1e-9):
        raise ValueError(
            f"max_lag ({max_lag:.4g}) exceeds half the stationary window ({available:.4g})"
        )


def moment_plan(
    sim: SimConfig,
    params: LaserParams,
    max_lag: Optional[float] = None,
    n_lags: Optional[int] = None,
    t0: float = 0.0,
) -> MomentPlan:
    """Accumulation plan for a streamed run, including the correlation lags."""
    t = recorded_times(sim, t0)
    sample_dt = float(t[1] - t[0])
    lags: Sequence[int] = ()
    if max_lag is not None:
        _check_max_lag(float(t[-1]), sim.burn_in, max_lag)
        lags = lag_steps_for(max_lag, n_lags if n_lags is not None else 2, sample_dt)
    return MomentPlan.build(t, sim.burn_in, batch_size_for(sample_dt, params), lags)


def _grid(source: FieldSamples) -> tuple[float, float]:
    """(sample spacing, last sample time)."""
    if isinstance(source, StreamingMoments):
        return source.plan.sample_dt, source.plan.t_last
    return source.sample_dt, float(source.t[-1])


def _accumulated(
    source: FieldSamples, burn_in: float, params: LaserParams, lags: Sequence[int] = ()
) -> StreamingMoments:
    if isinstance(source, StreamingMoments):
        plan = source.plan
        if not math.isclose(plan.burn_in, burn_in, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(
                f"moments were accumulated with burn_in {plan.burn_in:.4g}, not {burn_in:.4g}"
            )
        missing = sorted(set(int(k) for k in lags) - set(plan.lag_steps))
        if missing:
            raise ValueError(f"lags {missing} (in samples) were not accumulated")
        return source
    plan = MomentPlan.build(source.t, burn_in, batch_size_for(source.sample_dt, params), lags)
    return StreamingMoments.from_ensemble(source, plan)


def _stats(moments: StreamingMoments, key: str, lag: int = 0) -> BatchMeans:
    count, batch, _ = moments.plan.layout(lag)
    return pooled_batch_means(
        moments.totals[key], moments.squares[key], count, moments.batches[key], batch
    )


def estimate_moments(source: FieldSamples, burn_in: float, params: LaserParams) -> EnsembleMoments:
    """Time-and-ensemble averages of b, |b|^2, |b|^4 and |m|^2 after burn_in."""
    moments = _accumulated(source, burn_in, params)
    stats_b = _stats(moments, "b")
    stats_b2 = _stats(moments, "abs_b2")
    stats_b4 = _stats(moments, "abs_b4")
    stats_m2 = _stats(moments, "abs_m2")

    return EnsembleMoments(
        mean_b=stats_b.mean,
        e_abs_b2=stats_b2.mean.real,
        e_abs_b4=stats_b4.mean.real,
        e_abs_m2=stats_m2.mean.real,
        n_eff=stats_b2.n_eff,
        se_mean_b=stats_b.se,
        se_abs_b2=stats_b2.se,
        se_abs_b4=stats_b4.se,
        se_abs_m2=stats_m2.se,
        n_batches=stats_b2.n_batches,
        batch_length=moments.plan.batch_size * moments.plan.sample_dt,
    )


def estimate_photon_variance(
    moments: EnsembleMoments, n_b: float, params: LaserParams
) -> PhotonVarianceEstimate:
    """Photon-number variance <b^dagger b><b b^dagger> from simulated and population factors."""
    if n_b < 0 or moments.e_abs_b2 < 0:
        raise ValueError("n_b and e_abs_b2 must be non-negative")
    antinormal = photon_ratio(params) * n_b
    return PhotonVarianceEstimate(
        value=moments.e_abs_b2 * antinormal,
        se=moments.se_abs_b2 * antinormal,
    )


def estimate_quadrature_variances(
    source: FieldSamples, burn_in: float, params: LaserParams, n_b: float
) -> QuadratureEstimate:
    """Quadrature variances in the symmetric convention of the closed-form results.

    Half the normally ordered sample variance of b* + b (resp. i(b* - b))
    plus the antinormal factor (gamma_c / kappa) n_b.
    """
    moments = _accumulated(source, burn_in, params)
    mean_b = _stats(moments, "b").mean
    antinormal = photon_ratio(params) * n_b

    results = []
    for key, mean in (("plus2", 2.0 * mean_b.real), ("minus2", 2.0 * mean_b.imag)):
        second = _stats(moments, key)
        normal_var = second.mean.real - mean**2
        results.append((normal_var / 2.0 + antinormal, second.se / 2.0))

    (var_plus, se_plus), (var_minus, se_minus) = results
    return QuadratureEstimate(var_plus, var_minus, se_plus, se_minus)


def estimate_correlation(
    source: FieldSamples,
    burn_in: float,
    max_lag: float,
    n_lags: int,
    params: LaserParams,
) -> CorrelationEstimate:
    """Lag products b*(t) b(t + tau) averaged over time origins and trajectories.

    Lags are rounded to the recorded sample spacing; every origin in the
    stationary window whose partner sample exists contributes.
    """
    sample_dt, t_last = _grid(source)
    _check_max_lag(t_last, burn_in, max_lag)
    steps = lag_steps_for(max_lag, n_lags, sample_dt)
    moments = _accumulated(source, burn_in, params, steps)

    values = np.empty(len(steps), dtype=complex)
    errors = np.empty(len(steps))
    for i, k in enumerate(steps):
        stats = _stats(moments, lag_key(int(k)), int(k))
        values[i] = stats.mean
        errors[i] = stats.se
    return CorrelationEstimate(lags=steps * sample_dt, values=values, se=errors)


def zero_mean_z(source: FieldSamples, burn_in: float, params: LaserParams) -> tuple[float, float]:
    """Largest |ensemble mean| / standard error of m and of b over all recorded times."""
    moments = _accumulated(source, burn_in, params)
    return float(moments.time_mean_z("m").max()), float(moments.time_mean_z("b").max())


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    weights = np.zeros_like(x)
    gaps = np.diff(x)
    weights[:-1] += gaps / 2.0
    weights[1:] += gaps / 2.0
    return weights


def estimate_spectrum(
    correlation: CorrelationEstimate,
    omega_grid: Sequence[float],
    taper_rate: float,
) -> SpectrumEstimate:
    """Tapered cosine-transform quadrature of the correlation.

    P(w) = (1/pi) Re sum_k c_k exp(i w tau_k) G(tau_k) exp(-taper_rate tau_k)
    with trapezoid weights c_k. Standard errors add per-lag errors linearly,
    since neighbouring lags are strongly correlated.

    Raises:
        InsufficientLagCoverage: if |G| at the longest lags exceeds 1% of G(0)
            and is significantly nonzero.
    """
    if taper_rate < 0:
        raise ValueError("taper_rate must be >= 0")
    lags = np.asarray(correlation.lags, dtype=float)
    values = np.asarray(correlation.values, dtype=complex)
    if len(lags) < 2:
        raise ValueError("need at least two lags")

    head = abs(values[0])
    n_tail = min(5, len(values))
    tail = abs(values[-n_tail:].mean())
    tail_se = float(np.mean(np.asarray(correlation.se)[-n_tail:]))
    # a tail within noise of zero counts as decayed
    if head > 0 and tail >= COVERAGE_FRACTION * head and tail > 3.0 * tail_se:
        if 0 < tail < head:
            rate = math.log(head / tail) / lags[-1]
            required = math.log(1.0 / COVERAGE_FRACTION) / rate
        else:
            required = 2.0 * lags[-1]
        raise InsufficientLagCoverage(
            f"|g1| at lag {lags[-1]:.4g} is {tail / head:.2%} of its lag-0 value", required
        )

    omega = np.asarray(omega_grid, dtype=float)
    weights = _trapezoid_weights(lags) * np.exp(-taper_rate * lags)
    phase = np.outer(omega, lags)
    integrand = np.cos(phase) * values.real - np.sin(phase) * values.imag
    spectrum = integrand @ weights / math.pi
    se = np.abs(np.cos(phase)) @ (weights * np.asarray(correlation.se)) / math.pi

    return SpectrumEstimate(
        omega_offsets=omega,
        values=spectrum,
        se=se,
        resolution=2.0 * math.pi / lags[-1],
        window_id=f"exp-taper:rate={taper_rate:.6g}",
        taper_rate=taper_rate,
    )


def compare(
    observable: str,
    source: str,
    simulated: float,
    standard_error: float,
    analytic: float,
    n_sigma: float = 3.0,
    floor: float = 0.0,
    bias: float = 0.0,
    note: Optional[str] = None,
) -> Comparison:
    """Verdict row with tolerance max(n_sigma * se + |bias|, floor).

    The tolerance is labelled "approximation" when a known model bias or
    floor enters it, otherwise "statistical".
    """
    statistical = n_sigma * standard_error
    tolerance = max(statistical + abs(bias), floor)
    provenance = "statistical" if bias == 0 and floor <= statistical else "approximation"
    return Comparison(
        observable=observable,
        source=source,
        simulated=float(simulated),
        standard_error=float(standard_error),
        analytic=float(analytic),
        tolerance=float(tolerance),
        tolerance_source=provenance,
        note=note,
    )


CORRELATION_TAUS = (0.0, 1.0, 2.0, 4.0, 6.0)  # in units of 1 / eta
RELATIVE_FLOOR = 0.05


def _model_photon_number(params: LaserParams, run: RunConfig, dt: float) -> tuple[float, str]:
    """Exact stationary E|b|^2 of the simulated model and its label."""
    if run.mode == "full":
        value, source = analytics.full_model_photon_number(params), "full-model"
    else:
        value, source = analytics.mean_photon_number(params), "Eq54"
    if run.m_update == "euler":
        # stationary variance of the Euler AR(1) recursion
        value /= 1.0 - params.eta * dt / 4.0
        source += "+euler"
    return value, source


def build_comparison_report(run: RunConfig, source: FieldSamples) -> ComparisonReport:
    """Estimate every observable of a run and compare it with the closed forms.

    ``source`` is either a recorded Ensemble or the streamed moments of the
    same run; streamed moments must carry the correlation lags of the run.

    Each row records whether its tolerance is purely statistical or also
    carries a known model bias (full versus adiabatic field, Euler step).
    """
    params = run.to_params()
    sim = run.to_sim_config()
    errors = sim.validate_for(params, stationary=True)
    if errors:
        raise ValueError("invalid stationary window: " + "; ".join(errors))
    burn_in = sim.burn_in

    nbar = analytics.mean_photon_number(params)
    ratio = photon_ratio(params)
    n_b = ode_steady_state(params).n_b
    expected_b2, expected_source = _model_photon_number(params, run, sim.dt)
    b2_bias = expected_b2 - nbar

    max_lag = run.resolved_max_lag(sim)
    sample_dt, t_last = _grid(source)
    _check_max_lag(t_last, burn_in, max_lag)
    samples = _accumulated(source, burn_in, params, lag_steps_for(max_lag, run.n_lags, sample_dt))

    moments = estimate_moments(samples, burn_in, params)
    rows = [
        compare(
            "mean_b", "Eq51", abs(moments.mean_b), moments.se_mean_b, 0.0, n_sigma=4.0,
        ),
        compare("e_abs_b2", expected_source, moments.e_abs_b2, moments.se_abs_b2, expected_b2),
    ]
    if expected_source != "Eq54":
        rows.append(
            compare(
                "e_abs_b2", "Eq54", moments.e_abs_b2, moments.se_abs_b2, nbar, bias=b2_bias,
                note="model bias relative to the adiabatic closed form",
            )
        )

    n_a = analytics.steady_populations(params).n_a
    m_bias = n_a * (1.0 / (1.0 - params.eta * sim.dt / 4.0) - 1.0) if run.m_update == "euler" else 0.0
    rows.append(
        compare(
            "e_abs_m2_per_atom", "Eq40", moments.e_abs_m2 / params.n_atoms,
            moments.se_abs_m2 / params.n_atoms, n_a, bias=m_bias,
        )
    )
    if moments.e_abs_b2 > 0:
        rows.append(
            compare(
                "gaussian_ratio", "gaussian", moments.gaussian_ratio,
                moments.se_gaussian_ratio, 2.0,
            )
        )

    dn2 = estimate_photon_variance(moments, n_b, params)
    rows.append(
        compare(
            "dn2", "Eq60", dn2.value, dn2.se, analytics.photon_variance(params),
            bias=b2_bias * ratio * n_b,
        )
    )
    quad = estimate_quadrature_variances(samples, burn_in, params, n_b)
    var_analytic = analytics.quadrature_variances(params).var_plus
    rows.append(compare("var_plus", "Eq69", quad.var_plus, quad.se_plus, var_analytic, bias=b2_bias))
    rows.append(compare("var_minus", "Eq69", quad.var_minus, quad.se_minus, var_analytic, bias=b2_bias))

    blocks = {
        "regime": classify_regime(params, tol_rel=run.tol_rel, eps_wat=run.eps_wat).to_dict(),
        "moments": {
            "e_abs_b2": moments.e_abs_b2,
            "e_abs_b4": moments.e_abs_b4,
            "e_abs_m2": moments.e_abs_m2,
            "n_eff": moments.n_eff,
            "n_batches": moments.n_batches,
            "batch_length": moments.batch_length,
            "cauchy_schwarz": moments.cauchy_schwarz_ok,
        },
        "photon_statistics": _statistics_block(moments.e_abs_b2, dn2.value, quad),
    }

    if samples.n_traj >= 2:
        z_m, z_b = zero_mean_z(samples, burn_in, params)
        rows.append(compare("max_z(mean_m(t))", "Eq49", z_m, 1.0, 0.0, n_sigma=4.0))
        rows.append(compare("max_z(mean_b(t))", "Eq51", z_b, 1.0, 0.0, n_sigma=4.0))
        blocks["zero_mean"] = {"max_z_m": z_m, "max_z_b": z_b, "n_times": int(samples.plan.n_samples)}

    correlation = estimate_correlation(samples, burn_in, max_lag, run.n_lags, params)
    rows.extend(_correlation_rows(params, run, correlation, nbar))

    taper = default_taper_rate(params)
    try:
        spectrum = estimate_spectrum(correlation, [0.0, params.eta / 2.0], taper)
    except InsufficientLagCoverage as exc:
        logger.warning("spectrum comparison skipped: %s", exc)
        blocks["spectrum"] = {"skipped": str(exc), "required_max_lag": exc.required_max_lag}
    else:
        rows.extend(_spectrum_rows(params, run, spectrum, expected_b2, nbar))
        blocks["spectrum"] = {
            "window_id": spectrum.window_id,
            "resolution": spectrum.resolution,
        }

    report = ComparisonReport(config=run.model_dump(), comparisons=rows, blocks=blocks)
    logger.info(
        "%d of %d comparisons passed",
        sum(c.passed for c in rows), len(rows),
    )
    return report


def _statistics_block(e_abs_b2: float, dn2: float, quad: QuadratureEstimate) -> dict:
    if e_abs_b2 <= 0:
        return {"dn2_over_nbar2": None, "var_over_nbar": None}
    return {
        "dn2_over_nbar2": dn2 / e_abs_b2**2,
        "var_over_nbar": (quad.var_plus + quad.var_minus) / (2.0 * e_abs_b2),
    }


def _correlation_rows(
    params: LaserParams, run: RunConfig, correlation: CorrelationEstimate, nbar: float
) -> list[Comparison]:
    rows = []
    lags = np.asarray(correlation.lags)
    for multiple in CORRELATION_TAUS:
        tau = multiple / params.eta
        if tau > lags[-1] * (1 + 1e-9):
            continue
        i = int(np.argmin(np.abs(lags - tau)))
        lag = float(lags[i])
        if run.mode == "full":
            analytic = float(analytics.correlation_g1(params, lag))
            bias = float(analytics.full_model_correlation(params, lag)) - analytic
            source = "Eq81"
        else:
            analytic = float(analytics.adiabatic_correlation(params, lag))
            bias, source = 0.0, "OU"
        rows.append(
            compare(
                f"g1(tau={lag:.4g})", source, correlation.values[i].real, correlation.se[i],
                analytic, floor=RELATIVE_FLOOR * nbar, bias=bias,
            )
        )
    return rows


def _spectrum_rows(
    params: LaserParams,
    run: RunConfig,
    spectrum: SpectrumEstimate,
    expected_b2: float,
    nbar: float,
) -> list[Comparison]:
    taper = spectrum.taper_rate
    offsets = spectrum.omega_offsets
    if run.mode == "full":
        analytic = np.atleast_1d(analytics.power_spectrum(params, offsets, taper_rate=taper))
        scale = expected_b2 / nbar if nbar > 0 else 1.0
        bias = analytic * (scale - 1.0)
        source = "Eq82"
    else:
        analytic = np.atleast_1d(analytics.adiabatic_power_spectrum(params, offsets, taper))
        bias = np.zeros_like(analytic)
        source = "OU"
    peak = float(np.max(np.abs(analytic)))
    return [
        compare(
            f"P(w={w:.4g})", source, spectrum.values[i], spectrum.se[i], analytic[i],
            floor=RELATIVE_FLOOR * peak, bias=float(bias[i]),
            note=spectrum.window_id,
        )
        for i, w in enumerate(offsets)
    ]
