import json
import logging
import os
import platform
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
import scipy
import sympy

from cognite.kinetics._api.modes import initial_profile
from cognite.kinetics._api.nonlinear import slab_norm_series
from cognite.kinetics._api_client import APIClient
from cognite.kinetics._version import __version__
from cognite.kinetics.data_classes import (
    ExperimentConfig,
    KernelModel,
    KineticsResource,
    ModeState,
    MomentumGrid,
    MuConstants,
    OperatorMatrices,
    PropertyCheck,
    PropertyCheckList,
    RateSpec,
    RunManifest,
)
from cognite.kinetics.exceptions import BudgetFailure, InvalidArgument, NumericalInconsistency
from cognite.kinetics.utils import log_duration, spawn_rng

logger = logging.getLogger(__name__)

CSV_FORMAT = "%.17g"
SLAB_RATE_TOLERANCE = 0.2
CONSERVATION_SAMPLES = 1_000_000
CONSERVATION_CHUNK = 100_000

_PLOT_TEMPLATE = '''"""Plots {csv}. Generated by cognite-kinetics {version}; needs numpy and matplotlib."""
import matplotlib.pyplot as plt
import numpy as np

data = np.genfromtxt("{csv}", delimiter=",", names=True)
names = data.dtype.names
fig, ax = plt.subplots()
for name in names[1:]:
    values = np.abs(data[name])
    keep = (data[names[0]] > 0) & (values > 0)
    ax.loglog(1 + data[names[0]][keep], values[keep], label=name)
ax.set_xlabel("1 + " + names[0])
ax.legend()
fig.savefig("{stem}.pdf")
'''


def versions() -> Dict[str, str]:
    return {
        "cognite-kinetics": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
        "python": platform.python_version(),
    }


def rate_band(target: float, m: float) -> Tuple[float, float]:
    """Acceptance band of a fitted exponent of the squared norm: ±15% of a positive target, ±20% with the Ḣ^m
    weight, and at most 0.1 when the target is zero."""
    if target == 0:
        return -np.inf, 0.1
    rel = 0.15 if m == 0 else 0.2
    return (1.0 - rel) * target, (1.0 + rel) * target


def write_csv(path: str, header: Sequence[str], columns: Sequence[np.ndarray]):
    """UTF-8 CSV with a header row and every number in round-trip `%.17g` format."""
    table = np.column_stack([np.real(np.asarray(c, dtype=complex)) for c in columns])
    np.savetxt(path, table, fmt=CSV_FORMAT, delimiter=",", header=",".join(header), comments="", encoding="utf-8")


class ExperimentsAPI(APIClient):
    def build_operators(self, config: ExperimentConfig) -> Tuple[MomentumGrid, OperatorMatrices, MuConstants]:
        """Grid, assembled operators and J-moments of a config."""
        c = self._kinetics_client
        g = config.grid
        grid = c.discretization.build_grid(p_max=g["p_max"], n_per_axis=g["n_per_axis"], rule=g["rule"])
        sphere = c.discretization.sphere_rule(g["sphere_order"])
        matrices = c.kernels.assemble_operator_matrices(config.kernel_model(), grid, sphere)
        mu = c.moments.compute_mu_constants(grid)
        return grid, matrices, mu

    def _manifest(self, kind: str, config: ExperimentConfig = None) -> RunManifest:
        return RunManifest(
            kind=kind,
            versions=versions(),
            seed=config.seed if config is not None else self._config.seed,
            threads=self._config.max_workers,
            config=config.dump() if config is not None else None,
            tolerances=dict(self._tolerances),
            overrides=sorted(set(self._config.tolerance_overrides) | set(config.overrides if config else [])),
        )

    def _write(self, out_dir: str, name: str, writer: Callable[[str], None], manifest: RunManifest, plot=False):
        path = os.path.join(out_dir, name)
        writer(path)
        manifest.files.append(name)
        if plot:
            stem = os.path.splitext(name)[0]
            script = "plot_%s.py" % stem
            with open(os.path.join(out_dir, script), "w", encoding="utf-8") as fh:
                fh.write(_PLOT_TEMPLATE.format(csv=name, stem=stem, version=__version__))
            manifest.files.append(script)

    @staticmethod
    def write_manifest(manifest: KineticsResource, out_dir: str, name: str = "manifest.json") -> str:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest.dump(), fh, indent=2, sort_keys=True, default=str)
        return path

    @log_duration
    def run_experiment(self, config: ExperimentConfig, out_dir: str = None) -> RunManifest:
        """Run the experiment a config describes and write its artifacts.

        Writes `manifest.json`, one CSV per time series and, unless `[output] plots = false`, a plot script per CSV.
        Every random draw derives from the config seed, so reruns give byte-identical CSVs for any thread count.

        Args:
            config (ExperimentConfig): Validated configuration.
            out_dir (str): Output directory, overriding `[output] dir`.

        Returns:
            RunManifest: The manifest as written. Status "failed" means a check ran to the end and missed its band.

        Raises:
            BudgetFailure: After writing the manifest with the failing report embedded.
        """
        out_dir = out_dir or config.output["dir"]
        os.makedirs(out_dir, exist_ok=True)
        manifest = self._manifest(config.kind, config)
        runner = getattr(self, "_run_" + config.kind, None)
        if runner is None:
            raise InvalidArgument("kind", f"unknown experiment kind {config.kind!r}")
        logger.info("Running %s into %s", config.kind, out_dir)
        try:
            grid, matrices, mu = self.build_operators(config)
            manifest.diagnostics["assembly"] = matrices.diagnostics
            manifest.diagnostics["tail"] = self._kinetics_client.discretization.tail_bound(grid)
            manifest.diagnostics["tol_grid"] = grid.tol_grid
            runner(config, grid, matrices, mu, out_dir, manifest)
        except BudgetFailure as e:
            manifest.status = "budget_failure"
            manifest.failure = {"error": type(e).__name__, "message": str(e), **e.dump()}
            self.write_manifest(manifest, out_dir)
            raise
        self.write_manifest(manifest, out_dir)
        return manifest

    def _frequencies(self, config: ExperimentConfig) -> np.ndarray:
        f = config.frequencies
        return np.geomspace(f["k_min"], f["k_max"], f["n"])

    def _run_linear_decay(self, config, grid, matrices, mu, out_dir, manifest):
        c, time, rate = self._kinetics_client, config.time, config.rate_spec()
        b = matrices.model.b_exponent
        window = (config.rate["fit_t_lo"], config.rate["fit_t_hi"])
        sweep = c.modes.mode_sweep(
            matrices,
            self._frequencies(config),
            time["t_final"],
            time["dt"],
            r=rate.r,
            method=time["method"],
            snapshot_every=time["snapshot_every"],
        )
        series = c.modes.synthesize_norm(sweep, rate, ell=0.0, b_exponent=b, grid=grid)
        fit = c.analysis.fit_decay_exponent(series.times, series.norm2, window)
        supnorm = c.semigroup.weighted_supnorm_decay(sweep, grid, rate, b_exponent=b, window=window)
        target = 2.0 * rate.sigma_rm
        lo, hi = rate_band(target, rate.m)
        manifest.results.update(
            {
                "sigma_rm": str(rate.sigma_exact),
                "target_exponent": target,
                "band": [lo, hi],
                "fit": fit.dump(),
                "supnorm": supnorm.fit.dump(),
                "supnorm_passed": supnorm.passed,
                "in_band": bool(lo <= fit.exponent <= hi),
            }
        )
        self._write(
            out_dir,
            "linear_decay.csv",
            lambda p: write_csv(p, ["t", "norm2", "supnorm"], [series.times, series.norm2, supnorm.supnorm]),
            manifest,
            plot=config.output["plots"],
        )
        if not (manifest.results["in_band"] and supnorm.passed):
            manifest.status = "failed"

    def _lyapunov_run(self, config, matrices, mu, n_states=20):
        lyapunov = self._kinetics_client.modes.lyapunov
        t_final = config.time["t_final"]
        freq_norms = self._frequencies(config)
        constants = lyapunov.fit_lyapunov_constants(
            matrices, mu, freq_norms=freq_norms, n_states=n_states, t_final=t_final, ell=config.rate["ell"]
        )
        samples = lyapunov.verify(matrices, mu, constants, freq_norms=freq_norms, n_states=n_states, t_final=t_final)
        return constants, samples

    def _run_lyapunov_verify(self, config, grid, matrices, mu, out_dir, manifest):
        constants, samples = self._lyapunov_run(config, matrices, mu)
        manifest.results.update(
            {
                "constants": constants.dump(),
                "worst_lyapunov_margin": samples.worst_lyapunov_margin,
                "monotone": samples.all_monotone,
            }
        )
        columns = [
            [s.freq_norm for s in samples],
            [s.t for s in samples],
            [s.free_energy_margin for s in samples],
            [s.lyapunov_margin for s in samples],
            [float(s.monotone) for s in samples],
        ]
        self._write(
            out_dir,
            "lyapunov.csv",
            lambda p: write_csv(p, ["freq_norm", "t", "free_energy_margin", "lyapunov_margin", "monotone"], columns),
            manifest,
        )
        if samples.worst_lyapunov_margin < 0 or not samples.all_monotone:
            manifest.status = "failed"

    def _run_vidav_check(self, config, grid, matrices, mu, out_dir, manifest):
        c, rate = self._kinetics_client, config.rate_spec()
        t_final, dt = config.time["t_final"], config.time["dt"]
        f0 = initial_profile(grid, mu, "generic")
        freq_norms = [0.1, 1.0, 5.0]
        times = [t for t in (1.0, 2.0, 5.0, 10.0) if t <= t_final]
        terms = c.semigroup.vidav_sample(matrices, f0, freq_norms, times, dt=dt)
        b, n_t = matrices.model.b_exponent, len(times)
        h3 = [
            c.semigroup.h3_decay_check(terms[i * n_t : (i + 1) * n_t], f0, grid, rate.ell, rate.decay_order, b).dump()
            for i in range(len(freq_norms))
        ]
        poly = c.semigroup.poly_decay_bound_check(matrices, [0.5, 1.0, 2.0], np.geomspace(1e-2, t_final, 50))
        law = c.semigroup.semigroup_law_check(matrices, ModeState(freq=(1.0, 0.0, 0.0), values=f0), 0.7, 1.3)
        manifest.results.update(
            {
                "worst_residual": max(term.residual for term in terms),
                "worst_duhamel_residual": max(term.duhamel_residual for term in terms),
                "h3_decay": h3,
                "poly_decay": poly.dump(),
                "semigroup_law": law.dump(),
            }
        )
        norms = np.array([term.term_norms for term in terms])
        header = ["t", "freq_norm", "H1", "H2", "H3", "H4", "H5", "residual", "duhamel_residual"]
        columns = [[term.t for term in terms], [term.freq_norm for term in terms]] + list(norms.T)
        columns += [[term.residual for term in terms], [term.duhamel_residual for term in terms]]
        self._write(out_dir, "vidav.csv", lambda p: write_csv(p, header, columns), manifest)
        if not (poly.passed and law.passed):
            manifest.status = "failed"

    def _run_nonlinear_slab(self, config, grid, matrices, mu, out_dir, manifest):
        c, nl, rate = self._kinetics_client, config.nonlinear, config.rate_spec()
        horizon, dt = config.time["t_final"], config.time["dt"]
        picard = dict(dt=dt, ell=rate.ell, decay_order=rate.decay_order, threshold=nl["threshold"])
        if nl["amplitude"] > 0:
            amplitude = nl["amplitude"]
            slab = c.nonlinear.slab_initial(grid, mu, nl["n_line"], nl["dk"], amplitude)
            result = c.nonlinear.picard_iterate(matrices, slab, horizon, nl["n_iters"], **picard)
        else:
            amplitude, result = c.nonlinear.calibrate_amplitude(
                matrices, mu, nl["n_line"], nl["dk"], horizon, nl["n_iters"], **picard
            )
        b = matrices.model.b_exponent
        linear = slab_norm_series(grid, result.iterates[0], result.dk, rate.ell, b)
        nonlinear = slab_norm_series(grid, result.solution, result.dk, rate.ell, b)
        window = (config.rate["fit_t_lo"], config.rate["fit_t_hi"])
        fit_linear = c.analysis.fit_decay_exponent(result.times, linear, window)
        fit_nonlinear = c.analysis.fit_decay_exponent(result.times, nonlinear, window)
        # slabs carry a k₁ = 0 mode, so the linear exponent may be near zero
        allowed = SLAB_RATE_TOLERANCE * max(abs(fit_linear.exponent), 0.1)
        manifest.results.update(
            {
                "amplitude": amplitude,
                "contraction": result.report.dump(),
                "fit_linear": fit_linear.dump(),
                "fit_nonlinear": fit_nonlinear.dump(),
                "rate_matches": bool(abs(fit_nonlinear.exponent - fit_linear.exponent) <= allowed),
            }
        )
        self._write(
            out_dir,
            "nonlinear_slab.csv",
            lambda p: write_csv(p, ["t", "linear_norm", "nonlinear_norm"], [result.times, linear, nonlinear]),
            manifest,
            plot=config.output["plots"],
        )
        self._write(
            out_dir,
            "contraction.json",
            lambda p: self.write_manifest(result.report, os.path.dirname(p), os.path.basename(p)),
            manifest,
        )
        if not manifest.results["rate_matches"]:
            manifest.status = "failed"

    def _run_homogeneous_relax(self, config, grid, matrices, mu, out_dir, manifest):
        c, nl = self._kinetics_client, config.nonlinear
        t_final, dt = config.time["t_final"], config.time["dt"]
        rng = spawn_rng(config.seed, 0)
        F0 = c.nonlinear.moment_match(grid, grid.j_values * rng.uniform(0.5, 1.5, grid.n_nodes))
        series = c.nonlinear.homogeneous_relax(matrices, F0, dt, max(1, int(round(t_final / dt))))
        results: Dict[str, Any] = {
            "min_value": series.min_value,
            "entropy_drop": series.entropy_drop,
            "entropy_drop_budget": dt,
            "max_moment_drift": series.max_moment_drift,
            "leakage": matrices.diagnostics.get("leakage_max"),
        }
        if nl["cadence"] == "outer":
            outer = c.nonlinear.positivity_iterate(matrices, F0, dt, min(t_final, 1.0), n_outer=nl["n_outer"])
            results["outer_sup_differences"] = outer.sup_differences()
            results["outer_min_value"] = min(trajectory.min_value for trajectory in outer)
        profile = initial_profile(grid, mu, "generic")
        amplitude = 0.1 / float(np.max(np.abs(profile) / grid.sqrt_j))
        consistency = c.nonlinear.consistency_check(matrices, profile, amplitude, min(t_final, 1.0), dt)
        results["consistency"] = consistency.dump()
        results["entropy_maximum_gap"] = float(np.min(c.nonlinear.entropy_trials(grid, 100, config.seed)))
        manifest.results.update(results)
        drift = series.moments - series.moments[0]
        header = ["t", "min_F", "entropy", "drift_mass", "drift_p1", "drift_p2", "drift_p3", "drift_energy"]
        columns = [series.times, np.min(series.values, axis=1), series.entropy] + list(drift.T)
        plots = config.output["plots"]
        self._write(out_dir, "relax.csv", lambda p: write_csv(p, header, columns), manifest, plot=plots)
        if series.min_value < 0 or series.entropy_drop > dt or results["entropy_maximum_gap"] < -1e-12:
            manifest.status = "failed"

    def _run_inequality_suite(self, config, grid, matrices, mu, out_dir, manifest):
        analysis = self._kinetics_client.analysis
        pairs = [(2.0, 1.0), (1.0, 1.0), (3.0, 0.5), (0.0, 0.0)]
        reports = self._map(lambda lm: analysis.basic_decay_check(*lm), pairs)
        violation = analysis.calc_inequality_grid([0.1, 0.5, 1.0, 2.0, 5.0], [0.0, 0.5, 1.0, 2.0, 4.0])
        poly = self._kinetics_client.semigroup.poly_decay_bound_check(
            matrices, [0.5, 1.0, 2.0], np.geomspace(1e-2, config.time["t_final"], 50)
        )
        manifest.results.update(
            {
                "basic_decay": [r.summary() for r in reports],
                "calc_inequality_violation": violation,
                "poly_decay": poly.dump(),
            }
        )
        columns = [
            np.concatenate([np.full(len(r.times), r.lam) for r in reports]),
            np.concatenate([np.full(len(r.times), r.mu) for r in reports]),
            np.concatenate([r.times for r in reports]),
            np.concatenate([r.values for r in reports]),
        ]
        self._write(out_dir, "basic_decay.csv", lambda p: write_csv(p, ["lam", "mu", "t", "scaled"], columns), manifest)
        if not (all(r.bounded for r in reports) and violation <= 1e-12 and poly.passed):
            manifest.status = "failed"

    def fit_constants(self, config: ExperimentConfig, out_dir: str = None) -> RunManifest:
        """Lyapunov constant search for the operators of a config; writes `lyapunov_constants.json`."""
        out_dir = out_dir or config.output["dir"]
        os.makedirs(out_dir, exist_ok=True)
        manifest = self._manifest("fit-constants", config)
        try:
            grid, matrices, mu = self.build_operators(config)
            manifest.diagnostics["assembly"] = matrices.diagnostics
            constants = self._kinetics_client.modes.lyapunov.fit_lyapunov_constants(
                matrices,
                mu,
                freq_norms=self._frequencies(config),
                t_final=config.time["t_final"],
                ell=config.rate["ell"],
            )
        except BudgetFailure as e:
            manifest.status = "budget_failure"
            manifest.failure = {"error": type(e).__name__, "message": str(e), **e.dump()}
            self.write_manifest(manifest, out_dir)
            raise
        manifest.results["constants"] = constants.dump()
        self._write(
            out_dir,
            "lyapunov_constants.json",
            lambda p: self.write_manifest(constants, os.path.dirname(p), os.path.basename(p)),
            manifest,
        )
        self.write_manifest(manifest, out_dir)
        return manifest

    @log_duration
    def verify(self, out_dir: str = "out", p_max: float = 6.0, n_per_axis: int = 5) -> PropertyCheckList:
        """Fast property suite on a desk-small soft-potential grid; writes `verify.json`.

        Every check runs even when an earlier one fails; budget failures become failed checks with the report
        attached.
        """
        os.makedirs(out_dir, exist_ok=True)
        c = self._kinetics_client
        model = KernelModel(kind="soft", b_exponent=1.0, angular_exponent=0.0)
        grid = c.discretization.build_grid(p_max=p_max, n_per_axis=n_per_axis)
        matrices = c.kernels.assemble_operator_matrices(model, grid)
        mu = c.moments.compute_mu_constants(grid)
        suite = _PropertySuite(c, grid, matrices, mu, self._config.seed, self._tolerances)
        checks = PropertyCheckList()
        for name, check in suite.checks():
            try:
                checks.append(check())
            except (BudgetFailure, NumericalInconsistency) as e:
                checks.append(PropertyCheck(name=name, passed=False, details={"error": str(e)}))
            logger.info("%s: %s", name, "passed" if checks[-1].passed else "FAILED")
        manifest = self._manifest("verify")
        manifest.results = {"checks": checks.dump(), "failures": checks.failures()}
        manifest.diagnostics["assembly"] = matrices.diagnostics
        manifest.status = "ok" if checks.passed else "failed"
        self.write_manifest(manifest, out_dir, "verify.json")
        return checks


class _PropertySuite:
    """Fast versions of the acceptance checks, one method per check."""

    def __init__(self, client, grid: MomentumGrid, matrices: OperatorMatrices, mu: MuConstants, seed: int, tolerances):
        self.c = client
        self.grid = grid
        self.matrices = matrices
        self.mu = mu
        self.seed = seed
        self.tolerances = tolerances
        self._sweep = None

    def checks(self) -> List[Tuple[str, Callable[[], PropertyCheck]]]:
        names = [
            "collision_conservation",
            "equilibrium_annihilation",
            "collision_frequency_band",
            "linearized_structure",
            "lyapunov",
            "linear_decay_rate",
            "balance_laws",
            "vidav_expansion",
            "weighted_supnorm",
            "nonlinear_layer",
            "scalar_inequalities",
        ]
        return [(name, getattr(self, name)) for name in names]

    def collision_conservation(self) -> PropertyCheck:
        rng = spawn_rng(self.seed, 1)
        kin = self.c.kinematics
        energy = kin.energies
        momentum, energy_defect, g_defect = 0.0, 0.0, 0.0
        for start in range(0, CONSERVATION_SAMPLES, CONSERVATION_CHUNK):
            size = min(CONSERVATION_CHUNK, CONSERVATION_SAMPLES - start)
            p, q = rng.normal(scale=3.0, size=(size, 3)), rng.normal(scale=3.0, size=(size, 3))
            omega = rng.normal(size=(size, 3))
            omega /= np.linalg.norm(omega, axis=1, keepdims=True)
            p_out, q_out, _ = kin.post_collision_batch(p, q, omega)
            e_in = energy(p) + energy(q)
            momentum = max(momentum, np.max(np.abs(p + q - p_out - q_out) / (1.0 + np.abs(p + q))))
            energy_defect = max(energy_defect, np.max(np.abs(e_in - energy(p_out) - energy(q_out)) / e_in))
            g_in = kin.relative_invariants_batch(p, q)[0]
            g_out = kin.relative_invariants_batch(p_out, q_out)[0]
            g_defect = max(g_defect, np.max(np.abs(g_in - g_out) / np.maximum(1.0, g_in)))
        value = float(max(momentum, energy_defect))
        return PropertyCheck(
            name="collision_conservation",
            passed=bool(value <= 1e-12 and g_defect <= 1e-10),
            value=value,
            budget=1e-12,
            details={"g_defect": float(g_defect), "n_samples": CONSERVATION_SAMPLES},
        )

    def equilibrium_annihilation(self) -> PropertyCheck:
        J = self.grid.j_values
        q = self.c.kernels.apply_gain_loss(self.matrices, J, J).q
        value = float(np.max(np.abs(q) / (self.matrices.nu_diag * J)))
        return PropertyCheck(name="equilibrium_annihilation", passed=value <= 1e-4, value=value, budget=1e-4)

    def collision_frequency_band(self) -> PropertyCheck:
        grid, model = self.grid, self.matrices.model
        radii = np.linspace(0.0, 0.9 * grid.p_max, 12)
        points = np.column_stack([radii, np.zeros_like(radii), np.zeros_like(radii)])
        nu = self.c.kernels.collision_frequencies(model, grid, points)
        scaled = nu * np.sqrt(1.0 + radii ** 2) ** (model.b_exponent / 2.0)
        value = float(np.max(scaled) / np.min(scaled))
        return PropertyCheck(name="collision_frequency_band", passed=value <= 10.0, value=value, budget=10.0)

    def linearized_structure(self) -> PropertyCheck:
        report = self.c.kernels.null_space_report(self.matrices)
        delta = self.c.kernels.coercivity_constant(self.matrices)
        floor = -self.tolerances["psd"] * float(np.max(self.matrices.nu_diag))
        passed = report.n_below == 5 and report.min_eigenvalue >= floor and delta > 0
        return PropertyCheck(
            name="linearized_structure",
            passed=bool(passed),
            value=float(report.n_below),
            budget=5.0,
            details={"null_space": report.dump(), "coercivity": delta},
        )

    def lyapunov(self) -> PropertyCheck:
        lyapunov = self.c.modes.lyapunov
        freq_norms = np.logspace(-2, 1, 8)
        constants = lyapunov.fit_lyapunov_constants(self.matrices, self.mu, freq_norms, n_states=4, t_final=20.0)
        samples = lyapunov.verify(self.matrices, self.mu, constants, freq_norms, n_states=4, t_final=20.0)
        return PropertyCheck(
            name="lyapunov",
            passed=bool(samples.worst_lyapunov_margin >= 0 and samples.all_monotone),
            value=samples.worst_lyapunov_margin,
            budget=0.0,
            details={"constants": constants.dump()},
        )

    def _linear_sweep(self):
        if self._sweep is None:
            self._sweep = self.c.modes.mode_sweep(
                self.matrices, np.geomspace(0.01, 10.0, 24), 100.0, 0.5, method="eig", snapshot_every=2
            )
        return self._sweep

    def linear_decay_rate(self) -> PropertyCheck:
        rate = RateSpec(r=1.0, m=0.0)
        series = self.c.modes.synthesize_norm(self._linear_sweep(), rate, grid=self.grid)
        fit = self.c.analysis.fit_decay_exponent(series.times, series.norm2, (10.0, 100.0))
        lo, hi = rate_band(2.0 * rate.sigma_rm, rate.m)
        return PropertyCheck(
            name="linear_decay_rate",
            passed=bool(lo <= fit.exponent <= hi),
            value=fit.exponent,
            budget=hi,
            details={"band": [lo, hi], "fit": fit.dump()},
        )

    def balance_laws(self) -> PropertyCheck:
        f0 = initial_profile(self.grid, self.mu, "generic")
        state = ModeState(freq=(0.5, 0.0, 0.0), values=f0)
        trajectory = self.c.modes.evolve_mode(self.matrices, state, 2.0, 0.01, method="rk4", snapshot_every=5)
        report = self.c.moments.balance_residuals(self.matrices, self.mu, trajectory, raise_on_failure=False)
        worst = report.worst_law
        return PropertyCheck(
            name="balance_laws",
            passed=bool(report.passed),
            value=report.residuals[worst],
            budget=report.budget,
            details={"worst_law": worst},
        )

    def vidav_expansion(self) -> PropertyCheck:
        f0 = initial_profile(self.grid, self.mu, "generic")
        terms = self.c.semigroup.vidav_sample(self.matrices, f0, [0.1, 1.0, 5.0], [1.0, 10.0])
        degenerate = self.c.semigroup.vidav_terms(self.matrices.with_zero_kernel(), f0, 1.0, 10.0)
        value = max(term.residual for term in terms)
        return PropertyCheck(
            name="vidav_expansion",
            passed=bool(value <= self.tolerances["vidav_budget"] and degenerate.residual <= 1e-12),
            value=value,
            budget=self.tolerances["vidav_budget"],
            details={"degenerate_residual": degenerate.residual},
        )

    def weighted_supnorm(self) -> PropertyCheck:
        rate = RateSpec(r=1.0, m=0.0, ell=1.0, decay_order=0.75)
        report = self.c.semigroup.weighted_supnorm_decay(self._linear_sweep(), self.grid, rate)
        return PropertyCheck(name="weighted_supnorm", passed=bool(report.passed), value=report.fit.exponent, budget=0.6)

    def nonlinear_layer(self) -> PropertyCheck:
        nl, grid = self.c.nonlinear, self.grid
        zero = nl.picard_iterate(self.matrices, nl.slab_initial(grid, self.mu, 2, 0.5, 0.0), 2.0, 3, dt=0.1)
        small = nl.picard_iterate(self.matrices, nl.slab_initial(grid, self.mu, 2, 0.5, 1e-3), 2.0, 3, dt=0.1)
        J = grid.j_values
        stationary = nl.positivity_iterate(self.matrices, J, 0.1, 1.0, n_outer=2)
        drift = max(float(np.max(np.abs(t.values - J))) for t in stationary) / float(np.max(J))
        rng = spawn_rng(self.seed, 2)
        random = nl.positivity_iterate(self.matrices, J * rng.uniform(0.0, 2.0, grid.n_nodes), 0.1, 1.0, n_outer=2)
        gap = float(np.min(nl.entropy_trials(grid, 20, self.seed)))
        details = {
            "zero_data_max": float(max(np.max(np.abs(it)) for it in zero.iterates)),
            "ratios": small.report.ratios,
            "stationary_drift": drift,
            "random_min": min(t.min_value for t in random),
            "entropy_maximum_gap": gap,
        }
        passed = (
            details["zero_data_max"] == 0.0
            and small.report.contracting
            and drift <= 1e-10
            and details["random_min"] >= 0
            and gap >= -1e-12
        )
        return PropertyCheck(name="nonlinear_layer", passed=bool(passed), value=drift, budget=1e-10, details=details)

    def scalar_inequalities(self) -> PropertyCheck:
        analysis = self.c.analysis
        reports = [analysis.basic_decay_check(lam, mu) for lam, mu in [(2.0, 1.0), (1.0, 1.0), (3.0, 0.5)]]
        violation = analysis.calc_inequality_grid([0.1, 0.5, 1.0, 2.0, 5.0], [0.0, 0.5, 1.0, 2.0, 4.0])
        poly = self.c.semigroup.poly_decay_bound_check(self.matrices, [0.5, 1.0, 2.0], np.geomspace(1e-2, 1e3, 50))
        passed = all(r.bounded for r in reports) and violation <= 1e-12 and poly.passed
        return PropertyCheck(
            name="scalar_inequalities",
            passed=bool(passed),
            value=violation,
            budget=1e-12,
            details={"basic_decay": [r.summary() for r in reports], "poly_decay": poly.summary()},
        )
