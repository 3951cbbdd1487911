"""
Scenario files: parsing, running, and writing trajectory/report artifacts.

A scenario is a YAML (or JSON) mapping; see README.md for the schema.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import yaml

from .dynamics import (
    AnalyticProcess,
    IntegratorConfig,
    Trajectory,
    analytic_oracle,
    analytic_processes,
    equilibrium_defect,
    gas_monitors,
    integrate_contact_flow,
    monitor_report,
    positive_components,
)
from .generic_oc import (
    DEGENERACY_TOL,
    OCSystem,
    QuadraticForm,
    degeneracy_residual,
    oc3,
    oc_geometric_hj_residual,
    oc_integrate,
)
from .geometry import ContactHamiltonian, PhasePoint
from .thermo import (
    GasState,
    IdealGasParams,
    ThermoDomainError,
    energy_fundamental,
    energy_point,
    entropy_fundamental,
    entropy_point,
    state_from_energy_point,
    state_from_entropy_point,
    transform_hamiltonian_representation,
)

log = logging.getLogger(__name__)

OC_PROCESS = "oc-system"
PROCESS_IDS = ("isochoric-energy", "isochoric-entropy", "isochoric-isothermal",
               "ideal-to-interacting", OC_PROCESS)
NATIVE_REPRESENTATION = {"isochoric-entropy": "entropy"}
GAS_CHECKS = ("oracle", "h", "euler", "gaslaw", "onL")
OC_CHECKS = ("energy", "entropy", "degeneracy", "hj")
GAS_COLUMNS = ("t", "s", "q1", "q2", "q3", "p1", "p2", "p3",
               "h", "euler", "gaslaw_pv", "gaslaw_eq", "onL")
STATE_KEYS = ("U", "S", "V", "N", "T", "P", "mu")


class ScenarioError(ValueError):
    """Invalid scenario document; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class OutputSpec:
    directory: Optional[str] = None
    long_format: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str
    process: str
    representation: str = "energy"
    params: IdealGasParams = IdealGasParams()
    a: float = 0.1
    initial: Union[GasState, np.ndarray, None] = None
    integrator: IntegratorConfig = IntegratorConfig()
    checks: tuple = GAS_CHECKS
    tol: float = 1e-6
    output: OutputSpec = OutputSpec()
    oc: Optional[OCSystem] = None

    @property
    def is_oc(self) -> bool:
        return self.process == OC_PROCESS

    @property
    def analytic(self) -> Optional[AnalyticProcess]:
        if self.is_oc:
            return None
        return analytic_processes(self.params, self.a)[self.process]

    @property
    def hamiltonian(self) -> ContactHamiltonian:
        proc = self.analytic
        if proc.chart == self.representation:
            return proc.hamiltonian
        # energy-chart process run in the entropy chart: rescale by -1/T
        return transform_hamiltonian_representation(proc.hamiltonian, k=0)

    def initial_point(self) -> PhasePoint:
        if self.representation == "entropy":
            return entropy_point(self.initial)
        return energy_point(self.initial)

    def to_state(self, x: PhasePoint) -> GasState:
        if self.representation == "entropy":
            return state_from_entropy_point(x)
        return state_from_energy_point(x)


# -- parsing -------------------------------------------------------------------

def _number(value, name: str, positive: bool = False) -> float:
    if isinstance(value, bool):
        raise ScenarioError(name, f"expected a number, got {value!r}")
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ScenarioError(name, f"expected a number, got {value!r}") from None
    if not np.isfinite(x):
        raise ScenarioError(name, "must be finite")
    if positive and not x > 0:
        raise ScenarioError(name, f"must be positive, got {x}")
    return x


def _matrix(value, name: str, dim: int) -> np.ndarray:
    try:
        m = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(name, "malformed matrix literal") from None
    if m.shape != (dim, dim):
        raise ScenarioError(name, f"expected a {dim}x{dim} matrix, got shape {m.shape}")
    return m


def _vector(value, name: str, dim: int) -> np.ndarray:
    try:
        v = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(name, "malformed vector literal") from None
    if v.shape != (dim,):
        raise ScenarioError(name, f"expected a vector of length {dim}, got shape {v.shape}")
    return v


def _quadratic(entry, name: str, dim: int) -> QuadraticForm:
    if not isinstance(entry, Mapping):
        raise ScenarioError(name, "expected a mapping with quadratic/linear/constant entries")
    unknown = set(entry) - {"quadratic", "linear", "constant"}
    if unknown:
        raise ScenarioError(name, f"unknown keys {sorted(unknown)}")
    A = _matrix(entry.get("quadratic", np.zeros((dim, dim))), f"{name}.quadratic", dim)
    b = _vector(entry.get("linear", np.zeros(dim)), f"{name}.linear", dim)
    c = _number(entry.get("constant", 0.0), f"{name}.constant")
    if np.max(np.abs(A - A.T)) > 1e-12:
        raise ScenarioError(f"{name}.quadratic", "quadratic part must be symmetric")
    return QuadraticForm(A, b, c)


def _parse_oc(doc) -> OCSystem:
    if doc is None or doc == "oc3":
        return oc3()
    if not isinstance(doc, Mapping):
        raise ScenarioError("oc", "expected a mapping or 'oc3'")
    if "dim" not in doc:
        raise ScenarioError("oc.dim", "missing")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ScenarioError("oc.dim", f"must be a positive integer, got {dim!r}")
    J = _matrix(doc.get("J", np.zeros((dim, dim))), "oc.J", dim)
    M = _matrix(doc.get("M", np.zeros((dim, dim))), "oc.M", dim)
    if np.max(np.abs(J + J.T)) > 1e-12:
        raise ScenarioError("oc.J", "J must be antisymmetric")
    if np.max(np.abs(M - M.T)) > 1e-12:
        raise ScenarioError("oc.M", "M must be symmetric")
    if np.min(np.linalg.eigvalsh(M)) < -1e-12:
        raise ScenarioError("oc.M", "M must be positive semidefinite")
    E = _quadratic(doc.get("E", {}), "oc.E", dim)
    S = _quadratic(doc.get("S", {}), "oc.S", dim)
    beta = _number(doc.get("beta", 1.0), "oc.beta", positive=True)
    return OCSystem(dim, J, M, E, S, beta)


def _parse_initial_gas(doc, params: IdealGasParams) -> GasState:
    if doc is None:
        doc = {"S": 0.0, "V": 1.0, "N": 1.0}
    if not isinstance(doc, Mapping):
        raise ScenarioError("initial", "expected a mapping of state variables")
    unknown = set(doc) - set(STATE_KEYS)
    if unknown:
        raise ScenarioError("initial", f"unknown state variables {sorted(unknown)}")
    vals = {k: _number(v, f"initial.{k}") for k, v in doc.items()}
    try:
        if set(vals) == set(STATE_KEYS):
            st = GasState(**vals)
            defect = equilibrium_defect(st, params)
            if defect > 1e-8:
                raise ScenarioError("initial", f"state is off the ideal-gas submanifold (defect {defect:.3e})")
            return st
        if {"S", "V", "N"} <= set(vals) and len(vals) == 3:
            return energy_fundamental(vals["S"], vals["V"], vals["N"], params)
        if {"U", "V", "N"} <= set(vals) and len(vals) == 3:
            return entropy_fundamental(vals["U"], vals["V"], vals["N"], params)
    except ThermoDomainError as exc:
        raise ScenarioError("initial", str(exc)) from None
    raise ScenarioError("initial", "give (S, V, N), (U, V, N), or all of U, S, V, N, T, P, mu")


def parse_scenario(text: Union[str, Mapping]) -> Scenario:
    """Parse and validate a scenario document (YAML/JSON text or a mapping)."""
    if isinstance(text, Mapping):
        doc = dict(text)
    else:
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ScenarioError("document", f"not well-formed: {exc}") from None
    if not isinstance(doc, Mapping):
        raise ScenarioError("document", "top level must be a mapping")
    known = {"name", "process", "representation", "params", "initial", "integrator",
             "checks", "tol", "output", "oc"}
    unknown = set(doc) - known
    if unknown:
        raise ScenarioError("document", f"unknown keys {sorted(unknown)}")

    process = doc.get("process")
    if process not in PROCESS_IDS:
        raise ScenarioError("process", f"unknown process id {process!r}; known: {', '.join(PROCESS_IDS)}")
    name = str(doc.get("name", process))

    native = NATIVE_REPRESENTATION.get(process, "energy")
    representation = doc.get("representation", native)
    if process == OC_PROCESS:
        if "representation" in doc:
            raise ScenarioError("representation", f"not applicable to {OC_PROCESS}")
        representation = "base"
    elif representation not in ("energy", "entropy"):
        raise ScenarioError("representation", f"must be 'energy' or 'entropy', got {representation!r}")
    if native == "entropy" and representation != "entropy":
        raise ScenarioError("representation", f"{process} is defined in the entropy representation")

    pdoc = doc.get("params", {}) or {}
    if not isinstance(pdoc, Mapping) or set(pdoc) - {"A", "C", "K", "a"}:
        raise ScenarioError("params", "expected a mapping with keys among A, C, K, a")
    A = _number(pdoc.get("A", 1.0), "params.A", positive=True)
    C = _number(pdoc.get("C", 1.5), "params.C", positive=True)
    K = _number(pdoc["K"], "params.K", positive=True) if "K" in pdoc else None
    a = _number(pdoc.get("a", 0.1), "params.a")
    if a < 0:
        raise ScenarioError("params.a", "interaction strength must be nonnegative")
    params = IdealGasParams(A, C, K)

    idoc = doc.get("integrator", {}) or {}
    if not isinstance(idoc, Mapping) or set(idoc) - {"method", "dt", "t_end", "rtol", "atol"}:
        raise ScenarioError("integrator", "expected a mapping with keys among method, dt, t_end, rtol, atol")
    try:
        integrator = IntegratorConfig(
            method=idoc.get("method", "rk4-fixed"),
            dt=_number(idoc.get("dt", 1e-3), "integrator.dt", positive=True),
            t_end=_number(idoc.get("t_end", 1.0), "integrator.t_end"),
            rtol=_number(idoc.get("rtol", 1e-9), "integrator.rtol", positive=True),
            atol=_number(idoc.get("atol", 1e-12), "integrator.atol", positive=True))
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError("integrator", str(exc)) from None

    tol = _number(doc.get("tol", 1e-6), "tol", positive=True)

    allowed = OC_CHECKS if process == OC_PROCESS else GAS_CHECKS
    checks = doc.get("checks", list(allowed))
    if not isinstance(checks, list) or any(c not in allowed for c in checks):
        raise ScenarioError("checks", f"expected a list drawn from {', '.join(allowed)}")

    odoc = doc.get("output", {}) or {}
    if isinstance(odoc, str):
        odoc = {"dir": odoc}
    if not isinstance(odoc, Mapping) or set(odoc) - {"dir", "long"}:
        raise ScenarioError("output", "expected a path or a mapping with keys dir, long")
    output = OutputSpec(odoc.get("dir"), bool(odoc.get("long", False)))

    oc = None
    if process == OC_PROCESS:
        oc = _parse_oc(doc.get("oc"))
        q0 = doc.get("initial", {"q": [1.0] + [0.0] * (oc.dim - 1)})
        if not isinstance(q0, Mapping) or "q" not in q0:
            raise ScenarioError("initial", "oc-system needs initial: {q: [...]}")
        initial = _vector(q0["q"], "initial.q", oc.dim)
    else:
        if "oc" in doc:
            raise ScenarioError("oc", f"only valid with process {OC_PROCESS}")
        initial = _parse_initial_gas(doc.get("initial"), params)
        if representation == "entropy" and not initial.T > 0:
            raise ScenarioError("initial", "entropy representation needs T > 0")

    return Scenario(name=name, process=process, representation=representation, params=params,
                    a=a, initial=initial, integrator=integrator, checks=tuple(checks), tol=tol,
                    output=output, oc=oc)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError("document", f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text)


# -- running -------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    note: str = ""


@dataclass
class RunReport:
    name: str
    process: str
    representation: str
    t_end: float
    endpoint: Dict[str, float]
    oracle: Optional[Dict[str, float]]
    rel_errors: Dict[str, float]
    monitors: Dict[str, Dict[str, float]]
    checks: List[CheckResult]
    trajectory: Optional[Trajectory] = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "process": self.process,
            "representation": self.representation,
            "t_end": self.t_end,
            "passed": self.passed,
            "endpoint": self.endpoint,
            "oracle": self.oracle,
            "rel_errors": self.rel_errors,
            "monitors": self.monitors,
            "checks": [vars(c) for c in self.checks],
        }


def relative_error(value: float, reference: float) -> float:
    """|value - reference| / |reference|, absolute when the reference vanishes."""
    d = abs(value - reference)
    return d / abs(reference) if abs(reference) > 1e-12 else d


def _check(name, value, tol, note=""):
    return CheckResult(name, float(value), float(tol), bool(abs(value) <= tol), note)


def _expected_defects(sc: Scenario, x0: GasState, t: float) -> Dict[str, float]:
    """Monitor values of the a/V flow at time t (the flow leaves the ideal-gas submanifold)."""
    at_v = sc.a * t / x0.V
    return {"euler": -2.0 * at_v, "gaslaw_pv": -at_v, "gaslaw_eq": -at_v, "onL": at_v}


def _domain(chart: str):
    # the entropy relation needs U > 0, and U is a coordinate in that chart
    if chart == "entropy":
        return positive_components([0, 1, 2], labels=["U", "V", "N"])
    return positive_components([1, 2], labels=["V", "N"])


def _run_gas(sc: Scenario) -> RunReport:
    cfg = sc.integrator
    h = sc.hamiltonian
    chart = sc.representation
    traj = integrate_contact_flow(
        h, sc.initial_point(), cfg, gas_monitors(h, chart, sc.params),
        domain=_domain(chart))
    end_state = sc.to_state(traj.final)
    endpoint = end_state.as_dict()
    proc = sc.analytic
    oracle_state = analytic_oracle(proc, sc.initial, cfg.t_end, sc.params)
    oracle = oracle_state.as_dict()
    rel = {k: relative_error(endpoint[k], oracle[k]) for k in STATE_KEYS}
    summary = monitor_report(traj)
    tol = sc.tol
    checks = []
    for c in sc.checks:
        if c == "oracle":
            checks.append(_check("oracle", max(rel.values()), tol))
        elif c == "h":
            if proc.conserves_equilibrium:
                checks.append(_check("h", summary["h"]["max"], tol))
            else:
                checks.append(_check("h", summary["h"]["drift"], tol, "h conserved along the flow"))
        else:
            names = ("gaslaw_pv", "gaslaw_eq") if c == "gaslaw" else (c,)
            for m in names:
                if proc.conserves_equilibrium:
                    checks.append(_check(m, summary[m]["max"], tol))
                else:
                    want = _expected_defects(sc, sc.initial, cfg.t_end)[m]
                    checks.append(_check(m, summary[m]["final"] - want, tol,
                                         f"expected-off-submanifold: final {summary[m]['final']:.9g}, "
                                         f"expected {want:.9g}"))
    return RunReport(sc.name, sc.process, sc.representation, cfg.t_end, endpoint, oracle, rel,
                     summary, checks, traj)


def _run_oc(sc: Scenario) -> RunReport:
    sys = sc.oc
    traj = oc_integrate(sys, sc.initial, sc.integrator)
    summary = monitor_report(traj)
    E, S = traj.monitors["E"], traj.monitors["S"]
    tol = sc.tol
    checks = []
    for c in sc.checks:
        if c == "energy":
            checks.append(_check("energy", np.max(np.abs(E - E[0])), tol))
        elif c == "entropy":
            worst = float(min(0.0, np.min(np.diff(S)))) if len(S) > 1 else 0.0
            checks.append(_check("entropy", worst, tol, "most negative entropy step"))
        elif c == "degeneracy":
            worst = max(max(degeneracy_residual(sys, q)) for q in traj.states)
            checks.append(_check("degeneracy", worst, DEGENERACY_TOL))
        elif c == "hj":
            stride = max(1, len(traj) // 50)
            checks.append(_check("hj", oc_geometric_hj_residual(sys, traj.states[::stride]), tol))
    endpoint = {f"q{i + 1}": float(v) for i, v in enumerate(traj.states[-1])}
    endpoint.update(E=float(E[-1]), S=float(S[-1]))
    return RunReport(sc.name, sc.process, sc.representation, sc.integrator.t_end, endpoint,
                     None, {}, summary, checks, traj)


def run_scenario(sc: Scenario, output_dir=None) -> RunReport:
    """
    Integrate a scenario, compare against its closed form when one exists,
    and write outputs when an output directory is given (argument or scenario).
    """
    report = _run_oc(sc) if sc.is_oc else _run_gas(sc)
    out = output_dir or sc.output.directory
    if out is not None:
        emit_outputs(report.trajectory, report, sc, out)
    log.info("%s: %s", sc.name, "pass" if report.passed else "FAIL")
    return report


# -- output --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_columns(traj: Trajectory) -> List[str]:
    if traj.kind == "phase":
        n = traj.n
        base = ["t", "s"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
    else:
        base = ["t"] + [f"q{i + 1}" for i in range(traj.n)]
    return base + list(traj.monitors)


def emit_outputs(traj: Trajectory, report: Optional[RunReport], sc: Scenario, directory) -> List[Path]:
    """Write ``trajectory.csv``, ``report.json`` and optionally ``trajectory_long.csv``."""
    d = Path(directory)
    written = []
    try:
        d.mkdir(parents=True, exist_ok=True)
        cols = trajectory_columns(traj)
        rows = [[t, *z, *(traj.monitors[m][i] for m in traj.monitors)]
                for i, (t, z) in enumerate(zip(traj.times, traj.states))]
        path = d / "trajectory.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            w.writerows([_fmt(v) for v in row] for row in rows)
        written.append(path)
        if sc.output.long_format:
            path = d / "trajectory_long.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["t", "variable", "value"])
                for row in rows:
                    for col, v in zip(cols[1:], row[1:]):
                        w.writerow([_fmt(row[0]), col, _fmt(v)])
            written.append(path)
        if report is not None:
            path = d / "report.json"
            path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
            written.append(path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write outputs to {exc.filename or d}: {exc.strerror}") from exc
    return written


# -- built-in scenarios -----------------------------------------------------------

DEFAULT_SCENARIOS: Dict[str, Dict[str, Any]] = {
    "isochoric-energy": {"process": "isochoric-energy", "initial": {"S": 0, "V": 1, "N": 1}},
    "isochoric-entropy": {"process": "isochoric-entropy", "initial": {"U": 1, "V": 1, "N": 1}},
    "isochoric-entropy-rep": {"name": "isochoric-entropy-rep", "process": "isochoric-energy",
                        "representation": "entropy", "initial": {"S": 0, "V": 1, "N": 1}},
    "isochoric-isothermal": {"process": "isochoric-isothermal", "initial": {"S": 0, "V": 1, "N": 1}},
    "ideal-to-interacting": {"process": "ideal-to-interacting", "params": {"a": 0.1},
                             "initial": {"S": 0, "V": 1, "N": 1}, "integrator": {"t_end": 2}},
    "oc3": {"name": "oc3", "process": OC_PROCESS, "oc": "oc3", "initial": {"q": [1, 0, 0]},
            "integrator": {"t_end": 6.283185307179586}},
}


def default_scenario(key: str) -> Scenario:
    doc = dict(DEFAULT_SCENARIOS[key])
    doc.setdefault("name", key)
    return parse_scenario(doc)
