"""Scenario runner: config file in, CSV trajectory and JSON summary out.

Usage::

    qheom run --config run.cfg [--scenario fig1] [--out fig1.csv] [--override L=8 ...]

The config file is flat ``key = value`` text; ``#`` starts a comment.
"""

import argparse
import configparser
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from qheom import qmat
from qheom.bath import DrudeParams, build_expansion
from qheom.entangle import concurrence
from qheom.heom import (
    HierarchyState,
    SystemModel,
    apply_pulse,
    equilibrate,
    factorize,
    propagate,
)
from qheom.redfield import build_redfield, propagate_redfield
from qheom.toymodel import ToyParams, system_bath_coherence

log = logging.getLogger("qheom")

SCENARIOS = (
    "fig1",
    "fig2-correlated",
    "fig2-factorized",
    "redfield-fig1",
    "redfield-fig2",
    "toymodel",
    "convergence-sweep",
)

# config key -> RunConfig attribute
KEYS = {
    "epsilon": "epsilon",
    "J": "J",
    "lambda": "lam",
    "gamma": "gamma",
    "beta": "beta",
    "L": "L",
    "M": "M",
    "dt": "dt",
    "tEnd": "t_end",
    "sampleStride": "sample_stride",
    "scenario": "scenario",
    "outputPath": "output_path",
    "tEq": "t_eq",
    "equilibrationDt": "eq_dt",
    "stationarityTol": "stationarity_tol",
    "zeroTol": "zero_tol",
}


class ConfigError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class RunConfig:
    epsilon: float = 1.5
    J: float = 1.0
    lam: float = 0.3
    gamma: float = 0.5
    beta: float = 2.5
    L: int = 6
    M: int = 2
    dt: float = 1e-3
    t_end: float = 10.0
    sample_stride: int = 10
    scenario: str = "fig1"
    output_path: str = "trajectory.csv"
    t_eq: float = 100.0
    eq_dt: float = 1e-2
    stationarity_tol: float = 1e-7
    zero_tol: float = 1e-6

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if not self.lam >= 0:
            raise ConfigError("lambda must be non-negative")
        for name in ("gamma", "beta", "dt", "t_end", "t_eq", "eq_dt", "stationarity_tol", "zero_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.L < 0 or self.M < 0:
            raise ConfigError("L and M must be non-negative")
        if self.sample_stride < 1:
            raise ConfigError("sampleStride must be >= 1")

    @property
    def params(self):
        return DrudeParams(self.lam, self.gamma, self.beta)

    @classmethod
    def from_mapping(cls, values):
        fields = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            attr = KEYS[key]
            kind = fields[attr]
            try:
                kwargs[attr] = _coerce(raw, kind)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return cls(**kwargs)


def _coerce(raw, kind):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip().strip('"').strip("'")
    if kind in (int, "int"):
        return int(raw)
    if kind in (float, "float"):
        return float(raw)
    return raw


def read_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return dict(parser["run"])


def parse_overrides(items):
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not key=value")
        out[key.strip()] = value
    return out


# --- scenarios -------------------------------------------------------------

def bell_state():
    """(|10> - |01>) / sqrt(2), the single-excitation singlet."""
    phi = (qmat.ket("10") - qmat.ket("01")) / np.sqrt(2)
    return qmat.projector(phi)


def _setup(cfg, M=None):
    system = SystemModel.build(cfg.epsilon, cfg.J)
    expansion = build_expansion(cfg.params, cfg.M if M is None else M)
    return system, expansion


def run_fig1(cfg, L=None, M=None, dt=None):
    system, expansion = _setup(cfg, M)
    L = cfg.L if L is None else L
    dt = cfg.dt if dt is None else dt
    stride = cfg.sample_stride * int(round(cfg.dt / dt))
    state = HierarchyState.from_density_matrix(bell_state(), expansion.M, L)
    return propagate(state, system, expansion, dt=dt, t_end=cfg.t_end, sample_stride=stride)


def equilibrium_state(cfg):
    system, expansion = _setup(cfg)
    return equilibrate(system, expansion, cfg.L, t_eq=cfg.t_eq,
                       stationarity_tol=cfg.stationarity_tol, dt=cfg.eq_dt)


def pulsed_states(cfg, equilibrium=None):
    """(correlated, factorised) hierarchies right after the pulse on qubit 1."""
    eq = equilibrium_state(cfg) if equilibrium is None else equilibrium
    return apply_pulse(eq, 1), apply_pulse(factorize(eq), 1)


def run_fig2(cfg, correlated=True, equilibrium=None):
    system, expansion = _setup(cfg)
    corr, fact = pulsed_states(cfg, equilibrium)
    start = corr if correlated else fact
    return propagate(start, system, expansion, dt=cfg.dt, t_end=cfg.t_end,
                     sample_stride=cfg.sample_stride)


def run_redfield(cfg, rho0):
    system = SystemModel.build(cfg.epsilon, cfg.J)
    gen = build_redfield(system, cfg.params)
    return propagate_redfield(gen, rho0, cfg.dt * cfg.sample_stride, cfg.t_end)


def sup_diff(a, b):
    """Sup-norm concurrence difference on the common sample times."""
    common, ia, ib = np.intersect1d(np.round(a.times, 9), np.round(b.times, 9),
                                    return_indices=True)
    if len(common) == 0:
        raise ValueError("trajectories share no sample times")
    return float(np.max(np.abs(a.concurrence[ia] - b.concurrence[ib])))


def convergence_sweep(cfg):
    base = run_fig1(cfg)
    deeper = run_fig1(cfg, L=cfg.L + 2)
    more_mats = run_fig1(cfg, M=cfg.M + 1)
    finer = run_fig1(cfg, dt=cfg.dt / 2)
    deltas = {
        f"L{cfg.L}->L{cfg.L + 2}": sup_diff(base, deeper),
        f"M{cfg.M}->M{cfg.M + 1}": sup_diff(base, more_mats),
        "dt->dt/2": sup_diff(base, finer),
    }
    return base, deltas


def toymodel_table(eps_grid=(0.5, 1.0, 1.5, 2.0), g_grid=(0.0, 0.25, 0.5, 1.0),
                   beta_grid=(0.5, 1.0, 2.5, 4.0)):
    rows = []
    for eps in eps_grid:
        for g in g_grid:
            for beta in beta_grid:
                closed, numeric = system_bath_coherence(ToyParams(eps, g, beta))
                rows.append((eps, g, beta, closed.real, numeric.real, abs(closed - numeric)))
    return rows


# --- output ----------------------------------------------------------------

def csv_header():
    re = [f"re_rho_{i}{j}" for i in range(4) for j in range(4)]
    im = [f"im_rho_{i}{j}" for i in range(4) for j in range(4)]
    return ["t", "C", "eof", *re, *im, "trace_error", "min_eig"]


def fmt(x):
    x = float(x)
    if x == 0:
        x = 0.0
    return f"{x:.12g}"


def emit_csv(traj, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header())
        for k in range(len(traj)):
            rho = traj.rhos[k].reshape(-1)
            row = [traj.times[k], traj.concurrence[k], traj.eof[k], *rho.real, *rho.imag,
                   traj.trace_error[k], traj.min_eig[k]]
            writer.writerow([fmt(v) for v in row])


def trajectory_summary(traj, zero_tol):
    report = traj.death_revival(zero_tol)
    return {
        "samples": len(traj),
        "death_intervals": [list(iv) for iv in report.death_intervals],
        "revival_times": list(report.revival_times),
        "equilibrium_concurrence": traj.equilibrium_concurrence(),
        "max_trace_error": float(np.max(traj.trace_error)),
        "max_hermiticity_defect": float(np.max(traj.hermiticity)),
        "min_eigenvalue": float(np.min(traj.min_eig)),
    }


def run_scenario(cfg):
    """Run one scenario; returns (trajectory or None, summary dict)."""
    summary = {"scenario": cfg.scenario, "config": dataclasses.asdict(cfg)}
    traj = None
    if cfg.scenario == "fig1":
        traj = run_fig1(cfg)
    elif cfg.scenario in ("fig2-correlated", "fig2-factorized"):
        traj = run_fig2(cfg, correlated=cfg.scenario == "fig2-correlated")
    elif cfg.scenario == "redfield-fig1":
        traj = run_redfield(cfg, bell_state())
    elif cfg.scenario == "redfield-fig2":
        corr, _ = pulsed_states(cfg)
        traj = run_redfield(cfg, corr.rho)
    elif cfg.scenario == "toymodel":
        rows = toymodel_table()
        summary["toymodel_max_abs_diff"] = max(r[-1] for r in rows)
        summary["toymodel_rows"] = len(rows)
        with open(cfg.output_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["epsilon", "g", "beta", "closed_form", "numeric", "abs_diff"])
            for r in rows:
                writer.writerow([fmt(v) for v in r])
        return None, summary
    elif cfg.scenario == "convergence-sweep":
        traj, deltas = convergence_sweep(cfg)
        summary["convergence_deltas"] = deltas
    summary.update(trajectory_summary(traj, cfg.zero_tol))
    if cfg.scenario in ("fig1", "redfield-fig1", "fig2-correlated", "fig2-factorized", "redfield-fig2"):
        system = SystemModel.build(cfg.epsilon, cfg.J)
        summary["gibbs_concurrence_numeric"] = concurrence(qmat.gibbs_state(system.hS, cfg.beta))
    emit_csv(traj, cfg.output_path)
    return traj, summary


def build_parser():
    parser = argparse.ArgumentParser(prog="qheom", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--config", required=True)
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--out", help="CSV output path")
    run.add_argument("--override", nargs="*", default=[], metavar="KEY=VALUE")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        values = read_config(args.config)
        values.update(parse_overrides(args.override))
        if args.scenario:
            values["scenario"] = args.scenario
        if args.out:
            values["outputPath"] = args.out
        cfg = RunConfig.from_mapping(values)
        _, summary = run_scenario(cfg)
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    summary_path = Path(cfg.output_path).with_suffix(".summary.json")
    text = json.dumps(summary, indent=2, sort_keys=True)
    summary_path.write_text(text + "\n")
    print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
