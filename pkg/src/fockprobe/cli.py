"""Command-line front end: every computation as a CSV/JSON table.

Exit codes: 0 success, 1 failed verification, 2 usage or domain error,
3 truncation error, 4 degenerate statistics or post-selection.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import fock, ladder, optics, probe, verify
from .errors import (
    DegeneratePostSelectionError,
    DegenerateStatisticsError,
    DomainError,
    TruncationError,
)
from .tables import Table, render

EXIT_USAGE = 2
EXIT_TRUNCATION = 3
EXIT_DEGENERATE = 4

STATE_KINDS = ("number", "coherent", "thermal", "mixed01", "custom-json")


@dataclass(frozen=True)
class StateSpec:
    """One point of a state descriptor grid."""

    kind: str
    value: complex | float | int | None = None
    path: str | None = None

    def __str__(self) -> str:
        if self.kind == "custom-json":
            return f"custom-json({self.path})"
        key = {"number": "m", "coherent": "alpha", "thermal": "nbar", "mixed01": "p"}[self.kind]
        return f"{self.kind}({key}={self.value})"

    @property
    def param(self):
        if isinstance(self.value, complex):
            return abs(self.value) ** 2
        return self.value

    def build(self, cutoff: int | None = None, headroom: int = 3) -> fock.State:
        """Construct the state; a missing cutoff is chosen from the tail rule plus ``headroom``."""
        if self.kind == "number":
            return fock.make_number_state(int(self.value), cutoff or int(self.value) + headroom)
        if self.kind == "coherent":
            cut = cutoff or fock.auto_cutoff(alpha=self.value, tail=1e-16) + headroom
            return fock.make_coherent_state(self.value, cut)[0]
        if self.kind == "thermal":
            cut = cutoff or fock.auto_cutoff(nbar=self.value, tail=1e-16) + headroom
            return fock.make_thermal_density(self.value, cut)[0]
        if self.kind == "mixed01":
            return fock.make_mixed01(self.value, cutoff or 1 + headroom)
        return fock.loads(Path(self.path).read_text())

    def closed_form_id(self, profile: ladder.CoefficientProfile) -> float | None:
        """Known value of ``I_d`` for this state and profile, if any."""
        kind = profile.kind
        if kind is ladder.ProfileKind.CLASSICAL and self.kind != "custom-json":
            return 1.0
        if kind is ladder.ProfileKind.BOSONIC:
            return {
                "number": lambda v: v + 1.0,
                "coherent": lambda v: 1.0 + abs(v) ** 2,
                "thermal": lambda v: 1.0 + v,
                "mixed01": lambda v: 1.0 + v,
            }.get(self.kind, lambda v: None)(self.value)
        if kind is ladder.ProfileKind.FERMIONIC:
            if self.kind == "mixed01":
                return 1.0 - self.value
            if self.kind == "number" and self.value in (0, 1):
                return 1.0 - self.value
        return None

    def closed_form_moment(self, order: int) -> float | None:
        if self.kind == "number":
            return math.factorial(int(self.value) + order) / math.factorial(int(self.value))
        if self.kind == "coherent":
            return ladder.laguerre_moment_coherent(self.value, order)
        if self.kind == "thermal":
            return ladder.power_moment_thermal(self.value, order)
        if self.kind == "mixed01":
            p = self.value
            return (1 - p) * math.factorial(order) + p * math.factorial(order + 1)
        return None


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def state_grid(args) -> list[StateSpec]:
    kind = args.state
    if kind == "number":
        return [StateSpec(kind, int(m)) for m in _floats(args.m)]
    if kind == "coherent":
        return [StateSpec(kind, complex(x.strip())) for x in args.alpha.split(",") if x.strip()]
    if kind == "thermal":
        return [StateSpec(kind, v) for v in _floats(args.nbar)]
    if kind == "mixed01":
        return [StateSpec(kind, v) for v in _floats(args.p)]
    if not args.state_file:
        raise DomainError("--state custom-json needs --state-file")
    return [StateSpec(kind, path=args.state_file)]


def single_state(args) -> StateSpec:
    grid = state_grid(args)
    if len(grid) != 1:
        raise DomainError("this command takes a single state, not a grid")
    return grid[0]


# --- commands -------------------------------------------------------------------


def cmd_id_scan(points: list[StateSpec], profile: ladder.CoefficientProfile, cutoff=None) -> Table:
    table = Table(["state", "param", "profile", "cutoff", "id_numeric", "id_closed_form", "abs_diff"])
    for point in points:
        state = point.build(cutoff)
        value = ladder.indistinguishability(state, profile)
        closed = point.closed_form_id(profile)
        table.add(
            state=str(point),
            param=point.param,
            profile=str(profile),
            cutoff=state.cutoff,
            id_numeric=value,
            id_closed_form=closed,
            abs_diff=None if closed is None else abs(value - closed),
        )
    return table


def cmd_moments(point: StateSpec, max_order: int, cutoff=None) -> Table:
    state = point.build(cutoff, headroom=max_order + 3)
    table = Table(["state", "order", "moment_matrix", "moment_closed_form", "moment_q", "q_tail", "rel_diff"])
    for n in range(max_order + 1):
        value = ladder.higher_moment(state, n)
        closed = point.closed_form_moment(n)
        q = ladder.q_function_moment(state, n)
        table.add(
            state=str(point),
            order=n,
            moment_matrix=value,
            moment_closed_form=closed,
            moment_q=q.value,
            q_tail=q.boundary_tail,
            rel_diff=None if closed is None else abs(value - closed) / closed,
        )
    return table


def cmd_scissors(t2_grid, nbar_grid) -> Table:
    table = Table(["t2", "nbar", "p_sim", "p_closed", "success_prob"])
    for t2 in t2_grid:
        for nbar in nbar_grid:
            res = optics.quantum_scissors(nbar, math.sqrt(t2))
            table.add(t2=t2, nbar=nbar, p_sim=res.p, p_closed=res.p_closed_form,
                      success_prob=res.success_probability)
    return table


PROBE_COLUMNS = [
    "protocol", "state_descriptor", "param", "eta", "trials", "seed", "n0", "n1",
    "estimator", "estimator_paper_literal", "exact_expectation", "std_err", "bias",
]


def _probe_row(table: Table, rec: probe.CountRecord, point: StateSpec, param, eta, seed) -> None:
    table.add(
        protocol=rec.protocol,
        state_descriptor=str(point),
        param=param,
        eta=eta,
        trials=rec.trials,
        seed=seed,
        n0=rec.n0,
        n1=rec.n1,
        estimator=rec.estimator,
        estimator_paper_literal=rec.estimator_literal,
        exact_expectation=rec.exact_expectation,
        std_err=rec.standard_error,
        bias=rec.bias,
    )


def cmd_ndpa(point: StateSpec, cfg: probe.NdpaConfig, cutoff=None) -> Table:
    rec = probe.ndpa_sample(point.build(cutoff), cfg)
    table = Table(list(PROBE_COLUMNS))
    _probe_row(table, rec, point, cfg.s, cfg.eta, cfg.seed)
    return table


def cmd_jc(point: StateSpec, cfg: probe.JcConfig, cutoff=None) -> Table:
    rec = probe.jc_sample(point.build(cutoff), cfg)
    table = Table(list(PROBE_COLUMNS))
    _probe_row(table, rec, point, cfg.gt, cfg.efficiency, cfg.seed)
    return table


def cmd_bias(point: StateSpec, s_grid, gt_grid, cutoff=None) -> Table:
    table = Table(["protocol", "state_descriptor", "param", "estimator_expectation", "exact_expectation", "bias"])
    for row in probe.protocol_bias_report(point.build(cutoff), s_grid, gt_grid):
        table.add(protocol=row.protocol, state_descriptor=str(point), param=row.param,
                  estimator_expectation=row.estimator_expectation,
                  exact_expectation=row.exact_expectation, bias=row.bias)
    return table


# --- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockprobe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, state=True):
        if state:
            p.add_argument("--state", choices=STATE_KINDS, default="coherent")
            p.add_argument("--m", default="0,1,2,3,4,5", help="number-state occupations")
            p.add_argument("--alpha", default="1", help="coherent amplitudes, comma separated")
            p.add_argument("--nbar", default="1", help="thermal means, comma separated")
            p.add_argument("--p", default="0.5", help="mixed01 probabilities, comma separated")
            p.add_argument("--state-file", help="JSON state for --state custom-json")
            p.add_argument("--cutoff", type=int, help="per-mode cutoff (default: automatic)")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("id-scan", help="indistinguishability over a state grid")
    common(p)
    p.add_argument("--profile", default="bosonic",
                   help="classical | bosonic | fermionic | custom:|k1|^2,|k2|^2,...")

    p = sub.add_parser("moments", help="higher-order antinormal moments")
    common(p)
    p.add_argument("--order", type=int, default=4)

    p = sub.add_parser("scissors", help="quantum-scissors mixing probability")
    common(p, state=False)
    p.add_argument("--t2", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    p.add_argument("--nbar", default="0.25,0.5,1,2,4")

    p = sub.add_parser("ndpa", help="sampled NDPA idler counting")
    common(p)
    p.add_argument("--s", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[m.value for m in probe.NdpaMode], default="first-order")

    p = sub.add_parser("jc", help="sampled Jaynes-Cummings atom detection")
    common(p)
    p.add_argument("--g", type=float, default=0.02)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=1.0, help="shared atom-detector efficiency")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[m.value for m in probe.JcMode], default="linearized")

    p = sub.add_parser("bias", help="approximation bias of both probe protocols")
    common(p)
    p.add_argument("--s", default="0.3,0.1,0.03,0.01")
    p.add_argument("--gt", default="0.2,0.1,0.05,0.02")

    p = sub.add_parser("state", help="dump a state as JSON")
    common(p)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--quick", action="store_true", help="fewer Monte Carlo trials")
    return parser


def run(args) -> int:
    if args.command == "verify":
        results = verify.run_all(quick=args.quick)
        for check in results:
            print(check.line())
        failed = [c for c in results if not c.passed]
        print(f"{len(results) - len(failed)}/{len(results)} invariants passed")
        return 1 if failed else 0

    if args.command == "state":
        text = fock.dumps(single_state(args).build(args.cutoff)) + "\n"
    else:
        if args.command == "id-scan":
            table = cmd_id_scan(state_grid(args), ladder.CoefficientProfile.parse(args.profile), args.cutoff)
        elif args.command == "moments":
            table = cmd_moments(single_state(args), args.order, args.cutoff)
        elif args.command == "scissors":
            table = cmd_scissors(_floats(args.t2), _floats(args.nbar))
        elif args.command == "ndpa":
            cfg = probe.NdpaConfig(s=args.s, eta=args.eta, trials=args.trials, seed=args.seed,
                                   mode=probe.NdpaMode(args.mode))
            table = cmd_ndpa(single_state(args), cfg, args.cutoff)
        elif args.command == "jc":
            cfg = probe.JcConfig(g=args.g, tau=args.tau, trials=args.trials, seed=args.seed,
                                 mode=probe.JcMode(args.mode), efficiency=args.eta)
            table = cmd_jc(single_state(args), cfg, args.cutoff)
        else:
            table = cmd_bias(single_state(args), _floats(args.s), _floats(args.gt), args.cutoff)
        text = render(table, args.format)

    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (DegenerateStatisticsError, DegeneratePostSelectionError) as exc:
        print(f"degenerate statistics: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DomainError, ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
