"""Command-line front end: distances, verification suites, CSV/JSON export.

Exit codes are a stable contract: 0 success, 1 validation failure,
2 solver non-convergence, 64 usage error.  All numeric output is printed
in scientific notation with 17 significant digits, and files are written
atomically (write to a temporary, then rename), so identical inputs and
config produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

import numpy as np

from .classical_ot import w2
from .errors import ConfigError, ConvergenceError, QMKError, ValidationError
from .linalg import DensityOperator, density_from_matrix
from .meanfield import EvolutionConfig, convergence_rate_check, default_potential
from .oscillator import OscillatorRep, coherent_state, fock_state, pure_density
from .phasespace import (DiscreteMeasure, PhaseSpaceGrid, default_grid,
                         default_reference, husimi, measure, toeplitz_quantize,
                         wigner)
from .quantum_ot import MKResult, SolverConfig, solve_mk
from .verify import SUITES, render_report, run_suite, suite_passed

USAGE_EXIT = 64


class _UsageError(Exception):
    """Bad command-line input discovered after argparse (exit 64)."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract here is 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _fmt(x) -> str:
    return f"{float(x):.16e}"


# ---------------------------------------------------------------------------
# config file


_SOLVER_KEYS = {
    "feas_tol": float, "obj_tol": float, "window": int, "max_iters": int,
    "polish_rounds": int, "check_every": int, "over_relax": float,
    "step_scale": float, "support_tol": float, "gap_tol": float,
}
_REP_KEYS = {"lambda": float, "n_basis": int}
_GRID_KEYS = {"x_half": float, "xi_half": float, "n_x": int, "n_xi": int}
_MEANFIELD_KEYS = {"dt": float, "t_final": float, "hbar": float, "n_basis": int}
_SECTIONS = {"solver": _SOLVER_KEYS, "rep": _REP_KEYS,
             "grid": _GRID_KEYS, "meanfield": _MEANFIELD_KEYS}


def _load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path is not None:
        try:
            with open(path) as fh:
                cp.read_file(fh, source=path)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        for section in cp.sections():
            keys = _SECTIONS.get(section)
            if keys is None:
                raise ConfigError(f"config {path}: unknown section [{section}]")
            for key in cp.options(section):
                if key not in keys:
                    raise ConfigError(
                        f"config {path}: unknown key {key!r} in [{section}]")
    return cp


def _section_values(cp: configparser.ConfigParser, section: str) -> dict:
    out = {}
    if cp.has_section(section):
        for key, cast in _SECTIONS[section].items():
            if cp.has_option(section, key):
                raw = cp.get(section, key)
                try:
                    out[key] = cast(raw)
                except ValueError as exc:
                    raise ConfigError(
                        f"config [{section}] {key}: cannot parse {raw!r}") from exc
    return out


def _solver_config(cp: configparser.ConfigParser) -> SolverConfig:
    return SolverConfig(**_section_values(cp, "solver"))


def _make_rep(args, cp: configparser.ConfigParser) -> OscillatorRep:
    """CLI flags override the [rep] section, which overrides the defaults."""
    vals = _section_values(cp, "rep")
    lam = args.lam if args.lam is not None else vals.get("lambda", 1.0)
    n_basis = args.n_basis if args.n_basis is not None else vals.get("n_basis", 16)
    return OscillatorRep(lam, n_basis)


def _make_grid(cp: configparser.ConfigParser, rep: OscillatorRep) -> PhaseSpaceGrid:
    vals = _section_values(cp, "grid")
    if not vals:
        return default_grid(rep)
    base = default_grid(rep)
    return PhaseSpaceGrid(vals.get("x_half", base.x_half),
                          vals.get("xi_half", base.xi_half),
                          vals.get("n_x", base.n_x),
                          vals.get("n_xi", base.n_xi))


# ---------------------------------------------------------------------------
# state specs and file formats


def _read_measure(path: str) -> DiscreteMeasure:
    """Plain-text atoms, one `weight q p` triple per line; # starts a comment."""
    rows = []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                body = line.split("#", 1)[0].strip()
                if not body:
                    continue
                parts = body.split()
                if len(parts) != 3:
                    raise ValidationError(
                        f"{path}:{lineno}: expected 'weight q p', got {body!r}")
                try:
                    rows.append([float(v) for v in parts])
                except ValueError as exc:
                    raise ValidationError(
                        f"{path}:{lineno}: non-numeric entry in {body!r}") from exc
    except OSError as exc:
        raise ValidationError(f"cannot read measure file {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"measure file {path} holds no atoms")
    return measure(rows)


def _read_kernel(path: str, rep: OscillatorRep) -> DensityOperator:
    """Square complex matrix stored as alternating re,im columns."""
    try:
        raw = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ValidationError(f"cannot read kernel file {path}: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"kernel file {path}: {exc}") from exc
    n, m = raw.shape
    if m != 2 * n:
        raise ValidationError(
            f"kernel file {path}: expected n rows x 2n columns of re,im pairs, "
            f"got shape {n} x {m}")
    if n != rep.dim:
        raise ValidationError(
            f"kernel file {path}: matrix is {n} x {n} but the basis has "
            f"dimension {rep.dim}; set --n-basis to match")
    mat = raw[:, 0::2] + 1j * raw[:, 1::2]
    return density_from_matrix(mat, rep.basis_tag)


def _parse_state(tokens: list[str], rep: OscillatorRep, flag: str) -> DensityOperator:
    kind = tokens[0]
    rest = tokens[1:]
    if kind == "coherent":
        if len(rest) != 2:
            raise _UsageError(f"{flag}: coherent takes <q> <p>")
        try:
            q, p = float(rest[0]), float(rest[1])
        except ValueError:
            raise _UsageError(f"{flag}: coherent wants numbers, got {rest}")
        return pure_density(rep, coherent_state(rep, q, p))
    if kind == "fock":
        if len(rest) != 1:
            raise _UsageError(f"{flag}: fock takes <n>")
        try:
            n = int(rest[0])
        except ValueError:
            raise _UsageError(f"{flag}: fock wants an integer, got {rest[0]!r}")
        return pure_density(rep, fock_state(rep, n))
    if kind == "toeplitz":
        if len(rest) != 1:
            raise _UsageError(f"{flag}: toeplitz takes <measure-file>")
        return toeplitz_quantize(rep, default_reference(rep), _read_measure(rest[0]))
    if kind == "kernel-file":
        if len(rest) != 1:
            raise _UsageError(f"{flag}: kernel-file takes <path>")
        return _read_kernel(rest[0], rep)
    raise _UsageError(
        f"{flag}: unknown state spec {kind!r} "
        "(coherent <q> <p> | fock <n> | toeplitz <measure-file> | kernel-file <path>)")


# ---------------------------------------------------------------------------
# output plumbing


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is not None:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _result_json(res: MKResult) -> str:
    fields = [f'"value_sq": {_fmt(res.value_sq)}',
              f'"lambda": {_fmt(res.lam)}',
              f'"iterations": {res.iterations}',
              f'"primal_residual": {_fmt(res.primal_residual)}',
              f'"dual_residual": {_fmt(res.dual_residual)}',
              f'"objective_gap": {_fmt(res.objective_gap)}']
    return "{" + ", ".join(fields) + "}\n"


def _field_csv(field) -> str:
    grid = field.grid
    lines = ["x,xi,value"]
    vals = field.values
    for i, x in enumerate(grid.xs):
        for j, xi in enumerate(grid.xis):
            lines.append(f"{_fmt(x)},{_fmt(xi)},{_fmt(vals[i, j])}")
    return "\n".join(lines) + "\n"


def _matrix_csv(mat: np.ndarray) -> str:
    lines = []
    for row in np.atleast_2d(mat):
        lines.append(",".join(f"{_fmt(v.real)},{_fmt(v.imag)}" for v in row))
    return "\n".join(lines) + "\n"


def _plan_csv(plan) -> str:
    order = np.lexsort((plan.cols, plan.rows))
    lines = ["i,j,mass"]
    for k in order:
        lines.append(f"{int(plan.rows[k])},{int(plan.cols[k])},{_fmt(plan.mass[k])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_solve(args) -> int:
    if args.a is None or args.b is None:
        raise _UsageError("solve needs both --a and --b state specs")
    cp = _load_config(args.config)
    rep = _make_rep(args, cp)
    cfg = _solver_config(cp)
    ka = _parse_state(args.a, rep, "--a")
    kb = _parse_state(args.b, rep, "--b")
    res = solve_mk(ka, kb, rep, cfg)
    _emit(_result_json(res), args.out)
    return 0


def _cmd_verify(args) -> int:
    rows = run_suite(args.suite, seed=args.seed)
    _emit(render_report(rows), args.out)
    return 0 if suite_passed(rows) else 1


def _cmd_export(args) -> int:
    if args.out is None:
        raise _UsageError("export needs --out <path>")
    cp = _load_config(args.config)
    rep = _make_rep(args, cp)

    if args.what in ("wigner", "husimi"):
        if args.a is None:
            raise _UsageError(f"export {args.what} needs --a <state-spec>")
        ka = _parse_state(args.a, rep, "--a")
        grid = _make_grid(cp, rep)
        if args.what == "wigner":
            field = wigner(ka, rep, grid)
        else:
            field = husimi(ka, rep, grid)
        _atomic_write(args.out, _field_csv(field))
        return 0

    if args.what == "coupling":
        if args.a is None or args.b is None:
            raise _UsageError("export coupling needs --a and --b state specs")
        cfg = _solver_config(cp)
        ka = _parse_state(args.a, rep, "--a")
        kb = _parse_state(args.b, rep, "--b")
        res = solve_mk(ka, kb, rep, cfg)
        _atomic_write(args.out, _matrix_csv(res.coupling.q.matrix))
        return 0

    if args.what == "plan":
        specs = (args.a, args.b)
        if any(s is None or s[0] != "toeplitz" or len(s) != 2 for s in specs):
            raise _UsageError(
                "export plan needs --a toeplitz <file> and --b toeplitz <file>")
        mu, nu = _read_measure(args.a[1]), _read_measure(args.b[1])
        _atomic_write(args.out, _plan_csv(w2(mu, nu).plan))
        return 0

    if args.what == "trajectory":
        vals = _section_values(cp, "meanfield")
        cfg = EvolutionConfig(dt=vals.get("dt", 2e-3),
                              t_final=vals.get("t_final", 0.5),
                              hbar=vals.get("hbar", 1.0),
                              n_basis=vals.get("n_basis", 16))
        if args.a is not None:
            if args.a[0] != "toeplitz" or len(args.a) != 2:
                raise _UsageError("export trajectory takes --a toeplitz <file> only")
            mu = _read_measure(args.a[1])
        else:
            mu = measure([[1.0, 0.5, 0.0]])
        gauss = default_reference(OscillatorRep(cfg.hbar, cfg.n_basis))
        t_list = [0.0, 0.5 * cfg.t_final, cfg.t_final]
        rows = convergence_rate_check(mu, gauss, gauss, default_potential(),
                                      cfg, t_list=t_list)
        lines = ["t,lhs,rhs,slack"]
        for r in rows:
            lines.append(f"{_fmt(r.t)},{_fmt(r.lhs)},{_fmt(r.rhs)},{_fmt(r.slack)}")
        _atomic_write(args.out, "\n".join(lines) + "\n")
        return 0

    raise _UsageError(f"unknown export kind {args.what!r}")


# ---------------------------------------------------------------------------
# parser


def _add_common(sub, with_states: bool) -> None:
    if with_states:
        sub.add_argument("--a", nargs="+", metavar="TOK",
                         help="state spec: coherent <q> <p> | fock <n> | "
                              "toeplitz <measure-file> | kernel-file <path>")
        sub.add_argument("--b", nargs="+", metavar="TOK",
                         help="second state spec, same forms as --a")
    sub.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="semiclassical scale (default 1 or [rep] lambda)")
    sub.add_argument("--n-basis", type=int, default=None,
                     help="basis levels (default 16 or [rep] n_basis)")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for any randomized checks (default 0)")
    sub.add_argument("--config", default=None,
                     help="INI config with [solver]/[rep]/[grid]/[meanfield]; "
                          "flags override the file")
    sub.add_argument("--out", default=None,
                     help="write the artifact to this path instead of stdout")


def build_parser() -> _Parser:
    parser = _Parser(prog="mk", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True,
                                 parser_class=_Parser)

    p_solve = subs.add_parser("solve", help="transport distance between two states")
    _add_common(p_solve, with_states=True)
    p_solve.set_defaults(func=_cmd_solve)

    p_verify = subs.add_parser("verify", help="run a named verification suite")
    p_verify.add_argument("suite", choices=sorted(SUITES))
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default=None)
    p_verify.set_defaults(func=_cmd_verify)

    p_export = subs.add_parser("export", help="write CSV artifacts")
    p_export.add_argument("what",
                          choices=["wigner", "husimi", "coupling", "plan",
                                   "trajectory"])
    _add_common(p_export, with_states=True)
    p_export.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rc = args.func(args)
    except _UsageError as exc:
        sys.stderr.write(f"mk: error: {exc}\n")
        return USAGE_EXIT
    except ConvergenceError as exc:
        sys.stderr.write(f"mk: solver did not converge: {exc}\n")
        return 2
    except QMKError as exc:
        sys.stderr.write(f"mk: {exc}\n")
        return 1
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
