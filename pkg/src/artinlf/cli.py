"""Command-line front end: ``artinlf <subcommand> [flags]``.

Every subcommand accepts ``--config FILE`` holding ``key = value`` lines;
flags given on the command line override config keys.  Exit codes: 0 on
success, 2 for usage errors, 3 for validation errors, 4 for computation
errors.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import math
import os
import sys
import tempfile

from .errors import ArtinLFError, ComputationError, DomainError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_COMPUTATION = 0, 2, 3, 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config and value parsing


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if not key:
            raise UsageError(f"config line {lineno}: empty key")
        out[key] = value
    return out


def parse_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None


def parse_complex(text) -> complex:
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip()
    if "," in s:
        re_s, im_s = s.split(",", 1)
        return complex(float(re_s), float(im_s))
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise DomainError(f"cannot parse complex number {text!r}") from None


def parse_curve(text) -> list[int]:
    try:
        vals = ast.literal_eval(str(text))
    except (ValueError, SyntaxError):
        raise DomainError(f"cannot parse curve {text!r}; expected [a1,a2,a3,a4,a6]") from None
    if not isinstance(vals, (list, tuple)) or len(vals) != 5 or not all(isinstance(v, int) for v in vals):
        raise DomainError("curve must be five integers [a1,a2,a3,a4,a6]")
    return list(vals)


def _int(name, value):
    try:
        return int(str(value))
    except ValueError:
        raise DomainError(f"{name} must be an integer, got {value!r}") from None


def _float(name, value):
    try:
        return float(str(value))
    except ValueError:
        raise DomainError(f"{name} must be a number, got {value!r}") from None


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".artinlf-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------- shared builders

CURVE_KEYS = {"curve", "conductor"}
REP_KEYS = {"rep", "rep_file", "twist"}


def _build_curve(params):
    from .lfunction import EllipticCurve

    if "curve" not in params or "conductor" not in params:
        raise DomainError("both 'curve' and 'conductor' are required")
    return EllipticCurve.from_ainvs(parse_curve(params["curve"]), _int("conductor", params["conductor"]))


def _build_rep(params):
    from .artin import CharacterSum, ingest_external
    from .characters import DirichletCharacter

    if params.get("rep_file"):
        rho = ingest_external(params["rep_file"])
    else:
        rho = CharacterSum.parse(params.get("rep", "trivial"))
    if params.get("twist"):
        rho = rho.twist(DirichletCharacter.parse(params["twist"]))
    return rho


# ---------------------------------------------------------------- subcommands


def cmd_charsum(params, args):
    from .characters import primitive_char_sum

    n, p, a = (_int(k, params.get(k)) for k in ("n", "p", "a"))
    print(primitive_char_sum(n, p, a))
    return EXIT_OK


def cmd_ramification(params, args):
    from .ramification import CyclotomicTower, eta, eta_lower_bound

    p, m, n, i = (_int(k, params.get(k)) for k in ("p", "m", "n", "i"))
    tower = CyclotomicTower(p, m, n)
    value = eta(tower, i)
    s = round(math.log(i + 1, p)) if i >= 0 else -1
    text = f"eta = {value}"
    if i >= 1 and p ** s - 1 == i and 1 <= m <= s:
        bound = eta_lower_bound(p, m, s)
        text += f" {'>=' if value >= bound else '<'} bound {bound}"
    print(text)
    return EXIT_OK


def cmd_conductor(params, args):
    from .lfunction import pair_conductor

    curve = _build_curve(params)
    rho = _build_rep(params)
    if params.get("p"):
        p = _int("p", params["p"])
        a = _int("a", params.get("a", "1"))
        N = pair_conductor(curve, rho, p, a)
    else:
        N = pair_conductor(curve, rho)
    lines = [f"N_E = {curve.conductor}", f"N_rho = {rho.conductor}", f"dim_rho = {rho.dim}", f"N = {N}"]
    _emit("\n".join(lines) + "\n", params.get("out"))
    return EXIT_OK


def cmd_coefficients(params, args):
    from .lfunction import dirichlet_coefficients

    curve = _build_curve(params)
    rho = _build_rep(params)
    cutoff = _int("cutoff", params.get("cutoff", "100"))
    seed = _int("seed", params.get("seed", "1"))
    table = dirichlet_coefficients(curve, rho, cutoff, seed=seed)
    rows = [{"n": n, "c_re": float(table.values[n].real), "c_im": float(table.values[n].imag)}
            for n in range(1, cutoff + 1)]
    _emit(_csv(rows, ["n", "c_re", "c_im"]), params.get("out"))
    return EXIT_OK


def cmd_lvalue(params, args):
    from .afe import afe_value, afe_weights, default_y_pair, solve_root_number
    from .lfunction import dirichlet_coefficients, pair_conductor

    curve = _build_curve(params)
    rho = _build_rep(params)
    beta = parse_complex(params.get("beta", "1"))
    tol = _float("tol", params.get("tol", "1e-12"))
    seed = _int("seed", params.get("seed", "1"))
    N = pair_conductor(curve, rho)
    d = rho.dim
    y = _float("y", params["y"]) if params.get("y") else 1.0 / math.sqrt(N)
    if not y > 0:
        raise DomainError("y must be positive")
    ys = [y] + list(default_y_pair(N))
    need = max(max(w.m1, w.m2) for w in (afe_weights(d, beta, N, yy, tol) for yy in ys))
    table = dirichlet_coefficients(curve, rho, need, seed=seed)
    dual = table.conj()
    if params.get("w") and not _flag(params.get("solve_w")):
        w = parse_complex(params["w"])
    else:
        w = solve_root_number(beta, table, dual, N, d, tol=tol)
    v = afe_value(beta, y, w, table, dual, N, d, tol)
    row = {"beta_re": beta.real, "beta_im": beta.imag, "value_re": v.value.real, "value_im": v.value.imag,
           "w_re": w.real, "w_im": w.imag, "error_estimate": v.error_estimate, "y": v.y_used,
           "truncation_n": v.truncation_n, "conductor": N}
    _emit(_csv([row], list(row)), params.get("out"))
    return EXIT_OK


EXPERIMENT_KEYS = CURVE_KEYS | REP_KEYS | {"p", "a_min", "a_max", "beta", "gamma", "epsilon", "tol",
                                           "nonvanishing_threshold", "seed", "threads", "out", "no_timing"}
REPORT_COLUMNS = ["a", "primitive_count", "A1_re", "A1_im", "S1_re", "S1_im", "S2_re", "S2_im", "ratio1", "ratio2",
                  "nonvanishing_count", "max_error_estimate", "wall_time_s"]


def _flag(value) -> bool:
    return str(value).strip().lower() in ("1", "true", "yes", "on") if value is not None else False


def build_experiment_config(params):
    from .average import ExperimentConfig

    if "p" not in params:
        raise DomainError("experiment needs 'p'")
    kwargs = dict(curve=_build_curve(params), rep=_build_rep(params), p=_int("p", params["p"]))
    if params.get("a_min"):
        kwargs["a_min"] = _int("a_min", params["a_min"])
    ints = {"a_max": _int, "seed": _int, "threads": _int}
    floats = {"gamma": _float, "epsilon": _float, "tol": _float, "nonvanishing_threshold": _float}
    for key, conv in {**ints, **floats}.items():
        if params.get(key) is not None:
            kwargs[key] = conv(key, params[key])
    if params.get("beta") is not None:
        kwargs["beta"] = parse_complex(params["beta"])
    return ExperimentConfig(**kwargs)


def cmd_experiment(params, args):
    from .average import report_rows, run_experiment

    cfg = build_experiment_config(params)
    report = run_experiment(cfg)
    rows = report_rows(report, timing=not _flag(params.get("no_timing")))
    _emit(_csv(rows, REPORT_COLUMNS), params.get("out"))
    return EXIT_OK


def cmd_selftest(params, args):
    from .selftest import run_selftest

    return run_selftest(module_filter=params.get("filter"), fault=params.get("inject_fault"))


# (keys accepted, handler)
SUBCOMMANDS = {
    "charsum": ({"n", "p", "a"}, cmd_charsum),
    "ramification": ({"p", "m", "n", "i"}, cmd_ramification),
    "conductor": (CURVE_KEYS | REP_KEYS | {"p", "a", "out"}, cmd_conductor),
    "coefficients": (CURVE_KEYS | REP_KEYS | {"cutoff", "seed", "out"}, cmd_coefficients),
    "lvalue": (CURVE_KEYS | REP_KEYS | {"beta", "y", "w", "solve_w", "tol", "seed", "out"}, cmd_lvalue),
    "experiment": (EXPERIMENT_KEYS, cmd_experiment),
    "selftest": ({"filter", "inject_fault"}, cmd_selftest),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artinlf", description="Twisted elliptic-curve L-values and averages.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    helps = {
        "charsum": "sum of chi(n) over primitive chi mod p^a",
        "ramification": "eta function of a cyclotomic tower",
        "conductor": "conductor N(E, rho) or N(E, rho x chi)",
        "coefficients": "Dirichlet coefficients as CSV n,c_re,c_im",
        "lvalue": "completed L-value through the approximate functional equation",
        "experiment": "average of twisted L-values over primitive characters",
        "selftest": "run the built-in invariant checks",
    }
    for name, (keys, _) in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--config", help="file of 'key = value' lines")
        for key in sorted(keys):
            flag = "--" + key.replace("_", "-")
            if key in ("solve_w", "no_timing"):
                sp.add_argument(flag, dest=key, action="store_const", const="true", default=None)
            else:
                sp.add_argument(flag, dest=key, default=None)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    keys, handler = SUBCOMMANDS[args.command]
    try:
        params = parse_config(args.config) if args.config else {}
        unknown = set(params) - keys
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {', '.join(sorted(unknown))}")
        for key in keys:
            value = getattr(args, key, None)
            if value is not None:
                params[key] = value
        return handler(params, args)
    except UsageError as exc:
        print(f"artinlf: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"artinlf: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ComputationError, ArtinLFError) as exc:
        print(f"artinlf: computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
