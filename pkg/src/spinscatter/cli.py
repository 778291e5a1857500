"""Command-line front end for the scattering library.

Commands: amplitudes (scalar barrier), filter (pinned-spin impurity), kondo
(exchange impurity), concentrate (pair concentration through either
impurity), entangle-particles, entangle-impurities, sweep (grid evaluation
of any protocol), selftest (deterministic invariant checks).

Output formats: table (human-oriented, 6 decimal places), csv (RFC-4180,
CRLF row endings, 12 significant digits), json (complex values as {re, im}
objects, floats rounded to 12 significant digits).  Identical invocations
produce byte-identical csv/json streams; nothing time- or host-dependent is
written to them.  Sweep's argmax summary goes to stderr in csv/json modes
so the data stream stays exactly the record table.

Parameter precedence: command-line flag, then --config JSON file (same key
names as the flags without the leading dashes), then built-in defaults; the
default output format alone may also come from the SPINSCATTER_FORMAT
environment variable (weaker than flag and config file).

Exit status: 0 success; 1 input, usage, or I/O error with a one-line
"error: ..." diagnostic on stderr; 2 internal invariant violation with a
one-line "internal fault: ..." diagnostic on stderr.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

from dataclasses import dataclass

import numpy as np

from .channels import (
    EXCHANGE_EIGENVALUE_PRESETS,
    FixedImpurity,
    KondoImpurity,
    embed,
    exchange_matrix,
    fixed_filter_operators,
    kondo_channel_amplitudes,
    kondo_operators,
)
from .errors import InternalFaultError
from .protocols import (
    GridSpec,
    concentrate_fixed,
    concentrate_kondo,
    entangle_impurities,
    entangle_particles,
    optimal_coupling_fixed,
    run_protocol,
    sweep,
)
from .scattering import (
    TwoImpurityGeometry,
    matrix_amplitudes,
    scalar_amplitudes,
    two_impurity_exact,
)

_FORMATS = ("table", "csv", "json")
_FORMAT_ENV = "SPINSCATTER_FORMAT"


@dataclass(frozen=True)
class RunConfig:
    """Fully validated invocation: command, typed parameters, output routing."""

    command: str
    params: dict
    fmt: str
    output: str | None


# ---------------------------------------------------------------------------
# Number formatting (the byte-exact part of the output contract)

def _round12(x: float) -> float:
    """Round to 12 significant digits; the value JSON serializes."""
    return float(format(float(x), ".12g"))


def _f12(x: float) -> str:
    """12-significant-digit text for CSV cells."""
    return format(float(x), ".12g")


def _f6(x) -> str:
    return "-" if x is None else f"{float(x):.6f}"


def _c6(z: complex) -> str:
    return f"{z.real:.6f}{z.imag:+.6f}i"


def _cobj(z: complex) -> dict:
    return {"re": _round12(z.real), "im": _round12(z.imag)}


def _cmatrix(m: np.ndarray) -> list:
    return [[_cobj(z) for z in row] for row in np.asarray(m)]


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _columns(header, rows, indent="") -> list[str]:
    cells = [list(header)] + [list(r) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    return [
        (indent + "  ".join(c.ljust(w) for c, w in zip(row, widths))).rstrip()
        for row in cells
    ]


# ---------------------------------------------------------------------------
# Record emission (sweep tables and anything record-shaped)

def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return _f12(v)
    return str(v)


def emit_records(records, fmt: str, fieldnames=None) -> str:
    """Serialize flat records as csv, json, or an aligned text table.

    records: mapping-like rows with identical keys.  fieldnames fixes the
    column order (required when records is empty).  CSV is RFC-4180 with
    CRLF row endings and 12-significant-digit floats; JSON is an array of
    flat objects carrying the same keys; table keeps 6 decimal places.
    """
    rows = [dict(r) for r in records]
    if fieldnames is None:
        if not rows:
            raise ValueError("fieldnames are required to emit an empty record list")
        fieldnames = tuple(rows[0].keys())
    fieldnames = tuple(fieldnames)
    for row in rows:
        if tuple(row.keys()) != fieldnames:
            raise ValueError("records are not homogeneous with the given fieldnames")

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_csv_cell(row[name]) for name in fieldnames])
        return buf.getvalue()
    if fmt == "json":
        out = []
        for row in rows:
            out.append({
                name: (_round12(v) if isinstance(v, float) else v)
                for name, v in ((n, row[n]) for n in fieldnames)
            })
        return _json_text(out)
    if fmt == "table":
        body = [
            [_f6(row[n]) if isinstance(row[n], float) or row[n] is None else str(row[n])
             for n in fieldnames]
            for row in rows
        ]
        return "\n".join(_columns(fieldnames, body)) + "\n"
    raise ValueError(f"unknown output format: {fmt!r}")


# ---------------------------------------------------------------------------
# Command handlers (params arrive typed and underscore-keyed)

def _cmd_amplitudes(p, fmt):
    amps = scalar_amplitudes(p["r"], p["k"])
    s, r = amps.transmission, amps.reflection
    values = (
        ("S", s), ("R", r),
        ("abs_S2", abs(s) ** 2), ("abs_R2", abs(r) ** 2), ("xi", amps.xi),
    )
    if fmt == "json":
        return _json_text({
            "S": _cobj(s), "R": _cobj(r),
            "abs_S2": _round12(abs(s) ** 2), "abs_R2": _round12(abs(r) ** 2),
            "xi": _round12(amps.xi),
        })
    if fmt == "csv":
        row = {"S_re": s.real, "S_im": s.imag, "R_re": r.real, "R_im": r.imag,
               "abs_S2": abs(s) ** 2, "abs_R2": abs(r) ** 2, "xi": amps.xi}
        return emit_records([row], "csv", tuple(row.keys()))
    rows = [(name, _c6(v) if isinstance(v, complex) else _f6(v)) for name, v in values]
    return "\n".join(_columns(("name", "value"), rows)) + "\n"


def _operator_text(ops, fmt, extra_json=None, channel=None):
    t, r = ops.transmission, ops.reflection
    if fmt == "json":
        obj = dict(extra_json or {})
        obj["transmission"] = _cmatrix(t)
        obj["reflection"] = _cmatrix(r)
        if channel is not None:
            obj["channel_amplitudes"] = [_cobj(s) for s in channel]
        return _json_text(obj)
    if fmt == "csv":
        rows = [
            {"row": i, "col": j,
             "T_re": t[i, j].real, "T_im": t[i, j].imag,
             "R_re": r[i, j].real, "R_im": r[i, j].imag}
            for i in range(t.shape[0]) for j in range(t.shape[1])
        ]
        return emit_records(rows, "csv", ("row", "col", "T_re", "T_im", "R_re", "R_im"))
    lines = ["transmission:"]
    lines += ["  " + "  ".join(_c6(z) for z in row) for row in t]
    lines.append("reflection:")
    lines += ["  " + "  ".join(_c6(z) for z in row) for row in r]
    if channel is not None:
        lines.append("channel amplitudes:")
        lines.append("  " + "  ".join(_c6(s) for s in channel))
    return "\n".join(lines) + "\n"


def _cmd_filter(p, fmt):
    spec = FixedImpurity(p["r"], p.get("axis", (0.0, 0.0, 1.0)))
    ops = fixed_filter_operators(spec, p["k"])
    extra = {"k": _round12(p["k"]), "r": _round12(p["r"]),
             "axis": [_round12(x) for x in spec.axis]}
    return _operator_text(ops, fmt, extra)


def _kondo_spec(p) -> KondoImpurity:
    ev = p.get("eigenvalues", "default")
    if isinstance(ev, str):
        if ev not in EXCHANGE_EIGENVALUE_PRESETS:
            known = ", ".join(sorted(EXCHANGE_EIGENVALUE_PRESETS))
            raise ValueError(f"unknown eigenvalue preset {ev!r} (known: {known})")
        ev = EXCHANGE_EIGENVALUE_PRESETS[ev]
    return KondoImpurity(p["r"], ev)


def _cmd_kondo(p, fmt):
    spec = _kondo_spec(p)
    ops = kondo_operators(spec, p["k"])
    channel = kondo_channel_amplitudes(spec, p["k"])
    extra = {"k": _round12(p["k"]), "r": _round12(p["r"]),
             "eigenvalues": [_round12(x) for x in spec.eigenvalues]}
    return _operator_text(ops, fmt, extra, channel)


_OUTCOME_FIELDS = ("branch", "probability", "conditional_probability",
                   "entropy_bits", "concurrence")


def _outcome_rows(result):
    return [
        {"branch": o.branch_label,
         "probability": o.branch_probability,
         "conditional_probability": o.conditional_probability,
         "entropy_bits": o.entropy_bits,
         "concurrence": o.concurrence}
        for o in result.outcomes
    ]


def _render_protocol(result, fmt) -> str:
    rows = _outcome_rows(result)
    if fmt == "json":
        outcomes = []
        for o, row in zip(result.outcomes, rows):
            entry = {k: (_round12(v) if isinstance(v, float) else v) for k, v in row.items()}
            entry["state"] = None if o.post_state is None else {
                "labels": list(o.post_state.labels),
                "amplitudes": [_cobj(z) for z in o.post_state.amplitudes],
            }
            outcomes.append(entry)
        obj = {
            "outcomes": outcomes,
            "tree": [{"branch": b.label, "probability": _round12(b.probability)}
                     for b in result.tree.branches],
            "total_probability": _round12(result.tree.total_probability()),
            "metadata": {k: _round12(v) for k, v in result.metadata.items()},
        }
        return _json_text(obj)
    if fmt == "csv":
        return emit_records(rows, "csv", _OUTCOME_FIELDS)
    lines = ["outcomes:"]
    body = [[str(r["branch"])] + [_f6(r[n]) for n in _OUTCOME_FIELDS[1:]] for r in rows]
    lines += _columns(_OUTCOME_FIELDS, body, indent="  ")
    lines.append("tree:")
    for b in result.tree.branches:
        lines.append(f"  {b.label}  {b.probability:.6f}")
    lines.append(f"  total  {result.tree.total_probability():.6f}")
    if result.metadata:
        lines.append("metadata:")
        for name, value in result.metadata.items():
            lines.append(f"  {name}  {value:.6f}")
    return "\n".join(lines) + "\n"


def _cmd_concentrate(p, fmt):
    kind = p.get("impurity", "fixed")
    args = {"a": p["a_coeff"], "k": p["k"]}
    for src, dst in (("b_coeff", "b"), ("a_phase", "a_phase"), ("b_phase", "b_phase"),
                     ("r", "r"), ("axis", "axis"), ("eigenvalues", "eigenvalues")):
        if src in p:
            args[dst] = p[src]
    if kind == "fixed":
        args.pop("eigenvalues", None)
        result = run_protocol("concentrate", args)
    else:
        args.pop("axis", None)
        result = run_protocol("concentrate-kondo", args)
    return _render_protocol(result, fmt)


def _cmd_entangle_particles(p, fmt):
    args = {k: p[k] for k in ("k", "r", "eigenvalues", "initial") if k in p}
    return _render_protocol(run_protocol("entangle-particles", args), fmt)


def _cmd_entangle_impurities(p, fmt):
    keys = ("k", "r1", "r2", "half_separation", "mode", "eigenvalues", "initial")
    args = {k: p[k] for k in keys if k in p}
    return _render_protocol(run_protocol("entangle-impurities", args), fmt)


def _cmd_sweep(p, fmt):
    result = sweep(p["protocol"], p["grid"], p.get("fixed"), p.get("objective", "entropy"))
    rows = []
    for rec in result.records:
        row = {name: rec.params[name] for name in (g.name for g in p["grid"])}
        row.update(rec.metrics)
        rows.append(row)
    text = emit_records(rows, fmt, result.fieldnames)
    argmax = "argmax: " + "  ".join(
        f"{k}={v if isinstance(v, str) else _f12(v)}" for k, v in result.argmax.items()
    )
    if fmt == "table":
        return text + argmax + "\n"
    print(argmax, file=sys.stderr)
    return text


# ---------------------------------------------------------------------------
# Selftest: deterministic invariant checks, exit 2 on any violation

def _check_scalar_unitarity():
    dev = 0.0
    for xi in np.linspace(-10.0, 10.0, 401):
        amps = scalar_amplitudes(float(xi), 1.0)
        dev = max(dev, abs(abs(amps.transmission) ** 2 + abs(amps.reflection) ** 2 - 1.0))
    return dev, 1e-12


def _check_matrix_flux():
    rng = np.random.default_rng(8201)
    dev = 0.0
    for i in range(30):
        d = (2, 4, 8)[i % 3]
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m = (m + m.conj().T) / 2.0
        ops = matrix_amplitudes(m, float(rng.uniform(0.5, 5.0)))
        t, r = ops.transmission, ops.reflection
        dev = max(dev, float(np.max(np.abs(
            t.conj().T @ t + r.conj().T @ r - np.eye(d)
        ))))
    return dev, 1e-11


def _check_zero_coupling_identity():
    dev = 0.0
    for ev in EXCHANGE_EIGENVALUE_PRESETS.values():
        t = kondo_operators(KondoImpurity(0.0, ev), 1.7).transmission
        dev = max(dev, float(np.max(np.abs(t - np.eye(4)))))
    t = fixed_filter_operators(FixedImpurity(0.0), 2.3).transmission
    dev = max(dev, float(np.max(np.abs(t - np.eye(2)))))
    return dev, 1e-15


def _check_channel_construction():
    rng = np.random.default_rng(314)
    dev = 0.0
    for _ in range(20):
        r = float(rng.uniform(-2.0, 2.0))
        k = float(rng.uniform(0.5, 4.0))
        for ev in EXCHANGE_EIGENVALUE_PRESETS.values():
            direct = kondo_operators(KondoImpurity(r, ev), k).transmission
            solved = matrix_amplitudes(r * exchange_matrix(ev), k).transmission
            dev = max(dev, float(np.max(np.abs(direct - solved))))
    return dev, 1e-12


def _check_two_impurity_conservation():
    rng = np.random.default_rng(99)
    dev = 0.0
    for _ in range(10):
        m1 = embed(float(rng.uniform(-1.5, 1.5)) * exchange_matrix(), 3, (2, 1))
        m2 = embed(float(rng.uniform(-1.5, 1.5)) * exchange_matrix(), 3, (2, 0))
        geom = TwoImpurityGeometry(float(rng.uniform(0.3, 3.0)),
                                   float(rng.uniform(0.5, 4.0)), m1, m2)
        res = two_impurity_exact(geom)
        t, r = res.transmission, res.reflection
        dev = max(dev, float(np.max(np.abs(
            t.conj().T @ t + r.conj().T @ r - np.eye(8)
        ))))
    return dev, 1e-10


def _check_concentration_optimum():
    a, b = math.sqrt(1.0 / 3.0), math.sqrt(2.0 / 3.0)
    r = optimal_coupling_fixed(a, b, 1.0)
    res = concentrate_fixed(a, b, 1.0, r)
    return max(abs(r - 0.5), abs(res.outcomes[0].entropy_bits - 1.0)), 1e-9


def _check_tree_completeness():
    rng = np.random.default_rng(4242)
    dev = 0.0
    for i in range(12):
        a = math.sqrt(float(rng.uniform(0.05, 0.5)))
        b = math.sqrt(1.0 - a * a)
        k = float(rng.uniform(0.5, 3.0))
        r = float(rng.uniform(0.1, 2.0))
        results = (
            concentrate_fixed(a, b, k, r),
            concentrate_kondo(a, b, k, KondoImpurity(r)),
            entangle_particles(k, KondoImpurity(r)),
            entangle_impurities(k, KondoImpurity(r), KondoImpurity(0.7 * r),
                                mode=("exact" if i % 2 else "first-order")),
        )
        for res in results:
            dev = max(dev, abs(res.tree.total_probability() - 1.0))
    return dev, 1e-10


_SELFTEST_CHECKS = (
    ("scalar unitarity", _check_scalar_unitarity),
    ("matrix barrier flux", _check_matrix_flux),
    ("zero-coupling identity", _check_zero_coupling_identity),
    ("channel construction cross-check", _check_channel_construction),
    ("two-impurity conservation", _check_two_impurity_conservation),
    ("concentration optimum", _check_concentration_optimum),
    ("event-tree completeness", _check_tree_completeness),
)


def _cmd_selftest(p, fmt):
    lines = []
    for name, check in _SELFTEST_CHECKS:
        dev, bound = check()
        if not math.isfinite(dev) or dev >= bound:
            raise InternalFaultError(
                f"selftest {name}: deviation {dev:.3e} not below {bound:.0e}"
            )
        lines.append(f"PASS {name} (max deviation {dev:.3e} < {bound:.0e})")
    lines.append(f"selftest: {len(_SELFTEST_CHECKS)} checks passed")
    return "\n".join(lines) + "\n"


_HANDLERS = {
    "amplitudes": _cmd_amplitudes,
    "filter": _cmd_filter,
    "kondo": _cmd_kondo,
    "concentrate": _cmd_concentrate,
    "entangle-particles": _cmd_entangle_particles,
    "entangle-impurities": _cmd_entangle_impurities,
    "sweep": _cmd_sweep,
    "selftest": _cmd_selftest,
}


# ---------------------------------------------------------------------------
# Argument parsing, config-file merge, typed conversion

class _Parser(argparse.ArgumentParser):
    """argparse with the exit-status contract: usage problems exit 1."""

    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _to_float(name, value):
    if isinstance(value, bool):
        raise ValueError(f"unparsable number for --{name}: {value!r}")
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"unparsable number for --{name}: {value!r}") from None
    if not math.isfinite(x):
        raise ValueError(f"--{name} must be finite, got {value!r}")
    return x


def _to_positive(name, value):
    x = _to_float(name, value)
    if x <= 0.0:
        raise ValueError(f"{name.replace('-', ' ')} must be positive")
    return x


def _to_choice(options):
    def convert(name, value):
        v = str(value)
        if v not in options:
            raise ValueError(f"--{name} must be one of: {', '.join(options)} (got {v!r})")
        return v
    return convert


def _to_axis(name, value):
    parts = value.split(",") if isinstance(value, str) else list(value)
    if len(parts) != 3:
        raise ValueError(f"--{name} needs three comma-separated components")
    return tuple(_to_float(name, part) for part in parts)


def _to_eigenvalues(name, value):
    if isinstance(value, str) and "," not in value:
        return value  # preset name, validated downstream
    parts = value.split(",") if isinstance(value, str) else list(value)
    if len(parts) != 4:
        raise ValueError(f"--{name} needs a preset name or four comma-separated numbers")
    return tuple(_to_float(name, part) for part in parts)


def _to_grid(name, value):
    specs = [value] if isinstance(value, str) else list(value)
    grids = []
    for text in specs:
        parts = str(text).split(":")
        if len(parts) not in (4, 5):
            raise ValueError(
                f"--{name} {text!r}: expected name:start:stop:points[:scale]"
            )
        try:
            points = int(parts[3])
        except ValueError:
            raise ValueError(f"--{name} {text!r}: unparsable point count {parts[3]!r}") from None
        scale = parts[4] if len(parts) == 5 else "linear"
        try:
            grids.append(GridSpec(parts[0], _to_float(name, parts[1]),
                                  _to_float(name, parts[2]), points, scale))
        except ValueError as exc:
            raise ValueError(f"--{name} {text!r}: {exc}") from None
    return grids


def _to_fixed(name, value):
    if isinstance(value, dict):
        return {str(k).replace("-", "_"): v for k, v in value.items()}
    pairs = [value] if isinstance(value, str) else list(value)
    out = {}
    for text in pairs:
        text = str(text)
        if "=" not in text:
            raise ValueError(f"--{name} {text!r}: expected name=value")
        key, raw = text.split("=", 1)
        try:
            out[key.replace("-", "_")] = float(raw)
        except ValueError:
            out[key.replace("-", "_")] = raw
    return out


def _to_str(name, value):
    return str(value)


# Per-command parameter tables: flag name -> (converter, repeatable, help).
_COMMON = {"config": "path of a JSON file holding the same keys as the flags",
           "format": "output format: table, csv, or json",
           "output": "write the result to this file instead of stdout"}

_PARAMS = {
    "amplitudes": {
        "k": (_to_positive, False, "wave number (positive)"),
        "r": (_to_float, False, "delta-barrier coupling strength"),
    },
    "filter": {
        "k": (_to_positive, False, "wave number (positive)"),
        "r": (_to_float, False, "bare filter coupling"),
        "axis": (_to_axis, False, "impurity spin axis as x,y,z (default 0,0,1)"),
    },
    "kondo": {
        "k": (_to_positive, False, "wave number (positive)"),
        "r": (_to_float, False, "exchange coupling"),
        "eigenvalues": (_to_eigenvalues, False,
                        "channel eigenvalue preset name or four comma-separated values"),
    },
    "concentrate": {
        "a-coeff": (_to_float, False, "magnitude of the |00> amplitude"),
        "b-coeff": (_to_float, False, "magnitude of the |11> amplitude (default sqrt(1-a^2))"),
        "a-phase": (_to_float, False, "phase of the |00> amplitude in radians"),
        "b-phase": (_to_float, False, "phase of the |11> amplitude in radians"),
        "k": (_to_positive, False, "wave number (positive)"),
        "r": (_to_float, False, "coupling (fixed impurity default: the optimum)"),
        "impurity": (_to_choice(("fixed", "kondo")), False, "impurity kind (default fixed)"),
        "axis": (_to_axis, False, "fixed-impurity spin axis as x,y,z"),
        "eigenvalues": (_to_eigenvalues, False, "kondo channel eigenvalues"),
    },
    "entangle-particles": {
        "k": (_to_positive, False, "wave number (positive)"),
        "r": (_to_float, False, "exchange coupling"),
        "eigenvalues": (_to_eigenvalues, False, "channel eigenvalues"),
        "initial": (_to_str, False, "initial bits, particle-2 particle-1 impurity-0 (default 001)"),
    },
    "entangle-impurities": {
        "k": (_to_positive, False, "wave number (positive)"),
        "r1": (_to_float, False, "first impurity exchange coupling"),
        "r2": (_to_float, False, "second impurity exchange coupling"),
        "half-separation": (_to_positive, False, "impurities sit at -+ this distance (default 1)"),
        "mode": (_to_choice(("first-order", "exact")), False, "composition mode"),
        "eigenvalues": (_to_eigenvalues, False, "channel eigenvalues"),
        "initial": (_to_str, False, "initial bits, particle-0 impurity-1 impurity-2 (default 100)"),
    },
    "sweep": {
        "protocol": (_to_str, False, "protocol name, e.g. concentrate or entangle-particles"),
        "grid": (_to_grid, True, "swept parameter as name:start:stop:points[:scale]"),
        "fixed": (_to_fixed, True, "pinned parameter as name=value"),
        "objective": (_to_choice(("entropy", "probability")), False, "argmax objective"),
    },
    "selftest": {},
}

_REQUIRED = {
    "amplitudes": ("k", "r"),
    "filter": ("k", "r"),
    "kondo": ("k", "r"),
    "concentrate": ("a-coeff", "k"),
    "entangle-particles": ("k", "r"),
    "entangle-impurities": ("k", "r1", "r2"),
    "sweep": ("protocol", "grid"),
    "selftest": (),
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="spinscatter",
                     description="Delta-potential spin scattering and entanglement protocols.")
    subs = parser.add_subparsers(dest="command", metavar="command")
    for command, table in _PARAMS.items():
        sub = subs.add_parser(command, help=f"run the {command} command")
        for flag, (_, repeatable, help_text) in table.items():
            sub.add_argument(f"--{flag}", dest=flag, default=None, help=help_text,
                             **({"action": "append"} if repeatable else {}))
        for flag, help_text in _COMMON.items():
            sub.add_argument(f"--{flag}", dest=f"common_{flag}", default=None, help=help_text)
    return parser


def _load_config(parser, path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        parser.error(f"config file is not valid JSON: {exc}")
    if not isinstance(data, dict):
        parser.error("config file must hold a single JSON object")
    return data


def parse_args(argv=None) -> RunConfig:
    """Parse flags (+ optional config file) into a validated RunConfig.

    Exits with status 1 and a one-line "error: ..." diagnostic on any usage
    problem; --help exits with status 0.
    """
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.error(f"missing command (one of: {', '.join(_PARAMS)})")
    command = ns.command
    table = _PARAMS[command]

    file_values = {}
    if ns.common_config is not None:
        file_values = _load_config(parser, ns.common_config)
        known = set(table) | set(_COMMON) - {"config"}
        for key in file_values:
            if key not in known:
                parser.error(f"unknown config key {key!r} for command {command}")

    params = {}
    try:
        for flag, (convert, repeatable, _) in table.items():
            value = getattr(ns, flag)
            if value is None:
                value = file_values.get(flag)
            if value is None:
                continue
            if repeatable:
                merged = convert(flag, value) if not isinstance(value, list) \
                    else [item for v in value for item in _as_items(convert(flag, v))]
                params[flag.replace("-", "_")] = merged
            else:
                params[flag.replace("-", "_")] = convert(flag, value)
    except ValueError as exc:
        parser.error(str(exc))

    for flag in _REQUIRED[command]:
        if flag.replace("-", "_") not in params:
            parser.error(f"missing required parameter --{flag}")

    fmt = ns.common_format or file_values.get("format") \
        or os.environ.get(_FORMAT_ENV) or "table"
    if fmt not in _FORMATS:
        parser.error(f"--format must be one of: {', '.join(_FORMATS)} (got {fmt!r})")
    output = ns.common_output or file_values.get("output")
    return RunConfig(command, params, fmt, output)


def _as_items(converted):
    # grid conversion yields a list per flag occurrence; fixed yields a dict
    return converted if isinstance(converted, list) else [converted]


def _merge_repeated(command, params):
    # repeated --fixed flags each produce a dict; fold them into one mapping
    if command == "sweep" and isinstance(params.get("fixed"), list):
        folded = {}
        for part in params["fixed"]:
            folded.update(part)
        params["fixed"] = folded
    return params


def run(config: RunConfig) -> int:
    """Execute a validated RunConfig; returns the process exit status."""
    try:
        handler = _HANDLERS[config.command]
        text = handler(_merge_repeated(config.command, dict(config.params)), config.fmt)
        if config.output:
            with open(config.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InternalFaultError as exc:
        print(f"internal fault: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    try:
        config = parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    return run(config)
