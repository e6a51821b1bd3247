"""Batch front door: read a JSON problem file, dispatch, write a report.

Exit status: 0 success, 2 validation error (bad file / schema), 3 numerical
error (Singular, BlowUp, NotPolarization, ...).  Reports are byte-identical
for identical (input, seed, version).
"""

import csv
import hashlib
import io
import json
import os
import sys

import click
import numpy as np

from . import __version__, crossratio, flows, grassmann, numerics
from . import schwarzian as schwarz
from .errors import NumericalError

VERBS = ("dv", "angle", "equiv", "cocycle", "schwarz", "riccati",
         "hamiltonian", "flow", "selftest")

TOL_ENV_VAR = "OPCROSS_TOL"


# --- deterministic JSON with 17-significant-digit floats ------------------

def _format_float(x):
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError("non-finite float in report")
    text = format(float(x), ".17g")
    # Keep floats recognizably floats.
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def dumps_report(obj, indent=0):
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(f'{pad}  {json.dumps(str(k))}: {dumps_report(v, indent + 1)}'
                           for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{pad}  {dumps_report(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    raise TypeError(f"unserializable value of type {type(obj).__name__}")


def _jsonable(value):
    """Convert numpy scalars/arrays and complex numbers to plain JSON values."""
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, complex) or isinstance(value, np.complexfloating):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        if value.ndim == 2:
            return numerics.matrix_to_json(value)
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def emit_report(verb, seed, input_digest, results, error=None):
    report = {
        "version": __version__,
        "verb": verb,
        "seed": seed,
        "input_digest": input_digest,
    }
    if error is not None:
        report["error"] = error
    report["results"] = _jsonable(results)
    return dumps_report(report) + "\n"


def _spectrum_pairs(spectrum):
    return [[float(z.real), float(z.imag)] for z in spectrum]


# --- verb handlers --------------------------------------------------------

def _result_fields(result, wanted):
    out = {}
    for field in wanted:
        if field == "matrix":
            out["matrix"] = numerics.matrix_to_json(result.matrix)
        elif field == "spectrum":
            out["spectrum"] = _spectrum_pairs(result.spectrum)
        elif field == "traces":
            out["traces"] = [_jsonable(complex(t)) for t in result.trace_powers]
        elif field == "det":
            out["det"] = _jsonable(result.det)
        else:
            raise ValueError(f"unknown report field {field!r}")
    return out


def _handle_dv(data, seed, tol):
    subs = data["subspaces"]
    if not isinstance(subs, list) or len(subs) != 4:
        raise ValueError("'subspaces' must list exactly four subspaces")
    p1, p2, p3, p4 = (grassmann.Subspace.from_json(s) for s in subs)
    wanted = data.get("report", ["matrix", "spectrum", "traces", "det"])
    if p1.dim == p2.dim:
        result = crossratio.dv_composition(p1, p2, p3, p4)
    else:
        result = crossratio.dv_unequal(p1, p2, p3, p4)
    return _result_fields(result, wanted), None


def _handle_angle(data, seed, tol):
    a = numerics.matrix_from_json(data["a"])
    b = numerics.matrix_from_json(data["b"])
    result = crossratio.operator_angle(a, b)
    wanted = data.get("report", ["matrix", "spectrum", "traces", "det"])
    return _result_fields(result, wanted), None


def _handle_equiv(data, seed, tol):
    first = [grassmann.Subspace.from_json(s) for s in data["first"]]
    second = [grassmann.Subspace.from_json(s) for s in data["second"]]
    if len(first) != 2 or len(second) != 2:
        raise ValueError("'first' and 'second' must each list two subspaces")
    equivalent = crossratio.pair_equivalent(*first, *second, tol=tol)
    return {
        "equivalent": bool(equivalent),
        "angles_first": [float(a) for a in grassmann.principal_angles(*first)],
        "angles_second": [float(a) for a in grassmann.principal_angles(*second)],
    }, None


def _handle_cocycle(data, seed, tol):
    p = [grassmann.Subspace.from_json(s) for s in data["p"]]
    q = [grassmann.Subspace.from_json(s) for s in data["q"]]
    if len(p) != 2 or len(q) != 3:
        raise ValueError("'p' must list two subspaces and 'q' three")
    product = crossratio.cocycle_product(*p, *q)
    residual = numerics.fro(product - np.eye(product.shape[0]))
    return {"product": numerics.matrix_to_json(product),
            "residual": residual}, None


def _handle_schwarz(data, seed, tol):
    if "jet" in data:
        jet = schwarz.CurveJet.from_json(data["jet"])
        s = schwarz.schwarz(jet)
    elif "samples" in data:
        samples = [numerics.matrix_from_json(m) for m in data["samples"]]
        s = schwarz.schwarz_from_samples(samples, float(data["h"]))
    else:
        raise ValueError("schwarz input needs 'jet' or 'samples' + 'h'")
    return {"schwarzian": numerics.matrix_to_json(s),
            "spectrum": _spectrum_pairs(numerics.eigenvalues(s))}, None


def _trajectory_csv(ts, mats):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for t, m in zip(ts, mats):
        writer.writerow([_format_float(t)] +
                        [_format_float(v) for v in np.asarray(m).reshape(-1)])
    return buf.getvalue()


def _handle_riccati(data, seed, tol):
    sys_ = schwarz.HamiltonianSystem.from_json(data["system"])
    w0 = numerics.matrix_from_json(data["w0"])
    ts, ws = schwarz.integrate_riccati(sys_, w0, float(data["t0"]),
                                       float(data["t1"]), int(data.get("steps", 1000)))
    results = {"t_final": float(ts[-1]),
               "w_final": numerics.matrix_to_json(ws[-1]),
               "steps": len(ts) - 1}
    return results, _trajectory_csv(ts, ws)


def _handle_hamiltonian(data, seed, tol):
    sys_ = schwarz.HamiltonianSystem.from_json(data["system"])
    x0 = schwarz.PhasePoint(numerics.matrix_from_json(data["q0"]),
                            numerics.matrix_from_json(data["p0"]))
    ts, points = schwarz.integrate_hamiltonian(
        sys_, x0, float(data["t0"]), float(data["t1"]), int(data.get("steps", 1000)))
    rows = [np.concatenate([pt.q.reshape(-1), pt.p.reshape(-1)]) for pt in points]
    results = {"t_final": float(ts[-1]),
               "q_final": numerics.matrix_to_json(points[-1].q),
               "p_final": numerics.matrix_to_json(points[-1].p),
               "steps": len(ts) - 1}
    return results, _trajectory_csv(ts, rows)


def _handle_flow(data, seed, tol):
    scenario = flows.FlowScenario.from_json(data)
    table = flows.spectrum_along_flow(scenario)
    results = {"rows": [{"t": t,
                         "spectrum": _spectrum_pairs(spec),
                         "traces": [_jsonable(complex(v)) for v in traces],
                         "det": _jsonable(det)}
                        for t, spec, traces, det in table]}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for t, spec, traces, det in table:
        row = [_format_float(t)]
        for z in spec:
            row += [_format_float(z.real), _format_float(z.imag)]
        row += [_format_float(complex(v).real) for v in traces]
        row.append(_format_float(complex(det).real))
        writer.writerow(row)
    return results, buf.getvalue()


def _handle_selftest(data, seed, tol):
    from . import selftest
    checks = selftest.run_all(seed=seed, tol=tol)
    results = {"checks": [{"name": name, "passed": bool(ok), "detail": detail}
                          for name, ok, detail in checks]}
    if not all(ok for _, ok, _ in checks):
        raise NumericalError("selftest failed: " + ", ".join(
            name for name, ok, _ in checks if not ok))
    return results, None


_HANDLERS = {
    "dv": _handle_dv,
    "angle": _handle_angle,
    "equiv": _handle_equiv,
    "cocycle": _handle_cocycle,
    "schwarz": _handle_schwarz,
    "riccati": _handle_riccati,
    "hamiltonian": _handle_hamiltonian,
    "flow": _handle_flow,
    "selftest": _handle_selftest,
}


def run(verb, input_path, output_path, seed=0, tol=None):
    """Execute one command; returns the process exit status (0, 2 or 3)."""
    if verb not in _HANDLERS:
        raise ValueError(f"unknown verb {verb!r}")
    if tol is None:
        tol = float(os.environ.get(TOL_ENV_VAR, "1e-6"))

    def write_report(results, error=None):
        text = emit_report(verb, seed, digest, results, error)
        if output_path:
            with open(output_path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)

    digest = ""
    raw = b""
    if verb != "selftest":
        if input_path is None:
            print("error: this verb requires --in FILE", file=sys.stderr)
            return 2
        try:
            with open(input_path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            print(f"error: cannot read input: {exc}", file=sys.stderr)
            return 2
    digest = hashlib.sha256(raw).hexdigest()
    try:
        data = json.loads(raw) if raw else {}
        if not isinstance(data, dict):
            raise ValueError("input must be a JSON object")
    except (ValueError, UnicodeDecodeError) as exc:
        try:
            write_report({}, error=f"ValidationError: {exc}")
        except OSError:
            pass
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        results, csv_text = _HANDLERS[verb](data, seed, tol)
    except NumericalError as exc:
        write_report({}, error=f"{type(exc).__name__}: {exc}")
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        detail = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        try:
            write_report({}, error=f"ValidationError: {detail}")
        except OSError:
            pass
        print(f"error: {detail}", file=sys.stderr)
        return 2

    write_report(results)
    if csv_text is not None and output_path:
        with open(_csv_path(output_path), "w") as fh:
            fh.write(csv_text)
    return 0


def _csv_path(output_path):
    root, _ = os.path.splitext(output_path)
    return root + ".csv"


def _verb_command(verb):
    @click.command(name=verb, help=f"Run the {verb} operation on a JSON input file.")
    @click.option("--in", "input_path", type=click.Path(), default=None,
                  help="Input JSON file.")
    @click.option("--out", "output_path", type=click.Path(), default=None,
                  help="Report JSON file (trajectory verbs also write a .csv sibling).")
    @click.option("--seed", type=int, default=0, show_default=True)
    @click.option("--tol", type=float, default=None,
                  help=f"Decision tolerance (default from ${TOL_ENV_VAR} or 1e-6).")
    def command(input_path, output_path, seed, tol):
        sys.exit(run(verb, input_path, output_path, seed, tol))

    return command


@click.group()
@click.version_option(__version__)
def main():
    """Operator cross-ratio toolkit."""


for _verb in VERBS:
    main.add_command(_verb_command(_verb))


if __name__ == "__main__":
    main()
