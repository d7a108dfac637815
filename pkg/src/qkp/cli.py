"""Command-line entry point: ``qkp <command> ...``.

Every output embeds the run configuration.  JSON is written with sorted
keys, exact values as canonical strings and floats in shortest round-trip
form, so identical arguments give identical bytes.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dressing, geomzero, hslspec, nodal, taugrass
from .psdo import WindowError as PsdWindowError
from .psdo import _qtext, serialize
from .qcore import GaussianRational


class ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let values such as -1,0 through as complex numbers
        self._negative_number_matcher = re.compile(r"^-[\d.]")
        self._has_negative_number_optionals = []

    def error(self, message):
        raise ArgumentError(message)


def _complex_arg(text: str) -> complex:
    try:
        re_, im_ = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")
    return complex(re_, im_)


def _exact_pair(text: str) -> tuple:
    try:
        return tuple(Fraction(x.strip()) for x in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def thread_count(flag: int | None) -> int:
    if flag:
        return max(1, flag)
    env = os.environ.get("QKP_NUM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def ordered_map(fn, items, threads: int) -> list:
    """Map in a worker pool; results come back in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, GaussianRational):
        return str(x)
    return x


def write_json(path: str, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=1, allow_nan=True)
    Path(path).write_text(text + "\n")


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _sidecar(out: str) -> str:
    p = Path(out)
    return str(p.with_suffix(".json")) if p.suffix == ".csv" else out + ".json"


def _config(args) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        cfg[k] = v
    return cfg


# commands

def cmd_dress(args) -> dict:
    lo = args.lo
    dp = dressing.dress(dressing.lax_operator(lo), args.order)
    res = dressing.dressing_residual(dp)
    flows = {}
    for k in args.flows:
        for direction in ("s", "t"):
            try:
                Pp = dressing.flow_generator(dp, k, direction)
                flows[f"{direction}{k}"] = {"P_plus": serialize(Pp)}
            except dressing.DressingError as e:
                flows[f"{direction}{k}"] = {"error": str(e)}
    return {
        "config": _config(args),
        "order": args.order,
        "residual": serialize(res),
        "residual_valid_from": res.lo_valid,
        "dirac_potential": serialize_quaternion(dressing.dirac_potential(dp)),
        "flows": flows,
    }


def serialize_quaternion(q) -> str:
    return _qtext((q.a, q.b)) or "0"


def cmd_ds2(args) -> dict:
    dp = dressing.dress(dressing.lax_operator(args.lo), args.order)
    flow = dressing.lax_rhs(dp, dressing.flow_generator(dp, 2, "t"), "t2")
    table = {g.name(): str(v) for g, v in sorted(flow.velocities.items())}
    return {"config": _config(args), "flow": "t2", "velocities": table}


def _genus0_setup(args):
    d = geomzero.SpectralDataG0(args.epsilon)
    lp = geomzero.lattice_from_pair(d, args.q1, args.tol)
    S = geomzero.enumerate_S(lp, args.box)
    return d, lp, S


def cmd_genus0(args) -> dict:
    d, lp, S = _genus0_setup(args)
    meta = geomzero.metadata(d, lp, S)
    meta["config"] = _config(args)
    rng = np.random.default_rng(args.seed)
    zs = rng.uniform(-1, 1, 100) + 1j * rng.uniform(-1, 1, 100)
    meta["monodromy_defects"] = geomzero.monodromy_defects(d, lp, S, zs)
    mode = getattr(args, "mode", None)
    if mode == "torus":
        threads = thread_count(args.threads)
        z = geomzero.fundamental_grid(lp, args.grid).ravel()

        def block(m):
            a, b = geomzero.baker_arrays(d, z, S.points[m])
            return np.column_stack([z.real, z.imag, np.full(z.shape, m, dtype=float),
                                    a.real, a.imag, b.real, b.imag])

        rows = np.vstack(ordered_map(block, range(len(S)), threads))
        write_csv(args.out, ["x", "y", "m", "re_a", "im_a", "re_b", "im_b"],
                  ([r[0], r[1], int(r[2]), r[3], r[4], r[5], r[6]] for r in rows))
        meta["rows"] = int(rows.shape[0])
        meta["csv"] = args.out
        write_json(_sidecar(args.out), meta)
        return None
    if mode == "spectrum":
        h = hslspec.HSLData(lp.gens, lp.beta0)
        samples = []
        worst = 0.0
        for _ in range(args.samples):
            r = math.exp(rng.uniform(math.log(0.3), math.log(3.0)))
            Q = r * np.exp(1j * rng.uniform(0, 2 * math.pi))
            chis = [geomzero.multiplier_map(d, lp, Q, lam) for lam in lp.gens]
            eta, xi = hslspec.log_spectrum_point(chis, lp.gens)
            val, alpha = hslspec.min_F_over_box(h, eta, xi, args.cutoff)
            worst = max(worst, val)
            samples.append({"Q": complex(Q), "eta": eta, "xi": xi, "min_F": val, "alpha": complex(alpha)})
        meta["spectrum"] = {"samples": samples, "max_min_F": worst}
        meta["divisor_multipliers"] = [[geomzero.multiplier_map(d, lp, Q, lam) for lam in lp.gens]
                                       for Q in S.points]
    return meta


def cmd_darboux(args) -> dict:
    d = geomzero.SpectralDataG0(args.epsilon)
    src = nodal.ConstantTailBaker.from_genus0(d)
    t = nodal.darboux(src, args.kappa)
    xs = np.linspace(-1, 1, args.grid)
    X, Y = np.meshgrid(xs, xs)
    Z = (X + 1j * Y).ravel()
    rng = np.random.default_rng(args.seed)
    zetas = rng.uniform(1.5, 4, 20) * np.exp(1j * rng.uniform(0, 2 * math.pi, 20))
    tildef = nodal.tildef_residual(src, t, args.kappa, Z, zetas)
    dirac = max(float(np.max(t.dirac_residual(Z, zt))) for zt in zetas)
    meta = {
        "config": _config(args),
        "epsilon": d.epsilon,
        "kappa": complex(args.kappa),
        "potential_before": complex(src.potential(0j)),
        "potential_after": complex(t.potential(0j)),
        "tildef_residual": tildef,
        "dirac_residual": dirac,
    }
    if args.q1 is not None:
        lp = geomzero.lattice_from_pair(d, args.q1)
        S = geomzero.enumerate_S(lp)
        meta["periodicity"] = nodal.darboux_periodicity_check(d, lp, S, args.kappa, seed=args.seed)
    rows = []
    for m, zt in enumerate(zetas[: args.zetas]):
        a, b = t.psi(Z, zt)
        for k in range(Z.size):
            rows.append([Z[k].real, Z[k].imag, m, a[k].real, a[k].imag, b[k].real, b[k].imag])
    write_csv(args.out, ["x", "y", "m", "re_a", "im_a", "re_b", "im_b"], rows)
    meta["csv"] = args.out
    meta["test_zetas"] = [complex(z) for z in zetas[: args.zetas]]
    write_json(_sidecar(args.out), meta)
    return None


def cmd_hsl(args) -> dict:
    A, B = args.beta0
    l = args.lattice
    if len(l) != 4:
        raise ArgumentError("--lattice needs four numbers A,B,C,D")
    h = hslspec.HSLData((GaussianRational(l[0], l[1]), GaussianRational(l[2], l[3])), GaussianRational(A, B),
                        tol=args.tol)
    out = {"config": _config(args)}
    out.update(h.to_json())
    out["components"] = hslspec.components_json(h, args.box)
    out["singular_set"] = [complex(a) for a in hslspec.singular_set(h, args.box)]
    out["cusps"] = [complex(a) for a in hslspec.cusp_set(h, args.box)]
    if getattr(args, "mode", None) == "spectrum":
        xs = np.linspace(-args.extent, args.extent, args.grid)
        X, Y = np.meshgrid(xs, xs)
        etas = (X + 1j * Y).ravel()
        threads = thread_count(args.threads)
        chunks = [c for c in np.array_split(etas, max(1, threads)) if c.size]
        parts = ordered_map(lambda c: hslspec.numeric_spectrum(h, c, args.cutoff, args.tol), chunks, threads)
        # each part holds one block per alpha; interleave back to alpha-major order
        n_alpha = (2 * args.cutoff + 1) ** 2
        blocks = [np.split(p["cloud"], n_alpha) for p in parts]
        cloud = np.vstack([b[k] for k in range(n_alpha) for b in blocks])
        base = args.out[:-5] if args.out.endswith(".json") else args.out
        csv_path = base + ".cloud.csv"
        write_csv(csv_path, ["eta_re", "eta_im", "xi_re", "xi_im", "m", "n", "det_abs", "flagged"],
                  ([r[0], r[1], r[2], r[3], int(r[4]), int(r[5]), r[6], int(r[7])] for r in cloud))
        out["cloud"] = csv_path
        out["max_component_distance"] = max(p["max_component_distance"] for p in parts)
        out["flagged"] = int(cloud[:, 7].sum())
    return out


FIXTURES = ("vacuum", "onebox", "kp", "quaternionic", "random")


def tau_fixture(name: str, window: int, seed: int) -> taugrass.FiniteRankFrame:
    if name == "vacuum":
        f = taugrass.basis_frame(taugrass.IndexSet(), 1, 1)
    elif name == "onebox":
        f = taugrass.basis_frame(taugrass.IndexSet({-1}, {0}), 1, 1)
    elif name == "kp":
        f = taugrass.random_kp_frame(1, 1, seed)
    elif name == "quaternionic":
        f = taugrass.random_quaternionic_frame(1, 1, seed)
    elif name == "random":
        f = taugrass.random_frame(1, 1, seed)
    else:
        raise ArgumentError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    if window < 1:
        raise taugrass.WindowError("window must be >= 1")
    return f.enlarge(window, window)


def cmd_tau(args) -> dict:
    f = tau_fixture(args.fixture, args.window, args.seed)
    rng = np.random.default_rng(args.seed)
    samples = [[int(x) for x in rng.integers(-2, 3, 3)] for _ in range(args.samples)]
    out = taugrass.tau_json(f, samples)
    out["config"] = _config(args)
    out["window"] = [-f.M, f.Mp]
    out["in_big_cell"] = taugrass.in_big_cell(f)
    return out


def cmd_selftest(args) -> int:
    here = Path(__file__).resolve()
    candidates = [here.parents[2] / "tests" / "test_acceptance.py", Path.cwd() / "tests" / "test_acceptance.py"]
    target = next((p for p in candidates if p.exists()), None)
    if target is None:
        raise FileNotFoundError("acceptance suite tests/test_acceptance.py not found")
    import pytest

    return int(pytest.main(["-q", "-s", str(target)]))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qkp", description="Quaternionic KP toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("dress", help="dress the Lax operator and emit flow generators")
    s.add_argument("--order", type=int, default=6)
    s.add_argument("--flows", type=_int_list, default=[2, 3])
    s.add_argument("--lo", type=int, default=-8)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_dress)

    s = sub.add_parser("ds2", help="emit the t2 velocity table")
    s.add_argument("--order", type=int, default=4)
    s.add_argument("--lo", type=int, default=-8)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_ds2)

    s = sub.add_parser("genus0", help="genus-zero tori and multipliers")
    s.add_argument("--epsilon", type=_complex_arg, required=True)
    s.add_argument("--q1", type=_complex_arg, required=True)
    s.add_argument("--box", type=int, default=geomzero.DEFAULT_BOX)
    s.add_argument("--tol", type=float, default=geomzero.DEFAULT_TOL)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--out", default=None)
    modes = s.add_subparsers(dest="mode", parser_class=_Parser)
    m = modes.add_parser("torus")
    m.add_argument("--grid", type=int, default=64)
    m = modes.add_parser("spectrum")
    m.add_argument("--samples", type=int, default=100)
    m.add_argument("--cutoff", type=int, default=16)
    s.set_defaults(func=cmd_genus0)

    s = sub.add_parser("darboux", help="Darboux transform of a genus-zero Baker function")
    s.add_argument("--epsilon", type=_complex_arg, required=True)
    s.add_argument("--kappa", type=_complex_arg, required=True)
    s.add_argument("--grid", type=int, default=41)
    s.add_argument("--q1", type=_complex_arg, default=None)
    s.add_argument("--zetas", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_darboux)

    s = sub.add_parser("hsl", help="multiplier spectrum of the constant-potential operator")
    s.add_argument("--beta0", type=_exact_pair, required=True)
    s.add_argument("--lattice", type=_exact_pair, required=True)
    s.add_argument("--box", type=int, default=2)
    s.add_argument("--tol", type=float, default=geomzero.DEFAULT_TOL)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--out", default=None)
    modes = s.add_subparsers(dest="mode", parser_class=_Parser)
    m = modes.add_parser("spectrum")
    m.add_argument("--grid", type=int, default=200)
    m.add_argument("--cutoff", type=int, default=1)
    m.add_argument("--extent", type=float, default=1.0)
    s.set_defaults(func=cmd_hsl)

    s = sub.add_parser("tau", help="Plücker support and tau functions of a fixture frame")
    s.add_argument("--window", type=int, default=6)
    s.add_argument("--fixture", default="quaternionic")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=5)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_tau)

    s = sub.add_parser("selftest", help="run the acceptance suite")
    s.set_defaults(func=cmd_selftest)
    return p


_COMPUTE_ERRORS = (
    ArithmeticError,
    ValueError,
    PsdWindowError,
    taugrass.WindowError,
    FileNotFoundError,
)


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": message, "kind": kind}, sort_keys=True) + "\n")
    return code


def default_out(args) -> str:
    mode = getattr(args, "mode", None)
    stem = args.command + (f"_{mode}" if mode else "")
    csv_out = (args.command, mode) in {("genus0", "torus"), ("darboux", None)}
    return stem + (".csv" if csv_out else ".json")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ArgumentError as e:
        return _fail(2, "argument", str(e))
    if hasattr(args, "out") and args.out is None:
        args.out = default_out(args)
    try:
        result = args.func(args)
    except ArgumentError as e:
        return _fail(2, "argument", str(e))
    except _COMPUTE_ERRORS as e:
        return _fail(1, type(e).__name__, str(e))
    if args.command == "selftest":
        return result
    if result is not None:
        write_json(args.out, result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
