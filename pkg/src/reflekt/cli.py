"""Command-line front end: `reflekt verify re --model a1-affine --spin 1/2` and friends."""

from __future__ import annotations

import argparse
import configparser
import json
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from . import __version__
from .errors import ConfigError, IOFailure, ReflektError, SpecializationPole
from .kmatrix import (dual_K, quasi_K_finite, quasi_K_residuals, solve_spectral_K, verify_dual_reflection,
                      verify_reflection)
from .linalg import Matrix
from .qsp import a1_omega_datum, coideal_residuals, sklyanin_datum
from .reps import Rep, eval_rep, sovereign_ops, spin_rep
from .rmatrix import SPECTRAL, spectral_R, verify_crossing, verify_rtilde_inverse, ybe_residual_finite, \
    ybe_residual_spectral
from .scalar import Scalar, parse
from .transfer import (build_transfer, centrality_residuals, commutator_check, finite_transfer, hamiltonian, multiplicativity_check,
                       order_swap_check,
                       hamiltonian_structure)

MODELS = ("a1-affine", "a1")
VERIFY_SUITES = ("re", "dual-re", "crossing", "ybe", "quasi-k", "coideal")
FINITE_VARIANTS = ("trivial", "kolb")
MAX_DRAW = 97


# ---------------------------------------------------------------------------
# report

@dataclass
class Check:
    name: str
    status: str
    inputs: dict
    residual_nonzero_entries: int
    scale: str | None = None
    derived: dict = field(default_factory=dict)
    wall_time: float = 0.0
    error: str | None = None


@dataclass
class Report:
    version: str
    config: dict
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.status == "pass" for c in self.checks)


def matrix_strings(M: Matrix) -> list[list[str]]:
    return M.to_strings()


def emit_report(report: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        data = {"version": report.version, "config": report.config, "checks": [asdict(c) for c in report.checks]}
        return (json.dumps(data, indent=2, sort_keys=True) + "\n").encode()
    if fmt != "text":
        raise IOFailure(f"unknown format {fmt!r}")
    lines = [f"reflekt {report.version}"]
    for c in report.checks:
        lines.append(f"[{c.status.upper()}] {c.name}  nonzero residual entries: {c.residual_nonzero_entries}"
                     + (f"  scale: {c.scale}" if c.scale is not None else "") + f"  ({c.wall_time:.2f}s)")
        if c.error:
            lines.append(f"    error: {c.error}")
        for key, val in c.derived.items():
            if isinstance(val, list) and val and isinstance(val[0], list):
                lines.append(f"    {key} =")
                for row in val:
                    lines.append("      [" + ", ".join(row) + "]")
            else:
                lines.append(f"    {key} = {val}")
    return ("\n".join(lines) + "\n").encode()


def load_report(data: bytes) -> Report:
    try:
        raw = json.loads(data.decode())
        checks = [Check(**c) for c in raw["checks"]]
        return Report(raw["version"], raw["config"], checks)
    except (ValueError, KeyError, TypeError) as exc:
        raise IOFailure(f"not a report: {exc}") from exc


def canonicalize(obj):
    """Re-parse every Scalar string in a derived payload and print it canonically."""
    if isinstance(obj, list):
        return [canonicalize(x) for x in obj]
    if isinstance(obj, dict):
        return {k: canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, str):
        return str(parse(obj))
    return obj


# ---------------------------------------------------------------------------
# configuration

@dataclass
class JobConfig:
    model: str = "a1-affine"
    tau: str = "(0 1)"
    spin: Fraction = Fraction(1, 2)
    aux_spin: Fraction | None = None
    sites: int = 2
    seed: int = 0
    draws: int = 5
    fmt: str = "text"
    out: str | None = None
    xi: str = "xi"
    gamma: str = "gamma"
    sigma: str = "sigma"
    specialize: dict = field(default_factory=dict)
    hamiltonian: bool = False

    def echo(self) -> dict:
        d = asdict(self)
        d["spin"] = str(self.spin)
        d["aux_spin"] = None if self.aux_spin is None else str(self.aux_spin)
        d.pop("out")
        return d


def parse_spin(text: str) -> Fraction:
    try:
        j = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad spin {text!r}") from exc
    if j < 0 or (2 * j).denominator != 1:
        raise ConfigError(f"spin must be a non-negative half-integer, got {text}")
    return j


def parse_bindings(text: str) -> dict[str, Scalar]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise ConfigError(f"binding {part!r} is not name=value")
        k, v = (s.strip() for s in part.split("=", 1))
        try:
            out[k] = parse(v, declare_new=False)
        except ReflektError as exc:
            raise ConfigError(f"bad value for {k}: {exc}") from exc
        except KeyError as exc:
            raise ConfigError(f"undeclared variable in {part!r}") from exc
    return out


def load_config(path: str, cfg: JobConfig) -> JobConfig:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    known = {"datum": {"kind", "tau"}, "satake": {"tau", "gamma", "sigma", "xi", "twist"},
             "modules": {"spin", "aux_spin", "sites"}, "run": {"seed", "draws", "format", "specialize"}}
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"unknown config section [{sec}]")
        extra = set(cp[sec]) - known[sec]
        if extra:
            raise ConfigError(f"unknown keys in [{sec}]: {sorted(extra)}")
    if cp.has_section("datum"):
        cfg.model = cp["datum"].get("kind", cfg.model)
        cfg.tau = cp["datum"].get("tau", cfg.tau)
    if cp.has_section("satake"):
        s = cp["satake"]
        cfg.tau = s.get("tau", cfg.tau)
        cfg.xi = s.get("xi", cfg.xi)
        cfg.gamma = s.get("gamma", cfg.gamma)
        cfg.sigma = s.get("sigma", cfg.sigma)
    if cp.has_section("modules"):
        m = cp["modules"]
        if "spin" in m:
            cfg.spin = parse_spin(m["spin"])
        if "aux_spin" in m:
            cfg.aux_spin = parse_spin(m["aux_spin"])
        if "sites" in m:
            cfg.sites = m.getint("sites")
    if cp.has_section("run"):
        r = cp["run"]
        cfg.seed = r.getint("seed", cfg.seed)
        cfg.draws = r.getint("draws", cfg.draws)
        cfg.fmt = r.get("format", cfg.fmt)
        if "specialize" in r:
            cfg.specialize.update(parse_bindings(r["specialize"]))
    if cfg.model not in MODELS:
        raise ConfigError(f"unknown model {cfg.model!r}; choose from {MODELS}")
    return cfg


# ---------------------------------------------------------------------------
# helpers

def draw_rational(rng: random.Random) -> Fraction:
    while True:
        num = rng.randint(-MAX_DRAW, MAX_DRAW)
        den = rng.randint(1, MAX_DRAW)
        if num not in (0, den, -den):
            return Fraction(num, den)


def draw_bindings(rng: random.Random, names) -> dict[str, Fraction]:
    return {n: draw_rational(rng) for n in names}


def _spec(M: Matrix, bindings: Mapping) -> Matrix:
    return M.substitute(dict(bindings)) if bindings else M


def _count(M: Matrix) -> int:
    return M.nonzero_count()


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _z_view(M: Matrix) -> list[list[str]]:
    return M.substitute({SPECTRAL: Scalar.var("z")}).to_strings()


class Workbench:
    """Lazily built objects shared by the checks of one run."""

    def __init__(self, cfg: JobConfig):
        self.cfg = cfg
        if cfg.model == "a1-affine":
            self.sd = sklyanin_datum(parse(cfg.xi))
        else:
            self.sd = a1_omega_datum(parse(cfg.gamma), parse(cfg.sigma))
        self.datum, self.shift = self.sd.datum, self.sd.shift
        self._reps: dict = {}

    def rep(self, j: Fraction) -> Rep:
        if j not in self._reps:
            if self.datum.affine:
                self._reps[j] = eval_rep(self.datum, self.shift, j)
            else:
                self._reps[j] = spin_rep(self.datum, j)
        return self._reps[j]

    def need_affine(self):
        if not self.datum.affine:
            raise ConfigError("this suite needs --model a1-affine")

    def need_finite(self):
        if self.datum.affine:
            raise ConfigError("this suite needs --model a1")


def timed(name: str, inputs: dict, fn: Callable[[], Check]) -> Callable[[], Check]:
    def run() -> Check:
        t0 = time.perf_counter()
        try:
            c = fn()
        except ReflektError as exc:
            c = Check(name, "fail", inputs, -1, error=f"{type(exc).__name__}: {exc}")
        c.wall_time = round(time.perf_counter() - t0, 3)
        return c
    return run


# ---------------------------------------------------------------------------
# suites

def suite_re(wb: Workbench) -> list[Callable[[], Check]]:
    wb.need_affine()
    cfg = wb.cfg
    V = wb.rep(cfg.spin)
    inputs = {"spin": str(cfg.spin)}

    def untwisted():
        K = solve_spectral_K(V, wb.sd)
        res = _spec(verify_reflection(K, K, V, V), cfg.specialize)
        return Check("reflection-equation", _status(res.is_zero()), inputs, _count(res),
                     derived={"K(z)": _z_view(K.mat), "normalization": K.normalization})

    def twisted():
        K = solve_spectral_K(V, wb.sd)
        res = _spec(verify_reflection(K, K, V, V, wb.sd, "twisted"), cfg.specialize)
        return Check("reflection-equation-twisted", _status(res.is_zero()), inputs, _count(res))

    return [timed("reflection-equation", inputs, untwisted), timed("reflection-equation-twisted", inputs, twisted)]


def suite_dual_re(wb: Workbench) -> list[Callable[[], Check]]:
    wb.need_affine()
    cfg = wb.cfg
    V = wb.rep(cfg.spin)
    inputs = {"spin": str(cfg.spin), "p": str(wb.shift.p)}

    def dual(p, name, expect_zero):
        def run():
            K = solve_spectral_K(V, wb.sd)
            Dbar = sovereign_ops(V, wb.shift).Dbar
            Kt = dual_K(K, Dbar, p)
            res = _spec(verify_dual_reflection(Kt, Kt, V, V, Dbar, Dbar, wb.shift.p), cfg.specialize)
            ok = res.is_zero() if expect_zero else not res.is_zero()
            return Check(name, _status(ok), dict(inputs, Ktilde_shift=str(p)), _count(res),
                         derived={"Ktilde(z)": _z_view(Kt.mat)})
        return run

    return [timed("dual-reflection-equation", inputs, dual(wb.shift.p, "dual-reflection-equation", True)),
            timed("dual-reflection-sabotage", inputs, dual(Scalar(1), "dual-reflection-sabotage", False))]


def suite_crossing(wb: Workbench) -> list[Callable[[], Check]]:
    wb.need_affine()
    cfg = wb.cfg
    V = wb.rep(cfg.spin)
    inputs = {"spin": str(cfg.spin), "p": str(wb.shift.p)}

    def crossing():
        R = spectral_R(V, V)
        Dbar = sovereign_ops(V, wb.shift).Dbar
        res, scale = verify_crossing(R, Dbar, wb.shift.p)
        ok = res.is_zero() and scale.is_one()
        return Check("crossing", _status(ok), inputs, _count(res), scale=str(scale),
                     derived={"residual_zero": res.is_zero(), "scale_is_one": scale.is_one(),
                              "Dbar": Dbar.to_strings()})

    def rtilde():
        R = spectral_R(V, V)
        Dbar = sovereign_ops(V, wb.shift).Dbar
        res, scale = verify_rtilde_inverse(R, Dbar, wb.shift.p)
        return Check("crossing-rtilde-inverse", _status(res.is_zero()), inputs, _count(res), scale=str(scale))

    return [timed("crossing", inputs, crossing), timed("crossing-rtilde-inverse", inputs, rtilde)]


def suite_ybe(wb: Workbench) -> list[Callable[[], Check]]:
    cfg = wb.cfg
    V = wb.rep(cfg.spin)
    inputs = {"spin": str(cfg.spin)}
    if wb.datum.affine:
        def run():
            res = ybe_residual_spectral(V, V, V, Scalar.var("y"), Scalar.var("z"))
            return Check("yang-baxter-spectral", _status(res.is_zero()), inputs, _count(res))
        return [timed("yang-baxter-spectral", inputs, run)]

    def fin():
        res = ybe_residual_finite(V, V, V)
        return Check("yang-baxter-finite", _status(res.is_zero()), inputs, _count(res))
    return [timed("yang-baxter-finite", inputs, fin)]


def suite_quasi_k(wb: Workbench) -> list[Callable[[], Check]]:
    wb.need_finite()
    out = []
    for j in (Fraction(1, 2), Fraction(1), Fraction(3, 2)):
        def run(j=j):
            V = wb.rep(j)
            U = quasi_K_finite(V, wb.sd)
            res = quasi_K_residuals(U, V, wb.sd)
            n = sum(_count(m) for m in res.values())
            return Check(f"quasi-k-spin{j}", _status(n == 0 and U[0, 0].is_one()), {"spin": str(j)}, n,
                         derived={"Upsilon": U.to_strings()})
        out.append(timed(f"quasi-k-spin{j}", {"spin": str(j)}, run))
    return out


def suite_coideal(wb: Workbench) -> list[Callable[[], Check]]:
    V = wb.rep(wb.cfg.spin)
    inputs = {"spin": str(wb.cfg.spin)}

    def run():
        res = coideal_residuals(wb.sd, V, V)
        n = sum(_count(m) for m in res.values())
        return Check("coideal", _status(n == 0), inputs, n)
    return [timed("coideal", inputs, run)]


def suite_kmatrix(wb: Workbench) -> list[Callable[[], Check]]:
    wb.need_affine()
    V = wb.rep(wb.cfg.spin)
    inputs = {"spin": str(wb.cfg.spin)}

    def run():
        K = solve_spectral_K(V, wb.sd)
        Dbar = sovereign_ops(V, wb.shift).Dbar
        Kt = dual_K(K, Dbar, wb.shift.p)
        res = verify_reflection(K, K, V, V)
        return Check("kmatrix", _status(res.is_zero()), inputs, _count(res),
                     derived={"K(z)": _z_view(K.mat), "Ktilde(z)": _z_view(Kt.mat), "Dbar": Dbar.to_strings()})
    return [timed("kmatrix", inputs, run)]


def suite_transfer(wb: Workbench) -> list[Callable[[], Check]]:
    wb.need_affine()
    cfg = wb.cfg
    V = wb.rep(cfg.spin)
    W = wb.rep(cfg.aux_spin if cfg.aux_spin is not None else cfg.spin)
    Vs = [V] * cfg.sites
    inputs = {"sites": cfg.sites, "spin": str(cfg.spin), "aux_spin": str(cfg.aux_spin or cfg.spin)}
    y, z = Scalar.var("y"), Scalar.var("z")
    out = []
    if cfg.sites <= 2:
        def symbolic():
            t = build_transfer(Vs, W, wb.sd, bindings=cfg.specialize or None)
            res = commutator_check(t.at(y), t.at(z))
            derived = {}
            if cfg.sites <= 1:
                derived["t(z)"] = _z_view(t.mat)
            return Check("transfer-commutativity", _status(res.is_zero()), inputs, _count(res), derived=derived)
        out.append(timed("transfer-commutativity", inputs, symbolic))
    else:
        rng = random.Random(cfg.seed)
        for k in range(cfg.draws):
            b = draw_bindings(rng, ("v", "xi", "y", "z"))

            def draw(b=b, k=k):
                params = {n: b[n] for n in ("v", "xi")}
                try:
                    t = build_transfer(Vs, W, wb.sd, bindings=params)
                    res = commutator_check(t.at(b["y"]), t.at(b["z"]))
                except SpecializationPole as exc:
                    return Check(f"transfer-commutativity-draw{k}", "fail", dict(inputs, draw={n: str(x) for n, x in b.items()}),
                                 -1, error=str(exc))
                return Check(f"transfer-commutativity-draw{k}", _status(res.is_zero()),
                             dict(inputs, draw={n: str(x) for n, x in b.items()}), _count(res))
            out.append(timed(f"transfer-commutativity-draw{k}", inputs, draw))
    if cfg.sites <= 2:
        def mult():
            res, c = multiplicativity_check(W, W, Vs, wb.sd, bindings=cfg.specialize or None)
            return Check("transfer-multiplicativity", _status(res.is_zero()), dict(inputs, ratio="x"),
                         _count(res), scale=str(c.substitute({SPECTRAL: z})))

        def swap():
            res, c = order_swap_check(W, W, Vs, wb.sd, bindings=cfg.specialize or None)
            return Check("transfer-order-swap", _status(res.is_zero()), dict(inputs, ratio="x"),
                         _count(res), scale=str(c.substitute({SPECTRAL: z})))
        out.append(timed("transfer-multiplicativity", inputs, mult))
        out.append(timed("transfer-order-swap", inputs, swap))
    if cfg.hamiltonian:
        out += suite_hamiltonian(wb)
    return out


def suite_hamiltonian(wb: Workbench) -> list[Callable[[], Check]]:
    wb.need_affine()
    cfg = wb.cfg
    V = wb.rep(cfg.spin)
    Vs = [V] * cfg.sites
    inputs = {"sites": cfg.sites, "spin": str(cfg.spin)}

    def run():
        H = hamiltonian(Vs, wb.sd)
        t = build_transfer(Vs, V, wb.sd)
        res = commutator_check(H, t.at(Scalar.var("z")))
        shape = hamiltonian_structure(H, Vs)
        ok = res.is_zero() and shape["nonscalar"] and shape["nearest_neighbour"] if cfg.sites >= 2 else res.is_zero()
        return Check("hamiltonian", _status(ok), inputs, _count(res),
                     derived={"H": H.to_strings(), "structure": shape})
    return [timed("hamiltonian", inputs, run)]


def suite_finite(wb: Workbench, variant: str) -> list[Callable[[], Check]]:
    wb.need_finite()
    V = wb.rep(wb.cfg.spin)
    inputs = {"spin": str(wb.cfg.spin), "variant": variant}
    probes = (Fraction(1, 2), Fraction(1))
    out = []
    for pj in probes:
        def run(pj=pj):
            P = wb.rep(pj)
            if variant == "trivial":
                t = finite_transfer(V, wb.sd, "dualK", P)
                return Check(f"finite-trivial-probe{pj}", _status(t.is_scalar()), dict(inputs, probe=str(pj)),
                             0 if t.is_scalar() else _count(t), derived={"value": str(t[0, 0]) if t.is_scalar() else t.to_strings()})
            t = finite_transfer(V, wb.sd, "kolb", P)
            res = centrality_residuals(t, P, wb.sd)
            n = sum(_count(m) for m in res.values())
            return Check(f"finite-kolb-probe{pj}", _status(n == 0), dict(inputs, probe=str(pj)), n,
                         derived={"t": t.to_strings()})
        out.append(timed(f"finite-{variant}-probe{pj}", inputs, run))
    return out


SUITES: dict[str, Callable[[Workbench], list]] = {
    "re": suite_re, "dual-re": suite_dual_re, "crossing": suite_crossing, "ybe": suite_ybe,
    "quasi-k": suite_quasi_k, "coideal": suite_coideal,
}


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--spin")
    common.add_argument("--aux-spin")
    common.add_argument("--sites", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--draws", type=int)
    common.add_argument("--format", choices=("text", "json"))
    common.add_argument("--out")
    common.add_argument("--specialize", default="")
    common.add_argument("--config")
    common.add_argument("--hamiltonian", action="store_true")

    ap = argparse.ArgumentParser(prog="reflekt", description="Exact checks for R- and K-matrices.")
    ap.add_argument("--version", action="version", version=f"reflekt {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("suite", choices=VERIFY_SUITES)
    sub.add_parser("kmatrix", parents=[common])
    sub.add_parser("transfer", parents=[common])
    sub.add_parser("hamiltonian", parents=[common])
    f = sub.add_parser("finite", parents=[common])
    f.add_argument("variant", choices=FINITE_VARIANTS)
    return ap


def job_from_args(ns: argparse.Namespace) -> JobConfig:
    cfg = JobConfig()
    if ns.verb == "finite":
        cfg.model = "a1"
    if ns.config:
        cfg = load_config(ns.config, cfg)
    if ns.model:
        cfg.model = ns.model
    if ns.spin:
        cfg.spin = parse_spin(ns.spin)
    if ns.aux_spin:
        cfg.aux_spin = parse_spin(ns.aux_spin)
    if ns.sites is not None:
        if ns.sites < 0:
            raise ConfigError("--sites must be non-negative")
        cfg.sites = ns.sites
    if ns.seed is not None:
        cfg.seed = ns.seed
    if ns.draws is not None:
        cfg.draws = ns.draws
    if ns.format:
        cfg.fmt = ns.format
    cfg.out = ns.out
    cfg.hamiltonian = ns.hamiltonian
    if ns.specialize:
        cfg.specialize.update(parse_bindings(ns.specialize))
    if ns.verb == "verify" and ns.suite == "quasi-k" and not ns.model:
        cfg.model = "a1"
    return cfg


def collect(ns: argparse.Namespace, wb: Workbench) -> list[Callable[[], Check]]:
    if ns.verb == "verify":
        return SUITES[ns.suite](wb)
    if ns.verb == "kmatrix":
        return suite_kmatrix(wb)
    if ns.verb == "transfer":
        return suite_transfer(wb)
    if ns.verb == "hamiltonian":
        return suite_hamiltonian(wb)
    return suite_finite(wb, ns.variant)


def worker_count() -> int:
    raw = os.environ.get("REFLEKT_THREADS", "")
    try:
        n = int(raw) if raw else min(4, os.cpu_count() or 1)
    except ValueError:
        n = 1
    return max(1, n)


def run(argv: list[str] | None = None) -> tuple[int, Report, JobConfig]:
    ns = build_parser().parse_args(argv)
    cfg = job_from_args(ns)
    wb = Workbench(cfg)
    jobs = collect(ns, wb)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        checks = list(pool.map(lambda job: job(), jobs))
    echo = cfg.echo()
    echo["specialize"] = {k: str(v) for k, v in cfg.specialize.items()}
    echo["verb"] = " ".join([ns.verb] + [getattr(ns, a) for a in ("suite", "variant") if hasattr(ns, a)])
    report = Report(__version__, echo, checks)
    return (0 if report.ok else 1), report, cfg


def main(argv: list[str] | None = None) -> int:
    try:
        code, report, cfg = run(argv)
    except ConfigError as exc:
        print(f"reflekt: config error: {exc}", file=sys.stderr)
        return 2
    data = emit_report(report, cfg.fmt)
    if cfg.out:
        try:
            with open(cfg.out, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            print(f"reflekt: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(data.decode())
    return code


if __name__ == "__main__":
    sys.exit(main())
