"""Command-line driver: job configs, cached pipeline stages, reports.

A job is described by an INI-style config with sections [field], [curve]
and [run].  Each command prints a deterministic text report (or a JSON
mirror with --json) and exits 0 on success, 2 on a failed identity, 3 on
a precision shortfall, and 4 on invalid input.  Artifacts that are
expensive to compute (basis functions, structure coefficients, exp/log
coefficient matrices) are cached as canonical text keyed by a digest of
the configuration fields they depend on.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import (AlgebraError, ClassNumberError, IdentityError,
                     InputError, PrecisionError)
from .fields import Fq
from .curve import BaseField, CurveParams, CurvePoint
from .series import TruncationPolicy, embed
from .shtuka import (build_basis, build_shtuka, structure_coeffs,
                     verify_a_routes, verify_basis_duality,
                     verify_coefficient_duality)
from .anderson import (build_module, diagram_check, exp_log_coeffs,
                       operator_suite, verify_formal_inverse)
from .periods import (anderson_gen_fn, coordregular_check, exp_eval,
                      gen_fn_t_action_check, last_coordinate_factor,
                      omega_twist_check, period_vector, pi_rho,
                      pi_rho_residue_check, residue_recovers,
                      residue_shift_check)
from . import serialize as sz

COMMANDS = ("divisor", "shtuka", "basis", "module", "expcoeffs", "period",
            "genfn", "verify")

_RNG_SEED = 20260825


# -- configuration ------------------------------------------------------------------


@dataclass(frozen=True)
class FqConfig:
    """Raw field description as read from the config file."""

    p: int
    r: int = 1
    modulus: tuple | None = None

    def build(self) -> Fq:
        return Fq(self.p, self.r, self.modulus)


@dataclass(frozen=True)
class JobConfig:
    field: FqConfig
    curve: CurveParams
    n: int
    policy: TruncationPolicy
    cache_dir: Path | None = None


_SECTIONS = {
    "field": ("p", "r", "modulus"),
    "curve": ("c1", "c2", "c3", "c4", "c6"),
    "run": ("n", "uprec", "local_terms", "terms", "product_cap", "cache"),
}


def _scan(text: str) -> dict:
    """Raw (section, key) -> (value, line number) with syntax validation."""
    entries: dict = {}
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise InputError(f"line {ln}: unterminated section header")
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise InputError(f"line {ln}: unknown section [{section}]")
            continue
        if section is None:
            raise InputError(f"line {ln}: key before any section header")
        if "=" not in line:
            raise InputError(f"line {ln}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _SECTIONS[section]:
            raise InputError(
                f"line {ln}: unknown key '{key}' in section [{section}]")
        if (section, key) in entries:
            raise InputError(f"line {ln}: duplicate key '{key}'")
        entries[(section, key)] = (val, ln)
    return entries


class _Entries:
    def __init__(self, entries: dict):
        self.entries = entries

    def get(self, section: str, key: str) -> tuple[str, int] | None:
        return self.entries.get((section, key))

    def require(self, section: str, key: str) -> tuple[str, int]:
        got = self.get(section, key)
        if got is None:
            raise InputError(
                f"missing required key '{key}' in section [{section}]")
        return got

    def get_int(self, section: str, key: str, default: int | None):
        got = self.get(section, key)
        if got is None:
            return default
        val, ln = got
        try:
            return int(val)
        except ValueError:
            raise InputError(
                f"line {ln}: '{key}' must be an integer, got {val!r}") from None


def parse_config(text: str, *, n: int | None = None, uprec: int | None = None,
                 terms: int | None = None,
                 cache: str | None = None) -> JobConfig:
    """Validate a job config; keyword arguments override [run] values."""
    ent = _Entries(_scan(text))

    pval, pln = ent.require("field", "p")
    try:
        p = int(pval)
    except ValueError:
        raise InputError(f"line {pln}: 'p' must be an integer") from None
    r = ent.get_int("field", "r", 1)
    modulus = None
    mod_got = ent.get("field", "modulus")
    if mod_got is not None:
        val, ln = mod_got
        try:
            modulus = tuple(int(c) for c in val.split(","))
        except ValueError:
            raise InputError(
                f"line {ln}: 'modulus' must be comma-separated integers") from None
    fcfg = FqConfig(p, r, modulus)
    try:
        fq = fcfg.build()
    except AlgebraError as e:
        raise InputError(f"line {pln}: {e}") from None

    cs = {}
    for name in _SECTIONS["curve"]:
        got = ent.get("curve", name)
        if got is None:
            cs[name] = fq.zero
            continue
        val, ln = got
        try:
            cs[name] = fq.elem(int(val))
        except ValueError:
            try:
                cs[name] = sz.parse_fq(fq, val)
            except InputError:
                raise InputError(
                    f"line {ln}: '{name}' must be an integer or digit "
                    f"list, got {val!r}") from None
    try:
        curve = CurveParams.make(fq, cs["c1"], cs["c2"], cs["c3"], cs["c4"],
                                 cs["c6"])
    except AlgebraError as e:
        raise InputError(f"section [curve]: {e}") from None

    dim = n if n is not None else ent.get_int("run", "n", None)
    if dim is None:
        raise InputError("missing required key 'n' in section [run]")
    if dim < 1:
        raise InputError(f"n must be positive, got {dim}")

    policy = TruncationPolicy(
        u_prec=uprec if uprec is not None
        else ent.get_int("run", "uprec", 64),
        local_terms=ent.get_int("run", "local_terms", dim + 8),
        exp_terms=terms if terms is not None
        else ent.get_int("run", "terms", 6),
        product_cap=ent.get_int("run", "product_cap", 64),
    )

    cache_dir: Path | None = None
    if cache is not None:
        cache_dir = Path(cache)
    else:
        got = ent.get("run", "cache")
        if got is not None:
            cache_dir = Path(got[0])

    return JobConfig(fcfg, curve, dim, policy, cache_dir)


# -- cached pipeline -----------------------------------------------------------------


class Pipeline:
    """Lazily builds the artifact chain for one job, with text caching."""

    def __init__(self, cfg: JobConfig):
        self.cfg = cfg
        self.cache = (sz.ResultCache(cfg.cache_dir)
                      if cfg.cache_dir is not None else None)
        self.curve_text = sz.curve_params_text(cfg.curve)
        self.base = BaseField(cfg.curve)
        self._sh = None
        self._basis = None
        self._coeffs = None
        self._module = None
        self._elc = None

    def _through_cache(self, kind, parts, dump, load, compute):
        if self.cache is None:
            return compute()
        key = sz.ResultCache.key(kind, curve=self.curve_text, **parts)
        text = self.cache.load(kind, key)
        if text is not None:
            return load(text)
        obj = compute()
        self.cache.store(kind, key, dump(obj))
        return obj

    @property
    def shtuka(self):
        if self._sh is None:
            self._sh = build_shtuka(self.base)
        return self._sh

    @property
    def basis(self):
        if self._basis is None:
            sh = self.shtuka
            self._basis = self._through_cache(
                "basis", {"n": self.cfg.n}, sz.dump_basis,
                lambda t: sz.load_basis(t, sh),
                lambda: build_basis(sh, self.cfg.n))
        return self._basis

    @property
    def coeffs(self):
        if self._coeffs is None:
            bs = self.basis
            self._coeffs = self._through_cache(
                "coeffs", {"n": self.cfg.n},
                lambda co: sz.dump_coeffs(co, self.cfg.curve, self.cfg.n),
                lambda t: sz.load_coeffs(t, self.base, self.cfg.n),
                lambda: structure_coeffs(bs))
        return self._coeffs

    @property
    def module(self):
        if self._module is None:
            self._module = build_module(self.basis, self.coeffs)
        return self._module

    @property
    def elc(self):
        if self._elc is None:
            mod = self.module
            J = self.cfg.policy.exp_terms
            self._elc = self._through_cache(
                "expcoeffs", {"n": self.cfg.n, "J": J}, sz.dump_exp_log,
                lambda t: sz.load_exp_log(t, mod),
                lambda: exp_log_coeffs(mod, J))
        return self._elc

    def sample_elements(self, count: int) -> list:
        """Deterministic small module elements for sampled checks."""
        base = self.base
        pol = self.cfg.policy
        rng = random.Random(_RNG_SEED)
        out = []
        for _ in range(count):
            vec = []
            for _ in range(self.cfg.n):
                c0 = rng.randrange(base.fq.q)
                c1 = rng.randrange(base.fq.q)
                el = base.elem(c0) + base.elem(c1) * base.theta
                if rng.randrange(2):
                    el = el + base.eta
                vec.append(embed(el, pol))
            out.append(vec)
        return out


# -- reports -------------------------------------------------------------------------


def _mat_lines(label: str, m) -> list[str]:
    lines = [f"{label} {m.rows}x{m.cols}"]
    for i in range(m.rows):
        lines.append("  " + " | ".join(
            m.entry(i, j).text() for j in range(m.cols)))
    return lines


def _flag(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _cmd_divisor(pipe: Pipeline):
    sh = pipe.shtuka
    xi_pt = CurvePoint.affine(pipe.base, pipe.base.theta, pipe.base.eta)
    ok = (sh.V - sh.V.twist(1)) == xi_pt
    lines = [
        "command divisor",
        f"curve {pipe.curve_text}",
        f"alpha {sh.alpha.text()}",
        f"beta {sh.beta.text()}",
        f"shift-identity {_flag(ok)}",
    ]
    data = {"command": "divisor", "curve": pipe.curve_text,
            "alpha": sh.alpha.text(), "beta": sh.beta.text(),
            "shift_identity": ok}
    return lines, data, 0 if ok else 2


def _cmd_shtuka(pipe: Pipeline):
    sh = pipe.shtuka
    deg, sgn = sh.f.deg_sgn()
    lines = [
        "command shtuka",
        f"curve {pipe.curve_text}",
        f"m {sh.m.text()}",
        f"xi {sh.xi.text()}",
        f"nu {sz.curve_function_text(sh.nu)}",
        f"delta {sz.curve_function_text(sh.delta)}",
        f"f {sz.curve_function_text(sh.f)}",
        f"degree {deg}",
        f"sign {sgn.text()}",
    ]
    data = {"command": "shtuka", "curve": pipe.curve_text,
            "m": sh.m.text(), "xi": sh.xi.text(),
            "f": sz.curve_function_text(sh.f), "degree": deg,
            "sign": sgn.text()}
    return lines, data, 0


def _cmd_basis(pipe: Pipeline):
    text = sz.dump_basis(pipe.basis)
    lines = text.splitlines()
    data = {"command": "basis", "artifact": text}
    return lines, data, 0


def _cmd_module(pipe: Pipeline):
    mod = pipe.module
    lines = ["command module", f"curve {pipe.curve_text}", f"n {mod.n}"]
    for k, m in enumerate(mod.rho_t.mats):
        lines.extend(_mat_lines(f"rho_t[{k}]", m))
    for k, m in enumerate(mod.rho_y.mats):
        lines.extend(_mat_lines(f"rho_y[{k}]", m))
    coeff_text = sz.dump_coeffs(pipe.coeffs, pipe.cfg.curve, mod.n)
    lines.append("coefficients")
    lines.extend("  " + ln for ln in coeff_text.splitlines())
    data = {"command": "module", "curve": pipe.curve_text, "n": mod.n,
            "coefficients": coeff_text,
            "rho_t": [ [[m.entry(i, j).text() for j in range(m.cols)]
                        for i in range(m.rows)] for m in mod.rho_t.mats],
            "rho_y": [ [[m.entry(i, j).text() for j in range(m.cols)]
                        for i in range(m.rows)] for m in mod.rho_y.mats]}
    return lines, data, 0


def _cmd_expcoeffs(pipe: Pipeline):
    text = sz.dump_exp_log(pipe.elc)
    ok = verify_formal_inverse(pipe.elc)
    lines = text.splitlines()
    lines.append(f"formal-inverse {_flag(ok)}")
    data = {"command": "expcoeffs", "artifact": text, "formal_inverse": ok}
    return lines, data, 0 if ok else 2


def _cmd_period(pipe: Pipeline):
    cfg = pipe.cfg
    pol = cfg.policy
    sh = pipe.shtuka
    mod = pipe.module
    min_coeffs = max(8, min(40, pol.u_prec - 8))
    pi = pi_rho(sh, pol)
    cross = pi_rho_residue_check(sh, pol, min_coeffs)
    pv = period_vector(mod, pol)
    ratio = (pv[-1] / pi ** cfg.n).fold(embed(sh.xi, pol), -cfg.n)
    target = last_coordinate_factor(mod)
    closed = ratio.agrees_with(
        embed(target, pol).truncate(ratio.abs_prec), min_coeffs)
    lines = [
        "command period",
        f"curve {pipe.curve_text}",
        f"n {cfg.n}",
        f"pi {sz.series_text(pi)}",
        f"pi-residue-cross-oracle {_flag(cross)} ({min_coeffs} coefficients)",
    ]
    for i, z in enumerate(pv, start=1):
        lines.append(f"Pi[{i}] {sz.series_text(z)}")
    lines.append(f"ratio {sz.series_text(ratio)}")
    lines.append(f"closed-form {target.text()}")
    lines.append(f"closed-form-check {_flag(closed)} "
                 f"({min_coeffs} coefficients)")
    ok = cross and closed
    data = {"command": "period", "curve": pipe.curve_text, "n": cfg.n,
            "pi": sz.series_text(pi), "cross_oracle": cross,
            "period_vector": [sz.series_text(z) for z in pv],
            "ratio": sz.series_text(ratio), "closed_form": target.text(),
            "closed_form_check": closed}
    return lines, data, 0 if ok else 2


def _cmd_genfn(pipe: Pipeline):
    cfg = pipe.cfg
    pol = cfg.policy
    mod = pipe.module
    elc = pipe.elc
    u = pipe.sample_elements(1)[0]
    gf = anderson_gen_fn(mod, elc, u, pol)
    rec = residue_recovers(mod, elc, u, pol, max(8, min(20, pol.u_prec - 8)))
    shift = residue_shift_check(mod, elc, u, pol)
    taction = gen_fn_t_action_check(mod, elc, u, pol)
    lines = ["command genfn", f"curve {pipe.curve_text}", f"n {cfg.n}"]
    for i, z in enumerate(u, start=1):
        lines.append(f"u[{i}] {sz.series_text(z)}")
    norm_text = " ".join("-" if t is None else str(t) for t in gf.term_norms)
    lines.append(f"term-norms {norm_text}")
    lines.append(f"residue-recovery {_flag(rec)}")
    lines.append(f"residue-shift-law {_flag(shift)}")
    lines.append(f"t-action {_flag(taction)}")
    ok = rec and shift and taction
    data = {"command": "genfn", "curve": pipe.curve_text, "n": cfg.n,
            "u": [sz.series_text(z) for z in u],
            "term_norms": list(gf.term_norms), "residue_recovery": rec,
            "residue_shift_law": shift, "t_action": taction}
    return lines, data, 0 if ok else 2


def _verify_registry(pipe: Pipeline):
    """Every named identity check, in a fixed order.

    Yields (name, callable); callables return True/False or raise, and a
    raise counts as failure of that one check.
    """
    cfg = pipe.cfg
    pol = cfg.policy

    def divisor_shift():
        sh = pipe.shtuka
        xi_pt = CurvePoint.affine(pipe.base, pipe.base.theta, pipe.base.eta)
        return (sh.V - sh.V.twist(1)) == xi_pt

    def shtuka_shape():
        deg, sgn = pipe.shtuka.f.deg_sgn()
        return deg == 1 and sgn == pipe.base.one

    def a_routes():
        verify_a_routes(pipe.basis, pipe.coeffs)
        return True

    def duality_coeffs():
        verify_coefficient_duality(pipe.basis, pipe.coeffs)
        return True

    def duality_basis():
        verify_basis_duality(pipe.basis)
        return True

    def formal_inverse():
        return verify_formal_inverse(pipe.elc)

    def omega_twist():
        return omega_twist_check(pipe.shtuka, cfg.n, pol)

    def pi_residue():
        return pi_rho_residue_check(pipe.shtuka, pol,
                                    max(8, min(40, pol.u_prec - 8)))

    def coordregular():
        return coordregular_check(pipe.module)

    def period_gate():
        period_vector(pipe.module, pol)
        return True

    def residue_samples():
        lim = max(8, min(20, pol.u_prec - 8))
        return all(residue_recovers(pipe.module, pipe.elc, u, pol, lim)
                   for u in pipe.sample_elements(2))

    def residue_shift():
        u = pipe.sample_elements(1)[0]
        return residue_shift_check(pipe.module, pipe.elc, u, pol)

    def genfn_t_action():
        u = pipe.sample_elements(1)[0]
        return gen_fn_t_action_check(pipe.module, pipe.elc, u, pol)

    def exp_decay():
        pv = period_vector(pipe.module, pol)
        r = exp_eval(pipe.elc, list(pv), pol.exp_terms, pol)
        return (r.increments_strictly_decreasing()
                and r.partial_norms_monotone())

    yield "divisor-shift", divisor_shift
    yield "shtuka-sign-degree", shtuka_shape
    yield "a-value-routes", a_routes
    yield "coefficient-duality", duality_coeffs
    yield "basis-duality", duality_basis

    rng = random.Random(_RNG_SEED)
    for name, ok in operator_suite(pipe.module, rng):
        yield f"op:{name}", (lambda v=ok: v)
    for name, ok in diagram_check(pipe.module, rng, samples=5):
        yield f"diagram:{name}", (lambda v=ok: v)

    yield "exp-log-inverse", formal_inverse
    yield "omega-twist", omega_twist
    yield "pi-residue-cross-oracle", pi_residue
    yield "coordregular", coordregular
    yield "period-gate", period_gate
    yield "residue-recovery", residue_samples
    yield "residue-shift-law", residue_shift
    yield "genfn-t-action", genfn_t_action
    yield "exp-decay", exp_decay


def _cmd_verify(pipe: Pipeline):
    lines = ["command verify", f"curve {pipe.curve_text}", f"n {pipe.cfg.n}"]
    results = {}
    failures = 0
    for name, fn in _verify_registry(pipe):
        try:
            ok = bool(fn())
        except (IdentityError, PrecisionError, AlgebraError) as e:
            ok = False
            lines.append(f"FAIL {name} ({type(e).__name__})")
            results[name] = False
            failures += 1
            continue
        results[name] = ok
        lines.append(f"{_flag(ok)} {name}")
        if not ok:
            failures += 1
    lines.append(f"checks {len(results)} failures {failures}")
    data = {"command": "verify", "curve": pipe.curve_text, "n": pipe.cfg.n,
            "results": results, "failures": failures}
    return lines, data, 0 if failures == 0 else 2


_HANDLERS = {
    "divisor": _cmd_divisor,
    "shtuka": _cmd_shtuka,
    "basis": _cmd_basis,
    "module": _cmd_module,
    "expcoeffs": _cmd_expcoeffs,
    "period": _cmd_period,
    "genfn": _cmd_genfn,
    "verify": _cmd_verify,
}


def run_command(cfg: JobConfig, cmd: str):
    """Execute one pipeline command; returns (report lines, data, code)."""
    if cmd not in _HANDLERS:
        raise InputError(f"unknown command {cmd!r}")
    return _HANDLERS[cmd](Pipeline(cfg))


# -- entry point ----------------------------------------------------------------------


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="drintensor",
        description="Tensor powers of rank-1 modules on elliptic "
                    "coefficient curves: build, inspect, verify.")
    ap.add_argument("--config", required=True, help="job config path")
    ap.add_argument("--cmd", required=True, choices=COMMANDS)
    ap.add_argument("--n", type=int, help="override [run] n")
    ap.add_argument("--uprec", type=int, help="override [run] uprec")
    ap.add_argument("--terms", type=int, help="override [run] terms")
    ap.add_argument("--cache", help="override cache directory")
    ap.add_argument("--json", action="store_true",
                    help="print the JSON mirror of the report")
    args = ap.parse_args(argv)

    try:
        try:
            text = Path(args.config).read_text()
        except OSError as e:
            raise InputError(f"cannot read config: {e}") from None
        cfg = parse_config(text, n=args.n, uprec=args.uprec,
                           terms=args.terms, cache=args.cache)
        lines, data, code = run_command(cfg, args.cmd)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except (AlgebraError, ClassNumberError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except PrecisionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except IdentityError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.json:
        print(json.dumps(data, sort_keys=True, indent=2))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
