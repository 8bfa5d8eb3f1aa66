"""Canonical text forms and the content-addressed result cache.

One grammar covers everything that is ever written to disk or printed in
a report, so cache round-trips are bit-exact and reports are stable:

  scalar       r = 1: a decimal residue; r > 1: ``[d0,d1,...]`` digits
  polynomial   ``0`` or descending terms ``c``, ``c*v``, ``c*v^k`` joined
               by `` + ``; unit coefficients are elided
  K element    ``(<poly th> ; <poly th>) / <poly th>``
  function     ``(<poly t> ; <poly t>) / <poly t>`` with K-element
               coefficients in braces, e.g. ``{(1 ; 0) / 1}*t^2``
  series       ``xi^(k/(q-1)) * u^(e) * (c0 + c1*u + ... + O(u^N))``

Artifacts serialize line-oriented with a header naming the kind and the
curve; loaders take the live parent object (base field, shtuka, module),
check the header against it, and rebuild components verbatim.
"""

from __future__ import annotations

import hashlib
import re
from pathlib import Path

from .errors import InputError
from .fields import DenseMatrix, Fq, FqElem, UniPoly
from .curve import (BaseElement, BaseField, CurveFunction, CurveParams,
                    FuncField, ObjPoly)
from .series import EXACT, InfSeries


# -- scalars ---------------------------------------------------------------------


def fq_text(e: FqElem) -> str:
    if e.fq.r == 1:
        return str(e.coords[0])
    return "[" + ",".join(str(d) for d in e.coords) + "]"


def parse_fq(fq: Fq, s: str) -> FqElem:
    s = s.strip()
    if s.startswith("["):
        if not s.endswith("]"):
            raise InputError(f"unterminated digit list: {s!r}")
        digits = [int(d) for d in s[1:-1].split(",") if d.strip()]
        if len(digits) != fq.r:
            raise InputError(f"expected {fq.r} digits, got {len(digits)}")
        return FqElem(fq, tuple(d % fq.p for d in digits))
    if not s.isdigit():
        raise InputError(f"not a residue: {s!r}")
    return fq.elem(int(s))


# -- polynomials over F_q ----------------------------------------------------------


def poly_text(p: UniPoly, var: str) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        e = p.coeff(k)
        if e.is_zero():
            continue
        cs = fq_text(e)
        if k == 0:
            parts.append(cs)
        else:
            vk = var if k == 1 else f"{var}^{k}"
            parts.append(vk if cs == "1" else f"{cs}*{vk}")
    return " + ".join(parts)


_TERM_RE = re.compile(
    r"^(?:(?P<coef>\[[\d,\s]*\]|\d+)(?:\s*\*\s*)?)?"
    r"(?:(?P<var>[A-Za-z]+)(?:\^(?P<exp>\d+))?)?$")


def _parse_terms(s: str, var: str):
    """(coefficient text, exponent) pairs of a one-variable polynomial."""
    s = s.strip()
    if s == "0":
        return []
    out = []
    for term in split_level(s, " + "):
        m = _TERM_RE.match(term.strip())
        if not m or (m.group("coef") is None and m.group("var") is None):
            raise InputError(f"malformed term {term!r}")
        v = m.group("var")
        if v is None:
            k = 0
        elif v != var:
            raise InputError(f"unexpected variable {v!r}, wanted {var!r}")
        else:
            k = int(m.group("exp") or 1)
        out.append((m.group("coef") or "1", k))
    return out


def parse_poly(fq: Fq, s: str, var: str) -> UniPoly:
    terms = _parse_terms(s, var)
    deg = max((k for _, k in terms), default=0)
    cs = [fq.zero] * (deg + 1)
    for cstr, k in terms:
        if not cs[k].is_zero():
            raise InputError(f"repeated exponent {k} in {s!r}")
        cs[k] = parse_fq(fq, cstr)
    return UniPoly.from_elems(fq, cs)


# -- level-0 splitting --------------------------------------------------------------


def split_level(s: str, sep: str) -> list[str]:
    """Split on `sep` occurrences outside every (), {}, [] nesting."""
    out = []
    depth = 0
    start = 0
    i = 0
    while i < len(s):
        ch = s[i]
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
            if depth < 0:
                raise InputError(f"unbalanced brackets in {s!r}")
        elif depth == 0 and s.startswith(sep, i):
            out.append(s[start:i])
            i += len(sep)
            start = i
            continue
        i += 1
    if depth != 0:
        raise InputError(f"unbalanced brackets in {s!r}")
    out.append(s[start:])
    return out


def _split_fraction(s: str, what: str) -> tuple[str, str, str]:
    """Break ``(<A> ; <B>) / <C>`` into its three component texts."""
    s = s.strip()
    if not s.startswith("("):
        raise InputError(f"{what} must start with '(': {s!r}")
    depth = 0
    close = -1
    for i, ch in enumerate(s):
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
            if depth == 0:
                close = i
                break
    if close < 0:
        raise InputError(f"{what} has unbalanced parentheses: {s!r}")
    rest = s[close + 1:]
    if not rest.startswith(" / "):
        raise InputError(f"{what} is missing its denominator: {s!r}")
    halves = split_level(s[1:close], " ; ")
    if len(halves) != 2:
        raise InputError(f"{what} numerator needs one ' ; ': {s!r}")
    return halves[0], halves[1], rest[3:]


# -- K elements ----------------------------------------------------------------------


def base_element_text(a: BaseElement) -> str:
    return (f"({poly_text(a.n0, 'th')} ; {poly_text(a.n1, 'th')})"
            f" / {poly_text(a.den, 'th')}")


def parse_base_element(field: BaseField, s: str) -> BaseElement:
    n0, n1, den = _split_fraction(s, "K element")
    fq = field.fq
    return BaseElement(field, parse_poly(fq, n0, "th"),
                       parse_poly(fq, n1, "th"), parse_poly(fq, den, "th"))


# -- functions on the curve ------------------------------------------------------------


def _tpoly_text(p: ObjPoly) -> str:
    if not p.cs:
        return "0"
    parts = []
    for k in range(len(p.cs) - 1, -1, -1):
        c = p.cs[k]
        if c.is_zero():
            continue
        cs = "{" + base_element_text(c) + "}"
        if k == 0:
            parts.append(cs)
        else:
            vk = "t" if k == 1 else f"t^{k}"
            parts.append(f"{cs}*{vk}")
    return " + ".join(parts) if parts else "0"


def _parse_tpoly(field: BaseField, s: str) -> ObjPoly:
    s = s.strip()
    if s == "0":
        return ObjPoly.make(field, [])
    terms = []
    for term in split_level(s, " + "):
        term = term.strip()
        if not term.startswith("{"):
            raise InputError(f"function coefficient must be braced: {term!r}")
        close = term.index("}")
        coef = parse_base_element(field, term[1:close])
        rest = term[close + 1:].strip()
        if not rest:
            k = 0
        elif rest == "*t":
            k = 1
        elif rest.startswith("*t^"):
            k = int(rest[3:])
        else:
            raise InputError(f"malformed monomial tail {rest!r}")
        terms.append((coef, k))
    deg = max(k for _, k in terms)
    cs = [field.zero] * (deg + 1)
    for coef, k in terms:
        if not cs[k].is_zero():
            raise InputError(f"repeated exponent {k} in {s!r}")
        cs[k] = coef
    return ObjPoly.make(field, cs)


def curve_function_text(f: CurveFunction) -> str:
    return (f"({_tpoly_text(f.a0)} ; {_tpoly_text(f.a1)})"
            f" / {_tpoly_text(f.b)}")


def parse_curve_function(ff: FuncField, s: str) -> CurveFunction:
    a0, a1, b = _split_fraction(s, "curve function")
    return CurveFunction(ff, _parse_tpoly(ff.base, a0),
                         _parse_tpoly(ff.base, a1), _parse_tpoly(ff.base, b))


# -- series at the infinite place --------------------------------------------------------


def series_text(s: InfSeries) -> str:
    q = s.fq.q
    head = f"xi^({s.xi_exp_num}/{q - 1}) * u^({s.leading_exp})"
    parts = []
    for i, c in enumerate(s.coeffs):
        if c.is_zero():
            continue
        cs = fq_text(c)
        if i == 0:
            parts.append(cs)
        else:
            vk = "u" if i == 1 else f"u^{i}"
            parts.append(vk if cs == "1" else f"{cs}*{vk}")
    if s.abs_prec < EXACT:
        parts.append(f"O(u^{s.abs_prec - s.leading_exp})")
    if not parts:
        parts = ["0"]
    return f"{head} * ({' + '.join(parts)})"


_SERIES_RE = re.compile(
    r"^xi\^\((-?\d+)/(\d+)\) \* u\^\((-?\d+)\) \* \((.*)\)$")
_OTAIL_RE = re.compile(r"^O\(u\^(-?\d+)\)$")


def parse_series(fq: Fq, text: str) -> InfSeries:
    m = _SERIES_RE.match(text.strip())
    if not m:
        raise InputError(f"malformed series: {text!r}")
    tag, qm1, lead = int(m.group(1)), int(m.group(2)), int(m.group(3))
    if qm1 != fq.q - 1:
        raise InputError(f"series tag denominator {qm1} does not match q-1")
    body = m.group(4)
    prec = EXACT
    terms = []
    for part in split_level(body, " + "):
        part = part.strip()
        om = _OTAIL_RE.match(part)
        if om:
            prec = lead + int(om.group(1))
            continue
        if part == "0":
            continue
        terms.append(part)
    if not terms:
        return InfSeries.zero(fq, prec, tag)
    pairs = _parse_terms(" + ".join(terms), "u")
    deg = max(k for _, k in pairs)
    cs = [fq.zero] * (deg + 1)
    for cstr, k in pairs:
        cs[k] = parse_fq(fq, cstr)
    return InfSeries.from_elems(fq, lead, cs, prec, tag)


# -- curve parameters ----------------------------------------------------------------


def curve_params_text(params: CurveParams) -> str:
    fq = params.fq
    fields = [f"p={fq.p}", f"r={fq.r}"]
    if fq.r > 1:
        fields.append("modulus=" + ",".join(str(c) for c in fq.modulus))
    for name in ("c1", "c2", "c3", "c4", "c6"):
        fields.append(f"{name}={fq_text(getattr(params, name))}")
    return " ".join(fields)


def parse_curve_params(text: str) -> CurveParams:
    kv = {}
    for piece in text.split():
        if "=" not in piece:
            raise InputError(f"malformed curve field {piece!r}")
        k, v = piece.split("=", 1)
        kv[k] = v
    try:
        p, r = int(kv.pop("p")), int(kv.pop("r"))
    except KeyError as e:
        raise InputError(f"curve line is missing {e.args[0]}") from None
    modulus = None
    if "modulus" in kv:
        modulus = [int(c) for c in kv.pop("modulus").split(",")]
    fq = Fq(p, r, modulus)
    cs = {}
    for name in ("c1", "c2", "c3", "c4", "c6"):
        if name not in kv:
            raise InputError(f"curve line is missing {name}")
        cs[name] = parse_fq(fq, kv.pop(name))
    if kv:
        raise InputError(f"unknown curve fields: {sorted(kv)}")
    return CurveParams.make(fq, cs["c1"], cs["c2"], cs["c3"], cs["c4"],
                            cs["c6"])


# -- artifact files -------------------------------------------------------------------

_MAGIC = "drintensor 1"


def _header(kind: str, params: CurveParams, **extra) -> list[str]:
    lines = [_MAGIC, f"kind {kind}", f"curve {curve_params_text(params)}"]
    for k, v in extra.items():
        lines.append(f"{k} {v}")
    return lines


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.at = 0

    def next(self, prefix: str) -> str:
        if self.at >= len(self.lines):
            raise InputError(f"artifact truncated; expected {prefix!r}")
        line = self.lines[self.at]
        self.at += 1
        if not prefix:
            return line
        if not line.startswith(prefix + " "):
            raise InputError(f"expected {prefix!r}, found {line!r}")
        return line[len(prefix) + 1:]

    def expect(self, literal: str) -> None:
        if self.at >= len(self.lines) or self.lines[self.at] != literal:
            found = self.lines[self.at] if self.at < len(self.lines) else "<eof>"
            raise InputError(f"expected {literal!r}, found {found!r}")
        self.at += 1


def _open_artifact(text: str, kind: str, params: CurveParams) -> _Reader:
    r = _Reader(text)
    r.expect(_MAGIC)
    r.expect(f"kind {kind}")
    curve = r.next("curve")
    if curve != curve_params_text(params):
        raise InputError(
            f"artifact was computed on a different curve: {curve!r}")
    return r


def dump_shtuka(sh) -> str:
    lines = _header("shtuka", sh.base.params)
    for name in ("alpha", "beta", "m", "xi"):
        lines.append(f"{name} {base_element_text(getattr(sh, name))}")
    for name in ("nu", "delta", "f"):
        lines.append(f"{name} {curve_function_text(getattr(sh, name))}")
    return "\n".join(lines) + "\n"


def load_shtuka(text: str, base: BaseField, ff: FuncField | None = None):
    from .curve import CurvePoint
    from .shtuka import ShtukaData
    r = _open_artifact(text, "shtuka", base.params)
    if ff is None:
        ff = FuncField(base)
    elems = {name: parse_base_element(base, r.next(name))
             for name in ("alpha", "beta", "m", "xi")}
    funcs = {name: parse_curve_function(ff, r.next(name))
             for name in ("nu", "delta", "f")}
    v = CurvePoint(base, elems["alpha"], elems["beta"])
    return ShtukaData(base, ff, v, elems["alpha"], elems["beta"],
                      elems["m"], elems["xi"], funcs["nu"], funcs["delta"],
                      funcs["f"])


def dump_basis(bs) -> str:
    lines = _header("basis", bs.base.params, n=bs.n)
    for i, g in enumerate(bs.g, start=1):
        lines.append(f"g{i} {curve_function_text(g)}")
    for i, h in enumerate(bs.h, start=1):
        lines.append(f"h{i} {curve_function_text(h)}")
    lines.append(f"h1m {curve_function_text(bs.h1m)}")
    return "\n".join(lines) + "\n"


def load_basis(text: str, sh):
    from .shtuka import MotiveBasis
    r = _open_artifact(text, "basis", sh.base.params)
    n = int(r.next("n"))
    gs = [parse_curve_function(sh.ff, r.next(f"g{i}"))
          for i in range(1, n + 1)]
    hs = [parse_curve_function(sh.ff, r.next(f"h{i}"))
          for i in range(1, n + 1)]
    h1m = parse_curve_function(sh.ff, r.next("h1m"))
    return MotiveBasis(sh, n, parts=(gs, hs, h1m))


def dump_coeffs(co, params: CurveParams, n: int) -> str:
    lines = _header("coeffs", params, n=n)
    for label, seq in (("a", co.a), ("yc", co.yc), ("zc", co.zc),
                       ("b", co.b)):
        for i, v in enumerate(seq, start=1):
            lines.append(f"{label}{i} {base_element_text(v)}")
        lines.append(f"end_{label} {len(seq)}")
    lines.append(f"b_top_q {base_element_text(co.b_top_q)}")
    return "\n".join(lines) + "\n"


def load_coeffs(text: str, base: BaseField, n: int):
    from .shtuka import StructureCoeffs
    r = _open_artifact(text, "coeffs", base.params)
    got_n = int(r.next("n"))
    if got_n != n:
        raise InputError(f"artifact holds n = {got_n}, wanted {n}")
    seqs = {}
    for label in ("a", "yc", "zc", "b"):
        vals = []
        i = 1
        while True:
            line = r.next("")
            if line.startswith(f"end_{label} "):
                if int(line.split()[1]) != len(vals):
                    raise InputError(f"length mismatch in {label!r} block")
                break
            head = f"{label}{i} "
            if not line.startswith(head):
                raise InputError(f"expected {head!r}, found {line!r}")
            vals.append(parse_base_element(base, line[len(head):]))
            i += 1
        seqs[label] = tuple(vals)
    b_top = parse_base_element(base, r.next("b_top_q"))
    return StructureCoeffs(seqs["a"], seqs["yc"], seqs["zc"], seqs["b"],
                           b_top)


def _dump_matrix(lines: list[str], label: str, m: DenseMatrix) -> None:
    lines.append(f"{label} {m.rows} {m.cols}")
    for i in range(m.rows):
        lines.append("  " + " | ".join(
            base_element_text(m.entry(i, j)) for j in range(m.cols)))


def _load_matrix(r: _Reader, label: str, base: BaseField) -> DenseMatrix:
    head = r.next(label).split()
    rows, cols = int(head[0]), int(head[1])
    out = []
    for _ in range(rows):
        line = r.next("").strip()
        cells = split_level(line, " | ")
        if len(cells) != cols:
            raise InputError(f"matrix row has {len(cells)} cells, "
                             f"wanted {cols}")
        out.append([parse_base_element(base, c) for c in cells])
    return DenseMatrix.from_rows(out)


def dump_exp_log(elc) -> str:
    mod = elc.module
    lines = _header("expcoeffs", mod.base.params, n=mod.n, J=elc.order)
    for i, m in enumerate(elc.Q):
        _dump_matrix(lines, f"Q{i}", m)
    for i, m in enumerate(elc.P):
        _dump_matrix(lines, f"P{i}", m)
    return "\n".join(lines) + "\n"


def load_exp_log(text: str, mod):
    from .anderson import ExpLogCoeffs
    r = _open_artifact(text, "expcoeffs", mod.base.params)
    if int(r.next("n")) != mod.n:
        raise InputError("artifact dimension does not match the module")
    order = int(r.next("J"))
    qs = [_load_matrix(r, f"Q{i}", mod.base) for i in range(order + 1)]
    ps = [_load_matrix(r, f"P{i}", mod.base) for i in range(order + 1)]
    return ExpLogCoeffs(mod, tuple(qs), tuple(ps))


# -- the cache ---------------------------------------------------------------------------


class ResultCache:
    """Content-addressed text files under one directory.

    The key digests the artifact kind plus every configuration field the
    artifact depends on, so a cache hit can never hand back data for a
    different curve, dimension, or coefficient order.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(kind: str, **parts) -> str:
        payload = kind + "".join(
            f"\n{k}={parts[k]}" for k in sorted(parts))
        return hashlib.sha256(payload.encode()).hexdigest()

    def path(self, kind: str, key: str) -> Path:
        return self.root / f"{kind}-{key[:16]}.txt"

    def load(self, kind: str, key: str) -> str | None:
        p = self.path(kind, key)
        if not p.exists():
            return None
        return p.read_text()

    def store(self, kind: str, key: str, text: str) -> Path:
        p = self.path(kind, key)
        p.write_text(text)
        return p
