"""The elliptic coefficient curve, its function fields, and expansions.

Fixes an elliptic curve E: y^2 + c1*t*y + c3*y = t^3 + c2*t^2 + c4*t + c6
over F_q and realizes two nested function fields exactly:

* BaseElement: the field K = F_q(theta, eta) generated by the images of the
  two coordinate functions, with theta of degree 2 and eta of degree 3.
  Every element carries a unique reduced form (n0 + n1*eta)/den with den a
  monic eta-free polynomial and gcd(n0, n1, den) = 1.
* CurveFunction: rational functions on E over K, in the variables (t, y),
  with the analogous unique form (A0 + A1*y)/B.

On top of that: the group law, divisors, a chord-and-vertical construction
of a function with prescribed principal divisor, and exact local expansions
at an affine point (parameter s = t - t(P)) and at infinity (z = t/y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (AlgebraError, InexactRootError, NotPrincipalError,
                     PoleError, PrecisionError)
from .fields import Fq, FqElem, UniPoly

_EXACT = 10**9  # precision sentinel for exact (polynomial) series


@dataclass(frozen=True)
class CurveParams:
    """Coefficients of the curve over F_q; must be nonsingular."""

    fq: Fq
    c1: FqElem
    c2: FqElem
    c3: FqElem
    c4: FqElem
    c6: FqElem

    @staticmethod
    def make(fq: Fq, c1, c2, c3, c4, c6) -> "CurveParams":
        p = CurveParams(fq, fq.elem(c1), fq.elem(c2), fq.elem(c3),
                        fq.elem(c4), fq.elem(c6))
        if p.discriminant().is_zero():
            raise AlgebraError("curve is singular (discriminant 0)")
        return p

    def discriminant(self) -> FqElem:
        a1, a2, a3, a4, a6 = self.c1, self.c2, self.c3, self.c4, self.c6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return (-(b2 * b2 * b8) - 8 * (b4 * b4 * b4) - 27 * (b6 * b6)
                + 9 * (b2 * b4 * b6))

    def key(self) -> tuple:
        return (self.fq.p, self.fq.r, self.fq.modulus,
                self.c1.coords, self.c2.coords, self.c3.coords,
                self.c4.coords, self.c6.coords)


class BaseField:
    """K = F_q(theta, eta): fractions over the coordinate ring of E."""

    def __init__(self, params: CurveParams):
        self.params = params
        self.fq = params.fq
        fq = self.fq
        # eta^2 = rpoly(theta) - spoly(theta) * eta
        self.rpoly = UniPoly.from_elems(fq, [params.c6, params.c4, params.c2, fq.one])
        self.spoly = UniPoly.from_elems(fq, [params.c3, params.c1])
        self.zero = BaseElement(self, UniPoly.zero(fq), UniPoly.zero(fq), UniPoly.one(fq))
        self.one = BaseElement(self, UniPoly.one(fq), UniPoly.zero(fq), UniPoly.one(fq))
        self.theta = BaseElement(self, UniPoly.x(fq), UniPoly.zero(fq), UniPoly.one(fq))
        self.eta = BaseElement(self, UniPoly.zero(fq), UniPoly.one(fq), UniPoly.one(fq))
        self._eta_qpow: dict[int, BaseElement] = {}
        self._eta_ppow: BaseElement | None = None
        self._vseries: list[FqElem] | None = None

    def elem(self, v) -> "BaseElement":
        if isinstance(v, BaseElement):
            if v.field is not self:
                raise AlgebraError("element from a different base field")
            return v
        if isinstance(v, (int, FqElem)):
            return BaseElement(self, UniPoly.const(self.fq, self.fq.elem(v)),
                               UniPoly.zero(self.fq), UniPoly.one(self.fq))
        raise AlgebraError(f"cannot coerce {type(v).__name__} into K")

    def from_polys(self, n0: UniPoly, n1: UniPoly, den: UniPoly) -> "BaseElement":
        return _reduce_base(self, n0, n1, den)

    def eta_q_power(self, k: int) -> "BaseElement":
        """eta^(q^k) for k >= 0, cached."""
        if k not in self._eta_qpow:
            if k == 0:
                self._eta_qpow[0] = self.eta
            elif k == 1:
                self._eta_qpow[1] = self.eta ** self.fq.q
            else:
                self._eta_qpow[k] = self.eta_q_power(k - 1).twist(1)
        return self._eta_qpow[k]

    def eta_p_power(self) -> "BaseElement":
        if self._eta_ppow is None:
            self._eta_ppow = self.eta ** self.fq.p
        return self._eta_ppow

    def infinity_series(self, terms: int) -> list[FqElem]:
        """Coefficients of v(z) in F_q[[z]] where t = v/z^2, y = v/z^3 solve
        the curve equation and v(0) = 1.  Newton iteration; any p."""
        if self._vseries is None or len(self._vseries) < terms:
            fq = self.fq
            c = self.params
            needed = max(terms, 8)
            # G(v) = v^3 + c2 z^2 v^2 + c4 z^4 v + c6 z^6 - v^2 - c1 z v^2 - c3 z^3 v
            zc = {
                "v3": UniPoly.one(fq),
                "v2": (UniPoly.const(fq, c.c2).shift(2) - UniPoly.one(fq)
                       - UniPoly.const(fq, c.c1).shift(1)),
                "v1": (UniPoly.const(fq, c.c4).shift(4)
                       - UniPoly.const(fq, c.c3).shift(3)),
                "v0": UniPoly.const(fq, c.c6).shift(6),
            }
            three = fq.elem(3)
            two = fq.elem(2)
            v = UniPoly.one(fq)
            prec = 1
            while prec < needed:
                prec = min(2 * prec, needed)
                v2 = _ser_mul(v, v, prec)
                v3 = _ser_mul(v2, v, prec)
                g = (_ser_mul(zc["v3"], v3, prec) + _ser_mul(zc["v2"], v2, prec)
                     + _ser_mul(zc["v1"], v, prec) + _ser_trunc(zc["v0"], prec))
                gp = (_ser_mul(zc["v3"].scale(three), v2, prec)
                      + _ser_mul(zc["v2"].scale(two), v, prec)
                      + _ser_trunc(zc["v1"], prec))
                v = _ser_trunc(v - _ser_mul(g, _ser_inv(gp, prec), prec), prec)
            self._vseries = [v.coeff(k) for k in range(needed)]
        return self._vseries[:terms]


def _ser_trunc(a: UniPoly, n: int) -> UniPoly:
    if a.c.shape[0] <= n:
        return a
    from .fields import _trim_rows
    return UniPoly(a.fq, _trim_rows(a.c[:n].copy()))


def _ser_mul(a: UniPoly, b: UniPoly, n: int) -> UniPoly:
    return _ser_trunc(a * b, n)


def _ser_inv(a: UniPoly, n: int) -> UniPoly:
    if a.is_zero() or a.coeff(0).is_zero():
        raise ZeroDivisionError("series inverse needs a unit constant term")
    x = UniPoly.const(a.fq, a.coeff(0).inverse())
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        e = UniPoly.one(a.fq) - _ser_mul(a, x, prec)
        x = _ser_trunc(x + _ser_mul(x, e, prec), prec)
    return x


def _reduce_base(field: BaseField, n0: UniPoly, n1: UniPoly, den: UniPoly) -> "BaseElement":
    if den.is_zero():
        raise ZeroDivisionError("zero denominator in K")
    if n0.is_zero() and n1.is_zero():
        return BaseElement(field, n0, n1, UniPoly.one(field.fq))
    if den.degree > 0:
        # chain through the denominator first: once it is coprime to one
        # numerator the whole gcd is trivial and the second chain is skipped
        g = den.gcd(n1 if n0.is_zero() else n0)
        if g.degree > 0 and not (n0.is_zero() or n1.is_zero()):
            g = g.gcd(n1)
        if g.degree > 0:
            n0, n1, den = n0.exact_div(g), n1.exact_div(g), den.exact_div(g)
    lc = den.lead()
    if not lc == field.fq.one:
        inv = lc.inverse()
        n0, n1, den = n0.scale(inv), n1.scale(inv), den.scale(inv)
    if den.degree == 0:
        den = UniPoly.one(field.fq)
    return BaseElement(field, n0, n1, den)


class BaseElement:
    """Element of K = F_q(theta, eta) in reduced canonical form."""

    __slots__ = ("field", "n0", "n1", "den")

    def __init__(self, field: BaseField, n0: UniPoly, n1: UniPoly, den: UniPoly):
        self.field = field
        self.n0 = n0
        self.n1 = n1
        self.den = den

    # -- ring/field operations ----------------------------------------------
    # unknown operand types defer (NotImplemented) so that curve functions
    # can absorb K constants from either side

    def __add__(self, other):
        if not isinstance(other, (int, FqElem, BaseElement)):
            return NotImplemented
        other = self.field.elem(other)
        if self.den == other.den:
            return _reduce_base(self.field, self.n0 + other.n0,
                                self.n1 + other.n1, self.den)
        n0 = self.n0 * other.den + other.n0 * self.den
        n1 = self.n1 * other.den + other.n1 * self.den
        return _reduce_base(self.field, n0, n1, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (int, FqElem, BaseElement)):
            return NotImplemented
        other = self.field.elem(other)
        if self.den == other.den:
            return _reduce_base(self.field, self.n0 - other.n0,
                                self.n1 - other.n1, self.den)
        n0 = self.n0 * other.den - other.n0 * self.den
        n1 = self.n1 * other.den - other.n1 * self.den
        return _reduce_base(self.field, n0, n1, self.den * other.den)

    def __rsub__(self, other):
        return self.field.elem(other) - self

    def __neg__(self):
        return BaseElement(self.field, -self.n0, -self.n1, self.den)

    def __mul__(self, other):
        if not isinstance(other, (int, FqElem, BaseElement)):
            return NotImplemented
        other = self.field.elem(other)
        f = self.field
        a0, a1, b0, b1 = self.n0, self.n1, other.n0, other.n1
        cross = a1 * b1
        n0 = a0 * b0 + cross * f.rpoly
        n1 = a0 * b1 + a1 * b0 - cross * f.spoly
        return _reduce_base(f, n0, n1, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (int, FqElem, BaseElement)):
            return NotImplemented
        return self * self.field.elem(other).inverse()

    def __rtruediv__(self, other):
        return self.field.elem(other) * self.inverse()

    def inverse(self) -> "BaseElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in K")
        f = self.field
        conj0 = self.n0 - self.n1 * f.spoly
        conj1 = -self.n1
        norm = self.n0 * self.n0 - self.n0 * self.n1 * f.spoly \
            - self.n1 * self.n1 * f.rpoly
        return _reduce_base(f, self.den * conj0, self.den * conj1, norm)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- structure -------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.n0.is_zero() and self.n1.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def is_constant(self) -> bool:
        return self.n1.is_zero() and self.den.is_one() and self.n0.degree <= 0

    def as_fq(self) -> FqElem:
        if not self.is_constant():
            raise AlgebraError("element is not an F_q constant")
        return self.n0.coeff(0)

    def deg_sgn(self) -> tuple[int, FqElem]:
        """Pole order at the infinite place (theta has degree 2, eta 3) and
        the leading coefficient in the monomial basis {theta^i, theta^j*eta}."""
        if self.is_zero():
            raise AlgebraError("deg_sgn of zero")
        d0 = 2 * self.n0.degree if not self.n0.is_zero() else None
        d1 = 3 + 2 * self.n1.degree if not self.n1.is_zero() else None
        if d1 is None or (d0 is not None and d0 > d1):
            d, lead = d0, self.n0.lead()
        else:
            d, lead = d1, self.n1.lead()
        return d - 2 * self.den.degree, lead

    @property
    def degree(self):
        return None if self.is_zero() else self.deg_sgn()[0]

    # -- Frobenius twisting ------------------------------------------------------

    def twist(self, k: int = 1) -> "BaseElement":
        """Coefficient q-power map x -> x^(q^k); negative k takes exact roots."""
        if k == 0:
            return self
        if k < 0:
            out = self
            for _ in range(-k):
                out = out.qth_root()
            return out
        out = self
        f = self.field
        etaq = f.eta_q_power(1)
        if not etaq.den.is_one():
            raise AlgebraError("eta^q should be integral")
        a, b = etaq.n0, etaq.n1  # eta^q = a + b*eta with polynomial a, b
        for _ in range(k):
            n0t = out.n0.twist(1)
            n1t = out.n1.twist(1)
            dent = out.den.twist(1)
            out = _reduce_base(f, n0t + n1t * a, n1t * b, dent)
        return out

    def pth_root(self) -> "BaseElement":
        """Exact inverse of x -> x^p; raises InexactRootError when absent."""
        f = self.field
        p = f.fq.p
        if self.is_zero():
            return self
        etap = f.eta_p_power()  # integral: A + B*eta with polynomial A, B
        a, b = etap.n0, etap.n1
        denp = self.den.pow_int(p - 1)
        m0 = self.n0 * denp
        m1 = self.n1 * denp
        try:
            if m1.is_zero():
                n1 = UniPoly.zero(f.fq)
                n0 = m0.pth_root()
            else:
                c1p = m1.exact_div(b)
                n1 = c1p.pth_root()
                n0 = (m0 - c1p * a).pth_root()
        except (AlgebraError, InexactRootError) as e:
            raise InexactRootError(f"not a p-th power in K: {e}") from None
        out = _reduce_base(f, n0, n1, self.den)
        if not (out ** p) == self:
            raise InexactRootError("not a p-th power in K")
        return out

    def qth_root(self) -> "BaseElement":
        out = self
        for _ in range(self.field.fq.r):
            out = out.pth_root()
        return out

    # -- comparisons ----------------------------------------------------------------

    def key(self) -> tuple:
        return (self.n0.c.shape[0], self.n0.c.tobytes(),
                self.n1.c.shape[0], self.n1.c.tobytes(),
                self.den.c.shape[0], self.den.c.tobytes())

    def __eq__(self, other):
        if isinstance(other, (int, FqElem)):
            other = self.field.elem(other)
        return (isinstance(other, BaseElement) and self.field is other.field
                and self.n0 == other.n0 and self.n1 == other.n1
                and self.den == other.den)

    def __hash__(self):
        return hash(self.key())

    def text(self) -> str:
        from .serialize import base_element_text
        return base_element_text(self)

    def __repr__(self):
        num = []
        if not self.n0.is_zero():
            num.append(self.n0.text("O"))
        if not self.n1.is_zero():
            t1 = self.n1.text("O")
            num.append("H" if t1 == "1" else f"({t1})*H")
        s = " + ".join(num) if num else "0"
        if not self.den.is_one():
            s = f"({s})/({self.den.text('O')})"
        return s


class ObjPoly:
    """Dense univariate polynomial over a coefficient field given by a
    context object exposing `zero`, `one`, and element coercion."""

    __slots__ = ("ring", "cs")

    def __init__(self, ring, cs: tuple):
        self.ring = ring
        self.cs = cs

    @staticmethod
    def make(ring, coeffs) -> "ObjPoly":
        cs = [ring.elem(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        return ObjPoly(ring, tuple(cs))

    @staticmethod
    def zero(ring) -> "ObjPoly":
        return ObjPoly(ring, ())

    @staticmethod
    def one(ring) -> "ObjPoly":
        return ObjPoly(ring, (ring.one,))

    @staticmethod
    def x(ring) -> "ObjPoly":
        return ObjPoly(ring, (ring.zero, ring.one))

    @staticmethod
    def const(ring, c) -> "ObjPoly":
        return ObjPoly.make(ring, [c])

    @property
    def degree(self) -> int:
        return len(self.cs) - 1

    def is_zero(self) -> bool:
        return not self.cs

    def lead(self):
        if not self.cs:
            raise ZeroDivisionError("zero polynomial has no leading coefficient")
        return self.cs[-1]

    def coeff(self, k: int):
        if 0 <= k < len(self.cs):
            return self.cs[k]
        return self.ring.zero

    def __add__(self, other):
        n = max(len(self.cs), len(other.cs))
        return ObjPoly.make(self.ring, [self.coeff(k) + other.coeff(k)
                                        for k in range(n)])

    def __sub__(self, other):
        n = max(len(self.cs), len(other.cs))
        return ObjPoly.make(self.ring, [self.coeff(k) - other.coeff(k)
                                        for k in range(n)])

    def __neg__(self):
        return ObjPoly(self.ring, tuple(-c for c in self.cs))

    def __mul__(self, other):
        if not isinstance(other, ObjPoly):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return ObjPoly.zero(self.ring)
        out = [self.ring.zero] * (len(self.cs) + len(other.cs) - 1)
        for i, a in enumerate(self.cs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.cs):
                out[i + j] = out[i + j] + a * b
        return ObjPoly.make(self.ring, out)

    def scale(self, c) -> "ObjPoly":
        c = self.ring.elem(c)
        if c.is_zero():
            return ObjPoly.zero(self.ring)
        return ObjPoly(self.ring, tuple(a * c for a in self.cs))

    def shift(self, k: int) -> "ObjPoly":
        if self.is_zero() or k == 0:
            return self
        return ObjPoly(self.ring, (self.ring.zero,) * k + self.cs)

    def divmod_(self, other: "ObjPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        db = other.degree
        inv = other.lead().inverse()
        rem = list(self.cs)
        quo = [self.ring.zero] * max(len(rem) - db, 0)
        for k in range(len(rem) - 1, db - 1, -1):
            c = rem[k]
            if c.is_zero():
                continue
            f = c * inv
            quo[k - db] = f
            for j in range(db + 1):
                rem[k - db + j] = rem[k - db + j] - f * other.coeff(j)
        return ObjPoly.make(self.ring, quo), ObjPoly.make(self.ring, rem[:db])

    def __mod__(self, other):
        return self.divmod_(other)[1]

    def __floordiv__(self, other):
        return self.divmod_(other)[0]

    def exact_div(self, other: "ObjPoly") -> "ObjPoly":
        q, r = self.divmod_(other)
        if not r.is_zero():
            raise AlgebraError("polynomial division is not exact")
        return q

    def gcd(self, other: "ObjPoly") -> "ObjPoly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def monic(self) -> "ObjPoly":
        if self.is_zero():
            return self
        return self.scale(self.lead().inverse())

    def is_one(self) -> bool:
        return self.degree == 0 and self.cs[0] == self.ring.one

    def pow_int(self, e: int) -> "ObjPoly":
        result = ObjPoly.one(self.ring)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def eval_elem(self, x):
        acc = self.ring.zero
        for k in range(len(self.cs) - 1, -1, -1):
            acc = acc * x + self.cs[k]
        return acc

    def eval_series(self, x: "KLaurent") -> "KLaurent":
        acc = KLaurent.const(x.ring, self.ring.zero, _EXACT)
        for k in range(len(self.cs) - 1, -1, -1):
            acc = acc * x
            acc = acc.add_elem(self.cs[k])
        return acc

    def map_coeffs(self, fn) -> "ObjPoly":
        return ObjPoly.make(self.ring, [fn(c) for c in self.cs])

    def twist(self, k: int) -> "ObjPoly":
        return self.map_coeffs(lambda c: c.twist(k))

    def __eq__(self, other):
        return (isinstance(other, ObjPoly) and len(self.cs) == len(other.cs)
                and all(a == b for a, b in zip(self.cs, other.cs)))

    def __hash__(self):
        return hash(tuple(self.cs))

    def __repr__(self):
        if self.is_zero():
            return "0"
        return " + ".join(f"({c!r})*T^{k}" for k, c in enumerate(self.cs)
                          if not c.is_zero())


class KLaurent:
    """Truncated Laurent series over a coefficient field context.

    Coefficient k (0-based) belongs to exponent val + k; coefficients at
    exponents >= prec are unknown.  A series that is zero to its precision
    has an empty coefficient list and val == prec.
    """

    __slots__ = ("ring", "val", "cs", "prec")

    def __init__(self, ring, val: int, cs: list, prec: int):
        # trim known leading zeros; keep the window [val, prec)
        i = 0
        while i < len(cs) and cs[i].is_zero():
            i += 1
        if i:
            val += i
            cs = cs[i:]
        keep = max(prec - val, 0)
        if len(cs) > keep:
            cs = cs[:keep]
        if not cs:
            val = prec
        self.ring = ring
        self.val = val
        self.cs = cs
        self.prec = prec

    @staticmethod
    def const(ring, c, prec: int) -> "KLaurent":
        return KLaurent(ring, 0, [ring.elem(c)], prec)

    @staticmethod
    def zero_to(ring, prec: int) -> "KLaurent":
        return KLaurent(ring, prec, [], prec)

    def is_zero_known(self) -> bool:
        return not self.cs

    def coeff(self, e: int):
        if e >= self.prec:
            raise PrecisionError(f"coefficient at exponent {e} beyond precision {self.prec}")
        if e < self.val or e - self.val >= len(self.cs):
            return self.ring.zero
        return self.cs[e - self.val]

    def pad(self) -> "KLaurent":
        """Materialize explicit zeros through the precision window."""
        cs = self.cs + [self.ring.zero] * (self.prec - self.val - len(self.cs))
        out = KLaurent.__new__(KLaurent)
        out.ring, out.val, out.cs, out.prec = self.ring, self.val, cs, self.prec
        return out

    def __add__(self, other):
        # materialize only the stored support; the tail up to prec is zero
        prec = min(self.prec, other.prec)
        vals = [s.val for s in (self, other) if s.cs]
        ends = [s.val + len(s.cs) for s in (self, other) if s.cs]
        if not vals:
            return KLaurent.zero_to(self.ring, prec)
        lo = min(min(vals), prec)
        hi = min(max(ends), prec)
        cs = [self.coeff(e) + other.coeff(e) for e in range(lo, max(hi, lo))]
        return KLaurent(self.ring, lo, cs, prec)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return KLaurent(self.ring, self.val, [-c for c in self.cs], self.prec)

    def add_elem(self, c) -> "KLaurent":
        return self + KLaurent.const(self.ring, c, _EXACT)

    def __mul__(self, other):
        prec = min(self.prec + other.val, other.prec + self.val)
        if not self.cs or not other.cs:
            return KLaurent.zero_to(self.ring, prec)
        val = self.val + other.val
        n = min(prec - val, len(self.cs) + len(other.cs) - 1)
        out = [self.ring.zero] * max(n, 0)
        for i, a in enumerate(self.cs):
            if a.is_zero():
                continue
            jmax = min(len(other.cs), n - i)
            for j in range(jmax):
                b = other.cs[j]
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return KLaurent(self.ring, val, out, prec)

    def scale(self, c) -> "KLaurent":
        c = self.ring.elem(c)
        if c.is_zero():
            return KLaurent.zero_to(self.ring, self.prec)
        return KLaurent(self.ring, self.val, [a * c for a in self.cs], self.prec)

    def shift(self, k: int) -> "KLaurent":
        out = KLaurent.__new__(KLaurent)
        out.ring, out.val, out.cs, out.prec = self.ring, self.val + k, self.cs, self.prec + k
        return out

    def inverse(self) -> "KLaurent":
        if not self.cs:
            raise ZeroDivisionError("inverse of a series that is zero to precision")
        if self.prec >= _EXACT // 2:
            raise PrecisionError("truncate an exact series before inverting it")
        a = self.pad().cs
        n = len(a)
        b0 = a[0].inverse()
        out = [b0]
        for k in range(1, n):
            s = self.ring.zero
            for j in range(1, k + 1):
                s = s + a[j] * out[k - j]
            out.append(-(b0 * s))
        return KLaurent(self.ring, -self.val, out, self.prec - 2 * self.val)

    def __truediv__(self, other):
        return self * other.inverse()

    def truncate(self, prec: int) -> "KLaurent":
        if prec >= self.prec:
            return self
        return KLaurent(self.ring, self.val, self.cs[: max(prec - self.val, 0)], prec)

    def extend_with_zeros(self, prec: int) -> "KLaurent":
        """Reinterpret with higher precision; only valid inside Newton loops
        that self-correct coefficients above the old precision."""
        if prec <= self.prec:
            return self.truncate(prec)
        cs = self.pad().cs + [self.ring.zero] * (prec - self.prec)
        return KLaurent(self.ring, self.val, cs, prec)

    def pow_int(self, e: int) -> "KLaurent":
        if e < 0:
            return self.inverse().pow_int(-e)
        result = KLaurent.const(self.ring, self.ring.one, _EXACT)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def order(self) -> int:
        if not self.cs:
            raise PrecisionError("series is zero to its precision; order unknown")
        return self.val

    def n_known(self) -> int:
        return self.prec - self.val

    def __repr__(self):
        if not self.cs:
            return f"O(s^{self.prec})"
        body = " + ".join(f"({c!r})*s^{self.val + k}" for k, c in enumerate(self.cs)
                          if not c.is_zero())
        return f"{body or '0'} + O(s^{self.prec})"


class FuncField:
    """Rational functions on E with coefficients in K, variables (t, y)."""

    def __init__(self, base: BaseField):
        self.base = base
        self.fq = base.fq
        c = base.params
        k = base
        self.rt = ObjPoly.make(base, [k.elem(c.c6), k.elem(c.c4), k.elem(c.c2), k.one])
        self.st = ObjPoly.make(base, [k.elem(c.c3), k.elem(c.c1)])
        self.zero = CurveFunction(self, ObjPoly.zero(base), ObjPoly.zero(base),
                                  ObjPoly.one(base))
        self.one = CurveFunction(self, ObjPoly.one(base), ObjPoly.zero(base),
                                 ObjPoly.one(base))
        self.t = CurveFunction(self, ObjPoly.x(base), ObjPoly.zero(base),
                               ObjPoly.one(base))
        self.y = CurveFunction(self, ObjPoly.zero(base), ObjPoly.one(base),
                               ObjPoly.one(base))
        self._ycache: dict = {}

    def elem(self, v) -> "CurveFunction":
        if isinstance(v, CurveFunction):
            if v.ff is not self:
                raise AlgebraError("function from a different field")
            return v
        return self.lift(self.base.elem(v) if not isinstance(v, BaseElement) else v)

    def lift(self, c: BaseElement) -> "CurveFunction":
        return CurveFunction(self, ObjPoly.const(self.base, c),
                             ObjPoly.zero(self.base), ObjPoly.one(self.base))

    def make(self, a0: ObjPoly, a1: ObjPoly, b: ObjPoly) -> "CurveFunction":
        return _reduce_func(self, a0, a1, b)

    def vertical(self, x0: BaseElement) -> "CurveFunction":
        return CurveFunction(self, ObjPoly.make(self.base, [-x0, self.base.one]),
                             ObjPoly.zero(self.base), ObjPoly.one(self.base))

    def line_through(self, p: "CurvePoint", q: "CurvePoint") -> "CurveFunction":
        """The line y = lam*t + nu through p and q (tangent when p == q);
        requires the line to be non-vertical."""
        lam = _slope(self.base, p, q)
        if lam is None:
            raise AlgebraError("line through the pair is vertical")
        nu = p.y - lam * p.x
        return CurveFunction(self, ObjPoly.make(self.base, [-nu, -lam]),
                             ObjPoly.one(self.base), ObjPoly.one(self.base))


def _reduce_func(ff: FuncField, a0: ObjPoly, a1: ObjPoly, b: ObjPoly) -> "CurveFunction":
    if b.is_zero():
        raise ZeroDivisionError("zero denominator on E")
    if a0.is_zero() and a1.is_zero():
        return CurveFunction(ff, a0, a1, ObjPoly.one(ff.base))
    if b.degree > 0:
        # as in _reduce_base: start the chain at the denominator and bail
        # out as soon as it is coprime to one numerator
        g = b.gcd(a1 if a0.is_zero() else a0)
        if g.degree > 0 and not (a0.is_zero() or a1.is_zero()):
            g = g.gcd(a1)
        if g.degree > 0:
            a0, a1, b = a0.exact_div(g), a1.exact_div(g), b.exact_div(g)
    lc = b.lead()
    if not lc == ff.base.one:
        inv = lc.inverse()
        a0, a1, b = a0.scale(inv), a1.scale(inv), b.scale(inv)
    if b.degree == 0:
        b = ObjPoly.one(ff.base)
    return CurveFunction(ff, a0, a1, b)


class CurveFunction:
    """Rational function (A0 + A1*y)/B on E, in reduced canonical form."""

    __slots__ = ("ff", "a0", "a1", "b")

    def __init__(self, ff: FuncField, a0: ObjPoly, a1: ObjPoly, b: ObjPoly):
        self.ff = ff
        self.a0 = a0
        self.a1 = a1
        self.b = b

    def __add__(self, other):
        other = self.ff.elem(other)
        a0 = self.a0 * other.b + other.a0 * self.b
        a1 = self.a1 * other.b + other.a1 * self.b
        return _reduce_func(self.ff, a0, a1, self.b * other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = self.ff.elem(other)
        a0 = self.a0 * other.b - other.a0 * self.b
        a1 = self.a1 * other.b - other.a1 * self.b
        return _reduce_func(self.ff, a0, a1, self.b * other.b)

    def __rsub__(self, other):
        return self.ff.elem(other) - self

    def __neg__(self):
        return CurveFunction(self.ff, -self.a0, -self.a1, self.b)

    def __mul__(self, other):
        other = self.ff.elem(other)
        ff = self.ff
        cross = self.a1 * other.a1
        a0 = self.a0 * other.a0 + cross * ff.rt
        a1 = self.a0 * other.a1 + self.a1 * other.a0 - cross * ff.st
        return _reduce_func(ff, a0, a1, self.b * other.b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self.ff.elem(other).inverse()

    def __rtruediv__(self, other):
        return self.ff.elem(other) * self.inverse()

    def inverse(self) -> "CurveFunction":
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero function")
        ff = self.ff
        conj0 = self.a0 - self.a1 * ff.st
        conj1 = -self.a1
        norm = self.a0 * self.a0 - self.a0 * self.a1 * ff.st \
            - self.a1 * self.a1 * ff.rt
        return _reduce_func(ff, self.b * conj0, self.b * conj1, norm)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ff.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_zero(self) -> bool:
        return self.a0.is_zero() and self.a1.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def is_base(self) -> bool:
        return self.a1.is_zero() and self.b.is_one() and self.a0.degree <= 0

    def as_base(self) -> BaseElement:
        if not self.is_base():
            raise AlgebraError("function is not a K constant")
        return self.a0.coeff(0)

    def deg_sgn(self) -> tuple[int, BaseElement]:
        """Pole order at the place at infinity of E (t has degree 2, y 3) and
        the K-leading coefficient in the monomial basis {t^i, t^j*y}."""
        if self.is_zero():
            raise AlgebraError("deg_sgn of the zero function")
        d0 = 2 * self.a0.degree if not self.a0.is_zero() else None
        d1 = 3 + 2 * self.a1.degree if not self.a1.is_zero() else None
        if d1 is None or (d0 is not None and d0 > d1):
            d, lead = d0, self.a0.lead()
        else:
            d, lead = d1, self.a1.lead()
        return d - 2 * self.b.degree, lead

    @property
    def degree(self):
        return None if self.is_zero() else self.deg_sgn()[0]

    def twist(self, k: int = 1) -> "CurveFunction":
        """Apply the q-power Frobenius to the K coefficients only."""
        if k == 0:
            return self
        if k < 0:
            raise InexactRootError("negative twists of curve functions are not "
                                   "K-rational in general")
        return CurveFunction(self.ff, self.a0.twist(k), self.a1.twist(k),
                             self.b.twist(k))

    def specialize_origin(self) -> BaseElement:
        """Value of the polynomial representative at t = 0, y = 0; requires
        a trivial denominator."""
        if not self.b.is_one():
            raise AlgebraError("substitution needs a polynomial representative")
        return self.a0.coeff(0)

    def eval_at(self, p: "CurvePoint") -> BaseElement:
        """Exact value at a point, resolving removable 0/0 by expansion."""
        if p.inf:
            d = self.degree
            if d is None or d < 0:
                return self.ff.base.zero
            if d > 0:
                raise PoleError("pole at infinity")
            return self.deg_sgn()[1]
        bv = self.b.eval_elem(p.x)
        if not bv.is_zero():
            return (self.a0.eval_elem(p.x) + self.a1.eval_elem(p.x) * p.y) / bv
        ex = expand_at_point(self, p, 2)
        if ex.is_zero_known():
            # function vanishes deeper than the probe; it is zero at p
            return self.ff.base.zero
        if ex.order() > 0:
            return self.ff.base.zero
        if ex.order() < 0:
            raise PoleError("pole at the evaluation point")
        return ex.coeff(0)

    def key(self) -> tuple:
        return (tuple(c.key() for c in self.a0.cs),
                tuple(c.key() for c in self.a1.cs),
                tuple(c.key() for c in self.b.cs))

    def __eq__(self, other):
        return (isinstance(other, CurveFunction) and self.ff is other.ff
                and self.a0 == other.a0 and self.a1 == other.a1
                and self.b == other.b)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        parts = []
        if not self.a0.is_zero():
            parts.append(_tpoly_repr(self.a0))
        if not self.a1.is_zero():
            s = _tpoly_repr(self.a1)
            parts.append("y" if s == "1" else f"({s})*y")
        body = " + ".join(parts) if parts else "0"
        if self.b.is_one():
            return body
        return f"({body}) / ({_tpoly_repr(self.b)})"


def _tpoly_repr(p: ObjPoly) -> str:
    terms = []
    for k in range(p.degree, -1, -1):
        c = p.coeff(k)
        if c.is_zero():
            continue
        cs = repr(c)
        if k == 0:
            terms.append(cs)
        else:
            tk = "t" if k == 1 else f"t^{k}"
            terms.append(tk if cs == "1" else f"({cs})*{tk}")
    return " + ".join(terms)


def _slope(base: BaseField, p: "CurvePoint", q: "CurvePoint"):
    """Slope of the chord/tangent through p, q; None when vertical."""
    c = base.params
    if p == q:
        den = base.elem(2) * p.y + base.elem(c.c1) * p.x + base.elem(c.c3)
        if den.is_zero():
            return None
        num = (base.elem(3) * p.x * p.x + base.elem(2) * base.elem(c.c2) * p.x
               + base.elem(c.c4) - base.elem(c.c1) * p.y)
        return num / den
    if p.x == q.x:
        return None
    return (q.y - p.y) / (q.x - p.x)


class CurvePoint:
    """A point of E over K (or the point at infinity)."""

    __slots__ = ("field", "inf", "x", "y")

    def __init__(self, field: BaseField, x=None, y=None, inf: bool = False):
        self.field = field
        self.inf = inf
        self.x = x
        self.y = y

    @staticmethod
    def infinity(field: BaseField) -> "CurvePoint":
        return CurvePoint(field, inf=True)

    @staticmethod
    def affine(field: BaseField, x, y) -> "CurvePoint":
        p = CurvePoint(field, field.elem(x), field.elem(y))
        if not p.on_curve():
            raise AlgebraError(f"({p.x!r}, {p.y!r}) is not on the curve")
        return p

    def on_curve(self) -> bool:
        if self.inf:
            return True
        k = self.field
        c = k.params
        lhs = self.y * self.y + k.elem(c.c1) * self.x * self.y + k.elem(c.c3) * self.y
        rhs = (self.x ** 3 + k.elem(c.c2) * self.x * self.x
               + k.elem(c.c4) * self.x + k.elem(c.c6))
        return lhs == rhs

    def __neg__(self):
        if self.inf:
            return self
        k = self.field
        c = k.params
        return CurvePoint(k, self.x, -self.y - k.elem(c.c1) * self.x - k.elem(c.c3))

    def __add__(self, other: "CurvePoint") -> "CurvePoint":
        if self.inf:
            return other
        if other.inf:
            return self
        k = self.field
        c = k.params
        if self.x == other.x and not self.y == other.y:
            return CurvePoint.infinity(k)
        lam = _slope(k, self, other)
        if lam is None:
            return CurvePoint.infinity(k)
        a1, a2, a3 = k.elem(c.c1), k.elem(c.c2), k.elem(c.c3)
        x3 = lam * lam + a1 * lam - a2 - self.x - other.x
        y3 = lam * (self.x - x3) - self.y - a1 * x3 - a3
        return CurvePoint(k, x3, y3)

    def __sub__(self, other):
        return self + (-other)

    def scalar(self, m: int) -> "CurvePoint":
        if m < 0:
            return (-self).scalar(-m)
        out = CurvePoint.infinity(self.field)
        add = self
        while m:
            if m & 1:
                out = out + add
            add = add + add
            m >>= 1
        return out

    def twist(self, k: int = 1) -> "CurvePoint":
        if self.inf:
            return self
        return CurvePoint(self.field, self.x.twist(k), self.y.twist(k))

    def is_ramified(self) -> bool:
        """True when the vertical through the point is tangent (P == -P)."""
        return (not self.inf) and self == -self

    def sort_key(self):
        if self.inf:
            return (0,)
        return (1, self.x.key(), self.y.key())

    def __eq__(self, other):
        if not isinstance(other, CurvePoint):
            return NotImplemented
        if self.inf or other.inf:
            return self.inf and other.inf
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.inf,) if self.inf else (self.x.key(), self.y.key()))

    def __repr__(self):
        return "oo" if self.inf else f"({self.x!r}, {self.y!r})"


class CurveDivisor:
    """Finite formal Z-combination of points of E."""

    __slots__ = ("field", "mults")

    def __init__(self, field: BaseField, mults: dict | None = None):
        self.field = field
        self.mults = {}
        for pt, m in (mults or {}).items():
            if m:
                self.mults[pt] = self.mults.get(pt, 0) + m
        self.mults = {pt: m for pt, m in self.mults.items() if m}

    @staticmethod
    def of(field: BaseField, *pairs) -> "CurveDivisor":
        d: dict = {}
        for pt, m in pairs:
            d[pt] = d.get(pt, 0) + m
        return CurveDivisor(field, d)

    def items_sorted(self):
        return sorted(self.mults.items(), key=lambda pm: pm[0].sort_key())

    def mult(self, pt: CurvePoint) -> int:
        return self.mults.get(pt, 0)

    def __add__(self, other: "CurveDivisor") -> "CurveDivisor":
        d = dict(self.mults)
        for pt, m in other.mults.items():
            d[pt] = d.get(pt, 0) + m
        return CurveDivisor(self.field, d)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, k: int) -> "CurveDivisor":
        return CurveDivisor(self.field, {pt: k * m for pt, m in self.mults.items()})

    def twist(self, k: int = 1) -> "CurveDivisor":
        return CurveDivisor(self.field, {pt.twist(k): m for pt, m in self.mults.items()})

    def degree(self) -> int:
        return sum(self.mults.values())

    def group_sum(self) -> CurvePoint:
        acc = CurvePoint.infinity(self.field)
        for pt, m in self.items_sorted():
            acc = acc + pt.scalar(m)
        return acc

    def is_principal(self) -> bool:
        return self.degree() == 0 and self.group_sum().inf

    def __eq__(self, other):
        return isinstance(other, CurveDivisor) and self.mults == other.mults

    def __repr__(self):
        if not self.mults:
            return "0"
        return " + ".join(f"{m}*{pt!r}" for pt, m in self.items_sorted())


def function_with_divisor(ff: FuncField, div: CurveDivisor,
                          check: bool = True) -> CurveFunction:
    """The sign-normalized function with the given principal divisor.

    Chord-and-vertical reduction: negative multiplicities are first traded
    for positive ones through verticals, then affine points are merged
    pairwise through chords until nothing is left.  The result is exact and
    unique once the leading coefficient at infinity is normalized to 1.
    """
    if not div.is_principal():
        raise NotPrincipalError(f"divisor of degree {div.degree()} with group sum "
                                f"{div.group_sum()!r}")
    acc = ff.one
    rem: dict[CurvePoint, int] = {pt: m for pt, m in div.mults.items() if not pt.inf}

    def bump(pt, d):
        m = rem.get(pt, 0) + d
        if m:
            rem[pt] = m
        else:
            rem.pop(pt, None)

    def first_affine(pred):
        for pt in sorted(rem, key=lambda s: s.sort_key()):
            if pred(rem[pt]):
                return pt
        return None

    while True:
        neg = first_affine(lambda m: m < 0)
        if neg is None:
            break
        acc = acc / ff.vertical(neg.x)
        bump(neg, 1)
        bump(-neg, 1)

    while sum(rem.values()) >= 2:
        p = first_affine(lambda m: m > 0)
        if rem[p] >= 2:
            q = p
        else:
            q = None
            for pt in sorted(rem, key=lambda s: s.sort_key()):
                if pt != p and rem[pt] > 0:
                    q = pt
                    break
        if q == -p or (q == p and p.is_ramified()):
            acc = acc * ff.vertical(p.x)
            bump(p, -1)
            bump(-p, -1)
            continue
        r = p + q
        acc = acc * ff.line_through(p, q) / ff.vertical(r.x)
        bump(p, -1)
        bump(q, -1)
        bump(r, 1)

    if rem:
        raise NotPrincipalError("reduction left an affine remainder; "
                                "divisor was not principal")
    acc = acc / ff.lift(acc.deg_sgn()[1])
    if check:
        probe_divisor(acc, div)
    return acc


def probe_divisor(fn: CurveFunction, div: CurveDivisor) -> None:
    """Check ord_P(fn) against the divisor on its support and at infinity.
    With matching degree data and sign 1 this pins the function exactly."""
    d, s = fn.deg_sgn()
    if not s == fn.ff.base.one:
        raise AlgebraError("function is not sign-normalized")
    inf_mult = div.mult(CurvePoint.infinity(fn.ff.base))
    if -d != inf_mult:
        raise AlgebraError(f"order {-d} at infinity, divisor says {inf_mult}")
    for pt, m in div.items_sorted():
        if pt.inf:
            continue
        o = order_at(fn, pt, abs(m) + 2)
        if o != m:
            raise AlgebraError(f"order {o} at {pt!r}, divisor says {m}")


def order_at(fn: CurveFunction, p: CurvePoint, bound: int) -> int:
    """ord_P(fn), searched within [-bound, bound]."""
    ex = expand_at_point(fn, p, bound + 1)
    if ex.is_zero_known():
        raise PrecisionError(f"function vanishes to order > {bound} at {p!r}")
    return ex.order()


def y_series_at(ff: FuncField, p: CurvePoint, terms: int) -> KLaurent:
    """Power series of the y-coordinate along the curve at an affine,
    non-ramified point, in the parameter s = t - t(P)."""
    if p.inf:
        raise AlgebraError("expansion parameter at infinity is z, not s")
    if p.is_ramified():
        raise AlgebraError("point is ramified for the t-projection")
    key = (p.sort_key(), )
    cached = ff._ycache.get(key)
    if cached is not None and cached.prec >= terms:
        return cached.truncate(terms)
    base = ff.base
    c = base.params
    x0, y0 = p.x, p.y
    # W(x0+s, Y) = Y^2 + sp(s) Y - rp(s)
    c1, c2, c3, c4, c6 = (base.elem(c.c1), base.elem(c.c2), base.elem(c.c3),
                          base.elem(c.c4), base.elem(c.c6))
    sp = KLaurent(base, 0, [c1 * x0 + c3, c1], _EXACT)
    rp = KLaurent(base, 0, [
        x0 ** 3 + c2 * x0 * x0 + c4 * x0 + c6,
        base.elem(3) * x0 * x0 + base.elem(2) * c2 * x0 + c4,
        base.elem(3) * x0 + c2,
        base.one,
    ], _EXACT)
    two = base.elem(2)
    yk = KLaurent.const(base, y0, 1)
    k = 1
    while k < terms:
        k = min(2 * k, terms)
        ye = yk.extend_with_zeros(k)
        w = ye * ye + sp.truncate(k) * ye - rp.truncate(k)
        wp = ye.scale(two) + sp.truncate(k)
        yk = (ye - w * wp.inverse()).truncate(k)
    ff._ycache[key] = yk
    return yk


def expand_at_point(fn: CurveFunction, p: CurvePoint, terms: int) -> KLaurent:
    """Laurent expansion of fn at an affine point in s = t - t(P), carrying
    at least `terms` known coefficients from its leading order."""
    base = fn.ff.base
    guard = 2 * (fn.b.degree + 2)
    for attempt in range(6):
        window = terms + guard
        ys = y_series_at(fn.ff, p, window)
        ts = KLaurent(base, 0, [p.x, base.one], _EXACT)
        num = fn.a0.eval_series(ts) + fn.a1.eval_series(ts) * ys
        den = fn.b.eval_series(ts)
        num = num.truncate(min(num.val + window, window))
        den = den.truncate(min(den.val + window, window))
        if den.is_zero_known():
            guard *= 2
            continue
        out = num * den.inverse()
        if out.is_zero_known() or out.n_known() >= terms:
            return out.truncate(out.val + terms) if out.cs else out
        guard *= 2
    raise PrecisionError("expansion window kept collapsing; raise terms")


def expand_at_infinity(fn: CurveFunction, terms: int) -> KLaurent:
    """Laurent expansion of fn at infinity in z = t/y, with t = v/z^2 and
    y = v/z^3 for the exact curve series v."""
    base = fn.ff.base
    guard = 2 * (fn.b.degree + 2) + 6
    for attempt in range(6):
        window = terms + guard
        vco = [base.elem(cv) for cv in base.infinity_series(window)]
        v = KLaurent(base, 0, vco, window)
        ts = v.shift(-2)
        ys = v.shift(-3)
        num = (fn.a0.eval_series(ts) + fn.a1.eval_series(ts) * ys)
        den = fn.b.eval_series(ts)
        num = num.truncate(num.val + window)
        den = den.truncate(den.val + window)
        if den.is_zero_known():
            guard *= 2
            continue
        out = num * den.inverse()
        if out.is_zero_known() or out.n_known() >= terms:
            return out.truncate(out.val + terms) if out.cs else out
        guard *= 2
    raise PrecisionError("expansion window kept collapsing; raise terms")
