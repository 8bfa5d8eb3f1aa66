"""Truncated series arithmetic at the two distinguished places.

InfSeries models an element of the completed field at infinity: a Laurent
series in the uniformizer u (with t = v(u)/u^2 and y = v(u)/u^3 for the
canonical unit v), times a symbolic fractional power of the period
normalization constant xi.  The fractional power is never expanded; it is
carried as an integer numerator over q - 1 and two series may only be added
when those numerators agree.

LocalExpansion stacks InfSeries coefficients along powers of s = t - theta,
the uniformizer at the distinguished point (theta, eta).  Residues at that
point, and hence periods, come out of these.

Both types track absolute precision through every operation, so downstream
consumers can prove how many of the reported coefficients are meaningful
rather than guessing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlgebraError, InputError, PrecisionError, TagError
from .fields import Fq, FqElem, UniPoly
from .curve import BaseElement, BaseField, KLaurent, _ser_inv, _ser_trunc

# absolute precision used for series known exactly (constants, padding
# zeros); mirrors the sentinel the curve-side Laurent arithmetic uses
EXACT = 10**9


@dataclass(frozen=True)
class TruncationPolicy:
    """How far every truncated computation is carried.

    u_prec: coefficients kept per series at the infinite place.
    local_terms: coefficient window for expansions at (theta, eta).
    exp_terms: twist order J for exponential/logarithm coefficient use.
    product_cap: hard ceiling on factors in stabilizing infinite products.
    """

    u_prec: int = 64
    local_terms: int = 12
    exp_terms: int = 6
    product_cap: int = 64

    def __post_init__(self):
        for name in ("u_prec", "local_terms", "exp_terms", "product_cap"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise InputError(f"{name} must be a positive integer, got {v!r}")

    @classmethod
    def default(cls, n: int) -> "TruncationPolicy":
        """Window sizes that cover the rank-n computations comfortably."""
        if n < 1:
            raise InputError(f"dimension must be positive, got {n}")
        return cls(local_terms=n + 8)


def _lead_index(c: UniPoly) -> int:
    nz = np.nonzero(np.any(c.c != 0, axis=1))[0]
    return int(nz[0]) if nz.size else -1


class InfSeries:
    """xi^(xi_exp_num/(q-1)) * u^leading_exp * (c_0 + c_1 u + ...).

    Coefficients live in F_q and are known for exponents below abs_prec.
    The leading coefficient is nonzero unless the series is zero to
    precision, in which case leading_exp == abs_prec and the stream is
    empty.  A zero series is tag-agnostic: it may be added to a series with
    any xi_exp_num, since 0 absorbs every normalization.
    """

    __slots__ = ("fq", "leading_exp", "c", "abs_prec", "xi_exp_num")

    def __init__(self, fq: Fq, leading_exp: int, c: UniPoly, abs_prec: int,
                 xi_exp_num: int = 0):
        abs_prec = min(abs_prec, EXACT)
        lead = _lead_index(c)
        if lead > 0:
            leading_exp += lead
            c = UniPoly(fq, c.c[lead:])
        keep = abs_prec - leading_exp
        if lead < 0 or keep <= 0:
            leading_exp, c = abs_prec, UniPoly.zero(fq)
        elif c.c.shape[0] > keep:
            c = UniPoly.from_rows(fq, c.c[:keep])
            if c.is_zero():
                leading_exp, c = abs_prec, c
        self.fq = fq
        self.leading_exp = leading_exp
        self.c = c
        self.abs_prec = abs_prec
        self.xi_exp_num = xi_exp_num

    def __setattr__(self, name, value):
        if hasattr(self, "xi_exp_num") and name != "__dict__":
            raise AttributeError("InfSeries is immutable")
        object.__setattr__(self, name, value)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(fq: Fq, abs_prec: int = EXACT, tag: int = 0) -> "InfSeries":
        return InfSeries(fq, abs_prec, UniPoly.zero(fq), abs_prec, tag)

    @staticmethod
    def const(fq: Fq, value, abs_prec: int = EXACT, tag: int = 0) -> "InfSeries":
        return InfSeries(fq, 0, UniPoly.const(fq, fq.elem(value)), abs_prec, tag)

    @staticmethod
    def one(fq: Fq, abs_prec: int = EXACT) -> "InfSeries":
        return InfSeries.const(fq, 1, abs_prec)

    @staticmethod
    def from_elems(fq: Fq, leading_exp: int, elems, abs_prec: int,
                   tag: int = 0) -> "InfSeries":
        return InfSeries(fq, leading_exp, UniPoly.from_elems(fq, elems),
                         abs_prec, tag)

    # -- inspection ----------------------------------------------------------

    @property
    def coeffs(self) -> tuple:
        """Known coefficients, from leading_exp up (empty when zero).

        Exactly-known series report only their stored stream; everything
        past it is zero.
        """
        window = self.abs_prec - self.leading_exp
        if self.abs_prec >= EXACT:
            window = self.c.c.shape[0]
        return tuple(self.c.coeff(k) for k in range(window))

    def is_zero(self) -> bool:
        return self.c.is_zero()

    def coeff(self, e: int) -> FqElem:
        if e >= self.abs_prec:
            raise PrecisionError(
                f"coefficient of u^{e} requested but the series is only "
                f"known below u^{self.abs_prec}")
        if e < self.leading_exp:
            return self.fq.zero
        return self.c.coeff(e - self.leading_exp)

    def norm_exp(self):
        """-leading_exp, the size exponent within this series' tag class;
        None when zero to precision (no lower bound on size)."""
        return None if self.is_zero() else -self.leading_exp

    def n_known(self) -> int:
        return self.abs_prec - self.leading_exp

    # -- tag bookkeeping -----------------------------------------------------

    def retag(self, tag: int) -> "InfSeries":
        """Declare a xi normalization outright; the caller asserts it."""
        return InfSeries(self.fq, self.leading_exp, self.c, self.abs_prec, tag)

    def fold(self, xi_series: "InfSeries", count: int) -> "InfSeries":
        """Multiply by an untagged expansion of xi, count times, trading
        count*(q-1) off the tag numerator.  Resolves integer xi powers so
        series from different twist levels become comparable."""
        if xi_series.xi_exp_num != 0:
            raise TagError("fold needs an untagged expansion of xi")
        out = self * xi_series**count
        return out.retag(self.xi_exp_num - count * (self.fq.q - 1))

    def _join_tag(self, other: "InfSeries") -> int:
        if self.is_zero():
            return other.xi_exp_num
        if other.is_zero() or self.xi_exp_num == other.xi_exp_num:
            return self.xi_exp_num
        raise TagError(
            f"cannot add series with xi exponents {self.xi_exp_num}/(q-1) "
            f"and {other.xi_exp_num}/(q-1)")

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, InfSeries):
            return NotImplemented
        tag = self._join_tag(other)
        lo = min(self.leading_exp, other.leading_exp)
        prec = min(self.abs_prec, other.abs_prec)
        c = self.c.shift(self.leading_exp - lo) + other.c.shift(other.leading_exp - lo)
        return InfSeries(self.fq, lo, c, prec, tag)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return InfSeries(self.fq, self.leading_exp, -self.c, self.abs_prec,
                         self.xi_exp_num)

    def __mul__(self, other):
        if not isinstance(other, InfSeries):
            return NotImplemented
        tag = self.xi_exp_num + other.xi_exp_num
        prec = min(self.leading_exp + other.abs_prec,
                   other.leading_exp + self.abs_prec)
        return InfSeries(self.fq, self.leading_exp + other.leading_exp,
                         self.c * other.c, prec, tag)

    def scale(self, e) -> "InfSeries":
        return InfSeries(self.fq, self.leading_exp, self.c.scale(self.fq.elem(e)),
                         self.abs_prec, self.xi_exp_num)

    def inverse(self) -> "InfSeries":
        if self.is_zero():
            raise ZeroDivisionError("inverse of a series that is zero to precision")
        if self.abs_prec >= EXACT // 2:
            # a single exact monomial inverts exactly; anything longer has
            # an infinite inverse and must carry an honest window first
            if self.c.degree == 0:
                ci = UniPoly.const(self.fq, self.c.coeff(0).inverse())
                return InfSeries(self.fq, -self.leading_exp, ci, EXACT,
                                 -self.xi_exp_num)
            raise PrecisionError("truncate an exact series before inverting it")
        window = self.abs_prec - self.leading_exp
        ci = _ser_inv(self.c, window)
        return InfSeries(self.fq, -self.leading_exp, ci,
                         self.abs_prec - 2 * self.leading_exp, -self.xi_exp_num)

    def __truediv__(self, other):
        if not isinstance(other, InfSeries):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, e: int) -> "InfSeries":
        if e < 0:
            return self.inverse() ** (-e)
        out = InfSeries.one(self.fq)
        b = self
        while e:
            if e & 1:
                out = out * b
            b = b * b if e > 1 else b
            e >>= 1
        return out

    def twist(self, k: int) -> "InfSeries":
        """Apply the q^k power map: exponents scale by q^k, F_q coefficients
        are fixed, and the tag numerator scales by q^k (staying in the same
        residue class mod q - 1)."""
        if k < 0:
            raise InputError("series twist by a negative power")
        if k == 0:
            return self
        step = self.fq.q ** k
        prec = (min(self.abs_prec, EXACT // step) - 1) * step + 1
        return InfSeries(self.fq, self.leading_exp * step, self.c.twist(k),
                         prec, self.xi_exp_num * step)

    def truncate(self, abs_prec: int) -> "InfSeries":
        if abs_prec >= self.abs_prec:
            return self
        return InfSeries(self.fq, self.leading_exp, self.c, abs_prec,
                         self.xi_exp_num)

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, InfSeries):
            return NotImplemented
        return (self.fq == other.fq and self.leading_exp == other.leading_exp
                and self.abs_prec == other.abs_prec
                and self.xi_exp_num == other.xi_exp_num and self.c == other.c)

    def __hash__(self):
        return hash((self.leading_exp, self.abs_prec, self.xi_exp_num, self.c))

    def agrees_with(self, other: "InfSeries", min_coeffs: int | None = None) -> bool:
        """Coefficientwise equality over the common known window.

        With min_coeffs set, the overlap must cover at least that many
        coefficients from the earlier leading exponent or the comparison
        refuses (PrecisionError) rather than vacuously passing.
        """
        if not (self.is_zero() or other.is_zero()) \
                and self.xi_exp_num != other.xi_exp_num:
            raise TagError(
                f"comparing series with xi exponents {self.xi_exp_num}/(q-1) "
                f"and {other.xi_exp_num}/(q-1)")
        lo = min(self.leading_exp, other.leading_exp)
        hi = min(self.abs_prec, other.abs_prec)
        if min_coeffs is not None and hi - lo < min_coeffs:
            raise PrecisionError(
                f"only {hi - lo} common coefficients known, {min_coeffs} required")
        if hi >= EXACT:
            # both exactly known: everything past the stored streams is zero
            hi = max(self.leading_exp + self.c.c.shape[0],
                     other.leading_exp + other.c.c.shape[0], lo)
        return all(self.coeff(e) == other.coeff(e) for e in range(lo, hi))

    # -- display -------------------------------------------------------------

    def text(self) -> str:
        head = f"xi^({self.xi_exp_num}/(q-1)) * "
        window = self.abs_prec - self.leading_exp
        parts = []
        for k in range(min(window, self.c.c.shape[0])):
            ck = self.c.coeff(k)
            if ck.is_zero():
                continue
            cs = repr(ck)
            if k == 0:
                parts.append(cs)
            elif cs == "1":
                parts.append("u" if k == 1 else f"u^{k}")
            else:
                parts.append(f"{cs} u" if k == 1 else f"{cs} u^{k}")
        if self.abs_prec < EXACT:
            parts.append(f"O(u^{max(window, 0)})")
        body = " + ".join(parts) if parts else "0"
        return f"{head}u^({self.leading_exp}) * ({body})"

    def __repr__(self):
        return self.text()


def series_twist(s: InfSeries, k: int) -> InfSeries:
    return s.twist(k)


# -- evaluation of exact field elements at the infinite place -----------------


def _unit_series(base: BaseField, window: int) -> UniPoly:
    cache = getattr(base, "_emb_units", None)
    if cache is None:
        cache = {}
        base._emb_units = cache
    if window not in cache:
        cache[window] = UniPoly.from_elems(base.fq, base.infinity_series(window))
    return cache[window]


def _poly_at_theta(p: UniPoly, v: UniPoly, window: int) -> UniPoly:
    """u^(2 deg p) * p(v/u^2) as an ascending window of coefficients."""
    d = p.degree
    acc = UniPoly.const(p.fq, p.lead())
    for k in range(d - 1, -1, -1):
        acc = _ser_trunc(acc * v, window)
        e = 2 * (d - k)
        ck = p.coeff(k)
        if e < window and not ck.is_zero():
            acc = acc + UniPoly.const(p.fq, ck).shift(e)
    return acc


def embed(x: BaseElement, policy: TruncationPolicy) -> InfSeries:
    """Expansion of an exact field element at the infinite place.

    The result carries policy.u_prec coefficients; its leading exponent is
    minus the degree of x and its leading coefficient is the sign of x,
    which is asserted against the exact degree/sign computation.  The even
    part of x and the odd part never share a leading exponent, so no
    precision is lost to cancellation.
    """
    fq = x.field.fq
    if x.is_zero():
        return InfSeries.zero(fq, policy.u_prec)
    window = policy.u_prec
    v = _unit_series(x.field, window + 3)
    lo_parts = []
    if not x.n0.is_zero():
        lo_parts.append((-2 * x.n0.degree, _poly_at_theta(x.n0, v, window)))
    if not x.n1.is_zero():
        h1 = _ser_trunc(_poly_at_theta(x.n1, v, window) * v, window)
        lo_parts.append((-2 * x.n1.degree - 3, h1))
    lo = min(e for e, _ in lo_parts)
    num = UniPoly.zero(fq)
    for e, h in lo_parts:
        num = num + h.shift(e - lo)
    num = _ser_trunc(num, window)
    den = _poly_at_theta(x.den, v, window)
    out = InfSeries(fq, lo + 2 * x.den.degree,
                    _ser_trunc(num * _ser_inv(den, window), window),
                    lo + 2 * x.den.degree + window)
    deg, sgn = x.deg_sgn()
    if out.leading_exp != -deg or out.coeff(-deg) != sgn:
        raise AlgebraError("series expansion contradicts the exact degree data")
    return out


# -- expansions at the distinguished point ------------------------------------


class LocalExpansion:
    """sum over k >= leading_ord of coeffs[k] * s^k, s = t - theta, with
    InfSeries coefficients known for k < prec.

    Leading coefficients that are zero to their u-precision are stripped, so
    leading_ord is the apparent order; an expansion with no known nonzero
    coefficient has leading_ord == prec and an empty stream.
    """

    __slots__ = ("fq", "leading_ord", "coeffs", "prec")

    def __init__(self, fq: Fq, leading_ord: int, coeffs, prec: int):
        prec = min(prec, EXACT)
        coeffs = list(coeffs)
        while coeffs and coeffs[0].is_zero():
            coeffs.pop(0)
            leading_ord += 1
        if leading_ord >= prec:
            coeffs, leading_ord = [], prec
        else:
            coeffs = coeffs[:prec - leading_ord]
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        self.fq = fq
        self.leading_ord = leading_ord
        self.coeffs = tuple(coeffs)
        self.prec = prec

    @staticmethod
    def zero(fq: Fq, prec: int = EXACT) -> "LocalExpansion":
        return LocalExpansion(fq, prec, [], prec)

    @staticmethod
    def from_scalar(s: InfSeries, ord: int = 0, prec: int = EXACT) -> "LocalExpansion":
        return LocalExpansion(s.fq, ord, [s], prec)

    # -- inspection ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def order(self) -> int:
        if self.is_zero():
            raise PrecisionError("order of an expansion that is zero to precision")
        return self.leading_ord

    def coeff(self, k: int) -> InfSeries:
        if k >= self.prec:
            raise PrecisionError(
                f"coefficient of s^{k} requested but the expansion is only "
                f"known below s^{self.prec}")
        i = k - self.leading_ord
        if i < 0 or i >= len(self.coeffs):
            return InfSeries.zero(self.fq)
        return self.coeffs[i]

    def residue(self) -> InfSeries:
        """Coefficient of s^(-1); demands the window actually covers it."""
        if self.prec < 0:
            raise PrecisionError(
                f"residue needs coefficients through order -1, but the "
                f"expansion is only known below s^{self.prec}")
        return self.coeff(-1)

    def n_known(self) -> int:
        return self.prec - self.leading_ord

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, LocalExpansion):
            return NotImplemented
        prec = min(self.prec, other.prec)
        # an empty stream has apparent order == prec, which may be the
        # exact sentinel; never size a buffer from it
        if self.is_zero():
            return LocalExpansion(self.fq, other.leading_ord, other.coeffs,
                                  prec)
        if other.is_zero():
            return LocalExpansion(self.fq, self.leading_ord, self.coeffs,
                                  prec)
        lo = min(self.leading_ord, other.leading_ord)
        n = max(self.leading_ord + len(self.coeffs),
                other.leading_ord + len(other.coeffs)) - lo
        out = [InfSeries.zero(self.fq)] * n
        for i, c in enumerate(self.coeffs):
            out[self.leading_ord - lo + i] = c
        for i, c in enumerate(other.coeffs):
            j = other.leading_ord - lo + i
            out[j] = out[j] + c
        return LocalExpansion(self.fq, lo, out, prec)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return LocalExpansion(self.fq, self.leading_ord,
                              [-c for c in self.coeffs], self.prec)

    def __mul__(self, other):
        if not isinstance(other, LocalExpansion):
            return NotImplemented
        prec = min(self.prec + other.leading_ord, other.prec + self.leading_ord)
        if self.is_zero() or other.is_zero():
            return LocalExpansion.zero(self.fq, prec)
        out = [InfSeries.zero(self.fq)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return LocalExpansion(self.fq, self.leading_ord + other.leading_ord,
                              out, prec)

    def scale(self, s: InfSeries) -> "LocalExpansion":
        return LocalExpansion(self.fq, self.leading_ord,
                              [c * s for c in self.coeffs], self.prec)

    def shift(self, k: int) -> "LocalExpansion":
        return LocalExpansion(self.fq, self.leading_ord + k, self.coeffs,
                              self.prec + k)

    def inverse(self) -> "LocalExpansion":
        if self.is_zero():
            raise ZeroDivisionError("inverse of an expansion that is zero to precision")
        if self.prec >= EXACT // 2:
            raise PrecisionError("truncate an exact expansion before inverting it")
        a = list(self.coeffs)
        n = self.prec - self.leading_ord
        a += [InfSeries.zero(self.fq)] * (n - len(a))
        b0 = a[0].inverse()
        out = [b0]
        for k in range(1, n):
            s = InfSeries.zero(self.fq)
            for j in range(1, k + 1):
                if not a[j].is_zero():
                    s = s + a[j] * out[k - j]
            out.append(-(b0 * s))
        return LocalExpansion(self.fq, -self.leading_ord, out,
                              self.prec - 2 * self.leading_ord)

    def __truediv__(self, other):
        if not isinstance(other, LocalExpansion):
            return NotImplemented
        return self * other.inverse()

    def pow_int(self, e: int) -> "LocalExpansion":
        if e < 0:
            return self.inverse().pow_int(-e)
        out = LocalExpansion.from_scalar(InfSeries.one(self.fq))
        b = self
        while e:
            if e & 1:
                out = out * b
            b = b * b if e > 1 else b
            e >>= 1
        return out

    def truncate(self, prec: int) -> "LocalExpansion":
        if prec >= self.prec:
            return self
        return LocalExpansion(self.fq, self.leading_ord, self.coeffs, prec)

    def map_coeffs(self, fn) -> "LocalExpansion":
        return LocalExpansion(self.fq, self.leading_ord,
                              [fn(c) for c in self.coeffs], self.prec)

    def retag(self, tag: int) -> "LocalExpansion":
        return self.map_coeffs(lambda c: c.retag(tag))

    # -- comparison ----------------------------------------------------------

    def agrees_with(self, other: "LocalExpansion",
                    min_u_coeffs: int | None = None) -> bool:
        """Coefficientwise agreement over the common (s, u) window."""
        lo = min(self.leading_ord, other.leading_ord)
        hi = min(self.prec, other.prec)
        return all(self.coeff(k).agrees_with(other.coeff(k), min_u_coeffs)
                   for k in range(lo, hi))

    def __eq__(self, other):
        if not isinstance(other, LocalExpansion):
            return NotImplemented
        return (self.leading_ord == other.leading_ord and self.prec == other.prec
                and self.coeffs == other.coeffs)

    def __repr__(self):
        if self.is_zero():
            return f"O(s^{self.prec})"
        inner = ", ".join(f"s^{self.leading_ord + i}: {c!r}"
                          for i, c in enumerate(self.coeffs) if not c.is_zero())
        return f"LocalExpansion({inner}, O(s^{self.prec}))"


def embed_expansion(kl: KLaurent, policy: TruncationPolicy) -> LocalExpansion:
    """Carry an exact-coefficient expansion at a point into series form."""
    return LocalExpansion(kl.ring.fq, kl.val,
                          [embed(c, policy) for c in kl.cs], kl.prec)
