"""Exact arithmetic primitives: F_q, dense univariate polynomials, matrices.

Elements of F_q = F_{p^r} are coordinate vectors over F_p in the power basis
of a monic irreducible modulus.  Polynomials keep their coefficients in a
single (length, r) int64 numpy array so that ring operations reduce to
integer convolutions mod p; this is what makes the high-degree exponential
coefficient work tractable.  Matrices are generic over any coefficient type
implementing +, -, *.
"""

from __future__ import annotations

import numpy as np

from .errors import AlgebraError, InexactRootError


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# --- F_p[x] helpers on plain int lists, used only to validate the modulus ---

def _pp_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pp_mulmod(a, b, m, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    _pp_trim(out)
    # reduce mod m (monic)
    dm = len(m) - 1
    while len(out) - 1 >= dm:
        c = out[-1]
        k = len(out) - 1 - dm
        for j in range(dm + 1):
            out[k + j] = (out[k + j] - c * m[j]) % p
        _pp_trim(out)
    return out


def _pp_powmod(a, e, m, p):
    result = [1]
    base = a[:]
    while e:
        if e & 1:
            result = _pp_mulmod(result, base, m, p)
        base = _pp_mulmod(base, base, m, p)
        e >>= 1
    return result


def _pp_gcd(a, b, p):
    a, b = a[:], b[:]
    while b:
        # a mod b
        db = len(b) - 1
        inv = pow(b[-1], p - 2, p)
        while len(a) - 1 >= db and a:
            c = (a[-1] * inv) % p
            k = len(a) - 1 - db
            for j in range(db + 1):
                a[k + j] = (a[k + j] - c * b[j]) % p
            _pp_trim(a)
        a, b = b, a
    return a


class Fq:
    """The finite field F_{p^r}; elements are r-coordinate vectors over F_p."""

    def __init__(self, p: int, r: int = 1, modulus=None):
        if not _is_prime(p):
            raise AlgebraError(f"p = {p} is not prime")
        if r < 1:
            raise AlgebraError(f"r = {r} must be positive")
        self.p = p
        self.r = r
        self.q = p**r
        if r == 1:
            self.modulus = (0, 1)
        else:
            if modulus is None:
                raise AlgebraError("an extension field needs an explicit modulus")
            mod = tuple(int(c) % p for c in modulus)
            if len(mod) != r + 1 or mod[-1] != 1:
                raise AlgebraError("modulus must be monic of degree r")
            self._check_irreducible(list(mod))
            self.modulus = mod
        # x^m mod modulus for m = 0 .. 2r-2, as rows of an F_p matrix
        red = np.zeros((2 * self.r - 1, self.r), dtype=np.int64)
        cur = [1]
        for m_ in range(2 * self.r - 1):
            for k, c in enumerate(cur):
                red[m_, k] = c
            cur = _pp_mulmod(cur, [0, 1], list(self.modulus), p) if r > 1 else [0]
        self._red = red
        self.zero = FqElem(self, (0,) * r)
        self.one = FqElem(self, (1,) + (0,) * (r - 1))

    def _check_irreducible(self, m):
        p, r = self.p, self.r
        x = [0, 1]
        if _pp_powmod(x, p**r, m, p) != x:
            raise AlgebraError("modulus is not irreducible")
        for d in {d for d in range(2, r + 1) if r % d == 0 and _is_prime(d)}:
            g = _pp_gcd(_pp_trim([(a - b) % p for a, b in
                                  zip(_pp_powmod(x, p ** (r // d), m, p) + [0, 0],
                                      x + [0, 0])]), m, p)
            if len(g) > 1:
                raise AlgebraError("modulus is not irreducible")

    # coordinate-tuple arithmetic; FqElem wraps these
    def _add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def _sub(self, a, b):
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def _neg(self, a):
        return tuple((-x) % self.p for x in a)

    def _mul(self, a, b):
        if self.r == 1:
            return ((a[0] * b[0]) % self.p,)
        raw = [0] * (2 * self.r - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    raw[i + j] += x * y
        out = [0] * self.r
        for m_, c in enumerate(raw):
            if c:
                row = self._red[m_]
                for k in range(self.r):
                    out[k] += c * int(row[k])
        return tuple(v % self.p for v in out)

    def _pow(self, a, e):
        if e < 0:
            return self._pow(self._inv(a), -e)
        result = self.one.coords
        base = a
        while e:
            if e & 1:
                result = self._mul(result, base)
            base = self._mul(base, base)
            e >>= 1
        return result

    def _inv(self, a):
        if not any(a):
            raise ZeroDivisionError("inverse of zero in F_q")
        return self._pow(a, self.q - 2)

    def elem(self, v) -> "FqElem":
        """Coerce an int (image of F_p) or a length-r coordinate sequence."""
        if isinstance(v, FqElem):
            if v.fq is not self:
                raise AlgebraError("element from a different field")
            return v
        if isinstance(v, int):
            return FqElem(self, (v % self.p,) + (0,) * (self.r - 1))
        coords = tuple(int(c) % self.p for c in v)
        if len(coords) != self.r:
            raise AlgebraError(f"need {self.r} coordinates, got {len(coords)}")
        return FqElem(self, coords)

    def elements(self):
        """All q elements, in lexicographic coordinate order."""
        def rec(k):
            if k == 0:
                yield ()
                return
            for rest in rec(k - 1):
                for c in range(self.p):
                    yield rest + (c,)
        for coords in rec(self.r):
            yield FqElem(self, coords)

    def generator(self) -> "FqElem":
        """The power-basis generator x (equals 1 when r = 1)."""
        if self.r == 1:
            return self.one
        return FqElem(self, (0, 1) + (0,) * (self.r - 2))

    # scalar multiplication matrix: row i = coords of basis_i * s
    def _scalar_matrix(self, coords):
        rows = []
        basis = self.one.coords
        for i in range(self.r):
            b = tuple(1 if k == i else 0 for k in range(self.r))
            rows.append(self._mul(b, coords))
        return np.array(rows, dtype=np.int64)

    def __eq__(self, other):
        return (isinstance(other, Fq) and self.p == other.p
                and self.r == other.r and self.modulus == other.modulus)

    def __hash__(self):
        return hash((self.p, self.r, self.modulus))

    def __repr__(self):
        if self.r == 1:
            return f"Fq(p={self.p})"
        return f"Fq(p={self.p}, r={self.r}, modulus={self.modulus})"


class FqElem:
    """An element of F_q, immutable."""

    __slots__ = ("fq", "coords")

    def __init__(self, fq: Fq, coords: tuple):
        object.__setattr__(self, "fq", fq)
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, *a):
        raise AttributeError("FqElem is immutable")

    def __add__(self, other):
        return FqElem(self.fq, self.fq._add(self.coords, self.fq.elem(other).coords))

    __radd__ = __add__

    def __sub__(self, other):
        return FqElem(self.fq, self.fq._sub(self.coords, self.fq.elem(other).coords))

    def __rsub__(self, other):
        return FqElem(self.fq, self.fq._sub(self.fq.elem(other).coords, self.coords))

    def __neg__(self):
        return FqElem(self.fq, self.fq._neg(self.coords))

    def __mul__(self, other):
        return FqElem(self.fq, self.fq._mul(self.coords, self.fq.elem(other).coords))

    __rmul__ = __mul__

    def __pow__(self, e):
        return FqElem(self.fq, self.fq._pow(self.coords, e))

    def __truediv__(self, other):
        return FqElem(self.fq, self.fq._mul(
            self.coords, self.fq._inv(self.fq.elem(other).coords)))

    def inverse(self):
        return FqElem(self.fq, self.fq._inv(self.coords))

    def frobenius(self, k: int = 1):
        """x -> x^(p^k); k may be negative (Frobenius is an automorphism)."""
        k %= self.fq.r
        return self ** (self.fq.p ** k) if k else self

    def pth_root(self):
        return self.frobenius(self.fq.r - 1)

    def is_zero(self):
        return not any(self.coords)

    def __bool__(self):
        return any(self.coords)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.fq.elem(other)
        return isinstance(other, FqElem) and self.coords == other.coords \
            and self.fq == other.fq

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        if self.fq.r == 1:
            return str(self.coords[0])
        return "[" + " ".join(str(c) for c in self.coords) + "]"


class UniPoly:
    """Dense univariate polynomial over F_q, ascending coefficients.

    The coefficient block is a (length, r) int64 array; the zero polynomial
    has length 0.  Instances are never mutated after construction.
    """

    __slots__ = ("fq", "c")

    def __init__(self, fq: Fq, c: np.ndarray):
        self.fq = fq
        self.c = c

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_rows(fq: Fq, arr) -> "UniPoly":
        a = np.asarray(arr, dtype=np.int64) % fq.p
        if a.ndim != 2 or a.shape[1] != fq.r:
            raise AlgebraError("coefficient block must be (length, r)")
        return UniPoly(fq, _trim_rows(a))

    @staticmethod
    def from_elems(fq: Fq, elems) -> "UniPoly":
        rows = [fq.elem(e).coords for e in elems]
        if not rows:
            return UniPoly.zero(fq)
        return UniPoly.from_rows(fq, np.array(rows, dtype=np.int64))

    @staticmethod
    def zero(fq: Fq) -> "UniPoly":
        return UniPoly(fq, np.zeros((0, fq.r), dtype=np.int64))

    @staticmethod
    def one(fq: Fq) -> "UniPoly":
        return UniPoly.from_elems(fq, [fq.one])

    @staticmethod
    def x(fq: Fq) -> "UniPoly":
        return UniPoly.from_elems(fq, [fq.zero, fq.one])

    @staticmethod
    def const(fq: Fq, e) -> "UniPoly":
        return UniPoly.from_elems(fq, [fq.elem(e)])

    # -- basic queries ------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return self.c.shape[0] - 1

    def is_zero(self) -> bool:
        return self.c.shape[0] == 0

    def lead(self) -> FqElem:
        if self.is_zero():
            raise ZeroDivisionError("zero polynomial has no leading coefficient")
        return FqElem(self.fq, tuple(int(v) for v in self.c[-1]))

    def coeff(self, k: int) -> FqElem:
        if 0 <= k < self.c.shape[0]:
            return FqElem(self.fq, tuple(int(v) for v in self.c[k]))
        return self.fq.zero

    def coeffs(self):
        return [self.coeff(k) for k in range(self.c.shape[0])]

    def is_one(self) -> bool:
        return self.degree == 0 and self.coeff(0) == self.fq.one

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        a, b = self.c, other.c
        n = max(a.shape[0], b.shape[0])
        out = np.zeros((n, self.fq.r), dtype=np.int64)
        out[: a.shape[0]] += a
        out[: b.shape[0]] += b
        return UniPoly(self.fq, _trim_rows(out % self.fq.p))

    def __sub__(self, other):
        a, b = self.c, other.c
        n = max(a.shape[0], b.shape[0])
        out = np.zeros((n, self.fq.r), dtype=np.int64)
        out[: a.shape[0]] += a
        out[: b.shape[0]] -= b
        return UniPoly(self.fq, _trim_rows(out % self.fq.p))

    def __neg__(self):
        return UniPoly(self.fq, (-self.c) % self.fq.p)

    def __mul__(self, other):
        if isinstance(other, FqElem):
            return self.scale(other)
        a, b = self.c, other.c
        if a.shape[0] == 0 or b.shape[0] == 0:
            return UniPoly.zero(self.fq)
        return UniPoly(self.fq, _trim_rows(_block_mul(self.fq, a, b)))

    def scale(self, e: FqElem) -> "UniPoly":
        e = self.fq.elem(e)
        if e.is_zero() or self.is_zero():
            return UniPoly.zero(self.fq)
        if self.fq.r == 1:
            return UniPoly(self.fq, (self.c * e.coords[0]) % self.fq.p)
        s = self.fq._scalar_matrix(e.coords)
        return UniPoly(self.fq, _trim_rows((self.c @ s) % self.fq.p))

    def shift(self, k: int) -> "UniPoly":
        """Multiply by x^k (k >= 0)."""
        if k == 0 or self.is_zero():
            return self
        out = np.zeros((self.c.shape[0] + k, self.fq.r), dtype=np.int64)
        out[k:] = self.c
        return UniPoly(self.fq, out)

    def divmod_(self, other: "UniPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        fq = self.fq
        db = other.degree
        if self.degree < db:
            return UniPoly.zero(fq), self
        if fq.r == 1:
            ker = _kernels()
            if ker:
                a = self.c[:, 0].copy()
                quo = ker[0](a, other.c[:, 0], fq.p)
                return UniPoly(fq, _vec_rows(quo)), UniPoly(fq, _vec_rows(a[:db]))
        if fq.r == 1 and (self.degree + 1) * (db + 1) < 8192:
            # plain-int long division beats numpy dispatch at these sizes
            p = fq.p
            a = self.c[:, 0].tolist()
            b = other.c[:, 0].tolist()
            inv = pow(b[-1], p - 2, p)
            quo = [0] * (len(a) - db)
            for k in range(len(a) - 1, db - 1, -1):
                lv = a[k]
                if lv:
                    f = lv * inv % p
                    quo[k - db] = f
                    for j in range(db):
                        a[k - db + j] = (a[k - db + j] - f * b[j]) % p
            return (UniPoly(fq, _rows_from_ints(quo)),
                    UniPoly(fq, _rows_from_ints(a[:db])))
        rem = self.c.copy()
        inv_lc = other.lead().inverse()
        s_inv = fq._scalar_matrix(inv_lc.coords)
        quo = np.zeros((self.degree - db + 1, fq.r), dtype=np.int64)
        bdiv = other.c
        for k in range(self.degree, db - 1, -1):
            leadrow = rem[k]
            if not leadrow.any():
                continue
            f = (leadrow @ s_inv) % fq.p
            quo[k - db] = f
            sf = fq._scalar_matrix(tuple(int(v) for v in f)) if fq.r > 1 else None
            sub = (bdiv * f[0]) % fq.p if fq.r == 1 else (bdiv @ sf) % fq.p
            rem[k - db: k + 1] = (rem[k - db: k + 1] - sub) % fq.p
        return UniPoly(fq, _trim_rows(quo)), UniPoly(fq, _trim_rows(rem[:db] if db else rem[:0]))

    def __mod__(self, other):
        return self.divmod_(other)[1]

    def __floordiv__(self, other):
        return self.divmod_(other)[0]

    def exact_div(self, other: "UniPoly") -> "UniPoly":
        q, r = self.divmod_(other)
        if not r.is_zero():
            raise AlgebraError("division is not exact")
        return q

    def gcd(self, other: "UniPoly") -> "UniPoly":
        fq = self.fq
        if fq.r == 1 and not self.is_zero() and not other.is_zero():
            ker = _kernels()
            if ker:
                g = ker[1](self.c[:, 0].copy(), other.c[:, 0].copy(), fq.p)
                return UniPoly(fq, g.reshape(-1, 1))
        if (fq.r == 1 and not self.is_zero() and not other.is_zero()
                and self.c.shape[0] + other.c.shape[0] < 8192):
            p = fq.p
            a = self.c[:, 0].tolist()
            b = other.c[:, 0].tolist()
            while b:
                if len(a) < len(b):
                    a, b = b, a
                    continue
                db = len(b) - 1
                inv = pow(b[-1], p - 2, p)
                for k in range(len(a) - 1, db - 1, -1):
                    lv = a[k]
                    if lv:
                        f = lv * inv % p
                        for j in range(db):
                            a[k - db + j] = (a[k - db + j] - f * b[j]) % p
                del a[db:]
                while a and not a[-1]:
                    a.pop()
                a, b = b, a
            inv = pow(a[-1], p - 2, p)
            return UniPoly(fq, _rows_from_ints([v * inv % p for v in a]))
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        if a.is_zero():
            return a
        return a.monic()

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return self.scale(self.lead().inverse())

    def pow_int(self, e: int) -> "UniPoly":
        if e < 0:
            raise AlgebraError("negative polynomial power")
        result = UniPoly.one(self.fq)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def eval_elem(self, x: FqElem) -> FqElem:
        acc = self.fq.zero
        for k in range(self.degree, -1, -1):
            acc = acc * x + self.coeff(k)
        return acc

    def derivative(self) -> "UniPoly":
        if self.degree < 1:
            return UniPoly.zero(self.fq)
        rows = [(self.c[k] * k) % self.fq.p for k in range(1, self.c.shape[0])]
        return UniPoly(self.fq, _trim_rows(np.array(rows, dtype=np.int64)))

    # -- Frobenius twisting ---------------------------------------------------

    def twist(self, k: int = 1) -> "UniPoly":
        """x -> x^(q^k) applied to the variable; F_q coefficients are fixed.

        For a polynomial with F_q coefficients this is the k-fold q-power map
        in characteristic p, so it just rescales exponents by q^k.  k >= 0.
        """
        if k < 0:
            raise AlgebraError("negative twist on UniPoly; use pth_root")
        if k == 0 or self.is_zero():
            return self
        step = self.fq.q**k
        out = np.zeros(((self.c.shape[0] - 1) * step + 1, self.fq.r), dtype=np.int64)
        out[:: step] = self.c
        return UniPoly(self.fq, out)

    def pth_root(self) -> "UniPoly":
        """Inverse of the p-power map; exponents must be multiples of p."""
        if self.is_zero():
            return self
        p = self.fq.p
        if (self.c.shape[0] - 1) % p != 0:
            raise InexactRootError("degree not divisible by p")
        idx = np.arange(self.c.shape[0])
        if self.c[idx % p != 0].any():
            raise InexactRootError("polynomial is not a p-th power")
        rows = self.c[::p]
        if self.fq.r > 1:
            e = self.fq.p ** (self.fq.r - 1)
            rows = np.array([self.fq._pow(tuple(int(v) for v in row), e)
                             for row in rows], dtype=np.int64)
        return UniPoly(self.fq, _trim_rows(rows.copy()))

    def qth_root(self) -> "UniPoly":
        out = self
        for _ in range(self.fq.r):
            out = out.pth_root()
        return out

    # -- comparisons -----------------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, UniPoly) and self.fq == other.fq
                and self.c.shape == other.c.shape and bool((self.c == other.c).all()))

    def __hash__(self):
        return hash((self.c.shape[0], self.c.tobytes()))

    def __repr__(self):
        return f"UniPoly({self.text()})"

    def text(self, var: str = "x") -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            e = self.coeff(k)
            if e.is_zero():
                continue
            cs = repr(e)
            if k == 0:
                parts.append(cs)
            else:
                xk = var if k == 1 else f"{var}^{k}"
                parts.append(xk if cs == "1" else f"{cs}*{xk}")
        return " + ".join(parts)


# The identity suites spend nearly all their time in gcd/divmod chains on
# plain F_p coefficient vectors, so those two inner loops get optional JIT
# treatment.  The functions below are written to be numba-compilable as-is;
# without numba the pure-python paths in UniPoly take over.

def _jit_inv(x, p):
    inv = 1
    base = x % p
    e = p - 2
    while e:
        if e & 1:
            inv = inv * base % p
        base = base * base % p
        e >>= 1
    return inv


def _jit_divmod(a, b, p):
    """In-place remainder of a by b (both ascending int64); returns the
    quotient vector, leaving the remainder in a[:len(b)-1]."""
    db = b.shape[0] - 1
    inv = _jit_inv(b[db], p)
    quo = np.zeros(a.shape[0] - db, dtype=np.int64)
    for k in range(a.shape[0] - 1, db - 1, -1):
        lv = a[k]
        if lv:
            f = lv * inv % p
            quo[k - db] = f
            for j in range(db):
                a[k - db + j] = (a[k - db + j] - f * b[j]) % p
    return quo


def _jit_gcd(a, b, p):
    """Monic gcd of two nonzero ascending int64 vectors; mutates both."""
    la, lb = a.shape[0], b.shape[0]
    while lb > 0:
        if la < lb:
            a, b, la, lb = b, a, lb, la
            continue
        db = lb - 1
        inv = _jit_inv(b[db], p)
        for k in range(la - 1, db - 1, -1):
            lv = a[k]
            if lv:
                f = lv * inv % p
                for j in range(db):
                    a[k - db + j] = (a[k - db + j] - f * b[j]) % p
        nl = db
        while nl > 0 and a[nl - 1] == 0:
            nl -= 1
        a, b, la, lb = b, a[:nl], lb, nl
    g = a[:la].copy()
    inv = _jit_inv(g[la - 1], p)
    for i in range(la):
        g[i] = g[i] * inv % p
    return g


_KERNELS = None


def _kernels():
    """(divmod, gcd) JIT dispatchers, or False when numba is unavailable.
    Import and compilation are deferred to the first polynomial division so
    module import stays light."""
    global _KERNELS, _jit_inv, _jit_divmod, _jit_gcd
    if _KERNELS is None:
        try:
            from numba import njit
        except Exception:
            _KERNELS = False
        else:
            if not hasattr(_jit_gcd, "py_func"):
                jit = njit(cache=True)
                _jit_inv = jit(_jit_inv)
                _jit_divmod = jit(_jit_divmod)
                _jit_gcd = jit(_jit_gcd)
            _KERNELS = (_jit_divmod, _jit_gcd)
    return _KERNELS


def _vec_rows(v: np.ndarray) -> np.ndarray:
    nz = np.nonzero(v)[0]
    n = int(nz[-1]) + 1 if nz.size else 0
    return v[:n].reshape(-1, 1)


def _trim_rows(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    while n > 0 and not a[n - 1].any():
        n -= 1
    return a[:n]


def _rows_from_ints(vals: list) -> np.ndarray:
    n = len(vals)
    while n and not vals[n - 1]:
        n -= 1
    return np.array(vals[:n], dtype=np.int64).reshape(-1, 1)


def _conv_fp(p: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Convolution of two F_p coefficient vectors.

    Large products go through a real FFT in float64, which is exact here:
    every convolution coefficient is an integer below (p-1)^2 * min(len),
    and for the sizes this library ever sees the accumulated FFT roundoff
    stays orders of magnitude under one half, so rounding recovers the
    integer.  A conservative headroom check guards the assumption; anything
    past it (or small products, where direct wins) uses plain convolution.
    """
    la, lb = a.shape[0], b.shape[0]
    n = la + lb - 1
    if min(la, lb) >= 128 and n >= 2048:
        size = 1 << (n - 1).bit_length()
        if (p - 1) * (p - 1) * min(la, lb) * size < (1 << 50):
            fa = np.fft.rfft(a.astype(np.float64), size)
            fb = np.fft.rfft(b.astype(np.float64), size)
            cc = np.fft.irfft(fa * fb, size)[:n]
            return np.rint(cc).astype(np.int64) % p
    return np.convolve(a, b) % p


def _block_mul(fq: Fq, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficient-block product: per-coordinate convolutions, then basis
    reduction by the precomputed x^m table.  Exact in int64: entries are
    bounded by p^2 * min(len) * r^2 which stays far below 2^63 here."""
    la, lb, r = a.shape[0], b.shape[0], fq.r
    if r == 1:
        return _conv_fp(fq.p, a[:, 0], b[:, 0]).reshape(-1, 1)
    raw = np.zeros((la + lb - 1, 2 * r - 1), dtype=np.int64)
    for i in range(r):
        ai = a[:, i]
        if not ai.any():
            continue
        for j in range(r):
            bj = b[:, j]
            if bj.any():
                raw[:, i + j] += np.convolve(ai, bj)
    return (raw % fq.p) @ fq._red % fq.p


class DenseMatrix:
    """Dense matrix over any coefficient type with +, -, *; row-major."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: list):
        if len(data) != rows * cols:
            raise AlgebraError("matrix data length mismatch")
        self.rows = rows
        self.cols = cols
        self.data = list(data)

    @staticmethod
    def from_rows(rows_of_entries) -> "DenseMatrix":
        r = len(rows_of_entries)
        c = len(rows_of_entries[0]) if r else 0
        flat = []
        for row in rows_of_entries:
            if len(row) != c:
                raise AlgebraError("ragged matrix rows")
            flat.extend(row)
        return DenseMatrix(r, c, flat)

    @staticmethod
    def identity(n: int, one, zero) -> "DenseMatrix":
        return DenseMatrix(n, n, [one if i == j else zero
                                  for i in range(n) for j in range(n)])

    @staticmethod
    def zeros(rows: int, cols: int, zero) -> "DenseMatrix":
        return DenseMatrix(rows, cols, [zero] * (rows * cols))

    def entry(self, i: int, j: int):
        return self.data[i * self.cols + j]

    def with_entry(self, i: int, j: int, v) -> "DenseMatrix":
        d = list(self.data)
        d[i * self.cols + j] = v
        return DenseMatrix(self.rows, self.cols, d)

    def row(self, i: int):
        return self.data[i * self.cols: (i + 1) * self.cols]

    def col(self, j: int):
        return [self.entry(i, j) for i in range(self.rows)]

    def __add__(self, other):
        self._shape_check(other)
        return DenseMatrix(self.rows, self.cols,
                           [a + b for a, b in zip(self.data, other.data)])

    def __sub__(self, other):
        self._shape_check(other)
        return DenseMatrix(self.rows, self.cols,
                           [a - b for a, b in zip(self.data, other.data)])

    def __neg__(self):
        return DenseMatrix(self.rows, self.cols, [-a for a in self.data])

    def __mul__(self, other):
        if isinstance(other, DenseMatrix):
            if self.cols != other.rows:
                raise AlgebraError("matrix product shape mismatch")
            out = []
            for i in range(self.rows):
                ri = self.row(i)
                for j in range(other.cols):
                    acc = None
                    for k in range(self.cols):
                        term = ri[k] * other.entry(k, j)
                        acc = term if acc is None else acc + term
                    out.append(acc)
            return DenseMatrix(self.rows, other.cols, out)
        return self.scale(other)

    def scale(self, c) -> "DenseMatrix":
        return DenseMatrix(self.rows, self.cols, [a * c for a in self.data])

    def apply(self, vec: list) -> list:
        if len(vec) != self.cols:
            raise AlgebraError("matrix-vector shape mismatch")
        out = []
        for i in range(self.rows):
            acc = None
            for k, v in zip(self.row(i), vec):
                term = k * v
                acc = term if acc is None else acc + term
            out.append(acc)
        return out

    def map_entries(self, fn) -> "DenseMatrix":
        return DenseMatrix(self.rows, self.cols, [fn(a) for a in self.data])

    def is_zero(self) -> bool:
        return all(not _nonzero(a) for a in self.data)

    def _shape_check(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise AlgebraError("matrix shape mismatch")

    def __eq__(self, other):
        return (isinstance(other, DenseMatrix) and self.rows == other.rows
                and self.cols == other.cols
                and all(a == b for a, b in zip(self.data, other.data)))

    def __repr__(self):
        rows = []
        for i in range(self.rows):
            rows.append("[" + ", ".join(repr(e) for e in self.row(i)) + "]")
        return "[" + "; ".join(rows) + "]"


def _nonzero(a) -> bool:
    z = getattr(a, "is_zero", None)
    if z is not None:
        return not z()
    return bool(a)


def structured_matrix(n: int, kind: str, entries=None, *, index: int = 1,
                      zero, one) -> DenseMatrix:
    """Banded n x n building blocks for the module matrices.

    kind "N": the index-th superdiagonal band filled with `entries`
    (length n - index; all ones when entries is None).  kind "E": the
    (n - index)-th subdiagonal band of length index, so "E" with index n is
    the identity.  Bands beyond the matrix are zero.
    """
    m = DenseMatrix.zeros(n, n, zero)
    if kind == "N":
        k = index
        if not 0 <= k:
            raise AlgebraError("N-band index must be >= 0")
        vals = entries if entries is not None else [one] * max(n - k, 0)
        if len(vals) != max(n - k, 0):
            raise AlgebraError("N-band entry count mismatch")
        for i, v in enumerate(vals):
            m = m.with_entry(i, i + k, v)
        return m
    if kind == "E":
        k = index
        if not 1 <= k <= n:
            raise AlgebraError("E-band index must lie in 1..n")
        vals = entries if entries is not None else [one] * k
        if len(vals) != k:
            raise AlgebraError("E-band entry count mismatch")
        for i, v in enumerate(vals):
            m = m.with_entry(n - k + i, i, v)
        return m
    raise AlgebraError(f"unknown structured matrix kind {kind!r}")
