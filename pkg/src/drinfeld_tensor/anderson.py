"""Module matrices for the tensor power, exponential/logarithm coefficient
recursions, and the exact operator identities relating them to the basis.

The matrices are assembled from the layer decompositions of t*h_i and
y*h_i (the quotient-map route), which is unambiguous for every dimension;
the closed banded displays are then recomputed independently and compared.
Everything in this file is exact K- or K(t,y)-arithmetic: no series, no
truncation.
"""

import random
from dataclasses import dataclass

from .errors import AlgebraError, IdentityError, InputError
from .fields import DenseMatrix, structured_matrix
from .curve import BaseElement, CurveFunction, _reduce_base, _slope
from .shtuka import (MotiveBasis, StructureCoeffs, _random_poly_multiple,
                     random_module_element, random_v_section, sigma_decompose,
                     verify_a_routes, verify_basis_duality,
                     verify_coefficient_duality)


def mat_twist(m: DenseMatrix, k: int) -> DenseMatrix:
    return m.map_entries(lambda e: e.twist(k)) if k else m


class TwistedOperator:
    """Polynomial in the q-power twist tau with square matrix coefficients;
    composition uses tau M = M^(1) tau.  Entries may be K elements or curve
    functions (tau fixes t and y)."""

    __slots__ = ("dim", "zero", "one", "mats")

    def __init__(self, dim: int, zero, one, mats):
        while mats and mats[-1].is_zero():
            mats = mats[:-1]
        if not mats:
            mats = [DenseMatrix.zeros(dim, dim, zero)]
        for m in mats:
            if m.rows != dim or m.cols != dim:
                raise AlgebraError("operator coefficient of wrong shape")
        self.dim = dim
        self.zero = zero
        self.one = one
        self.mats = list(mats)

    @staticmethod
    def constant(zero, one, mat: DenseMatrix) -> "TwistedOperator":
        return TwistedOperator(mat.rows, zero, one, [mat])

    @staticmethod
    def identity(dim: int, zero, one) -> "TwistedOperator":
        return TwistedOperator(dim, zero, one,
                               [DenseMatrix.identity(dim, one, zero)])

    @property
    def degree(self) -> int:
        return len(self.mats) - 1

    def coeff(self, k: int) -> DenseMatrix:
        if 0 <= k < len(self.mats):
            return self.mats[k]
        return DenseMatrix.zeros(self.dim, self.dim, self.zero)

    def __add__(self, other: "TwistedOperator") -> "TwistedOperator":
        top = max(len(self.mats), len(other.mats))
        return TwistedOperator(self.dim, self.zero, self.one,
                               [self.coeff(k) + other.coeff(k)
                                for k in range(top)])

    def __sub__(self, other: "TwistedOperator") -> "TwistedOperator":
        top = max(len(self.mats), len(other.mats))
        return TwistedOperator(self.dim, self.zero, self.one,
                               [self.coeff(k) - other.coeff(k)
                                for k in range(top)])

    def __neg__(self) -> "TwistedOperator":
        return TwistedOperator(self.dim, self.zero, self.one,
                               [-m for m in self.mats])

    def __mul__(self, other: "TwistedOperator") -> "TwistedOperator":
        out = [DenseMatrix.zeros(self.dim, self.dim, self.zero)
               for _ in range(len(self.mats) + len(other.mats) - 1)]
        for i, a in enumerate(self.mats):
            if a.is_zero():
                continue
            for j, b in enumerate(other.mats):
                if b.is_zero():
                    continue
                out[i + j] = out[i + j] + a * mat_twist(b, i)
        return TwistedOperator(self.dim, self.zero, self.one, out)

    def __pow__(self, e: int) -> "TwistedOperator":
        if e < 0:
            raise InputError("negative operator powers are not defined")
        result = TwistedOperator.identity(self.dim, self.zero, self.one)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def scale(self, c) -> "TwistedOperator":
        return TwistedOperator(self.dim, self.zero, self.one,
                               [m.map_entries(lambda x: c * x)
                                for m in self.mats])

    def apply(self, vec):
        """Sum_k M_k vec^(k), the semilinear action on a coordinate vector."""
        if len(vec) != self.dim:
            raise AlgebraError("operator-vector shape mismatch")
        out = [self.zero] * self.dim
        for k, m in enumerate(self.mats):
            tv = [v.twist(k) for v in vec] if k else list(vec)
            mv = m.apply(tv)
            out = [a + b for a, b in zip(out, mv)]
        return out

    def __eq__(self, other):
        if not isinstance(other, TwistedOperator) or self.dim != other.dim:
            return False
        top = max(len(self.mats), len(other.mats))
        return all(self.coeff(k) == other.coeff(k) for k in range(top))

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.mats)

    def __repr__(self):
        parts = []
        for k, m in enumerate(self.mats):
            if m.is_zero() and len(self.mats) > 1:
                continue
            parts.append(f"{m!r}" if k == 0 else f"{m!r} tau^{k}")
        return " + ".join(parts)


@dataclass(frozen=True)
class AndersonModule:
    """The n-dimensional module structure: rho_t and rho_y as twisted
    operators over K, plus the structure coefficients they came from."""

    basis: MotiveBasis
    coeffs: StructureCoeffs
    rho_t: TwistedOperator
    rho_y: TwistedOperator

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def base(self):
        return self.basis.base

    @property
    def dtheta(self) -> DenseMatrix:
        return self.rho_t.coeff(0)

    @property
    def etheta(self) -> DenseMatrix:
        return self.rho_t.coeff(1)

    @property
    def deta(self) -> DenseMatrix:
        return self.rho_y.coeff(0)

    @property
    def eeta(self) -> DenseMatrix:
        return self.rho_y.coeff(1)


def _assemble(basis: MotiveBasis, multiplier: CurveFunction) -> TwistedOperator:
    """Operator of multiplication by t or y, read off column by column: the
    image of the (n+1-i)-th unit vector is the collapsed layer data of
    multiplier * h_i."""
    n = basis.n
    base = basis.base
    decs = [sigma_decompose(basis, multiplier * basis.h[i - 1])
            for i in range(1, n + 1)]
    depth = max(dec.depth for dec in decs)
    mats = []
    for j in range(depth):
        m = DenseMatrix.zeros(n, n, base.zero)
        for i, dec in enumerate(decs, start=1):
            col = n - i
            for r in range(n):
                m = m.with_entry(r, col, dec.d(n - r, j))
        mats.append(m)
    return TwistedOperator(n, base.zero, base.one, mats)


def _check_shape(m: DenseMatrix, diag: BaseElement, label: str) -> None:
    for i in range(m.rows):
        for j in range(m.cols):
            e = m.entry(i, j)
            if i == j and not e == diag:
                raise IdentityError(f"{label} diagonal entry ({i},{j}) wrong")
            if i > j and not e.is_zero():
                raise IdentityError(f"{label} is not upper triangular")


def theta_display(basis: MotiveBasis, co: StructureCoeffs) -> list[DenseMatrix]:
    """Expected tau coefficients of rho_t from the banded closed form.  For
    n = 1 the bands overflow into a tau^2 term."""
    n = basis.n
    base = basis.base
    z, o = base.zero, base.one
    diag = structured_matrix(n, "N", [base.theta] * n, index=0, zero=z, one=o)
    if n == 1:
        return [diag,
                structured_matrix(1, "E", [co.a[0]], index=1, zero=z, one=o),
                structured_matrix(1, "E", [o], index=1, zero=z, one=o)]
    a0 = diag + structured_matrix(n, "N", list(co.a[:n - 1]), index=1,
                                  zero=z, one=o)
    if n >= 3:
        a0 = a0 + structured_matrix(n, "N", index=2, zero=z, one=o)
    a1 = structured_matrix(n, "E", [co.a[n - 1]], index=1, zero=z, one=o) \
        + structured_matrix(n, "E", index=2, zero=z, one=o)
    return [a0, a1]


def eta_display(basis: MotiveBasis, co: StructureCoeffs) -> list[DenseMatrix]:
    """Expected tau coefficients of rho_y.  The bands shift by three, so the
    small dimensions pick up overflow terms: tau^2 for n = 2, tau^2 and
    tau^3 for n = 1."""
    n = basis.n
    base = basis.base
    z, o = base.zero, base.one
    diag = structured_matrix(n, "N", [base.eta] * n, index=0, zero=z, one=o)
    if n == 1:
        return [diag,
                structured_matrix(1, "E", [co.yc[0]], index=1, zero=z, one=o),
                structured_matrix(1, "E", [co.zc[0]], index=1, zero=z, one=o),
                structured_matrix(1, "E", [o], index=1, zero=z, one=o)]
    if n == 2:
        a0 = diag + structured_matrix(2, "N", [co.yc[0]], index=1, zero=z, one=o)
        a1 = DenseMatrix.from_rows([[co.zc[0], o], [co.yc[1], co.zc[1]]])
        a2 = structured_matrix(2, "E", index=1, entries=[o], zero=z, one=o)
        return [a0, a1, a2]
    a0 = diag + structured_matrix(n, "N", list(co.yc[:n - 1]), index=1,
                                  zero=z, one=o) \
        + structured_matrix(n, "N", list(co.zc[:n - 2]), index=2, zero=z, one=o)
    if n >= 4:
        a0 = a0 + structured_matrix(n, "N", index=3, zero=z, one=o)
    a1 = structured_matrix(n, "E", [co.yc[n - 1]], index=1, zero=z, one=o) \
        + structured_matrix(n, "E", [co.zc[n - 2], co.zc[n - 1]], index=2,
                            zero=z, one=o) \
        + structured_matrix(n, "E", index=3, zero=z, one=o)
    return [a0, a1]


def build_module(basis: MotiveBasis, co: StructureCoeffs) -> AndersonModule:
    base = basis.base
    rho_t = _assemble(basis, basis.ff.t)
    rho_y = _assemble(basis, basis.ff.y)
    _check_shape(rho_t.coeff(0), base.theta, "d[theta]")
    _check_shape(rho_y.coeff(0), base.eta, "d[eta]")
    for op, mk in ((rho_t, theta_display(basis, co)),
                   (rho_y, eta_display(basis, co))):
        if op.degree + 1 != len(mk):
            raise IdentityError("module operator has unexpected tau degree")
        for k, want in enumerate(mk):
            if not op.coeff(k) == want:
                raise IdentityError(
                    f"assembled tau^{k} coefficient disagrees with the "
                    f"banded display")
    return AndersonModule(basis, co, rho_t, rho_y)


def lift_operator(op: TwistedOperator, ff) -> TwistedOperator:
    """Entries pushed from K into K(t,y)."""
    return TwistedOperator(op.dim, ff.zero, ff.one,
                           [m.map_entries(ff.lift) for m in op.mats])


def rho_a(mod: AndersonModule, a: CurveFunction) -> TwistedOperator:
    """rho at an arbitrary element of the coefficient ring, given as a
    polynomial in t and y with F_q coefficients."""
    if not a.b.is_one():
        raise InputError("coefficient ring elements must be polynomial")
    zero, one = mod.base.zero, mod.base.one
    n = mod.n
    out = TwistedOperator(n, zero, one, [DenseMatrix.zeros(n, n, zero)])
    for poly, with_y in ((a.a0, False), (a.a1, True)):
        if poly.is_zero():
            continue
        part = TwistedOperator(n, zero, one, [DenseMatrix.zeros(n, n, zero)])
        for k in range(poly.degree, -1, -1):
            c = poly.coeff(k)
            if not (c.is_zero() or c.is_constant()):
                raise InputError("coefficients must come from the constant field")
            part = part * mod.rho_t
            if not c.is_zero():
                cmat = DenseMatrix.identity(n, one, zero).scale(c)
                part = part + TwistedOperator.constant(zero, one, cmat)
        if with_y:
            part = part * mod.rho_y
        out = out + part
    return out


def iota(mod: AndersonModule, a: CurveFunction) -> BaseElement:
    """The image of a coefficient-ring element under t -> theta, y -> eta."""
    if not a.b.is_one():
        raise InputError("coefficient ring elements must be polynomial")
    th, et = mod.base.theta, mod.base.eta
    return a.a0.eval_elem(th) + a.a1.eval_elem(th) * et


# -- exponential / logarithm coefficients -----------------------------------------

# The coefficient recursions spend nearly all their time multiplying large
# K elements, and canonical reduction (a gcd per operation) is what makes
# that slow.  Fractions here are kept unreduced: products and sums build up
# composite denominators, equality goes through cross-multiplication, and a
# single reduction happens only on the elements that are stored.


def _raw_mul(a: BaseElement, b: BaseElement) -> BaseElement:
    f = a.field
    cross = a.n1 * b.n1
    return BaseElement(f, a.n0 * b.n0 + cross * f.rpoly,
                       a.n0 * b.n1 + a.n1 * b.n0 - cross * f.spoly,
                       a.den * b.den)


def _raw_add(a: BaseElement, b: BaseElement) -> BaseElement:
    if a.den == b.den:
        return BaseElement(a.field, a.n0 + b.n0, a.n1 + b.n1, a.den)
    return BaseElement(a.field, a.n0 * b.den + b.n0 * a.den,
                       a.n1 * b.den + b.n1 * a.den, a.den * b.den)


def _raw_sub(a: BaseElement, b: BaseElement) -> BaseElement:
    return _raw_add(a, -b)


def _raw_eq(a: BaseElement, b: BaseElement) -> bool:
    if a.den == b.den:
        return a.n0 == b.n0 and a.n1 == b.n1
    return a.n0 * b.den == b.n0 * a.den and a.n1 * b.den == b.n1 * a.den


def _raw_reduce(a: BaseElement) -> BaseElement:
    return _reduce_base(a.field, a.n0, a.n1, a.den)


def _raw_mat_mul(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    rows = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = _raw_mul(a.entry(i, 0), b.entry(0, j))
            for k in range(1, a.cols):
                acc = _raw_add(acc, _raw_mul(a.entry(i, k), b.entry(k, j)))
            row.append(acc)
        rows.append(row)
    return DenseMatrix.from_rows(rows)


def _raw_mat_add(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    return DenseMatrix.from_rows(
        [[_raw_add(a.entry(i, j), b.entry(i, j)) for j in range(a.cols)]
         for i in range(a.rows)])


def _raw_mat_eq(a: DenseMatrix, b: DenseMatrix) -> bool:
    return all(_raw_eq(a.entry(i, j), b.entry(i, j))
               for i in range(a.rows) for j in range(a.cols))


def sylvester_solve(left: DenseMatrix, right: DenseMatrix,
                    rhs: DenseMatrix) -> DenseMatrix:
    """X with X*right - left*X = rhs, for left, right upper triangular with
    distinct constant diagonals.  Peeling off the diagonals leaves strictly
    upper triangular remainders, so the entries of X resolve one at a time
    by back-substitution; the result is verified against the equation.  The
    right-hand side may be unreduced; the returned X is reduced."""
    n = left.rows
    cl, cr = left.entry(0, 0), right.entry(0, 0)
    dif = cr - cl
    if dif.is_zero():
        raise AlgebraError("coincident spectra in the matrix equation")
    inv = dif.inverse()
    zero = cl - cl
    x = [[zero] * n for _ in range(n)]
    for i in range(n - 1, -1, -1):
        for j in range(n):
            acc = rhs.entry(i, j)
            for k in range(i + 1, n):
                e = left.entry(i, k)
                if not e.is_zero():
                    acc = _raw_add(acc, _raw_mul(e, x[k][j]))
            for k in range(j):
                e = right.entry(k, j)
                if not e.is_zero():
                    acc = _raw_sub(acc, _raw_mul(x[i][k], e))
            x[i][j] = _raw_reduce(_raw_mul(acc, inv))
    xm = DenseMatrix.from_rows(x)
    lhs = _raw_mat_mul(xm, right)
    neg = _raw_mat_mul(left, xm).map_entries(lambda e: -e)
    if not _raw_mat_eq(_raw_mat_add(lhs, neg), rhs):
        raise IdentityError("matrix equation back-substitution did not close")
    return xm


@dataclass(frozen=True)
class ExpLogCoeffs:
    """Exact matrix coefficients: Exp z = sum Q_i z^(i), Log z = sum P_i z^(i)."""

    module: AndersonModule
    Q: tuple
    P: tuple

    @property
    def order(self) -> int:
        return len(self.Q) - 1


def exp_log_coeffs(mod: AndersonModule, J: int) -> ExpLogCoeffs:
    """Solve the twist recursions for Q_1..Q_J and P_1..P_J and check that
    the Q_i are simultaneously compatible with the y-action.

    Q_i d[theta]^(i) - d[theta] Q_i = sum_{k>=1} A_k Q_{i-k}^(k), where A_k
    runs over the tau coefficients of rho_t (just E_theta for n >= 2), and
    dually for P_i.  The same equations with rho_y must then hold for free,
    and are verified, not solved."""
    if J < 0:
        raise InputError("coefficient order must be nonnegative")
    n = mod.n
    base = mod.base
    zero, one = base.zero, base.one
    ident = DenseMatrix.identity(n, one, zero)
    dth = mod.rho_t.coeff(0)
    det = mod.rho_y.coeff(0)
    t_hi = [mod.rho_t.coeff(k) for k in range(1, mod.rho_t.degree + 1)]
    y_hi = [mod.rho_y.coeff(k) for k in range(1, mod.rho_y.degree + 1)]

    Q = [ident]
    P = [ident]
    dth_tw = {0: dth}
    det_tw = {0: det}
    for i in range(1, J + 1):
        dth_tw[i] = mat_twist(dth_tw[i - 1], 1)
        det_tw[i] = mat_twist(det_tw[i - 1], 1)
        bq = DenseMatrix.zeros(n, n, zero)
        bp = DenseMatrix.zeros(n, n, zero)
        for k, ak in enumerate(t_hi, start=1):
            if k > i:
                break
            bq = _raw_mat_add(bq, _raw_mat_mul(ak, mat_twist(Q[i - k], k)))
            bp = _raw_mat_add(bp, _raw_mat_mul(P[i - k], mat_twist(ak, i - k)))
        Q.append(sylvester_solve(dth, dth_tw[i], bq))
        P.append(sylvester_solve(dth, dth_tw[i],
                                 bp.map_entries(lambda e: -e)))

        ycq = DenseMatrix.zeros(n, n, zero)
        ycp = DenseMatrix.zeros(n, n, zero)
        for k, ak in enumerate(y_hi, start=1):
            if k > i:
                break
            ycq = _raw_mat_add(ycq, _raw_mat_mul(ak, mat_twist(Q[i - k], k)))
            ycp = _raw_mat_add(ycp, _raw_mat_mul(P[i - k], mat_twist(ak, i - k)))
        neg_dq = _raw_mat_mul(det, Q[i]).map_entries(lambda e: -e)
        if not _raw_mat_eq(_raw_mat_add(_raw_mat_mul(Q[i], det_tw[i]), neg_dq),
                           ycq):
            raise IdentityError(f"Q_{i} fails the y-action compatibility")
        neg_pd = _raw_mat_mul(P[i], det_tw[i]).map_entries(lambda e: -e)
        if not _raw_mat_eq(_raw_mat_add(_raw_mat_mul(det, P[i]), neg_pd),
                           ycp):
            raise IdentityError(f"P_{i} fails the y-action compatibility")
    return ExpLogCoeffs(mod, tuple(Q), tuple(P))


def verify_formal_inverse(elc: ExpLogCoeffs) -> bool:
    """Exp after Log and Log after Exp are the identity through the stored
    order: sum_{i+j=m} Q_i P_j^(i) = [m = 0] I, and with P, Q swapped."""
    mod = elc.module
    n = mod.n
    zero, one = mod.base.zero, mod.base.one
    ident = DenseMatrix.identity(n, one, zero)
    for m in range(elc.order + 1):
        se = DenseMatrix.zeros(n, n, zero)
        sl = DenseMatrix.zeros(n, n, zero)
        for i in range(m + 1):
            se = _raw_mat_add(se, _raw_mat_mul(elc.Q[i],
                                               mat_twist(elc.P[m - i], i)))
            sl = _raw_mat_add(sl, _raw_mat_mul(elc.P[i],
                                               mat_twist(elc.Q[m - i], i)))
        want = ident if m == 0 else DenseMatrix.zeros(n, n, zero)
        if not _raw_mat_eq(se, want):
            raise IdentityError(f"Exp o Log deviates at order {m}")
        if not _raw_mat_eq(sl, want):
            raise IdentityError(f"Log o Exp deviates at order {m}")
    return True


# -- the operator identity suite ---------------------------------------------------


def _quotient_data(mod: AndersonModule):
    """Chord slopes and vertical-line denominators for the basis quotients
    g_{k+1}/g_k.  The slope is m_k = z_k - a_{k+1}, with both top entries
    pulled through one twist; the denominator t - theta + y_k - a_k m_k
    also twists theta in the top slot, because the twist in the tau-layer
    of the final quotient passes through the constant coefficients."""
    co = mod.coeffs
    n = mod.n
    base = mod.base
    ff = mod.basis.ff
    ms, deltas = [], []
    for k in range(1, n + 1):
        top = k == n
        ak1 = co.a[0].twist(1) if top else co.a[k]
        mk = co.zc[k - 1] - ak1
        ms.append(mk)
        thk = base.theta.twist(1) if top else base.theta
        dk = ff.t - ff.lift(thk - co.yc[k - 1] + co.a[k - 1] * mk)
        deltas.append(dk)
    return ms, deltas


def t_map(basis: MotiveBasis, h: CurveFunction) -> list:
    """The column vector (h g_1, ..., h g_n)."""
    return [h * gi for gi in basis.g]


def operator_suite(mod: AndersonModule, rng=None) -> tuple:
    """Run every exact operator identity; returns ((name, ok) ...) without
    raising, so callers can report per-identity results."""
    basis = mod.basis
    co = mod.coeffs
    sh = basis.sh
    base = mod.base
    ff = basis.ff
    n = mod.n
    c = base.params
    results = []

    def check(name, fn):
        try:
            ok = bool(fn())
        except Exception:
            ok = False
        results.append((name, ok))

    t, y = ff.t, ff.y
    theta, eta = base.theta, base.eta
    fn_pow = sh.f ** n

    # multiplication identities on the g side, all tau layers at once
    def column_identity(mult_fn, op):
        gvec = [basis.g[i - 1] for i in range(1, n + 1)]
        lhs = [mult_fn * gi for gi in gvec]
        rhs = [ff.zero] * n
        for k in range(op.degree + 1):
            mk = op.coeff(k).map_entries(ff.lift)
            fk = basis.f_product(k) ** n
            vec = [fk * gi.twist(k) for gi in gvec]
            mv = mk.apply(vec)
            rhs = [a + b for a, b in zip(rhs, mv)]
        return all(l == r for l, r in zip(lhs, rhs))

    check("t-action columns", lambda: column_identity(t, mod.rho_t))
    check("y-action columns", lambda: column_identity(y, mod.rho_y))

    # dual-side ladder t h_i = theta h_i + b_i h_{i+1} + h_{i+2}; the top
    # coefficient only exists after one twist, so compare twisted forms there
    def h_ladder():
        th_l = ff.lift(theta)
        for i in range(1, n):
            rhs = th_l * basis.h[i - 1] + ff.lift(co.b[i - 1]) * basis.h[i] \
                + basis.h_ext(i + 2)
            if not t * basis.h[i - 1] == rhs:
                return False
        hn1 = basis.h[n - 1].twist(1)
        f1n = basis.f1_power()
        want = ff.lift(theta.twist(1)) * hn1 \
            + ff.lift(co.b_top_q) * f1n * basis.h[0] + f1n * basis.h_ext(2)
        return t * hn1 == want

    check("dual ladder", h_ladder)
    check("a-coefficient routes", lambda: verify_a_routes(basis, co) or True)
    check("coefficient duality", lambda: verify_coefficient_duality(basis, co) or True)
    check("basis duality", lambda: verify_basis_duality(basis) or True)

    # quotient family: closed expression, vertical denominator, and chord
    # slope for each g_{k+1}/g_k
    ms, deltas = _quotient_data(mod)

    def quotient_family():
        for k in range(1, n + 1):
            quot = basis.g_ext(k + 1) / basis.g_ext(k)
            mk, dk = ms[k - 1], deltas[k - 1]
            nu = y - ff.lift(eta) - ff.lift(mk) * (t - ff.lift(theta))
            if not quot == nu / dk:
                return False
            pk = basis.V1.scalar(k) + basis.V.scalar(n - k)
            pk1 = basis.V1.scalar(k - 1) + basis.V.scalar(n - k + 1)
            if pk.inf or pk1.inf:
                return False
            if not dk == t - ff.lift(pk1.x):
                return False
            lam = _slope(base, pk, -pk1)
            if lam is None or not lam == mk:
                return False
        return True

    check("quotient family", quotient_family)

    # operator decomposition: D_y - (M_tau + M_m) D_t against M_delta (G - E_1 tau)
    z, o = base.zero, base.one
    rt_f = lift_operator(mod.rho_t, ff)
    ry_f = lift_operator(mod.rho_y, ff)
    ident_f = DenseMatrix.identity(n, ff.one, ff.zero)
    d_t = rt_f - TwistedOperator.constant(ff.zero, ff.one,
                                          ident_f.map_entries(lambda e: e * t))
    d_y = ry_f - TwistedOperator.constant(ff.zero, ff.one,
                                          ident_f.map_entries(lambda e: e * y))
    m_tau = TwistedOperator(
        n, ff.zero, ff.one,
        [structured_matrix(n, "N", index=1, zero=ff.zero, one=ff.one),
         structured_matrix(n, "E", index=1, zero=ff.zero, one=ff.one)])
    m_m = TwistedOperator.constant(
        ff.zero, ff.one,
        structured_matrix(n, "N", [ff.lift(mm) for mm in ms], index=0,
                          zero=ff.zero, one=ff.one))
    m_delta = TwistedOperator.constant(
        ff.zero, ff.one,
        structured_matrix(n, "N", deltas, index=0, zero=ff.zero, one=ff.one))
    quots = [basis.g_ext(k + 1) / basis.g_ext(k) for k in range(1, n + 1)]
    g_op = TwistedOperator(
        n, ff.zero, ff.one,
        [structured_matrix(n, "N", quots, index=0, zero=ff.zero, one=ff.one)
         + structured_matrix(n, "N", [-ff.one] * (n - 1), index=1,
                             zero=ff.zero, one=ff.one),
         structured_matrix(n, "E", [-ff.one], index=1, zero=ff.zero,
                           one=ff.one)])

    # multiplying out the diagonal factor flips every entry: the bidiagonal
    # remainder is the negative of M_delta (G - E_1 tau)
    m_prime = d_y - (m_tau + m_m) * d_t
    check("operator decomposition", lambda: m_prime == -(m_delta * g_op))

    # the bidiagonal structure constants of M' against the g columns
    def bg_identity():
        m1 = m_prime.coeff(0)
        m2 = m_prime.coeff(1)
        gvec = [basis.g[i - 1] for i in range(1, n + 1)]
        left = m1.apply(gvec)
        right = m2.apply([fn_pow * gi.twist(1) for gi in gvec])
        return all((a + b).is_zero() for a, b in zip(left, right))

    check("bidiagonal g relation", bg_identity)

    # specialized corollary: rho_y - (M_tau + M_m) rho_t has constant entries
    def specialized():
        lhs = ry_f - (m_tau + m_m) * rt_f
        spec = [m.map_entries(lambda e: ff.lift(e.specialize_origin()))
                for m in m_prime.mats]
        rhs = TwistedOperator(n, ff.zero, ff.one, spec)
        return lhs == rhs

    check("specialized decomposition", specialized)

    # the kernel operator acts on T(h) like tau - f^n on h, symbolically
    def ge1_symbolic():
        r = rng if rng is not None else random.Random(20260825)
        for _ in range(2):
            h = _random_poly_multiple(basis, r, ff.one, 2)
            if h.is_zero():
                h = ff.one + t
            out = g_op.apply(t_map(basis, h))
            head_ok = all(v.is_zero() for v in out[:-1])
            want = basis.g[0].twist(1) * (fn_pow * h - h.twist(1))
            if not (head_ok and out[-1] == want):
                return False
        return True

    check("kernel operator on T", ge1_symbolic)

    check("commutation", lambda: (mod.rho_t * mod.rho_y
                                  == mod.rho_y * mod.rho_t))

    def weierstrass():
        cc = [base.elem(v) for v in (c.c1, c.c2, c.c3, c.c4, c.c6)]
        rt_op, ry_op = mod.rho_t, mod.rho_y
        lhs = ry_op * ry_op + (rt_op * ry_op).scale(cc[0]) + ry_op.scale(cc[2])
        rhs = rt_op * rt_op * rt_op + (rt_op * rt_op).scale(cc[1]) \
            + rt_op.scale(cc[3]) \
            + TwistedOperator.identity(n, z, o).scale(cc[4])
        return lhs == rhs

    check("weierstrass relation", weierstrass)
    return tuple(results)


def diagram_check(mod: AndersonModule, rng, samples: int = 20,
                  deg_cap: int | None = None) -> tuple:
    """The quotient map intertwines multiplication with the module action:
    eps(t g) = rho_t(eps(g)) and eps(y g) = rho_y(eps(g)) on random module
    elements, and eps kills h^(1) - f^n h for sections h vanishing along V."""
    basis = mod.basis
    ff = basis.ff
    fn_pow = basis.sh.f ** mod.n
    results = []
    for s in range(samples):
        g = random_module_element(basis, rng, deg_cap)
        eg = sigma_decompose(basis, g).epsilon()
        ok = True
        for mult, op in ((ff.t, mod.rho_t), (ff.y, mod.rho_y)):
            lhs = sigma_decompose(basis, mult * g).epsilon()
            rhs = op.apply(list(eg))
            if not all(a == b for a, b in zip(lhs, rhs)):
                ok = False
        results.append((f"intertwining sample {s}", ok))
    for s in range(samples):
        h = random_v_section(basis, rng, deg_cap)
        ev = sigma_decompose(basis, h.twist(1) - fn_pow * h).epsilon()
        results.append((f"kernel sample {s}", all(v.is_zero() for v in ev)))
    return tuple(results)
