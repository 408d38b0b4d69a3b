"""Exact polynomial arithmetic over the Gaussian rationals Q(i).

``MultiPoly`` is an immutable sparse polynomial in named variables;
``PolyMatrix`` is a dense matrix of such polynomials sharing one variable
context.  Determinants, characteristic polynomials and Pfaffians are computed
fraction-free (cofactor expansion with memoisation, Faddeev-LeVerrier), so all
identities can be checked exactly.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from numbers import Rational


class SymbolicError(ValueError):
    pass


class GaussRational:
    """a + b i with a, b rational."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, *_):
        raise AttributeError("GaussRational is immutable")

    @classmethod
    def coerce(cls, x) -> "GaussRational":
        if isinstance(x, GaussRational):
            return x
        if isinstance(x, (int, Rational)):
            return cls(x, 0)
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        if isinstance(x, float):
            return cls(Fraction(x), 0)
        if isinstance(x, str):
            return parse_gauss(x)
        raise TypeError(f"cannot convert {type(x).__name__} to GaussRational")

    def __add__(self, o):
        if isinstance(o, MultiPoly):
            return NotImplemented
        o = GaussRational.coerce(o)
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, o):
        if isinstance(o, MultiPoly):
            return NotImplemented
        return self + (-GaussRational.coerce(o))

    def __rsub__(self, o):
        return GaussRational.coerce(o) - self

    def __mul__(self, o):
        if isinstance(o, MultiPoly):
            return NotImplemented
        o = GaussRational.coerce(o)
        return GaussRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self):
        return GaussRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __truediv__(self, o):
        o = GaussRational.coerce(o)
        d = o.norm2()
        if d == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        num = self * o.conj()
        return GaussRational(num.re / d, num.im / d)

    def __rtruediv__(self, o):
        return GaussRational.coerce(o) / self

    def __pow__(self, e: int):
        if e < 0:
            return GaussRational(1) / self ** (-e)
        out = GaussRational(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, o):
        try:
            o = GaussRational.coerce(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussRational({self})"

    def __str__(self):
        return f"{_frac_str(self.re)}+{_frac_str(self.im)}*i"


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


_GAUSS_RE = re.compile(r"^\s*([+-]?\d+)(?:/(\d+))?\s*\+\s*([+-]?\d+)(?:/(\d+))?\s*\*\s*i\s*$")


def parse_gauss(s: str) -> GaussRational:
    m = _GAUSS_RE.match(s)
    if not m:
        raise SymbolicError(f"bad Gaussian rational literal {s!r}")
    a, b, c, d = m.groups()
    return GaussRational(Fraction(int(a), int(b or 1)), Fraction(int(c), int(d or 1)))


ZERO = GaussRational(0)
ONE = GaussRational(1)
I_UNIT = GaussRational(0, 1)


def _exact_scalar(x) -> bool:
    return isinstance(x, (GaussRational, int, Rational))


class MultiPoly:
    """Sparse multivariate polynomial with Q(i) coefficients.

    ``vars`` is a lexicographically sorted tuple of names; ``terms`` maps
    exponent tuples to nonzero ``GaussRational`` coefficients.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, vars=(), terms=None):
        vs = tuple(vars)
        if list(vs) != sorted(set(vs)):
            raise SymbolicError(f"variable context must be sorted and distinct: {vs}")
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != len(vs) or min(e, default=0) < 0:
                raise SymbolicError(f"bad exponent {e} for context {vs}")
            c = GaussRational.coerce(c)
            if c:
                clean[e] = clean.get(e, ZERO) + c if e in clean else c
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "terms", {e: c for e, c in clean.items() if c})

    def __setattr__(self, *_):
        raise AttributeError("MultiPoly is immutable")

    # -- constructors -----------------------------------------------------
    @classmethod
    def var(cls, name: str) -> "MultiPoly":
        return cls((name,), {(1,): ONE})

    @classmethod
    def const(cls, c, vars=()) -> "MultiPoly":
        vs = tuple(sorted(set(vars)))
        return cls(vs, {(0,) * len(vs): c})

    @classmethod
    def zero(cls, vars=()) -> "MultiPoly":
        return cls(tuple(sorted(set(vars))), {})

    # -- context handling -------------------------------------------------
    def extend(self, vars) -> "MultiPoly":
        """Re-express in a larger (sorted) variable context."""
        vs = tuple(sorted(set(vars) | set(self.vars)))
        if vs == self.vars:
            return self
        pos = [vs.index(v) for v in self.vars]
        terms = {}
        for e, c in self.terms.items():
            ne = [0] * len(vs)
            for p, x in zip(pos, e):
                ne[p] = x
            terms[tuple(ne)] = c
        return MultiPoly(vs, terms)

    def _unify(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(other, self.vars)
        if self.vars == other.vars:
            return self, other
        vs = set(self.vars) | set(other.vars)
        return self.extend(vs), other.extend(vs)

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        a, b = self._unify(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return MultiPoly(a.vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        a, b = self._unify(other)
        return a + (-b)

    def __rsub__(self, other):
        a, b = self._unify(other)
        return b + (-a)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        a, b = self._unify(other)
        terms = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                c = c1 * c2
                terms[e] = terms[e] + c if e in terms else c
        return MultiPoly(a.vars, terms)

    __rmul__ = __mul__

    def scale(self, s) -> "MultiPoly":
        s = GaussRational.coerce(s)
        return MultiPoly(self.vars, {e: c * s for e, c in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise SymbolicError("negative power of a polynomial")
        out = MultiPoly.const(1, self.vars)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            try:
                other = MultiPoly.const(other, self.vars)
            except TypeError:
                return NotImplemented
        a, b = self._unify(other)
        return a.terms == b.terms

    def __hash__(self):
        return hash(frozenset(self.trimmed().terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    # -- inspection -------------------------------------------------------
    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, var: str) -> int:
        if var not in self.vars:
            return 0 if self.terms else -1
        i = self.vars.index(var)
        return max((e[i] for e in self.terms), default=-1)

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> GaussRational:
        return self.terms.get((0,) * len(self.vars), ZERO)

    def trimmed(self) -> "MultiPoly":
        """Drop variables that do not occur."""
        used = [i for i, _ in enumerate(self.vars) if any(e[i] for e in self.terms)]
        vs = tuple(self.vars[i] for i in used)
        return MultiPoly(vs, {tuple(e[i] for i in used): c for e, c in self.terms.items()})

    def coeffs_in(self, var: str) -> list["MultiPoly"]:
        """Coefficients (ascending powers of ``var``) as polynomials in the
        remaining variables."""
        if var not in self.vars:
            return [self]
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1:]
        d = self.degree(var)
        buckets = [dict() for _ in range(max(d, 0) + 1)]
        for e, c in self.terms.items():
            buckets[e[i]][e[:i] + e[i + 1:]] = c
        return [MultiPoly(rest, b) for b in buckets]

    # -- calculus / evaluation -------------------------------------------
    def diff(self, var: str) -> "MultiPoly":
        if var not in self.vars:
            return MultiPoly.zero(self.vars)
        i = self.vars.index(var)
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                terms[ne] = c * e[i]
        return MultiPoly(self.vars, terms)

    def eval(self, point: dict):
        """Evaluate at ``point`` (name -> value).  Exact when every bound
        value is exact, IEEE complex otherwise."""
        missing = [v for v in self.vars if v not in point]
        if missing:
            raise SymbolicError(f"unbound variables {missing}")
        vals = [point[v] for v in self.vars]
        if all(_exact_scalar(x) for x in vals):
            vals = [GaussRational.coerce(x) for x in vals]
            acc = ZERO
            for e, c in self.terms.items():
                t = c
                for x, k in zip(vals, e):
                    if k:
                        t = t * x ** k
                acc = acc + t
            return acc
        vals = [complex(x) for x in vals]
        acc = 0j
        for e, c in self.terms.items():
            t = complex(c)
            for x, k in zip(vals, e):
                if k:
                    t *= x ** k
            acc += t
        return acc

    def subs(self, mapping: dict) -> "MultiPoly":
        """Substitute polynomials (or scalars) for variables."""
        out = MultiPoly.zero(tuple(v for v in self.vars if v not in mapping))
        for e, c in self.terms.items():
            t = MultiPoly.const(c)
            for v, k in zip(self.vars, e):
                if not k:
                    continue
                r = mapping.get(v, MultiPoly.var(v))
                if not isinstance(r, MultiPoly):
                    r = MultiPoly.const(r)
                t = t * r ** k
            out = out + t
        return out

    def divexact(self, d: "MultiPoly") -> "MultiPoly":
        """Exact quotient; raises ``SymbolicError`` if ``d`` does not divide."""
        a, b = self._unify(d)
        if b.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        q = MultiPoly.zero(a.vars)
        r = a
        lt_e, lt_c = _leading(b)
        while not r.is_zero():
            e, c = _leading(r)
            diff = tuple(x - y for x, y in zip(e, lt_e))
            if min(diff) < 0:
                raise SymbolicError("not exactly divisible")
            t = MultiPoly(a.vars, {diff: c / lt_c})
            q = q + t
            r = r - t * b
        return q

    # -- text form --------------------------------------------------------
    def sorted_terms(self):
        """Terms in graded-lex order, highest first."""
        return sorted(self.terms.items(), key=lambda ec: (sum(ec[0]), ec[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mons = [v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k]
            parts.append("*".join([f"({c})"] + mons))
        return " + ".join(parts)

    def __repr__(self):
        return f"MultiPoly({self})"


def _leading(p: MultiPoly):
    return max(p.terms.items(), key=lambda ec: (sum(ec[0]), ec[0]))


_TERM_RE = re.compile(r"^\(([^()]*)\)((?:\*[A-Za-z_][A-Za-z_0-9]*(?:\^\d+)?)*)$")


def parse_poly(s: str, vars=()) -> MultiPoly:
    """Parse a polynomial string.

    The canonical form produced by ``str(MultiPoly)`` is parsed directly.
    Anything else is treated as an ordinary expression (``z1**2 - 3*I*u``
    style, ``^`` allowed for powers, ``I``/``i`` the imaginary unit) and read
    through sympy.
    """
    s = s.strip()
    try:
        return _parse_canonical(s, vars)
    except SymbolicError:
        return _parse_expression(s, vars)


def _parse_canonical(s: str, vars) -> MultiPoly:
    if s == "0":
        return MultiPoly.zero(vars)
    out = MultiPoly.zero(vars)
    for chunk in s.split(" + "):
        m = _TERM_RE.match(chunk.strip())
        if not m:
            raise SymbolicError(f"not canonical: {chunk!r}")
        t = MultiPoly.const(parse_gauss(m.group(1)))
        for mon in filter(None, m.group(2).split("*")):
            name, _, k = mon.partition("^")
            t = t * MultiPoly.var(name) ** int(k or 1)
        out = out + t
    return out


def _parse_expression(s: str, vars) -> MultiPoly:
    import sympy

    names = set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", s)) - {"I", "i"}
    syms = {n: sympy.Symbol(n) for n in names}
    local = dict(syms, I=sympy.I, i=sympy.I)
    try:
        expr = sympy.sympify(s.replace("^", "**"), locals=local)
        gens = [syms[n] for n in sorted(names)]
        poly = sympy.Poly(sympy.expand(expr), *gens, domain="QQ_I") if gens else None
    except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
        raise SymbolicError(f"cannot parse polynomial {s!r}: {exc}") from exc
    if poly is None:
        re_, im_ = sympy.Rational(sympy.re(expr)), sympy.Rational(sympy.im(expr))
        return MultiPoly.const(GaussRational(Fraction(str(re_)), Fraction(str(im_))), vars)
    terms = {}
    for mon, c in poly.terms():
        c = sympy.sympify(c)
        terms[mon] = GaussRational(Fraction(str(sympy.re(c))), Fraction(str(sympy.im(c))))
    return MultiPoly(tuple(sorted(names)), terms).extend(vars)


class PolyMatrix:
    """Dense rows x cols matrix of MultiPoly over a shared variable context."""

    __slots__ = ("rows", "cols", "entries", "vars")

    def __init__(self, entries):
        rows = [list(r) for r in entries]
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise SymbolicError("PolyMatrix must be a non-empty rectangle")
        polys = [[e if isinstance(e, MultiPoly) else MultiPoly.const(e) for e in r] for r in rows]
        vs = sorted(set().union(*(p.vars for r in polys for p in r)))
        object.__setattr__(self, "vars", tuple(vs))
        object.__setattr__(self, "entries", tuple(tuple(p.extend(vs) for p in r) for r in polys))
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", len(rows[0]))

    def __setattr__(self, *_):
        raise AttributeError("PolyMatrix is immutable")

    @classmethod
    def zeros(cls, rows, cols, vars=()):
        return cls([[MultiPoly.zero(vars)] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n, vars=()):
        return cls([[MultiPoly.const(1 if i == j else 0, vars) for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self):
        return (self.rows, self.cols)

    def is_square(self):
        return self.rows == self.cols

    def __add__(self, o):
        return PolyMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, o.entries)])

    def __sub__(self, o):
        return PolyMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, o.entries)])

    def __neg__(self):
        return PolyMatrix([[-a for a in r] for r in self.entries])

    def __matmul__(self, o):
        if self.cols != o.rows:
            raise SymbolicError("shape mismatch in matrix product")
        zero = MultiPoly.zero(self.vars)
        out = []
        for i in range(self.rows):
            row = []
            for j in range(o.cols):
                acc = zero
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a.terms and o.entries[k][j].terms:
                        acc = acc + a * o.entries[k][j]
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def scale(self, s):
        if isinstance(s, MultiPoly):
            return PolyMatrix([[a * s for a in r] for r in self.entries])
        return PolyMatrix([[a.scale(s) for a in r] for r in self.entries])

    def transpose(self):
        return PolyMatrix([list(c) for c in zip(*self.entries)])

    def map(self, fn):
        return PolyMatrix([[fn(a) for a in r] for r in self.entries])

    def is_antisymmetric(self) -> bool:
        return self.is_square() and all(
            self.entries[i][j] == -self.entries[j][i] for i in range(self.rows) for j in range(i, self.cols)
        )

    def trace(self):
        return reduce(lambda a, b: a + b, (self.entries[i][i] for i in range(self.rows)))

    def eval(self, point):
        import numpy as np

        return np.array([[complex(a.eval(point)) for a in r] for r in self.entries])

    def __eq__(self, o):
        return isinstance(o, PolyMatrix) and self.shape == o.shape and all(
            a == b for r, s in zip(self.entries, o.entries) for a, b in zip(r, s)
        )

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols}, vars={self.vars})"


def det(m: PolyMatrix) -> MultiPoly:
    """Determinant by cofactor expansion along rows, memoised on the set of
    remaining columns (O(n 2^n) polynomial products)."""
    if not m.is_square():
        raise SymbolicError("determinant of a non-square matrix")
    n = m.rows
    memo = {}

    def rec(cols: tuple) -> MultiPoly:
        if not cols:
            return MultiPoly.const(1, m.vars)
        if cols in memo:
            return memo[cols]
        r = n - len(cols)
        acc = MultiPoly.zero(m.vars)
        for idx, c in enumerate(cols):
            a = m.entries[r][c]
            if a.terms:
                sub = rec(cols[:idx] + cols[idx + 1:])
                term = a * sub
                acc = acc - term if idx % 2 else acc + term
        memo[cols] = acc
        return acc

    return rec(tuple(range(n)))


def charpoly(m: PolyMatrix, lam: str = "lam") -> MultiPoly:
    """det(lam*Id - m) via Faddeev-LeVerrier (divisions by integers only)."""
    if not m.is_square():
        raise SymbolicError("characteristic polynomial of a non-square matrix")
    if lam in m.vars:
        raise SymbolicError(f"{lam!r} is not a fresh variable")
    n = m.rows
    coeffs = [MultiPoly.const(1, m.vars)]  # c_n = 1, then c_{n-1}, ...
    M = PolyMatrix.zeros(n, n, m.vars)
    ident = PolyMatrix.identity(n, m.vars)
    for k in range(1, n + 1):
        M = m @ M + ident.scale(coeffs[-1])
        c = (m @ M).trace().scale(GaussRational(Fraction(-1, k)))
        coeffs.append(c)
    L = MultiPoly.var(lam)
    out = MultiPoly.zero(m.vars)
    for k, c in enumerate(coeffs):
        out = out + c * L ** (n - k)
    return out


def pfaffian(m: PolyMatrix) -> MultiPoly:
    """Pfaffian by expansion along the first row, memoised on the remaining
    index set.  Normalised so that Pf([[0, 1], [-1, 0]]) = 1."""
    if not m.is_square() or m.rows % 2:
        raise SymbolicError("Pfaffian needs an even square matrix")
    if not m.is_antisymmetric():
        raise SymbolicError("Pfaffian needs an antisymmetric matrix")
    memo = {}

    def rec(idx: tuple) -> MultiPoly:
        if not idx:
            return MultiPoly.const(1, m.vars)
        if idx in memo:
            return memo[idx]
        i = idx[0]
        acc = MultiPoly.zero(m.vars)
        for pos in range(1, len(idx)):
            j = idx[pos]
            a = m.entries[i][j]
            if a.terms:
                term = a * rec(idx[1:pos] + idx[pos + 1:])
                acc = acc + term if pos % 2 else acc - term
        memo[idx] = acc
        return acc

    return rec(tuple(range(m.rows)))


def adjugate(m: PolyMatrix) -> PolyMatrix:
    n = m.rows
    if n == 1:
        return PolyMatrix([[MultiPoly.const(1, m.vars)]])
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            # adj[i][j] = (-1)^(i+j) * minor(j, i)
            sub = [[m.entries[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            d = det(PolyMatrix(sub)).extend(m.vars)
            row.append(-d if (i + j) % 2 else d)
        out.append(row)
    return PolyMatrix(out)


def poly_arith(a: MultiPoly, b, op: str) -> MultiPoly:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "scale":
        return a.scale(b)
    raise SymbolicError(f"unknown operation {op!r}")
