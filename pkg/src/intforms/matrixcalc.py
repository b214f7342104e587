"""Derivation-based calculus on a matrix algebra, at desk scale.

Forms are antisymmetric multilinear maps on the commutator derivations
attached to a traceless matrix basis, so the whole complex is finite
dimensional over exact Gaussian rationals: the Koszul differential, the
hom-connection with its trace integral, the curvature formula, and the
chain maps identifying the de Rham complex with the complex of integral
forms.  The two-by-two case is the certified preset; nothing below assumes
it except the tests.
"""

from __future__ import annotations

from itertools import combinations

from sympy.polys.domains import QQ_I

from .dga import DegreeOverflow
from .integrals import SquareFails
from .linalg import LinearSystem

__all__ = [
    "DerBasis",
    "MatElement",
    "MatHomForm",
    "MatForm",
    "MatrixReport",
    "NotClosed",
    "commutator",
    "curvature_mn",
    "gaussian",
    "koszul_d",
    "nabla_chain",
    "nabla_hom",
    "nabla_mn",
    "phi",
    "phi_inv",
    "phi_ladder",
    "structure_constants",
    "trace_integral",
]

I_UNIT = QQ_I(0, 1)


def gaussian(re, im=0):
    """Exact Gaussian-rational scalar."""
    return QQ_I(re, im)


class NotClosed(ValueError):
    pass


def _scalar(value):
    return value if isinstance(value, type(QQ_I.zero)) else QQ_I.convert(value)


class MatElement:
    """Square matrix with exact Gaussian-rational entries."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = tuple(tuple(_scalar(v) for v in row) for row in entries)
        if any(len(row) != len(rows) for row in rows):
            raise ValueError("matrix entries must be square")
        self.entries = rows

    @classmethod
    def zero(cls, n):
        return cls([[0] * n for _ in range(n)])

    @classmethod
    def identity(cls, n):
        return cls([[1 if r == s else 0 for s in range(n)] for r in range(n)])

    @classmethod
    def unit(cls, n, r, s):
        return cls([[1 if (a, b) == (r, s) else 0 for b in range(n)] for a in range(n)])

    @property
    def n(self):
        return len(self.entries)

    def trace(self):
        total = QQ_I.zero
        for r in range(self.n):
            total = total + self.entries[r][r]
        return total

    def __add__(self, other):
        if not isinstance(other, MatElement):
            return NotImplemented
        return MatElement(
            [
                [a + b for a, b in zip(row, orow)]
                for row, orow in zip(self.entries, other.entries)
            ]
        )

    def __neg__(self):
        return MatElement([[-a for a in row] for row in self.entries])

    def __sub__(self, other):
        if not isinstance(other, MatElement):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MatElement):
            n = self.n
            return MatElement(
                [
                    [
                        sum(
                            (self.entries[r][k] * other.entries[k][s] for k in range(n)),
                            QQ_I.zero,
                        )
                        for s in range(n)
                    ]
                    for r in range(n)
                ]
            )
        if isinstance(other, MatForm):
            return NotImplemented
        c = _scalar(other)
        return MatElement([[a * c for a in row] for row in self.entries])

    def __rmul__(self, other):
        c = _scalar(other)
        return MatElement([[c * a for a in row] for row in self.entries])

    def __eq__(self, other):
        return isinstance(other, MatElement) and self.entries == other.entries

    __hash__ = None

    def __bool__(self):
        return any(any(v for v in row) for row in self.entries)

    def __str__(self):
        rows = ("[" + ", ".join(str(v) for v in row) + "]" for row in self.entries)
        return "[" + ", ".join(rows) + "]"

    def __repr__(self):
        return f"<MatElement {self}>"


def commutator(a, b):
    return a * b - b * a


class DerBasis:
    """Commutator derivations a -> i[E_l, a] for a traceless matrix basis."""

    def __init__(self, matrices):
        matrices = tuple(matrices)
        if not matrices:
            raise ValueError("a derivation basis needs at least one matrix")
        n = matrices[0].n
        for m in matrices:
            if m.n != n:
                raise ValueError("basis matrices must share one size")
            if m.trace():
                raise ValueError(f"basis matrices must be traceless, got {m}")
        self.matrices = matrices
        self.n = n
        self.N = len(matrices)
        self._constants = None

    @classmethod
    def pauli(cls):
        return cls(
            (
                MatElement([[0, 1], [1, 0]]),
                MatElement([[0, -I_UNIT], [I_UNIT, 0]]),
                MatElement([[1, 0], [0, -1]]),
            )
        )

    def derive(self, l, a):
        return I_UNIT * commutator(self.matrices[l], a)

    def constants(self):
        if self._constants is None:
            self._constants = structure_constants(self)
        return self._constants

    def words(self, degree):
        return list(combinations(range(self.N), degree))

    def one_form(self, l, coefficient=None):
        coeff = MatElement.identity(self.n) if coefficient is None else coefficient
        return MatForm(self, 1, {(l,): coeff})

    def top_word(self):
        return tuple(range(self.N))


def structure_constants(basis):
    """Exact expansion of every derivation bracket in the basis.

    Solves [X_i, X_j] = sum_l c_ijl X_l entrywise and verifies that c is
    totally antisymmetric; a bracket outside the span, or a basis without
    the antisymmetry, raises NotClosed.
    """
    n, N = basis.n, basis.N
    system = LinearSystem()
    targets = {}
    for i in range(N):
        for j in range(N):
            # i[E, -] brackets compose to the commutator with i[E_i, E_j]
            targets[(i, j)] = I_UNIT * commutator(basis.matrices[i], basis.matrices[j])
    for r in range(n):
        for s in range(n):
            coeffs = {l: basis.matrices[l].entries[r][s] for l in range(N)}
            rhs = {key: m.entries[r][s] for key, m in targets.items()}
            system.add(coeffs, rhs)
    if system.rank() != N:
        raise NotClosed("basis matrices are linearly dependent")
    c = [[[QQ_I.zero] * N for _ in range(N)] for _ in range(N)]
    for (i, j), target in targets.items():
        solution = system.solve((i, j))
        if solution is None:
            raise NotClosed(f"bracket of derivations {i}, {j} leaves the span: {target}")
        for l, value in solution.items():
            c[i][j][l] = value
    for i in range(N):
        for j in range(N):
            for l in range(N):
                if c[i][j][l] != -c[j][i][l] or c[i][j][l] != -c[i][l][j]:
                    raise NotClosed(
                        f"structure constants are not totally antisymmetric at {(i, j, l)}"
                    )
    return tuple(tuple(tuple(row) for row in plane) for plane in c)


def _sort_word(word):
    """Sorted word and the sign of the sorting permutation; None on repeats."""
    if len(set(word)) != len(word):
        return None, 0
    work = list(word)
    sign = 1
    for pos, target in enumerate(sorted(work)):
        at = work.index(target, pos)
        if at != pos:
            work.insert(pos, work.pop(at))
            if (at - pos) % 2:
                sign = -sign
    return tuple(work), sign


class MatForm:
    """Exterior form with matrix coefficients on ordered index words.

    The generating one-forms are central and pairwise anticommute, so a
    form is a coefficient per strictly increasing word; evaluation against
    basis derivation tuples and the wedge product both come down to
    permutation signs.
    """

    __slots__ = ("basis", "degree", "coords")

    def __init__(self, basis, degree, coords):
        if not 0 <= degree <= basis.N:
            raise DegreeOverflow(f"no {degree}-forms on {basis.N} derivations")
        clean = {}
        for word, value in coords.items():
            word = tuple(word)
            if len(word) != degree or list(word) != sorted(set(word)):
                raise ValueError(f"expected a strictly increasing word of length {degree}")
            if value:
                clean[word] = value
        self.basis = basis
        self.degree = degree
        self.coords = clean

    def at(self, *indices):
        """Evaluation against the tuple of basis derivations."""
        if len(indices) != self.degree:
            raise DegreeOverflow(
                f"a {self.degree}-form takes {self.degree} derivations"
            )
        word, sign = _sort_word(indices)
        if word is None:
            return MatElement.zero(self.basis.n)
        value = self.coords.get(word)
        if value is None:
            return MatElement.zero(self.basis.n)
        return value if sign > 0 else -value

    def is_zero(self):
        return not self.coords

    def __bool__(self):
        return bool(self.coords)

    def _mate(self, other):
        if not isinstance(other, MatForm):
            return None
        if other.basis is not self.basis or other.degree != self.degree:
            raise DegreeOverflow("forms live in different components")
        return other

    def __add__(self, other):
        mate = self._mate(other)
        if mate is None:
            return NotImplemented
        coords = dict(self.coords)
        for word, value in mate.coords.items():
            acc = coords.get(word)
            total = value if acc is None else acc + value
            if total:
                coords[word] = total
            elif word in coords:
                del coords[word]
        return MatForm(self.basis, self.degree, coords)

    def __neg__(self):
        return MatForm(
            self.basis, self.degree, {w: -v for w, v in self.coords.items()}
        )

    def __sub__(self, other):
        mate = self._mate(other)
        if mate is None:
            return NotImplemented
        return self + (-mate)

    def __mul__(self, other):
        if isinstance(other, MatForm):
            if other.basis is not self.basis:
                raise DegreeOverflow("forms live on different bases")
            degree = self.degree + other.degree
            if degree > self.basis.N:
                raise DegreeOverflow(
                    f"degree {degree} exceeds the top degree {self.basis.N}"
                )
            coords = {}
            for left, a in self.coords.items():
                for right, b in other.coords.items():
                    word, sign = _sort_word(left + right)
                    if word is None:
                        continue
                    value = a * b if sign > 0 else -(a * b)
                    acc = coords.get(word)
                    total = value if acc is None else acc + value
                    if total:
                        coords[word] = total
                    elif word in coords:
                        del coords[word]
            return MatForm(self.basis, degree, coords)
        if isinstance(other, MatElement):
            return MatForm(
                self.basis, self.degree, {w: v * other for w, v in self.coords.items()}
            )
        c = _scalar(other)
        return MatForm(
            self.basis, self.degree, {w: v * c for w, v in self.coords.items()}
        )

    def __rmul__(self, other):
        if isinstance(other, MatElement):
            return MatForm(
                self.basis, self.degree, {w: other * v for w, v in self.coords.items()}
            )
        c = _scalar(other)
        return MatForm(
            self.basis, self.degree, {w: c * v for w, v in self.coords.items()}
        )

    def __eq__(self, other):
        mate = self._mate(other)
        if mate is None:
            return NotImplemented
        return self.coords == mate.coords

    __hash__ = None

    def __str__(self):
        if not self.coords:
            return "0"
        parts = []
        for word in sorted(self.coords):
            label = ".".join(f"w{l + 1}" for l in word) or "1"
            parts.append(f"{self.coords[word]} {label}")
        return " + ".join(parts)

    def __repr__(self):
        return f"<MatForm degree {self.degree}: {self}>"


def koszul_d(basis, x):
    """Koszul differential on a matrix (degree 0) or a MatForm.

    Degree zero is da(X) = X(a); higher degrees alternate derivations of
    punctured evaluations with bracket insertions, the brackets expanded
    through the structure constants.
    """
    if isinstance(x, MatElement):
        return MatForm(
            basis, 1, {(l,): basis.derive(l, x) for l in range(basis.N)}
        )
    if not isinstance(x, MatForm) or x.basis is not basis:
        raise ValueError("expected a matrix or a form on this basis")
    if x.degree >= basis.N:
        raise DegreeOverflow(f"no forms above degree {basis.N}")
    c = basis.constants()
    coords = {}
    for word in combinations(range(basis.N), x.degree + 1):
        total = MatElement.zero(basis.n)
        for pos, l in enumerate(word):
            rest = word[:pos] + word[pos + 1 :]
            term = basis.derive(l, x.at(*rest))
            total = total + (term if pos % 2 == 0 else -term)
        for pi, pj in combinations(range(len(word)), 2):
            rest = tuple(
                word[k] for k in range(len(word)) if k not in (pi, pj)
            )
            sign = (-1) ** (pi + pj)
            for l in range(basis.N):
                coeff = c[word[pi]][word[pj]][l]
                if not coeff:
                    continue
                term = coeff * x.at(l, *rest)
                total = total + (term if sign > 0 else -term)
        if total:
            coords[word] = total
    return MatForm(basis, x.degree + 1, coords)


class MatHomForm:
    """Right-linear functional on k-forms, stored by values on basis words."""

    __slots__ = ("basis", "degree", "values")

    def __init__(self, basis, degree, values):
        if not 1 <= degree <= basis.N:
            raise DegreeOverflow(f"no form functionals in degree {degree}")
        clean = {}
        for word, value in values.items():
            word = tuple(word)
            if len(word) != degree or list(word) != sorted(set(word)):
                raise ValueError(f"expected a strictly increasing word of length {degree}")
            if value:
                clean[word] = value
        self.basis = basis
        self.degree = degree
        self.values = clean

    def value(self, word):
        return self.values.get(tuple(word), MatElement.zero(self.basis.n))

    def __call__(self, omega):
        if not isinstance(omega, MatForm) or omega.basis is not self.basis:
            raise ValueError("expected a form on the same basis")
        if omega.degree != self.degree:
            raise DegreeOverflow(
                f"a degree-{self.degree} functional cannot eat a {omega.degree}-form"
            )
        total = MatElement.zero(self.basis.n)
        for word, coeff in omega.coords.items():
            # coefficients slide through the central generators, so
            # right-linearity pins the value
            total = total + self.value(word) * coeff
        return total

    def is_zero(self):
        return not self.values

    def __bool__(self):
        return bool(self.values)

    def _mate(self, other):
        if not isinstance(other, MatHomForm):
            return None
        if other.basis is not self.basis or other.degree != self.degree:
            raise DegreeOverflow("functionals live in different components")
        return other

    def __add__(self, other):
        mate = self._mate(other)
        if mate is None:
            return NotImplemented
        values = dict(self.values)
        for word, value in mate.values.items():
            acc = values.get(word)
            total = value if acc is None else acc + value
            if total:
                values[word] = total
            elif word in values:
                del values[word]
        return MatHomForm(self.basis, self.degree, values)

    def __neg__(self):
        return MatHomForm(
            self.basis, self.degree, {w: -v for w, v in self.values.items()}
        )

    def __sub__(self, other):
        mate = self._mate(other)
        if mate is None:
            return NotImplemented
        return self + (-mate)

    def __mul__(self, other):
        if isinstance(other, MatForm):
            # contraction (f*w)(w') = f(w w')
            if other.basis is not self.basis or other.degree >= self.degree:
                raise DegreeOverflow("contraction must drop the degree")
            left = self.degree - other.degree
            values = {
                word: self(other * MatForm(self.basis, left, {word: MatElement.identity(self.basis.n)}))
                for word in combinations(range(self.basis.N), left)
            }
            return MatHomForm(self.basis, left, values)
        if isinstance(other, MatElement):
            return MatHomForm(
                self.basis, self.degree, {w: v * other for w, v in self.values.items()}
            )
        c = _scalar(other)
        return MatHomForm(
            self.basis, self.degree, {w: v * c for w, v in self.values.items()}
        )

    def __eq__(self, other):
        mate = self._mate(other)
        if mate is None:
            return NotImplemented
        return self.values == mate.values

    __hash__ = None

    def __str__(self):
        if not self.values:
            return "0"
        parts = []
        for word in sorted(self.values):
            label = ".".join(f"w{l + 1}" for l in word)
            parts.append(f"{label} := {self.values[word]}")
        return ", ".join(parts)

    def __repr__(self):
        return f"<MatHomForm degree {self.degree}: {self}>"


def nabla_mn(basis, coords):
    """Connection value on a sum of derivation-matrix pairs (l, a_l)."""
    total = MatElement.zero(basis.n)
    for l, a in coords:
        total = total + basis.derive(l, a)
    return total


def nabla_hom(basis, f):
    """Connection on a one-form functional: sum of X_l(f(w_l))."""
    if not isinstance(f, MatHomForm) or f.degree != 1:
        raise DegreeOverflow("the connection starts at one-form functionals")
    return nabla_mn(basis, [(l, f.value((l,))) for l in range(basis.N)])


def nabla_chain(basis, m, f):
    """Chain-level connection sending (m+1)-form functionals down to m.

    For m = 0 this is the plain connection; otherwise the value on a basis
    m-form is nabla(f*w) plus (-1)^(m+1) f(dw), and dw vanishes here only
    when the structure constants say so.
    """
    if not isinstance(f, MatHomForm) or f.degree != m + 1:
        raise DegreeOverflow(f"expected an ({m + 1})-form functional")
    if m == 0:
        return nabla_hom(basis, f)
    one = MatElement.identity(basis.n)
    sign = 1 if (m + 1) % 2 == 0 else -1
    values = {}
    for word in combinations(range(basis.N), m):
        w = MatForm(basis, m, {word: one})
        value = nabla_hom(basis, f * w) + sign * f(koszul_d(basis, w))
        values[word] = value
    return MatHomForm(basis, m, values)


def trace_integral(a):
    """Normalised trace; the integral associated with the connection."""
    return a.trace() / a.n


def curvature_mn(basis, f):
    """Curvature through the displayed double-sum formula.

    The structure constants are scalars here, so every derivation of them
    vanishes and the sum collapses; the formula is still evaluated in full
    so a hypothetical central coefficient would show up.
    """
    if not isinstance(f, MatHomForm) or f.degree != 2:
        raise DegreeOverflow("curvature eats two-form functionals")
    c = basis.constants()
    half = QQ_I.one / QQ_I(2, 0)
    total = MatElement.zero(basis.n)
    scalar_one = MatElement.identity(basis.n)
    for i in range(basis.N):
        for j in range(basis.N):
            for l in range(basis.N):
                if not c[i][j][l]:
                    continue
                coeff = basis.derive(l, c[i][j][l] * scalar_one)
                if not coeff:
                    continue
                omega = basis.one_form(i, coeff) * basis.one_form(j)
                total = total + f(omega)
    return -half * total


def phi(basis, x):
    """Vertical map of the chain ladder.

    A k-form becomes the functional pairing it into the top degree, with
    the sign (-1)^((N-1)k); the top form itself goes to its coefficient.
    """
    top = basis.top_word()
    if isinstance(x, MatElement):
        x = MatForm(basis, 0, {(): x})
    if not isinstance(x, MatForm) or x.basis is not basis:
        raise ValueError("expected a matrix or a form on this basis")
    if x.degree == basis.N:
        return x.coords.get(top, MatElement.zero(basis.n))
    sign = -1 if ((basis.N - 1) * x.degree) % 2 else 1
    one = MatElement.identity(basis.n)
    values = {}
    for word in combinations(range(basis.N), basis.N - x.degree):
        paired = x * MatForm(basis, basis.N - x.degree, {word: one})
        value = paired.coords.get(top, MatElement.zero(basis.n))
        values[word] = value if sign > 0 else -value
    return MatHomForm(basis, basis.N - x.degree, values)


def phi_inv(basis, k, f):
    """Inverse vertical map: rebuild the k-form from its pairings."""
    if k == basis.N:
        if not isinstance(f, MatElement):
            raise ValueError("the top level inverts from a matrix")
        return MatForm(basis, basis.N, {basis.top_word(): f})
    if not isinstance(f, MatHomForm) or f.degree != basis.N - k:
        raise DegreeOverflow(f"expected an ({basis.N - k})-form functional")
    sign_k = -1 if ((basis.N - 1) * k) % 2 else 1
    one = MatElement.identity(basis.n)
    coords = {}
    for word in combinations(range(basis.N), k):
        complement = tuple(l for l in range(basis.N) if l not in word)
        wedge = MatForm(basis, k, {word: one}) * MatForm(
            basis, basis.N - k, {complement: one}
        )
        pair_sign = 1 if wedge.coords.get(basis.top_word()) == one else -1
        value = f.value(complement)
        coords[word] = value if sign_k * pair_sign > 0 else -value
    return MatForm(basis, k, coords)


class MatrixReport:
    """Named checks with failure witnesses."""

    def __init__(self, checks):
        self.checks = checks

    @property
    def ok(self):
        return all(c["ok"] for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c["ok"]]

    def __repr__(self):
        word = "ok" if self.ok else f"{len(self.failures)} failed"
        return f"<MatrixReport {len(self.checks)} checks, {word}>"


def _flat(a):
    return {
        (r, s): a.entries[r][s]
        for r in range(a.n)
        for s in range(a.n)
        if a.entries[r][s]
    }


def phi_ladder(basis, strict=False):
    """Check every square of the chain ladder and invert every vertical.

    Each degree contributes one square per basis word and matrix unit; the
    verticals are certified bijective by exact round trips, and the
    cokernel of the connection is pinned to the line of the identity.
    """
    n, N = basis.n, basis.N
    checks = []
    units = [
        MatElement.unit(n, r, s) for r in range(n) for s in range(n)
    ]
    for k in range(N):
        bad = None
        count = 0
        for word in combinations(range(N), k):
            for unit in units:
                omega = (
                    unit
                    if k == 0
                    else MatForm(basis, k, {word: unit})
                )
                upper = phi(basis, koszul_d(basis, omega))
                lowered = nabla_chain(basis, N - k - 1, phi(basis, omega))
                count += 1
                if upper != lowered:
                    bad = f"word {word}, unit {unit}: {upper} versus {lowered}"
                    break
            if bad:
                break
        checks.append(
            {
                "name": f"square from degree {k} commutes ({count} cases)",
                "ok": bad is None,
                "witness": bad,
            }
        )
    for k in range(N + 1):
        bad = None
        for word in combinations(range(N), k):
            for unit in units:
                omega = MatForm(basis, k, {word: unit})
                if phi_inv(basis, k, phi(basis, omega)) != omega:
                    bad = f"word {word}, unit {unit}"
                    break
            if bad:
                break
        checks.append(
            {
                "name": f"vertical map at degree {k} inverts exactly",
                "ok": bad is None,
                "witness": bad,
            }
        )
    system = LinearSystem()
    bad = None
    for l in range(N):
        for unit in units:
            image = nabla_mn(basis, [(l, unit)])
            if trace_integral(image):
                bad = f"derivation {l}, unit {unit}"
            system.add(_flat(image))
    checks.append(
        {
            "name": "trace integral kills the image of the connection",
            "ok": bad is None,
            "witness": bad,
        }
    )
    rank = system.rank()
    ok = rank == n * n - 1
    checks.append(
        {
            "name": "image of the connection is the traceless matrices",
            "ok": ok,
            "witness": None if ok else f"rank {rank}",
        }
    )
    leftover = system.reduce_mod(_flat(MatElement.identity(n)))
    ok = bool(leftover)
    checks.append(
        {
            "name": "class of the identity spans the cokernel",
            "ok": ok,
            "witness": None if ok else "identity lies in the image",
        }
    )
    report = MatrixReport(checks)
    if strict and not report.ok:
        first = report.failures[0]
        raise SquareFails(f"{first['name']}: {first['witness']}")
    return report
