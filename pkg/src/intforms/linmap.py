"""Linear maps on a presented algebra and square matrices of them.

Map expressions are small immutable trees (identity, generator-image maps,
grade scalings, compositions, sums, scalar multiples, matrix entries) that
evaluate on words with per-node memoization.  Matrices of maps carry a
triangularity kind and a multiplicativity flag; the module provides the
entrywise-composition product of such matrices and the two triangular
recursions that build the inverse pair (bar, hat) of an upper-triangular
multiplicative matrix.

Evaluation is defined on raw words, not only normal ones: a generator-image
map multiplies images along the word as written.  Whether that descends to
the algebra is exactly the well-definedness question, so the verification
passes compare raw-word evaluation of each relation's two sides.
"""
from __future__ import annotations

from .ncalg import GradingAbsent


class SizeMismatch(ValueError):
    pass


class NotTriangular(ValueError):
    pass


class DiagonalNotInvertible(ValueError):
    pass


class MapExpr:
    """Base: a linear endomorphism of the algebra, evaluated per word."""

    __slots__ = ("presentation", "_memo")

    def __init__(self, presentation):
        self.presentation = presentation
        self._memo = {}

    def on_word(self, word):
        cached = self._memo.get(word)
        if cached is None:
            cached = self._memo[word] = self._eval_word(word)
        return cached

    def apply(self, element):
        if element.presentation is not self.presentation:
            raise ValueError("element from a different presentation")
        out = self.presentation.zero
        for word, coeff in element.terms.items():
            out = out + self.on_word(word).scale(coeff)
        return out

    def _eval_word(self, word):
        raise NotImplementedError


class Zero(MapExpr):
    __slots__ = ()

    def _eval_word(self, word):
        return self.presentation.zero

    def __repr__(self):
        return "0"


class Identity(MapExpr):
    __slots__ = ()

    def _eval_word(self, word):
        return self.presentation.monomial(word)

    def __repr__(self):
        return "id"


class AlgebraMap(MapExpr):
    """Endomorphism given by a complete generator-image table.

    With multiplicative set (the default), a word maps to the product of the
    images of its letters; 1 maps to 1.  A non-multiplicative table only
    defines images of single letters and rejects longer words.
    """

    __slots__ = ("images", "multiplicative", "name")

    def __init__(self, presentation, images, multiplicative=True, name=None):
        super().__init__(presentation)
        table = {}
        for key, image in images.items():
            idx = presentation.index(key) if isinstance(key, str) else key
            if not 0 <= idx < len(presentation.generators):
                raise ValueError(f"no generator with index {idx}")
            table[idx] = presentation.element(
                image.terms if hasattr(image, "terms") else image
            )
        missing = [
            presentation.generators[i]
            for i in range(len(presentation.generators))
            if i not in table
        ]
        if missing:
            raise ValueError(f"generator images missing for {missing}")
        self.images = table
        self.multiplicative = bool(multiplicative)
        self.name = name

    def _eval_word(self, word):
        if not self.multiplicative and len(word) > 1:
            raise ValueError("non-multiplicative table applied to a longer word")
        acc = self.presentation.one
        for letter in word:
            acc = acc * self.images[letter]
        return acc

    def __repr__(self):
        return self.name or f"<AlgebraMap {len(self.images)} gens>"


class GradeScale(MapExpr):
    """a -> base^(exponent * |a|) a on homogeneous a, extended linearly."""

    __slots__ = ("base", "exponent")

    def __init__(self, presentation, base, exponent):
        if presentation.grading is None:
            raise GradingAbsent("grade scaling needs a graded presentation")
        super().__init__(presentation)
        self.base = presentation.context.coerce(base)
        if not self.base:
            raise ValueError("grade scaling base must be invertible")
        self.exponent = int(exponent)

    def _eval_word(self, word):
        degree = sum(self.presentation.grading[g] for g in word)
        return self.presentation.monomial(word, self.base ** (self.exponent * degree))

    def __repr__(self):
        return f"<GradeScale {self.base}^({self.exponent}*deg)>"


class Compose(MapExpr):
    """outer after inner."""

    __slots__ = ("outer", "inner")

    def __init__(self, outer, inner):
        if outer.presentation is not inner.presentation:
            raise ValueError("composed maps live on different presentations")
        super().__init__(outer.presentation)
        self.outer = outer
        self.inner = inner

    def _eval_word(self, word):
        return self.outer.apply(self.inner.on_word(word))

    def __repr__(self):
        return f"({self.outer!r} . {self.inner!r})"


class Sum(MapExpr):
    __slots__ = ("parts",)

    def __init__(self, parts):
        parts = tuple(parts)
        if not parts:
            raise ValueError("empty sum; use Zero")
        super().__init__(parts[0].presentation)
        for part in parts:
            if part.presentation is not self.presentation:
                raise ValueError("summed maps live on different presentations")
        self.parts = parts

    def _eval_word(self, word):
        out = self.presentation.zero
        for part in self.parts:
            out = out + part.on_word(word)
        return out

    def __repr__(self):
        return "(" + " + ".join(repr(p) for p in self.parts) + ")"


class Scale(MapExpr):
    __slots__ = ("coeff", "inner")

    def __init__(self, coeff, inner):
        super().__init__(inner.presentation)
        self.coeff = self.presentation.context.coerce(coeff)
        self.inner = inner

    def _eval_word(self, word):
        return self.inner.on_word(word).scale(self.coeff)

    def __repr__(self):
        return f"({self.coeff})*{self.inner!r}"


class MatrixEntry(MapExpr):
    __slots__ = ("matrix", "i", "j")

    def __init__(self, matrix, i, j):
        super().__init__(matrix.presentation)
        self.matrix = matrix
        self.i = i
        self.j = j

    def _eval_word(self, word):
        return self.matrix.on_word(word)[self.i][self.j]

    def __repr__(self):
        return f"<entry ({self.i},{self.j})>"


KINDS = ("general", "upper_triangular", "lower_triangular", "diagonal")


class MapMatrix:
    """Square matrix of maps; optionally an algebra map A -> M_n(A).

    Built either from per-generator image matrices (multiplicative: a word
    evaluates to the product of its letters' matrices) or from explicit
    MapExpr entries.  The kind flag records the structural zero pattern.
    """

    __slots__ = ("presentation", "n", "entries", "kind", "multiplicative", "_images", "_memo")

    def __init__(self, presentation, n, entries, kind, multiplicative, images):
        self.presentation = presentation
        self.n = n
        self.entries = entries
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        self.kind = kind
        self.multiplicative = multiplicative
        self._images = images
        self._memo = {}

    @classmethod
    def from_images(cls, presentation, images, multiplicative=True):
        """images: {generator: n x n matrix of algebra elements}."""
        table = {}
        n = None
        for key, matrix in images.items():
            idx = presentation.index(key) if isinstance(key, str) else key
            rows = tuple(
                tuple(
                    presentation.element(e.terms if hasattr(e, "terms") else e)
                    for e in row
                )
                for row in matrix
            )
            if n is None:
                n = len(rows)
            if len(rows) != n or any(len(r) != n for r in rows):
                raise SizeMismatch("generator image matrices must share one square size")
            table[idx] = rows
        missing = [
            presentation.generators[i]
            for i in range(len(presentation.generators))
            if i not in table
        ]
        if missing:
            raise ValueError(f"generator image matrices missing for {missing}")
        kind = _kind_of(n, lambda i, j: all(m[i][j].is_zero() for m in table.values()))
        self = cls(presentation, n, None, kind, multiplicative, table)
        self.entries = tuple(
            tuple(MatrixEntry(self, i, j) for j in range(n)) for i in range(n)
        )
        return self

    @classmethod
    def from_entries(cls, presentation, entries, multiplicative=False):
        entries = tuple(tuple(row) for row in entries)
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise SizeMismatch("matrix of maps must be square")
        for row in entries:
            for e in row:
                if e.presentation is not presentation:
                    raise ValueError("entry from a different presentation")
        kind = _kind_of(n, lambda i, j: isinstance(entries[i][j], Zero))
        return cls(presentation, n, entries, kind, multiplicative, None)

    def entry(self, i, j):
        return self.entries[i][j]

    def on_word(self, word):
        cached = self._memo.get(word)
        if cached is not None:
            return cached
        pres = self.presentation
        if self._images is not None:
            acc = _scalar_matrix(pres, self.n, pres.one)
            for letter in word:
                acc = _matrix_product(acc, self._images[letter])
        else:
            acc = tuple(
                tuple(self.entries[i][j].on_word(word) for j in range(self.n))
                for i in range(self.n)
            )
        self._memo[word] = acc
        return acc

    def apply(self, element):
        out = _scalar_matrix(self.presentation, self.n, self.presentation.zero, fill=True)
        for word, coeff in element.terms.items():
            m = self.on_word(word)
            out = tuple(
                tuple(out[i][j] + m[i][j].scale(coeff) for j in range(self.n))
                for i in range(self.n)
            )
        return out

    def transpose(self):
        flipped = {
            "upper_triangular": "lower_triangular",
            "lower_triangular": "upper_triangular",
        }
        out = MapMatrix.from_entries(
            self.presentation,
            tuple(tuple(self.entries[j][i] for j in range(self.n)) for i in range(self.n)),
        )
        out.kind = flipped.get(self.kind, self.kind)
        return out

    def __repr__(self):
        tag = "multiplicative " if self.multiplicative else ""
        return f"<MapMatrix {self.n}x{self.n} {tag}{self.kind}>"


def _kind_of(n, is_zero):
    above = all(is_zero(i, j) for i in range(n) for j in range(i + 1, n))
    below = all(is_zero(i, j) for i in range(n) for j in range(i))
    if above and below:
        return "diagonal"
    if below:
        return "upper_triangular"
    if above:
        return "lower_triangular"
    return "general"


def _scalar_matrix(presentation, n, diag, fill=False):
    zero = presentation.zero
    return tuple(
        tuple(diag if (i == j or fill) else zero for j in range(n)) for i in range(n)
    )


def _matrix_product(a, b):
    n = len(a)
    return tuple(
        tuple(
            _sum_elements(a[i][k] * b[k][j] for k in range(n)) for j in range(n)
        )
        for i in range(n)
    )


def _sum_elements(items):
    total = None
    for item in items:
        total = item if total is None else total + item
    return total


def identity_matrix(presentation, n):
    entries = tuple(
        tuple(
            Identity(presentation) if i == j else Zero(presentation)
            for j in range(n)
        )
        for i in range(n)
    )
    return MapMatrix.from_entries(presentation, entries, multiplicative=True)


def bullet(amat, bmat):
    """Matrix product with entrywise composition: (A o B)_ij = sum_k A_ik . B_kj."""
    if amat.n != bmat.n:
        raise SizeMismatch(f"sizes {amat.n} and {bmat.n}")
    if amat.presentation is not bmat.presentation:
        raise ValueError("matrices over different presentations")
    pres = amat.presentation
    n = amat.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            parts = [
                Compose(amat.entries[i][k], bmat.entries[k][j])
                for k in range(n)
                if not isinstance(amat.entries[i][k], Zero)
                and not isinstance(bmat.entries[k][j], Zero)
            ]
            row.append(Zero(pres) if not parts else Sum(parts))
        rows.append(tuple(row))
    return MapMatrix.from_entries(pres, rows)


def matrix_equals_on_words(amat, bmat, words):
    """First (word, i, j, lhs, rhs) discrepancy, or None."""
    if amat.n != bmat.n:
        raise SizeMismatch(f"sizes {amat.n} and {bmat.n}")
    for word in words:
        ma, mb = amat.on_word(word), bmat.on_word(word)
        for i in range(amat.n):
            for j in range(amat.n):
                if ma[i][j] != mb[i][j]:
                    return (word, i, j, ma[i][j], mb[i][j])
    return None


def is_identity_on_words(mat, words):
    pres = mat.presentation
    for word in words:
        m = mat.on_word(word)
        target = pres.monomial(word)
        for i in range(mat.n):
            for j in range(mat.n):
                want = target if i == j else pres.zero
                if m[i][j] != want:
                    return (word, i, j, m[i][j], want)
    return None


def _check_diag_inverses(sigma, diag_inverses):
    pres = sigma.presentation
    if len(diag_inverses) != sigma.n:
        raise SizeMismatch("one diagonal inverse per row is required")
    for i, inv in enumerate(diag_inverses):
        diag = sigma.entries[i][i]
        for g in range(len(pres.generators)):
            target = pres.monomial((g,))
            if inv.apply(diag.on_word((g,))) != target or diag.apply(inv.on_word((g,))) != target:
                raise DiagonalNotInvertible(
                    f"supplied inverse of diagonal entry {i} fails on "
                    f"generator {pres.generators[g]}"
                )


def _verify_inverse_pair(left, right, tag):
    pres = left.presentation
    words = [()] + [(g,) for g in range(len(pres.generators))]
    for amat, bmat in ((left, right), (right, left)):
        witness = is_identity_on_words(bullet(amat, bmat), words)
        if witness is not None:
            word, i, j, got, want = witness
            raise RuntimeError(
                f"{tag} identity fails at entry ({i},{j}) on "
                f"{pres.word_str(word)}: {got} != {want}"
            )


def invert_triangular(sigma, diag_inverses):
    """Lower-triangular bar-matrix with bar o sigma^T = sigma^T o bar = id.

    sigma must be upper-triangular (or diagonal) and multiplicative; the
    caller supplies two-sided inverses of the diagonal entries, which are
    verified by round-trip on every generator.
    """
    if sigma.kind not in ("upper_triangular", "diagonal"):
        raise NotTriangular(f"matrix is {sigma.kind}")
    if not sigma.multiplicative:
        raise NotTriangular("inversion needs a multiplicative matrix")
    _check_diag_inverses(sigma, diag_inverses)
    pres = sigma.presentation
    n = sigma.n
    bar = [[Zero(pres) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        bar[i][i] = diag_inverses[i]
    for gap in range(1, n):
        for j in range(n - gap):
            i = j + gap
            parts = [
                Compose(diag_inverses[i], Compose(sigma.entries[k][i], bar[k][j]))
                for k in range(j, i)
                if not isinstance(sigma.entries[k][i], Zero)
                and not isinstance(bar[k][j], Zero)
            ]
            if parts:
                bar[i][j] = Scale(-1, Sum(parts))
    out = MapMatrix.from_entries(pres, bar)
    _verify_inverse_pair(out, sigma.transpose(), "bar")
    return out


def tilde_of_lower(alpha, diag_inverses):
    """Upper-triangular tilde-matrix with tilde o alpha^T = alpha^T o tilde = id.

    Applied to the bar-matrix of invert_triangular (with the original
    diagonal entries as inverses) this produces the hat-matrix.
    """
    if alpha.kind not in ("lower_triangular", "diagonal"):
        raise NotTriangular(f"matrix is {alpha.kind}")
    _check_diag_inverses(alpha, diag_inverses)
    pres = alpha.presentation
    n = alpha.n
    tilde = [[Zero(pres) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        tilde[i][i] = diag_inverses[i]
    for gap in range(1, n):
        for i in range(n - gap):
            j = i + gap
            parts = [
                Compose(diag_inverses[i], Compose(alpha.entries[l][i], tilde[l][j]))
                for l in range(i + 1, j + 1)
                if not isinstance(alpha.entries[l][i], Zero)
                and not isinstance(tilde[l][j], Zero)
            ]
            if parts:
                tilde[i][j] = Scale(-1, Sum(parts))
    out = MapMatrix.from_entries(pres, tilde)
    _verify_inverse_pair(out, alpha.transpose(), "hat")
    return out


def free_pair(sigma, diag_inverses):
    """(bar, hat) for an upper-triangular multiplicative sigma."""
    bar = invert_triangular(sigma, diag_inverses)
    hat = tilde_of_lower(bar, [sigma.entries[i][i] for i in range(sigma.n)])
    return bar, hat
