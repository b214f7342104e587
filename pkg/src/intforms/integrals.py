"""Truncated exact linear algebra for the complex of integral forms.

Everything here works inside a finite window: hom-form coordinates carried
by normal words of bounded length.  The preset twists never lengthen words
(certified on the fly; violations raise with a witness), so the window is
an honest finite model.  On top of it: image ranks and cokernel
representatives of the connection, the Haar-type functional on quantum
SL(2), the annihilation law lambda(nabla(f)) = 0, connection integrals
with explicit preimages, and commutation of the ladder diagrams tying the
de Rham complex to the integral one.
"""

from __future__ import annotations

from . import dga
from .homconn import HomForm, dual_basis, nabla, nabla_n, twisted_partial
from .linalg import LinearSystem
from .ncalg import AlgElement, MIXED, zdegree

__all__ = [
    "FiltrationViolated",
    "ImageReport",
    "LadderDiagram",
    "LadderReport",
    "LambdaReport",
    "NoPreimageUpToBound",
    "SquareFails",
    "Truncation",
    "check_ladder",
    "check_lambda_annihilates",
    "image_rank",
    "integral_class",
    "sl2_lambda",
]


class FiltrationViolated(ValueError):
    pass


class NoPreimageUpToBound(ValueError):
    pass


class SquareFails(ValueError):
    pass


def _word_key(word):
    return (len(word), word)


def _pivot_key(word):
    # eliminate deglex-largest words first so cokernel classes get their
    # minimal representatives (the class of 1 shows up as 1, not as the
    # longest unhit word)
    return (-len(word),) + tuple(-g for g in word)


class Truncation:
    """Window of hom-form coordinates with words of length <= length_bound.

    degree restricts the codomain to one Z-degree block; columns whose
    image lands elsewhere are dropped, columns with images of mixed degree
    are a filtration violation.
    """

    def __init__(self, spec, length_bound, degree=None):
        self.spec = spec
        self.length_bound = length_bound
        self.degree = degree
        pres = spec.presentation
        self.words = tuple(pres.normal_words(length_bound))
        if degree is None:
            self.target_words = self.words
        else:
            self.target_words = tuple(
                pres.normal_words(length_bound, degree=degree)
            )

    def columns(self):
        for i in range(self.spec.n):
            for w in self.words:
                yield (i, w)

    def image(self, i, w):
        """nabla of the coordinate hom-form with value w at form i."""
        w = self.spec.presentation._coerce_word(w)
        value = twisted_partial(self.spec, i, self.spec.presentation.monomial(w))
        for word in value.terms:
            if len(word) > self.length_bound:
                raise FiltrationViolated(
                    f"nabla escapes the window: coordinate "
                    f"({self.spec.form_names[i]}, "
                    f"{self.spec.presentation.word_str(w)}) produced "
                    f"{self.spec.presentation.word_str(word)}"
                )
        return value

    def block_image(self, i, w):
        """image(), or None when the degree filter excludes the column."""
        w = self.spec.presentation._coerce_word(w)
        value = self.image(i, w)
        if self.degree is None or not value:
            return value
        deg = zdegree(value)
        if deg is MIXED:
            raise FiltrationViolated(
                f"image of ({self.spec.form_names[i]}, "
                f"{self.spec.presentation.word_str(w)}) mixes Z-degrees"
            )
        return value if deg == self.degree else None


class ImageReport:
    """Rank of the truncated connection and what its image misses."""

    def __init__(self, rank, cokernel, truncation):
        self.rank = rank
        self.cokernel = cokernel
        self.truncation = truncation

    @property
    def cokernel_dimension(self):
        return len(self.cokernel)

    def __repr__(self):
        return (
            f"<ImageReport rank {self.rank}, "
            f"cokernel dim {len(self.cokernel)}>"
        )


def image_rank(spec, length_bound, degree=None):
    """Row-reduce nabla on the window; cokernel classes come out as words.

    Representatives are exact: a window word is in the cokernel list iff
    its class is not hit, because the reduced row space has canonical
    pivot words independent of assembly order.
    """
    trunc = Truncation(spec, length_bound, degree)
    system = LinearSystem(key=_pivot_key)
    for i, w in trunc.columns():
        value = trunc.block_image(i, w)
        if value is None or not value:
            continue
        system.add(dict(value.terms))
    pivots = set(system.pivot_columns())
    pres = spec.presentation
    cokernel = tuple(
        pres.monomial(w) for w in trunc.target_words if w not in pivots
    )
    return ImageReport(system.rank(), cokernel, trunc)


def sl2_lambda(a):
    """Haar-type functional on quantum SL(2), normalised to 1 at 1.

    Supported on the powers (beta*gamma)^l, where it evaluates to
    (-1)^l (q - q^-1)/(q^(l+1) - q^-(l+1)); every other normal word,
    in particular anything containing alpha or delta, is sent to 0.
    """
    pres = a.presentation
    names = set(pres.generators)
    if not {"alpha", "beta", "gamma", "delta"} <= names:
        raise ValueError("the functional lives on the quantum SL(2) preset")
    at = {g: pres.generators.index(g) for g in ("alpha", "beta", "gamma", "delta")}
    ctx = pres.context
    q = ctx.parameter("q")
    total = ctx.zero
    for word, coeff in a.terms.items():
        if at["alpha"] in word or at["delta"] in word:
            continue
        m = sum(1 for g in word if g == at["beta"])
        n = len(word) - m
        if m != n:
            continue
        value = (q - q**-1) / (q ** (m + 1) - q ** (-m - 1))
        if m % 2:
            value = -value
        total = total + coeff * value
    return total


class LambdaReport:
    def __init__(self, checked, failures):
        self.checked = checked
        self.failures = failures

    @property
    def ok(self):
        return not self.failures

    def __repr__(self):
        return f"<LambdaReport {self.checked} checked, {len(self.failures)} failed>"


def check_lambda_annihilates(spec, length_bound, lam=None):
    """Certify lam(nabla(xi_i * w)) = 0 on every window coordinate.

    lam defaults to sl2_lambda; passing a different functional turns the
    same sweep into a control.
    """
    lam = sl2_lambda if lam is None else lam
    pres = spec.presentation
    checked = 0
    failures = []
    for i, xi in enumerate(dual_basis(spec, 1)):
        name = spec.form_names[spec.basis(1)[i][0]]
        for w in pres.normal_words(length_bound):
            value = lam(nabla(spec, xi * pres.monomial(w)))
            checked += 1
            if value:
                failures.append(
                    {
                        "name": f"lambda(nabla(dual({name})*{pres.word_str(w)}))",
                        "ok": False,
                        "witness": value,
                    }
                )
    return LambdaReport(checked, failures)


def integral_class(spec, a, length_bound):
    """Solve nabla(f) = a - c*1 inside the window; return (c, f).

    For Z-degree-0 input the scalar c certifies the class of a in the
    cokernel as c times the class of 1; nonzero homogeneous degrees force
    c = 0 and the solve is a plain preimage search.  The solution is
    substituted back before being returned.
    """
    pres = spec.presentation
    ctx = pres.context
    if not a:
        return ctx.zero, HomForm(spec, 1, {})
    degree = zdegree(a)
    if degree is MIXED:
        raise ValueError("integral classes need a Z-homogeneous element")
    trunc = Truncation(spec, length_bound)
    rows = {}
    for i, w in trunc.columns():
        value = trunc.image(i, w)
        if degree is not None and value:
            vdeg = zdegree(value)
            if vdeg is MIXED:
                raise FiltrationViolated(
                    f"image of ({spec.form_names[i]}, {pres.word_str(w)}) "
                    "mixes Z-degrees"
                )
            if vdeg != degree:
                continue
        for word, coeff in value.terms.items():
            rows.setdefault(word, {})[("f", i, w)] = coeff
    if degree == 0:
        rows.setdefault((), {})[("c",)] = ctx.one
    system = LinearSystem()
    support = set(rows) | set(a.terms)
    for word in sorted(support, key=_word_key):
        system.add(rows.get(word, {}), rhs={"target": a.coefficient(word)})
    solution = system.solve("target")
    if solution is None:
        raise NoPreimageUpToBound(
            f"no preimage of {a} with coordinates of length <= {length_bound}"
        )
    c = solution.get(("c",), ctx.zero)
    values = {}
    for label, coeff in solution.items():
        if label == ("c",):
            continue
        _, i, w = label
        have = values.get((i,), pres.zero)
        values[(i,)] = have + pres.monomial(w, coeff=coeff)
    f = HomForm(spec, 1, values)
    if nabla(spec, f) + pres.scalar(c) != a:
        raise RuntimeError("solver returned an invalid preimage")
    return c, f


class LadderDiagram:
    """Vertical maps comparing the de Rham row to the integral row.

    verticals[k] sends each basis k-form word (the empty word at k = 0) to
    its image under the k-th vertical map: a hom-form of degree top-k
    below the top, an algebra element at the top.  Right-linearity does
    the rest.
    """

    def __init__(self, spec, verticals):
        top = spec.top_degree
        if len(verticals) != top + 1:
            raise ValueError(f"expected {top + 1} vertical maps")
        table = []
        for k, given in enumerate(verticals):
            expected = ((),) if k == 0 else spec.basis(k)
            images = {}
            for word, image in given.items():
                word = () if k == 0 and word == () else spec._coerce_form_word(word)
                images[word] = image
            if set(images) != set(expected):
                raise ValueError(f"vertical {k} must cover the degree-{k} basis")
            for word, image in images.items():
                if k == top:
                    if not isinstance(image, AlgElement):
                        raise ValueError("the top vertical lands in the algebra")
                elif not (isinstance(image, HomForm) and image.degree == top - k):
                    raise ValueError(
                        f"vertical {k} must send {spec.word_str(word)} to a "
                        f"degree-{top - k} hom-form"
                    )
            table.append(images)
        self.spec = spec
        self.verticals = table

    def apply(self, k, omega):
        """V_k on an element (k = 0) or a form of degree k."""
        spec = self.spec
        if k == 0:
            return self.verticals[0][()] * omega
        rights = {}
        for word, coeff in omega.coords.items():
            for e, r in dga.right_coords(spec, coeff, word).items():
                have = rights.get(e)
                rights[e] = r if have is None else have + r
        total = None
        for e, r in rights.items():
            piece = self.verticals[k][e] * r
            total = piece if total is None else total + piece
        if total is not None:
            return total
        if k == spec.top_degree:
            return spec.presentation.zero
        return HomForm(spec, spec.top_degree - k, {})


class LadderReport:
    """Square-by-square commutation plus per-level bijectivity ranks."""

    def __init__(self, squares_checked, square_failures, verticals):
        self.squares_checked = squares_checked
        self.square_failures = square_failures
        self.verticals = verticals

    @property
    def ok(self):
        return not self.square_failures and all(v["ok"] for v in self.verticals)

    def __repr__(self):
        state = "ok" if self.ok else "FAILED"
        return (
            f"<LadderReport {self.squares_checked} squares, "
            f"{len(self.square_failures)} failed, {state}>"
        )


def _hom_vector(f):
    return {(word, u): c for word, value in f.values.items()
            for u, c in value.terms.items()}


def check_ladder(diagram, length_bound, strict=False):
    """Walk every square on the windowed basis and rank the verticals.

    A square at level k compares V_(k+1)(d omega) with the level-(top-k-1)
    connection applied to V_k(omega), omega running over basis-word times
    normal-word products.  Verticals are bijective on the window iff their
    matrix rank matches both dimensions.
    """
    spec = diagram.spec
    pres = spec.presentation
    top = spec.top_degree
    words = tuple(pres.normal_words(length_bound))
    squares_checked = 0
    square_failures = []
    for k in range(top):
        sources = ((),) if k == 0 else spec.basis(k)
        level = top - k - 1
        for e in sources:
            for w in words:
                a = pres.monomial(w)
                if k == 0:
                    omega = a
                    d_omega = dga.d(spec, a)
                else:
                    omega = dga.right_mul(
                        spec, spec.basis_form(e), a
                    )
                    d_omega = dga.d(spec, omega)
                lhs = diagram.apply(k + 1, d_omega)
                below = diagram.apply(k, omega)
                if level == 0:
                    rhs = nabla(spec, below)
                else:
                    rhs = nabla_n(spec, level, below)
                squares_checked += 1
                if lhs != rhs:
                    square_failures.append(
                        {
                            "level": k,
                            "source": "1" if k == 0 else spec.word_str(e),
                            "word": pres.word_str(w),
                            "lhs": lhs,
                            "rhs": rhs,
                        }
                    )
    verticals = []
    for k in range(top + 1):
        sources = ((),) if k == 0 else spec.basis(k)
        n_target = 1 if k == top else len(spec.basis(top - k))
        system = LinearSystem()
        for e in sources:
            image = diagram.verticals[k][e]
            for w in words:
                value = image * pres.monomial(w)
                if k == top:
                    vector = dict(value.terms)
                else:
                    vector = _hom_vector(value)
                for label in vector:
                    u = label if k == top else label[1]
                    if len(u) > length_bound:
                        raise FiltrationViolated(
                            f"vertical {k} escapes the window on "
                            f"{pres.word_str(w)}"
                        )
                if vector:
                    system.add(vector)
        domain = len(sources) * len(words)
        codomain = n_target * len(words)
        rank = system.rank()
        verticals.append(
            {
                "level": k,
                "rank": rank,
                "domain": domain,
                "codomain": codomain,
                "ok": rank == domain == codomain,
            }
        )
    report = LadderReport(squares_checked, square_failures, verticals)
    if strict and not report.ok:
        if square_failures:
            first = square_failures[0]
            raise SquareFails(
                f"square at level {first['level']} fails on "
                f"{first['source']} * {first['word']}: "
                f"{first['lhs']} != {first['rhs']}"
            )
        bad = next(v for v in report.verticals if not v["ok"])
        raise SquareFails(
            f"vertical {bad['level']} is not bijective on the window "
            f"(rank {bad['rank']}, domain {bad['domain']}, "
            f"codomain {bad['codomain']})"
        )
    return report
