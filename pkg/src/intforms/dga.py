"""Differential graded algebra on top of a free twisted multi-derivation.

Degree one is the free left module on the basis forms, with the right
action routed through sigma.  Higher degrees are presented by rewrite
rules on adjacent basis-form pairs; the exterior differential combines
the derivation rows (degree 0) with declared values on the basis forms.
All rewrite data is validated at construction: rules must preserve
degree, strictly decrease the canonical form order, admit one normal
form regardless of rewrite position, and kill every word above the top
degree.
"""

from __future__ import annotations

from itertools import product

from .linalg import LinearSystem
from .ncalg import AlgElement, RuleOrientationError

__all__ = [
    "CalculusSpec",
    "DSquaredReport",
    "DegreeOverflow",
    "DensityWitness",
    "FormElement",
    "check_d_squared",
    "check_density",
    "d",
    "left_from_right",
    "mul",
    "right_mul",
]


class DegreeOverflow(ValueError):
    pass


class CalculusSpec:
    """Generators, rewrite rules, and differentials of one graded calculus.

    form_names is index-aligned with the derivation rows of ``tmd``.
    form_order lists the same names in ascending canonical order (defaults
    to form_names); rule right-hand sides must be strictly smaller in the
    induced degree-lexicographic order.  rules maps a word of form names to
    {word: scalar}; d_on_forms maps a form name to its degree-2 value
    (omitted names differentiate to zero).  bases optionally pins the
    stored basis order for degrees >= 2.
    """

    def __init__(
        self,
        tmd,
        form_names,
        rules,
        d_on_forms=None,
        top_degree=2,
        form_order=None,
        bases=None,
    ):
        self.tmd = tmd
        self.presentation = tmd.presentation
        self.context = self.presentation.context
        self.form_names = tuple(form_names)
        self.n = len(self.form_names)
        if self.n != tmd.n:
            raise ValueError("one form name is needed per derivation row")
        if len(set(self.form_names)) != self.n:
            raise ValueError("duplicate form names")
        self._index = {name: i for i, name in enumerate(self.form_names)}
        if top_degree < 1:
            raise ValueError("top degree must be at least 1")
        self.top_degree = top_degree

        order = tuple(form_order) if form_order is not None else self.form_names
        if sorted(order) != sorted(self.form_names):
            raise ValueError("form order must permute the form names")
        self._rank = {self._index[name]: pos for pos, name in enumerate(order)}

        self._rules = {}
        for lhs, rhs in rules.items():
            self._add_rule(lhs, rhs)
        self._reduce_memo = {}
        self._dword_memo = {}
        self._validate_rewriting()
        self._bases = self._build_bases(bases)

        self.d_on_forms = {}
        for name in self.form_names:
            value = (d_on_forms or {}).get(name)
            self.d_on_forms[self._index[name]] = self._coerce_d_value(name, value)

    # -- construction helpers -------------------------------------------------

    def index(self, name):
        if isinstance(name, str):
            try:
                return self._index[name]
            except KeyError:
                raise KeyError(f"unknown form name {name!r}") from None
        if not 0 <= name < self.n:
            raise KeyError(f"form index {name} out of range")
        return name

    def form_word(self, *names):
        return tuple(self.index(n) for n in names)

    def _coerce_form_word(self, word):
        if isinstance(word, str):
            return (self.index(word),)
        return tuple(self.index(l) for l in word)

    def word_str(self, word):
        return ".".join(self.form_names[i] for i in word)

    def _rank_key(self, word):
        return tuple(self._rank[l] for l in word)

    def _add_rule(self, lhs, rhs):
        lhs = self._coerce_form_word(lhs)
        if len(lhs) < 2:
            raise ValueError("rule left-hand sides must have degree at least 2")
        out = {}
        for word, coeff in rhs.items():
            word = self._coerce_form_word(word)
            coeff = self.context.coerce(coeff)
            if not coeff:
                continue
            if len(word) != len(lhs):
                raise ValueError(
                    f"rule {self.word_str(lhs)} -> ... does not preserve degree"
                )
            if self._rank_key(word) >= self._rank_key(lhs):
                raise RuleOrientationError(
                    f"form rule {self.word_str(lhs)} -> ... does not decrease "
                    f"the canonical order (offending word {self.word_str(word)})"
                )
            out[word] = out.get(word, self.context.zero) + coeff
        self._rules.setdefault(lhs[0], []).append(
            (lhs, {w: c for w, c in out.items() if c})
        )

    def _redexes(self, word):
        hits = []
        for pos in range(len(word)):
            for lhs, rhs in self._rules.get(word[pos], ()):
                if word[pos : pos + len(lhs)] == lhs:
                    hits.append((pos, lhs, rhs))
        return hits

    def reduce_word(self, word):
        """Canonical form of a raw form word as {basis word: scalar}."""
        word = self._coerce_form_word(word)
        out = self._reduce_memo.get(word)
        if out is None:
            hits = self._redexes(word)
            if not hits:
                out = {word: self.context.one}
            else:
                pos, lhs, rhs = hits[0]
                out = {}
                for repl, coeff in rhs.items():
                    sub = self.reduce_word(word[:pos] + repl + word[pos + len(lhs) :])
                    for w, s in sub.items():
                        acc = out.get(w)
                        acc = coeff * s if acc is None else acc + coeff * s
                        if acc:
                            out[w] = acc
                        elif w in out:
                            del out[w]
            self._reduce_memo[word] = out
        return out

    def _nf_all_positions(self, word, memo):
        known = memo.get(word)
        if known is not None:
            return known
        hits = self._redexes(word)
        if not hits:
            result = {word: self.context.one}
        else:
            result = None
            for pos, lhs, rhs in hits:
                out = {}
                for repl, coeff in rhs.items():
                    sub = self._nf_all_positions(
                        word[:pos] + repl + word[pos + len(lhs) :], memo
                    )
                    for w, s in sub.items():
                        acc = out.get(w)
                        acc = coeff * s if acc is None else acc + coeff * s
                        if acc:
                            out[w] = acc
                        elif w in out:
                            del out[w]
                if result is None:
                    result = out
                elif out != result:
                    raise ValueError(
                        f"form rules are not confluent: {self.word_str(word)} "
                        f"reduces to different normal forms"
                    )
        memo[word] = result
        return result

    def _validate_rewriting(self):
        memo = {}
        for length in range(2, self.top_degree + 2):
            for seq in product(range(self.n), repeat=length):
                nf = self._nf_all_positions(seq, memo)
                if length == self.top_degree + 1 and nf:
                    raise ValueError(
                        f"form word {self.word_str(seq)} of degree {length} "
                        f"does not reduce to zero above the top degree"
                    )

    def _build_bases(self, declared):
        bases = {1: tuple(sorted(((i,) for i in range(self.n)), key=self._rank_key))}
        for k in range(2, self.top_degree + 1):
            words = [
                seq
                for seq in product(range(self.n), repeat=k)
                if not self._redexes(seq)
            ]
            words.sort(key=self._rank_key)
            bases[k] = tuple(words)
        for k, wanted in (declared or {}).items():
            wanted = tuple(self._coerce_form_word(w) for w in wanted)
            if sorted(wanted) != sorted(bases.get(k, ())):
                have = ", ".join(self.word_str(w) for w in bases.get(k, ()))
                raise ValueError(
                    f"declared degree-{k} basis disagrees with the rules "
                    f"(irreducible words: {have})"
                )
            bases[k] = wanted
        return bases

    def _coerce_d_value(self, name, value):
        if value is None:
            return FormElement(self, 2, {})
        if isinstance(value, str):
            value = self.parse(value)
        elif isinstance(value, FormElement):
            if value.spec is not self:
                raise ValueError("d value belongs to a different calculus")
        else:
            value = self.form(2, value)
        if value.coords and value.degree != 2:
            raise ValueError(f"d {name} must be a degree-2 form")
        if value.coords and self.top_degree < 2:
            raise ValueError(f"d {name} exceeds the top degree")
        return value if value.degree == 2 else FormElement(self, 2, value.coords)

    # -- elements ---------------------------------------------------------

    def basis(self, degree):
        """Stored basis words of the given degree (empty above the top)."""
        if degree < 1:
            raise ValueError("degree must be at least 1")
        return self._bases.get(degree, ())

    def zero(self, degree):
        return FormElement(self, degree, {})

    def basis_form(self, word):
        word = self._coerce_form_word(word)
        coords = {}
        one = self.presentation.one
        for w, s in self.reduce_word(word).items():
            coords[w] = s * one
        return FormElement(self, len(word), coords)

    def form(self, degree, coords):
        """Build a form from {word: coefficient}; words are reduced first."""
        out = {}
        for word, coeff in coords.items():
            word = self._coerce_form_word(word)
            if len(word) != degree:
                raise ValueError(
                    f"word {self.word_str(word)} has degree {len(word)}, "
                    f"expected {degree}"
                )
            if not isinstance(coeff, AlgElement):
                coeff = self.presentation.scalar(coeff)
            if not coeff:
                continue
            for w, s in self.reduce_word(word).items():
                _merge(out, w, s * coeff)
        return FormElement(self, degree, out)

    def parse(self, text):
        from .parser import parse_form_terms

        terms = parse_form_terms(self.presentation, self.form_names, text)
        degree = None
        out = {}
        for coeff, names in terms:
            if not names:
                if coeff:
                    raise ValueError("expression has a term with no form word")
                continue
            word = self.form_word(*names)
            if degree is None:
                degree = len(word)
            elif len(word) != degree:
                raise ValueError("expression mixes degrees")
            if coeff:
                for w, s in self.reduce_word(word).items():
                    _merge(out, w, s * coeff)
        if degree is None:
            raise ValueError("expression has no form word")
        return FormElement(self, degree, out)

    def __repr__(self):
        names = ", ".join(self.form_names)
        return f"<CalculusSpec [{names}] top degree {self.top_degree}>"


def _merge(coords, word, elem):
    acc = coords.get(word)
    acc = elem if acc is None else acc + elem
    if acc:
        coords[word] = acc
    elif word in coords:
        del coords[word]


class FormElement:
    """Degree-homogeneous form: left coefficients on basis form words."""

    __slots__ = ("spec", "degree", "coords")

    def __init__(self, spec, degree, coords):
        self.spec = spec
        self.degree = degree
        self.coords = coords

    def coefficient(self, word):
        word = self.spec._coerce_form_word(word)
        return self.coords.get(word, self.spec.presentation.zero)

    def is_zero(self):
        return not self.coords

    def __bool__(self):
        return bool(self.coords)

    def _check_mate(self, other):
        if self.spec is not other.spec:
            raise ValueError("forms belong to different calculi")
        if self.degree != other.degree:
            raise ValueError(
                f"cannot mix degrees {self.degree} and {other.degree}"
            )

    def __add__(self, other):
        if not isinstance(other, FormElement):
            return NotImplemented
        self._check_mate(other)
        coords = dict(self.coords)
        for word, elem in other.coords.items():
            _merge(coords, word, elem)
        return FormElement(self.spec, self.degree, coords)

    def __sub__(self, other):
        if not isinstance(other, FormElement):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return FormElement(
            self.spec, self.degree, {w: -e for w, e in self.coords.items()}
        )

    def __mul__(self, other):
        if isinstance(other, FormElement):
            return mul(self.spec, self, other)
        if isinstance(other, AlgElement):
            return right_mul(self.spec, self, other)
        try:
            coeff = self.spec.context.coerce(other)
        except TypeError:
            return NotImplemented
        return FormElement(
            self.spec,
            self.degree,
            {w: coeff * e for w, e in self.coords.items()} if coeff else {},
        )

    def __rmul__(self, other):
        if isinstance(other, AlgElement):
            coords = {}
            for word, elem in self.coords.items():
                _merge(coords, word, other * elem)
            return FormElement(self.spec, self.degree, coords)
        return self.__mul__(other)

    def __eq__(self, other):
        if not isinstance(other, FormElement):
            return NotImplemented
        return (
            self.spec is other.spec
            and self.degree == other.degree
            and self.coords == other.coords
        )

    def __str__(self):
        if not self.coords:
            return "0"
        spec = self.spec
        chunks = []
        for word in sorted(self.coords, key=spec._rank_key):
            text = _form_term_str(spec, word, self.coords[word])
            if not chunks:
                chunks.append(text)
            elif text.startswith("-"):
                chunks.append(f" - {text[1:]}")
            else:
                chunks.append(f" + {text}")
        return "".join(chunks)

    def __repr__(self):
        return f"<FormElement deg {self.degree}: {self}>"


def _form_term_str(spec, word, coeff):
    body = spec.word_str(word)
    one = spec.presentation.one
    if coeff == one:
        return body
    if coeff == -one:
        return f"-{body}"
    text = str(coeff)
    if len(coeff.terms) > 1:
        return f"({text})*{body}"
    return f"{text}*{body}"


# -- module operations --------------------------------------------------------


def _word_action(spec, word, a):
    """Push a through the form word: word*a = sum coeffs[w]*w, raw words w."""
    if not a:
        return {}
    sigma = spec.tmd.sigma
    out = {(): a}
    for letter in reversed(word):
        nxt = {}
        for w, coeff in out.items():
            for j in range(spec.n):
                c = sigma.entry(letter, j).apply(coeff)
                if c:
                    _merge(nxt, (j,) + w, c)
        out = nxt
    return out


def right_mul(spec, x, a):
    """The right action of the algebra, one sigma twist per basis letter."""
    if not isinstance(a, AlgElement):
        a = spec.presentation.scalar(a)
    coords = {}
    for word, cu in x.coords.items():
        for w, c in _word_action(spec, word, a).items():
            prod = cu * c
            for bw, s in spec.reduce_word(w).items():
                _merge(coords, bw, s * prod)
    return FormElement(spec, x.degree, coords)


def left_from_right(spec, a, form):
    """Right coefficients of a*omega_i: entry j rides to the right of omega_j."""
    i = spec.index(form)
    bar = spec.tmd.sigma_bar
    return tuple(bar.entry(j, i).apply(a) for j in range(spec.n))


def right_coords(spec, a, word):
    """Right coefficients of a*word: a*word = sum_w w*out[w], w basis words."""
    bar = spec.tmd.sigma_bar
    raw = {(): a} if a else {}
    for letter in word:
        nxt = {}
        for w, c in raw.items():
            for k in range(spec.n):
                cc = bar.entry(k, letter).apply(c)
                if cc:
                    _merge(nxt, w + (k,), cc)
        raw = nxt
    out = {}
    for w, c in raw.items():
        # rule coefficients are scalars, so they slide past right coefficients
        for bw, s in spec.reduce_word(w).items():
            _merge(out, bw, s * c)
    return out


def mul(spec, x, y):
    """Product of forms; the right factor's coefficients pass through sigma."""
    if x.spec is not spec or y.spec is not spec:
        raise ValueError("forms belong to a different calculus")
    degree = x.degree + y.degree
    coords = {}
    for u, cu in x.coords.items():
        for v, cv in y.coords.items():
            for w, c in _word_action(spec, u, cv).items():
                prod = cu * c
                for bw, s in spec.reduce_word(w + v).items():
                    _merge(coords, bw, s * prod)
    return FormElement(spec, degree, coords)


def d(spec, x):
    """Exterior differential; raises DegreeOverflow at the top degree."""
    pres = spec.presentation
    if isinstance(x, AlgElement):
        row = spec.tmd.partial(x)
        return FormElement(spec, 1, {(i,): c for i, c in enumerate(row) if c})
    if x.spec is not spec:
        raise ValueError("form belongs to a different calculus")
    if not x.coords:
        return FormElement(spec, x.degree + 1, {})
    if x.degree >= spec.top_degree:
        raise DegreeOverflow(
            f"d on degree {x.degree} leaves the calculus (top degree "
            f"{spec.top_degree})"
        )
    out = FormElement(spec, x.degree + 1, {})
    for word, a in x.coords.items():
        unit = FormElement(spec, len(word), {word: pres.one})
        out = out + mul(spec, d(spec, a), unit) + a * _d_word(spec, word)
    return out


def _d_word(spec, word):
    hit = spec._dword_memo.get(word)
    if hit is None:
        if len(word) == 1:
            hit = spec.d_on_forms[word[0]]
        else:
            pres = spec.presentation
            head, rest = word[:1], word[1:]
            unit_rest = FormElement(spec, len(rest), {rest: pres.one})
            unit_head = FormElement(spec, 1, {head: pres.one})
            hit = mul(spec, spec.d_on_forms[head[0]], unit_rest) - mul(
                spec, unit_head, _d_word(spec, rest)
            )
        spec._dword_memo[word] = hit
    return hit


class DSquaredReport:
    """Outcome of check_d_squared: failure witnesses are nonzero forms."""

    def __init__(self, checked, failures):
        self.checked = checked
        self.failures = failures

    @property
    def ok(self):
        return not self.failures

    def __repr__(self):
        return f"<DSquaredReport {self.checked} checks, {len(self.failures)} failed>"


def check_d_squared(spec, length_bound):
    """Apply d twice to every short basis word and to each basis form."""
    pres = spec.presentation
    failures = []
    checked = 0
    for word in pres.normal_words(length_bound):
        dd = d(spec, d(spec, pres.monomial(word)))
        checked += 1
        if dd:
            failures.append({"input": pres.word_str(word) or "1", "witness": dd})
    for i, name in enumerate(spec.form_names):
        checked += 1
        value = spec.d_on_forms[i]
        try:
            dd = d(spec, value)
        except DegreeOverflow:
            failures.append({"input": f"d {name}", "witness": value})
            continue
        if dd:
            failures.append({"input": f"d {name}", "witness": dd})
    return DSquaredReport(checked, failures)


class DensityWitness:
    """Families (a_t, b_t) per index with sum_t a_t*partial_k(b_t) = delta_ik."""

    def __init__(self, tmd, pairs):
        self.tmd = tmd
        self.pairs = pairs

    def holds(self):
        pres = self.tmd.presentation
        for i in range(self.tmd.n):
            totals = [pres.zero] * self.tmd.n
            for a, b in self.pairs[i]:
                row = self.tmd.partial(b)
                for k in range(self.tmd.n):
                    totals[k] = totals[k] + a * row[k]
            for k in range(self.tmd.n):
                want = pres.one if k == i else pres.zero
                if totals[k] != want:
                    return False
        return True

    def __repr__(self):
        sizes = ", ".join(str(len(p)) for p in self.pairs)
        return f"<DensityWitness family sizes [{sizes}]>"


def check_density(spec, length_bound):
    """Solve for families witnessing density over words up to the bound.

    Returns a verified DensityWitness, or None when no witness exists
    within the bound.
    """
    tmd = spec.tmd
    pres = spec.presentation
    n = tmd.n
    words = pres.normal_words(length_bound)
    rows = {(k, ()): {} for k in range(n)}
    for v in words:
        if not v:
            continue
        partial_v = tmd.partial(pres.monomial(v))
        for u in words:
            au = pres.monomial(u)
            for k in range(n):
                if not partial_v[k]:
                    continue
                prod = au * partial_v[k]
                for w, s in prod.terms.items():
                    rows.setdefault((k, w), {})[(u, v)] = s
    system = LinearSystem()
    for (k, w), coeffs in sorted(rows.items()):
        rhs = {k: pres.context.one} if w == () else None
        system.add(coeffs, rhs)
    pairs = []
    for i in range(n):
        sol = system.solve(i)
        if sol is None:
            return None
        family = [
            (pres.monomial(u, coeff=c), pres.monomial(v)) for (u, v), c in sorted(sol.items())
        ]
        pairs.append(tuple(family))
    witness = DensityWitness(tmd, tuple(pairs))
    if not witness.holds():
        raise RuntimeError("density solver produced an invalid witness")
    return witness
