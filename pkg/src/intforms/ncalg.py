"""Presented noncommutative algebras with confluent word rewriting.

An algebra is a finite generator list with an ordered rewrite system whose
left-hand sides are words and whose right-hand sides are linear combinations
of strictly deglex-smaller words.  Elements are finite linear combinations of
irreducible ("normal") words with ScalarRF coefficients.  Optional extras: a
Z-grading on generators and Hopf structure maps (coproduct, counit, antipode
and its inverse on generators, extended (anti)multiplicatively).
"""
from __future__ import annotations

from fractions import Fraction

from .scalars import ScalarRF


class UnknownGenerator(KeyError):
    pass


class ReductionBudgetExceeded(RuntimeError):
    pass


class GradingAbsent(ValueError):
    pass


class RuleOrientationError(ValueError):
    """A rewrite rule fails to strictly decrease the deglex word order."""


class _Mixed:
    __slots__ = ()

    def __repr__(self):
        return "Mixed"


#: zdegree() result for an element whose words have unequal degrees.
MIXED = _Mixed()

DEFAULT_BUDGET = 10**6


def _deglex_key(word):
    return (len(word), word)


class _Budget:
    __slots__ = ("left",)

    def __init__(self, limit):
        self.left = limit

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise ReductionBudgetExceeded("rewrite step budget exhausted")


class Presentation:
    """Generators in rewrite order plus an oriented rewrite system."""

    def __init__(self, context, generators, rules=(), grading=None, hopf=None):
        self.context = context
        self.generators = tuple(generators)
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("duplicate generator names")
        self._index = {name: i for i, name in enumerate(self.generators)}
        self.rules = []
        self._rules_at = {i: [] for i in range(len(self.generators))}
        self._max_lhs = 1
        self._nf_cache = {}
        self.grading = None
        if grading is not None:
            self.grading = tuple(int(grading[name]) for name in self.generators)
        for lhs, rhs in rules:
            self._add_rule(lhs, rhs)
        self.hopf = hopf
        self.one = AlgElement(self, {(): context.one})
        self.zero = AlgElement(self, {})

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise UnknownGenerator(name) from None

    def word(self, *names):
        return tuple(self.index(n) if isinstance(n, str) else self._check_letter(n) for n in names)

    def _check_letter(self, i):
        if not 0 <= i < len(self.generators):
            raise UnknownGenerator(f"generator index {i} out of range")
        return i

    def _coerce_word(self, word):
        return self.word(*word)

    def _add_rule(self, lhs, rhs):
        lhs = self._coerce_word(lhs)
        if not lhs:
            raise ValueError("empty rule left-hand side")
        coeffs = {}
        for word, coeff in rhs.items():
            word = self._coerce_word(word)
            coeff = self.context.coerce(coeff)
            if coeff:
                coeffs[word] = coeffs.get(word, self.context.zero) + coeff
        coeffs = {w: c for w, c in coeffs.items() if c}
        key = _deglex_key(lhs)
        for word in coeffs:
            if _deglex_key(word) >= key:
                raise RuleOrientationError(
                    f"rule {self.word_str(lhs)} -> ... does not decrease deglex "
                    f"(offending word {self.word_str(word)})"
                )
        if self.grading is not None:
            lhs_deg = sum(self.grading[g] for g in lhs)
            for word in coeffs:
                if sum(self.grading[g] for g in word) != lhs_deg:
                    raise ValueError(
                        f"rule {self.word_str(lhs)} is not degree-homogeneous"
                    )
        self.rules.append((lhs, coeffs))
        self._rules_at[lhs[0]].append((lhs, coeffs))
        self._max_lhs = max(self._max_lhs, len(lhs))

    # -- normal forms --------------------------------------------------------

    def _find_redex(self, word):
        rules_at = self._rules_at
        for pos, letter in enumerate(word):
            for lhs, coeffs in rules_at[letter]:
                if word[pos : pos + len(lhs)] == lhs:
                    return pos, lhs, coeffs
        return None

    def _normal_word(self, word, budget):
        cached = self._nf_cache.get(word)
        if cached is not None:
            return cached
        hit = self._find_redex(word)
        if hit is None:
            result = {word: self.context.one}
        else:
            pos, lhs, coeffs = hit
            budget.spend()
            head, tail = word[:pos], word[pos + len(lhs) :]
            result = {}
            for rword, rcoeff in coeffs.items():
                for nword, ncoeff in self._normal_word(head + rword + tail, budget).items():
                    acc = result.get(nword)
                    acc = rcoeff * ncoeff if acc is None else acc + rcoeff * ncoeff
                    if acc:
                        result[nword] = acc
                    elif nword in result:
                        del result[nword]
        self._nf_cache[word] = result
        return result

    def element(self, coeffs, budget=DEFAULT_BUDGET):
        """Normalize a {word: scalar} mapping into an AlgElement."""
        bud = _Budget(budget)
        out = {}
        for word, coeff in coeffs.items():
            word = self._coerce_word(word)
            coeff = self.context.coerce(coeff)
            if not coeff:
                continue
            for nword, ncoeff in self._normal_word(word, bud).items():
                acc = out.get(nword)
                acc = coeff * ncoeff if acc is None else acc + coeff * ncoeff
                if acc:
                    out[nword] = acc
                elif nword in out:
                    del out[nword]
        return AlgElement(self, out)

    def monomial(self, word, coeff=1):
        return self.element({tuple(word): coeff})

    def gen(self, name):
        return AlgElement(self, {(self.index(name),): self.context.one})

    def scalar(self, value):
        value = self.context.coerce(value)
        return AlgElement(self, {(): value} if value else {})

    def parse(self, text):
        from .parser import parse_element

        return parse_element(self, text)

    # -- basis enumeration ----------------------------------------------------

    def is_normal_word(self, word):
        return self._find_redex(self._coerce_word(word)) is None

    def normal_words(self, max_len, degree=None):
        """Normal words of length <= max_len in deglex order.

        With degree set (graded presentations only), keep words of that
        Z-degree.
        """
        if degree is not None and self.grading is None:
            raise GradingAbsent("presentation has no grading")
        layer = [()]
        out = [()]
        n = len(self.generators)
        for _ in range(max_len):
            nxt = []
            for word in layer:
                for g in range(n):
                    cand = word + (g,)
                    if self._new_suffix_clean(cand):
                        nxt.append(cand)
            out.extend(nxt)
            layer = nxt
        if degree is not None:
            out = [w for w in out if sum(self.grading[g] for g in w) == degree]
        return out

    def _new_suffix_clean(self, word):
        # word[:-1] is already normal, so only suffixes ending at the new
        # letter can contain a fresh redex.
        for k in range(2, min(self._max_lhs, len(word)) + 1):
            tail = word[-k:]
            for lhs, _ in self._rules_at[tail[0]]:
                if tail == lhs:
                    return False
        for lhs, _ in self._rules_at[word[-1]]:
            if len(lhs) == 1:
                return False
        return True

    def word_degree(self, word):
        if self.grading is None:
            raise GradingAbsent("presentation has no grading")
        return sum(self.grading[g] for g in self._coerce_word(word))

    def word_str(self, word):
        if not word:
            return "1"
        parts = []
        i = 0
        while i < len(word):
            j = i
            while j < len(word) and word[j] == word[i]:
                j += 1
            name = self.generators[word[i]]
            parts.append(name if j - i == 1 else f"{name}^{j - i}")
            i = j
        return "*".join(parts)

    def __repr__(self):
        return f"<Presentation {'*'.join(self.generators)}, {len(self.rules)} rules>"


class AlgElement:
    """Linear combination of normal words; always kept in normal form."""

    __slots__ = ("presentation", "terms")
    __hash__ = None

    def __init__(self, presentation, terms):
        self.presentation = presentation
        self.terms = terms

    def _same(self, other):
        """Coerce to a mate AlgElement, or None for foreign types."""
        if isinstance(other, AlgElement):
            if other.presentation is not self.presentation:
                raise ValueError("elements of different presentations")
            return other
        if isinstance(other, (int, Fraction, ScalarRF)):
            # scalars embed via the unit
            return self.presentation.scalar(other)
        return None

    def __add__(self, other):
        other = self._same(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for word, coeff in other.terms.items():
            acc = out.get(word)
            acc = coeff if acc is None else acc + coeff
            if acc:
                out[word] = acc
            elif word in out:
                del out[word]
        return AlgElement(self.presentation, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgElement(self.presentation, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        other = self._same(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._same(other)
        if other is None:
            return NotImplemented
        return other - self

    def scale(self, coeff):
        coeff = self.presentation.context.coerce(coeff)
        if not coeff:
            return AlgElement(self.presentation, {})
        return AlgElement(self.presentation, {w: coeff * c for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, ScalarRF)):
            return self.scale(other)
        other = self._same(other)
        if other is None:
            return NotImplemented
        pres = self.presentation
        bud = _Budget(DEFAULT_BUDGET)
        out = {}
        for wa, ca in self.terms.items():
            for wb, cb in other.terms.items():
                coeff = ca * cb
                for nword, ncoeff in pres._normal_word(wa + wb, bud).items():
                    acc = out.get(nword)
                    acc = coeff * ncoeff if acc is None else acc + coeff * ncoeff
                    if acc:
                        out[nword] = acc
                    elif nword in out:
                        del out[nword]
        return AlgElement(pres, out)

    def __rmul__(self, other):
        if isinstance(other, (int, ScalarRF)):
            return self.scale(other)
        other = self._same(other)
        if other is None:
            return NotImplemented
        return other * self

    def __truediv__(self, other):
        # scalar denominators only; the algebra has no quotients
        if isinstance(other, AlgElement):
            return NotImplemented
        coeff = self.presentation.context.coerce(other)
        return self.scale(1 / coeff)

    def __pow__(self, n):
        n = int(n)
        if n < 0:
            raise ValueError("negative powers are not defined in the algebra")
        out = self.presentation.one
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, AlgElement):
            return self.presentation is other.presentation and self.terms == other.terms
        if isinstance(other, (int, ScalarRF)):
            return self == self.presentation.scalar(other)
        return NotImplemented

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def coefficient(self, word):
        word = self.presentation._coerce_word(word)
        return self.terms.get(word, self.presentation.context.zero)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda wc: _deglex_key(wc[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        pres = self.presentation
        chunks = []
        for word, coeff in self.sorted_terms():
            text = _term_str(pres, word, coeff)
            if not chunks:
                chunks.append(text)
            elif text.startswith("-"):
                chunks.append(f" - {text[1:]}")
            else:
                chunks.append(f" + {text}")
        return "".join(chunks)

    def __repr__(self):
        return f"<AlgElement {self}>"


def _coeff_needs_parens(coeff):
    return len(coeff.numer_terms()) > 1


def _term_str(pres, word, coeff):
    if not word:
        text = str(coeff)
        return f"({text})" if _coeff_needs_parens(coeff) else text
    body = pres.word_str(word)
    if coeff == 1:
        return body
    if coeff == -1:
        return f"-{body}"
    text = str(coeff)
    if _coeff_needs_parens(coeff):
        text = f"({text})"
    return f"{text}*{body}"


# -- spec surface -------------------------------------------------------------


def normalize(presentation, coeffs, budget=DEFAULT_BUDGET):
    """Fixed point of exhaustive leftmost-innermost rewriting of a raw map."""
    if isinstance(coeffs, AlgElement):
        coeffs = coeffs.terms
    return presentation.element(coeffs, budget=budget)


def mul(a, b):
    if a.presentation is not b.presentation:
        raise ValueError("elements do not belong to the same presentation")
    return a * b


def zdegree(a):
    """Common Z-degree of the element's words, or MIXED."""
    presentation = a.presentation
    if presentation.grading is None:
        raise GradingAbsent("presentation has no grading")
    degree = None
    for word in a.terms:
        d = sum(presentation.grading[g] for g in word)
        if degree is None:
            degree = d
        elif degree != d:
            return MIXED
    return 0 if degree is None else degree


class ConfluenceReport:
    def __init__(self, ambiguities):
        self.ambiguities = ambiguities

    @property
    def failures(self):
        return [a for a in self.ambiguities if not a["resolved"]]

    @property
    def ok(self):
        return not self.failures

    def __repr__(self):
        return (
            f"<ConfluenceReport {len(self.ambiguities)} ambiguities, "
            f"{len(self.failures)} unresolved>"
        )


def check_local_confluence(presentation, max_degree, budget=DEFAULT_BUDGET):
    """Resolve every overlap ambiguity between rule left-hand sides.

    Overlap words longer than max_degree are skipped.  Returns a report
    listing each ambiguity with both reduction routes and whether their
    normal forms agree.
    """
    if max_degree < 2:
        raise ValueError("max_degree must be at least 2")
    pres = presentation
    ambiguities = []
    seen = set()
    rules = pres.rules
    for i, (l1, r1) in enumerate(rules):
        for j, (l2, r2) in enumerate(rules):
            # suffix of l1 meets prefix of l2
            for k in range(1, min(len(l1), len(l2)) + 1):
                if k == len(l1) == len(l2) and i == j:
                    continue  # a rule trivially overlaps itself in full
                if l1[-k:] != l2[:k]:
                    continue
                word = l1 + l2[k:]
                _record_ambiguity(pres, ambiguities, seen, max_degree, budget,
                                  word, (0, l1, r1), (len(l1) - k, l2, r2))
            # l2 strictly inside l1
            if len(l2) < len(l1):
                for pos in range(1, len(l1) - len(l2)):
                    if l1[pos : pos + len(l2)] == l2:
                        _record_ambiguity(pres, ambiguities, seen, max_degree, budget,
                                          l1, (0, l1, r1), (pos, l2, r2))
    return ConfluenceReport(ambiguities)


def _record_ambiguity(pres, ambiguities, seen, max_degree, budget, word, hit1, hit2):
    if len(word) > max_degree:
        return
    key = (word, hit1[0], id(hit1[1]), hit2[0], id(hit2[1]))
    if key in seen:
        return
    seen.add(key)
    nf1 = _apply_then_normalize(pres, word, hit1, budget)
    nf2 = _apply_then_normalize(pres, word, hit2, budget)
    ambiguities.append(
        {
            "word": word,
            "word_str": pres.word_str(word),
            "route1": nf1,
            "route2": nf2,
            "resolved": nf1 == nf2,
        }
    )


def _apply_then_normalize(pres, word, hit, budget):
    pos, lhs, coeffs = hit
    head, tail = word[:pos], word[pos + len(lhs) :]
    raw = {}
    for rword, rcoeff in coeffs.items():
        cand = head + rword + tail
        raw[cand] = raw.get(cand, pres.context.zero) + rcoeff
    return pres.element(raw, budget=budget)


# -- Hopf structure -----------------------------------------------------------


class HopfData:
    """Generator images of the Hopf maps; extension is automatic.

    coproduct: name -> list of (left word, right word, scalar)
    counit:    name -> scalar
    antipode / antipode_inv: name -> {word: scalar}
    """

    def __init__(self, coproduct, counit, antipode, antipode_inv):
        self.coproduct = coproduct
        self.counit = counit
        self.antipode = antipode
        self.antipode_inv = antipode_inv


class TensorElement:
    """Element of A tensor A, normal-word pairs with scalar coefficients."""

    __slots__ = ("presentation", "terms")
    __hash__ = None

    def __init__(self, presentation, terms):
        self.presentation = presentation
        self.terms = terms

    @classmethod
    def of(cls, a, b, coeff=1):
        pres = a.presentation
        coeff = pres.context.coerce(coeff)
        terms = {}
        for wa, ca in a.terms.items():
            for wb, cb in b.terms.items():
                c = coeff * ca * cb
                key = (wa, wb)
                acc = terms.get(key)
                acc = c if acc is None else acc + c
                if acc:
                    terms[key] = acc
                elif key in terms:
                    del terms[key]
        return cls(pres, terms)

    def __add__(self, other):
        if other.presentation is not self.presentation:
            raise ValueError("tensors over different presentations")
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            acc = out.get(key)
            acc = coeff if acc is None else acc + coeff
            if acc:
                out[key] = acc
            elif key in out:
                del out[key]
        return TensorElement(self.presentation, out)

    def __neg__(self):
        return TensorElement(self.presentation, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, coeff):
        coeff = self.presentation.context.coerce(coeff)
        if not coeff:
            return TensorElement(self.presentation, {})
        return TensorElement(self.presentation, {k: coeff * c for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, ScalarRF)):
            return self.scale(other)
        # componentwise: (a x b)(c x d) = ac x bd
        pres = self.presentation
        out = TensorElement(pres, {})
        for (u1, u2), c in self.terms.items():
            for (v1, v2), d in other.terms.items():
                left = pres.monomial(u1 + v1)
                right = pres.monomial(u2 + v2)
                out = out + TensorElement.of(left, right, c * d)
        return out

    def __rmul__(self, other):
        if isinstance(other, (int, ScalarRF)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, TensorElement):
            return self.presentation is other.presentation and self.terms == other.terms
        return NotImplemented

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def sweedler_words(self):
        """Sorted ((left word, right word), scalar) pairs."""
        return sorted(self.terms.items())

    def sweedler(self):
        """List of (left AlgElement, right AlgElement, scalar) components."""
        pres = self.presentation
        return [
            (pres.monomial(u), pres.monomial(v), c) for (u, v), c in sorted(self.terms.items())
        ]

    def __str__(self):
        if not self.terms:
            return "0"
        pres = self.presentation
        bits = []
        for (u, v), c in sorted(self.terms.items()):
            lhs, rhs = pres.word_str(u), pres.word_str(v)
            text = f"{lhs} @ {rhs}"
            if c != 1:
                coeff = str(c)
                if _coeff_needs_parens(c):
                    coeff = f"({coeff})"
                text = f"{coeff}*{lhs} @ {rhs}"
            bits.append(text)
        return " + ".join(bits)

    __repr__ = __str__


def _require_hopf(presentation):
    if presentation.hopf is None:
        raise ValueError("presentation carries no Hopf data")
    return presentation.hopf


def coproduct(presentation, a):
    """Multiplicative extension of the generator coproducts."""
    hopf = _require_hopf(presentation)
    pres = presentation
    gen_delta = {}
    for name, parts in hopf.coproduct.items():
        terms = TensorElement(pres, {})
        for left, right, coeff in parts:
            terms = terms + TensorElement.of(
                pres.monomial(pres._coerce_word(left)),
                pres.monomial(pres._coerce_word(right)),
                coeff,
            )
        gen_delta[pres.index(name)] = terms
    out = TensorElement(pres, {})
    for word, coeff in a.terms.items():
        part = TensorElement(pres, {((), ()): pres.context.coerce(coeff)})
        for letter in word:
            part = part * gen_delta[letter]
        out = out + part
    return out


def counit(presentation, a):
    hopf = _require_hopf(presentation)
    pres = presentation
    eps = {pres.index(name): pres.context.coerce(v) for name, v in hopf.counit.items()}
    total = pres.context.zero
    for word, coeff in a.terms.items():
        value = pres.context.coerce(coeff)
        for letter in word:
            value = value * eps[letter]
            if not value:
                break
        total = total + value
    return total


def antipode(presentation, a, power=1):
    """Anti-multiplicative extension of S (power 1) or S^{-1} (power -1).

    Powers +/-2 are the multiplicative maps obtained by applying the base
    map twice.
    """
    if power not in (1, -1, 2, -2):
        raise ValueError("antipode power must be one of 1, -1, 2, -2")
    hopf = _require_hopf(presentation)
    pres = presentation
    table_src = hopf.antipode if power > 0 else hopf.antipode_inv
    table = {pres.index(name): pres.element(v) for name, v in table_src.items()}

    def once(element):
        out = pres.zero
        for word, coeff in element.terms.items():
            part = pres.scalar(coeff)
            for letter in reversed(word):
                part = part * table[letter]
            out = out + part
        return out

    out = once(a)
    if power in (2, -2):
        out = once(out)
    return out
