"""Right twisted multi-derivations.

A multi-derivation is a row of n maps (partial_1 ... partial_n) together with
a multiplicative matrix sigma, obeying the twisted Leibniz rule

    partial_i(ab) = sum_j partial_j(a) sigma_ji(b) + a partial_i(b).

Generator rows determine everything: extension recurses on the leading
letter.  Freeness data (the bar and hat matrices) is either supplied or built
from a triangular sigma; verify_free re-derives every assumed identity and
reports failures with witnesses instead of raising.
"""
from __future__ import annotations

from .linmap import bullet, free_pair, identity_matrix, is_identity_on_words
from .ncalg import MIXED, zdegree


class SigmaNotDiagonal(ValueError):
    pass


class FreenessReport:
    """Outcome of verify_free: named checks with failure witnesses."""

    def __init__(self, checks):
        self.checks = checks

    @property
    def ok(self):
        return all(c["ok"] for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c["ok"]]

    def __repr__(self):
        return f"<FreenessReport {len(self.checks)} checks, {len(self.failures)} failed>"


class TwistedMultiDerivation:
    def __init__(
        self,
        presentation,
        partial_on_gens,
        sigma,
        sigma_bar=None,
        sigma_hat=None,
        diag_inverses=None,
    ):
        self.presentation = presentation
        self.n = sigma.n
        rows = {}
        for key, row in partial_on_gens.items():
            idx = presentation.index(key) if isinstance(key, str) else key
            row = tuple(
                presentation.element(e.terms if hasattr(e, "terms") else e) for e in row
            )
            if len(row) != self.n:
                raise ValueError("partial row length differs from sigma size")
            rows[idx] = row
        missing = [
            presentation.generators[i]
            for i in range(len(presentation.generators))
            if i not in rows
        ]
        if missing:
            raise ValueError(f"partial rows missing for {missing}")
        self.partial_on_gens = rows
        self.sigma = sigma
        if sigma_bar is None or sigma_hat is None:
            if diag_inverses is None:
                raise ValueError(
                    "either both bar and hat matrices or diagonal inverses are required"
                )
            built_bar, built_hat = free_pair(sigma, diag_inverses)
            sigma_bar = sigma_bar or built_bar
            sigma_hat = sigma_hat or built_hat
        self.sigma_bar = sigma_bar
        self.sigma_hat = sigma_hat
        self.verified = None
        self._memo = {(): (presentation.zero,) * self.n}

    # -- extension -----------------------------------------------------------

    def _partial_word(self, word):
        cached = self._memo.get(word)
        if cached is not None:
            return cached
        pres = self.presentation
        head, tail = word[0], word[1:]
        row_g = self.partial_on_gens[head]
        if not tail:
            result = row_g
        else:
            sig = self.sigma.on_word(tail)
            tail_row = self._partial_word(tail)
            g_elem = pres.monomial((head,))
            result = tuple(
                _total(row_g[j] * sig[j][i] for j in range(self.n)) + g_elem * tail_row[i]
                for i in range(self.n)
            )
        self._memo[word] = result
        return result

    def partial(self, a):
        """Row (partial_1(a), ..., partial_n(a))."""
        if a.presentation is not self.presentation:
            raise ValueError("element from a different presentation")
        out = [self.presentation.zero] * self.n
        for word, coeff in a.terms.items():
            row = self._partial_word(word)
            for i in range(self.n):
                out[i] = out[i] + row[i].scale(coeff)
        return tuple(out)

    def degree_shifts(self):
        """Per-index Z-degree shift on generators, MIXED when inconsistent."""
        pres = self.presentation
        shifts = []
        for i in range(self.n):
            seen = None
            for g, row in self.partial_on_gens.items():
                if row[i].is_zero():
                    continue
                d = zdegree(row[i])
                shift = MIXED if d is MIXED else d - pres.grading[g]
                if seen is None:
                    seen = shift
                elif seen != shift:
                    seen = MIXED
            shifts.append(seen)
        return shifts


def _total(items):
    out = None
    for item in items:
        out = item if out is None else out + item
    return out


def extend_partial(t, a):
    return t.partial(a)


def _relation_respected(pres, matrix, lhs, rhs):
    got = matrix.on_word(lhs)
    want = matrix.apply(pres.element(dict(rhs)))
    for i in range(matrix.n):
        for j in range(matrix.n):
            if got[i][j] != want[i][j]:
                return (
                    f"entry ({i},{j}) on rule {pres.word_str(lhs)}: "
                    f"{got[i][j]} != {want[i][j]}"
                )
    return None


def _identity_witness(product, words, pres):
    hit = is_identity_on_words(product, words)
    if hit is None:
        return None
    word, i, j, got, want = hit
    return f"entry ({i},{j}) on {pres.word_str(word)}: {got} != {want}"


def verify_free(t):
    """Re-check every assumption behind (partial, sigma) freeness.

    Returns a FreenessReport; failures carry witnesses and nothing raises.
    The report is also stored on t.verified.
    """
    pres = t.presentation
    checks = []

    zero_row = t._partial_word(())
    checks.append(
        {
            "name": "partial(1) is the zero row",
            "ok": all(e.is_zero() for e in zero_row),
            "witness": None,
        }
    )

    for label, matrix in (
        ("sigma", t.sigma),
        ("sigma_bar", t.sigma_bar),
        ("sigma_hat", t.sigma_hat),
    ):
        witness = None
        for lhs, rhs in pres.rules:
            witness = _relation_respected(pres, matrix, lhs, rhs)
            if witness is not None:
                break
        checks.append(
            {
                "name": f"{label} respects the defining relations",
                "ok": witness is None,
                "witness": witness,
            }
        )

    words = [()] + [(g,) for g in range(len(pres.generators))]
    sigma_t = t.sigma.transpose()
    bar_t = t.sigma_bar.transpose()
    for name, product in (
        ("bar o sigma^T = id", bullet(t.sigma_bar, sigma_t)),
        ("sigma^T o bar = id", bullet(sigma_t, t.sigma_bar)),
        ("hat o bar^T = id", bullet(t.sigma_hat, bar_t)),
        ("bar^T o hat = id", bullet(bar_t, t.sigma_hat)),
    ):
        witness = _identity_witness(product, words, pres)
        checks.append({"name": name, "ok": witness is None, "witness": witness})

    witness = None
    for lhs, rhs in pres.rules:
        got = t._partial_word(lhs)
        want = t.partial(pres.element(dict(rhs)))
        for i in range(t.n):
            if got[i] != want[i]:
                witness = (
                    f"index {i} on rule {pres.word_str(lhs)}: {got[i]} != {want[i]}"
                )
                break
        if witness is not None:
            break
    checks.append(
        {
            "name": "partial annihilates the defining relations",
            "ok": witness is None,
            "witness": witness,
        }
    )

    report = FreenessReport(checks)
    t.verified = report
    return report


def _ratio(a, b):
    """Scalar c with a = c*b, or None; b must be nonzero."""
    word = next(iter(b.terms))
    c = a.coefficient(word) / b.coefficient(word)
    return c if a == b.scale(c) else None


def detect_q_skew(t):
    """Constants q_i with sigma_i^{-1} o partial_i o sigma_i = q_i partial_i.

    Defined for diagonal sigma only; returns None when some index is not
    q-skew.  Indices whose partial vanishes on all generators report 1.
    """
    if t.sigma.kind != "diagonal":
        raise SigmaNotDiagonal(f"sigma is {t.sigma.kind}")
    pres = t.presentation
    out = []
    for i in range(t.n):
        sig_i = t.sigma.entries[i][i]
        inv_i = t.sigma_bar.entries[i][i]
        ratio = None
        for g in range(len(pres.generators)):
            base = t.partial_on_gens[g][i]
            twisted = inv_i.apply(t.partial(sig_i.on_word((g,)))[i])
            if base.is_zero():
                if not twisted.is_zero():
                    return None
                continue
            c = _ratio(twisted, base)
            if c is None or (ratio is not None and c != ratio):
                return None
            ratio = c
        out.append(ratio if ratio is not None else pres.context.one)
    return out


def untwisted_sigma(presentation, n):
    """sigma = identity matrix: the classical (untwisted) derivation case."""
    return identity_matrix(presentation, n)
