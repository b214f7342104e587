"""Presentation files and the preset registry.

A presentation file is a sectioned text format describing one algebra and,
optionally, its calculus and chain ladder.  The builder turns the parsed
sections into the same objects the library exposes programmatically; the
four shipped presets are loaded through exactly this path so the file
format stays honest.
"""

from __future__ import annotations

import hashlib
from importlib import resources

from .descent import SphereData
from .dga import CalculusSpec
from .homconn import HomForm
from .integrals import LadderDiagram
from .linmap import AlgebraMap, GradeScale, MapMatrix, Zero
from .matrixcalc import DerBasis
from .multider import TwistedMultiDerivation
from .ncalg import HopfData, Presentation
from .parser import (
    ParseError,
    parse_element,
    parse_form_terms,
    parse_ladder_rhs,
    parse_presentation_file,
    parse_tensor,
)
from .scalars import ScalarContext

__all__ = [
    "CalcBundle",
    "Preset",
    "REGISTRY",
    "canonical_text",
    "get_preset",
    "load_calc",
    "preset_names",
    "resolve_target",
]

SECTION_ORDER = (
    "scalars",
    "algebra",
    "grading",
    "hopf",
    "derivation",
    "calculus",
    "forms",
    "ladder",
)


class CalcBundle:
    """Everything one presentation file defines, ready to run."""

    def __init__(self, presentation, tmd, spec, ladder, sections, source):
        self.presentation = presentation
        self.tmd = tmd
        self.spec = spec
        self.ladder = ladder
        self.sections = sections
        self.source = source

    def __repr__(self):
        parts = ["presentation"]
        if self.tmd is not None:
            parts.append("derivation")
        if self.spec is not None:
            parts.append("calculus")
        if self.ladder is not None:
            parts.append("ladder")
        return f"<CalcBundle {' + '.join(parts)}>"


def canonical_text(sections):
    """Render parsed sections back to the canonical file text."""
    lines = []
    for name in SECTION_ORDER:
        directives = sections.get(name)
        if not directives:
            continue
        lines.append(f"[{name}]")
        lines.extend(text for _, text in directives)
        lines.append("")
    return "\n".join(lines)


def _split_assign(rest, lineno, what):
    lhs, eq, rhs = rest.partition("=")
    if not eq:
        raise ParseError(f"{what} needs 'lhs = rhs'", lineno, 1)
    return lhs.strip(), rhs.strip()


def _names_list(text):
    return tuple(piece.strip() for piece in text.split(",") if piece.strip())


def _build_presentation(sections):
    params = ()
    for lineno, text in sections["scalars"]:
        key, sep, rest = text.partition(":")
        if key.strip() != "parameters" or not sep:
            raise ParseError("expected 'parameters: name, ...'", lineno, 1)
        params = _names_list(rest)
    ctx = ScalarContext(params)
    generators = None
    relations = []
    for lineno, text in sections["algebra"]:
        key, sep, rest = text.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError(
                "algebra directives are 'generators:' or 'relation:'", lineno, 1
            )
        if key == "generators":
            generators = _names_list(rest)
        elif key == "relation":
            relations.append((lineno,) + _split_assign(rest, lineno, "a relation"))
        else:
            raise ParseError(f"unknown algebra directive '{key}'", lineno, 1)
    if generators is None:
        raise ParseError("missing 'generators:' directive", 1, 1)
    # relations are parsed against the free algebra so nothing rewrites yet
    free = Presentation(ctx, generators=generators, rules=[])
    rules = []
    for lineno, lhs_text, rhs_text in relations:
        lhs = parse_element(free, lhs_text, line=lineno)
        if len(lhs.terms) != 1:
            raise ParseError("relation left side must be a single word", lineno, 1)
        ((word, coeff),) = lhs.terms.items()
        if coeff != ctx.one or not word:
            raise ParseError("relation left side must be a bare word", lineno, 1)
        rhs = parse_element(free, rhs_text, line=lineno)
        rules.append((word, dict(rhs.terms)))
    grading = None
    if sections["grading"]:
        grading = {}
        for lineno, text in sections["grading"]:
            name, value = _split_assign(text, lineno, "a grading line")
            try:
                grading[name] = int(value)
            except ValueError:
                raise ParseError("grading degree must be an integer", lineno, 1) from None
    hopf = _build_hopf(sections["hopf"], free) if sections["hopf"] else None
    return Presentation(
        ctx, generators=generators, rules=rules, grading=grading, hopf=hopf
    )


def _build_hopf(directives, free):
    ctx = free.context
    coproduct, counit, antipode, antipode_inv = {}, {}, {}, {}
    for lineno, text in directives:
        key, sep, rest = text.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError("hopf directives are 'map: generator = value'", lineno, 1)
        name, value = _split_assign(rest, lineno, "a hopf directive")
        if key == "coproduct":
            tensor = parse_tensor(free, value, line=lineno)
            coproduct[name] = [
                (left, right, c) for (left, right), c in sorted(tensor.terms.items())
            ]
        elif key == "counit":
            counit[name] = ctx.parse(value)
        elif key == "antipode":
            antipode[name] = dict(parse_element(free, value, line=lineno).terms)
        elif key == "antipode inverse":
            antipode_inv[name] = dict(parse_element(free, value, line=lineno).terms)
        else:
            raise ParseError(f"unknown hopf directive '{key}'", lineno, 1)
    return HopfData(
        coproduct=coproduct,
        counit=counit,
        antipode=antipode,
        antipode_inv=antipode_inv,
    )


def _parse_matrix(pres, text, lineno):
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError("matrix literals look like [a, b; c, d]", lineno, 1)
    return [
        [parse_element(pres, piece, line=lineno) for piece in row.split(",")]
        for row in text[1:-1].split(";")
    ]


def _build_tmd(sections, pres):
    ctx = pres.context
    rows = {}
    images = {}
    grades = None
    inverse_maps = {}
    for lineno, text in sections["derivation"]:
        key, sep, rest = text.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError("derivation directives need ':'", lineno, 1)
        if key == "partial":
            name, value = _split_assign(rest, lineno, "a partial row")
            rows[name] = tuple(
                parse_element(pres, piece, line=lineno) for piece in value.split(",")
            )
        elif key == "sigma images":
            name, value = _split_assign(rest, lineno, "a sigma image")
            images[name] = _parse_matrix(pres, value, lineno)
        elif key == "sigma grades":
            grades = tuple(ctx.parse(piece.strip()) for piece in rest.split(","))
        elif key.startswith("sigma inverse"):
            try:
                idx = int(key[len("sigma inverse"):])
            except ValueError:
                raise ParseError(
                    "expected 'sigma inverse <index>: gen -> image, ...'", lineno, 1
                ) from None
            maps = {}
            for piece in rest.split(","):
                gen, arrow, image = piece.partition("->")
                if not arrow:
                    raise ParseError(
                        "inverse entries are 'generator -> image'", lineno, 1
                    )
                maps[gen.strip()] = parse_element(pres, image, line=lineno)
            inverse_maps[idx] = maps
        else:
            raise ParseError(f"unknown derivation directive '{key}'", lineno, 1)
    if not rows:
        raise ParseError("derivation section lacks partial rows", 1, 1)
    n = len(next(iter(rows.values())))
    if grades is not None:
        if len(grades) != n:
            raise ParseError(f"expected {n} sigma grades", 1, 1)
        entries = [
            [GradeScale(pres, grades[i], 1) if i == j else Zero(pres) for j in range(n)]
            for i in range(n)
        ]
        sigma = MapMatrix.from_entries(pres, entries, multiplicative=True)
        inverses = [GradeScale(pres, grades[i] ** -1, 1) for i in range(n)]
    else:
        if set(inverse_maps) != set(range(1, n + 1)):
            raise ParseError(f"need 'sigma inverse 1..{n}' directives", 1, 1)
        sigma = MapMatrix.from_images(pres, images)
        inverses = [
            AlgebraMap(pres, inverse_maps[i + 1], name=f"sigma{i + 1}{i + 1}_inv")
            for i in range(n)
        ]
    return TwistedMultiDerivation(pres, rows, sigma, diag_inverses=inverses)


def _scalar_form_terms(pres, names, text, lineno):
    out = {}
    for coeff, word in parse_form_terms(pres, names, text, line=lineno):
        if not coeff:
            continue
        scalar = coeff.coefficient(())
        if pres.scalar(scalar) != coeff:
            raise ParseError("form rule coefficients must be scalars", lineno, 1)
        out[word] = scalar
    return out


def _build_calculus(sections, tmd):
    pres = tmd.presentation
    names = None
    order = None
    bases = {}
    rules = {}
    for lineno, text in sections["forms"]:
        key, sep, rest = text.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError("forms directives need ':'", lineno, 1)
        if key == "names":
            names = _names_list(rest)
        elif key == "order":
            order = _names_list(rest)
        elif key == "rule":
            if names is None:
                raise ParseError("'names:' must precede form rules", lineno, 1)
            lhs, rhs = _split_assign(rest, lineno, "a form rule")
            pair = tuple(piece.strip() for piece in lhs.split("."))
            if len(pair) != 2:
                raise ParseError("form rules rewrite two-letter words", lineno, 1)
            rules[pair] = _scalar_form_terms(pres, names, rhs, lineno)
        elif key.startswith("basis"):
            try:
                degree = int(key[len("basis"):])
            except ValueError:
                raise ParseError("expected 'basis <degree>: words'", lineno, 1) from None
            bases[degree] = [
                tuple(w.strip() for w in piece.strip().split("."))
                for piece in rest.split(",")
            ]
        else:
            raise ParseError(f"unknown forms directive '{key}'", lineno, 1)
    top = None
    d_rules = {}
    for lineno, text in sections["calculus"]:
        if text.startswith("d "):
            head, rhs = _split_assign(text, lineno, "a d rule")
            d_rules[head[2:].strip()] = rhs
        else:
            key, sep, rest = text.partition(":")
            if key.strip() == "top" and sep:
                try:
                    top = int(rest.strip())
                except ValueError:
                    raise ParseError("'top:' takes an integer", lineno, 1) from None
            else:
                raise ParseError(
                    "calculus directives are 'top: <n>' or 'd <form> = ...'", lineno, 1
                )
    if names is None or top is None:
        raise ParseError("a calculus needs form 'names:' and 'top:'", 1, 1)
    return CalculusSpec(
        tmd,
        form_names=names,
        rules=rules,
        d_on_forms=d_rules or None,
        top_degree=top,
        form_order=order,
        bases=bases or None,
    )


def _build_ladder(sections, spec):
    pres = spec.presentation
    ctx = pres.context
    top = spec.top_degree
    verticals = [dict() for _ in range(top + 1)]
    for lineno, text in sections["ladder"]:
        key, sep, rest = text.partition(":")
        if not sep:
            raise ParseError("ladder directives are 'k: source = image'", lineno, 1)
        try:
            k = int(key.strip())
        except ValueError:
            raise ParseError("ladder level must be an integer", lineno, 1) from None
        if not 0 <= k <= top:
            raise ParseError(f"ladder level {k} outside 0..{top}", lineno, 1)
        lhs, rhs = _split_assign(rest, lineno, "a ladder directive")
        source = () if lhs == "1" else tuple(piece.strip() for piece in lhs.split("."))
        if k == top:
            image = parse_element(pres, rhs, line=lineno)
        else:
            coeff, word = parse_ladder_rhs(ctx, spec.form_names, rhs, line=lineno)
            image = HomForm(spec, top - k, {word: coeff})
        verticals[k][source] = image
    return LadderDiagram(spec, verticals)


def load_calc(text):
    """Build the full bundle a presentation file describes."""
    sections = parse_presentation_file(text)
    presentation = _build_presentation(sections)
    tmd = _build_tmd(sections, presentation) if sections["derivation"] else None
    spec = None
    if tmd is not None and (sections["forms"] or sections["calculus"]):
        spec = _build_calculus(sections, tmd)
    ladder = None
    if spec is not None and sections["ladder"]:
        ladder = _build_ladder(sections, spec)
    return CalcBundle(presentation, tmd, spec, ladder, sections, text)


# -- registry ------------------------------------------------------------------


class Preset:
    """Named, hashed input plus a loader for its objects."""

    def __init__(self, name, description, kind, loader, source):
        self.name = name
        self.description = description
        self.kind = kind
        self._loader = loader
        self.source = source
        self._cache = None

    def load(self):
        if self._cache is None:
            self._cache = self._loader(self.source)
        return self._cache

    @property
    def digest(self):
        payload = f"{self.name}\n{self.source}".encode()
        return hashlib.sha256(payload).hexdigest()

    def __repr__(self):
        return f"<Preset {self.name}>"


def _data_text(filename):
    return resources.files("intforms").joinpath("data", filename).read_text()


def _load_sphere(source):
    return SphereData(load_calc(source).spec)


def _load_matrix(source):
    del source
    return DerBasis.pauli()


_MATRIX_SOURCE = (
    "matrix algebra, n = 2\n"
    "E1 = [[0, 1], [1, 0]]\n"
    "E2 = [[0, -i], [i, 0]]\n"
    "E3 = [[1, 0], [0, -1]]\n"
    "derivations a -> i*[E_l, a]\n"
)


def _registry():
    qplane_text = _data_text("qplane.calc")
    sl2_text = _data_text("sl2_3d.calc")
    presets = (
        Preset(
            "qplane",
            "quantum plane with the two-parameter covariant calculus",
            "calculus",
            lambda source: load_calc(source),
            qplane_text,
        ),
        Preset(
            "sl2-3d",
            "quantum SL(2) with the left-covariant three-dimensional calculus",
            "calculus",
            lambda source: load_calc(source),
            sl2_text,
        ),
        Preset(
            "podles-sphere",
            "standard quantum sphere as the degree-0 subalgebra of quantum SL(2)",
            "sphere",
            _load_sphere,
            sl2_text,
        ),
        Preset(
            "matrix-m2",
            "two-by-two matrix algebra with its commutator derivation calculus",
            "matrix",
            _load_matrix,
            _MATRIX_SOURCE,
        ),
    )
    return {p.name: p for p in presets}


REGISTRY = _registry()


def preset_names():
    return tuple(REGISTRY)


def get_preset(name):
    """Exact registry name, or a unique prefix of one."""
    if name in REGISTRY:
        return REGISTRY[name]
    matches = [p for key, p in REGISTRY.items() if key.startswith(name)]
    if len(matches) == 1:
        return matches[0]
    hint = ", ".join(REGISTRY)
    raise KeyError(f"unknown preset '{name}' (have: {hint})")


def resolve_target(target):
    """`preset:NAME` or a path to a presentation file."""
    if target.startswith("preset:"):
        return get_preset(target[len("preset:"):])
    with open(target, encoding="utf-8") as handle:
        text = handle.read()
    name = target.rsplit("/", 1)[-1]
    if name.endswith(".calc"):
        name = name[: -len(".calc")]
    return Preset(name, f"presentation file {target}", "calculus",
                  lambda source: load_calc(source), text)
