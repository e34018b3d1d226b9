"""Compositional kernel expressions over the SE, LIN and PER base kernels.

Expressions are small immutable trees.  Their canonical string is the
identity used everywhere else (CSV headers, CLI arguments, JSON reports),
so two trees that differ only by the order of commutative operands map to
the same candidate kernel.  Nesting is kept as written: ``(SE*LIN)*PER``
and ``(SE*PER)*LIN`` are different candidates.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

from .errors import ParseError, ValidationError

BASE_NAMES = ("SE", "LIN", "PER")

# Ordering used for commutative operands and for sorting description
# components: periodic structure first, then smooth, then linear.
PRECEDENCE = {"PER": 0, "SE": 1, "LIN": 2}

# (name, role) pairs contributed by each base kernel, in layout order.
BASE_PARAMS = {
    "SE": (("variance", "log_variance"), ("lengthscale", "log_lengthscale")),
    "LIN": (("variance", "log_variance"), ("shift", "shift")),
    "PER": (
        ("variance", "log_variance"),
        ("lengthscale", "log_lengthscale"),
        ("period", "log_period"),
    ),
}

FORMS = ("a", "a*b", "a+b", "(a*b)*c", "(a+b)*c", "(a*b)+c", "(a+b)+c")


@dataclass(frozen=True)
class Base:
    name: str

    def __post_init__(self):
        if self.name not in BASE_NAMES:
            raise ValidationError(f"unknown base kernel {self.name!r}")

    def __str__(self):
        return canonicalize(self)


@dataclass(frozen=True)
class Sum:
    left: "KernelExpr"
    right: "KernelExpr"

    def __str__(self):
        return canonicalize(self)


@dataclass(frozen=True)
class Product:
    left: "KernelExpr"
    right: "KernelExpr"

    def __str__(self):
        return canonicalize(self)


KernelExpr = Union[Base, Sum, Product]


@dataclass(frozen=True)
class ParamLayout:
    """Hyperparameter slots of an expression plus the trailing noise slot."""

    entries: tuple

    @property
    def count(self) -> int:
        return len(self.entries)

    @property
    def names(self):
        return [name for name, _ in self.entries]

    @property
    def roles(self):
        return [role for _, role in self.entries]


def leaves(e: KernelExpr) -> list:
    """Base kernel names in depth-first (left to right) order."""
    if isinstance(e, Base):
        return [e.name]
    return leaves(e.left) + leaves(e.right)


def _render(e: KernelExpr) -> tuple:
    """Return (canonical string, sort key, canonical tree) for ``e``."""
    if isinstance(e, Base):
        return e.name, (1, str(PRECEDENCE[e.name])), e

    op = "+" if isinstance(e, Sum) else "*"
    children = sorted((_render(e.left), _render(e.right)), key=lambda r: r[1])
    parts, keys = [], []
    for text, key, child in children:
        # A sum under a product needs brackets for precedence; a node of the
        # same kind needs them so the original nesting survives.
        wrap = isinstance(child, Sum) and op == "*" or type(child) is type(e)
        parts.append(f"({text})" if wrap else text)
        keys.append(f"({key[1]})" if wrap else key[1])
    tree = type(e)(children[0][2], children[1][2])
    n_leaves = children[0][1][0] + children[1][1][0]
    return op.join(parts), (n_leaves, op.join(keys)), tree


def canonicalize(e: KernelExpr) -> str:
    """Canonical string of ``e``.

    Commutative operands at each node are ordered simpler-first (fewer base
    kernels), then by the PER < SE < LIN precedence.

    >>> canonicalize(Sum(Product(Base("PER"), Base("SE")), Base("LIN")))
    'LIN+PER*SE'
    """
    return _render(e)[0]


def canonical_form(e: KernelExpr) -> KernelExpr:
    """Tree with children reordered to match :func:`canonicalize`."""
    return _render(e)[2]


_TOKEN = re.compile(r"\s*(?:(SE|LIN|PER)|([+*()]))")


def parse(text: str) -> KernelExpr:
    """Parse an expression such as ``"PER*SE + LIN"`` (``*`` binds tighter)."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"cannot parse kernel expression {text!r} at offset {pos}")
        tokens.append(m.group(1) or m.group(2))
        pos = m.end()
    if not tokens:
        raise ParseError("empty kernel expression")

    def expr(i):
        node, i = term(i)
        while i < len(tokens) and tokens[i] == "+":
            rhs, i = term(i + 1)
            node = Sum(node, rhs)
        return node, i

    def term(i):
        node, i = factor(i)
        while i < len(tokens) and tokens[i] == "*":
            rhs, i = factor(i + 1)
            node = Product(node, rhs)
        return node, i

    def factor(i):
        if i >= len(tokens):
            raise ParseError(f"unexpected end of kernel expression {text!r}")
        tok = tokens[i]
        if tok == "(":
            node, i = expr(i + 1)
            if i >= len(tokens) or tokens[i] != ")":
                raise ParseError(f"unbalanced parentheses in {text!r}")
            return node, i + 1
        if tok in BASE_NAMES:
            return Base(tok), i + 1
        raise ParseError(f"unexpected token {tok!r} in {text!r}")

    node, i = expr(0)
    if i != len(tokens):
        raise ParseError(f"trailing tokens in kernel expression {text!r}")
    return node


def _as_base(b) -> Base:
    return b if isinstance(b, Base) else Base(str(b).strip().upper())


def _instantiate(form: str, a: Base, b: Base, c: Base) -> KernelExpr:
    if form == "a":
        return a
    if form == "a*b":
        return Product(a, b)
    if form == "a+b":
        return Sum(a, b)
    inner = Product(a, b) if form.startswith("(a*b)") else Sum(a, b)
    return Product(inner, c) if form.endswith("*c") else Sum(inner, c)


def expand(bases: Iterable, forms: Iterable[str] = FORMS) -> list:
    """All non-redundant kernels of the given forms over ``bases``.

    Only the inner operand pair is treated as unordered, so with ``b`` bases
    the full set of forms yields ``b + 2T + 4bT`` kernels where
    ``T = b(b+1)/2`` (87 for SE, LIN, PER).  The result is sorted by
    canonical string and every tree is in canonical form.
    """
    base_list = sorted({_as_base(b) for b in bases}, key=lambda b: PRECEDENCE[b.name])
    if not base_list:
        raise ValidationError("expand needs at least one base kernel")
    forms = list(forms)
    unknown = [f for f in forms if f not in FORMS]
    if unknown:
        raise ValidationError(f"unknown grammar forms {unknown}; expected a subset of {FORMS}")

    found = {}
    pairs = list(itertools.combinations_with_replacement(base_list, 2))
    for form in forms:
        if form == "a":
            combos = ((a, a, a) for a in base_list)
        elif "c" not in form:
            combos = ((a, b, a) for a, b in pairs)
        else:
            combos = ((a, b, c) for (a, b) in pairs for c in base_list)
        for a, b, c in combos:
            e = _instantiate(form, a, b, c)
            found.setdefault(canonicalize(e), canonical_form(e))
    return [found[key] for key in sorted(found)]


def expected_count(n_bases: int) -> int:
    t = n_bases * (n_bases + 1) // 2
    return n_bases + 2 * t + 4 * n_bases * t


def param_layout(e: KernelExpr) -> ParamLayout:
    """Parameter slots in depth-first order, then one observation-noise slot."""
    entries = []
    for i, name in enumerate(leaves(e)):
        for pname, role in BASE_PARAMS[name]:
            entries.append((f"{name}{i}.{pname}", role))
    entries.append(("noise.variance", "log_noise"))
    return ParamLayout(tuple(entries))


def product_terms(e: KernelExpr) -> list:
    """Distribute products over sums; each term is a list of base names."""
    if isinstance(e, Base):
        return [[e.name]]
    if isinstance(e, Sum):
        return product_terms(e.left) + product_terms(e.right)
    return [l + r for l in product_terms(e.left) for r in product_terms(e.right)]


_AMPLITUDE = {1: "linearly", 2: "quadratically", 3: "cubically"}
_POLY = {1: "a linear function", 2: "a quadratic function", 3: "a cubic function"}


def _sentence(factors) -> str:
    n = Counter(factors)
    per, se, lin = n["PER"], n["SE"], n["LIN"]
    if per:
        words = ["a periodic function"] + ["modulated by a periodic function"] * (per - 1)
        if se:
            words.append("whose shape changes smoothly")
    elif se:
        words = ["a smooth function"]
    else:
        return _POLY.get(lin, f"a polynomial of degree {lin}")
    if lin:
        words.append(f"with {_AMPLITUDE.get(lin, 'polynomially')} varying amplitude")
    return " ".join(words)


def describe(e: KernelExpr) -> list:
    """One plain-English sentence per additive component of ``e``.

    >>> describe(parse("PER*SE + LIN"))
    ['a linear function', 'a periodic function whose shape changes smoothly']
    """
    terms = [sorted(t, key=PRECEDENCE.get) for t in product_terms(e)]
    terms.sort(key=lambda t: (len(t), [PRECEDENCE[f] for f in t]))
    return [_sentence(t) for t in terms]


def read_grammar(path) -> list:
    """Kernel list from a grammar file.

    One directive per line; ``#`` starts a comment::

        base SE          # a base kernel (a bare name also works)
        form (a*b)+c     # an enabled form; all seven when none are listed
        kernel LIN+PER*SE  # an explicit kernel, added as-is

    Bases and forms are expanded with :func:`expand`; explicit kernels are
    merged in and the union is returned sorted by canonical string.
    """
    bases, forms, explicit = [], [], []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if head == "base":
                bases.append(Base(rest.upper()))
            elif head.upper() in BASE_NAMES and not rest:
                bases.append(Base(head.upper()))
            elif head == "form":
                form = rest.replace(" ", "")
                if form not in FORMS:
                    raise ParseError(f"unknown form {rest!r}")
                forms.append(form)
            elif head == "kernel":
                explicit.append(parse(rest))
            else:
                raise ParseError(f"unrecognised directive {line!r}")
        except ValidationError as exc:
            raise ParseError(str(exc), line=lineno) from None

    found = {}
    if bases:
        for e in expand(bases, forms or FORMS):
            found[canonicalize(e)] = e
    elif forms:
        raise ParseError(f"{path}: forms given without any base kernel")
    for e in explicit:
        found.setdefault(canonicalize(e), canonical_form(e))
    if not found:
        raise ParseError(f"{path}: grammar defines no kernels")
    return [found[key] for key in sorted(found)]
