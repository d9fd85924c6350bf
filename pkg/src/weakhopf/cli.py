"""The ``.wha`` presentation format and the ``weakhopf`` command line.

A presentation is UTF-8 JSON text with the keys, in this order: ``dim``,
``basis_names``, ``structure_constants`` (sparse ``[i, j, k, "scalar"]``),
``coproduct`` (for each basis element the sparse ``lambda`` and ``rho``
actions of Δ(e_i) on A⊗A as ``[row, col, "scalar"]``), and the optional
``counit``, ``involution`` and ``metadata``.  Scalars are exact strings
such as ``"3"``, ``"-1/2"`` or ``"1/2+3/4*i"``.

Exit codes: 0 success, 1 usage error, 2 negative verdict, 3 parse or
invariant error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from importlib import resources
from pathlib import Path
from typing import NamedTuple

from .algebra_core import (
    FinAlgebra, Functional, Multiplier, StructureError, _plain, associativity_violation,
    involution_violation, tensor_square,
)
from .coproduct import Coproduct, find_canonical_idempotent, homomorphism_violation
from .examples import GROUPS, function_algebra, groupoid_algebra, groupoid_from_algebra, transitive_groupoid
from .exact_linalg import ONE, Matrix, Scalar
from .integrals import integral_space
from .larson_sweedler import PipelineAbort, full_pipeline
from .separability import separability_structure

__all__ = [
    "ParseError", "InvariantError", "Presentation", "parse", "read_presentation",
    "serialize", "main", "main_exit", "bundled", "generate_groupoid", "generate_dual",
]

KEYS = ("dim", "basis_names", "structure_constants", "coproduct", "counit", "involution", "metadata")
BUNDLED = ("c2_group.wha", "pair2.wha", "broken.wha")

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE, EXIT_PARSE = 0, 1, 2, 3


class ParseError(ValueError):
    """Malformed presentation; ``field`` and ``line`` locate the problem."""

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line


class InvariantError(StructureError):
    """A presentation that parses but violates an algebraic law."""


class Presentation(NamedTuple):
    algebra: FinAlgebra
    coproduct: Coproduct
    counit: Functional | None
    metadata: dict | None


# ---------------------------------------------------------------------------
# reading

def _scalar(x, field):
    if not isinstance(x, str):
        raise ParseError("scalars must be strings", field)
    try:
        return Scalar.parse(x)
    except ValueError as exc:
        raise ParseError(str(exc), field) from None


def _index(x, bound, field):
    if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x < bound:
        raise ParseError(f"index must be an integer in 0..{bound - 1}", field)
    return x


def _sparse_matrix(rows, size, field):
    if not isinstance(rows, list):
        raise ParseError("expected a list of [row, col, scalar] entries", field)
    entries = {}
    for k, e in enumerate(rows):
        f = f"{field}[{k}]"
        if not isinstance(e, list) or len(e) != 3:
            raise ParseError("expected [row, col, scalar]", f)
        r, c = _index(e[0], size, f), _index(e[1], size, f)
        if (r, c) in entries:
            raise ParseError("repeated entry", f)
        x = _scalar(e[2], f)
        if x:
            entries[(r, c)] = x
    return Matrix(size, size, entries)


def read_presentation(data) -> Presentation:
    """Parse and validate a presentation (bytes or str)."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc.reason}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    unknown = set(doc) - set(KEYS)
    if unknown:
        raise ParseError("unknown field", sorted(unknown)[0])
    for key in KEYS[:4]:
        if key not in doc:
            raise ParseError("missing field", key)
    n = doc["dim"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("dim must be a positive integer", "dim")
    names = doc["basis_names"]
    if not isinstance(names, list) or len(names) != n or not all(isinstance(s, str) for s in names):
        raise ParseError(f"expected {n} basis names", "basis_names")
    if len(set(names)) != n:
        raise ParseError("basis names must be distinct", "basis_names")
    sc = doc["structure_constants"]
    if not isinstance(sc, list):
        raise ParseError("expected a list", "structure_constants")
    mult = {}
    for k, e in enumerate(sc):
        f = f"structure_constants[{k}]"
        if not isinstance(e, list) or len(e) != 4:
            raise ParseError("expected [i, j, k, scalar]", f)
        key = tuple(_index(x, n, f) for x in e[:3])
        if key in mult:
            raise ParseError("repeated entry", f)
        mult[key] = _scalar(e[3], f)
    involution = None
    if "involution" in doc:
        involution = _sparse_matrix(doc["involution"], n, "involution")
    A = FinAlgebra(n, names, {k: x for k, x in mult.items() if x}, involution=involution)

    cop = doc["coproduct"]
    if not isinstance(cop, list) or len(cop) != n:
        raise ParseError(f"expected {n} coproduct values", "coproduct")
    N = n * n
    mats = []
    for i, entry in enumerate(cop):
        f = f"coproduct[{i}]"
        if not isinstance(entry, dict) or set(entry) != {"lambda", "rho"}:
            raise ParseError("expected an object with lambda and rho", f)
        mats.append((_sparse_matrix(entry["lambda"], N, f + ".lambda"),
                     _sparse_matrix(entry["rho"], N, f + ".rho")))
    counit = None
    if "counit" in doc:
        c = doc["counit"]
        if not isinstance(c, list) or len(c) != n:
            raise ParseError(f"expected {n} counit values", "counit")
        counit = Functional(A, [_scalar(x, f"counit[{k}]") for k, x in enumerate(c)])
    metadata = doc.get("metadata")
    if metadata is not None and not isinstance(metadata, dict):
        raise ParseError("metadata must be an object", "metadata")

    bad = associativity_violation(A)
    if bad is not None:
        raise InvariantError("associativity", "(e_i e_j) e_k differs from e_i (e_j e_k)", bad)
    if involution is not None:
        bad = involution_violation(A)
        if bad is not None:
            raise InvariantError("involution", "the involution is not an antilinear anti-automorphism of order two", bad)
    D = _coproduct_from_actions(A, mats)
    bad = homomorphism_violation(D)
    if bad is not None:
        raise InvariantError("homomorphism", "Δ(e_i e_j) differs from Δ(e_i)Δ(e_j)", bad)
    return Presentation(A, D, counit, metadata)


def _coproduct_from_actions(A, mats):
    """Read each (λ, ρ) pair as a multiplier of A⊗A and turn it into an element."""
    A2 = tensor_square(A)
    u = A2.unit
    if u is None:
        ms = [Multiplier(A2, lam, rho) for lam, rho in mats]
        for i, m in enumerate(ms):
            bad = m.law_violation()
            if bad is not None:
                raise InvariantError("multiplier", f"the actions of Δ(e_{i}) are not a multiplier", (i, bad))
        return Coproduct(A, ms)
    els = []
    for i, (lam, rho) in enumerate(mats):
        t = lam.apply(u)
        # over a unital algebra a multiplier is left and right multiplication by λ(1)
        for x in range(A2.dim):
            ex = {x: ONE}
            if lam.column(x) != A2.product(t, ex) or rho.column(x) != A2.product(ex, t):
                raise InvariantError("multiplier", f"the actions of Δ(e_{i}) are not a multiplier", (i, x))
        els.append(t)
    return Coproduct.from_elements(A, els)


def parse(data):
    """(algebra, coproduct, declared counit or None) from presentation text."""
    p = read_presentation(data)
    return p.algebra, p.coproduct, p.counit


# ---------------------------------------------------------------------------
# writing

def _entries(M):
    return [[r, c, str(x)] for r, c, x in M.entries()]


def serialize(A, D, counit=None, metadata=None) -> bytes:
    """Canonical text: fixed key order, sorted sparse entries, one entry per line."""
    A2 = D.square
    N = A2.dim
    cop = []
    for t in D.elements:
        lam = Matrix.from_columns(N, N, {x: v for x in range(N) if (v := A2.product(t, {x: ONE}))})
        rho = Matrix.from_columns(N, N, {x: v for x in range(N) if (v := A2.product({x: ONE}, t))})
        cop.append({"lambda": _entries(lam), "rho": _entries(rho)})
    doc = {
        "dim": A.dim,
        "basis_names": list(A.basis_names),
        "structure_constants": [[i, j, k, str(x)] for i, j, k, x in A.structure_constants()],
        "coproduct": cop,
    }
    if counit is not None:
        doc["counit"] = [str(c) for c in counit.coeffs]
    if A.involution is not None:
        doc["involution"] = _entries(A.involution)
    if metadata is not None:
        doc["metadata"] = metadata
    return (_dump(doc, 0) + "\n").encode("utf-8")


def _atom(x):
    return json.dumps(x, ensure_ascii=False, sort_keys=True)


def _flat(x):
    return not isinstance(x, (list, dict)) or (
        isinstance(x, list) and all(not isinstance(y, (list, dict)) for y in x))


def _dump(x, depth):
    pad = "  " * (depth + 1)
    end = "  " * depth
    if isinstance(x, dict):
        if not x:
            return "{}"
        keys = list(x) if depth == 0 else sorted(x)
        body = ",\n".join(f"{pad}{_atom(k)}: {_dump(x[k], depth + 1)}" for k in keys)
        return "{\n" + body + "\n" + end + "}"
    if isinstance(x, list):
        if _flat(x):
            return _atom(x)
        body = ",\n".join(pad + _dump(y, depth + 1) for y in x)
        return "[\n" + body + "\n" + end + "]"
    return _atom(x)


# ---------------------------------------------------------------------------
# generators

def _permute(A, D, eps, S, perm):
    """Re-present everything in the basis f_k = e_{perm[k]}."""
    n = A.dim
    pos = {p: k for k, p in enumerate(perm)}
    mult = {(pos[i], pos[j], pos[k]): x for i, j, k, x in A.structure_constants()}
    J = None
    if A.involution is not None:
        J = Matrix(n, n, {(pos[r], pos[c]): x for r, c, x in A.involution.entries()})
    B = FinAlgebra(n, [A.basis_names[p] for p in perm], mult, involution=J)
    els = []
    for p in perm:
        els.append({pos[i] * n + pos[j]: x for idx, x in D.elements[p].items() for i, j in [divmod(idx, n)]})
    D2 = Coproduct.from_elements(B, els)
    eps2 = Functional(B, [eps.coeffs[p] for p in perm])
    S2 = Matrix(n, n, {(pos[r], pos[c]): x for r, c, x in S.entries()})
    return B, D2, eps2, S2


def _groupoid_meta(kind, objects, group, seed, S):
    meta = {"generator": kind, "objects": objects, "group": group,
            "expected_antipode": _entries(S)}
    if seed is not None:
        meta["seed"] = seed
    return meta


def generate_groupoid(objects, group, seed=None):
    """Groupoid algebra of the pair groupoid on ``objects`` objects times
    ``group``; a seed shuffles the basis order."""
    G = transitive_groupoid(objects, group)
    A, D, eps, S = groupoid_algebra(G)
    if seed is not None:
        perm = list(range(A.dim))
        random.Random(seed).shuffle(perm)
        A, D, eps, S = _permute(A, D, eps, S, perm)
    return serialize(A, D, eps, _groupoid_meta("groupoid", objects, group, seed, S))


def generate_dual(data):
    """Function algebra of the groupoid presented (on its arrows) by ``data``."""
    p = read_presentation(data)
    G = groupoid_from_algebra(p.algebra, p.coproduct)
    A, D, eps, S = function_algebra(G)
    meta = {"generator": "dual", "expected_antipode": _entries(S)}
    return serialize(A, D, eps, meta)


def bundled(name):
    """Bytes of a presentation shipped with the package."""
    return resources.files("weakhopf").joinpath("data", name).read_bytes()


# ---------------------------------------------------------------------------
# commands

def _load(path):
    p = Path(path)
    if p.exists():
        return p.read_bytes()
    if p.name in BUNDLED and len(p.parts) == 1:
        return bundled(p.name)
    raise FileNotFoundError(path)


def _plain_text_report(stages, verdict=None, failure=None):
    lines = []
    for st in stages:
        mark = "ok" if st.passed else "FAILED"
        lines.append(f"stage {st.name}: {mark}")
        for c in st.checks:
            extra = f" [{c.detail}]" if c.detail else ""
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}{extra}")
        for note in st.notes:
            lines.append(f"  note: {note}")
    if failure is not None:
        lines.append(f"failed stage: {failure.stage}")
        lines.append(f"reason: {failure}")
        lines.append(f"witness: {json.dumps(_plain(failure.witness), ensure_ascii=False)}")
        lines.append("verdict: negative")
    else:
        lines.append(f"verdict: {verdict}")
    return "\n".join(lines) + "\n"


def _cmd_check(args, out):
    data = _load(args.file)
    A, D, eps = parse(data)
    failure = None
    try:
        res = full_pipeline(A, D, declared_counit=eps)
        stages, verdict = res.report, res.verdict
        doc = res.as_dict()
    except PipelineAbort as exc:
        failure = exc
        stages, verdict = exc.report, None
        doc = exc.as_dict()
    if args.json:
        text = json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
    else:
        text = _plain_text_report(stages, verdict, failure)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    out.write(text)
    return EXIT_OK if failure is None else EXIT_NEGATIVE


def _cmd_integrals(args, out):
    A, D, _ = parse(_load(args.file))
    try:
        E = find_canonical_idempotent(D)
        sep = separability_structure(E)
    except StructureError as exc:
        out.write(f"cannot solve for integrals: {exc}\n")
        return EXIT_NEGATIVE
    I = integral_space(D, sep)
    doc = {"left": {"dim": I.left.dim, "faithful": I.left_faithful},
           "right": {"dim": I.right.dim, "faithful": I.right_faithful}}
    if args.json:
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(f"left integrals: dim {I.left.dim}, faithful {str(I.left_faithful).lower()}\n")
        out.write(f"right integrals: dim {I.right.dim}, faithful {str(I.right_faithful).lower()}\n")
    return EXIT_OK


def _cmd_construct(args, out):
    A, D, eps = parse(_load(args.file))
    try:
        res = full_pipeline(A, D, declared_counit=eps)
    except PipelineAbort as exc:
        out.write(f"failed stage: {exc.stage}\nreason: {exc}\n")
        return EXIT_NEGATIVE
    doc = {"verdict": res.verdict, "counit": [str(c) for c in res.epsilon.coeffs],
           "antipode": _entries(res.S)}
    Path(args.out).write_bytes((_dump(doc, 0) + "\n").encode("utf-8"))
    out.write(f"verdict: {res.verdict}\nwrote {args.out}\n")
    return EXIT_OK


def _cmd_gen(args, out):
    if args.kind == "groupoid":
        if args.objects is None or args.group is None:
            raise _Usage("gen groupoid needs --objects and --group")
        if args.objects < 1:
            raise _Usage("--objects must be positive")
        data = generate_groupoid(args.objects, args.group, args.seed)
    else:
        if args.file is None:
            raise _Usage("gen dual needs an input file")
        data = generate_dual(_load(args.file))
    Path(args.out).write_bytes(data)
    out.write(f"wrote {args.out}\n")
    return EXIT_OK


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _parser():
    p = _Parser(prog="weakhopf", description="Check finite-dimensional weak multiplier Hopf algebra presentations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("check", help="run the full verification pipeline")
    c.add_argument("file")
    c.add_argument("--report", help="also write the report to this file")
    c.add_argument("--json", action="store_true", help="emit the report as JSON")
    c.set_defaults(func=_cmd_check)
    i = sub.add_parser("integrals", help="solve for left and right integrals")
    i.add_argument("file")
    i.add_argument("--json", action="store_true")
    i.set_defaults(func=_cmd_integrals)
    k = sub.add_parser("construct", help="construct the counit and antipode")
    k.add_argument("file")
    k.add_argument("--out", required=True)
    k.set_defaults(func=_cmd_construct)
    g = sub.add_parser("gen", help="generate a groupoid presentation or its dual")
    g.add_argument("kind", choices=("groupoid", "dual"))
    g.add_argument("file", nargs="?", help="input presentation for 'dual'")
    g.add_argument("--objects", type=int)
    g.add_argument("--group", choices=sorted(GROUPS))
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = _parser().parse_args(argv)
        return args.func(args, out)
    except _Usage as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        sys.stderr.write(f"usage error: no such file {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except InvariantError as exc:
        sys.stderr.write(f"invariant error: {exc}; witness {json.dumps(_plain(exc.witness))}\n")
        return EXIT_PARSE
    except StructureError as exc:
        # a generator input that is not a groupoid algebra, for instance
        sys.stderr.write(f"invariant error: {exc}\n")
        return EXIT_PARSE


def main_exit():
    sys.exit(main())
