"""Primitive closed-geodesic classes of finitely generated free Fuchsian groups.

Conjugacy classes of a free group are cyclic words; non-oriented geodesic
classes additionally identify a word with its inverse.  Enumeration walks the
tree of freely reduced words breadth-first, pruning on the Frobenius norm of
the partial product.  For groups with parabolic generators no rigorous
per-letter displacement bound exists, so completeness of the result is
flagged ``heuristic``; rank-one purely hyperbolic groups are ``certified``.

Generator matrices with integer entries are multiplied exactly (arbitrary
precision integers), which removes any risk of merging distinct classes
through trace rounding; everything else runs in double precision.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .errors import (FingerprintMismatchError, InvalidGroupError,
                     SpectrumBudgetError, SpectrumParseError)
from .hyperbolic import (PARABOLIC_TOL, ElementType, MoebiusMap,
                         SurfaceSignature, classify, trace_to_length)

TOOL_VERSION = "0.1.0"

#: distinct canonical words closer than this in |trace| are logged for review
TRACE_COLLISION_TOL = 1e-9

logger = logging.getLogger(__name__)

Word = tuple[int, ...]
_Mat = tuple  # (a, b, c, d), entries int or float


# ---------------------------------------------------------------------------
# cyclic words


def _letter_key(x: int) -> tuple[int, int]:
    # positive letters sort before their inverses: 1 < -1 < 2 < -2 < ...
    return (abs(x), 0 if x > 0 else 1)


def _word_key(word: Word) -> tuple[tuple[int, int], ...]:
    return tuple(_letter_key(x) for x in word)


def free_reduce(word) -> Word:
    """Cancel adjacent inverse pairs until none remain."""
    out: list[int] = []
    for x in word:
        if x == 0:
            raise ValueError("0 is not a generator index")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(word: Word) -> Word:
    """Strip cancelling first/last pairs of a freely reduced word."""
    i, j = 0, len(word)
    while j - i >= 2 and word[i] == -word[j - 1]:
        i += 1
        j -= 1
    return word[i:j]


def cyclic_canonicalize(word) -> Word:
    """Canonical form of a non-oriented conjugacy class.

    The word is freely and cyclically reduced, then minimized over all
    rotations of itself and of its inverse.  Raises ValueError when the
    input reduces to the identity.
    """
    w = cyclic_reduce(free_reduce(word))
    if not w:
        raise ValueError("word reduces to the identity")
    n = len(w)
    inv = tuple(-x for x in reversed(w))
    best = None
    best_key = None
    for base in (w, inv):
        doubled = base + base
        for r in range(n):
            rot = doubled[r:r + n]
            key = _word_key(rot)
            if best_key is None or key < best_key:
                best_key = key
                best = rot
    return best


def is_primitive(word: Word) -> bool:
    """True when the cyclic word is not a d-fold repetition for any d >= 2."""
    n = len(word)
    for p in range(1, n):
        if n % p == 0 and word == word[p:] + word[:p]:
            return False
    return True


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class GroupPresentation:
    """Free Fuchsian group given by generator matrices.

    ``signature`` may be None for groups that do not uniformize a stable
    finite-area surface (for example a single hyperbolic generator); when
    present the generator count must match the free rank 2g + max(n-1, 0).
    """

    generators: tuple[MoebiusMap, ...]
    signature: SurfaceSignature | None = None
    label: str = ""

    def __post_init__(self):
        if not self.generators:
            raise ValueError("presentation needs at least one generator")
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.signature is not None:
            rank = self.signature.free_rank
            if len(self.generators) != rank:
                raise ValueError(
                    f"(g, n) = ({self.signature.g}, {self.signature.n}) needs "
                    f"{rank} free generators, got {len(self.generators)}")

    @property
    def rank(self) -> int:
        return len(self.generators)

    def fingerprint(self) -> str:
        payload = [self.label]
        if self.signature is None:
            payload.append("signature:none")
        else:
            payload.append(f"signature:{self.signature.g},{self.signature.n}")
        for gen in self.generators:
            a, b, c, d = gen._canonical_entries()
            payload.append(f"{a:.17g},{b:.17g},{c:.17g},{d:.17g}")
        digest = hashlib.sha256("\n".join(payload).encode()).hexdigest()
        return digest[:32]

    def conjugated(self, h: MoebiusMap) -> "GroupPresentation":
        hinv = h.inverse()
        gens = tuple(
            MoebiusMap(*_mul(_mul(_entries(h), _entries(g)), _entries(hinv)))
            for g in self.generators)
        return GroupPresentation(gens, self.signature,
                                 label=self.label + "~conj")


def gamma2_presentation() -> GroupPresentation:
    """The level-2 principal congruence group: free on two parabolics,
    uniformizing the thrice-punctured sphere (g, n) = (0, 3)."""
    a = MoebiusMap(1.0, 2.0, 0.0, 1.0)
    b = MoebiusMap(1.0, 0.0, 2.0, 1.0)
    return GroupPresentation((a, b), SurfaceSignature(0, 3), label="gamma2")


def save_group_file(group: GroupPresentation, path) -> None:
    doc = {
        "label": group.label,
        "signature": None if group.signature is None else
        {"g": group.signature.g, "n": group.signature.n},
        "generators": [[[g.a, g.b], [g.c, g.d]] for g in group.generators],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_group_file(path) -> GroupPresentation:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        sig = doc.get("signature")
        signature = None if sig is None else SurfaceSignature(sig["g"], sig["n"])
        gens = tuple(MoebiusMap.from_rows(rows) for rows in doc["generators"])
        return GroupPresentation(gens, signature, label=doc.get("label", ""))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InvalidGroupError(f"malformed group file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class GeodesicClass:
    """A primitive non-oriented closed geodesic conjugacy class."""

    length: float
    abs_trace: float
    word: Word
    multiplicity: int = 1

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")
        if not self.abs_trace > 2.0:
            raise ValueError("geodesic class needs |trace| > 2")
        expected = trace_to_length(self.abs_trace)
        if abs(self.length - expected) > 1e-12 * max(1.0, expected):
            raise ValueError(
                f"length {self.length} inconsistent with |trace| "
                f"{self.abs_trace}")
        if cyclic_canonicalize(self.word) != self.word:
            raise ValueError(f"word {self.word} is not in canonical form")
        if not is_primitive(self.word):
            raise ValueError(f"word {self.word} is a proper power")


@dataclass(frozen=True)
class LengthSpectrum:
    """Sorted collection of geodesic classes up to a length cutoff.

    ``completeness`` is one of ``certified``, ``heuristic`` or ``partial``;
    only ``certified`` spectra carry a rigorous claim that every class of
    length <= ``complete_below`` is present.
    """

    classes: tuple[GeodesicClass, ...]
    cutoff: float
    group_fingerprint: str
    complete_below: float
    completeness: str = "heuristic"
    tool_version: str = TOOL_VERSION
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        keys = [(c.length, _word_key(c.word)) for c in self.classes]
        if any(k2 <= k1 for k1, k2 in zip(keys, keys[1:])):
            raise ValueError("classes must be strictly sorted by (length, word)")
        words = {c.word for c in self.classes}
        if len(words) != len(self.classes):
            raise ValueError("duplicate canonical words in spectrum")
        if any(c.length > self.cutoff for c in self.classes):
            raise ValueError("class exceeds the stated cutoff")

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    @property
    def systole(self) -> float | None:
        return self.classes[0].length if self.classes else None

    def restrict(self, cutoff: float) -> "LengthSpectrum":
        if cutoff > self.cutoff:
            raise ValueError("cannot extend a spectrum by restriction")
        kept = tuple(c for c in self.classes if c.length <= cutoff)
        return replace(self, classes=kept, cutoff=cutoff,
                       complete_below=min(self.complete_below, cutoff))

    # -- serialization --------------------------------------------------

    def to_text(self) -> str:
        lines = [
            "# hypzeta spectrum cache v1",
            f"# fingerprint: {self.group_fingerprint}",
            f"# label: {self.label}",
            f"# cutoff: {self.cutoff:.17g}",
            f"# complete_below: {self.complete_below:.17g}",
            f"# completeness: {self.completeness}",
            f"# tool_version: {self.tool_version}",
            f"# classes: {len(self.classes)}",
            "# columns: length abs_trace word multiplicity",
        ]
        if self.completeness == "partial":
            lines.insert(1, "# status: PARTIAL")
        for c in self.classes:
            word = ",".join(str(x) for x in c.word)
            lines.append(f"{c.length:.17g} {c.abs_trace:.17g} {word} "
                         f"{c.multiplicity}")
        return "\n".join(lines) + "\n"


def save_spectrum(spectrum: LengthSpectrum, path) -> None:
    with open(path, "w") as fh:
        fh.write(spectrum.to_text())


def load_spectrum(path, *, group: GroupPresentation | None = None,
                  expected_fingerprint: str | None = None) -> LengthSpectrum:
    """Read a cache file; a fingerprint mismatch is an error, not a warning."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SpectrumParseError(f"cannot read {path}: {exc}") from exc
    spectrum = spectrum_from_text(text)
    want = expected_fingerprint
    if group is not None:
        want = group.fingerprint()
    if want is not None and want != spectrum.group_fingerprint:
        raise FingerprintMismatchError(
            f"spectrum belongs to {spectrum.group_fingerprint}, "
            f"expected {want}")
    return spectrum


def spectrum_from_text(text: str) -> LengthSpectrum:
    header: dict[str, str] = {}
    rows: list[GeodesicClass] = []
    try:
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    header[key.strip()] = value.strip()
                continue
            parts = line.split()
            if len(parts) != 4:
                raise SpectrumParseError(f"bad row: {line!r}")
            length = float(parts[0])
            abs_trace = float(parts[1])
            word = tuple(int(x) for x in parts[2].split(","))
            rows.append(GeodesicClass(length, abs_trace, word, int(parts[3])))
        count = int(header["classes"])
        if count != len(rows):
            raise SpectrumParseError(
                f"file advertises {count} classes, found {len(rows)}")
        return LengthSpectrum(
            classes=tuple(rows),
            cutoff=float(header["cutoff"]),
            group_fingerprint=header["fingerprint"],
            complete_below=float(header["complete_below"]),
            completeness=header["completeness"],
            tool_version=header.get("tool_version", "unknown"),
            label=header.get("label", ""),
        )
    except SpectrumParseError:
        raise
    except (KeyError, ValueError, IndexError) as exc:
        raise SpectrumParseError(f"malformed spectrum file: {exc}") from exc


# ---------------------------------------------------------------------------
# enumeration


def _entries(m: MoebiusMap) -> _Mat:
    return (m.a, m.b, m.c, m.d)


def _mul(m: _Mat, g: _Mat) -> _Mat:
    a, b, c, d = m
    e, f, gg, h = g
    return (a * e + b * gg, a * f + b * h, c * e + d * gg, c * f + d * h)


def _as_exact(gens: list[_Mat]) -> list[_Mat] | None:
    out = []
    for a, b, c, d in gens:
        ia, ib, ic, id_ = (round(x) for x in (a, b, c, d))
        if max(abs(a - ia), abs(b - ib), abs(c - ic), abs(d - id_)) > 1e-12:
            return None
        if ia * id_ - ib * ic != 1:
            return None
        out.append((ia, ib, ic, id_))
    return out


@dataclass
class _SubtreeResult:
    found: set[Word] = field(default_factory=set)
    nodes: int = 0
    exhausted: bool = False
    borderline: int = 0


def _bfs_subtree(first_letter: int, mats: dict[int, _Mat], letters: list[int],
                 trace_cap: float, norm_bound_sq: float, budget: int,
                 parabolic_tol: float) -> _SubtreeResult:
    res = _SubtreeResult()
    root = mats[first_letter]
    a, b, c, d = root
    if a * a + b * b + c * c + d * d > norm_bound_sq:
        return res
    frontier = [((first_letter,), root)]
    found = res.found
    while frontier:
        nxt = []
        for word, mat in frontier:
            res.nodes += 1
            if res.nodes > budget:
                res.exhausted = True
                return res
            a, b, c, d = mat
            last = word[-1]
            if word[0] != -last:
                tr = a + d
                if tr < 0:
                    tr = -tr
                if tr > 2.0 + parabolic_tol:
                    if tr <= trace_cap:
                        cw = cyclic_canonicalize(word)
                        if cw not in found and is_primitive(cw):
                            found.add(cw)
                elif tr > 2.0 - parabolic_tol and tr != 2 and tr != 2.0:
                    res.borderline += 1
            for g in letters:
                if g == -last:
                    continue
                e, f, gg, h = mats[g]
                na = a * e + b * gg
                nb = a * f + b * h
                nc = c * e + d * gg
                nd = c * f + d * h
                if na * na + nb * nb + nc * nc + nd * nd <= norm_bound_sq:
                    nxt.append((word + (g,), (na, nb, nc, nd)))
        frontier = nxt
    return res


def enumerate_spectrum(group: GroupPresentation, cutoff: float, *,
                       workers: int = 1, budget: int = 10_000_000,
                       norm_factor: float = 5.0,
                       parabolic_tol: float = PARABOLIC_TOL,
                       precision: str = "auto") -> LengthSpectrum:
    """Breadth-first enumeration of primitive classes with length <= cutoff.

    The word tree is partitioned into one subtree per first letter; the
    subtrees share the budget equally and merge by deterministic sorted
    union, so the result is independent of ``workers``.  Pruning keeps a
    partial product only while its Frobenius norm stays below
    ``norm_factor`` times the trace cap 2 cosh(cutoff / 2); the factor is a
    documented heuristic (doubling it is the standard completeness audit).
    """
    if cutoff <= 0.0:
        raise ValueError("cutoff must be positive")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if budget < 1:
        raise ValueError("budget must be positive")
    if precision not in ("auto", "exact", "double"):
        raise ValueError(f"unknown precision mode {precision!r}")

    all_hyperbolic = True
    for gen in group.generators:
        kind = classify(gen, tol=parabolic_tol)
        if kind in (ElementType.ELLIPTIC, ElementType.IDENTITY):
            raise InvalidGroupError(
                f"generator {gen!r} is {kind.value}; the group must be "
                "torsion free with non-trivial generators")
        if kind is not ElementType.HYPERBOLIC:
            all_hyperbolic = False

    float_mats = [_entries(g) for g in group.generators]
    exact = _as_exact(float_mats) if precision in ("auto", "exact") else None
    if precision == "exact" and exact is None:
        raise ValueError("exact precision requires integer generator matrices "
                         "of determinant one")
    gen_mats = exact if exact is not None else float_mats
    if exact is None and cutoff > 12.0:
        logger.warning(
            "cutoff %.3g > 12 with non-integer generators: double-precision "
            "traces may merge close classes; prefer integer matrices", cutoff)

    rank = group.rank
    letters = [i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)]
    mats: dict[int, _Mat] = {}
    for i, m in enumerate(gen_mats, start=1):
        mats[i] = m
        a, b, c, d = m
        mats[-i] = (d, -b, -c, a)

    trace_cap = 2.0 * math.cosh(cutoff / 2.0)
    gen_norm = max(math.sqrt(float(a * a + b * b + c * c + d * d))
                   for a, b, c, d in gen_mats)
    norm_bound = norm_factor * max(trace_cap, gen_norm)
    norm_bound_sq = norm_bound * norm_bound
    if exact is not None:
        norm_bound_sq = float(math.floor(norm_bound_sq))

    sub_budget = max(1, budget // len(letters))
    tasks = [(letter, mats, letters, trace_cap, norm_bound_sq, sub_budget,
              parabolic_tol) for letter in letters]
    if workers == 1:
        results = [_bfs_subtree(*t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _bfs_subtree(*t), tasks))

    words: set[Word] = set()
    for r in results:
        words |= r.found
    borderline = sum(r.borderline for r in results)
    if borderline:
        logger.warning("%d borderline near-parabolic elements encountered "
                       "(|trace| within %.1e of 2); they were classified "
                       "parabolic and reported here, not silently dropped",
                       borderline, parabolic_tol)

    classes = _build_classes(words, mats, cutoff)
    fingerprint = group.fingerprint()
    certified = all_hyperbolic and rank == 1

    if any(r.exhausted for r in results):
        partial = LengthSpectrum(
            classes=classes, cutoff=cutoff, group_fingerprint=fingerprint,
            complete_below=0.0, completeness="partial", label=group.label)
        raise SpectrumBudgetError(
            f"enumeration budget {budget} exhausted; partial spectrum with "
            f"{len(classes)} classes attached", partial=partial)

    _audit_trace_collisions(classes)
    return LengthSpectrum(
        classes=classes, cutoff=cutoff, group_fingerprint=fingerprint,
        complete_below=cutoff,
        completeness="certified" if certified else "heuristic",
        label=group.label)


def _build_classes(words: set[Word], mats: dict[int, _Mat],
                   cutoff: float) -> tuple[GeodesicClass, ...]:
    # traces are recomputed from the canonical spelling so that the output
    # does not depend on which rotation a subtree happened to visit first
    out = []
    for word in words:
        mat = mats[word[0]]
        for letter in word[1:]:
            mat = _mul(mat, mats[letter])
        tr = abs(float(mat[0] + mat[3]))
        length = trace_to_length(tr)
        if length <= cutoff:
            out.append(GeodesicClass(length, tr, word))
    out.sort(key=lambda c: (c.length, _word_key(c.word)))
    return tuple(out)


def _audit_trace_collisions(classes) -> None:
    by_trace = sorted(classes, key=lambda c: c.abs_trace)
    collisions = 0
    for c1, c2 in zip(by_trace, by_trace[1:]):
        if abs(c1.abs_trace - c2.abs_trace) < TRACE_COLLISION_TOL:
            collisions += 1
            logger.debug("trace collision: %s and %s both near |trace| %.12g",
                         c1.word, c2.word, c1.abs_trace)
    if collisions:
        logger.info("%d trace collisions below %.1e among %d classes "
                    "(distinct canonical words; dedup is word-keyed)",
                    collisions, TRACE_COLLISION_TOL, len(classes))
