"""Symbolic Pauli and fermionic operator algebra with dense matricization.

Monomials are stored in canonical form:

* ``PauliString``: tuple of ``(site, axis)`` factors sorted by site, axis in
  ``"xyz"``. The empty tuple is the identity.
* ``FermiWord``: creation modes strictly increasing followed by annihilation
  modes strictly decreasing, i.e. ``a†_{c1} a†_{c2} ... a_{a1} a_{a2} ...``.

``OperatorPolynomial`` is an immutable linear combination of monomials of one
kind. Fermionic products are normal ordered with the canonical
anticommutation relations; Pauli products use the single-site table.

Textual format (0-based indices)::

    1.5 Z0 Z1 + -1.0 X0
    0.5 adag0 a1 + (0.5-1j) adag1 a0 + 2
"""

from __future__ import annotations

import itertools
import re
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import InvalidInputError

PRUNE_TOL = 1e-14
SPIN = "spin"
FERMION = "fermion"
KINDS = (SPIN, FERMION)

_AXES = "xyz"
# (a, b) -> (phase, c) with sigma_a sigma_b = phase * sigma_c, c = "" for identity
_PAULI_TABLE: dict[tuple[str, str], tuple[complex, str]] = {}
for _a in _AXES:
    _PAULI_TABLE[(_a, _a)] = (1.0, "")
for _a, _b, _c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
    _PAULI_TABLE[(_a, _b)] = (1j, _c)
    _PAULI_TABLE[(_b, _a)] = (-1j, _c)


class PauliString(NamedTuple):
    """Product of single-site Pauli matrices, sorted by site."""

    factors: tuple[tuple[int, str], ...] = ()

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.factors)

    def __str__(self) -> str:
        return " ".join(f"{ax.upper()}{s}" for s, ax in self.factors)


class FermiWord(NamedTuple):
    """Normally ordered fermionic word ``a†_{c...} a_{a...}``."""

    creations: tuple[int, ...] = ()
    annihilations: tuple[int, ...] = ()

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.creations) | set(self.annihilations)))

    def __str__(self) -> str:
        parts = [f"adag{i}" for i in self.creations] + [f"a{i}" for i in self.annihilations]
        return " ".join(parts)


Monomial = Union[PauliString, FermiWord]
IDENTITY_PAULI = PauliString(())
IDENTITY_FERMI = FermiWord((), ())


def identity_monomial(kind: str) -> Monomial:
    return IDENTITY_PAULI if kind == SPIN else IDENTITY_FERMI


def pauli_string(factors: Iterable[tuple[int, str]]) -> PauliString:
    """Validate and sort Pauli factors into a ``PauliString``."""
    items = sorted((int(s), str(a).lower()) for s, a in factors)
    sites = [s for s, _ in items]
    if len(set(sites)) != len(sites):
        raise InvalidInputError("repeated site in Pauli string")
    for s, a in items:
        if s < 0 or a not in _AXES:
            raise InvalidInputError(f"bad Pauli factor ({s}, {a})")
    return PauliString(tuple(items))


def fermi_word(creations: Sequence[int], annihilations: Sequence[int]) -> FermiWord:
    """Build a canonical ``FermiWord``; inputs must already be normally ordered."""
    c = tuple(int(i) for i in creations)
    a = tuple(int(i) for i in annihilations)
    if any(x >= y for x, y in zip(c, c[1:])) or any(x <= y for x, y in zip(a, a[1:])):
        raise InvalidInputError("fermionic word is not in canonical order")
    if any(i < 0 for i in c + a):
        raise InvalidInputError("negative mode index")
    return FermiWord(c, a)


def _monomial_kind(m: Monomial) -> str:
    return SPIN if isinstance(m, PauliString) else FERMION


# ---------------------------------------------------------------------------
# monomial products


@lru_cache(maxsize=1 << 18)
def _pauli_product(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    phase: complex = 1.0
    out: list[tuple[int, str]] = []
    i = j = 0
    fp, fq = p.factors, q.factors
    while i < len(fp) and j < len(fq):
        (sp, ap), (sq, aq) = fp[i], fq[j]
        if sp < sq:
            out.append(fp[i])
            i += 1
        elif sq < sp:
            out.append(fq[j])
            j += 1
        else:
            ph, ax = _PAULI_TABLE[(ap, aq)]
            phase *= ph
            if ax:
                out.append((sp, ax))
            i += 1
            j += 1
    out.extend(fp[i:])
    out.extend(fq[j:])
    return phase, PauliString(tuple(out))


def _sort_sign(seq: Sequence[int], descending: bool) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``seq``; 0 when an index repeats."""
    if len(set(seq)) != len(seq):
        return 0, ()
    inversions = 0
    for x, y in itertools.combinations(seq, 2):
        if (x > y) != descending:
            inversions += 1
    return (-1 if inversions % 2 else 1), tuple(sorted(seq, reverse=descending))


@lru_cache(maxsize=1 << 18)
def normal_order(ops: tuple[tuple[int, bool], ...]) -> tuple[tuple[FermiWord, int], ...]:
    """Normal order a product of ladder operators.

    ``ops`` is a sequence of ``(mode, is_creation)`` read left to right. The
    result is a tuple of ``(word, integer coefficient)`` pairs.
    """
    for k in range(len(ops) - 1):
        (i, ci), (j, cj) = ops[k], ops[k + 1]
        if not ci and cj:
            # a_i a_j^dag = delta_ij - a_j^dag a_i
            acc: dict[FermiWord, int] = {}
            swapped = ops[:k] + ((j, True), (i, False)) + ops[k + 2 :]
            for w, c in normal_order(swapped):
                acc[w] = acc.get(w, 0) - c
            if i == j:
                for w, c in normal_order(ops[:k] + ops[k + 2 :]):
                    acc[w] = acc.get(w, 0) + c
            return tuple((w, c) for w, c in acc.items() if c != 0)
    creations = [i for i, c in ops if c]
    annihilations = [i for i, c in ops if not c]
    s1, cs = _sort_sign(creations, descending=False)
    s2, an = _sort_sign(annihilations, descending=True)
    if s1 * s2 == 0:
        return ()
    return ((FermiWord(cs, an), s1 * s2),)


def _fermi_ops(w: FermiWord) -> tuple[tuple[int, bool], ...]:
    return tuple((i, True) for i in w.creations) + tuple((i, False) for i in w.annihilations)


@lru_cache(maxsize=1 << 18)
def _fermi_product(v: FermiWord, w: FermiWord) -> tuple[tuple[FermiWord, int], ...]:
    return normal_order(_fermi_ops(v) + _fermi_ops(w))


def monomial_adjoint(m: Monomial) -> Monomial:
    """Adjoint of a canonical monomial (no sign for either kind)."""
    if isinstance(m, PauliString):
        return m
    return FermiWord(tuple(reversed(m.annihilations)), tuple(reversed(m.creations)))


def _sort_key(m: Monomial) -> tuple:
    if isinstance(m, PauliString):
        return (m.sites, tuple(_AXES.index(a) for _, a in m.factors))
    return (m.sites, (len(m.creations), m.creations, m.annihilations))


monomial_sort_key = _sort_key


# ---------------------------------------------------------------------------
# polynomials


class OperatorPolynomial:
    """Immutable linear combination of canonical monomials."""

    __slots__ = ("kind", "num_sites", "_terms", "_hash")

    def __init__(self, kind: str, num_sites: int, terms: Mapping[Monomial, complex] | None = None):
        if kind not in KINDS:
            raise InvalidInputError(f"unknown kind {kind!r}")
        self.kind = kind
        self.num_sites = int(num_sites)
        clean: dict[Monomial, complex] = {}
        for m, c in (terms or {}).items():
            if _monomial_kind(m) != kind:
                raise InvalidInputError("monomial kind does not match polynomial kind")
            c = complex(c)
            if abs(c) > PRUNE_TOL:
                clean[m] = c
        for m in clean:
            if any(s >= self.num_sites for s in m.sites):
                raise InvalidInputError(f"monomial {m} exceeds num_sites={num_sites}")
        self._terms = clean
        self._hash: int | None = None

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, kind: str, num_sites: int) -> "OperatorPolynomial":
        return cls(kind, num_sites, {})

    @classmethod
    def identity(cls, kind: str, num_sites: int, coeff: complex = 1.0) -> "OperatorPolynomial":
        return cls(kind, num_sites, {identity_monomial(kind): coeff})

    @classmethod
    def monomial(cls, m: Monomial, num_sites: int, coeff: complex = 1.0) -> "OperatorPolynomial":
        return cls(_monomial_kind(m), num_sites, {m: coeff})

    @property
    def terms(self) -> dict[Monomial, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, complex]]:
        """Terms in canonical (deterministic) order."""
        for m in sorted(self._terms, key=_sort_key):
            yield m, self._terms[m]

    def coefficient(self, m: Monomial) -> complex:
        return self._terms.get(m, 0.0)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def support(self) -> tuple[int, ...]:
        out: set[int] = set()
        for m in self._terms:
            out.update(m.sites)
        return tuple(sorted(out))

    # arithmetic -------------------------------------------------------------
    def _check(self, other: "OperatorPolynomial") -> None:
        if not isinstance(other, OperatorPolynomial):
            raise InvalidInputError("expected an OperatorPolynomial")
        if other.kind != self.kind:
            raise InvalidInputError(f"kind mismatch: {self.kind} vs {other.kind}")
        if other.num_sites != self.num_sites:
            raise InvalidInputError("num_sites mismatch")

    def _coerce(self, other) -> "OperatorPolynomial":
        if isinstance(other, OperatorPolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return OperatorPolynomial.identity(self.kind, self.num_sites, complex(other))
        return NotImplemented

    def __add__(self, other) -> "OperatorPolynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc = dict(self._terms)
        for m, c in other._terms.items():
            acc[m] = acc.get(m, 0.0) + c
        return OperatorPolynomial(self.kind, self.num_sites, acc)

    __radd__ = __add__

    def __neg__(self) -> "OperatorPolynomial":
        return OperatorPolynomial(self.kind, self.num_sites, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "OperatorPolynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "OperatorPolynomial":
        return (-self) + other

    def scale(self, s: complex) -> "OperatorPolynomial":
        return OperatorPolynomial(self.kind, self.num_sites, {m: s * c for m, c in self._terms.items()})

    def __mul__(self, other) -> "OperatorPolynomial":
        if isinstance(other, OperatorPolynomial):
            return mul(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(complex(other))
        return NotImplemented

    def __rmul__(self, other) -> "OperatorPolynomial":
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(complex(other))
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return self.kind == other.kind and self.num_sites == other.num_sites and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.kind, self.num_sites, frozenset(self._terms.items())))
        return self._hash

    def allclose(self, other: "OperatorPolynomial", atol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= atol for c in diff._terms.values())

    def adjoint(self) -> "OperatorPolynomial":
        return adjoint(self)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        for m, c in self._terms.items():
            if abs(self._terms.get(monomial_adjoint(m), 0.0) - np.conj(c)) > tol:
                return False
        return True

    def to_matrix(self, cluster: Sequence[int]) -> np.ndarray:
        return to_matrix(self, cluster)

    def __repr__(self) -> str:
        return f"OperatorPolynomial({self.kind!r}, {self.num_sites}, {format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)


def mul(a: OperatorPolynomial, b: OperatorPolynomial) -> OperatorPolynomial:
    """Product ``a·b`` in canonical form."""
    if not isinstance(a, OperatorPolynomial) or not isinstance(b, OperatorPolynomial):
        raise InvalidInputError("mul expects two polynomials")
    a._check(b)
    acc: dict[Monomial, complex] = {}
    if a.kind == SPIN:
        for p, cp in a._terms.items():
            for q, cq in b._terms.items():
                ph, r = _pauli_product(p, q)
                acc[r] = acc.get(r, 0.0) + ph * cp * cq
    else:
        for v, cv in a._terms.items():
            for w, cw in b._terms.items():
                for r, s in _fermi_product(v, w):
                    acc[r] = acc.get(r, 0.0) + s * cv * cw
    return OperatorPolynomial(a.kind, a.num_sites, acc)


def adjoint(p: OperatorPolynomial) -> OperatorPolynomial:
    """Hermitian adjoint: conjugate coefficients and adjoint monomials."""
    return OperatorPolynomial(p.kind, p.num_sites, {monomial_adjoint(m): np.conj(c) for m, c in p._terms.items()})


# ---------------------------------------------------------------------------
# matricization

_PAULI_MATS = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
CREATION = np.array([[0, 0], [1, 0]], dtype=complex)


def _slots(sites: Iterable[int], cluster: Sequence[int]) -> dict[int, int]:
    index = {s: k for k, s in enumerate(cluster)}
    if len(index) != len(cluster):
        raise InvalidInputError("duplicate entries in cluster / mode order")
    for s in sites:
        if s not in index:
            raise InvalidInputError(f"site {s} not in cluster {list(cluster)}")
    return index


def _pauli_action(p: PauliString, cluster: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Rows and values of the permutation-with-phase matrix of ``p``."""
    index = _slots(p.sites, cluster)
    n = len(cluster)
    states = np.arange(1 << n)
    flip = 0
    phase = np.ones(1 << n, dtype=complex)
    for s, ax in p.factors:
        bit = 1 << (n - 1 - index[s])
        b = (states & bit) != 0
        if ax == "x":
            flip |= bit
        elif ax == "y":
            flip |= bit
            phase *= np.where(b, -1j, 1j)
        else:
            phase *= np.where(b, -1.0, 1.0)
    return states ^ flip, phase


def _fermi_action(w: FermiWord, mode_order: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Rows and values (zero where the word annihilates the column state)."""
    index = _slots(w.sites, mode_order)
    n = len(mode_order)
    cur = np.arange(1 << n)
    amp = np.ones(1 << n)
    ops = [(i, True) for i in w.creations] + [(i, False) for i in w.annihilations]
    # apply the rightmost operator first
    for mode, is_creation in reversed(ops):
        k = index[mode]
        bit = 1 << (n - 1 - k)
        occupied = (cur & bit) != 0
        amp = np.where(occupied != is_creation, amp, 0.0)
        if k:
            parity = np.bitwise_count(cur >> (n - k)) & 1  # slots 0..k-1
            amp = np.where(parity == 1, -amp, amp)
        cur = cur ^ bit
    return cur, amp.astype(complex)


def monomial_action(m: Monomial, cluster: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Column ``x`` of the monomial matrix has entry ``vals[x]`` in row ``rows[x]``."""
    cluster = tuple(int(i) for i in cluster)
    if isinstance(m, PauliString):
        return _pauli_action(m, cluster)
    return _fermi_action(m, cluster)


@lru_cache(maxsize=1 << 14)
def _monomial_dense(m: Monomial, cluster: tuple[int, ...]) -> np.ndarray:
    rows, vals = monomial_action(m, cluster)
    dim = 1 << len(cluster)
    out = np.zeros((dim, dim), dtype=complex)
    out[rows, np.arange(dim)] = vals
    out.setflags(write=False)
    return out


def jordan_wigner(w: FermiWord, mode_order: Sequence[int]) -> np.ndarray:
    """Matrix of a fermionic word under the Jordan–Wigner map on ``mode_order``.

    Mode ``mode_order[k]`` occupies tensor slot ``k``; the creation operator of
    slot ``k`` is ``Z ⊗ ... ⊗ Z ⊗ [[0,0],[1,0]] ⊗ I ⊗ ... ⊗ I``.
    """
    return _monomial_dense(w, tuple(int(i) for i in mode_order)).copy()


def monomial_matrix(m: Monomial, cluster: Sequence[int]) -> np.ndarray:
    """Read-only cached matrix of a single monomial on ``cluster``."""
    return _monomial_dense(m, tuple(int(i) for i in cluster))


def to_matrix(p: OperatorPolynomial, cluster: Sequence[int]) -> np.ndarray:
    """Dense matrix of ``p`` on the ordered site/mode list ``cluster``."""
    cluster = tuple(int(i) for i in cluster)
    _slots(p.support(), cluster)
    dim = 1 << len(cluster)
    out = np.zeros((dim, dim), dtype=complex)
    for m, c in p._terms.items():
        out += c * monomial_matrix(m, cluster)
    return out


def to_sparse(p: OperatorPolynomial, cluster: Sequence[int]):
    """Sparse CSR matrix of ``p``; used for full-system assembly."""
    import scipy.sparse as sp

    cluster = tuple(int(i) for i in cluster)
    _slots(p.support(), cluster)
    dim = 1 << len(cluster)
    cols = np.arange(dim)
    rows_all, cols_all, vals_all = [], [], []
    for m, c in p._terms.items():
        rows, vals = monomial_action(m, cluster)
        keep = vals != 0
        rows_all.append(rows[keep])
        cols_all.append(cols[keep])
        vals_all.append(c * vals[keep])
    if not rows_all:
        return sp.csr_matrix((dim, dim), dtype=complex)
    return sp.csr_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))), shape=(dim, dim)
    )


# ---------------------------------------------------------------------------
# local bases


def local_basis(cluster: Sequence[int], kind: str, num_sites: int | None = None) -> list[OperatorPolynomial]:
    """Product basis of the algebra on ``cluster``.

    Per-site factors are ``[I, X, Y, Z]`` for spins and ``[a†a, aa†, a, a†]``
    for fermions; sites vary in cluster order with the first site slowest.
    """
    cluster = [int(i) for i in cluster]
    if not cluster:
        raise InvalidInputError("cluster must be nonempty")
    if len(set(cluster)) != len(cluster):
        raise InvalidInputError("duplicate sites in cluster")
    n = num_sites if num_sites is not None else max(cluster) + 1
    factors: list[list[OperatorPolynomial]] = []
    for s in cluster:
        if kind == SPIN:
            opts = [OperatorPolynomial.identity(SPIN, n)] + [
                OperatorPolynomial.monomial(PauliString(((s, a),)), n) for a in _AXES
            ]
        elif kind == FERMION:
            num = OperatorPolynomial.monomial(FermiWord((s,), (s,)), n)
            opts = [
                num,
                OperatorPolynomial.identity(FERMION, n) - num,
                OperatorPolynomial.monomial(FermiWord((), (s,)), n),
                OperatorPolynomial.monomial(FermiWord((s,), ()), n),
            ]
        else:
            raise InvalidInputError(f"unknown kind {kind!r}")
        factors.append(opts)
    basis = []
    for combo in itertools.product(*factors):
        acc = combo[0]
        for f in combo[1:]:
            acc = mul(acc, f)
        basis.append(acc)
    return basis


def word_basis(cluster: Sequence[int], kind: str) -> list[Monomial]:
    """All canonical monomials supported on ``cluster`` (4**len(cluster) of them)."""
    cluster = sorted(int(i) for i in cluster)
    out: list[Monomial] = []
    if kind == SPIN:
        for axes in itertools.product("oxyz", repeat=len(cluster)):
            out.append(PauliString(tuple((s, a) for s, a in zip(cluster, axes) if a != "o")))
    else:
        for mask_c in itertools.product((0, 1), repeat=len(cluster)):
            cre = tuple(s for s, b in zip(cluster, mask_c) if b)
            for mask_a in itertools.product((0, 1), repeat=len(cluster)):
                ann = tuple(sorted((s for s, b in zip(cluster, mask_a) if b), reverse=True))
                out.append(FermiWord(cre, ann))
    return sorted(out, key=_sort_key)


def hermitian_basis(cluster: Sequence[int], kind: str, num_sites: int, include_identity: bool = False,
                    real_only: bool = False) -> list[OperatorPolynomial]:
    """Real-linear basis of the self-adjoint part of the algebra on ``cluster``.

    With ``real_only`` only elements whose matrix images are real symmetric are
    kept (Pauli strings with an even number of Y factors, ``w + w†`` for words).
    """
    out: list[OperatorPolynomial] = []
    seen: set[Monomial] = set()
    for m in word_basis(cluster, kind):
        if m in seen:
            continue
        if not include_identity and not m.sites:
            continue
        adj = monomial_adjoint(m)
        seen.add(m)
        seen.add(adj)
        if kind == SPIN:
            if real_only and sum(a == "y" for _, a in m.factors) % 2:
                continue
            out.append(OperatorPolynomial.monomial(m, num_sites))
        elif adj == m:
            out.append(OperatorPolynomial.monomial(m, num_sites))
        else:
            out.append(OperatorPolynomial(kind, num_sites, {m: 1.0, adj: 1.0}))
            if not real_only:
                out.append(OperatorPolynomial(kind, num_sites, {m: 1j, adj: -1j}))
    return out


# ---------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"^(?:(?P<pauli>[XYZxyz])(?P<ps>\d+)|(?P<adag>adag)(?P<cs>\d+)|a(?P<as>\d+))$")


def _format_coeff(c: complex) -> str:
    if abs(c.imag) <= PRUNE_TOL:
        return repr(float(c.real))
    return repr(complex(c))


def format_polynomial(p: OperatorPolynomial) -> str:
    """Render ``p`` in the textual round-trip format."""
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.items():
        body = str(m)
        parts.append(_format_coeff(c) + (" " + body if body else ""))
    return " + ".join(parts)


def parse_polynomial(text: str, kind: str, num_sites: int) -> OperatorPolynomial:
    """Parse the textual format back into a polynomial.

    Terms are separated by ``" + "``; each term is an optional coefficient
    (anything ``complex()`` accepts) followed by operator tokens ``X3``,
    ``Y0``, ``Z1`` for spins or ``adag2``, ``a0`` for fermions. Fermionic
    tokens may appear in any order and are normal ordered on parsing.
    """
    if kind not in KINDS:
        raise InvalidInputError(f"unknown kind {kind!r}")
    total = OperatorPolynomial.zero(kind, num_sites)
    text = text.strip()
    if text in ("", "0"):
        return total
    for raw in text.split(" + "):
        tokens = raw.split()
        if not tokens:
            raise InvalidInputError(f"empty term in {text!r}")
        coeff: complex = 1.0
        try:
            coeff = complex(tokens[0])
            tokens = tokens[1:]
        except ValueError:
            pass
        term = OperatorPolynomial.identity(kind, num_sites, coeff)
        for tok in tokens:
            mt = _TOKEN.match(tok)
            if mt is None:
                raise InvalidInputError(f"cannot parse token {tok!r}")
            if mt.group("pauli"):
                if kind != SPIN:
                    raise InvalidInputError(f"Pauli token {tok!r} in fermionic polynomial")
                fac = OperatorPolynomial.monomial(PauliString(((int(mt.group("ps")), mt.group("pauli").lower()),)), num_sites)
            elif mt.group("adag"):
                if kind != FERMION:
                    raise InvalidInputError(f"fermionic token {tok!r} in spin polynomial")
                fac = OperatorPolynomial.monomial(FermiWord((int(mt.group("cs")),), ()), num_sites)
            else:
                if kind != FERMION:
                    raise InvalidInputError(f"fermionic token {tok!r} in spin polynomial")
                fac = OperatorPolynomial.monomial(FermiWord((), (int(mt.group("as")),)), num_sites)
            term = mul(term, fac)
        total = total + term
    return total


# convenience constructors ----------------------------------------------------


def pauli(num_sites: int, *factors: tuple[int, str], coeff: complex = 1.0) -> OperatorPolynomial:
    return OperatorPolynomial.monomial(pauli_string(factors), num_sites, coeff)


def creation(mode: int, num_sites: int) -> OperatorPolynomial:
    return OperatorPolynomial.monomial(FermiWord((mode,), ()), num_sites)


def annihilation(mode: int, num_sites: int) -> OperatorPolynomial:
    return OperatorPolynomial.monomial(FermiWord((), (mode,)), num_sites)


def number(mode: int, num_sites: int) -> OperatorPolynomial:
    return OperatorPolynomial.monomial(FermiWord((mode,), (mode,)), num_sites)
