import numpy as np

from vqembed.models import build_hubbard_spinless, build_tfi, build_xxz


def tfi(g, h=1.0, J=1.0):
    return build_tfi(g, np.full(g.n, h), np.full(len(g.edges), J))


MODEL_BUILDERS = {
    "tfi": tfi,
    "xxz": lambda g: build_xxz(g, 1.0),
    "hubbard": lambda g: build_hubbard_spinless(g, 1.0, 1.0),
}


def random_density(rng, d, rank=None):
    rank = rank or d
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_pure(rng, d):
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


ACCEPTANCE: list[str] = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
