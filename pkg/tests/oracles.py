"""Reference computations kept independent of the package code paths."""

import itertools

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

FLAVOR = {"M": np.array([1.0, 0.0]), "Mbar": np.array([0.0, 1.0])}


def effective_hamiltonian(x, y):
    """Non-hermitian mass matrix in the flavour basis, average width 1.

    Eigenstates (M +- Mbar)/sqrt 2 with eigenvalues m_k - i G_k / 2,
    m1 - m2 = x, G_{1,2} = 1 +- y/2.
    """
    v1 = np.array([1.0, 1.0]) / np.sqrt(2)
    v2 = np.array([1.0, -1.0]) / np.sqrt(2)
    lam1 = 0.5 * x - 0.5j * (1 + 0.5 * y)
    lam2 = -0.5 * x - 0.5j * (1 - 0.5 * y)
    return lam1 * np.outer(v1, v1) + lam2 * np.outer(v2, v2)


def alive_alive(x, y, tau_l, tau_r):
    """2x2 flavour joint probabilities of the evolved singlet by matrix exponentials."""
    h = effective_hamiltonian(x, y)
    u_l, u_r = expm(-1j * h * tau_l), expm(-1j * h * tau_r)
    psi0 = (np.kron(FLAVOR["M"], FLAVOR["Mbar"]) - np.kron(FLAVOR["Mbar"], FLAVOR["M"])) / np.sqrt(2)
    psi = np.kron(u_l, u_r) @ psi0
    return (np.abs(psi) ** 2).reshape(2, 2)


def single_alive(x, y, tau):
    """Probability that one given side is still a meson of each flavour."""
    h = effective_hamiltonian(x, y)
    psi0 = (np.kron(FLAVOR["M"], FLAVOR["Mbar"]) - np.kron(FLAVOR["Mbar"], FLAVOR["M"])) / np.sqrt(2)
    psi = np.kron(expm(-1j * h * tau), np.eye(2)) @ psi0
    return (np.abs(psi.reshape(2, 2)) ** 2).sum(axis=1)


# Closed forms transcribed straight from the published expressions,
# in physical units.


def e_nonunitary_phys(dm, g1, g2, tl, tr):
    g = 0.5 * (g1 + g2)
    return -np.cos(dm * (tl - tr)) * np.exp(-g * (tl + tr))


def e_unitary_phys(dm, g1, g2, tl, tr):
    return (
        e_nonunitary_phys(dm, g1, g2, tl, tr)
        + 0.5 * (1 - np.exp(-g1 * tl)) * (1 - np.exp(-g2 * tr))
        + 0.5 * (1 - np.exp(-g2 * tl)) * (1 - np.exp(-g1 * tr))
    )


def e_renorm_phys(dm, g1, g2, tl, tr):
    return -np.cos(dm * (tl - tr)) / np.cosh((g1 - g2) * (tl - tr) / 2)


def ref_kernel(kind, x, y):
    g1, g2 = 1 + y / 2, 1 - y / 2
    fn = {"nonunitary": e_nonunitary_phys, "unitary": e_unitary_phys, "renormalized": e_renorm_phys}[kind]
    return lambda tl, tr: fn(x, g1, g2, tl, tr)


def ref_chsh(kind, x, y, a, ap, b, bp):
    e = ref_kernel(kind, x, y)
    return np.abs(e(a, b) - e(a, bp)) + np.abs(e(ap, b) + e(ap, bp))


def dense_grid_max(kind, x, y, n=60, t_max=8.0):
    """Uniform n^4 grid search, chunked over the first axis, then a polish."""
    g = np.linspace(0, t_max, n)
    ap, b, bp = np.meshgrid(g, g, g, indexing="ij")
    best, arg = -np.inf, None
    for a in g:
        v = ref_chsh(kind, x, y, a, ap, b, bp)
        j = np.argmax(v)
        if v.flat[j] > best:
            best, arg = float(v.flat[j]), (a, ap.flat[j], b.flat[j], bp.flat[j])
    res = minimize(lambda p: -ref_chsh(kind, x, y, *np.clip(p, 0, t_max)), arg, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
    return max(best, -res.fun)


def face_enumeration_max(kind, x, y, n=40, t_max=8.0, k=12):
    """Enumerate each zero pattern of the four times, search the face densely, polish."""
    nodes = t_max * np.linspace(0, 1, n)[1:] ** 2
    best = -np.inf
    for pattern in itertools.product([0, 1], repeat=4):
        free = np.array(pattern, bool)
        nf = free.sum()
        if nf == 0:
            best = max(best, float(ref_chsh(kind, x, y, 0.0, 0.0, 0.0, 0.0)))
            continue
        q = np.stack([m.ravel() for m in np.meshgrid(*([nodes] * nf), indexing="ij")])
        p = np.zeros((4, q.shape[1]))
        p[free] = q
        v = ref_chsh(kind, x, y, *p)
        best = max(best, float(v.max()))
        for i in np.argsort(-v)[:k]:
            def f(z):
                full = np.zeros(4)
                full[free] = np.clip(z, 0, t_max)
                return -ref_chsh(kind, x, y, *full)
            r = minimize(f, p[free, i], method="Nelder-Mead",
                         options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 20000})
            best = max(best, -r.fun)
    return best
