"""Independent reference computations used by the tests.

Nothing here imports the evaluation paths under test; the node values and
targets are the only shared inputs.
"""

import mpmath
import numpy as np

mpmath.mp.dps = 40


def mp_nodes(r, rho, j_max):
    return [mpmath.mpc(r) * mpmath.mpf(rho) ** (j - 1) for j in range(1, j_max + 1)]


def mp_product(z, alphas):
    z = mpmath.mpc(z)
    out = mpmath.mpc(1)
    for a in alphas:
        out *= (1 - z / a) ** 2
    return out


def mp_interpolant(alphas, p, k):
    """Coefficient-free Hermite basis evaluation at 40 digits.

    Returns callables ``g`` and ``dg`` on mpmath numbers.
    """
    alphas = [mpmath.mpc(a) for a in alphas]
    p = [mpmath.mpc(x) for x in p]
    k = [mpmath.mpc(x) for x in k]

    def H(j, z):
        out = mpmath.mpc(1)
        for i, a in enumerate(alphas):
            if i != j:
                out *= (1 - z / a) ** 2
        return out

    def dH(j, z):
        return mpmath.diff(lambda t: H(j, t), z)

    def L(j):
        return sum(2 / (alphas[j] - a) for i, a in enumerate(alphas) if i != j)

    coeffs = []
    for j, a in enumerate(alphas):
        Hj = H(j, a)
        A = p[j] * a**2 / Hj
        B = (k[j] - p[j] * L(j)) * a**2 / Hj
        coeffs.append((A, B))

    def g(z):
        z = mpmath.mpc(z)
        return sum(H(j, z) * (A + B * (z - alphas[j])) / alphas[j] ** 2
                   for j, (A, B) in enumerate(coeffs))

    def dg(z):
        z = mpmath.mpc(z)
        total = mpmath.mpc(0)
        for j, (A, B) in enumerate(coeffs):
            total += (dH(j, z) * (A + B * (z - alphas[j])) + H(j, z) * B) / alphas[j] ** 2
        return total

    return g, dg


def hermite_polynomial(nodes, p, k):
    """Dense confluent-Vandermonde solve for the degree ``2J-1`` polynomial."""
    nodes = np.asarray(nodes, dtype=complex)
    J = len(nodes)
    n = 2 * J
    V = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    for i, x in enumerate(nodes):
        for d in range(n):
            V[2 * i, d] = x**d
            V[2 * i + 1, d] = d * x ** (d - 1) if d else 0.0
        rhs[2 * i] = p[i]
        rhs[2 * i + 1] = k[i]
    coeffs = np.linalg.solve(V, rhs)
    return np.polynomial.Polynomial(coeffs)


def fs_length_homogeneous(p, v):
    """Fubini-Study length from the homogeneous lift ``Z = (1, p)``.

    The tangent lifts to ``V = (0, v)``; its length is the norm of the part
    of ``V`` orthogonal to ``Z``, divided by ``|Z|``.
    """
    Z = np.concatenate([[1.0], np.asarray(p, dtype=complex)])
    V = np.concatenate([[0.0], np.asarray(v, dtype=complex)])
    zz = np.vdot(Z, Z).real
    perp = V - (np.vdot(Z, V) / zz) * Z
    return float(np.linalg.norm(perp) / np.sqrt(zz))


def central_difference(fn, z, h):
    return (fn(z + h) - fn(z - h)) / (2 * h)


def mp_reevaluate(alphas, coeff_a, coeff_b):
    """High-precision evaluation of a built interpolant from its stored coefficients.

    ``coeff_a`` and ``coeff_b`` are ``(log_mag, phase)`` pairs of ``a_j, b_j``.
    """
    alphas = [mpmath.mpc(a) for a in alphas]

    def from_log(lm, ph):
        if lm == float("-inf"):
            return mpmath.mpc(0)
        return mpmath.exp(mpmath.mpf(lm)) * mpmath.expj(mpmath.mpf(ph))

    A = [from_log(*c) for c in coeff_a]
    B = [from_log(*c) for c in coeff_b]

    def g(z):
        z = mpmath.mpc(z)
        total = mpmath.mpc(0)
        for j, a in enumerate(alphas):
            H = mpmath.mpc(1)
            for i, b in enumerate(alphas):
                if i != j:
                    H *= (1 - z / b) ** 2
            total += H * (A[j] + B[j] * (z - a)) / a**2
        return total

    def dg(z):
        return mpmath.diff(g, mpmath.mpc(z))

    return g, dg
