"""Generate Gauss nodes/weights for the weight -ln(t) on (0,1).

The moments are exactly 1/(k+1)^2, so the Chebyshev algorithm runs on
exact rationals; only the final Jacobi-matrix eigensolve needs extended
precision. Output is pasted into bem_dtn.py as frozen constants.
"""

from fractions import Fraction

import mpmath as mp

mp.mp.dps = 60


def recurrence_coefficients(n):
    moments = [Fraction(1, (k + 1) ** 2) for k in range(2 * n)]
    sigma = {(-1, l): Fraction(0) for l in range(1, 2 * n)}
    for l in range(2 * n):
        sigma[(0, l)] = moments[l]
    alpha = [Fraction(moments[1], moments[0])]
    beta = [moments[0]]
    for k in range(1, n):
        for l in range(k, 2 * n - k):
            sigma[(k, l)] = (sigma[(k - 1, l + 1)]
                             - alpha[k - 1] * sigma[(k - 1, l)]
                             - beta[k - 1] * sigma.get((k - 2, l), Fraction(0)))
        alpha.append(Fraction(sigma[(k, k + 1)], sigma[(k, k)])
                     - Fraction(sigma[(k - 1, k)], sigma[(k - 1, k - 1)]))
        beta.append(Fraction(sigma[(k, k)], sigma[(k - 1, k - 1)]))
    return alpha, beta


def rule(n):
    alpha, beta = recurrence_coefficients(n)
    d = [mp.mpf(a.numerator) / a.denominator for a in alpha]
    e = [mp.sqrt(mp.mpf(b.numerator) / b.denominator) for b in beta[1:]]
    J = mp.zeros(n)
    for i in range(n):
        J[i, i] = d[i]
    for i in range(n - 1):
        J[i, i + 1] = e[i]
        J[i + 1, i] = e[i]
    vals, vecs = mp.eigsy(J)
    mu0 = mp.mpf(beta[0].numerator) / beta[0].denominator
    nodes = [vals[i] for i in range(n)]
    weights = [mu0 * vecs[0, i] ** 2 for i in range(n)]
    order = sorted(range(n), key=lambda i: nodes[i])
    return [nodes[i] for i in order], [weights[i] for i in order]


if __name__ == "__main__":
    for n in (8, 16):
        nodes, weights = rule(n)
        print(f"# {n}-point rule for integral of f(t) * (-ln t) on (0,1)")
        print(f"LOG_GAUSS_{n}_NODES = np.array([")
        for v in nodes:
            print(f"    {mp.nstr(v, 20)},")
        print("])")
        print(f"LOG_GAUSS_{n}_WEIGHTS = np.array([")
        for v in weights:
            print(f"    {mp.nstr(v, 20)},")
        print("])")
        total = sum(weights)
        print(f"# weight sum = {mp.nstr(total, 20)} (exact candidates: 1)")
