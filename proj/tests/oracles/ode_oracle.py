"""Independent oracle for the unstructured models (hand substitution + scipy)."""
import numpy as np
from scipy.integrate import solve_ivp


def multi(t, y, P):
    iAB, iA, iB, u = y
    p = iAB + iA + iB + u
    gA = 1 - P['qAB'] * iB / p - P['qAAB'] * iAB / p
    gB = 1 - P['qBA'] * iA / p - P['qBAB'] * iAB / p
    g0 = 1 - P['q0A'] * iA / p - P['q0B'] * iB / p - P['q0AB'] * iAB / p
    tA, tB = P['tA'], P['tB']
    eAB = P['eA'] + P['eB'] - 1
    return [tA * tB * iAB - eAB * p * iAB,
            tA * (1 - tB) * iAB + tA * gA * iA - P['eA'] * p * iA,
            (1 - tA) * tB * iAB + tB * gB * iB - P['eB'] * p * iB,
            (1 - tA) * (1 - tB) * iAB + (1 - tA) * gA * iA + (1 - tB) * gB * iB + g0 * u - p * u]


double_inf = dict(tA=0.9, tB=0.9, eA=1.1, eB=1.1, q0A=0.9, q0B=0.9, q0AB=1 - 0.1 * 0.1,
            qAB=0.9, qAAB=0.9, qBA=0.9, qBAB=0.9)

if __name__ == "__main__":
    np.set_printoptions(precision=17)
    # hand substitution at (0.1,0.1,0.1,0.1): p = 0.4
    # iAB: 0.81*0.1 - 1.2*0.4*0.1 = 0.081 - 0.048 = 0.033
    # gA = gB = 1 - 0.9*0.25 - 0.9*0.25 = 0.55 ; g0 = 1 - 0.9*.25 - 0.9*.25 - 0.99*.25 = 0.3025
    # iA: 0.9*0.1*0.1 + 0.9*0.55*0.1 - 1.1*0.4*0.1 = 0.009 + 0.0495 - 0.044 = 0.0145
    # u : 0.01*0.1 + 0.1*0.55*0.1*2 + 0.3025*0.1 - 0.04 = 0.001 + 0.011 + 0.03025 - 0.04 = 0.00225
    print("hand", [0.033, 0.0145, 0.0145, 0.00225])
    print("double infection rhs", [repr(v) for v in multi(0, [0.1] * 4, double_inf)])
    s = solve_ivp(multi, [0, 2000], [0.1] * 4, args=(double_inf,), rtol=1e-12, atol=1e-14, method='DOP853')
    print("double infection final", [repr(v) for v in s.y[:, -1]], "rhs", multi(0, s.y[:, -1], double_inf))

    mutual = dict(tA=1, tB=1, eA=1.1, eB=1.1, q0A=1, q0B=1, q0AB=1, qAB=0.99, qAAB=0, qBA=0.99, qBAB=0)
    for y0 in ([0, 0.3, 0.2, 0.5], [0, 0.2, 0.3, 0.5], [0, 0.05, 0.02, 0.9]):
        s = solve_ivp(multi, [0, 3000], y0, args=(mutual,), rtol=1e-12, atol=1e-14, method='DOP853')
        print("mutually incompatible", y0, [float('%.6g' % v) for v in s.y[:, -1]])

    # continuum of equilibria at u = 0.8: tau = 1, eta = 1.1, q0A=.95, q0B=.5
    tau, eta, qa, qb, u = 1.0, 1.1, 0.95, 0.5, 0.8
    den = eta**2 * (qa - qb) * u
    iA = (-tau**3 - eta * qb * tau * u + eta**2 * qb * u**2 + tau**2 * (1 + (eta - 1) * u)) / den
    iB = (tau**3 + eta * qa * tau * u - eta**2 * qa * u**2 - tau**2 * (1 + (eta - 1) * u)) / den
    P = dict(tA=tau, tB=tau, eA=eta, eB=eta, q0A=qa, q0B=qb, q0AB=0, qAB=0, qAAB=0, qBA=0, qBAB=0)
    print("continuum u=0.8", repr(iA), repr(iB), "sum", iA + iB, tau / eta - u, "res", multi(0, [0, iA, iB, u], P))
    for uu in (0.1, 0.3, 0.5, 0.7, 0.85, 0.9):
        den = eta**2 * (qa - qb) * uu
        a = (-tau**3 - eta * qb * tau * uu + eta**2 * qb * uu**2 + tau**2 * (1 + (eta - 1) * uu)) / den
        b = (tau**3 + eta * qa * tau * uu - eta**2 * qa * uu**2 - tau**2 * (1 + (eta - 1) * uu)) / den
        print("   u", uu, a, b, max(abs(x) for x in multi(0, [0, a, b, uu], P)))
