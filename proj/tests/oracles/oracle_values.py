"""Reference values for the unit tests, computed from integral representations.

Run with: python3 tests/oracles/oracle_values.py
Requires mpmath. Values printed here are frozen into the C++ tests.
"""
import mpmath as mp

mp.mp.dps = 30

A, B, SIGMA = mp.mpf("0.03"), mp.mpf("0.5"), mp.mpf("0.02")
ALPHA, GAMMA = mp.mpf("0.5"), mp.mpf("1.5304")


def mean_r(r, t):
    return r * mp.e ** (-B * t) + A / B * (1 - mp.e ** (-B * t))


def moments(r, t):
    """Joint moments of (r_t, int_0^t r) from the stochastic-integral representation."""
    var_r = SIGMA**2 * mp.quad(lambda u: mp.e ** (-2 * B * (t - u)), [0, t])
    mean_h = mp.quad(lambda s: mean_r(r, s), [0, t])
    load = lambda u: (1 - mp.e ** (-B * (t - u))) / B
    var_h = SIGMA**2 * mp.quad(lambda u: load(u) ** 2, [0, t])
    cov = SIGMA**2 * mp.quad(lambda u: mp.e ** (-B * (t - u)) * load(u), [0, t])
    return mean_r(r, t), var_r, mean_h, var_h, cov


def closed_mean_h(r, t):
    return r * (1 - mp.e ** (-B * t)) / B + A / B * (t - (1 - mp.e ** (-B * t)) / B)


def closed_var_h(t):
    return SIGMA**2 / B**2 * (t - 3 / (2 * B) + 2 / B * mp.e ** (-B * t) - mp.e ** (-2 * B * t) / (2 * B))


def N_value(r):
    q = 1 - ALPHA
    f = lambda t: mp.e ** ((-GAMMA * t + ALPHA * closed_mean_h(r, t)) / q + ALPHA**2 * closed_var_h(t) / (2 * q**2))
    return mp.quad(f, [0, 1, 5, 20, mp.inf])


def resolvent_one(r, lam):
    kappa = lam + GAMMA
    f = lambda t: mp.e ** (-kappa * t + ALPHA * closed_mean_h(r, t) + ALPHA**2 * closed_var_h(t) / 2)
    return mp.quad(f, [0, 1, 5, 20, mp.inf])


def kl_value(r_eval, R):
    """Shooting solution of s^2/2 u'' + (a - b r) u' + (alpha r - gamma) u = 0, u(0) = u(R) = 1."""
    def rhs(x, y):
        return [y[1], -2 * ((A - B * x) * y[1] + (ALPHA * x - GAMMA) * y[0]) / SIGMA**2]

    f1 = mp.odefun(rhs, 0, [mp.mpf(1), mp.mpf(0)])
    f2 = mp.odefun(rhs, 0, [mp.mpf(0), mp.mpf(1)])
    c = (1 - f1(R)[0]) / f2(R)[0]
    return f1(r_eval)[0] + c * f2(r_eval)[0]


if __name__ == "__main__":
    for t in ("0.1", "1", "5"):
        m = moments(mp.mpf("0.05"), mp.mpf(t))
        print("moments r=0.05 t=%s:" % t, [mp.nstr(x, 17) for x in m])
    for r in ("0", "0.05", "0.1"):
        print("N(%s) =" % r, mp.nstr(N_value(mp.mpf(r)), 17))
    lam1 = ALPHA + mp.mpf("1e-5")
    for r in ("0.05", "0.075", "0.1"):
        print("resolvent(1) r=%s lambda1 =" % r, mp.nstr(resolvent_one(mp.mpf(r), lam1), 17))
    print("constant K =", mp.nstr(mp.mpf("0.15") ** mp.mpf("-0.5"), 17))
    vs = mp.mpf(1)
    ups = -mp.quad(lambda u: vs * mp.e ** (-vs * u) * (1 - mp.e ** (-B * u)) / B, [0, mp.inf])
    print("upsilon(1, 0.5) =", mp.nstr(ups, 17))
    g1 = ALPHA * A / B + ALPHA**2 * SIGMA**2 / ((1 - ALPHA) * B**2)
    g2 = ALPHA * A / B + 3 * ALPHA**2 * SIGMA**2 / (2 * mp.sqrt(1 - ALPHA) * B**2) + ALPHA * SIGMA * (B + 1) / B
    print("gamma1 =", mp.nstr(g1, 17), "gamma2 =", mp.nstr(g2, 17))
    print("K_L(0.05), R=0.3 =", mp.nstr(kl_value(mp.mpf("0.05"), mp.mpf("0.3")), 17))
