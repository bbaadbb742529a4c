"""Reference values for the Poisson functionals, computed in 50-digit arithmetic.

rho is taken straight from its definition,
    corr(h(xi) - r xi, xi^2 - (2 lambda + 1) xi),  r = cov(h, xi) / lambda,
rather than through the projected kernel used by the C++ code.
Run: python3 tests/oracle/poisson_moments.py
"""
import mpmath as mp

mp.mp.dps = 50


def pd(d):
    d = mp.mpf(d)
    def h(k, lam):
        if k == 0:
            return mp.mpf(0)
        return 2 / (d * (d + 1)) * k * ((mp.mpf(k) / lam) ** d - 1)
    return h


def loglik(k, lam):
    return mp.mpf(0) if k == 0 else 2 * k * mp.log(mp.mpf(k) / lam)


def chisq(k, lam):
    return (k - lam) ** 2 / lam


def ind(r):
    return lambda k, lam: mp.mpf(1 if k == r else 0)


def collision(k, lam):
    return mp.mpf(k - 1 if k >= 1 else 0)


def moments(h, lam):
    lam = mp.mpf(lam)
    K = int(lam + 40 * mp.sqrt(lam) + 80)
    p = [mp.e ** (-lam)]
    for k in range(1, K + 1):
        p.append(p[-1] * lam / k)
    E = lambda f: mp.fsum(f(k) * p[k] for k in range(K + 1))
    hv = [h(k, lam) for k in range(K + 1)]
    m = E(lambda k: hv[k])
    var = E(lambda k: (hv[k] - m) ** 2)
    cov = E(lambda k: (hv[k] - m) * (k - lam))
    r = cov / lam
    a = lambda k: hv[k] - r * k
    b = lambda k: k * k - (2 * lam + 1) * k
    ma, mb = E(a), E(b)
    caa = E(lambda k: (a(k) - ma) ** 2)
    cbb = E(lambda k: (b(k) - mb) ** 2)
    cab = E(lambda k: (a(k) - ma) * (b(k) - mb))
    return dict(mean=m, var=var, r=r, sigma2=caa, rho=cab / mp.sqrt(caa * cbb))


def shift(h, n, eps):
    N = len(eps)
    lam = mp.mpf(n) / N
    null = moments(h, lam)
    def poi(rate):
        K = int(rate + 40 * mp.sqrt(rate) + 80)
        p = [mp.e ** (-rate)]
        for k in range(1, K + 1):
            p.append(p[-1] * rate / k)
        return p
    A1 = 0
    for e in eps:
        p = poi(lam * (1 + mp.mpf(e)))
        A1 += mp.fsum(h(k, lam) * p[k] for k in range(len(p)))
    A1 /= N
    epsn = mp.fsum(mp.mpf(e) ** 2 for e in eps) / N
    kappa = mp.sqrt(N) * (A1 - null["mean"]) / mp.sqrt(null["sigma2"])
    kas = mp.sqrt(n * lam / 2) * epsn * null["rho"]
    return kappa, kas


if __name__ == "__main__":
    kernels = {
        "pd:-0.5": pd(-0.5), "loglik": loglik, "pd:2": pd(2), "pd:3": pd(3),
        "indicator:0": ind(0), "indicator:1": ind(1), "indicator:2": ind(2),
        "collision": collision, "chisq": chisq,
    }
    for name, h in kernels.items():
        for lam in ["0.01", "0.02", "0.04", "0.08", "0.1", "0.25", "1", "2", "25", "50", "100"]:
            if name.startswith("indicator") and float(lam) > 2:
                continue
            m = moments(h, mp.mpf(lam))
            print(f"rho {name:12s} lambda={lam:5s} rho={mp.nstr(m['rho'], 17)} sigma2={mp.nstr(m['sigma2'], 17)} "
                  f"mean={mp.nstr(m['mean'], 17)}")
    m = moments(ind(0), 1)
    s = (1 - 2 * mp.e ** -1) / (mp.sqrt(m["sigma2"]) * mp.sqrt(2))
    print("indicator0 n=N=2 mu0=1: sigma2", mp.nstr(m["sigma2"], 17), "standardized", mp.nstr(s, 17))
    m = moments(loglik, 100)
    print("kappa loglik n=10000 N=100 eps=0.01:", mp.nstr(mp.sqrt(mp.mpf(10000) * 100 / 2) * mp.mpf("0.01") * m["rho"], 17))
    m0 = moments(loglik, mp.mpf(4) / 3)
    print("rho loglik lambda=4/3:", mp.nstr(m0["rho"], 17))
    print("pitman chisq/loglik lambda=100:", mp.nstr(1 / moments(loglik, 100)["rho"] ** 2, 17))
    k, ka = shift(chisq, 50, [0.1] * 25 + [-0.1] * 25)
    print("shift chisq n=50 N=50 delta=0.1:", mp.nstr(k, 17), mp.nstr(ka, 17))
    k, ka = shift(ind(0), 20, [0.2] * 50 + [-0.2] * 50)
    print("shift indicator0 n=20 N=100 delta=0.2:", mp.nstr(k, 17), mp.nstr(ka, 17))
    print("c(psi_-0.5)", mp.nstr(3 * (3 ** mp.mpf(-0.5) - 2 ** mp.mpf(0.5) + 1) ** 2 / (8 * (2 ** mp.mpf(-0.5) - 1) ** 2), 17))
    print("c(psi_0)", mp.nstr(mp.mpf(3) / 8 * (mp.log(mp.mpf(3) / 4) / mp.log(2)) ** 2, 17))
