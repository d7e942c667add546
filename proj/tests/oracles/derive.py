"""Independent reference values for the unit tests.

Computed with scipy/sympy, never with the library. Run

    python3 tests/oracles/derive.py > tests/oracle_values.hpp

to refresh the frozen header.
"""
import numpy as np
import sympy as sp
from scipy import integrate

out = {}

# Star r(t) = 1 + 0.4 cos 3t.
r = lambda t: 1 + 0.4 * np.cos(3 * t)
rp = lambda t: -1.2 * np.sin(3 * t)
rpp = lambda t: -3.6 * np.cos(3 * t)
out["kStarPerimeter"] = integrate.quad(lambda t: np.hypot(r(t), rp(t)), 0, 2 * np.pi, epsabs=1e-13, limit=200)[0]
out["kStarArea"] = integrate.quad(lambda t: 0.5 * r(t) ** 2, 0, 2 * np.pi, epsabs=1e-13)[0]
kappa = lambda t: (r(t) ** 2 + 2 * rp(t) ** 2 - r(t) * rpp(t)) / (r(t) ** 2 + rp(t) ** 2) ** 1.5
out["kStarCurvatureAtPiOver3"] = float(kappa(np.pi / 3))
out["kStarCurvatureAt0"] = float(kappa(0.0))

# Fisher information of n = 1 + 0.1 cos(pi x) over the unit disk.
fisher = lambda x: (0.1 * np.pi * np.sin(np.pi * x)) ** 2 / (1 + 0.1 * np.cos(np.pi * x)) * 2 * np.sqrt(1 - x * x)
out["kDiskFisher"] = integrate.quad(fisher, -1, 1, epsabs=1e-14)[0]

# Radial c = 1 + r^2 (2 - r^2) / 2 on the unit disk with g(s) = s, rho = log.
rr = sp.symbols("r", positive=True)
c = 1 + sp.Rational(1, 2) * rr**2 * (2 - rr**2)
rho = sp.log(c)
d1, d2 = sp.diff(rho, rr), sp.diff(rho, rr, 2)
cp = sp.diff(c, rr)
hess = sp.lambdify(rr, c * (d2**2 + (d1 / rr) ** 2) * 2 * sp.pi * rr)
grad4 = sp.lambdify(rr, cp**4 * 2 * sp.pi * rr)
lhs = sp.lambdify(rr, cp**4 / c**3 * 2 * sp.pi * rr)
out["kRadialHessRho"] = integrate.quad(hess, 1e-12, 1, epsabs=1e-14)[0]
out["kRadialGradC4"] = integrate.quad(grad4, 0, 1, epsabs=1e-14)[0]
out["kRadialGradHessLhs"] = integrate.quad(lhs, 0, 1, epsabs=1e-14)[0]
out["kRadialGradHessRhs"] = (2 + np.sqrt(2)) ** 2 * out["kRadialHessRho"]

print("// Generated by tests/oracles/derive.py; do not edit.")
print("#pragma once\n")
print("namespace oracle {\n")
for k, v in out.items():
    print(f"inline constexpr double {k} = {float(v)!r};")
print("\n} // namespace oracle")
