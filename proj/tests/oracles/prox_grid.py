"""Grid minimisation of 0.5 (z - x)^2 + lam * w |z| over z in [-1, 1], step 1e-4."""
import numpy as np

z = np.linspace(-1.0, 1.0, 20001)
for x, lam in [(0.2, 0.5), (0.7, 0.5), (-1.3, 0.25)]:
    f = 0.5 * (z - x) ** 2 + lam * np.abs(z)
    zs = z[np.argmin(f)]
    print(x, lam, zs, (x - zs) / lam)
