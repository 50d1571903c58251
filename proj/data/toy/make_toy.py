"""Regenerates the bundled toy dataset (200 nodes, 3 covariates)."""
import numpy as np

rng = np.random.default_rng(20240611)
n, d = 200, 3
a = (rng.random((n, n)) < 0.03).astype(int)
np.fill_diagonal(a, 0)
src, dst = np.nonzero(a)
deg = a.sum(axis=1, keepdims=True)
w = np.divide(a, deg, out=np.zeros((n, n)), where=deg > 0)

x = rng.normal(size=(n, d))
beta = np.array([1.0, -0.5, 0.8])
y = x @ beta + rng.normal(size=n)

eta = -0.2 + x @ np.array([0.8, -0.6, 0.0]) + (w @ x) @ np.array([1.2, 0.0, 0.9])
yb = (rng.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(int)

risk = np.exp(x @ np.array([0.5, 0.0, -0.4]) + (w @ x) @ np.array([0.6, 0.0, 0.0]))
t = rng.exponential(1.0 / risk)
c = rng.exponential(2.0, size=n)
time = np.minimum(t, c)
event = (t <= c).astype(int)

np.savetxt("edges.csv", np.column_stack([src, dst]), fmt="%d", delimiter=",", header="src,dst", comments="")
np.savetxt("covariates.csv", x, fmt="%.10f", delimiter=",", header="x1,x2,x3", comments="")
np.savetxt("y.csv", y, fmt="%.10f", header="y", comments="")
np.savetxt("y_binary.csv", yb, fmt="%d", header="y", comments="")
np.savetxt("survival.csv", np.column_stack([time, event]), fmt=["%.10f", "%d"], delimiter=",", header="time,event", comments="")
