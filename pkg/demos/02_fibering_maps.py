# %% [markdown]
# # Fibering maps
#
# Everything about J(t u) is decided by three numbers
# A = ||u||^p, B = int h |u|^(q+1) and D = int b |u|^(r+1).
# Here we walk through the four sign classes of (B, D).

# %%
import numpy as np

from fracnehari import FiberParams, ReducedIntegrals, critical_points, phi

P = FiberParams(p=2.0, q=0.5, r=3.0, lam=0.5)

examples = {
    "B<0, D<0": ReducedIntegrals(1.0, -1.0, -1.0),
    "B<0, D>0": ReducedIntegrals(1.0, -1.0, 1.0),
    "B>0, D<0": ReducedIntegrals(1.0, 1.0, -1.0),
    "B>0, D>0": ReducedIntegrals(1.0, 0.2, 1.0),
}
for name, ri in examples.items():
    rep = critical_points(ri, P)
    roots = ", ".join(f"{r.kind.value} at t={r.t:.4f} (phi={r.phi:+.4f})" for r in rep.roots) or "none"
    print(f"{name}: {rep.case.label:8s} {roots}")

# %% [markdown]
# With both integrals positive there is a local min and a local max as long
# as lambda B stays below the peak of m(t) = t^(p-1-q) A - t^(r-q) D.
# Once lambda B passes that peak both critical points are gone (exactly at the
# peak they coincide in an inflection point).

# %%
ri = examples["B>0, D>0"]
for lam in (0.5, 1.5, 2.0, 2.5, 3.0):
    rep = critical_points(ri, FiberParams(2.0, 0.5, 3.0, lam))
    print(f"lam={lam:4.1f}  status={rep.status:16s} kinds={[k.value for k in rep.kinds]}")

# %% [markdown]
# A few samples of phi itself, enough to sketch it.

# %%
ts = np.linspace(0, 1.4, 15)
print(np.round([phi(ri, P, t) for t in ts], 4))
