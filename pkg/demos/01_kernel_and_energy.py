# %% [markdown]
# # Kernels and the discrete energy
#
# The interaction kernel K(z) = |z|^-(n + p alpha) is singular at the origin.
# We check that it is admissible, then look at how the discrete energy of a
# fixed profile behaves as the grid is refined.

# %%
import numpy as np

from fracnehari import KernelSpec, assemble_energy_weights, build_mesh, check_admissible, seminorm_p

kernel = KernelSpec(n=1, p=2.0, alpha=0.5)
report = check_admissible(kernel)
for key, val in report.as_dict().items():
    print(f"{key:18s} {val}")

# %% [markdown]
# For this kernel the integral of min(1, |z|^p) K(z) is exactly 4.

# %%
print("error in mK integral:", abs(report.mk_integral - 4.0))

# %% [markdown]
# The energy of u(x) = x(1 - x) on successively finer grids. The exterior
# term grows near the boundary like dist^-(p alpha), so it carries a good part
# of the total.

# %%
for N in (16, 32, 64, 128, 256):
    mesh = build_mesh([0.0, 1.0], N)
    w = assemble_energy_weights(mesh, kernel)
    x = mesh.nodes[:, 0]
    u = x * (1 - x)
    total = seminorm_p(u, w)
    ext = w.exterior @ u**2
    print(f"N={N:4d}  energy={total:.6f}  exterior share={ext / total:.3f}")

# %% [markdown]
# Same check in two dimensions with p = 3.

# %%
k2 = KernelSpec(n=2, p=3.0, alpha=0.4)
for N in (6, 12, 24):
    mesh = build_mesh([[0, 1], [0, 1]], N)
    w = assemble_energy_weights(mesh, k2)
    x, y = mesh.nodes.T
    print(N, seminorm_p(np.sin(np.pi * x) * np.sin(np.pi * y), w))
