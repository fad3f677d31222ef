# %% [markdown]
# # The lambda_0 threshold
#
# Below lambda_0 every field with B, D > 0 has two Nehari points and the
# degenerate set is empty. The threshold is built from discrete embedding
# constants, which we estimate by local ascent from random starts.

# %%
import numpy as np

from fracnehari import KernelSpec, ProblemSpec, SamplerConfig, build_mesh, critical_points, estimate_lambda0, reduced_integrals

spec = ProblemSpec.from_expressions(KernelSpec(1, 2.0, 0.5), build_mesh([0, 1], 64), q=0.5, r=3.0, lam=1.0)
est = estimate_lambda0(spec)
for key in ("S_q1", "S_r1", "S_p", "M", "delta", "c_const", "lambda0"):
    print(f"{key:8s} {getattr(est, key):.6g}")

# %% [markdown]
# The sampled constants are lower bounds on the true discrete suprema, so
# lambda_0 is only an estimate. Here the search settles after a few starts.

# %%
for starts in (4, 16, 64):
    print(starts, estimate_lambda0(spec, SamplerConfig(starts=starts)).lambda0)

# %% [markdown]
# How much room is left? For random positive fields, compare lambda B with
# the peak of m(t). Below lambda_0 the ratio stays under one.

# %%
spec_half = spec.with_lambda(est.lambda0 / 2)
rng = np.random.default_rng(0)
ratios = []
for _ in range(200):
    ri = reduced_integrals(spec_half, np.abs(rng.standard_normal(64)))
    rep = critical_points(ri, spec_half)
    ratios.append(spec_half.lam * ri.B / rep.m_max)
print("max lambda B / max m:", max(ratios))
print("delta1 at lambda0/2:", est.delta1(spec_half.lam))
