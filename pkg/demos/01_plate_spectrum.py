# %% [markdown]
# # Coupled spectrum of the cantilevered silicon plate
#
# A 140 mm x 42 mm x 1 mm plate, clamped and held at T0 on its left edge, is
# meshed with 20 x 6 bilinear quadrilaterals. The coupled pencil (B, A) has
# 2 N_s + N_T = 700 eigenvalues. The purely real ones belong to the thermal
# class and the conjugate pairs to the structural class.

# %%
import numpy as np

from thermomms import SILICON, PlateGeometry, assemble_system, build_dof_map, generate_plate_mesh
from thermomms import full_eigensolution, to_state_space
from thermomms.analysis import classify, spectra_report

geom = PlateGeometry(h=0.042, l=0.140, t=0.001)
mesh = generate_plate_mesh(geom, nx=20, ny=6)
dofs = build_dof_map(mesh, {"structural": ["left_edge"], "thermal": ["left_edge"]})
model = assemble_system(mesh, SILICON, dofs, geom.t)
ssm = to_state_space(model)
print(f"N_s = {ssm.n_s}, N_T = {ssm.n_t}, state dimension {ssm.dim}")

# %% [markdown]
# The pencil is symmetric by construction, with no round-off in the assembled blocks.

# %%
print("max|A - A^T| =", abs(ssm.A - ssm.A.T).max(), " max|B - B^T| =", abs(ssm.B - ssm.B.T).max())

# %%
es = full_eigensolution(ssm)
spec = classify(es, ssm.n_t)
print(f"{spec.n_thermal} purely real eigenvalues (tolerance {spec.tol:g}), {spec.n_pairs} pairs")
print("thermal |mu| range:    %.3g .. %.3g 1/s" % (spec.thermal.min(), spec.thermal.max()))
print("structural |mu| range: %.3g .. %.3g 1/s" % tuple(np.abs(spec.structural)[[0, -1]]))
print("overlap:", spectra_report([("full", spec)])["overlap"]["full"])

# %% [markdown]
# Lowest natural frequencies in Hz, from the imaginary parts:

# %%
print(np.round(spec.structural[:5].imag / (2 * np.pi), 1))
