# %% [markdown]
# # Micro-scale plate: overlapping spectra
#
# Shrinking the plate to 20 um x 4 um x 0.1 um speeds up heat diffusion as 1/L^2
# and the vibration frequencies only as 1/L. The thermal and structural |mu|
# ranges now overlap, yet the purely-real rule still separates the classes.

# %%
from thermomms.scenario import Scenario, bundled_config
from thermomms.analysis import spectra_report

sc = Scenario.from_file(bundled_config("plate_micro"))
es, full = sc.full_spectrum()
print("overlap of |mu| ranges:", spectra_report([("full", full)])["overlap"]["full"])

# %%
for n in (30, 70, 110):
    for method in ("uncoupled", "two-step"):
        rep = sc.errors(sc.reduce(method, n, n))
        print(f"n={n:3d} {method:>9}: thermal max {rep.thermal_max:.2e}, "
              f"structural max {rep.structural_max:.2e}")
