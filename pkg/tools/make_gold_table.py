"""Regenerate ``src/ioncasimir/data/gold_loss.dat``.

The table is eps''(omega) of the Rakic et al. (1998) Lorentz-Drude fit to gold,
sampled log-uniformly between 0.125 eV and 100 eV. It stands in for measured
optical data; swap in a measured table with the same two-column layout to use one.
"""
from pathlib import Path

import numpy as np

WP = 9.03  # eV
F0, G0 = 0.760, 0.053
LORENTZ = [  # (f, gamma, omega) in eV
    (0.024, 0.241, 0.415),
    (0.010, 0.345, 0.830),
    (0.071, 0.870, 2.969),
    (0.601, 2.494, 4.304),
    (4.384, 2.214, 13.32),
]


def eps_ld(w):
    eps = 1 - F0 * WP**2 / (w * (w + 1j * G0))
    for f, g, w0 in LORENTZ:
        eps += f * WP**2 / ((w0**2 - w**2) - 1j * w * g)
    return eps


def main():
    w = np.geomspace(0.125, 100.0, 400)
    out = Path(__file__).resolve().parents[1] / "src" / "ioncasimir" / "data" / "gold_loss.dat"
    header = (
        "eps'' of gold from the Rakic 1998 Lorentz-Drude fit, regenerated by tools/make_gold_table.py\n"
        "columns: photon energy (eV), imaginary permittivity"
    )
    np.savetxt(out, np.column_stack([w, eps_ld(w).imag]), fmt="%.8e", header=header)


if __name__ == "__main__":
    main()
