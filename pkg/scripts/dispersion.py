"""Floquet stable points against the Bloch bands of the mapped potential V+."""

import numpy as np

from _common import parser, pyplot
from nhfloquet import compare_dispersion
from nhfloquet.formats import csv_text

CASES = [("H1", 2.0, (0.0, 40.0)), ("H2", 4.0, (-10.0, 40.0))]


def main():
    p = parser(__doc__)
    p.add_argument("--n", type=int, default=400, help="gamma^2 grid points")
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    plt = pyplot(args)
    if plt:
        fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for i, (name, mu, (lo, hi)) in enumerate(CASES):
        cmp_ = compare_dispersion(name, mu, np.linspace(lo, hi, args.n), workers=args.workers)
        beta, gsq = cmp_.floquet.stable_points()
        (args.out / f"floquet_{name}.csv").write_text(
            csv_text(["beta", "gamma_sq", "band_distance"], zip(beta, gsq, cmp_.discrepancies)))
        E = cmp_.band_energies
        rows = ((k, n, E[a, n].real, E[a, n].imag) for a, k in enumerate(cmp_.band_k) for n in range(E.shape[1]))
        (args.out / f"bands_{name}.csv").write_text(csv_text(["kL", "band_index", "re_E", "im_E"], rows))
        print(f"{name}: {len(beta)} stable points, max band distance {cmp_.max_discrepancy:.2e}")
        if plt:
            ax = axes[i]
            ax.plot(cmp_.band_k, E.real, color="tab:blue", lw=1)
            ax.plot(beta, gsq, "s", color="tab:red", ms=2)
            ax.set(xlabel=r"$\beta = kL$", ylabel=r"$\gamma^2$", title=rf"{name}, $\mu={mu}$", ylim=(lo, hi))
    if plt:
        fig.tight_layout()
        fig.savefig(args.out / "dispersion.png", dpi=150)


if __name__ == "__main__":
    main()
