"""Stability over rational frequency ratios alpha = p/q for H3 and H4."""

import numpy as np

from _common import parser, pyplot
from nhfloquet import butterfly, butterfly_cross_check
from nhfloquet.formats import csv_text


def main():
    p = parser(__doc__)
    p.add_argument("--q-max", type=int, default=12)
    p.add_argument("--n", type=int, default=200, help="gamma^2 grid points over [0, 40]")
    p.add_argument("--mu", type=float, default=2.0)
    p.add_argument("--cross-check", action="store_true", help="check H3 stable points against lattice bands")
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    plt = pyplot(args)
    gsq = np.linspace(0, 40, args.n)
    if plt:
        fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
    for i, name in enumerate(("H3", "H4")):
        data = butterfly(name, args.mu, args.q_max, gsq, workers=args.workers)
        (args.out / f"butterfly_{name}.csv").write_text(csv_text(data.columns, data.rows()))
        gaps = {a: data.gap_count(a) for a in ("1/2", "1/3")}
        print(f"{name}: {int(data.stable_mask().sum())} stable points, gaps {gaps}")
        if name == "H3" and args.cross_check:
            chk = butterfly_cross_check(data, workers=args.workers)
            print(f"H3 cross-check: {chk.pass_fraction:.4f} of {len(chk.distance)} points within 1e-4")
        if plt:
            al = np.array([a.value for a in data.alphas])
            ai, gi = np.nonzero(data.stable_mask())
            axes[i].plot(al[ai], gsq[gi], ".", color="tab:blue", ms=1.5)
            axes[i].set(xlabel=r"$\alpha$", title=rf"{name}, $\mu={args.mu:g}$")
    if plt:
        axes[0].set_ylabel(r"$\gamma^2$")
        fig.tight_layout()
        fig.savefig(args.out / "butterfly.png", dpi=150)


if __name__ == "__main__":
    main()
