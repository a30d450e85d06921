"""Extended-unitarity phase diagrams of H1 and H2 over (gamma, mu)."""

import numpy as np

from _common import parser, pyplot
from nhfloquet import phase_diagram
from nhfloquet.formats import csv_text

DOMAINS = {"H1": (4.0, 4.0), "H2": (3.0, 6.0)}


def main():
    p = parser(__doc__)
    p.add_argument("--n", type=int, default=201, help="grid points per axis")
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    plt = pyplot(args)
    if plt:
        fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for i, (name, (g_max, mu_max)) in enumerate(DOMAINS.items()):
        gammas = np.linspace(0, g_max, args.n)
        mus = np.linspace(0, mu_max, args.n)
        pd = phase_diagram(name, gammas, mus, workers=args.workers)
        (args.out / f"phase_{name}.csv").write_text(csv_text(pd.columns, pd.rows()))
        stable = pd.stability == "extended_unitary"
        print(f"{name}: {stable.sum()} of {stable.size} cells extended unitary")
        if plt:
            ax = axes[i]
            ax.pcolormesh(gammas, mus, stable, cmap="Greys", vmin=0, vmax=1.6, shading="nearest")
            ax.set(xlabel=r"$\gamma$", ylabel=r"$\mu$", title=name)
    if plt:
        fig.tight_layout()
        fig.savefig(args.out / "phase_diagrams.png", dpi=150)


if __name__ == "__main__":
    main()
