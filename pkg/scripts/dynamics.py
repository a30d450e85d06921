"""Intra-period eigenvalues of U(t) and spin populations for H1 at two stable points."""

import numpy as np

from _common import parser, pyplot
from nhfloquet import IntegratorSettings, intra_period_spectrum, make_preset, population_trace, split_events
from nhfloquet.formats import csv_text

POINTS = [(1.0, 2.0), (0.1, 4.0)]


def main():
    p = parser(__doc__)
    p.add_argument("--periods", type=int, default=3)
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    plt = pyplot(args)
    settings = IntegratorSettings(dense_samples=1000)
    if plt:
        fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    for j, (g, mu) in enumerate(POINTS):
        model = make_preset("H1", g, mu)
        t, ev = intra_period_spectrum(model, settings)
        tr = population_trace(model, (1, 0), n_periods=args.periods, settings=settings)
        tag = f"g{g}_mu{mu}"
        (args.out / f"spectrum_{tag}.csv").write_text(csv_text(
            ["t", "re_lambda1", "re_lambda2", "im_lambda1", "im_lambda2"],
            zip(t, ev[:, 0].real, ev[:, 1].real, ev[:, 0].imag, ev[:, 1].imag)))
        (args.out / f"populations_{tag}.csv").write_text(csv_text(
            ["t", "p_up", "p_down", "p_sum"], zip(tr.times, tr.p_up, tr.p_down, tr.p_up + tr.p_down)))
        print(f"gamma={g} mu={mu}: {len(split_events(t, ev))} split-recombine event(s), "
              f"max P_up+P_down = {np.max(tr.p_up + tr.p_down):.3f}")
        if plt:
            axes[0, j].plot(t, ev.real)
            axes[0, j].set(xlabel="t", ylabel=r"Re $\lambda$", title=rf"$\gamma={g}$, $\mu={mu}$")
            axes[1, j].plot(tr.times, tr.p_up, label=r"$P_\uparrow$")
            axes[1, j].plot(tr.times, tr.p_down, label=r"$P_\downarrow$")
            axes[1, j].set(xlabel="t")
            axes[1, j].legend()
    if plt:
        fig.tight_layout()
        fig.savefig(args.out / "dynamics.png", dpi=150)


if __name__ == "__main__":
    main()
