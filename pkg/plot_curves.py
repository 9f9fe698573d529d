# plot_curves.py
"""Render a results CSV as BER vs Eb/N0 curves, one panel per N_R."""
import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

BOUND_STYLES = {
    "simo_ldb": ":",
    "simo_mfb": "-.",
    "simo_awgn_mfb": "--",
}


def curve_label(detector: str, iteration: int, iterative: bool) -> str:
    label = detector.upper().replace("_", "/")
    return f"{label} p={iteration}" if iterative else label


def plot(df: pd.DataFrame, out_path: str):
    panels = sorted(df["nr"].unique())
    fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 4), sharey=True, squeeze=False)

    for ax, nr in zip(axes[0], panels):
        sub = df[df["nr"] == nr]
        for (detector, iteration), curve in sub.groupby(["detector", "iteration"], sort=False):
            curve = curve.sort_values("ebn0_db")
            iterative = sub[sub["detector"] == detector]["iteration"].nunique() > 1
            label = curve_label(detector, iteration, iterative)
            style = BOUND_STYLES.get(detector, "-")
            color = None
            if curve["ber_semi"].notna().any():
                line, = ax.semilogy(curve["ebn0_db"], curve["ber_semi"], style, label=label)
                color = line.get_color()
            if "ber_mc" in curve and curve["ber_mc"].notna().any():
                mc = curve[curve["ber_mc"] > 0]
                ax.semilogy(mc["ebn0_db"], mc["ber_mc"], "o", color=color, markersize=4,
                            label=None if color else f"{label} (MC)")
        nt = sub[~sub["detector"].isin(BOUND_STYLES)]["nt"]
        title = f"N_T={nt.iloc[0]}, N_R={nr}" if len(nt) else f"N_R={nr}"
        ax.set_title(title)
        ax.set_xlabel("Eb/N0 (dB)")
        ax.set_ylim(1e-5, 0.5)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
    axes[0][0].set_ylabel("BER")

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    print(f"✅ Saved {out_path}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Plot BER curves from a results CSV")
    parser.add_argument("csv", help="CSV written by main.py")
    parser.add_argument("--out", default="ber_curves.png", help="output image")
    args = parser.parse_args(argv)

    try:
        df = pd.read_csv(args.csv)
    except (OSError, pd.errors.ParserError) as e:
        print(f"❌ Could not read {args.csv}: {e}", file=sys.stderr)
        return 1
    if df.empty:
        print(f"❌ {args.csv} has no rows", file=sys.stderr)
        return 1
    plot(df, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
