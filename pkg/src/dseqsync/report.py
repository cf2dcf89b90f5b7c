"""Figure rendering for the experiment outputs.

Each renderer takes the rows produced by a harness run and writes a PNG next
to the delimited output. Rendering is optional; the CSV files remain the
primary interface.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = [
    "plot_sequence",
    "plot_mse_sweep",
    "plot_zc_symmetry",
    "plot_ratio_curve",
    "plot_crlb_compare",
    "plot_multiuser",
]


def _bits_label(bits) -> str:
    return "inf bits" if bits == math.inf else f"{int(bits)}-bit"


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_sequence(samples, path: str, title: str = "sequence") -> str:
    fig, (ax_re, ax_im) = plt.subplots(2, 1, sharex=True, figsize=(7, 4.5))
    ax_re.plot(samples.real, lw=0.8)
    ax_im.plot(samples.imag, lw=0.8, color="tab:orange")
    ax_re.set_ylabel("re")
    ax_im.set_ylabel("im")
    ax_im.set_xlabel("sample index")
    ax_re.set_title(title)
    return _save(fig, path)


def plot_mse_sweep(rows, path: str) -> str:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    keys = sorted({(r.method, r.bits) for r in rows}, key=str)
    for method, bits in keys:
        pts = [(r.var, r.mse) for r in rows if r.method == method and r.bits == bits]
        pts.sort()
        ax.semilogy(
            [p[0] for p in pts],
            [p[1] for p in pts],
            marker="o",
            label=f"{method}, {_bits_label(bits)}",
        )
    ax.set_xlabel(rows[0].sweep if rows else "")
    ax.set_ylabel("MSE (subcarrier$^2$)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_zc_symmetry(rows, path: str) -> str:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for bits in sorted({b for _, b, _ in rows}, key=float):
        pts = sorted((n, z) for n, b, z in rows if b == bits)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="s", label=_bits_label(bits))
    ax.set_xlabel("ZC sequence length")
    ax.set_ylabel("matched-filter symmetry metric")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_ratio_curve(rows, path: str) -> str:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for bits in sorted({b for _, b, _, _ in rows}, key=float):
        pts = sorted((off, mean) for off, b, mean, _ in rows if b == bits)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", label=_bits_label(bits))
    ax.set_xlabel("CFO offset from reference (rad/sample)")
    ax.set_ylabel("ratio metric")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_crlb_compare(rows, path: str) -> str:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    methods = sorted({m for _, m, _, _, _ in rows})
    for method in methods:
        pts = sorted((snr, mse, crlb) for snr, m, mse, crlb, _ in rows if m == method)
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"{method} MSE")
        ax.semilogy(
            [p[0] for p in pts], [p[2] for p in pts], ls="--", label=f"{method} 1-bit bound"
        )
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("MSE / bound (subcarrier$^2$)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_multiuser(rows, path: str) -> str:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    labels = sorted({label for _, label, _, _ in rows})
    for label in labels:
        pts = sorted(
            (r, mse) for r, lab, mse, _ in rows if lab == label and not math.isnan(mse)
        )
        if pts:
            ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    ax.set_xlabel("CFO range half-width (subcarriers)")
    ax.set_ylabel("multi-user MSE (subcarrier$^2$)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    return _save(fig, path)
